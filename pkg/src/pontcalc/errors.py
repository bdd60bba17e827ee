class PontcalcError(Exception):
    """Base class; `kind` is echoed in CLI error bodies."""

    kind = "error"


class InputError(PontcalcError, ValueError):
    kind = "input"


class RankError(PontcalcError, ValueError):
    kind = "rank"


class StructureError(PontcalcError):
    kind = "structure"


class RefinementError(PontcalcError):
    kind = "refinement"


class ConstructionError(PontcalcError):
    kind = "construction"


class PresheafError(PontcalcError):
    kind = "presheaf"


class ResourceError(PontcalcError):
    kind = "resource"
