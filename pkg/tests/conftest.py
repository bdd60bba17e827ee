import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pontcalc.assoc import build_restricted_YZ  # noqa: E402
from pontcalc.charts import build_cd, circle_atlas, torus_atlas  # noqa: E402
from pontcalc.chern import Theta, omega, orient_fibers  # noqa: E402
from pontcalc.pont import FixingContext, find_fixing_cycle  # noqa: E402

ACCEPTANCE = {}


def run_pipeline(atlas, flavor):
    """Every stage once, with wall-clock time per stage."""
    t = {}
    out = {"atlas": atlas, "flavor": flavor, "times": t}
    start = time.perf_counter()
    out["cd"] = build_cd(atlas, flavor)
    t["charts"] = time.perf_counter() - start
    out["Y"], out["Z"] = build_restricted_YZ(out["cd"])
    t["assoc"] = time.perf_counter() - start - t["charts"]
    mark = time.perf_counter()
    out["orient"] = orient_fibers(out["Y"])
    out["theta"] = Theta(out["Y"], out["orient"])
    out["omega"] = omega(out["Y"], out["orient"], out["theta"])
    t["chern"] = time.perf_counter() - mark
    mark = time.perf_counter()
    out["ctx"] = FixingContext.build(out["Y"], out["orient"], out["omega"], flavor)
    out["fix"] = find_fixing_cycle(out["ctx"])
    t["fix"] = time.perf_counter() - mark
    return out


@pytest.fixture(scope="session")
def circle_run():
    return run_pipeline(circle_atlas(), "affine")


@pytest.fixture(scope="session")
def torus_linear_run():
    return run_pipeline(torus_atlas(), "linear")


@pytest.fixture(scope="session")
def torus_affine_run():
    return run_pipeline(torus_atlas(), "affine")


@pytest.fixture
def record():
    def _record(criterion, ok, seconds, detail=""):
        ACCEPTANCE[criterion] = (ok, seconds, detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, seconds, detail = ACCEPTANCE[k]
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"criterion {k}: {status} ({seconds:.1f} s) {detail}".rstrip())
