import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qfactor.qnum import QParams

settings.register_profile("qfactor", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qfactor")


@pytest.fixture
def p13():
    return QParams(1.3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def check_all(tmp_path_factory):
    """One default `check all` run shared by the CLI and acceptance tests."""
    import time

    from qfactor.cli import main
    from qfactor.report import read_report

    out = tmp_path_factory.mktemp("check_all")
    t0 = time.perf_counter()
    code = main(["check", "all", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    cfg, reports = read_report(out / "report.json")
    return {"code": code, "reports": reports, "config": cfg, "elapsed": elapsed, "out": out}


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
