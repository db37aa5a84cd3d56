import numpy as np
import pytest

from tvscad.synth import PatternSpec, add_gaussian_noise, generate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_blocky():
    """32x32 two-level nested squares with sigma=20 noise."""
    truth = generate(PatternSpec("nested_squares", 32, [0.0, 255.0], 8))
    return truth, add_gaussian_noise(truth, 20.0, 7)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    item.config._criteria.setdefault(mark.args[0], []).append((item.name, report.passed, detail))


def pytest_terminal_summary(terminalreporter, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(criteria):
        results = criteria[n]
        ok = all(passed for _, passed, _ in results)
        details = " | ".join(f"{name}: {d}" if d else name for name, _, d in results)
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {details}")
