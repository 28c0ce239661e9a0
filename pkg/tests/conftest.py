import pytest

from foveatile import synth
from foveatile.mia_engine import build_manifest


@pytest.fixture(scope="session")
def small_image():
    return synth.composite(1280, 720, seed=5)


@pytest.fixture(scope="session")
def small_manifest(small_image):
    # three levels: native, half, quarter
    return build_manifest(small_image, levels=[(1280, 720), (640, 360), (320, 180)], source_id="composite")


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts so failures stay failures."""
    def record(n, ok, detail):
        ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
