import numpy as np
import pytest

from copymove.raster import BinaryMask, GrayImage
from copymove.synth import default_bases

from oracles import naive_lbp

RADII = (1.0, 2.0, 3.0, 4.0)


@pytest.fixture(scope="session")
def random_images():
    rng = np.random.default_rng(20240601)
    return [rng.integers(0, 256, size=(32, 32), dtype=np.uint8) for _ in range(100)]


@pytest.fixture(scope="session")
def lbp_oracle_maps(random_images):
    """Naive code maps for every (image, radius), computed once per session."""
    return {
        (i, r): naive_lbp(img.tolist(), 8, r)
        for i, img in enumerate(random_images)
        for r in RADII
    }


@pytest.fixture(scope="session")
def bases():
    return default_bases(5, (384, 384), seed=0)


def square_mask(shape, squares):
    bits = np.zeros(shape, dtype=bool)
    for u, v, size in squares:
        bits[v:v + size, u:u + size] = True
    return BinaryMask(bits)


def gray(a):
    return GrayImage(np.asarray(a, dtype=np.uint8))


ACCEPTANCE_LINES = []


@pytest.fixture()
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""

    def record(n, ok, detail=""):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"criterion {n}: {status}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
