import numpy as np
import pytest

from ychg import BinaryImage, SynthSpec, synth

ACCEPTANCE_LINES = []


def naive_column_runs(image, col):
    """Pixel-by-pixel reference: [(y_top, y_bot), ...] for one column."""
    runs = []
    start = None
    for y in range(image.height):
        if image.get(col, y):
            if start is None:
                start = y
        elif start is not None:
            runs.append((start, y - 1))
            start = None
    if start is not None:
        runs.append((start, image.height - 1))
    return runs


def example_b():
    """7 rows x 2 columns: col 0 runs [0,1],[3,6]; col 1 runs [0,4],[6,6]."""
    px = np.zeros((7, 2), dtype=np.uint8)
    px[0:2, 0] = 1
    px[3:7, 0] = 1
    px[0:5, 1] = 1
    px[6, 1] = 1
    return BinaryImage(px)


def random_corpus(n=1000, max_side=64, seed=2013):
    densities = (0.1, 0.3, 0.5, 0.7, 0.9)
    rng = np.random.default_rng(seed)
    for i in range(n):
        w, h = (int(v) for v in rng.integers(1, max_side + 1, size=2))
        yield synth(SynthSpec("random", w, h, density=densities[i % 5], seed=1000 + i))


def pattern_corpus(max_side=32):
    sizes = [(1, 1), (2, 3), (5, 5), (8, 11), (17, 9), (32, 32)]
    for w, h in sizes:
        for name in ("full", "empty", "frame"):
            yield synth(SynthSpec(name, w, h))
        for k in range(1, 6):
            if k <= h / 2:
                yield synth(SynthSpec("hbands", w, h, k=k))
        for cell in (1, 2, 3):
            yield synth(SynthSpec("checker", w, h, cell=cell))


@pytest.fixture(scope="session")
def corpus():
    return list(random_corpus()) + list(pattern_corpus())


@pytest.fixture
def frame5():
    return synth(SynthSpec("frame", 5, 5))


@pytest.fixture
def full4():
    return synth(SynthSpec("full", 4, 4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
