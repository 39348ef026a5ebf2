import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metchar import Stroke, SynthSpec, extract_features, generate_synthetic  # noqa: E402


def two_class_spec(jitter=1, m=8, seed=11):
    """Vertical strokes of length 10 vs length 4 in different columns."""
    return SynthSpec(
        classes=[
            [Stroke("vertical", 3, 4, 10)],
            [Stroke("vertical", 5, 10, 4)],
        ],
        samples_per_class=m,
        grid_size=16,
        jitter=jitter,
        seed=seed,
        labels=["long", "short"],
    )


@pytest.fixture
def two_class():
    glyphs = generate_synthetic(two_class_spec())
    return [extract_features(g) for g in glyphs], [g.label for g in glyphs]


def random_glyph_bits(rng, size, density=None):
    p = rng.uniform(0.05, 0.6) if density is None else density
    return (rng.random((size, size)) < p).astype(np.uint8)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.lines():
            terminalreporter.write_line(line)
