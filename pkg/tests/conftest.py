from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from gibbslab.cocycles import Interaction
from gibbslab.lattice import Configuration, Shape, SftSpace
from gibbslab.norms import random_pattern
from gibbslab.zoo import hardcore

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")

# acceptance criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")


def nn_interaction(h: float = 1.0, J: float = 0.5) -> Interaction:
    """Nearest-neighbour interaction on two symbols: field ``h`` on 1 and ``J`` on the word 10."""
    return Interaction({Shape.of([(0,)]): {(1,): h}, Shape.of([(0,), (1,)]): {(1, 0): J}})


def random_interaction(rng: np.random.Generator, q: int = 2, d: int = 1, shapes: int = 3, radius: int = 2) -> Interaction:
    """A random shift-invariant interaction with small shapes near the origin."""
    phi = Interaction()
    for _ in range(shapes):
        size = int(rng.integers(1, 3))
        sites = {tuple(int(c) for c in rng.integers(0, radius + 1, size=d)) for _ in range(size)}
        shape = Shape.of(sites)
        table = {}
        for _ in range(int(rng.integers(1, q ** len(shape) + 1))):
            key = tuple(int(c) for c in rng.integers(0, q, size=len(shape)))
            table[key] = float(rng.normal())
        phi.add_entry(shape, table)
    return phi


def random_config(sft: SftSpace, window: Shape, rng: np.random.Generator, base: Configuration | None = None) -> Configuration:
    base = base or sft.default_background
    return base.with_patch(random_pattern(sft, window, rng, base))


def random_pair(sft: SftSpace, window: Shape, region: Shape, rng: np.random.Generator):
    """A random admissible configuration and a random refilling of ``region``."""
    x = random_config(sft, window, rng)
    cells = random_pattern(sft, region, rng, x)
    return x, x.with_patch(cells)


@pytest.fixture
def hc() -> SftSpace:
    return hardcore(1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(1234))
