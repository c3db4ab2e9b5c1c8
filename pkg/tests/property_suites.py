"""Seeded randomized property runners shared by the property and acceptance tests.

Each runner draws ``cases`` random instances and returns the number of
violations together with the worst discrepancy seen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from conftest import random_config, random_interaction

from gibbslab.cocycles import from_interaction, generator
from gibbslab.lattice import Configuration, Shape, SftSpace, is_admissible_around
from gibbslab.norms import norm_ns, norm_sullivan, norm_vs, random_pattern
from gibbslab.zoo import coloring, full_shift, hardcore

TOL = 1e-9

# (space, window for random configurations, region that is refilled, interaction radius)
SPACES = (
    (hardcore(1), Shape.interval(-8, 8), Shape.interval(-3, 3), 2),
    (full_shift(3, 1), Shape.interval(-8, 8), Shape.interval(-3, 3), 2),
    (coloring(3, 1), Shape.interval(-8, 8), Shape.interval(-3, 3), 2),
    (hardcore(2), Shape.ball(3, 2), Shape.ball(1, 2), 1),
)
SAFE_SPACES = tuple(s for s in SPACES if s[0].safe_symbol is not None)
# generator sums need single-site paths, which one-dimensional 3-colorings lack
PIVOT_SPACES = tuple(s for s in SPACES if s[0].pivot) + ((coloring(4, 1), Shape.interval(-8, 8), Shape.interval(-1, 1), 2),)


@dataclass
class Tally:
    cases: int = 0
    violations: int = 0
    worst: float = 0.0
    examples: list = field(default_factory=list)

    def record(self, gap: float, info: object = None) -> None:
        self.cases += 1
        self.worst = max(self.worst, gap)
        if gap > TOL:
            self.violations += 1
            if len(self.examples) < 3:
                self.examples.append(info)

    @property
    def ok(self) -> bool:
        return self.cases > 0 and self.violations == 0

    def summary(self) -> str:
        return f"{self.cases} cases, {self.violations} violations, worst gap {self.worst:.2e}"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _refill(sft: SftSpace, x: Configuration, region: Shape, rng: np.random.Generator) -> Configuration | None:
    y = x.with_patch(random_pattern(sft, region, rng, x))
    return y if is_admissible_around(sft, y, region) else None


def _draw(spaces, rng: np.random.Generator):
    sft, window, region, radius = spaces[int(rng.integers(len(spaces)))]
    phi = random_interaction(rng, q=sft.q, d=sft.dimension, radius=radius)
    while True:
        x = random_config(sft, window, rng)
        if is_admissible_around(sft, x, window):
            return sft, region, phi, x


def cocycle_equation(cases: int = 1000, seed: int = 0) -> Tally:
    """``psi(x, y) + psi(y, z) = psi(x, z)`` and antisymmetry."""
    rng, t = _rng(seed), Tally()
    while t.cases < cases:
        sft, region, phi, x = _draw(SPACES, rng)
        y, z = _refill(sft, x, region, rng), _refill(sft, x, region, rng)
        if y is None or z is None:
            continue
        psi = from_interaction(phi)
        gap = abs(psi(x, y) + psi(y, z) - psi(x, z)) + abs(psi(x, y) + psi(y, x))
        t.record(gap, (sft.name, x, y, z))
    return t


def shift_invariance(cases: int = 1000, seed: int = 1) -> Tally:
    """``psi(sigma^k x, sigma^k y) = psi(x, y)`` for random translations."""
    rng, t = _rng(seed), Tally()
    while t.cases < cases:
        sft, region, phi, x = _draw(SPACES, rng)
        y = _refill(sft, x, region, rng)
        if y is None:
            continue
        psi = from_interaction(phi)
        k = tuple(int(c) for c in rng.integers(-20, 21, size=sft.dimension))
        t.record(abs(psi(x.shift(k), y.shift(k)) - psi(x, y)), (sft.name, k))
    return t


def _random_safe_path(sft: SftSpace, x: Configuration, y: Configuration, rng: np.random.Generator):
    """Lower every disagreeing site to the safe symbol, then raise to ``y``, each in random order."""
    delta = list(x.disagreement(y))
    down = [delta[i] for i in rng.permutation(len(delta))]
    up = [delta[i] for i in rng.permutation(len(delta))]
    return [(s, 0) for s in down if x[s] != 0] + [(s, y[s]) for s in up if y[s] != 0]


def generator_paths(cases: int = 1000, seed: int = 2) -> Tally:
    """Generator sums agree along different admissible paths and with the cocycle."""
    rng, t = _rng(seed), Tally()
    while t.cases < cases:
        sft, region, phi, x = _draw(PIVOT_SPACES, rng)
        y = _refill(sft, x, region, rng)
        if y is None:
            continue
        psi = from_interaction(phi)
        g = generator(psi, sft)
        want = psi(x, y)
        if sft.safe_symbol is not None:
            moves = _random_safe_path(sft, x, y, rng)
            other = g.along(x, moves)
        else:
            # the breadth-first path from y back to x is a different route
            other = -g.along(y, g.path(y, x))
        gap = max(abs(g(x, y) - want), abs(other - want))
        t.record(gap, (sft.name, x, y))
    return t


def norm_bounds(cases: int = 1000, seed: int = 3) -> Tally:
    """Sullivan norm of ``psi_Phi`` is at most twice the NS norm and at most the VS norm."""
    rng, t = _rng(seed), Tally()
    while t.cases < cases:
        sft = SPACES[int(rng.integers(len(SPACES)))][0]
        phi = random_interaction(rng, q=sft.q, d=sft.dimension, shapes=2, radius=1)
        sull = norm_sullivan(from_interaction(phi), sft).value
        gap = max(sull - 2 * norm_ns(phi, sft).value, sull - norm_vs(phi, sft).value)
        t.record(max(gap, 0.0), (sft.name, phi.entries))
    return t


def linear_growth(cases: int = 1000, seed: int = 4) -> Tally:
    """``|psi(x, y)| <= 2 |A| ||psi||_Sull`` where ``A`` is the disagreement set."""
    rng, t = _rng(seed), Tally()
    while t.cases < cases:
        sft, region, phi, x = _draw(SAFE_SPACES, rng)
        y = _refill(sft, x, region, rng)
        if y is None:
            continue
        psi = from_interaction(phi)
        bound = 2 * len(x.disagreement(y)) * norm_sullivan(psi, sft).value
        t.record(max(abs(psi(x, y)) - bound, 0.0), (sft.name, x, y))
    return t


SUITES = {
    "cocycle equation": cocycle_equation,
    "shift invariance": shift_invariance,
    "generator path independence": generator_paths,
    "norm operator bounds": norm_bounds,
    "linear growth": linear_growth,
}
