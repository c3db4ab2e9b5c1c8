"""Interactions, cocycles and the specification kernels they induce.

A cocycle is anything that assigns a real number to an asymptotic pair and
adds up along chains: ``psi(x, z) = psi(x, y) + psi(y, z)``.  Three concrete
evaluators live here: interaction sums, single-site generators walked along
pivot paths, and signed pattern counts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InputError
from .lattice import (
    AsymptoticPair,
    Configuration,
    Pattern,
    Shape,
    Site,
    SftSpace,
    add,
    enumerate_patterns,
    memory_set,
    pivot_path,
    sub,
    zeta,
)

Table = dict[tuple[int, ...], float]


# ---------------------------------------------------------------------------
# Interactions
# ---------------------------------------------------------------------------


class Interaction:
    """A finite-range map from patterns to reals.

    In shift-invariant mode each entry shape is stored normalized (least site
    at the origin) and applies to every translate.  In site-indexed mode each
    entry shape is a fixed set of sites.  Missing table keys count as zero.
    """

    def __init__(self, entries: Mapping[Shape, Mapping[tuple[int, ...], float]] | None = None, shift_invariant: bool = True):
        self.shift_invariant = shift_invariant
        self.entries: dict[Shape, Table] = {}
        for shape, table in (entries or {}).items():
            self.add_entry(shape, table)

    @property
    def mode(self) -> str:
        return "shift_invariant" if self.shift_invariant else "site_indexed"

    def add_entry(self, shape: Shape, table: Mapping[tuple[int, ...], float]) -> None:
        if not shape:
            raise InputError("interaction entries need a nonempty shape")
        if self.shift_invariant:
            shape, _ = shape.normalized()
        target = self.entries.setdefault(shape, {})
        for key, value in table.items():
            key = tuple(int(c) for c in key)
            if len(key) != len(shape):
                raise InputError("table key length does not match its shape")
            target[key] = target.get(key, 0.0) + float(value)

    def copy(self) -> "Interaction":
        return Interaction(self.entries, self.shift_invariant)

    def _combine(self, other: "Interaction", sign: float) -> "Interaction":
        if self.shift_invariant != other.shift_invariant:
            raise InputError("cannot combine shift-invariant and site-indexed interactions")
        out = self.copy()
        for shape, table in other.entries.items():
            out.add_entry(shape, {k: sign * v for k, v in table.items()})
        return out

    def __add__(self, other: "Interaction") -> "Interaction":
        return self._combine(other, 1.0)

    def __sub__(self, other: "Interaction") -> "Interaction":
        return self._combine(other, -1.0)

    def scaled(self, factor: float) -> "Interaction":
        return Interaction(
            {s: {k: factor * v for k, v in t.items()} for s, t in self.entries.items()},
            self.shift_invariant,
        )

    @property
    def support(self) -> Shape:
        out = Shape()
        for shape in self.entries:
            out = out | shape
        return out

    def range(self) -> int:
        return max((s.diameter() for s in self.entries), default=0)

    def placements(self, region: Shape) -> Iterator[tuple[tuple[Site, ...], Table]]:
        """Every translate of every entry shape meeting ``region``, each once."""
        if self.shift_invariant:
            for shape, table in self.entries.items():
                offsets = sorted({sub(r, s) for r in region for s in shape})
                for k in offsets:
                    yield tuple(add(k, s) for s in shape), table
        else:
            for shape, table in self.entries.items():
                if not shape.isdisjoint(region):
                    yield shape.sites, table

    def placements_containing(self, site: Site) -> Iterator[tuple[tuple[Site, ...], Table]]:
        return self.placements(Shape((site,)))

    def energy_change(self, x: Configuration, y: Configuration, region: Shape | None = None) -> float:
        """``sum_C [Phi(y_C) - Phi(x_C)]`` over placements meeting the disagreement."""
        if region is None:
            region = x.disagreement(y)
        total = 0.0
        for sites, table in self.placements(region):
            total += table.get(tuple(y[u] for u in sites), 0.0) - table.get(tuple(x[u] for u in sites), 0.0)
        return total

    def __repr__(self) -> str:
        return f"Interaction(mode={self.mode}, shapes={[s.sites for s in self.entries]})"


# ---------------------------------------------------------------------------
# Cocycles
# ---------------------------------------------------------------------------


class Cocycle:
    """Base class: a real-valued additive function on asymptotic pairs."""

    integer_valued = False
    shift_invariant = True

    def __call__(self, x: Configuration, y: Configuration) -> float:
        raise NotImplementedError

    def memory_set(self, region: Shape) -> Shape:
        """A set ``M ⊇ region`` such that values on pairs differing in ``region`` depend only on ``M``."""
        raise NotImplementedError(f"{type(self).__name__} declares no memory set")

    def generator_shape(self, sft: SftSpace) -> Shape:
        """Sites that ``x -> psi(x, zeta_0 x)`` depends on."""
        raise NotImplementedError(f"{type(self).__name__} declares no generator shape")

    def modulus(self, region: Shape, radius: int) -> float:
        """Bound on how much values on pairs differing in ``region`` move when
        the configurations change outside ``region`` expanded by ``radius``."""
        raise NotImplementedError(f"{type(self).__name__} declares no continuity modulus")

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other: "Cocycle") -> "Cocycle":
        return LinearCombination(((1.0, self), (-1.0, other)))

    def __neg__(self) -> "Cocycle":
        return LinearCombination(((-1.0, self),))

    def __rmul__(self, factor: float) -> "Cocycle":
        return LinearCombination(((float(factor), self),))


class InteractionCocycle(Cocycle):
    """The cocycle ``psi_Phi(x, y) = sum_C [Phi(y_C) - Phi(x_C)]``.

    ``tail_bound`` declares a per-site bound on interaction terms that were
    truncated away; it only enters :meth:`modulus`.
    """

    def __init__(self, phi: Interaction, tail_bound: float = 0.0):
        self.phi = phi
        self.tail_bound = float(tail_bound)
        self.shift_invariant = phi.shift_invariant

    def __call__(self, x: Configuration, y: Configuration) -> float:
        return self.phi.energy_change(x, y)

    def memory_set(self, region: Shape) -> Shape:
        out = region
        for sites, _ in self.phi.placements(region):
            out = out | Shape(sites)
        return out

    def generator_shape(self, sft: SftSpace) -> Shape:
        origin = Shape(((0,) * sft.dimension,))
        return self.memory_set(origin) | origin.plus(sft.reach)

    def modulus(self, region: Shape, radius: int) -> float:
        inner = region.expand(radius).as_set
        total = 0.0
        for sites, table in self.phi.placements(region):
            if not all(s in inner for s in sites):
                total += 2 * max((abs(v) for v in table.values()), default=0.0)
        return total + 2 * len(region) * self.tail_bound


def from_interaction(phi: Interaction, tail_bound: float = 0.0) -> InteractionCocycle:
    return InteractionCocycle(phi, tail_bound)


class PatternCountCocycle(InteractionCocycle):
    """``Delta_w(x, y)``: occurrences of ``w`` in ``y`` minus occurrences in ``x``."""

    integer_valued = True

    def __init__(self, w: Pattern):
        self.word = w
        super().__init__(Interaction({w.shape: {w.symbols: 1.0}}))

    def __call__(self, x: Configuration, y: Configuration) -> int:
        return int(round(super().__call__(x, y)))


class LinearCombination(Cocycle):
    """A finite real combination of cocycles."""

    def __init__(self, terms: Iterable[tuple[float, Cocycle]]):
        flat: list[tuple[float, Cocycle]] = []
        for coef, c in terms:
            if isinstance(c, LinearCombination):
                flat.extend((coef * k, inner) for k, inner in c.terms)
            else:
                flat.append((coef, c))
        self.terms = tuple(flat)
        self.shift_invariant = all(c.shift_invariant for _, c in self.terms)

    def __call__(self, x: Configuration, y: Configuration) -> float:
        return sum(coef * c(x, y) for coef, c in self.terms)

    def memory_set(self, region: Shape) -> Shape:
        out = region
        for _, c in self.terms:
            out = out | c.memory_set(region)
        return out

    def generator_shape(self, sft: SftSpace) -> Shape:
        out = Shape()
        for _, c in self.terms:
            out = out | c.generator_shape(sft)
        return out

    def modulus(self, region: Shape, radius: int) -> float:
        return sum(abs(coef) * c.modulus(region, radius) for coef, c in self.terms)


class GeneratorCocycle(Cocycle):
    """A cocycle rebuilt from its single-site generator ``g(x) = psi(x, zeta_0 x)``.

    ``g`` receives the values of ``x`` on ``shape`` (in shape order).  Values
    on a pair are sums of generator differences along a pivot path: the
    direct path through the safe symbol when one exists, otherwise the
    breadth-first path inside the disagreement box expanded by ``margin``.
    """

    def __init__(
        self,
        sft: SftSpace,
        g: Callable[[tuple[int, ...]], float],
        shape: Shape,
        margin: int = 1,
        memory: Callable[[Shape], Shape] | None = None,
    ):
        self.sft = sft
        self.g = lru_cache(maxsize=200_000)(g)
        self.shape = shape
        self.margin = margin
        self._memory = memory

    def at(self, z: Configuration, k: Site) -> float:
        """``g(sigma^k z)``."""
        return self.g(tuple(z[add(k, s)] for s in self.shape))

    def path(self, x: Configuration, y: Configuration) -> list[tuple[Site, int]]:
        delta = x.disagreement(y)
        if not delta:
            return []
        if self.sft.safe_symbol is not None:
            safe = self.sft.safe_symbol
            down = [(s, safe) for s in delta if x[s] != safe]
            up = [(s, y[s]) for s in delta if y[s] != safe]
            return down + up
        lo, hi = delta.bounds()
        box = Shape(tuple(itertools.product(*(range(a - self.margin, b + self.margin + 1) for a, b in zip(lo, hi)))))
        return pivot_path(self.sft, AsymptoticPair(x, y), box)

    def along(self, x: Configuration, moves: Sequence[tuple[Site, int]]) -> float:
        """Sum of generator differences along an explicit single-site path."""
        total = 0.0
        z = x
        for k, c in moves:
            nxt = z.with_patch({k: c})
            total += self.at(z, k) - self.at(nxt, k)
            z = nxt
        return total

    def __call__(self, x: Configuration, y: Configuration) -> float:
        return self.along(x, self.path(x, y))

    def generator_shape(self, sft: SftSpace) -> Shape:
        return self.shape

    def memory_set(self, region: Shape) -> Shape:
        if self._memory is None:
            raise NotImplementedError("generator cocycle built without a memory-set rule")
        return self._memory(region)


def generator(psi: Cocycle, sft: SftSpace) -> GeneratorCocycle:
    """Embed ``psi`` as its single-site generator ``x -> psi(x, zeta_0 x)``."""
    G = psi.generator_shape(sft)
    origin = (0,) * sft.dimension
    base = sft.default_background

    def g(values: tuple[int, ...]) -> float:
        x = base.with_patch(dict(zip(G, values)))
        return psi(x, zeta(sft, x, origin))

    memory = psi.memory_set if _has_memory(psi) else None
    return GeneratorCocycle(sft, g, G, memory=memory)


def _has_memory(psi: Cocycle) -> bool:
    try:
        psi.memory_set(Shape())
    except NotImplementedError:
        return False
    return True


def eval_cocycle(c: Cocycle, pair: AsymptoticPair) -> float:
    return c(pair.left, pair.right)


def eval_generator(g: GeneratorCocycle, pair: AsymptoticPair) -> float:
    return g(pair.left, pair.right)


# ---------------------------------------------------------------------------
# Specifications
# ---------------------------------------------------------------------------


def _logsumexp(values: np.ndarray) -> float:
    m = float(np.max(values))
    return m + math.log(float(np.sum(np.exp(values - m))))


@dataclass
class SpecKernel:
    """The kernel ``K_A(x, .)`` as a finite distribution over fillings of ``region``."""

    region: Shape
    fillings: list[tuple[int, ...]]
    log_probs: np.ndarray
    index: dict[tuple[int, ...], int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self.index = {p: i for i, p in enumerate(self.fillings)}

    def log_prob(self, p: Pattern | Sequence[int]) -> float:
        key = tuple(p.restrict(self.region).symbols) if isinstance(p, Pattern) else tuple(p)
        i = self.index.get(key)
        return -math.inf if i is None else float(self.log_probs[i])

    def prob(self, p: Pattern | Sequence[int]) -> float:
        return math.exp(self.log_prob(p))

    def marginal(self, sub_shape: Shape, values: Mapping[Site, int]) -> float:
        """Probability that the filling agrees with ``values`` on ``sub_shape``."""
        cols = [self.region.sites.index(s) for s in sub_shape]
        want = tuple(values[s] for s in sub_shape)
        picked = [self.log_probs[i] for i, p in enumerate(self.fillings) if tuple(p[c] for c in cols) == want]
        if not picked:
            return 0.0
        return math.exp(_logsumexp(np.asarray(picked)))

    def total(self) -> float:
        return math.exp(_logsumexp(self.log_probs))


class Specification:
    """The positive specification ``K_A(x, p) ∝ exp(-psi(x, x_{A^c} ∨ p))``."""

    def __init__(self, sft: SftSpace, psi: Cocycle):
        self.sft = sft
        self.psi = psi

    def _context(self, region: Shape, boundary: Configuration | Pattern) -> Configuration:
        if isinstance(boundary, Configuration):
            return boundary
        annulus = memory_set(self.sft, region) - region
        if not annulus.issubset(boundary.shape):
            raise InputError("boundary annulus must contain the memory set of the region")
        return self.sft.default_background.with_patch(boundary.cells)

    def kernel(self, region: Shape, boundary: Configuration | Pattern) -> SpecKernel:
        x = self._context(region, boundary)
        near = region.plus(self.sft.reach) - region
        fixed = {u: x[u] for u in near}
        for s, v in x.patch.items():
            if s not in region.as_set:
                fixed.setdefault(s, v)
        rows = enumerate_patterns(self.sft, region, fixed)
        if rows.shape[0] == 0:
            raise InputError("boundary admits no filling of the region")
        fillings = [tuple(int(v) for v in r) for r in rows]
        ref = x.with_patch(dict(zip(region, fillings[0])))
        energies = np.array([self.psi(ref, ref.with_patch(dict(zip(region, p)))) for p in fillings])
        logits = -energies
        return SpecKernel(region, fillings, logits - _logsumexp(logits))


def spec_prob(kernel: SpecKernel, p: Pattern | Sequence[int]) -> float:
    return kernel.prob(p)


def cocycle_from_spec(spec: Specification, pair: AsymptoticPair, region: Shape | None = None) -> float:
    """Recover ``psi(x, y) = -log[K_A(y, [y_A]) / K_A(x, [x_A])]`` with ``A`` the disagreement."""
    A = pair.disagreement if region is None else region
    if not A:
        return 0.0
    kernel = spec.kernel(A, pair.left)
    return -(kernel.log_prob(pair.right.restrict(A)) - kernel.log_prob(pair.left.restrict(A)))
