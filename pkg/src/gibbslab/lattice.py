"""Lattice geometry, patterns, configurations and subshift admissibility.

Symbols are stored as indices into the alphabet of an :class:`SftSpace`.
Sites are integer tuples of length ``d`` (``d`` is 1 or 2 in practice,
but nothing below depends on it).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import BudgetError, FillFailure, InputError, NoPath, TmpFailure

Site = tuple[int, ...]

#: Default cap on the number of pattern rows an enumeration may materialize.
DEFAULT_BUDGET = 4_000_000


def add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def neg(a: Site) -> Site:
    return tuple(-x for x in a)


# ---------------------------------------------------------------------------
# Shapes and patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Shape:
    """A finite set of sites kept in lexicographic order."""

    sites: tuple[Site, ...] = ()

    def __post_init__(self) -> None:
        norm = tuple(sorted({tuple(int(c) for c in s) for s in self.sites}))
        dims = {len(s) for s in norm}
        if len(dims) > 1:
            raise InputError(f"mixed site dimensions {sorted(dims)}")
        object.__setattr__(self, "sites", norm)

    @classmethod
    def of(cls, sites: Iterable[Sequence[int]]) -> "Shape":
        return cls(tuple(tuple(s) for s in sites))

    @classmethod
    def box(cls, lo: int, hi: int, dim: int = 1) -> "Shape":
        """The cube ``[lo, hi]^dim``."""
        return cls(tuple(itertools.product(range(lo, hi + 1), repeat=dim)))

    @classmethod
    def ball(cls, radius: int, dim: int = 1) -> "Shape":
        """The sup-norm ball ``[-radius, radius]^dim``."""
        return cls.box(-radius, radius, dim)

    @classmethod
    def interval(cls, a: int, b: int) -> "Shape":
        return cls(tuple((i,) for i in range(a, b + 1)))

    @cached_property
    def as_set(self) -> frozenset[Site]:
        return frozenset(self.sites)

    @property
    def dim(self) -> int:
        return len(self.sites[0]) if self.sites else 0

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, site: object) -> bool:
        return site in self.as_set

    def __bool__(self) -> bool:
        return bool(self.sites)

    def __or__(self, other: "Shape") -> "Shape":
        return Shape(self.sites + other.sites)

    def __and__(self, other: "Shape") -> "Shape":
        return Shape(tuple(s for s in self.sites if s in other.as_set))

    def __sub__(self, other: "Shape") -> "Shape":
        return Shape(tuple(s for s in self.sites if s not in other.as_set))

    def issubset(self, other: "Shape") -> bool:
        return self.as_set <= other.as_set

    def isdisjoint(self, other: "Shape") -> bool:
        return self.as_set.isdisjoint(other.as_set)

    def translate(self, k: Site) -> "Shape":
        return Shape(tuple(add(s, k) for s in self.sites))

    def reflect(self) -> "Shape":
        return Shape(tuple(neg(s) for s in self.sites))

    def plus(self, other: "Shape") -> "Shape":
        """Minkowski sum ``self + other``."""
        return Shape(tuple(add(a, b) for a in self.sites for b in other.sites))

    def minus(self, other: "Shape") -> "Shape":
        """Minkowski difference set ``self - other``."""
        return self.plus(other.reflect())

    def expand(self, radius: int) -> "Shape":
        if radius <= 0 or not self.sites:
            return self
        return self.plus(Shape.ball(radius, self.dim))

    def normalized(self) -> tuple["Shape", Site]:
        """Translate so the least site sits at the origin; return the offset removed."""
        if not self.sites:
            return self, ()
        first = self.sites[0]
        return self.translate(neg(first)), first

    def bounds(self) -> tuple[Site, Site]:
        cols = list(zip(*self.sites))
        return tuple(min(c) for c in cols), tuple(max(c) for c in cols)

    def diameter(self) -> int:
        """Largest sup-norm distance between two sites."""
        if not self.sites:
            return 0
        lo, hi = self.bounds()
        return max(h - l for l, h in zip(lo, hi))


@dataclass(frozen=True)
class Pattern:
    """A symbol assignment on a shape; ``symbols[i]`` sits at ``shape.sites[i]``."""

    shape: Shape
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) != len(self.shape):
            raise InputError("pattern length does not match its shape")

    @classmethod
    def from_dict(cls, cells: Mapping[Site, int]) -> "Pattern":
        shape = Shape(tuple(cells))
        return cls(shape, tuple(int(cells[s]) for s in shape))

    @classmethod
    def empty(cls) -> "Pattern":
        return cls(Shape(), ())

    @cached_property
    def cells(self) -> dict[Site, int]:
        return dict(zip(self.shape.sites, self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, site: Site) -> int:
        return self.cells[site]

    def get(self, site: Site, default: int | None = None) -> int | None:
        return self.cells.get(site, default)

    def restrict(self, shape: Shape) -> "Pattern":
        cells = self.cells
        return Pattern(shape, tuple(cells[s] for s in shape))

    def join(self, other: "Pattern") -> "Pattern":
        """The pattern ``self ∨ other``; the two must agree on their overlap."""
        merged = dict(self.cells)
        for s, v in other.cells.items():
            if merged.setdefault(s, v) != v:
                raise InputError(f"patterns disagree at {s}")
        return Pattern.from_dict(merged)

    def translate(self, k: Site) -> "Pattern":
        return Pattern(self.shape.translate(k), self.symbols)

    def normalized(self) -> "Pattern":
        shape, _ = self.shape.normalized()
        return Pattern(shape, self.symbols)


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------


class Configuration:
    """A periodic background with a finite patch of overrides.

    ``period`` holds one period per axis; ``cell`` maps every site of the box
    ``[0, period)`` to a symbol.  Patch entries equal to the background are
    dropped so that equality and disagreement sets are exact.
    """

    __slots__ = ("period", "cell", "patch")

    def __init__(
        self,
        period: Sequence[int],
        cell: Mapping[Site, int],
        patch: Mapping[Site, int] | None = None,
    ):
        self.period = tuple(int(p) for p in period)
        if any(p <= 0 for p in self.period):
            raise InputError("periods must be positive")
        self.cell = dict(cell)
        for s in itertools.product(*(range(p) for p in self.period)):
            if s not in self.cell:
                raise InputError(f"background cell misses site {s}")
        self.patch: dict[Site, int] = {}
        for s, v in (patch or {}).items():
            s = tuple(s)
            if self.background(s) != v:
                self.patch[s] = int(v)

    @classmethod
    def constant(cls, symbol: int, dim: int = 1, patch: Mapping[Site, int] | None = None) -> "Configuration":
        zero = (0,) * dim
        return cls((1,) * dim, {zero: symbol}, patch)

    @classmethod
    def periodic(
        cls,
        period: Sequence[int],
        rule: Callable[[Site], int],
        patch: Mapping[Site, int] | None = None,
    ) -> "Configuration":
        sites = itertools.product(*(range(p) for p in period))
        return cls(period, {s: int(rule(s)) for s in sites}, patch)

    @property
    def dim(self) -> int:
        return len(self.period)

    def background(self, site: Site) -> int:
        return self.cell[tuple(c % p for c, p in zip(site, self.period))]

    def __getitem__(self, site: Site) -> int:
        v = self.patch.get(site)
        if v is None:
            return self.cell[tuple(c % p for c, p in zip(site, self.period))]
        return v

    def with_patch(self, updates: Mapping[Site, int]) -> "Configuration":
        merged = dict(self.patch)
        merged.update(updates)
        return Configuration(self.period, self.cell, merged)

    def background_only(self) -> "Configuration":
        return Configuration(self.period, self.cell)

    def restrict(self, shape: Shape) -> Pattern:
        return Pattern(shape, tuple(self[s] for s in shape))

    def shift(self, k: Site) -> "Configuration":
        """The translate ``σ^k x`` with ``(σ^k x)_i = x_{i+k}``."""
        cell = {r: self.background(add(r, k)) for r in self.cell}
        patch = {sub(s, k): v for s, v in self.patch.items()}
        return Configuration(self.period, cell, patch)

    def same_background(self, other: "Configuration") -> bool:
        if self.period == other.period:
            return self.cell == other.cell
        if len(self.period) != len(other.period):
            return False
        box = [int(np.lcm(a, b)) for a, b in zip(self.period, other.period)]
        return all(
            self.background(s) == other.background(s)
            for s in itertools.product(*(range(p) for p in box))
        )

    def disagreement(self, other: "Configuration") -> Shape:
        if not self.same_background(other):
            raise InputError("configurations are not asymptotic (backgrounds differ)")
        keys = set(self.patch) | set(other.patch)
        return Shape(tuple(s for s in keys if self[s] != other[s]))

    def support(self) -> Shape:
        return Shape(tuple(self.patch))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.same_background(other) and not self.disagreement(other)

    def __hash__(self) -> int:
        return hash((self.period, tuple(sorted(self.patch.items()))))

    def __repr__(self) -> str:
        return f"Configuration(period={self.period}, patch={dict(sorted(self.patch.items()))})"


@dataclass(frozen=True)
class AsymptoticPair:
    """Two configurations that differ on finitely many sites."""

    left: Configuration
    right: Configuration

    def __post_init__(self) -> None:
        if not self.left.same_background(self.right):
            raise InputError("asymptotic pair needs a common background")

    @cached_property
    def disagreement(self) -> Shape:
        return self.left.disagreement(self.right)

    def swapped(self) -> "AsymptoticPair":
        return AsymptoticPair(self.right, self.left)

    def shift(self, k: Site) -> "AsymptoticPair":
        return AsymptoticPair(self.left.shift(k), self.right.shift(k))


# ---------------------------------------------------------------------------
# Subshifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SftSpace:
    """An alphabet, a dimension and a finite list of forbidden patterns.

    ``ssf``, ``safe_symbol``, ``pivot`` and ``tmp`` are claims supplied by the
    caller; the window checkers in this module can refute them.  A declared
    safe symbol must be symbol ``0`` so that the least-symbol rule of
    :func:`zeta` writes it.  ``count_limits`` caps how often a symbol may
    occur in a whole configuration; it models spaces such as
    "at most one 1" which are not of finite type.
    """

    alphabet: tuple[str, ...]
    dimension: int
    forbidden: tuple[Pattern, ...] = ()
    ssf: bool = False
    safe_symbol: int | None = None
    pivot: bool = False
    tmp: bool = True
    count_limits: tuple[tuple[int, int], ...] = ()
    name: str = ""
    background_hint: Configuration | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        object.__setattr__(self, "count_limits", tuple(tuple(c) for c in self.count_limits))
        q = len(self.alphabet)
        if q == 0 or len(set(self.alphabet)) != q:
            raise InputError("alphabet must be nonempty with distinct symbols")
        for f in self.forbidden:
            if not f.shape:
                raise InputError("forbidden patterns must be nonempty")
            if f.shape.dim != self.dimension:
                raise InputError("forbidden pattern dimension mismatch")
            if any(not 0 <= c < q for c in f.symbols):
                raise InputError("forbidden pattern uses a symbol outside the alphabet")
        if self.safe_symbol is not None and self.safe_symbol != 0:
            raise InputError("a safe symbol must be listed first in the alphabet")

    @property
    def q(self) -> int:
        return len(self.alphabet)

    def symbol_index(self, symbol: str) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise InputError(f"symbol {symbol!r} not in alphabet {self.alphabet}") from None

    @cached_property
    def forbidden_union(self) -> Shape:
        """The union ``F`` of the forbidden shapes."""
        out = Shape()
        for f in self.forbidden:
            out = out | f.shape
        return out

    @cached_property
    def reach(self) -> Shape:
        """Offsets ``F - F``; changing one site can only affect sites within it."""
        F = self.forbidden_union
        if not F:
            return Shape(((0,) * self.dimension,))
        return F.minus(F)

    @cached_property
    def reach_radius(self) -> int:
        return max((max(abs(c) for c in s) for s in self.reach), default=0)

    @cached_property
    def site_checks(self) -> tuple[tuple[tuple[Site, int], ...], ...]:
        """Every forbidden placement covering the origin, as (offset, symbol) lists."""
        out = []
        for f in self.forbidden:
            for anchor in f.shape:
                out.append(tuple((sub(s, anchor), c) for s, c in zip(f.shape, f.symbols)))
        return tuple(out)

    @cached_property
    def anchored_checks(self) -> tuple[tuple[tuple[Site, int], ...], ...]:
        """Each forbidden pattern once, offsets relative to its least site."""
        out = []
        for f in self.forbidden:
            first = f.shape.sites[0]
            out.append(tuple((sub(s, first), c) for s, c in zip(f.shape, f.symbols)))
        return tuple(out)

    @cached_property
    def default_background(self) -> Configuration:
        """A periodic admissible configuration used to complete finite patterns."""
        if self.background_hint is not None:
            return self.background_hint
        return _find_periodic_background(self)


def _find_periodic_background(sft: SftSpace) -> Configuration:
    limited = {s for s, _ in sft.count_limits}
    symbols = [c for c in range(sft.q) if c not in limited]
    d = sft.dimension
    r = max(sft.reach_radius, 1)
    for p in range(1, 5):
        cells = list(itertools.product(range(p), repeat=d))
        if len(symbols) ** len(cells) > 100_000:
            break
        for values in itertools.product(symbols, repeat=len(cells)):
            conf = Configuration((p,) * d, dict(zip(cells, values)))
            window = Shape.box(0, p + 2 * r, d)
            if local_admissible(conf.restrict(window), sft):
                return conf
    raise InputError(f"no periodic admissible background of period <= 4 for {sft.name or 'sft'}")


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


def _check_symbols(p: Pattern, sft: SftSpace) -> None:
    if any(not 0 <= c < sft.q for c in p.symbols):
        raise InputError("pattern symbol outside the alphabet")


def _counts_ok(sft: SftSpace, values: Iterable[int]) -> bool:
    if not sft.count_limits:
        return True
    vals = list(values)
    return all(vals.count(sym) <= cap for sym, cap in sft.count_limits)


def local_admissible(p: Pattern, sft: SftSpace) -> bool:
    """True iff no forbidden pattern occurs inside ``p`` and count caps hold."""
    _check_symbols(p, sft)
    cells = p.cells
    for s in p.shape:
        for check in sft.anchored_checks:
            if all(cells.get(add(s, o)) == c for o, c in check):
                return False
    return _counts_ok(sft, p.symbols)


def violates_at(sft: SftSpace, lookup: Callable[[Site], int | None], site: Site) -> bool:
    """True iff some forbidden placement covering ``site`` matches ``lookup``."""
    for check in sft.site_checks:
        if all(lookup(add(site, o)) == c for o, c in check):
            return True
    return False


def _site_plan(sft: SftSpace, sites: Sequence[Site], fixed: Mapping[Site, int]):
    """For each position t, the forbidden placements completed when ``sites[t]`` is set."""
    index = {s: i for i, s in enumerate(sites)}
    plan = []
    for t, s in enumerate(sites):
        checks = []
        for check in sft.site_checks:
            cols, syms, possible = [], [], True
            for o, c in check:
                u = add(s, o)
                i = index.get(u)
                if i is not None and i <= t:
                    cols.append(i)
                    syms.append(c)
                elif u in fixed and i is None:
                    if fixed[u] != c:
                        possible = False
                        break
                else:
                    possible = False
                    break
            if possible:
                checks.append((tuple(cols), tuple(syms)))
        plan.append(sorted(set(checks)))
    return plan


def enumerate_patterns(
    sft: SftSpace,
    shape: Shape,
    fixed: Mapping[Site, int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """All locally admissible fillings of ``shape`` as rows of an int8 array.

    Columns follow ``shape.sites``.  ``fixed`` pins sites outside the shape
    (a boundary); forbidden placements touching both are honoured.  Rows come
    out in lexicographic order.  Raises :class:`BudgetError` when an
    intermediate frontier would exceed ``budget`` rows.
    """
    fixed = dict(fixed or {})
    sites = list(shape)
    q = sft.q
    plan = _site_plan(sft, sites, fixed)
    limits = dict(sft.count_limits)
    base_counts = {sym: sum(1 for v in fixed.values() if v == sym) for sym in limits}
    arr = np.zeros((1, 0), dtype=np.int8)
    symbols = np.arange(q, dtype=np.int8)
    for t in range(len(sites)):
        n = arr.shape[0]
        if n * q > budget:
            raise BudgetError(f"enumeration of {len(sites)} sites exceeds budget of {budget} patterns")
        arr = np.concatenate([np.repeat(arr, q, axis=0), np.tile(symbols, n)[:, None]], axis=1)
        keep = np.ones(arr.shape[0], dtype=bool)
        for cols, syms in plan[t]:
            keep &= ~np.all(arr[:, cols] == np.asarray(syms, dtype=np.int8), axis=1)
        for sym, cap in limits.items():
            keep &= (arr == sym).sum(axis=1) + base_counts[sym] <= cap
        arr = arr[keep]
    return arr


def language_array(
    sft: SftSpace,
    shape: Shape,
    halo: int = 0,
    fixed: Mapping[Site, int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """Rows of the patterns on ``shape`` that extend to ``shape ⊕ halo``."""
    big = shape.expand(halo) if halo > 0 else shape
    if fixed:
        pinned = Shape(tuple(fixed))
        if not shape.isdisjoint(pinned):
            raise InputError("fixed sites must lie outside the shape")
        big = big - pinned
    arr = enumerate_patterns(sft, big, fixed, budget)
    if big == shape:
        return arr
    pos = {s: i for i, s in enumerate(big)}
    cols = [pos[s] for s in shape]
    sub_arr = arr[:, cols]
    if sub_arr.shape[0] == 0:
        return sub_arr
    return np.unique(sub_arr, axis=0)


def language(sft: SftSpace, shape: Shape, halo: int = 0, budget: int = DEFAULT_BUDGET) -> list[Pattern]:
    """Patterns on ``shape`` extendable to locally admissible patterns on ``shape ⊕ halo``.

    For single-site-fillable spaces this is the exact language for any halo.
    """
    arr = language_array(sft, shape, halo, budget=budget)
    return [Pattern(shape, tuple(int(v) for v in row)) for row in arr]


def memory_set(sft: SftSpace, a: Shape) -> Shape:
    """The set ``A + F - F``; equals ``a`` when nothing is forbidden."""
    if not sft.forbidden or not a:
        return a
    return a.plus(sft.reach)


# ---------------------------------------------------------------------------
# Structural checkers
# ---------------------------------------------------------------------------


@dataclass
class TmpResult:
    """Outcome of a finite-window memory-set test."""

    holds: bool
    pairs_checked: int
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.holds


def check_tmp_window(
    sft: SftSpace,
    a: Shape,
    b: Shape,
    window: Shape,
    halo: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> TmpResult:
    """Test whether ``b`` acts as a memory set for ``a`` among window patterns.

    For every pair ``x, y`` of admissible window patterns agreeing on
    ``b - a`` the glued pattern ``x_b ∨ y_{window - a}`` must be admissible.
    The first failure is returned as a witness.
    """
    if not (a.issubset(b) and b.issubset(window)):
        raise InputError("need a ⊆ b ⊆ window")
    arr = language_array(sft, window, halo, budget=budget)
    sites = list(window)
    pos = {s: i for i, s in enumerate(sites)}
    a_cols = [pos[s] for s in a]
    ring_cols = [pos[s] for s in b - a]
    rest_cols = [pos[s] for s in window - a]
    admissible = {row.tobytes() for row in arr}
    groups: dict[bytes, list[int]] = {}
    ring = arr[:, ring_cols]
    for i in range(arr.shape[0]):
        groups.setdefault(ring[i].tobytes(), []).append(i)
    checked = 0
    for members in groups.values():
        inner = np.unique(arr[members][:, a_cols], axis=0) if a_cols else np.zeros((1, 0), np.int8)
        outer = np.unique(arr[members][:, rest_cols], axis=0)
        for xa in inner:
            glued = np.empty((outer.shape[0], len(sites)), dtype=np.int8)
            glued[:, rest_cols] = outer
            if a_cols:
                glued[:, a_cols] = xa
            checked += glued.shape[0]
            for row, yrest in zip(glued, outer):
                if row.tobytes() not in admissible:
                    x_row = next(arr[m] for m in members if np.array_equal(arr[m][a_cols], xa))
                    y_row = next(arr[m] for m in members if np.array_equal(arr[m][rest_cols], yrest))
                    witness = {
                        "x": _row_pattern(window, x_row),
                        "y": _row_pattern(window, y_row),
                        "glued": _row_pattern(window, row),
                    }
                    return TmpResult(False, checked, witness)
    return TmpResult(True, checked)


def _row_pattern(shape: Shape, row: np.ndarray) -> Pattern:
    return Pattern(shape, tuple(int(v) for v in row))


def least_symbol(sft: SftSpace, lookup: Callable[[Site], int | None], site: Site, counts: Mapping[int, int] | None = None) -> int | None:
    """The least symbol placeable at ``site`` given the other values of ``lookup``.

    ``counts`` gives how often each count-limited symbol occurs away from ``site``.
    """
    limits = dict(sft.count_limits)
    for c in range(sft.q):
        if c in limits and counts is not None and counts.get(c, 0) + 1 > limits[c]:
            continue

        def probe(u: Site, c=c) -> int | None:
            return c if u == site else lookup(u)

        if not violates_at(sft, probe, site):
            return c
    return None


def _patch_counts(sft: SftSpace, x: Configuration, skip: Site | None = None) -> dict[int, int]:
    limits = dict(sft.count_limits)
    counts = {c: 0 for c in limits}
    if not limits:
        return counts
    if any(v in limits for v in x.cell.values()):
        raise InputError("count-limited symbol occurs in the periodic background")
    for s, v in x.patch.items():
        if s != skip and v in counts:
            counts[v] += 1
    return counts


def zeta(sft: SftSpace, x: Configuration, k: Site) -> Configuration:
    """Replace ``x_k`` by the least symbol keeping ``x`` admissible."""
    c = least_symbol(sft, x.__getitem__, k, _patch_counts(sft, x, skip=k))
    if c is None:  # pragma: no cover - x itself witnesses a valid symbol
        raise FillFailure(f"no admissible symbol at {k}", witness={"site": k})
    return x.with_patch({k: c})


def fill_single_site(sft: SftSpace, p: Pattern, k: Site) -> Pattern:
    """Extend ``p`` to ``k`` with the least locally admissible symbol."""
    if k in p.shape:
        raise InputError(f"site {k} already lies in the pattern")
    cells = p.cells
    counts = {c: sum(1 for v in p.symbols if v == c) for c, _ in sft.count_limits}
    c = least_symbol(sft, cells.get, k, counts)
    if c is None:
        raise FillFailure(f"no symbol fills site {k}", witness={"pattern": p, "site": k})
    return p.join(Pattern(Shape((k,)), (c,)))


def check_ssf_window(sft: SftSpace, window: Shape, budget: int = DEFAULT_BUDGET) -> TmpResult:
    """Try to refute single-site fillability: fill each window site from the rest."""
    checked = 0
    for k in window:
        rest = window - Shape((k,))
        arr = enumerate_patterns(sft, rest, budget=budget)
        sites = list(rest)
        for row in arr:
            checked += 1
            cells = dict(zip(sites, (int(v) for v in row)))
            counts = {c: sum(1 for v in cells.values() if v == c) for c, _ in sft.count_limits}
            if least_symbol(sft, cells.get, k, counts) is None:
                return TmpResult(False, checked, {"pattern": _row_pattern(rest, row), "site": k})
    return TmpResult(True, checked)


def _state_lookup(box_index: Mapping[Site, int], state: Sequence[int], outside: Configuration):
    def lookup(u: Site) -> int:
        i = box_index.get(u)
        return state[i] if i is not None else outside[u]

    return lookup


def _search_moves(
    sft: SftSpace,
    pair: AsymptoticPair,
    box: Shape,
    move_size: int,
    budget: int,
):
    if not pair.disagreement.issubset(box):
        raise InputError("search box must contain the disagreement set")
    x = pair.left
    sites = list(box)
    index = {s: i for i, s in enumerate(sites)}
    start = tuple(x[s] for s in sites)
    goal = tuple(pair.right[s] for s in sites)
    limits = dict(sft.count_limits)
    outside_counts = {c: 0 for c in limits}
    for s, v in x.patch.items():
        if s not in index and v in outside_counts:
            outside_counts[v] += 1

    def counts_ok(state) -> bool:
        return all(outside_counts[c] + state.count(c) <= cap for c, cap in limits.items())

    groups = [c for c in itertools.combinations(range(len(sites)), move_size)]
    parent: dict[tuple, tuple | None] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if state == goal:
            break
        for group in groups:
            choices = [[c for c in range(sft.q) if c != state[i]] for i in group]
            for values in itertools.product(*choices):
                new = list(state)
                for i, c in zip(group, values):
                    new[i] = c
                new = tuple(new)
                if new in parent:
                    continue
                lookup = _state_lookup(index, new, x)
                if any(violates_at(sft, lookup, sites[i]) for i in group):
                    continue
                if limits and not counts_ok(new):
                    continue
                parent[new] = (state, tuple((sites[i], c) for i, c in zip(group, values)))
                if len(parent) > budget:
                    raise BudgetError("pivot search exceeded its state budget")
                queue.append(new)
    if goal not in parent:
        raise NoPath(
            f"no {move_size}-site move path inside the search box",
            witness={"states_explored": len(parent)},
        )
    moves = []
    node = goal
    while parent[node] is not None:
        prev, move = parent[node]
        moves.append(move)
        node = prev
    moves.reverse()
    return moves


def pivot_path(
    sft: SftSpace,
    pair: AsymptoticPair,
    search_box: Shape,
    budget: int = 200_000,
) -> list[tuple[Site, int]]:
    """Shortest chain of single-site admissible changes from ``pair.left`` to ``pair.right``.

    Breadth-first search over fillings of ``search_box``; ties break by site
    order then symbol order, so the path is deterministic.
    """
    moves = _search_moves(sft, pair, search_box, 1, budget)
    return [m[0] for m in moves]


def exchange_path(
    sft: SftSpace,
    pair: AsymptoticPair,
    search_box: Shape,
    move_size: int = 2,
    budget: int = 200_000,
) -> list[tuple[tuple[Site, int], ...]]:
    """Like :func:`pivot_path` but each move rewrites exactly ``move_size`` sites."""
    return _search_moves(sft, pair, search_box, move_size, budget)


def apply_moves(x: Configuration, moves: Iterable) -> list[Configuration]:
    """Replay a move list; returns every intermediate configuration including ``x``."""
    out = [x]
    for move in moves:
        if len(move) == 2 and isinstance(move[1], (int, np.integer)):
            move = (move,)
        x = x.with_patch(dict(move))
        out.append(x)
    return out


def is_admissible_around(sft: SftSpace, x: Configuration, region: Shape) -> bool:
    """Check every forbidden placement meeting ``region`` (plus global count caps)."""
    for s in region:
        if violates_at(sft, x.__getitem__, s):
            return False
    if sft.count_limits:
        counts = _patch_counts(sft, x)
        return all(counts[c] <= cap for c, cap in sft.count_limits)
    return True


def single_site_moves(sft: SftSpace, x: Configuration, box: Shape) -> list[tuple[Site, int]]:
    """Every admissible single-site change of ``x`` at a site of ``box``."""
    out = []
    for s in box:
        for c in range(sft.q):
            if c == x[s]:
                continue
            y = x.with_patch({s: c})
            if violates_at(sft, y.__getitem__, s):
                continue
            if sft.count_limits:
                counts = _patch_counts(sft, y)
                if any(counts[sym] > cap for sym, cap in sft.count_limits):
                    continue
            out.append((s, c))
    return out


def check_pivot_window(
    sft: SftSpace,
    box: Shape,
    background: Configuration | None = None,
    budget: int = DEFAULT_BUDGET,
) -> TmpResult:
    """Look for two admissible fillings of ``box`` not joined by single-site moves inside it.

    A disconnected move graph is evidence against the pivot property (a path
    might still leave the box); a connected one proves nothing beyond the box.
    """
    bg = background or sft.default_background
    fixed = {u: bg[u] for u in box.expand(max(sft.reach_radius, 1)) - box}
    arr = enumerate_patterns(sft, box, fixed, budget)
    sites = list(box)
    rows = [tuple(int(v) for v in r) for r in arr]
    index = {r: i for i, r in enumerate(rows)}
    parent = list(range(len(rows)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for r, i in index.items():
        for t in range(len(sites)):
            for c in range(sft.q):
                if c == r[t]:
                    continue
                nb = r[:t] + (c,) + r[t + 1:]
                j = index.get(nb)
                if j is not None:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(len(rows))})
    if len(roots) <= 1:
        return TmpResult(True, len(rows))
    a, b = roots[0], roots[1]
    witness = {
        "left": Pattern(box, rows[a]),
        "right": Pattern(box, rows[b]),
        "components": len(roots),
    }
    return TmpResult(False, len(rows), witness)


def derive_sft_from_tmp_safe(sft_like: SftSpace, window: int = 3, budget: int = DEFAULT_BUDGET) -> SftSpace:
    """Rebuild a space with the memory-set property and a safe symbol as an SFT.

    The memory set ``B`` of the origin is checked on a finite window first;
    the forbidden list is then every pattern on ``B`` that does not extend to
    the larger window.
    """
    if sft_like.safe_symbol is None:
        raise InputError("a safe symbol is required")
    d = sft_like.dimension
    origin = Shape(((0,) * d,))
    B = memory_set(sft_like, origin)
    radius = max(B.diameter(), 1) + window
    big = Shape.ball(radius, d)
    result = check_tmp_window(sft_like, origin, B if len(B) > 1 else origin.expand(1), big, budget=budget)
    if not result:
        raise TmpFailure("memory-set property fails on the test window", witness=result.witness)
    admissible = {tuple(int(v) for v in row) for row in language_array(sft_like, B, window, budget=budget)}
    forbidden = [
        Pattern(B, w)
        for w in itertools.product(range(sft_like.q), repeat=len(B))
        if w not in admissible
    ]
    return SftSpace(
        alphabet=sft_like.alphabet,
        dimension=d,
        forbidden=tuple(forbidden),
        ssf=sft_like.ssf,
        safe_symbol=sft_like.safe_symbol,
        pivot=sft_like.pivot,
        tmp=True,
        name=f"derived({sft_like.name})" if sft_like.name else "derived",
    )
