"""Builders that turn a cocycle back into an interaction.

Two families live here.  The partial-extension builders work inside a
finite window with a fixed boundary: they glue potentials on equivalence
classes of restricted patterns so that the resulting site-indexed
interaction reproduces the cocycle on every pair of window configurations
differing inside a region.  The fill builders complete a central pattern by
filling an annulus site by site, which yields a shift-invariant
interaction from a cocycle on single-site fillable spaces.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .cocycles import Cocycle, Interaction, from_interaction
from .errors import ConsistencyError, FillFailure, InputError, PreconditionError, WindowError
from .lattice import (
    DEFAULT_BUDGET,
    Configuration,
    Pattern,
    Shape,
    Site,
    SftSpace,
    enumerate_patterns,
    language_array,
    least_symbol,
    memory_set,
)
from .norms import NormReport, norm_sullivan, norm_vs

DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Windowed spaces
# ---------------------------------------------------------------------------


class WindowedSpace:
    """All admissible fillings of a finite window with the outside held fixed.

    Configurations are indexed by their row in :attr:`rows`; rows follow the
    lexicographic order of the window sites, which also fixes the canonical
    element of every cylinder (its least row).
    """

    def __init__(
        self,
        sft: SftSpace,
        window: Shape,
        boundary: Configuration | None = None,
        budget: int = DEFAULT_BUDGET,
    ):
        self.sft = sft
        self.window = window
        self.boundary = boundary if boundary is not None else sft.default_background
        ring = window.expand(max(sft.reach_radius, 1)) - window
        fixed = {u: self.boundary[u] for u in ring}
        self.rows = enumerate_patterns(sft, window, fixed, budget)
        if self.rows.shape[0] == 0:
            raise InputError("the boundary admits no admissible filling of the window")
        self.sites = list(window)
        self.pos = {s: i for i, s in enumerate(self.sites)}
        self._configs: list[Configuration | None] = [None] * self.rows.shape[0]
        self._row_index = {r.tobytes(): i for i, r in enumerate(self.rows)}
        self._canonical: dict[Shape, dict[bytes, int]] = {}

    def __len__(self) -> int:
        return self.rows.shape[0]

    def config(self, i: int) -> Configuration:
        c = self._configs[i]
        if c is None:
            c = self.boundary.with_patch(dict(zip(self.sites, (int(v) for v in self.rows[i]))))
            self._configs[i] = c
        return c

    def columns(self, shape: Shape) -> list[int]:
        try:
            return [self.pos[s] for s in shape]
        except KeyError:
            raise WindowError("shape leaves the window") from None

    def restriction(self, i: int, shape: Shape) -> tuple[int, ...]:
        return tuple(int(v) for v in self.rows[i, self.columns(shape)])

    def index_of(self, values: dict[Site, int]) -> int | None:
        row = np.array([values[s] for s in self.sites], dtype=np.int8)
        return self._row_index.get(row.tobytes())

    def canonical(self, shape: Shape, values: Sequence[int]) -> int:
        """Least row whose restriction to ``shape`` equals ``values``."""
        table = self._canonical.get(shape)
        if table is None:
            cols = self.columns(shape)
            table = {}
            sub = self.rows[:, cols]
            for i in range(sub.shape[0]):
                table.setdefault(sub[i].tobytes(), i)
            self._canonical[shape] = table
        key = np.asarray(values, dtype=np.int8).tobytes()
        if key not in table:
            raise InputError("cylinder is empty in this window")
        return table[key]

    def pairs(self, region: Shape, budget: int = 2_000_000) -> list[tuple[int, int]]:
        """Unordered pairs of distinct rows that agree off ``region``."""
        if not region.issubset(self.window):
            raise WindowError("region leaves the window")
        cols = self.columns(self.window - region)
        groups: dict[bytes, list[int]] = {}
        sub = self.rows[:, cols]
        for i in range(sub.shape[0]):
            groups.setdefault(sub[i].tobytes(), []).append(i)
        total = sum(len(g) * (len(g) - 1) // 2 for g in groups.values())
        if total > budget:
            raise WindowError(f"{total} pairs exceed the pair budget of {budget}")
        out = []
        for g in groups.values():
            out.extend(itertools.combinations(g, 2))
        return out


@dataclass
class Certificate:
    """What a builder verified and how."""

    exact_on: dict
    max_error: float
    window: list
    mode: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "exact_on": self.exact_on, "max_error": self.max_error,
            "window": self.window, "mode": self.mode, **self.details,
        }


# ---------------------------------------------------------------------------
# Potentials on equivalence classes
# ---------------------------------------------------------------------------


def solve_potential(
    nodes: Iterable[Hashable],
    edges: Sequence[tuple[Hashable, Hashable, float]],
    tol: float = DEFAULT_TOL,
) -> dict:
    """Find ``F`` with ``F(q) - F(p) = value`` on every edge ``(p, q, value)``.

    Each connected component gets its least node as root with ``F = 0``;
    values spread along a breadth-first tree and every remaining edge is
    then checked.
    """
    adj: dict = {v: [] for v in nodes}
    for p, q, val in edges:
        adj.setdefault(p, []).append((q, val))
        adj.setdefault(q, []).append((p, -val))
    F: dict = {}
    for root in sorted(adj):
        if root in F:
            continue
        F[root] = 0.0
        queue = deque([root])
        while queue:
            p = queue.popleft()
            for q, val in adj[p]:
                if q not in F:
                    F[q] = F[p] + val
                    queue.append(q)
    for p, q, val in edges:
        err = abs(F[q] - F[p] - val)
        if err > tol:
            raise ConsistencyError(
                "cocycle values are inconsistent around a cycle",
                witness={"from": list(p), "to": list(q), "edge": val, "potential_gap": F[q] - F[p]},
            )
    return F


def _site_indexed(shape: Shape, F: dict) -> Interaction:
    phi = Interaction(shift_invariant=False)
    if shape:
        phi.add_entry(shape, F)
    return phi


def _require_inside(shape: Shape, ws: WindowedSpace, what: str) -> None:
    if not shape.issubset(ws.window):
        raise WindowError(f"{what} {list(shape)} does not fit in the window")


def _max_gap(ws: WindowedSpace, pairs, psi: Cocycle, other: Cocycle | None = None) -> tuple[float, tuple | None]:
    worst, arg = 0.0, None
    for i, j in pairs:
        x, y = ws.config(i), ws.config(j)
        v = psi(x, y) - (other(x, y) if other is not None else 0.0)
        if abs(v) > worst:
            worst, arg = abs(v), (i, j)
    return worst, arg


def kozlov_partial(
    ws: WindowedSpace,
    psi: Cocycle,
    a: Shape,
    b: Shape,
    tol: float = DEFAULT_TOL,
) -> tuple[Interaction, Certificate]:
    """A site-indexed interaction supported off ``a`` that reproduces ``psi`` on pairs differing in ``b``.

    Requires ``psi`` to vanish on pairs differing inside ``a``.  The support
    is the single shape ``D - a`` where ``D`` contains ``a``, ``b``, the
    memory set of ``a`` in the space and the memory set of ``b`` for ``psi``.
    """
    if not a.issubset(b):
        raise InputError("need a ⊆ b")
    D = memory_set(ws.sft, a) | psi.memory_set(b) | a | b
    _require_inside(D, ws, "memory set")
    if a:
        gap, arg = _max_gap(ws, ws.pairs(a), psi)
        if gap > tol:
            i, j = arg
            raise PreconditionError(
                "cocycle does not vanish on pairs differing inside a",
                witness={"x": ws.restriction(i, ws.window), "y": ws.restriction(j, ws.window), "value": gap},
            )
    support = D - a
    pairs = ws.pairs(b)
    nodes = {ws.restriction(i, support) for i in range(len(ws))}
    edges = []
    for i, j in pairs:
        edges.append((ws.restriction(i, support), ws.restriction(j, support), psi(ws.config(i), ws.config(j))))
    F = solve_potential(nodes, edges, tol)
    phi = _site_indexed(support, F)
    err, _ = _max_gap(ws, pairs, psi, from_interaction(phi))
    cert = Certificate(
        exact_on={"region": [list(s) for s in b], "pairs": len(pairs)},
        max_error=err,
        window=[list(s) for s in ws.window],
        mode="exhaustive",
        details={"support": [list(s) for s in support], "classes": len(set(F.values())), "patterns": len(F)},
    )
    return phi, cert


def kozlov_chain(
    ws: WindowedSpace,
    psi: Cocycle,
    chain: Sequence[Shape],
    tol: float = DEFAULT_TOL,
) -> tuple[Interaction, list[Certificate]]:
    """Apply :func:`kozlov_partial` along an increasing chain of regions.

    Step ``i`` corrects the residual ``psi - psi_Phi`` on pairs differing in
    ``chain[i]`` with an interaction supported off ``chain[i-1]``.
    """
    total = Interaction(shift_invariant=False)
    certs = []
    prev = Shape()
    for region in chain:
        if not prev.issubset(region):
            raise InputError("chain must be increasing")
        residual = psi - from_interaction(total)
        step, cert = kozlov_partial(ws, residual, prev, region, tol)
        for shape in step.entries:
            if not shape.isdisjoint(prev):
                raise ConsistencyError("step support meets the previous region")  # pragma: no cover
        total = total + step
        certs.append(cert)
        prev = region
    pairs = ws.pairs(prev)
    err, _ = _max_gap(ws, pairs, psi, from_interaction(total))
    certs.append(Certificate(
        exact_on={"region": [list(s) for s in prev], "pairs": len(pairs)},
        max_error=err, window=[list(s) for s in ws.window], mode="exhaustive",
        details={"chain_length": len(chain), "supports_disjoint": True},
    ))
    return total, certs


def _radius_for(psi: Cocycle, sft: SftSpace, b: Shape, bound: float, ws: WindowedSpace, base: Shape) -> Shape:
    """Smallest ``b ⊕ r`` (joined with ``base``) on which ``psi`` varies by less than ``bound``."""
    r = 0
    while True:
        D = b.expand(r) | base
        if not D.issubset(ws.window):
            raise WindowError(f"continuity radius {r} leaves the window")
        if psi.modulus(b, r) < bound:
            return D
        r += 1


def kozlov_approx(
    ws: WindowedSpace,
    psi: Cocycle,
    a: Shape,
    b: Shape,
    eps_in: float,
    delta_out: float,
) -> tuple[Interaction, Certificate]:
    """Approximate partial extension for cocycles with a continuity modulus.

    Requires ``|psi| < eps_in`` on pairs differing inside ``a``.  Returns
    ``Phi`` with ``|psi_Phi - psi| < delta_out`` on pairs differing inside
    ``b`` and ``sum_{C ∩ a ≠ ∅} sup|Phi_C| < 3 eps_in``.
    """
    if not a.issubset(b):
        raise InputError("need a ⊆ b")
    if a:
        gap, _ = _max_gap(ws, ws.pairs(a), psi)
        if not gap < eps_in:
            raise PreconditionError("cocycle is not eps-small on pairs differing inside a", witness={"max": gap})
    sft = ws.sft
    mem_b = memory_set(sft, b) | b
    D1 = _radius_for(psi, sft, b, eps_in, ws, mem_b)
    s1 = D1 - a
    pairs = ws.pairs(b)
    inner = D1 - b
    # first stage: potentials on restrictions to D1 - a, anchored at canonical elements
    edges, nodes = [], set()
    for i in range(len(ws)):
        nodes.add(ws.restriction(i, s1))
    for i, j in pairs:
        p, q = ws.restriction(i, s1), ws.restriction(j, s1)
        z = ws.canonical(inner, ws.restriction(i, inner))
        u = ws.canonical(s1, p)
        v = ws.canonical(s1, q)
        X = _glue(ws, z, [(s1, p), (a, ws.restriction(u, a))])
        Y = _glue(ws, z, [(s1, q), (a, ws.restriction(v, a))])
        edges.append((p, q, psi(X, Y)))
    F1 = solve_potential(nodes, edges, 1e-8)
    phi1 = _site_indexed(s1, F1)
    # second stage: correct the residual on restrictions to D2
    residual = psi - from_interaction(phi1)
    D2 = _radius_for(residual, sft, b, delta_out, ws, D1)
    outer = D2 - b
    edges2, nodes2 = [], set()
    for i in range(len(ws)):
        nodes2.add(ws.restriction(i, D2))
    for i, j in pairs:
        p, q = ws.restriction(i, D2), ws.restriction(j, D2)
        z = ws.canonical(outer, ws.restriction(i, outer))
        X = _glue(ws, z, [(D2, p)])
        Y = _glue(ws, z, [(D2, q)])
        edges2.append((p, q, residual(X, Y)))
    F2 = solve_potential(nodes2, edges2, 1e-8)
    phi2 = _site_indexed(D2, F2)
    phi = phi1 + phi2
    err, _ = _max_gap(ws, pairs, psi, from_interaction(phi))
    near_a = max((abs(v) for v in F2.values()), default=0.0) if a else 0.0
    cert = Certificate(
        exact_on={"region": [list(s) for s in b], "pairs": len(pairs)},
        max_error=err,
        window=[list(s) for s in ws.window],
        mode="exhaustive",
        details={
            "delta_out": delta_out, "eps_in": eps_in, "error_ok": err < delta_out,
            "mass_near_a": near_a, "mass_ok": near_a < 3 * eps_in,
            "stage_supports": [[list(s) for s in s1], [list(s) for s in D2]],
        },
    )
    return phi, cert


def _glue(ws: WindowedSpace, base: int, parts: list[tuple[Shape, tuple[int, ...]]]) -> Configuration:
    values = dict(zip(ws.sites, (int(v) for v in ws.rows[base])))
    for shape, vals in parts:
        values.update(zip(shape, vals))
    i = ws.index_of(values)
    if i is None:
        raise PreconditionError("glued configuration is not admissible; enlarge the window")
    return ws.config(i)


def kozlov_approx_chain(
    ws: WindowedSpace,
    psi: Cocycle,
    chain: Sequence[Shape],
    eps0: float,
) -> tuple[Interaction, list[Certificate]]:
    """Iterate :func:`kozlov_approx` with tolerances ``eps0 * 2^-i``.

    The first step starts from the empty region; step ``i`` corrects the
    residual on pairs differing in ``chain[i]`` to within ``eps0 * 2^-(i+1)``.
    """
    total = Interaction(shift_invariant=False)
    certs = []
    prev = Shape()
    for i, region in enumerate(chain):
        eps_in = eps0 * 2.0 ** (-i)
        residual = psi - from_interaction(total)
        step, cert = kozlov_approx(ws, residual, prev, region, eps_in, eps_in / 2)
        total = total + step
        certs.append(cert)
        prev = region
    pairs = ws.pairs(prev)
    err, _ = _max_gap(ws, pairs, psi, from_interaction(total))
    tail = 3 * sum(eps0 * 2.0 ** (-i) for i in range(len(chain)))
    certs.append(Certificate(
        exact_on={"region": [list(s) for s in prev], "pairs": len(pairs)},
        max_error=err, window=[list(s) for s in ws.window], mode="exhaustive",
        details={"final_tolerance": eps0 * 2.0 ** (-len(chain)), "norm_tail_bound": tail},
    ))
    return total, certs


# ---------------------------------------------------------------------------
# Separated partitions and the fill map
# ---------------------------------------------------------------------------


def separated_partition(region: Shape, K: Shape) -> list[Shape]:
    """Split ``region`` into at most ``|K|^2`` classes, each ``K``-separated.

    Two sites are ``K``-separated when their ``K``-neighbourhoods are
    disjoint.  A maximal separated subset ``D`` is chosen greedily; its
    translates by ``K - K`` cover the region and are made disjoint in order.
    """
    KK = K.minus(K)
    blocked: set = set()
    D = []
    for s in region:
        if s not in blocked:
            D.append(s)
            blocked.update(tuple(a + b for a, b in zip(s, t)) for t in KK)
    Dshape = Shape(tuple(D))
    classes, seen = [], set()
    for u in KK:
        cls = [s for s in Dshape.translate(u) if s in region and s not in seen]
        if cls:
            seen.update(cls)
            classes.append(Shape(tuple(cls)))
    if len(seen) != len(region):  # pragma: no cover - guaranteed by maximality
        raise InputError("partition does not cover the region")
    return classes


def is_separated(shape: Shape, K: Shape) -> bool:
    KK = K.minus(K).as_set
    sites = list(shape)
    for s, t in itertools.combinations(sites, 2):
        if tuple(a - b for a, b in zip(s, t)) in KK:
            return False
    return True


class FillContext:
    """The data of the annulus fill: space, fill radius and anchor configuration.

    ``fill_radius`` is ``N'`` with every forbidden shape inside the ball
    ``F_{N'}``; the annulus between ``F_n`` and ``F_{n+2N'}`` is filled.
    """

    def __init__(self, sft: SftSpace, anchor: Configuration | None = None, fill_radius: int | None = None):
        if not sft.ssf:
            raise InputError("the annulus fill needs a single-site fillable space")
        self.sft = sft
        self.anchor = anchor if anchor is not None else sft.default_background
        need = max((max(abs(c) for c in s) for s in sft.forbidden_union), default=0)
        self.fill_radius = max(1, need) if fill_radius is None else fill_radius
        if self.fill_radius < need:
            raise InputError("fill radius must cover every forbidden shape")
        self.K = Shape.ball(self.fill_radius, sft.dimension)
        self._classes: dict[int, list[Shape]] = {}

    @property
    def N(self) -> int:
        return 2 * self.fill_radius

    def classes(self, n: int) -> list[Shape]:
        if n not in self._classes:
            d = self.sft.dimension
            annulus = Shape.ball(n + self.N, d) - Shape.ball(n, d)
            self._classes[n] = separated_partition(annulus, self.K)
        return self._classes[n]


def build_fill(ctx: FillContext, x: Configuration | Pattern, n: int) -> Configuration:
    """``z(x, n)``: ``x`` on ``F_n``, the anchor outside ``F_{n+N}``, least symbols between.

    Annulus classes are filled in order; within a class sites cannot
    interact, so each gets the least symbol compatible with what is set.
    """
    d = ctx.sft.dimension
    core = Shape.ball(n, d)
    outer = Shape.ball(n + ctx.N, d).as_set
    cells = {s: x[s] for s in core}

    def lookup(u: Site):
        v = cells.get(u)
        if v is not None:
            return v
        return None if u in outer else ctx.anchor[u]

    for cls in ctx.classes(n):
        for s in cls:
            c = least_symbol(ctx.sft, lookup, s)
            if c is None:
                raise FillFailure(f"no symbol fills annulus site {s}", witness={"site": list(s), "n": n})
            cells[s] = c
    return ctx.anchor.with_patch(cells)


def fill_locality(ctx: FillContext, n: int, samples: int = 200, seed: int = 0) -> dict:
    """Sample single-site changes of the core and measure how far ``z`` moves.

    Interior changes (inside ``F_{n-N}``) must move ``z`` at that site only.
    Changes in the margin are reported with the largest spread observed.
    """
    from .norms import random_pattern
    from .lattice import violates_at

    sft = ctx.sft
    d = sft.dimension
    core = Shape.ball(n, d)
    inner = Shape.ball(n - ctx.N, d).as_set if n >= ctx.N else frozenset()
    rng = np.random.Generator(np.random.Philox(seed))
    interior_ok, spread = True, 0
    tried = 0
    for _ in range(samples):
        cells = random_pattern(sft, core, rng, ctx.anchor)
        x = ctx.anchor.with_patch(cells)
        j = core.sites[int(rng.integers(len(core)))]
        options = [c for c in range(sft.q) if c != x[j] and not violates_at(
            sft, lambda u, c=c: c if u == j else (cells.get(u) if u in core else None), j)]
        if not options:
            continue
        y = x.with_patch({j: options[int(rng.integers(len(options)))]})
        zx, zy = build_fill(ctx, x, n), build_fill(ctx, y, n)
        diff = zx.disagreement(zy)
        tried += 1
        far = max(max(abs(a - b) for a, b in zip(s, j)) for s in diff)
        if j in inner and list(diff) != [j]:
            interior_ok = False
        spread = max(spread, far)
    return {"samples": tried, "interior_ok": interior_ok, "max_spread": spread, "n": n}


# ---------------------------------------------------------------------------
# Single-site-fill interactions
# ---------------------------------------------------------------------------


@dataclass
class SullivanReport:
    n: int
    patterns: int
    norm_vs: NormReport
    norm_sullivan_psi: NormReport
    residual: NormReport
    mode: str

    def to_dict(self) -> dict:
        return {
            "n": self.n, "patterns": self.patterns, "mode": self.mode,
            "norm_vs": self.norm_vs.to_dict(),
            "norm_sullivan_psi": self.norm_sullivan_psi.to_dict(),
            "residual_sullivan": self.residual.to_dict(),
            "vs_within_three_sullivan": self.norm_vs.value <= 3 * self.norm_sullivan_psi.value + 1e-12,
        }


def residual_shape(psi: Cocycle, sft: SftSpace) -> Shape:
    """Sites that ``x -> (psi_Phi - psi)(x, zeta_0 x)`` depends on for the safe-symbol builder.

    Each placement term is ``psi`` evaluated on a pair differing at the
    origin with the outside replaced by the safe symbol, so only the memory
    set of the origin and the sites fixing ``zeta_0`` matter.
    """
    origin = Shape(((0,) * sft.dimension,))
    return psi.memory_set(origin) | origin.plus(sft.reach)


def sullivan_interaction(
    sft: SftSpace,
    psi: Cocycle,
    n: int,
    anchor: Configuration | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Interaction:
    """Shift-invariant interaction on translates of ``F_n`` approximating ``psi``.

    With a safe symbol ``s`` the value on a pattern ``p`` is
    ``psi(s^Z, p ∨ s) / |F_n|``.  Otherwise ``p`` is completed by the
    annulus fill against ``anchor`` and the value is
    ``psi(anchor, z(p, n)) / |F_n|``.
    """
    d = sft.dimension
    Fn = Shape.ball(n, d)
    rows = language_array(sft, Fn, 0, budget=budget)
    size = float(len(Fn))
    table = {}
    if sft.safe_symbol is not None:
        base = Configuration.constant(sft.safe_symbol, d)
        for row in rows:
            key = tuple(int(v) for v in row)
            table[key] = psi(base, base.with_patch(dict(zip(Fn, key)))) / size
    else:
        ctx = FillContext(sft, anchor)
        w = ctx.anchor
        for row in rows:
            key = tuple(int(v) for v in row)
            z = build_fill(ctx, w.with_patch(dict(zip(Fn, key))), n)
            table[key] = psi(w, z) / size
    return Interaction({Fn: table})


def sullivan_report(
    sft: SftSpace,
    psi: Cocycle,
    phi: Interaction,
    n: int,
    samples: int = 2000,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> SullivanReport:
    """Norms of the builder output and of the residual cocycle ``psi_Phi - psi``."""
    vs = norm_vs(phi, sft, budget=budget)
    base = norm_sullivan(psi, sft, budget=budget)
    residual = from_interaction(phi) - psi
    if sft.safe_symbol is not None:
        res = norm_sullivan(residual, sft, "exact", shape=residual_shape(psi, sft), budget=budget)
        mode = "exact"
    else:
        G = Shape.ball(2 * n + 1, sft.dimension)
        res = norm_sullivan(residual, sft, "sample", shape=G, samples=samples, seed=seed)
        mode = "sampled"
    return SullivanReport(n, sum(len(t) for t in phi.entries.values()), vs, base, res, mode)


def sullivan_sweep(sft: SftSpace, psi: Cocycle, ns: Sequence[int], **kw) -> dict:
    """Run the builder for each ``n`` and summarize the residual trend."""
    reports = []
    for n in ns:
        phi = sullivan_interaction(sft, psi, n, budget=kw.get("budget", DEFAULT_BUDGET))
        reports.append(sullivan_report(sft, psi, phi, n, **kw))
    residuals = [r.residual.value for r in reports]
    base = reports[-1].norm_sullivan_psi.value if reports else 0.0
    return {
        "reports": [r.to_dict() for r in reports],
        "residuals": residuals,
        "nonincreasing": all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:])),
        "final_ratio": residuals[-1] / base if reports and base else 0.0,
        "vs_bound_ok": bool(reports) and reports[-1].norm_vs.value <= 3 * base + 1e-12,
    }
