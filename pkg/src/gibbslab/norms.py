"""Norms of interactions and cocycles, and the dual-norm proxy for pairs.

Every function returns a :class:`NormReport` whose ``mode`` says whether the
value is exact or a one-sided bound.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cocycles import Cocycle, Interaction
from .errors import BudgetError, InputError
from .lattice import (
    DEFAULT_BUDGET,
    AsymptoticPair,
    Configuration,
    Shape,
    SftSpace,
    language_array,
    zeta,
)


@dataclass
class NormReport:
    value: float
    mode: str  # "exact" | "lower_bound" | "upper_bound"
    witness: Any = None
    budget: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "mode": self.mode, "witness": self.witness, "budget": self.budget}


def _pack(arr: np.ndarray, q: int) -> np.ndarray | None:
    """Encode rows as base-q integers, or None when they would overflow int64."""
    m = arr.shape[1]
    if m == 0:
        return np.zeros(arr.shape[0], dtype=np.int64)
    if m * np.log2(max(q, 2)) >= 62:
        return None
    weights = (q ** np.arange(m, dtype=np.int64)).astype(np.int64)
    return arr.astype(np.int64) @ weights


def _table_values(rows: np.ndarray, table: dict) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.zeros(0)
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    vals = np.array([table.get(tuple(int(v) for v in r), 0.0) for r in uniq])
    return vals[np.asarray(inverse).reshape(-1)]


def _sup_on_shape(shape: Shape, table: dict, sft: SftSpace | None, halo: int, budget: int):
    if sft is None:
        items = [(abs(v), k) for k, v in table.items()]
        return max(items, default=(0.0, None))
    rows = language_array(sft, shape, halo, budget=budget)
    vals = np.abs(_table_values(rows, table))
    if vals.size == 0:
        return 0.0, None
    i = int(np.argmax(vals))
    return float(vals[i]), tuple(int(v) for v in rows[i])


def norm_ns(phi: Interaction, sft: SftSpace | None = None, halo: int = 0, budget: int = DEFAULT_BUDGET) -> NormReport:
    """``sum_{C ∋ 0} sup |Phi_C|`` over admissible patterns (all table keys when ``sft`` is None).

    Shift-invariant entries contribute ``|S| * sup|Phi_S|`` since ``|S|``
    translates of ``S`` contain the origin.  For site-indexed interactions
    the supremum over sites is taken.
    """
    if phi.shift_invariant:
        total, witness = 0.0, None
        best = -1.0
        for shape, table in phi.entries.items():
            sup, pat = _sup_on_shape(shape, table, sft, halo, budget)
            total += len(shape) * sup
            if sup > best:
                best, witness = sup, {"shape": [list(s) for s in shape], "pattern": pat}
        return NormReport(total, "exact", witness)
    per_site: dict = {}
    for shape, table in phi.entries.items():
        sup, _ = _sup_on_shape(shape, table, sft, halo, budget)
        for s in shape:
            per_site[s] = per_site.get(s, 0.0) + sup
    if not per_site:
        return NormReport(0.0, "exact")
    site = max(per_site, key=lambda s: (per_site[s], s))
    return NormReport(per_site[site], "exact", {"site": list(site)})


def _variations(shape: Shape, table: dict, sft: SftSpace, halo: int, budget: int) -> dict:
    """``Var_s`` of the entry on ``shape`` for every site ``s`` of it."""
    big = shape.expand(halo)
    arr = enumerate_rows(sft, big, budget)
    pos = {s: i for i, s in enumerate(big)}
    cols = [pos[s] for s in shape]
    vals = _table_values(arr[:, cols], table)
    packed = _pack(arr, sft.q)
    out = {}
    for s in shape:
        c = pos[s]
        if packed is not None:
            keys = packed - arr[:, c].astype(np.int64) * (sft.q ** c)
            _, groups = np.unique(keys, return_inverse=True)
        else:
            masked = arr.copy()
            masked[:, c] = -1
            _, groups = np.unique(masked, axis=0, return_inverse=True)
        groups = np.asarray(groups).reshape(-1)
        if vals.size == 0:
            out[s] = 0.0
            continue
        hi = np.full(groups.max() + 1, -np.inf)
        lo = np.full(groups.max() + 1, np.inf)
        np.maximum.at(hi, groups, vals)
        np.minimum.at(lo, groups, vals)
        out[s] = float(np.max(hi - lo))
    return out


def enumerate_rows(sft: SftSpace, shape: Shape, budget: int) -> np.ndarray:
    return language_array(sft, shape, 0, budget=budget)


def norm_vs(phi: Interaction, sft: SftSpace, halo: int | None = None, budget: int = DEFAULT_BUDGET) -> NormReport:
    """``sum_{C ∋ 0} Var_0(Phi_C)`` with variations taken over single-site changes.

    Patterns are enumerated on each entry shape grown by ``halo`` (default:
    the reach of the forbidden list), which makes the value exact for
    single-site-fillable spaces.
    """
    halo = sft.reach_radius if halo is None else halo
    if phi.shift_invariant:
        total, best, witness = 0.0, -1.0, None
        for shape, table in phi.entries.items():
            var = _variations(shape, table, sft, halo, budget)
            total += sum(var.values())
            for s, v in var.items():
                if v > best:
                    best, witness = v, {"shape": [list(t) for t in shape], "site": list(s), "variation": v}
        return NormReport(total, "exact" if sft.ssf else "upper_bound", witness, {"halo": halo})
    per_site: dict = {}
    for shape, table in phi.entries.items():
        for s, v in _variations(shape, table, sft, halo, budget).items():
            per_site[s] = per_site.get(s, 0.0) + v
    if not per_site:
        return NormReport(0.0, "exact")
    site = max(per_site, key=lambda s: (per_site[s], s))
    return NormReport(per_site[site], "exact" if sft.ssf else "upper_bound", {"site": list(site)}, {"halo": halo})


def random_pattern(sft: SftSpace, shape: Shape, rng: np.random.Generator, base: Configuration | None = None) -> dict:
    """A random locally admissible filling of ``shape`` built site by site."""
    from .lattice import violates_at

    base = base or sft.default_background
    cells: dict = {}

    def lookup(u):
        v = cells.get(u)
        if v is not None:
            return v
        return None if u in shape else base[u]

    for s in shape:
        order = rng.permutation(sft.q)
        chosen = None
        for c in order:
            cells[s] = int(c)
            if not violates_at(sft, lookup, s):
                chosen = int(c)
                break
        if chosen is None:
            cells[s] = 0
    return cells


def norm_sullivan(
    c: Cocycle,
    sft: SftSpace,
    mode: str = "exact",
    shape: Shape | None = None,
    samples: int = 2000,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> NormReport:
    """``sup_x |psi(x, zeta_0 x)|``.

    In exact mode every admissible pattern on the generator shape (the
    cocycle's declared dependence set, or ``shape``) is tried; the rest of the
    configuration is the space's default background.  Sample mode draws
    random admissible patterns on the shape and reports a lower bound.
    """
    G = shape if shape is not None else c.generator_shape(sft)
    origin = (0,) * sft.dimension
    if origin not in G:
        G = G | Shape((origin,))
    base = sft.default_background
    best, witness = 0.0, None
    if mode == "exact":
        rows = language_array(sft, G, sft.reach_radius, budget=budget)
        for row in rows:
            x = base.with_patch(dict(zip(G, (int(v) for v in row))))
            v = abs(c(x, zeta(sft, x, origin)))
            if v > best:
                best, witness = v, {"shape": [list(s) for s in G], "pattern": [int(t) for t in row]}
        return NormReport(best, "exact", witness, {"patterns": int(rows.shape[0])})
    if mode != "sample":
        raise InputError(f"unknown mode {mode!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(samples):
        cells = random_pattern(sft, G, rng, base)
        x = base.with_patch(cells)
        v = abs(c(x, zeta(sft, x, origin)))
        if v > best:
            best, witness = v, {"shape": [list(s) for s in G], "pattern": [cells[s] for s in G]}
    return NormReport(best, "lower_bound", witness, {"samples": samples, "seed": seed})


# ---------------------------------------------------------------------------
# Dual-norm proxy for one-dimensional pairs
# ---------------------------------------------------------------------------


def _pair_arrays(pair: AsymptoticPair, pad: int):
    x, y = pair.left, pair.right
    if x.dim != 1:
        raise InputError("dual-norm proxy is implemented for one-dimensional pairs")
    delta = pair.disagreement
    if not delta:
        raise InputError("pair does not disagree anywhere")
    lo, hi = delta.bounds()
    lo, hi = lo[0], hi[0]
    start = lo - pad
    idx = range(start, hi + pad + 1)
    xs = np.array([x[(i,)] for i in idx], dtype=np.int64)
    ys = np.array([y[(i,)] for i in idx], dtype=np.int64)
    return xs, ys, lo, hi, start


def _interval_sums(xs, ys, lo, hi, start, max_len, q):
    """Largest ``(1/m) sum_w |Delta_w|`` over intervals of length ``m <= max_len``."""
    bits = max(1, (q - 1).bit_length())
    X = 0
    Y = 0
    for i in range(len(xs) - 1, -1, -1):
        X = (X << bits) | int(xs[i])
        Y = (Y << bits) | int(ys[i])
    best, arg = 0.0, None
    for m in range(1, max_len + 1):
        mask = (1 << (bits * m)) - 1
        counts: Counter = Counter()
        for j in range(lo - m + 1, hi + 1):
            off = bits * (j - start)
            wx = (X >> off) & mask
            wy = (Y >> off) & mask
            if wx != wy:
                counts[wy] += 1
                counts[wx] -= 1
        total = sum(abs(v) for v in counts.values())
        if total / m > best:
            best, arg = total / m, m
    return best, arg


def _shape_sums(xs, ys, lo, hi, start, max_size, max_diam, q):
    """Largest ``(1/|A|) sum_w |Delta_w|`` over shapes ``{0} ∪ ...`` of size <= 3."""
    if max_size > 3:
        raise BudgetError("sparse-shape proxy supports shapes of at most three sites")
    js = np.arange(lo - max_diam, hi + 1) - start
    best, arg = 0.0, None

    def score(cx, cy, size, labels):
        nonlocal best, arg
        rows, ncodes = cx.shape[0], q ** size
        off = (np.arange(rows)[:, None] * ncodes)
        hx = np.bincount((cx + off).ravel(), minlength=rows * ncodes).reshape(rows, ncodes)
        hy = np.bincount((cy + off).ravel(), minlength=rows * ncodes).reshape(rows, ncodes)
        sums = np.abs(hy - hx).sum(axis=1) / size
        i = int(np.argmax(sums))
        if sums[i] > best:
            best, arg = float(sums[i]), labels[i]

    x0, y0 = xs[js], ys[js]
    score(x0[None, :], y0[None, :], 1, [[0]])
    if max_size >= 2 and max_diam >= 1:
        a = np.arange(1, max_diam + 1)
        cx = x0[None, :] + q * xs[js[None, :] + a[:, None]]
        cy = y0[None, :] + q * ys[js[None, :] + a[:, None]]
        score(cx, cy, 2, [[0, int(t)] for t in a])
    if max_size >= 3 and max_diam >= 2:
        for a in range(1, max_diam):
            b = np.arange(a + 1, max_diam + 1)
            base_x = x0 + q * xs[js + a]
            base_y = y0 + q * ys[js + a]
            cx = base_x[None, :] + q * q * xs[js[None, :] + b[:, None]]
            cy = base_y[None, :] + q * q * ys[js[None, :] + b[:, None]]
            score(cx, cy, 3, [[0, a, int(t)] for t in b])
    return best, arg


def dual_ns_norm(
    pair: AsymptoticPair,
    max_interval: int = 16,
    max_shape_size: int = 2,
    max_diameter: int = 16,
    q: int | None = None,
) -> NormReport:
    """Lower bound for ``sup_A (1/|A|) sum_w |Delta_w(x, y)|`` on a 1D pair.

    ``A`` ranges over intervals of length up to ``max_interval`` and over
    shapes of at most ``max_shape_size`` sites with diameter up to
    ``max_diameter``.  Since every such ratio is at most twice the size of
    the disagreement set, reaching that value certifies exactness.
    """
    if q is None:
        q = 1 + max(
            max(pair.left.cell.values()), max(pair.right.cell.values()),
            max(pair.left.patch.values(), default=0), max(pair.right.patch.values(), default=0),
        )
    pad = max(max_interval, max_diameter) + 1
    xs, ys, lo, hi, start = _pair_arrays(pair, pad)
    iv, iv_arg = _interval_sums(xs, ys, lo, hi, start, max_interval, q)
    sh, sh_arg = _shape_sums(xs, ys, lo, hi, start, max_shape_size, max_diameter, q)
    if iv >= sh:
        value, witness = iv, {"kind": "interval", "length": iv_arg}
    else:
        value, witness = sh, {"kind": "shape", "offsets": sh_arg}
    witness["interval_max"] = iv
    witness["shape_max"] = sh
    ceiling = 2 * len(pair.disagreement)
    mode = "exact" if value >= ceiling else "lower_bound"
    budget = {"max_interval": max_interval, "max_shape_size": max_shape_size, "max_diameter": max_diameter}
    return NormReport(value, mode, witness, budget)
