"""Marker words on the full binary shift and the cocycles they induce.

Words are stored as Python integers with bit ``i`` holding position ``i``;
Hamming distances are popcounts of XORs.  All tolerances are compared in
exact rational arithmetic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import BudgetError, InputError, SearchExhausted
from .lattice import AsymptoticPair, Configuration

SEARCH_BLOCK = 64


def as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value))


@dataclass(frozen=True)
class MarkerParams:
    """Parameters of a marker search; ``epsilon`` and ``delta`` are exact rationals."""

    k: int
    n: int
    epsilon: Fraction
    delta: Fraction = Fraction(1, 2)
    K: int = 16
    seed: int = 0
    attempts: int = 1_000_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.k < 1 or self.n < 2:
            raise InputError("need k >= 1 and n >= 2")
        if not (0 < self.delta <= 1) or self.epsilon <= 0:
            raise InputError("need 0 < delta <= 1 and epsilon > 0")
        if self.K < 1:
            raise InputError("K must be a positive integer")

    @classmethod
    def scheduled(cls, k: int, n: int, **kw: Any) -> "MarkerParams":
        """Parameters with the tolerance ``epsilon = 1 / (k^2 2^k)``."""
        return cls(k=k, n=n, epsilon=Fraction(1, k * k * 2**k), **kw)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "n": self.n, "epsilon": str(self.epsilon), "delta": str(self.delta),
            "K": self.K, "seed": self.seed, "attempts": self.attempts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkerParams":
        return cls(
            k=int(d["k"]), n=int(d["n"]), epsilon=as_fraction(d["epsilon"]),
            delta=as_fraction(d.get("delta", "1/2")), K=int(d.get("K", 16)),
            seed=int(d.get("seed", 0)), attempts=int(d.get("attempts", 1_000_000)),
        )


def word_to_int(word: str) -> int:
    if set(word) - {"0", "1"}:
        raise InputError("marker words are binary strings")
    return sum(1 << i for i, ch in enumerate(word) if ch == "1")


def int_to_word(value: int, n: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(n))


def ham(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def shifted(word: int, j: int, n: int) -> int:
    """``(sigma^j x)`` on ``[0, n-1]`` where ``x`` is ``word`` padded with zeros."""
    mask = (1 << n) - 1
    return (word >> j) if j >= 0 else (word << -j) & mask


@dataclass
class VerifyReport:
    full: bool
    condition_a: bool
    condition_b: bool
    mode: str
    max_abs_delta: int
    min_overlap_ham: int
    shapes_checked: int
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "full": self.full, "condition_a": self.condition_a, "condition_b": self.condition_b,
            "mode": self.mode, "max_abs_delta": self.max_abs_delta,
            "min_overlap_ham": self.min_overlap_ham, "shapes_checked": self.shapes_checked,
            "witness": self.witness,
        }


def _check_overlaps(params: MarkerParams, u: int, v: int, fail_fast: bool):
    """Distance of the two words and of every nonzero shift of each from both."""
    n = params.n
    thresh = (1 - params.delta) * n / 2
    h = ham(u, v)
    lowest = h
    witness = None
    if not h > thresh:
        witness = {
            "condition": "a", "shift": 0, "between": "u-v", "ham": h,
            "threshold": str(thresh), "text": f"Ham(u,v)={h}",
        }
        if fail_fast:
            return False, lowest, witness
    for j in range(-n, n + 1):
        if j == 0:
            continue
        su, sv = shifted(u, j, n), shifted(v, j, n)
        for label, a, b in (("x-u", su, u), ("x-v", su, v), ("y-u", sv, u), ("y-v", sv, v)):
            d = ham(a, b)
            lowest = min(lowest, d)
            if not d > thresh and witness is None:
                witness = {
                    "condition": "a", "shift": j, "between": label, "ham": d,
                    "threshold": str(thresh), "text": f"Ham(shift {j} of {'u' if label[0] == 'x' else 'v'}, {label[2]})={d}",
                }
                if fail_fast:
                    return False, lowest, witness
    return witness is None, lowest, witness


def _bits(word: int, n: int) -> np.ndarray:
    return np.array([(word >> i) & 1 for i in range(n)], dtype=np.int8)


def _ranges(signed: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Max interval |sum| per row: max prefix minus min prefix, empty prefix included."""
    pref = np.cumsum(signed, axis=-1, dtype=np.int32)
    zero = np.zeros(pref.shape[:-1] + (1,), dtype=np.int32)
    pref = np.concatenate([zero, pref], axis=-1)
    hi = pref.argmax(axis=-1)
    lo = pref.argmin(axis=-1)
    rng = np.take_along_axis(pref, hi[..., None], -1)[..., 0] - np.take_along_axis(pref, lo[..., None], -1)[..., 0]
    return rng, lo, hi


def max_interval_sum(signed: np.ndarray) -> int:
    """Largest ``|sum_{i in I} s_i|`` over intervals ``I`` of a 1D sequence."""
    rng, _, _ = _ranges(np.asarray(signed)[None, :])
    return int(rng[0])


def _condition_b(
    params: MarkerParams,
    u: int,
    v: int,
    fail_fast: bool,
    shape_budget: int,
    rng: np.random.Generator | None,
):
    n, k = params.n, params.k
    limit = params.epsilon * n
    off = n - 1  # array index of site 0
    length = 3 * n - 2  # sites -n+1 .. 2n-2
    xs = np.zeros(length, dtype=np.int8)
    ys = np.zeros(length, dtype=np.int8)
    xs[off:off + n] = _bits(u, n)
    ys[off:off + n] = _bits(v, n)
    i_idx = np.arange(2 * n - 1)  # positions i = -n+1 .. n-1 map to array index i + off
    state = {"max": 0, "witness": None, "checked": 0}

    def examine(cx: np.ndarray, cy: np.ndarray, size: int, shapes: list) -> bool:
        for w in range(2 ** size):
            signed = (cy == w).astype(np.int8) - (cx == w).astype(np.int8)
            r, lo, hi = _ranges(signed)
            state["checked"] += r.shape[0]
            j = int(np.argmax(r))
            if r[j] > state["max"]:
                state["max"] = int(r[j])
                a, b = sorted((int(lo[j]), int(hi[j])))
                state["witness"] = {
                    "condition": "b", "shape": shapes[j], "word": int_to_word(w, size),
                    "interval": [a - n + 1, b - n], "abs_delta": int(r[j]), "limit": str(limit),
                }
            if not state["max"] < limit and fail_fast:
                return False
        return True

    base_x = xs[i_idx + 0]
    base_y = ys[i_idx + 0]
    if not examine(base_x[None, :], base_y[None, :], 1, [[0]]):
        return False, state, "exhaustive"
    if k >= 2:
        a = np.arange(1, n)
        cx = base_x[None, :] + 2 * xs[i_idx[None, :] + a[:, None]]
        cy = base_y[None, :] + 2 * ys[i_idx[None, :] + a[:, None]]
        if not examine(cx, cy, 2, [[0, int(t)] for t in a]):
            return False, state, "exhaustive"
    if k == 3:
        if (n - 1) * (n - 2) // 2 > shape_budget:
            raise BudgetError("three-site shape count exceeds the verification budget")
        for a in range(1, n - 1):
            b = np.arange(a + 1, n)
            px = base_x + 2 * xs[i_idx + a]
            py = base_y + 2 * ys[i_idx + a]
            cx = px[None, :] + 4 * xs[i_idx[None, :] + b[:, None]]
            cy = py[None, :] + 4 * ys[i_idx[None, :] + b[:, None]]
            if not examine(cx, cy, 3, [[0, a, int(t)] for t in b]):
                return False, state, "exhaustive"
    mode = "exhaustive"
    if k > 3:
        mode = "sampled"
        rng = rng or np.random.Generator(np.random.Philox(params.seed))
        for size in range(3, k + 1):
            for _ in range(max(1, shape_budget // max(1, 2 * n))):
                rest = np.sort(rng.choice(np.arange(1, n), size=size - 1, replace=False))
                cx = base_x.astype(np.int64)
                cy = base_y.astype(np.int64)
                for t, d in enumerate(rest, start=1):
                    cx = cx + (2**t) * xs[i_idx + d]
                    cy = cy + (2**t) * ys[i_idx + d]
                if not examine(cx[None, :], cy[None, :], size, [[0] + [int(d) for d in rest]]):
                    return False, state, mode
    return state["max"] < limit, state, mode


def verify_markers(
    params: MarkerParams,
    u: int | str,
    v: int | str,
    fail_fast: bool = False,
    shape_budget: int = 2_000_000,
) -> VerifyReport:
    """Check both marker conditions for the words ``u`` and ``v``.

    (a) ``u`` and ``v`` are far apart and far from every nonzero shift of the
    zero-padded words.  (b) For every shape of at most ``k`` sites with least
    site 0 inside ``[0, n-1]`` and every word on it, the signed occurrence
    count over any interval of translations stays below ``epsilon * n``.
    Shapes are exhaustive for ``k <= 3`` and sampled beyond.
    """
    u = word_to_int(u) if isinstance(u, str) else u
    v = word_to_int(v) if isinstance(v, str) else v
    if u >> params.n or v >> params.n:
        raise InputError("marker words are longer than n")
    ok_a, lowest, wit_a = _check_overlaps(params, u, v, fail_fast)
    if not ok_a and fail_fast:
        return VerifyReport(False, False, False, "exhaustive", -1, lowest, 0, wit_a)
    ok_b, state, mode = _condition_b(params, u, v, fail_fast, shape_budget, None)
    witness = wit_a if not ok_a else (state["witness"] if not ok_b else None)
    full = ok_a and ok_b and mode == "exhaustive"
    return VerifyReport(full, ok_a, ok_b, mode, state["max"], lowest, state["checked"], witness)


@dataclass
class MarkerData:
    params: MarkerParams
    u: int
    v: int
    certified: dict | None = None
    attempt: int | None = None

    @property
    def n(self) -> int:
        return self.params.n

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "u": int_to_word(self.u, self.n),
            "v": int_to_word(self.v, self.n),
            "attempt": self.attempt,
            "certified": self.certified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkerData":
        if "params" not in d and isinstance(d.get("result"), dict):
            d = d["result"]
        try:
            params = MarkerParams.from_dict(d["params"])
            d["u"], d["v"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"marker file lacks {exc}") from None
        if len(d["u"]) != params.n or len(d["v"]) != params.n:
            raise InputError("word length does not match n")
        return cls(params, word_to_int(d["u"]), word_to_int(d["v"]), d.get("certified"), d.get("attempt"))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _search_block(params: MarkerParams, block: int, stop: int):
    """Try the candidates of one block; return the first success or the best near miss."""
    rng = _block_rng(params.seed, block)
    best = None
    for t in range(block * SEARCH_BLOCK, min(stop, (block + 1) * SEARCH_BLOCK)):
        bits = rng.integers(0, 2, size=(2, params.n), dtype=np.int64)
        u = int(sum(int(b) << i for i, b in enumerate(bits[0]) if b))
        v = int(sum(int(b) << i for i, b in enumerate(bits[1]) if b))
        rep = verify_markers(params, u, v, fail_fast=True)
        if rep.full:
            return ("found", t, u, v, rep.to_dict())
        score = (rep.condition_a, -rep.max_abs_delta if rep.condition_a else rep.min_overlap_ham)
        if best is None or score > best[0]:
            best = (score, t, u, v, rep.to_dict())
    return ("miss",) + (best[1:] if best else (None, None, None, None))


def default_workers() -> int:
    env = os.environ.get("GIBBSLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError("GIBBSLAB_WORKERS must be an integer") from None
    return max(1, os.cpu_count() or 1)


def search_markers(params: MarkerParams, workers: int = 1) -> MarkerData:
    """Sample word pairs until one passes :func:`verify_markers` in full.

    Candidate ``t`` is drawn from a counter-based stream keyed by the seed
    and ``t // 64``, so results do not depend on ``workers``: the winner is
    always the lowest-indexed passing candidate.
    """
    blocks = math.ceil(params.attempts / SEARCH_BLOCK)
    best = None
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, blocks, max(1, workers)):
            batch = list(range(start, min(blocks, start + max(1, workers))))
            if pool is None:
                results = [_search_block(params, b, params.attempts) for b in batch]
            else:
                results = list(pool.map(_search_block, [params] * len(batch), batch, [params.attempts] * len(batch)))
            for res in results:
                if res[0] == "found":
                    _, t, u, v, rep = res
                    return MarkerData(params, u, v, rep, t)
                if res[1] is not None and (best is None or res[1] < best[1]):
                    best = res
    finally:
        if pool is not None:
            pool.shutdown()
    witness = None
    if best is not None:
        _, t, u, v, rep = best
        witness = {"attempt": t, "u": int_to_word(u, params.n), "v": int_to_word(v, params.n), "report": rep}
    raise SearchExhausted(f"no certified pair in {params.attempts} attempts", best=witness)


# ---------------------------------------------------------------------------
# Marker interaction and cocycle
# ---------------------------------------------------------------------------


class MarkerInteraction:
    """``Phi(x) = max(0, n - K Ham(x_[0,n-1], u)) - max(0, n - K Ham(x_[0,n-1], v))``."""

    def __init__(self, data: MarkerData):
        self.data = data
        self.n = data.n
        self.K = data.params.K
        self.mask = (1 << self.n) - 1

    def __call__(self, window: int) -> int:
        n, K = self.n, self.K
        return max(0, n - K * ham(window, self.data.u)) - max(0, n - K * ham(window, self.data.v))

    def clamps(self, window: int) -> tuple[int, int]:
        n, K = self.n, self.K
        return max(0, n - K * ham(window, self.data.u)), max(0, n - K * ham(window, self.data.v))


def marker_interaction(data: MarkerData) -> MarkerInteraction:
    return MarkerInteraction(data)


def _bitline(x: Configuration, lo: int, hi: int) -> int:
    out = 0
    for i in range(hi, lo - 1, -1):
        s = x[(i,)]
        if s not in (0, 1):
            raise InputError("marker cocycles act on binary configurations")
        out = (out << 1) | s
    return out


def psi_k(data: MarkerData, pair: AsymptoticPair) -> int:
    """``sum_j [Phi(sigma^j y) - Phi(sigma^j x)]`` over windows meeting the disagreement."""
    x, y = pair.left, pair.right
    if x.dim != 1 or x.period != (1,) or x.cell[(0,)] != 0:
        raise InputError("marker cocycle expects configurations over the zero background")
    delta = pair.disagreement
    if not delta:
        return 0
    n = data.n
    phi = MarkerInteraction(data)
    lo, hi = delta.bounds()[0][0] - n + 1, delta.bounds()[1][0]
    X = _bitline(x, lo, hi + n - 1)
    Y = _bitline(y, lo, hi + n - 1)
    total = 0
    for j in range(lo, hi + 1):
        off = j - lo
        total += phi((Y >> off) & phi.mask) - phi((X >> off) & phi.mask)
    return total


def marker_pair(data: MarkerData) -> AsymptoticPair:
    """``u`` and ``v`` placed on ``[0, n-1]`` over the zero background."""
    n = data.n
    zero = Configuration.constant(0, 1)
    left = zero.with_patch({(i,): (data.u >> i) & 1 for i in range(n)})
    right = zero.with_patch({(i,): (data.v >> i) & 1 for i in range(n)})
    return AsymptoticPair(left, right)


# ---------------------------------------------------------------------------
# Sampled checks
# ---------------------------------------------------------------------------


def _window_hams(z: np.ndarray, word: np.ndarray) -> np.ndarray:
    """Hamming distance of ``word`` to each length-n window of the zero-padded ``z``.

    Entry ``t`` is the window starting at position ``t - n + 1`` of ``z``.
    """
    n = word.size
    zp = np.concatenate([np.zeros(n - 1, np.int64), z.astype(np.int64), np.zeros(n - 1, np.int64)])
    dots = np.correlate(zp, word.astype(np.int64), mode="valid")
    csum = np.concatenate([[0], np.cumsum(zp)])
    ones = csum[n:] - csum[:-n]
    return ones + int(word.sum()) - 2 * dots


def _corrupt(rng: np.random.Generator, word: np.ndarray, flips: int) -> np.ndarray:
    out = word.copy()
    if flips:
        idx = rng.choice(word.size, size=flips, replace=False)
        out[idx] ^= 1
    return out


def _structured_line(rng: np.random.Generator, data: MarkerData, length: int) -> np.ndarray:
    """A random binary line seeded with noisy copies of the marker words."""
    n, K = data.n, data.params.K
    u, v = _bits(data.u, n), _bits(data.v, n)
    kind = rng.integers(0, 3)
    line = rng.integers(0, 2, size=length).astype(np.int8) if kind == 0 else np.zeros(length, np.int8)
    for _ in range(int(rng.integers(1, 4))):
        word = u if rng.integers(0, 2) == 0 else v
        if rng.integers(0, 4) == 0:
            mix = rng.integers(0, 2, size=n).astype(bool)
            word = np.where(mix, u, v).astype(np.int8)
        word = _corrupt(rng, word, int(rng.integers(0, n // K + 3)))
        at = int(rng.integers(0, length - n + 1))
        line[at:at + n] = word
    return line


def check_sullivan_bound(data: MarkerData, samples: int = 100_000, seed: int = 0, bound: int | None = None) -> dict:
    """Largest ``|psi_k(x, y)|`` over sampled pairs differing at one site.

    Lines of length ``4n`` over the zero background are seeded with noisy
    marker copies; every site of each line is flipped in turn.  The bound
    to compare against defaults to ``68 K``.
    """
    n, K = data.n, data.params.K
    u, v = _bits(data.u, n), _bits(data.v, n)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1,))))
    length = 4 * n
    done, worst, witness = 0, 0, None
    t = np.arange(n)
    while done < samples:
        z = _structured_line(rng, data, length)
        hu, hv = _window_hams(z, u), _window_hams(z, v)
        phi_x = np.maximum(0, n - K * hu) - np.maximum(0, n - K * hv)
        sites = np.arange(length)
        # window starting at s - t covers site s at offset t; its index is s - t + n - 1
        widx = sites[:, None] - t[None, :] + n - 1
        zs = z[sites][:, None]
        du = 1 - 2 * (zs != u[None, :])
        dv = 1 - 2 * (zs != v[None, :])
        phi_y = np.maximum(0, n - K * (hu[widx] + du)) - np.maximum(0, n - K * (hv[widx] + dv))
        psi = (phi_y - phi_x[widx]).sum(axis=1)
        take = min(length, samples - done)
        psi = psi[:take]
        j = int(np.argmax(np.abs(psi)))
        if abs(int(psi[j])) > worst:
            worst = abs(int(psi[j]))
            witness = {"site": j, "line": "".join(map(str, z.tolist())), "psi": int(psi[j])}
        done += take
    bound = 68 * K if bound is None else bound
    return {"samples": done, "max_abs_psi": worst, "bound": bound, "ok": worst <= bound, "witness": witness}


def check_safe_interval(data: MarkerData, samples: int = 10_000, seed: int = 0) -> dict:
    """For sampled ``z`` with ``Phi(z) != 0``, confirm ``Phi(sigma^j z) = 0`` for ``0 < |j| <= n/8``."""
    n, K = data.n, data.params.K
    u, v = _bits(data.u, n), _bits(data.v, n)
    m = n // 8
    radius = math.ceil(n / K) - 1
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2,))))
    violations, checked, witness = 0, 0, None
    for _ in range(samples):
        word = u if rng.integers(0, 2) == 0 else v
        core = _corrupt(rng, word, int(rng.integers(0, radius + 1)))
        z = np.concatenate([rng.integers(0, 2, size=m), core, rng.integers(0, 2, size=m)]).astype(np.int8)
        # windows starting at -m..m relative to the core start
        hu = _window_hams(z, u)[n - 1: n - 1 + 2 * m + 1]
        hv = _window_hams(z, v)[n - 1: n - 1 + 2 * m + 1]
        phi = np.maximum(0, n - K * hu) - np.maximum(0, n - K * hv)
        if phi[m] == 0:
            raise AssertionError("sampled z has Phi(z) = 0")  # pragma: no cover - excluded by construction
        checked += 1
        bad = np.flatnonzero(phi != 0)
        bad = bad[bad != m]
        if bad.size:
            violations += 1
            if witness is None:
                witness = {"shift": int(bad[0] - m), "z": "".join(map(str, z.tolist()))}
    return {"samples": checked, "max_shift": m, "violations": violations, "ok": violations == 0, "witness": witness}


def check_ci1(data: MarkerData, words: int = 1_000_000, seed: int = 0, chunk: int = 50_000) -> dict:
    """Confirm the two clamped terms of ``Phi`` are never positive together.

    Tested words mix uniform draws, noisy copies of ``u`` and ``v`` and
    crossovers between them.  The exact argument is also reported: both
    terms positive would force ``Ham(u, v) < 2n/K``.
    """
    n, K = data.n, data.params.K
    U = np.packbits(_bits(data.u, n), bitorder="little")
    V = np.packbits(_bits(data.v, n), bitorder="little")
    tail = np.packbits(np.ones(n, np.int8), bitorder="little")
    popcount = np.array([bin(b).count("1") for b in range(256)], dtype=np.int32)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(3,))))
    rmax = 2 * n // K + 1
    both, done = 0, 0
    witness = None
    while done < words:
        c = min(chunk, words - done)
        kind = rng.integers(0, 3, size=c)
        W = rng.integers(0, 256, size=(c, U.size), dtype=np.uint8) & tail
        flips = np.zeros((c, n), dtype=np.uint8)
        count = rng.integers(0, rmax + 1, size=c)
        pos = rng.integers(0, n, size=(c, rmax))
        rows = np.repeat(np.arange(c), rmax)
        keep = (np.arange(rmax)[None, :] < count[:, None]).ravel()
        flips[rows[keep], pos.ravel()[keep]] = 1
        base = np.where(rng.integers(0, 2, size=c)[:, None] == 0, U[None, :], V[None, :])
        near = base ^ np.packbits(flips, axis=1, bitorder="little")
        M = rng.integers(0, 256, size=(c, U.size), dtype=np.uint8)
        mix = (U[None, :] & M) | (V[None, :] & ~M)
        W = np.where((kind == 1)[:, None], near, W)
        W = np.where((kind == 2)[:, None], mix, W)
        pu = n - K * popcount[W ^ U[None, :]].sum(axis=1)
        pv = n - K * popcount[W ^ V[None, :]].sum(axis=1)
        hits = np.flatnonzero((pu > 0) & (pv > 0))
        if hits.size and witness is None:
            bits = np.unpackbits(W[hits[0]], bitorder="little")[:n]
            witness = "".join(map(str, bits.tolist()))
        both += hits.size
        done += c
    proof = ham(data.u, data.v) * K >= 2 * n
    return {"words": done, "both_positive": both, "ok": both == 0, "exact_argument": proof, "witness": witness}


def nonsurjectivity_report(
    ks: list[int],
    ns: list[int],
    epsilon: Fraction | str = Fraction(1, 5),
    delta: Fraction | str = Fraction(1, 2),
    seed: int = 0,
    attempts: int = 10_000,
    workers: int = 1,
    interval_factor: int = 3,
    shape_size: int = 3,
    diameter_factor: int = 2,
    sullivan_samples: int = 20_000,
) -> dict:
    """Per ``k``: certified markers, ``psi_k`` on the marker pair, dual-norm proxies and bounds."""
    from .norms import dual_ns_norm

    if len(ns) == 1:
        ns = ns * len(ks)
    if len(ns) != len(ks):
        raise InputError("give one n or one n per k")
    rows = []
    for k, n in zip(ks, ns):
        params = MarkerParams(k=k, n=n, epsilon=as_fraction(epsilon), delta=as_fraction(delta), seed=seed, attempts=attempts)
        data = search_markers(params, workers)
        pair = marker_pair(data)
        psi = psi_k(data, pair)
        dual = dual_ns_norm(pair, interval_factor * n, min(shape_size, 3), diameter_factor * n, q=2)
        sull = check_sullivan_bound(data, sullivan_samples, seed)
        rows.append({
            "k": k, "n": n, "epsilon": str(params.epsilon), "attempt": data.attempt,
            "u": int_to_word(data.u, n), "v": int_to_word(data.v, n),
            "psi_on_marker_pair": psi, "linear_growth_ok": psi == -2 * n,
            "dual_norm_proxy": dual.value, "dual_norm_over_n": dual.value / n,
            "dual_norm_bound": Fraction(6 * n, k).__float__(), "dual_norm_ok": dual.value <= 6 * n / k,
            "dual_norm_witness": dual.witness,
            "sullivan_sampled_max": sull["max_abs_psi"], "sullivan_bound": sull["bound"],
            "sullivan_ok": sull["ok"],
        })
    return {"rows": rows, "epsilon": str(as_fraction(epsilon)), "delta": str(as_fraction(delta)), "seed": seed}
