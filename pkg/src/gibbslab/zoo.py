"""Builtin spaces, height functions on 3-colorings and rigid colorings."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .cocycles import Cocycle
from .errors import InputError, LiftError
from .lattice import (
    AsymptoticPair,
    Configuration,
    Pattern,
    Shape,
    Site,
    SftSpace,
    add,
    is_admissible_around,
    single_site_moves,
)


def _unit(axis: int, d: int) -> Site:
    return tuple(1 if i == axis else 0 for i in range(d))


def _pair_forbidden(d: int, pairs: list[tuple[int, int]]) -> tuple[Pattern, ...]:
    origin = (0,) * d
    out = []
    for axis in range(d):
        shape = Shape((origin, _unit(axis, d)))
        for a, b in pairs:
            out.append(Pattern(shape, (a, b)))
    return tuple(out)


def full_shift(q: int = 2, d: int = 1) -> SftSpace:
    return SftSpace(
        tuple(str(c) for c in range(q)), d, (), ssf=True, safe_symbol=0, pivot=True, name=f"full({q},{d})"
    )


def hardcore(d: int = 1) -> SftSpace:
    """No two adjacent 1s; 0 is a safe symbol."""
    return SftSpace(
        ("0", "1"), d, _pair_forbidden(d, [(1, 1)]), ssf=True, safe_symbol=0, pivot=True, name=f"hardcore({d})"
    )


def coloring(q: int, d: int = 2) -> SftSpace:
    """Proper q-colorings of the nearest-neighbour graph of Z^d."""
    if q < 2:
        raise InputError("colorings need at least two colors")
    pivot = q >= 2 * d + 2 or (d == 2 and q in (2, 3))
    hint = Configuration.periodic((2,) * d, lambda s: sum(s) % 2)
    return SftSpace(
        tuple(str(c) for c in range(q)),
        d,
        _pair_forbidden(d, [(c, c) for c in range(q)]),
        ssf=q >= 2 * d + 1,
        pivot=pivot,
        name=f"coloring({q},{d})",
        background_hint=hint,
    )


def sunny(d: int = 1) -> SftSpace:
    """At most one 1 in the whole configuration; not of finite type."""
    return SftSpace(
        ("0", "1"), d, (), ssf=False, safe_symbol=0, pivot=True, tmp=False,
        count_limits=((1, 1),), name=f"sunny({d})",
    )


def builtin_space(name: str, **params: int) -> SftSpace:
    """Look up a builtin by name: ``full``, ``hardcore``, ``coloring`` or ``sunny``.

    The string form ``"coloring:4,2"`` passes positional parameters.
    """
    if ":" in name:
        name, _, rest = name.partition(":")
        args = [int(v) for v in rest.split(",") if v.strip()]
    else:
        args = []
    name = name.strip().lower().replace("-", "").replace("_", "")
    try:
        if name == "full":
            return full_shift(*args, **params)
        if name in ("hardcore", "goldenmean"):
            return hardcore(*args, **params)
        if name == "coloring":
            return coloring(*args, **params)
        if name in ("sunny", "sunnysideup"):
            return sunny(*args, **params)
    except TypeError as exc:
        raise InputError(f"bad parameters for builtin {name!r}: {exc}") from None
    raise InputError(f"unknown builtin space {name!r}")


# ---------------------------------------------------------------------------
# Heights on 3-colorings
# ---------------------------------------------------------------------------


def lift_heights(
    x: Configuration,
    region: Shape,
    anchor: Site | None = None,
    anchor_height: int | None = None,
) -> dict[Site, int]:
    """Integer heights ``h`` on ``region`` with ``h ≡ x (mod 3)`` and unit steps.

    Breadth-first from ``anchor`` (default: least site of the region).
    Raises :class:`LiftError` on equal neighbours or an inconsistent cycle.
    """
    if not region:
        return {}
    anchor = region.sites[0] if anchor is None else anchor
    if anchor not in region:
        raise InputError("anchor must lie in the region")
    h0 = x[anchor] if anchor_height is None else anchor_height
    if (h0 - x[anchor]) % 3:
        raise LiftError("anchor height is not congruent to the anchor color")
    d = len(anchor)
    steps = [_unit(a, d) for a in range(d)] + [tuple(-c for c in _unit(a, d)) for a in range(d)]
    heights = {anchor: h0}
    queue = deque([anchor])
    while queue:
        s = queue.popleft()
        for e in steps:
            t = add(s, e)
            if t not in region:
                continue
            diff = (x[t] - x[s]) % 3
            if diff == 0:
                raise LiftError(f"equal colors at {s} and {t}")
            h = heights[s] + (1 if diff == 1 else -1)
            old = heights.get(t)
            if old is None:
                heights[t] = h
                queue.append(t)
            elif old != h:
                raise LiftError(f"inconsistent heights around {t}")
    if len(heights) != len(region):
        raise InputError("region is not connected")
    return heights


class HeightCocycle(Cocycle):
    """``psi(x, y) = sum_n [xhat_n - yhat_n]`` for lifts agreeing off the disagreement."""

    integer_valued = True

    def __call__(self, x: Configuration, y: Configuration) -> int:
        delta = x.disagreement(y)
        if not delta:
            return 0
        lo, hi = delta.bounds()
        region = Shape(tuple(itertools.product(*(range(a - 2, b + 3) for a, b in zip(lo, hi)))))
        anchor = region.sites[0]
        hx = lift_heights(x, region, anchor)
        hy = lift_heights(y, region, anchor)
        for s in region:
            inner = all(a - 1 <= c <= b + 1 for c, a, b in zip(s, lo, hi))
            if not inner and hx[s] != hy[s]:
                raise LiftError("lifts do not agree away from the disagreement")
        return sum(hx[s] - hy[s] for s in region)


def height_cocycle(pair: AsymptoticPair) -> int:
    return HeightCocycle()(pair.left, pair.right)


def l1(s: Site) -> int:
    return sum(abs(c) for c in s)


def diamond_pair(i: int) -> AsymptoticPair:
    """Two 3-colorings whose lifts are opposite pyramids over the l1 ball of radius ``i``.

    Outside the ball both lifts equal ``(i - |n|_1) mod 2``; inside they are
    ``i - |n|_1`` and ``|n|_1 - i``.  Colors are heights mod 3.
    """
    if i < 0:
        raise InputError("radius must be nonnegative")
    bg = Configuration.periodic((2, 2), lambda s: (i + s[0] + s[1]) % 2)
    left, right = {}, {}
    for s in itertools.product(range(-i, i + 1), repeat=2):
        r = l1(s)
        if r <= i:
            left[s] = (i - r) % 3
            right[s] = (r - i) % 3
    return AsymptoticPair(bg.with_patch(left), bg.with_patch(right))


def diamond_heights(i: int) -> tuple[dict[Site, int], dict[Site, int]]:
    """The explicit pyramid lifts on the ball of radius ``i + 2``."""
    xs, ys = {}, {}
    for s in itertools.product(range(-i - 2, i + 3), repeat=2):
        r = l1(s)
        xs[s] = i - r if r <= i else (i - r) % 2
        ys[s] = r - i if r <= i else (i - r) % 2
    return xs, ys


def ball_size(i: int, d: int) -> int:
    """Number of lattice points of Z^d with l1 norm at most ``i`` (brute force)."""
    return sum(1 for s in itertools.product(range(-i, i + 1), repeat=d) if l1(s) <= i)


def height_table(i_max: int) -> list[dict[str, float]]:
    """Rows ``i, psi, ball2, ratio`` for the diamond pairs ``1 <= i <= i_max``."""
    rows = []
    for i in range(1, i_max + 1):
        psi = height_cocycle(diamond_pair(i))
        b2 = ball_size(i, 2)
        rows.append({"i": i, "psi": psi, "ball2": b2, "ratio": psi / b2})
    return rows


# ---------------------------------------------------------------------------
# Rigid colorings
# ---------------------------------------------------------------------------


_RIGID_SLOPES = {4: 2, 5: 3}


@dataclass
class RigidWitness:
    q: int
    config: Configuration
    exchange: Configuration
    exchange_sites: tuple[Site, Site]
    single_site_moves: list[tuple[Site, int]]
    box: Shape

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "rule": f"x[n,m] = (n + {_RIGID_SLOPES[self.q]}m) mod {self.q}",
            "box_radius": self.box.diameter() // 2,
            "single_site_moves": len(self.single_site_moves),
            "exchange_sites": [list(s) for s in self.exchange_sites],
            "exchange_values": [self.exchange[s] for s in self.exchange_sites],
            "exchange_admissible": True,
        }


def rigid_coloring(q: int) -> Configuration:
    if q not in _RIGID_SLOPES:
        raise InputError("rigid colorings are provided for q = 4 and q = 5")
    m = _RIGID_SLOPES[q]
    return Configuration.periodic((q, q), lambda s: (s[0] + m * s[1]) % q)


def rigid_coloring_witness(q: int, radius: int = 3) -> RigidWitness:
    """A frozen q-coloring, its single-site moves on ``F_radius`` and a two-site exchange."""
    sft = coloring(q, 2)
    x = rigid_coloring(q)
    box = Shape.ball(radius, 2)
    moves = single_site_moves(sft, x, box)
    for a in sorted(box, key=lambda s: (l1(s), s)):
        b = add(a, (1, 0))
        y = x.with_patch({a: x[b], b: x[a]})
        if is_admissible_around(sft, y, Shape((a, b))):
            return RigidWitness(q, x, y, (a, b), moves, box)
    raise InputError("no admissible two-site exchange found")  # pragma: no cover
