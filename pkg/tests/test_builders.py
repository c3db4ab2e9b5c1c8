import dataclasses
import itertools

import numpy as np
import pytest
from conftest import nn_interaction, random_config

from gibbslab.builders import (
    FillContext,
    WindowedSpace,
    build_fill,
    fill_locality,
    is_separated,
    kozlov_approx,
    kozlov_approx_chain,
    kozlov_chain,
    kozlov_partial,
    residual_shape,
    separated_partition,
    solve_potential,
    sullivan_interaction,
    sullivan_report,
    sullivan_sweep,
)
from gibbslab.cocycles import Cocycle, Interaction, from_interaction
from gibbslab.errors import ConsistencyError, FillFailure, InputError, PreconditionError, WindowError
from gibbslab.lattice import Configuration, Shape, is_admissible_around
from gibbslab.zoo import coloring

ORIGIN = Shape.of([(0,)])


def range_two_interaction(J: float = 0.5) -> Interaction:
    phi = nn_interaction(1.0, 0.25)
    phi.add_entry(Shape.of([(0,), (2,)]), {(1, 1): J})
    return phi


class SquaredCount(Cocycle):
    """Not additive: the square of the change in the number of 1s."""

    def __call__(self, x, y):
        d = sum(y[s] for s in y.patch) - sum(x[s] for s in x.patch)
        return float(d * d)

    def memory_set(self, region):
        return region


class TestPotential:
    def test_consistent_edges(self):
        F = solve_potential(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 2.0), ("a", "c", 3.0)])
        assert F == {"a": 0.0, "b": 1.0, "c": 3.0}

    def test_cycle_defect_raises(self):
        with pytest.raises(ConsistencyError) as info:
            solve_potential([(0,), (1,), (2,)], [((0,), (1,), 1.0), ((1,), (2,), 1.0), ((0,), (2,), 5.0)])
        w = info.value.witness
        assert abs(w["potential_gap"] - w["edge"]) == pytest.approx(3.0)

    def test_components_rooted_at_least_node(self):
        F = solve_potential([3, 1, 2, 4], [(2, 1, 7.0), (4, 3, -1.0)])
        assert F[1] == 0.0 and F[2] == -7.0 and F[3] == 0.0 and F[4] == 1.0


class TestPartition:
    @pytest.mark.parametrize("m", [3, 10, 25])
    def test_one_dimensional(self, m):
        region = Shape.interval(0, m - 1)
        K = Shape.interval(-1, 1)
        classes = separated_partition(region, K)
        assert len(classes) <= len(K) ** 2
        assert sorted(itertools.chain.from_iterable(classes)) == list(region)
        for cls in classes:
            assert is_separated(cls, K)
            gaps = np.diff([s[0] for s in cls])
            assert (gaps >= 3).all()

    def test_trivial_k(self):
        region = Shape.interval(0, 9)
        assert separated_partition(region, ORIGIN) == [region]

    def test_two_dimensional_annulus(self):
        region = Shape.ball(4, 2) - Shape.ball(2, 2)
        K = Shape.ball(1, 2)
        classes = separated_partition(region, K)
        assert len(classes) <= 81
        assert sum(len(c) for c in classes) == len(region)
        for cls in classes:
            for s, t in itertools.combinations(cls, 2):
                assert Shape(tuple(K.translate(s))).isdisjoint(K.translate(t))


class TestWindowedSpace:
    def test_counts(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-8, 8))
        assert len(ws) == 4181

    def test_pairs_agree_off_region(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-3, 3))
        region = Shape.interval(-1, 1)
        pairs = ws.pairs(region)
        brute = 0
        for i, j in itertools.combinations(range(len(ws)), 2):
            d = ws.config(i).disagreement(ws.config(j))
            brute += d.issubset(region)
        assert len(pairs) == brute
        for i, j in pairs:
            assert ws.config(i).disagreement(ws.config(j)).issubset(region)

    def test_canonical_is_least_row(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-3, 3))
        shape = Shape.of([(0,)])
        i = ws.canonical(shape, (1,))
        assert ws.restriction(i, shape) == (1,)
        assert all(tuple(ws.rows[i]) <= tuple(r) for r in ws.rows if r[3] == 1)

    def test_boundary_respected(self, hc):
        bd = Configuration.constant(0, 1, {(-4,): 1})
        ws = WindowedSpace(hc, Shape.interval(-3, 3), bd)
        assert all(r[0] == 0 for r in ws.rows)


class TestKozlov:
    def test_partial_exact(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-5, 5))
        psi = from_interaction(nn_interaction())
        phi, cert = kozlov_partial(ws, psi, Shape(), Shape.interval(-1, 1))
        assert cert.max_error <= 1e-12
        assert cert.to_dict()["support"] == [[-2], [-1], [0], [1], [2]]

    def test_chain_exact_and_supports_avoid_earlier_regions(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-7, 7))
        psi = from_interaction(nn_interaction(0.3, -1.2))
        chain = [ORIGIN, Shape.interval(-1, 1), Shape.interval(-3, 3)]
        phi, certs = kozlov_chain(ws, psi, chain)
        assert all(c.max_error <= 1e-10 for c in certs)
        supports = [Shape.of(map(tuple, c.details["support"])) for c in certs[:-1]]
        assert supports[1].isdisjoint(chain[0]) and supports[2].isdisjoint(chain[1])

    def test_window_too_small(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-2, 2))
        psi = from_interaction(nn_interaction())
        with pytest.raises(WindowError):
            kozlov_partial(ws, psi, Shape(), Shape.interval(-2, 2))

    def test_precondition(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-4, 4))
        psi = from_interaction(nn_interaction())
        with pytest.raises(PreconditionError):
            kozlov_partial(ws, psi, ORIGIN, Shape.interval(-1, 1))

    def test_non_cocycle_is_inconsistent(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-4, 4))
        with pytest.raises(ConsistencyError):
            kozlov_partial(ws, SquaredCount(), Shape(), Shape.interval(-1, 1))

    def test_chain_must_increase(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-4, 4))
        psi = from_interaction(nn_interaction())
        with pytest.raises(InputError):
            kozlov_chain(ws, psi, [Shape.interval(-1, 1), ORIGIN])

    def test_approx_step(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-6, 6))
        psi = from_interaction(range_two_interaction())
        phi, cert = kozlov_approx(ws, psi, Shape(), Shape.interval(-1, 1), 0.1, 0.05)
        d = cert.to_dict()
        assert d["error_ok"] and d["mass_ok"] and cert.max_error < 0.05

    def test_approx_chain(self, hc):
        ws = WindowedSpace(hc, Shape.interval(-6, 6))
        psi = from_interaction(nn_interaction())
        phi, certs = kozlov_approx_chain(ws, psi, [ORIGIN, Shape.interval(-1, 1)], 0.1)
        assert all(c.details.get("error_ok", True) and c.details.get("mass_ok", True) for c in certs)
        assert certs[-1].max_error < certs[-1].details["final_tolerance"]


class TestFill:
    def test_fill_agrees_inside_and_outside(self, rng):
        sft = coloring(5, 2)
        ctx = FillContext(sft)
        assert ctx.fill_radius == 1 and ctx.N == 2
        for _ in range(5):
            x = random_config(sft, Shape.ball(2, 2), rng)
            z = build_fill(ctx, x, 2)
            for s in Shape.ball(2, 2):
                assert z[s] == x[s]
            for s in Shape.ball(6, 2) - Shape.ball(4, 2):
                assert z[s] == ctx.anchor[s]
            assert is_admissible_around(sft, z, Shape.ball(5, 2))

    def test_locality(self):
        report = fill_locality(FillContext(coloring(5, 1)), 4, samples=60, seed=3)
        assert report["interior_ok"] and report["samples"] > 0

    def test_failure_when_fillability_is_claimed_falsely(self):
        sft = dataclasses.replace(coloring(2, 1), ssf=True)
        ctx = FillContext(sft)
        # odd-length gap between a pinned core and the checkerboard anchor cannot be 2-colored
        x = Configuration.constant(0, 1, {(i,): (i + 1) % 2 for i in range(-1, 2)})
        with pytest.raises(FillFailure):
            build_fill(ctx, x, 1)

    def test_requires_fillable_space(self):
        with pytest.raises(InputError):
            FillContext(coloring(3, 2))


class TestSullivan:
    def test_nearest_neighbour_is_exact_on_hardcore(self, hc):
        # neighbours of a 1 are always the safe symbol, so padding loses nothing
        psi = from_interaction(nn_interaction())
        rep = sullivan_sweep(hc, psi, [1, 2, 3])
        assert max(rep["residuals"]) <= 1e-12

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_range_two_residual(self, hc, n):
        psi = from_interaction(range_two_interaction(0.5))
        phi = sullivan_interaction(hc, psi, n)
        rep = sullivan_report(hc, psi, phi, n)
        assert rep.residual.value == pytest.approx(4 * 0.5 / (2 * n + 1))
        assert rep.norm_vs.value <= 3 * rep.norm_sullivan_psi.value

    def test_residual_depends_only_on_residual_shape(self, hc, rng):
        psi = from_interaction(range_two_interaction(0.5))
        phi = sullivan_interaction(hc, psi, 3)
        res = from_interaction(phi) - psi
        G = residual_shape(psi, hc)
        from gibbslab.lattice import zeta

        for _ in range(20):
            core = random_config(hc, G, rng)
            values = set()
            for _ in range(5):
                outside = Shape.interval(-12, 12) - G.expand(1)
                x = core.with_patch({s: v for s, v in random_config(hc, outside, rng).patch.items() if s in outside})
                if not is_admissible_around(hc, x, Shape.interval(-12, 12)):
                    continue
                values.add(round(res(x, zeta(hc, x, (0,))), 12))
            assert len(values) <= 1

    def test_fill_path_without_safe_symbol(self):
        sft = coloring(3, 1)
        psi = from_interaction(Interaction({ORIGIN: {(1,): 1.0, (2,): 0.3}}))
        phi = sullivan_interaction(sft, psi, 2)
        rep = sullivan_report(sft, psi, phi, 2, samples=100)
        assert rep.mode == "sampled" and rep.residual.mode == "lower_bound"
        assert rep.norm_vs.value <= 3 * rep.norm_sullivan_psi.value
