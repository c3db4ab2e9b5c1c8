import itertools

import pytest
from conftest import nn_interaction

from gibbslab.cocycles import Interaction, from_interaction
from gibbslab.lattice import AsymptoticPair, Configuration, Shape
from gibbslab.norms import dual_ns_norm, norm_ns, norm_sullivan, norm_vs
from gibbslab.zoo import full_shift, hardcore

PAIR = Shape.interval(0, 1)


def test_ns_of_pair_word_counts_both_sites():
    # the word 11 with weight beta sits in two placements through the origin
    phi = Interaction({PAIR: {(1, 1): 1.5}})
    rep = norm_ns(phi)
    assert rep.value == pytest.approx(3.0) and rep.mode == "exact"


def test_vs_and_sullivan_of_pair_word():
    sft = full_shift(2)
    phi = Interaction({PAIR: {(1, 1): 1.5}})
    assert norm_vs(phi, sft).value == pytest.approx(3.0)
    assert norm_sullivan(from_interaction(phi), sft).value == pytest.approx(3.0)


def test_constant_table_has_zero_variation():
    sft = full_shift(2)
    phi = Interaction({PAIR: {k: 2.0 for k in itertools.product(range(2), repeat=2)}})
    assert norm_vs(phi, sft).value == 0.0
    assert norm_ns(phi).value == pytest.approx(4.0)


def test_hardcore_sullivan_value(hc):
    psi = from_interaction(nn_interaction(1.0, 0.5))
    rep = norm_sullivan(psi, hc)
    assert rep.value == pytest.approx(1.5) and rep.mode == "exact"


def test_sampled_sullivan_is_lower_bound(hc):
    psi = from_interaction(nn_interaction(1.0, -2.0))
    exact = norm_sullivan(psi, hc).value
    sampled = norm_sullivan(psi, hc, "sample", samples=50, seed=3)
    assert sampled.mode == "lower_bound" and sampled.value <= exact + 1e-12


def test_site_indexed_ns_takes_worst_site():
    phi = Interaction(
        {Shape.of([(0,), (1,)]): {(1, 1): 1.0}, Shape.of([(1,), (2,)]): {(0, 1): -2.0}, Shape.of([(5,)]): {(1,): 0.5}},
        shift_invariant=False,
    )
    rep = norm_ns(phi)
    assert rep.value == pytest.approx(3.0) and rep.witness == {"site": [1]}


def test_dual_norm_single_site_pair_is_exact():
    x = Configuration.constant(0, 1)
    y = x.with_patch({(0,): 1})
    rep = dual_ns_norm(AsymptoticPair(x, y), 4, 2, 4, q=2)
    assert rep.value == pytest.approx(2.0) and rep.mode == "exact"


def test_dual_norm_matches_direct_count():
    """Oracle: recount every word on every interval of length <= 4 directly."""
    x = Configuration.constant(0, 1, {(0,): 1, (1,): 1, (4,): 1})
    y = Configuration.constant(0, 1, {(2,): 1, (4,): 1})

    def count(z, w):
        m = len(w)
        return sum(tuple(z[(k + i,)] for i in range(m)) == w for k in range(-10, 15))

    best = 0.0
    for m in range(1, 5):
        total = sum(abs(count(y, w) - count(x, w)) for w in itertools.product(range(2), repeat=m))
        best = max(best, total / m)
    rep = dual_ns_norm(AsymptoticPair(x, y), 4, 1, 4, q=2)
    assert rep.witness["interval_max"] == pytest.approx(best)


def test_norm_report_serializes():
    rep = norm_ns(Interaction({PAIR: {(1, 1): 1.0}}))
    d = rep.to_dict()
    assert set(d) == {"value", "mode", "witness", "budget"}


def test_hardcore_vs_uses_language(hc):
    # the pattern 11 never occurs in the hard-core space, so its weight is invisible
    phi = Interaction({PAIR: {(1, 1): 100.0}})
    assert norm_vs(phi, hc).value == 0.0
    assert norm_ns(phi, hc).value == 0.0
    assert norm_ns(phi).value == pytest.approx(200.0)


def test_norms_on_hardcore_2d():
    sft = hardcore(2)
    phi = Interaction({Shape.of([(0, 0)]): {(1,): 1.0}})
    assert norm_sullivan(from_interaction(phi), sft).value == pytest.approx(1.0)
