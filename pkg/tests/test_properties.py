import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from property_suites import SUITES

from gibbslab.cocycles import Interaction, from_interaction
from gibbslab.lattice import Configuration, Shape
from gibbslab.norms import norm_ns, norm_sullivan, norm_vs
from gibbslab.zoo import full_shift, hardcore

WORDS = st.lists(st.integers(0, 1), min_size=6, max_size=6)
TABLES = st.dictionaries(st.tuples(st.integers(0, 1), st.integers(0, 1)), st.floats(-5, 5), min_size=1)


def line(values, offset=-3):
    return Configuration.constant(0, 1, {(offset + i,): v for i, v in enumerate(values)})


@pytest.mark.parametrize("name", sorted(SUITES))
def test_seeded_suite(name):
    tally = SUITES[name](200, seed=100)
    assert tally.ok, (tally.summary(), tally.examples)


@settings(max_examples=300)
@given(WORDS, WORDS, WORDS, TABLES, st.floats(-5, 5))
def test_cocycle_equation_on_full_shift(a, b, c, pair_table, h):
    phi = Interaction({Shape.of([(0,)]): {(1,): h}, Shape.interval(0, 1): pair_table})
    psi = from_interaction(phi)
    x, y, z = line(a), line(b), line(c)
    assert psi(x, y) + psi(y, z) == pytest.approx(psi(x, z), abs=1e-9)


@settings(max_examples=300)
@given(WORDS, WORDS, TABLES, st.integers(-50, 50))
def test_shift_invariance_on_full_shift(a, b, table, k):
    psi = from_interaction(Interaction({Shape.of([(0,), (2,)]): table}))
    x, y = line(a), line(b)
    assert psi(x.shift((k,)), y.shift((k,))) == pytest.approx(psi(x, y), abs=1e-9)


@settings(max_examples=300)
@given(TABLES, st.floats(-5, 5))
def test_norm_bounds_on_hardcore(table, h):
    sft = hardcore(1)
    phi = Interaction({Shape.of([(0,)]): {(1,): h}, Shape.interval(0, 1): table})
    sull = norm_sullivan(from_interaction(phi), sft).value
    assert sull <= 2 * norm_ns(phi, sft).value + 1e-9
    assert sull <= norm_vs(phi, sft).value + 1e-9


@settings(max_examples=300)
@given(WORDS, WORDS, TABLES)
def test_linear_growth_on_full_shift(a, b, table):
    sft = full_shift(2)
    psi = from_interaction(Interaction({Shape.interval(0, 1): table}))
    x, y = line(a), line(b)
    bound = 2 * len(x.disagreement(y)) * norm_sullivan(psi, sft).value
    assert abs(psi(x, y)) <= bound + 1e-9
