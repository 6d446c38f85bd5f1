import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gibbsform.geometry import PhaseSpace, State, TangentVector, gibbs_form, make_standard_model, universal_energy
from gibbsform.lattice import (
    IndexSet,
    NonEdgeDifferenceWarning,
    SplittingProjector,
    all_subsets,
    associated_variables,
    complement_pair,
    differential_expansion,
    enumerate_lattice,
    format_terms,
    gibbs_form_via_potential,
    gibbs_relations,
    maxwell_identities,
    potential_difference,
    potential_name,
    potential_value,
    potential_values,
    resolve_potential,
    splitting_potential,
)

SPACE = make_standard_model()
S0 = State([2, 3, 5], [7, 11, 13])
dyadic = st.integers(-(2**12), 2**12).map(lambda k: k / 8)
dyadic_state = st.tuples(st.lists(dyadic, min_size=3, max_size=3), st.lists(dyadic, min_size=3, max_size=3)).map(
    lambda xp: State(*xp)
)
subset3 = st.sets(st.integers(1, 3)).map(IndexSet)


def test_index_set_basics():
    J = IndexSet({3, 1})
    assert J.sorted() == (1, 3)
    assert str(J) == "{1,3}"
    assert J.mask == 0b101
    assert IndexSet.from_mask(0b101) == J
    assert J.complement(3) == IndexSet({2})
    assert IndexSet({1}) < J and not J < J and J <= J
    with pytest.raises(IndexError):
        IndexSet({4}).check(3)
    with pytest.raises(ValueError):
        IndexSet({0})


def test_standard_names():
    expected = {(1, 2, 3): "U", (2, 3): "F", (1, 2): "I", (1, 3): "H", (2,): "Ω", (3,): "G", (1,): "Γ", (): "0"}
    for members, name in expected.items():
        assert potential_name(SPACE, IndexSet(members)) == name
        assert resolve_potential(SPACE, name) == IndexSet(members)
    assert resolve_potential(SPACE, "Omega") == IndexSet({2})


def test_potential_value_examples():
    assert potential_value(SPACE, IndexSet(), S0) == 0
    assert potential_value(SPACE, IndexSet({2, 3}), S0) == 98
    assert potential_value(SPACE, IndexSet({1, 2, 3}), S0) == 112 == universal_energy(SPACE, S0)
    with pytest.raises(IndexError):
        potential_value(SPACE, IndexSet({4}), S0)


def test_complement_pair_examples():
    assert tuple(complement_pair(SPACE, {2, 3}, S0)) == (98, 14)
    assert tuple(complement_pair(SPACE, set(), S0)) == (0, 112)
    gamma, f = complement_pair(SPACE, {1}, S0)
    assert gamma + f == universal_energy(SPACE, S0)


def test_potential_difference_examples():
    assert potential_difference(SPACE, {2, 3}, {2}, S0) == 65
    assert potential_difference(SPACE, {1, 3}, {1, 3}, S0) == 0
    assert potential_difference(SPACE, {1, 2, 3}, {1, 2}, S0) == 65
    with pytest.warns(NonEdgeDifferenceWarning):
        assert potential_difference(SPACE, {1}, {2}, S0) == 14 - 33


def test_associated_variables_examples():
    assert associated_variables(SPACE, {2, 3}) == ("T", "V", "N")
    assert associated_variables(SPACE, {1, 2, 3}) == ("S", "V", "N")
    assert associated_variables(SPACE, set()) == ("T", "P̄", "μ")


def test_differential_expansion_rows():
    assert format_terms(differential_expansion(SPACE, {2, 3})) == "−S dT + P̄ dV + μ dN"
    assert format_terms(differential_expansion(SPACE, {1, 2, 3})) == "T dS + P̄ dV + μ dN"
    assert format_terms(differential_expansion(SPACE, set())) == "−S dT − V dP̄ − N dμ"


def test_gibbs_form_via_potential_examples():
    s = State([2, 0, 0], [7, 0, 0])
    v = TangentVector([1, 0, 0], [1, 0, 0])
    assert gibbs_form_via_potential(SPACE, {1}, s, v) == 7 == gibbs_form(SPACE, s, v)
    w = TangentVector([1, -2, 3], [4, 5, -6])
    assert gibbs_form_via_potential(SPACE, set(), S0, w) == gibbs_form(SPACE, S0, w)


def test_splitting_potential_examples():
    assert splitting_potential(SPACE, SplittingProjector(np.eye(3)), S0) == 112
    assert splitting_potential(SPACE, SplittingProjector(np.zeros((3, 3))), S0) == 0
    assert splitting_potential(SPACE, SplittingProjector(np.diag([1.0, 0, 0])), S0) == 14
    with pytest.raises(ValueError):
        SplittingProjector(np.array([[2.0, 0, 0], [0, 0, 0], [0, 0, 0]]))


def test_oblique_projector_is_accepted():
    # projector onto span(e1) along span(e1 - e2, e3): idempotent but not symmetric
    P = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    A = SplittingProjector(P)
    assert splitting_potential(SPACE, A, S0) == 7 * (2 + 3)


@pytest.mark.parametrize("n,nodes,edges", [(1, 2, 1), (3, 8, 12), (4, 16, 32)])
def test_lattice_sizes(n, nodes, edges):
    space = make_standard_model() if n == 3 else PhaseSpace(tuple((f"x{i}", f"p{i}") for i in range(n)))
    lat = enumerate_lattice(space)
    assert len(lat.nodes) == nodes
    assert len(lat.edges) == edges
    for lo, hi in lat.edges:
        assert lo & hi == lo and bin(hi ^ lo).count("1") == 1


def test_lattice_size_guard():
    big = PhaseSpace(tuple((f"x{i}", f"p{i}") for i in range(21)))
    with pytest.raises(ValueError):
        enumerate_lattice(big)


def test_hasse_reachability_is_inclusion():
    lat = enumerate_lattice(SPACE)
    up = {m: set() for m in range(8)}
    for lo, hi in lat.edges:
        up[lo].add(hi)

    def reach(m):
        seen, todo = {m}, [m]
        while todo:
            for nxt in up[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    for a, b in itertools.product(range(8), repeat=2):
        assert (b in reach(a)) == (a & b == a)


def test_generic_names_for_other_n():
    space = PhaseSpace((("T", "S"), ("Y", "X")))
    assert [potential_name(space, J) for J in all_subsets(2)] == ["f_{1,2}", "f_{1}", "f_{2}", "0"]
    assert resolve_potential(space, "f_{2}") == IndexSet({2})


@given(dyadic_state, subset3)
def test_cube_rule_partition_exact(s, J):
    fJ, fJc = complement_pair(SPACE, J, s)
    assert fJ + fJc == universal_energy(SPACE, s)


@given(dyadic_state, subset3)
def test_cube_rule_face_diagonal_exact(s, J):
    outside = [k for k in (1, 2, 3) if k not in J]
    for k, l in itertools.combinations(outside, 2):
        lhs = potential_value(SPACE, J.members | {k}, s) + potential_value(SPACE, J.members | {l}, s)
        rhs = potential_value(SPACE, J, s) + potential_value(SPACE, J.members | {k, l}, s)
        assert lhs == rhs


@given(dyadic_state)
def test_values_match_rational_oracle(s):
    xs = [Fraction(v) for v in s.x]
    ps = [Fraction(v) for v in s.p]
    for J in all_subsets(3):
        assert Fraction(potential_value(SPACE, J, s)) == sum((ps[k - 1] * xs[k - 1] for k in J), Fraction(0))


@given(dyadic_state, subset3)
def test_splitting_specializes_to_potential(s, J):
    diag = np.diag([1.0 if k in J else 0.0 for k in (1, 2, 3)])
    assert splitting_potential(SPACE, SplittingProjector(diag), s) == potential_value(SPACE, J, s)


def test_batched_values_match_scalar(rng):
    states = rng.normal(size=(50, 6))
    vals = potential_values(SPACE, states)
    for r in range(50):
        s = State.from_vector(states[r])
        for m in range(8):
            assert vals[r, m] == pytest.approx(potential_value(SPACE, IndexSet.from_mask(m), s), rel=1e-14, abs=1e-14)


def test_gibbs_relations_shape():
    rows = gibbs_relations(SPACE)
    assert [v for v, _ in rows] == ["T", "P̄", "μ", "S", "V", "N"]
    assert [len(r) for _, r in rows] == [4, 4, 4, 3, 3, 3]
    assert sum(len(r) for _, r in rows) == 21


@pytest.mark.parametrize("n,count", [(1, 0), (2, 4), (3, 12), (4, 24)])
def test_maxwell_identity_count(n, count):
    space = make_standard_model() if n == 3 else PhaseSpace(tuple((f"x{i}", f"p{i}") for i in range(n)))
    assert len(maxwell_identities(space)) == count
