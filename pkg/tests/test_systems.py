import math

import numpy as np
import pytest
import sympy as sp

from gibbsform import calculus as calc
from gibbsform.calculus import DomainError, RootError, ScalarField
from gibbsform.geometry import make_standard_model, universal_energy
from gibbsform.lattice import IndexSet, all_subsets, associated_variables, potential_name
from gibbsform.systems import (
    DefiningFunction,
    EosConstraint,
    berthelot_fundamental,
    build_embedding,
    catalog_fundamental,
    eos_residual,
    euler_gap,
    gibbs_duhem_residual,
    gibbs_relation,
    ideal_gas_energy_fundamental,
    ideal_gas_fundamental,
    maxwell_residual,
    onnes_fundamental,
    solve_eos,
    vdw_fundamental,
)

SPACE = make_standard_model()
E = math.e


def field3(fn):
    return ScalarField(3, fn)


def random_points(rng, k, lo=0.1, hi=10.0):
    return rng.uniform(lo, hi, size=(k, 3))


# symbolic oracle for the ideal gas and van der Waals coordinates
T_, V_, N_, R_, a_, b_ = sp.symbols("T V N R a b", positive=True)
F_VDW = -N_ * R_ * T_ * (sp.log((V_ - N_ * b_) / N_) + sp.Rational(3, 2) * sp.log(T_)) - a_ * N_**2 / V_


def oracle(expr, **vals):
    subs = {sp.Symbol(k, positive=True): v for k, v in vals.items()}
    return float(expr.subs(subs))


def test_ideal_gas_example_point():
    emb = build_embedding(SPACE, ideal_gas_fundamental(R=1.0))
    s = emb.point([1.0, E, 1.0])
    assert emb.parameters == ("T", "V", "N")
    assert s.p[0] == pytest.approx(2.5, rel=1e-15)
    assert s.x[1] == pytest.approx(-1 / E, rel=1e-15)
    assert s.x[2] == pytest.approx(0.0, abs=1e-15)
    assert emb.value("P", [1.0, E, 1.0]) == pytest.approx(1 / E, rel=1e-15)
    assert emb.evaluate([1.0, E, 1.0]).g == pytest.approx(-1.0, rel=1e-15)
    assert universal_energy(SPACE, s) == pytest.approx(1.5, rel=1e-14)


def test_ideal_gas_against_sympy(rng):
    emb = build_embedding(SPACE, ideal_gas_fundamental(R=1.3, c=0.2))
    F = -N_ * R_ * T_ * (sp.log(V_ / N_) + sp.Rational(3, 2) * sp.log(T_) + sp.Rational(1, 5))
    for q in random_points(rng, 5):
        vals = dict(T=q[0], V=q[1], N=q[2], R=1.3)
        s = emb.point(q)
        assert s.p[0] == pytest.approx(oracle(-sp.diff(F, T_), **vals), rel=1e-12)
        assert s.x[1] == pytest.approx(oracle(sp.diff(F, V_), **vals), rel=1e-12)
        assert s.x[2] == pytest.approx(oracle(sp.diff(F, N_), **vals), rel=1e-12, abs=1e-12)


def test_energy_representation_toy():
    df = DefiningFunction(IndexSet({1, 2, 3}), field3(lambda q: q[0] * q[0]))
    s = build_embedding(SPACE, df).point([1.5, 2.0, 3.0])
    assert s.x.tolist() == [3.0, 0.0, 0.0]


def test_ideal_gas_law_holds_on_embedding(rng):
    emb = build_embedding(SPACE, ideal_gas_fundamental())
    law = EosConstraint("ideal_gas")
    for q in random_points(rng, 20):
        assert abs(eos_residual(law, emb.point(q))) <= 1e-10


def test_gibbs_duhem_residual_examples():
    emb = build_embedding(SPACE, ideal_gas_fundamental())
    assert np.max(np.abs(gibbs_duhem_residual(emb, [2.0, 3.0, 0.5]))) <= 1e-9
    toy = build_embedding(SPACE, DefiningFunction(IndexSet({2}), field3(lambda q: q[1] ** 2)))
    r = gibbs_duhem_residual(toy, [1.0, 3.0, 0.7])
    assert r.tolist() == [0.0, 6.0, 0.0]
    zero = build_embedding(SPACE, DefiningFunction(IndexSet({1, 2, 3}), field3(lambda q: 0.0)))
    assert gibbs_duhem_residual(zero, [1.0, 2.0, 3.0]).tolist() == [0.0, 0.0, 0.0]


def test_maxwell_examples():
    emb = build_embedding(SPACE, ideal_gas_fundamental(R=2.0))
    q = [1.7, 2.3, 0.9]
    dS_dV = emb.partial("S", "V", q)
    dP_dT = emb.partial("P", "T", q)
    assert dS_dV == pytest.approx(0.9 * 2.0 / 2.3, rel=1e-12)
    assert dP_dT == pytest.approx(0.9 * 2.0 / 2.3, rel=1e-12)
    assert abs(maxwell_residual(emb, q, "T", "V")) <= 1e-8
    with pytest.raises(ValueError):
        maxwell_residual(emb, q, 0, 0)
    vdw = build_embedding(SPACE, vdw_fundamental(R=1.0, a=0.7, b=0.05))
    want = oracle(sp.diff(-sp.diff(F_VDW, T_), V_), T=1.7, V=2.3, N=0.9, R=1.0, a=0.7, b=0.05)
    assert want == pytest.approx(0.9 / (2.3 - 0.9 * 0.05), rel=1e-14)
    assert vdw.partial("S", "V", q) == pytest.approx(want, rel=1e-12)
    assert vdw.partial("P", "T", q) == pytest.approx(want, rel=1e-12)


def test_gibbs_relation_formulas():
    F = build_embedding(SPACE, ideal_gas_fundamental())
    rel = gibbs_relation(F, "S")
    assert rel.formula == "S = −∂F/∂T |_{V,N}"
    q = [1.0, E, 1.0]
    assert rel(q) == pytest.approx(2.5)
    U = build_embedding(SPACE, ideal_gas_energy_fundamental())
    assert gibbs_relation(U, "T").formula == "T = ∂U/∂S |_{V,N}"
    omega = build_embedding(SPACE, DefiningFunction(IndexSet({2}), field3(lambda q: -q[1] * q[0] * calc.exp(q[2]))))
    assert gibbs_relation(omega, "N").formula == "N = −∂Ω/∂μ |_{T,V}"
    with pytest.raises(ValueError):
        gibbs_relation(F, "T")


def test_empty_index_set_rejected():
    with pytest.raises(ValueError):
        DefiningFunction(IndexSet(), field3(lambda q: 0.0))


def homogeneous_toy(J: IndexSet, rng) -> DefiningFunction:
    """Degree-one homogeneous in the extensive arguments, arbitrary in the intensive ones."""
    ext = [k - 1 for k in J.sorted()]
    w = rng.uniform(0.5, 2.0, size=3)
    c = rng.uniform(-1.0, 1.0, size=3)

    def g(q):
        scale = 1.0
        for k in ext:
            scale = scale * q[k] ** (1.0 / len(ext))
        shape = 1.0
        for i in range(3):
            if i not in ext:
                shape = shape + c[i] * q[i] * q[i]
        lin = 0.0
        for k in ext:
            lin = lin + w[k] * q[k]
        return scale * shape + lin * (1.0 + sum(c[i] * q[i] for i in range(3) if i not in ext))

    return DefiningFunction(J, ScalarField(3, g))


def test_homogeneous_toys_satisfy_all_identities(rng):
    for J in all_subsets(3)[:-1]:
        emb = build_embedding(SPACE, homogeneous_toy(J, rng))
        for q in random_points(rng, 10, 0.5, 2.0):
            assert np.max(np.abs(gibbs_duhem_residual(emb, q))) <= 1e-9
            assert abs(euler_gap(emb, q)) <= 1e-9
            for i, j in [(0, 1), (0, 2), (1, 2)]:
                assert abs(maxwell_residual(emb, q, i, j)) <= 1e-8
            # every non-parameter coordinate agrees with its Gibbs relation
            s = emb.point(q)
            for name in SPACE.variables:
                if name in emb.parameters:
                    continue
                assert gibbs_relation(emb, name)(q) == pytest.approx(SPACE.value_of(s, name), rel=1e-12, abs=1e-12)


def test_cross_potential_consistency(rng):
    Fe = build_embedding(SPACE, ideal_gas_fundamental(R=1.0, c=0.3))
    Ue = build_embedding(SPACE, ideal_gas_energy_fundamental(R=1.0, c=0.3))
    for q in random_points(rng, 10):
        sF = Fe.point(q)
        sU = Ue.point([sF.p[0], q[1], q[2]])
        assert sU.x[0] == pytest.approx(q[0], rel=1e-10)
        assert sU.x[1] == pytest.approx(sF.x[1], rel=1e-8, abs=1e-8)
        assert sU.x[2] == pytest.approx(sF.x[2], rel=1e-8, abs=1e-8)


@pytest.mark.parametrize(
    "factory,kw",
    [
        (ideal_gas_fundamental, {}),
        (vdw_fundamental, {"a": 0.5, "b": 0.01}),
        (berthelot_fundamental, {"a": 0.5, "b": 0.01}),
        (onnes_fundamental, {"B": lambda T: 0.1 - 1 / T, "C": lambda T: 0.01}),
    ],
)
def test_catalog_extensivity(factory, kw, rng):
    g = factory(**kw).g
    for T, V, N in random_points(rng, 10, 1.0, 5.0):
        for lam in (2.0, 3.0):
            assert g([T, lam * V, lam * N]) == pytest.approx(lam * g([T, V, N]), rel=1e-12)


def test_vdw_degenerates_to_ideal(rng):
    a = ideal_gas_fundamental(c=0.1).g
    b = vdw_fundamental(a=0.0, b=0.0, c=0.1).g
    for q in random_points(rng, 10):
        assert b(list(q)) == a(list(q))


def test_vdw_fundamental_matches_literal_law_at_unit_amount(rng):
    emb = build_embedding(SPACE, vdw_fundamental(R=1.0, a=0.8, b=0.05))
    law = EosConstraint("van_der_waals", R=1.0, a=0.8, b=0.05)
    for T, V in rng.uniform(0.5, 5.0, size=(20, 2)):
        assert abs(eos_residual(law, emb.point([T, V, 1.0]))) <= 1e-8
    with pytest.raises(DomainError):
        emb.point([1.0, 0.04, 1.0])


def test_onnes_fundamental_matches_literal_law_at_unit_amount(rng):
    B = lambda T: 0.2 - 1 / T  # noqa: E731
    C = lambda T: 0.05 * T  # noqa: E731
    emb = build_embedding(SPACE, onnes_fundamental(a=1.0, B=B, C=C))
    law = EosConstraint("onnes", B=B, C=C)
    for T, V in rng.uniform(0.5, 5.0, size=(20, 2)):
        assert abs(eos_residual(law, emb.point([T, V, 1.0]))) <= 1e-8


def test_eos_residual_examples(rng):
    ideal = EosConstraint("ideal_gas")
    s = SPACE.state_from({"P": 2, "V": 0.5, "T": 1, "N": 1})
    assert eos_residual(ideal, s) == 0
    for _ in range(10):
        P, V, T, N = rng.uniform(0.1, 5, size=4)
        st_ = SPACE.state_from({"P": P, "V": V, "T": T, "N": N})
        r = eos_residual(ideal, st_)
        assert eos_residual(EosConstraint("van_der_waals"), st_) == pytest.approx(r, rel=1e-13, abs=1e-13)
        assert eos_residual(EosConstraint("onnes"), st_) == pytest.approx(r, rel=1e-13, abs=1e-13)
    with pytest.raises(DomainError):
        eos_residual(EosConstraint("van_der_waals", b=1.0), s)
    with pytest.raises(DomainError):
        eos_residual(EosConstraint("dieterici"), SPACE.state_from({"P": 1, "V": 1, "T": -1, "N": 1}))
    with pytest.raises(KeyError):
        EosConstraint("redlich_kwong")


def test_solve_eos_examples():
    ideal = EosConstraint("ideal_gas")
    assert solve_eos(ideal, {"P": 2, "T": 1, "N": 1}, "V", (0.1, 10)) == pytest.approx(0.5, rel=1e-14)
    assert solve_eos(ideal, {"P̄": -2, "T": 1, "N": 1}, "V", (0.1, 10)) == pytest.approx(0.5, rel=1e-14)
    assert solve_eos(ideal, {"V": 0.5, "T": 1, "N": 1}, "P̄", (-10, -0.1)) == pytest.approx(-2.0, rel=1e-14)
    d = EosConstraint("dieterici", a=0.0, b=0.0, R=1.5)
    assert solve_eos(d, {"P": 3, "T": 2, "N": 0.5}, "V", (0.1, 10)) == pytest.approx(1.5 * 2 * 0.5 / 3, rel=1e-13)
    with pytest.raises(RootError):
        solve_eos(ideal, {"P": 2, "T": 1, "N": 1}, "V", (1, 10))
    with pytest.raises(ValueError):
        solve_eos(ideal, {"P": 2, "T": 1}, "V", (0.1, 10))


def test_vdw_three_roots_below_critical_temperature():
    a, b, R, T = 1.0, 0.1, 1.0, 2.7  # critical temperature 8a/(27Rb) ≈ 2.96
    vdw = EosConstraint("van_der_waals", R=R, a=a, b=b)
    p = 2.6
    roots = np.roots([p, -(p * b + R * T), a, -a * b])
    roots = np.sort(roots.real[np.abs(roots.imag) < 1e-12])
    assert len(roots) == 3 and roots[0] > b
    edges = [b * 1.0001, *(0.5 * (roots[k] + roots[k + 1]) for k in range(2)), 10.0]
    for k, root in enumerate(roots):
        v = solve_eos(vdw, {"P": p, "T": T, "N": 1}, "V", (edges[k], edges[k + 1]))
        assert v == pytest.approx(root, rel=1e-9)
        assert abs(vdw.law(p, v, T, 1.0)) <= 1e-10


def test_catalog_lookup():
    assert catalog_fundamental("van_der_waals", a=0.1, b=0.01, B="ignored").label == "van_der_waals"
    with pytest.raises(KeyError):
        catalog_fundamental("dieterici")
    with pytest.raises(KeyError):
        catalog_fundamental("nonesuch")


def test_domain_errors_are_reported():
    emb = build_embedding(SPACE, ideal_gas_fundamental())
    with pytest.raises(DomainError):
        emb.point([-1.0, 1.0, 1.0])


def test_embedding_dimension_is_half():
    for J in all_subsets(3)[:-1]:
        emb = build_embedding(SPACE, DefiningFunction(J, field3(lambda q: q[0] + q[1] + q[2])))
        assert emb.dimension == 3
        assert emb.potential == potential_name(SPACE, J)
        assert emb.parameters == associated_variables(SPACE, J)
