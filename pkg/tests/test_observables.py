import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from fockcheck.fock import (
    BasisFamily,
    CutoffSpec,
    InteriorSpec,
    OperatorMatrix,
    StateVector,
    commutator,
    interior_distance,
)
from fockcheck.observables import (
    AXES,
    CYCLIC,
    MAX_MOMENT_ORDER,
    cross_moment_closed,
    dark_family,
    dark_state_suite,
    diagonality_defect,
    family_matrix_elements,
    moment_table,
    robertson_products,
    schwinger_dict,
    schwinger_J,
    spectral_scalars,
    translated_dark_suite,
)
from fockcheck.unitaries import DisplacementParams, ModeMixParams, mixed_mode_a, phi_n_closed

mixers = st.builds(ModeMixParams, st.floats(0.0, 1.3), st.floats(-math.pi, math.pi))


def test_schwinger_actions():
    cut = CutoffSpec(3, 3)
    jx, _, jz = schwinger_J(cut)
    v10 = StateVector.basis(1, 0, cut)
    assert (jz @ v10 - v10 * 0.5).norm() == 0
    assert (jx @ StateVector.basis(0, 1, cut) - v10 * 0.5).norm() == 0


def test_schwinger_algebra():
    cut = CutoffSpec(6, 6)
    J = schwinger_dict(cut)
    for a, b, c in CYCLIC:
        assert interior_distance(commutator(J[a], J[b]), J[c] * 1j, InteriorSpec(2)) <= 1e-11
        assert np.max(np.abs(J[a].entries - J[a].dag.entries)) == 0


def test_spectral_examples():
    s = spectral_scalars(1, ModeMixParams.from_tau(1.0))
    assert s.j1["x"] == pytest.approx(0.5)
    assert s.j1["y"] == pytest.approx(0.0, abs=1e-16)
    assert s.j1["z"] == pytest.approx(0.0, abs=1e-16)
    for n in range(5):
        assert spectral_scalars(n, ModeMixParams(0.0, 0.4)).j1["z"] == pytest.approx(-n / 2)
    zero = spectral_scalars(0, ModeMixParams(0.3, 0.3))
    assert all(v == 0 for v in list(zero.j1.values()) + list(zero.j2.values()))


@given(st.integers(0, 10), mixers)
def test_spectral_invariants(n, p):
    s = spectral_scalars(n, p)
    assert s.sphere_defect() <= 1e-10
    if n >= 1:
        for a in AXES:
            assert s.j2[a] >= s.j1[a] ** 2 - 1e-12


@given(st.integers(1, 6), mixers)
def test_family_elements_match_closed_forms(n, p):
    cut = CutoffSpec.square(n + 2)
    fam = BasisFamily([phi_n_closed(m, p, cut) for m in range(n + 2)])
    s = spectral_scalars(n, p)
    J = schwinger_dict(cut)
    for a in AXES:
        m1 = family_matrix_elements(J[a], fam)
        m2 = family_matrix_elements(J[a] @ J[a], fam)
        assert m1[n, n] == pytest.approx(s.j1[a], abs=1e-9)
        assert m2[n, n] == pytest.approx(s.j2[a], abs=1e-9)
        assert diagonality_defect(m1) <= 1e-9 and diagonality_defect(m2) <= 1e-9
    for first in AXES:
        for second in AXES:
            if first != second:
                mat = family_matrix_elements(J[first] @ J[second], fam)
                assert mat[n, n] == pytest.approx(cross_moment_closed(s, first, second), abs=1e-9)


def test_family_elements_identity():
    cut = CutoffSpec(4, 4)
    fam = BasisFamily([phi_n_closed(m, ModeMixParams(0.4, 0.1), cut) for m in range(4)])
    mat = family_matrix_elements(OperatorMatrix.identity(cut), fam)
    assert np.max(np.abs(mat - np.eye(4))) <= 1e-14


def test_cross_moment_rejects_square():
    with pytest.raises(ValueError):
        cross_moment_closed(spectral_scalars(2, ModeMixParams(0.2, 0.1)), "x", "x")


def test_robertson_examples():
    recs = robertson_products(1, ModeMixParams.from_tau(1.0))
    xy = next(r for r in recs if r.pair == ("x", "y"))
    assert xy.product == pytest.approx(0.0, abs=1e-16) and xy.bound == pytest.approx(0.0, abs=1e-16)
    recs = robertson_products(2, ModeMixParams.from_tau(1j), CutoffSpec(4, 4))
    yz = next(r for r in recs if r.pair == ("y", "z"))
    assert yz.bound == pytest.approx(0.0, abs=1e-16)
    assert yz.product == pytest.approx(0.0, abs=1e-16)
    assert yz.product_numeric == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError):
        robertson_products(0, ModeMixParams(0.1, 0.1))


@given(st.integers(1, 6), mixers)
def test_robertson_numeric_agrees(n, p):
    for rec in robertson_products(n, p, CutoffSpec.square(n + 2)):
        assert rec.satisfied
        assert rec.product_numeric >= rec.bound_numeric - 1e-10
        assert rec.product == pytest.approx(rec.product_numeric, abs=1e-8)
        assert rec.bound == pytest.approx(rec.bound_numeric, abs=1e-9)


@given(st.integers(1, 6), mixers)
def test_robertson_rearrangement(n, p):
    s = spectral_scalars(n, p)
    for rec in robertson_products(n, p):
        a, b = rec.pair
        assert rec.product**2 - rec.bound**2 == pytest.approx((s.j1[a] * s.j1[b]) ** 2 / n**2, abs=1e-14)


def test_moment_table_symbolic_oracle():
    x = sympy.symbols("x")
    g = sympy.exp(x**2)
    for center in (0.0, 0.7, -1.3):
        table = moment_table(center, 8)
        for k in range(9):
            fk = sympy.simplify(sympy.exp(-x**2) * sympy.diff(g, x, k) / 2**k)
            assert table[k] == pytest.approx(float(fk.subs(x, center)), rel=1e-13, abs=1e-13)


def test_moment_table_examples():
    t = moment_table(0.8, 3)
    assert t.values == pytest.approx((1.0, 0.8, 0.64 + 0.5, 0.8**3 + 1.5 * 0.8))
    with pytest.raises(ValueError):
        moment_table(0.0, MAX_MOMENT_ORDER + 1)


@given(st.floats(-3, 3), st.integers(2, MAX_MOMENT_ORDER))
def test_moment_recurrence(center, K):
    t = moment_table(center, K)
    assert t[0] == 1 and t[1] == center
    for k in range(1, K):
        assert t[k + 1] == center * t[k] + 0.5 * k * t[k - 1]


def test_moment_table_is_gaussian_moments():
    # raw moments of N(center, 1/2) by Gauss-Hermite quadrature
    nodes, weights = np.polynomial.hermite.hermgauss(20)
    center = 0.45
    t = moment_table(center, 6)
    for k in range(7):
        ref = np.sum(weights * (nodes + center) ** k) / math.sqrt(math.pi)
        assert t[k] == pytest.approx(ref, rel=1e-12, abs=1e-12)


def _by_id(reports):
    return {r.check_id: r for r in reports}


def test_dark_suite_passes():
    reps = dark_state_suite(3, ModeMixParams.from_tau(0.7 * complex(math.cos(0.3), -math.sin(0.3))))
    assert all(r.verdict == "pass" for r in reps), [r.check_id for r in reps if r.verdict != "pass"]
    r = _by_id(reps)
    assert r["dark.number.matrix"].value_numeric <= 1e-10
    assert r["dark.dqdp"].value_numeric == pytest.approx(0.5, abs=1e-9)


def test_dark_suite_vacuum():
    reps = dark_state_suite(0, ModeMixParams(0.3, 0.2))
    assert all(r.verdict == "pass" for r in reps)


def test_dark_family_is_dark():
    cut = CutoffSpec(5, 5)
    p = ModeMixParams(0.9, -0.4)
    fam = dark_family(p, 4, cut)
    a, ad = mixed_mode_a(p, cut)
    assert np.max(np.abs(family_matrix_elements(ad @ a, fam))) <= 1e-12


def test_translated_suite_alpha_zero_matches_dark():
    p = ModeMixParams(0.5, 0.2)
    reps = _by_id(translated_dark_suite(2, p, DisplacementParams(0)))
    assert all(r.verdict == "pass" for r in reps.values())
    assert reps["tdark.dqdp"].value_numeric == pytest.approx(0.5, abs=1e-9)
    assert reps["tdark.number"].value_numeric == pytest.approx(0.0, abs=1e-12)


def test_translated_suite_values():
    p = ModeMixParams(0.6, 1.0)
    alpha = 0.5
    reps = _by_id(translated_dark_suite(1, p, DisplacementParams(alpha)))
    assert all(r.verdict == "pass" for r in reps.values())
    assert reps["tdark.number_sq"].value_closed_form == pytest.approx(0.3125)
    qbar = math.sqrt(2) * alpha
    assert reps["tdark.q^2"].value_closed_form == pytest.approx(qbar**2 + 0.5)
    assert reps["tdark.number_fluct"].value_numeric == pytest.approx(alpha**2, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.3j, 0.2 - 0.4j, 0.6])
def test_translated_suite_complex_alpha(alpha):
    reps = translated_dark_suite(2, ModeMixParams(0.3, 2.0), DisplacementParams(alpha))
    assert all(r.verdict == "pass" for r in reps), [r.check_id for r in reps if r.verdict != "pass"]
