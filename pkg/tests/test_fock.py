import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockcheck.fock import (
    AddressingError,
    BasisFamily,
    ConventionError,
    CutoffMismatchError,
    CutoffSpec,
    FockIndex,
    InteriorSpec,
    NumericalHealthError,
    OperatorMatrix,
    StateVector,
    adjoint,
    annihilator,
    basis_dim,
    commutator,
    creator,
    embed_single_mode,
    expansion_residual,
    fluctuation,
    fluctuation_matrix,
    fock_index,
    gauge_defect,
    index_of,
    inner,
    interior_defect,
    interior_projector,
    number_op,
    parity_c,
    projector_defect,
    same_ray,
    single_mode_annihilator,
)
from fockcheck.unitaries import ModeMixParams, phi_n_closed, quadratures

from conftest import random_state

cutoffs = st.builds(CutoffSpec, st.integers(0, 5), st.integers(0, 5))


@pytest.mark.parametrize("nb,nc,dim", [(0, 0, 1), (2, 3, 12), (40, 40, 1681)])
def test_basis_dim(nb, nc, dim):
    assert basis_dim(CutoffSpec(nb, nc)) == dim


@pytest.mark.parametrize("ix,ordinal", [((0, 0), 0), ((1, 0), 4), ((2, 3), 11)])
def test_index_of_row_major(ix, ordinal):
    assert index_of(ix, CutoffSpec(2, 3)) == ordinal


@given(cutoffs, st.data())
def test_index_roundtrip(cutoff, data):
    k = data.draw(st.integers(0, cutoff.dim - 1))
    ix = fock_index(k, cutoff)
    assert index_of(ix, cutoff) == k
    assert isinstance(ix, FockIndex)


def test_index_out_of_range():
    with pytest.raises(AddressingError):
        index_of((3, 0), CutoffSpec(2, 3))
    with pytest.raises(AddressingError):
        fock_index(12, CutoffSpec(2, 3))


def test_cutoff_rejects_negative():
    with pytest.raises(ValueError):
        CutoffSpec(-1, 2)


def test_ladder_elements():
    cut = CutoffSpec(2, 4)
    c = annihilator("c", cut)
    assert c.element((0, 0), (0, 1)) == pytest.approx(1.0)
    assert c.element((0, 2), (0, 3)) == pytest.approx(math.sqrt(3))
    assert number_op("c", cut).element((1, 1), (1, 1)) == pytest.approx(1.0)


def test_commutator_on_interior():
    cut = CutoffSpec(4, 4)
    for mode in "bc":
        x = annihilator(mode, cut)
        comm = commutator(x, x.dag) - OperatorMatrix.identity(cut)
        assert interior_defect(comm, InteriorSpec(1)) <= 1e-12
        # the top row breaks it, which is why the interior exists
        assert np.max(np.abs(comm.entries)) > 1


def test_cross_mode_commutators_exact():
    cut = CutoffSpec(3, 3)
    b, c = annihilator("b", cut), annihilator("c", cut)
    for x, y in ((b, c), (b, c.dag), (b.dag, c.dag), (c, b.dag)):
        assert np.all(commutator(x, y).entries == 0)
    assert np.all(commutator(c, c).entries == 0)


def test_number_spectrum_and_product():
    cut = CutoffSpec(3, 2)
    nb = number_op("b", cut)
    vals = np.sort(np.diag(nb.entries).real)
    assert list(vals) == sorted(list(range(4)) * 3)
    c = annihilator("c", cut)
    # sqrt(k)**2 rounding only; no boundary defect
    diff = number_op("c", cut).entries - (creator("c", cut) @ c).entries
    assert np.max(np.abs(diff)) <= 1e-15


def test_embed_matches_kron():
    cut = CutoffSpec(2, 3)
    b = embed_single_mode("b", single_mode_annihilator(2), cut)
    # |1,0> -> |0,0>
    assert b.element((0, 0), (1, 0)) == pytest.approx(1.0)
    assert b.element((0, 2), (1, 2)) == pytest.approx(1.0)


def test_inner_basics():
    cut = CutoffSpec(2, 2)
    v00, v10, v01 = (StateVector.basis(*ix, cut) for ix in ((0, 0), (1, 0), (0, 1)))
    assert inner(v00, v00) == 1
    assert inner(v10, v01) == 0
    p = ModeMixParams.from_tau(1.0)
    assert abs(inner(phi_n_closed(1, p, cut), phi_n_closed(2, p, cut))) < 1e-15


@given(cutoffs, st.integers(0, 2**32 - 1))
def test_inner_conjugate_symmetric(cutoff, seed):
    rng = np.random.default_rng(seed)
    x, y = random_state(rng, cutoff), random_state(rng, cutoff)
    assert inner(x, y) == pytest.approx(np.conj(inner(y, x)), abs=1e-15)


def test_adjoint_involution(rng):
    cut = CutoffSpec(2, 2)
    a = OperatorMatrix(cut, rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9)))
    assert np.array_equal(adjoint(adjoint(a)).entries, a.entries)


def test_cutoff_mismatch():
    with pytest.raises(CutoffMismatchError):
        inner(StateVector.basis(0, 0, CutoffSpec(1, 1)), StateVector.basis(0, 0, CutoffSpec(1, 2)))
    with pytest.raises(CutoffMismatchError):
        annihilator("b", CutoffSpec(1, 1)) @ annihilator("b", CutoffSpec(2, 1))


def test_state_rejects_nan():
    with pytest.raises(ValueError):
        StateVector(CutoffSpec(0, 1), [np.nan, 0])


def test_interior_projector():
    cut = CutoffSpec(3, 4)
    assert np.array_equal(interior_projector(cut, InteriorSpec(0)).entries, np.eye(cut.dim))
    p = interior_projector(CutoffSpec(1, 1), InteriorSpec(1)).entries
    assert np.trace(p).real == 1 and p[0, 0] == 1
    assert np.trace(interior_projector(cut, InteriorSpec(2)).entries).real == (3 - 2 + 1) * (4 - 2 + 1)
    with pytest.raises(ValueError):
        interior_projector(cut, InteriorSpec(4))


def test_gauge_defect():
    cut = CutoffSpec(2, 2)
    v = StateVector.basis(0, 0, cut)
    assert gauge_defect(BasisFamily([v])) == 0
    assert gauge_defect(BasisFamily([v, v])) == pytest.approx(1.0)
    p = ModeMixParams.from_tau(0.5 + 0.2j)
    fam = BasisFamily([phi_n_closed(n, p, CutoffSpec(6, 6)) for n in range(6)])
    assert gauge_defect(fam) <= 1e-10


def test_projector_defect_trivial():
    cut = CutoffSpec(2, 2)
    fam = BasisFamily([StateVector.basis(0, 0, cut), StateVector.basis(1, 0, cut)])
    assert projector_defect(fam, fam[1]) == pytest.approx(0.0)
    assert projector_defect(fam, StateVector.basis(0, 1, cut)) == pytest.approx(1.0)
    assert expansion_residual(fam, fam[0]).norm() == 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_bessel_random(seed, k):
    rng = np.random.default_rng(seed)
    cut = CutoffSpec(3, 3)
    q, _ = np.linalg.qr(rng.normal(size=(cut.dim, k)) + 1j * rng.normal(size=(cut.dim, k)))
    fam = BasisFamily([StateVector(cut, q[:, i]) for i in range(k)])
    assert projector_defect(fam, random_state(rng, cut)) >= -1e-12


def test_fluctuation_examples():
    cut = CutoffSpec(4, 4)
    assert fluctuation(number_op("c", cut), StateVector.basis(0, 2, cut)) <= 1e-10
    q, _ = quadratures(ModeMixParams(0.3, 0.2), cut)
    assert fluctuation(q, StateVector.basis(0, 0, cut)) == pytest.approx(0.5, abs=1e-14)


def test_fluctuation_guards():
    cut = CutoffSpec(2, 2)
    with pytest.raises(ConventionError):
        fluctuation(annihilator("c", cut), StateVector.basis(0, 0, cut))
    with pytest.raises(ConventionError):
        fluctuation(number_op("c", cut), StateVector.basis(0, 0, cut) * 2)
    with pytest.raises(ValueError):
        fluctuation(number_op("c", cut), StateVector.basis(0, 0, cut), method="other")


def test_fluctuation_raw_matches_centered(rng):
    cut = CutoffSpec(3, 3)
    x = random_state(rng, cut)
    q, _ = quadratures(ModeMixParams(0.4, 1.0), cut)
    assert fluctuation(q, x, method="raw") == pytest.approx(fluctuation(q, x), abs=1e-12)


def test_fluctuation_raw_clamp_window():
    cut = CutoffSpec(0, 1)
    # norm 1 + 5e-11 passes the normalization check but makes the raw variance negative
    x = StateVector(cut, [1.0 + 5e-11, 0.0])
    assert fluctuation(OperatorMatrix(cut, np.diag([0.01, 0.0])), x, method="raw") == 0.0
    with pytest.raises(NumericalHealthError):
        fluctuation(OperatorMatrix(cut, np.diag([1e3, 0.0])), x, method="raw")
    assert fluctuation(OperatorMatrix(cut, np.diag([1e3, 0.0])), x) >= 0


def test_fluctuation_matrix_eigenbasis():
    cut = CutoffSpec(2, 2)
    fam = BasisFamily([StateVector.basis(0, n, cut) for n in range(3)])
    assert np.max(np.abs(fluctuation_matrix(number_op("c", cut), fam))) == 0


def test_parity_involution():
    pi = parity_c(CutoffSpec(3, 5))
    assert np.array_equal((pi @ pi).entries, np.eye(pi.cutoff.dim))


def test_same_ray():
    cut = CutoffSpec(1, 1)
    x = StateVector.basis(1, 0, cut)
    assert same_ray(x, x * 1j) == pytest.approx(0.0)
    assert same_ray(x, StateVector.basis(0, 1, cut)) == pytest.approx(1.0)
