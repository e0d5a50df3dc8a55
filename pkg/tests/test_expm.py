import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from fockcheck.expm import ExpmError, ExpmOptions, expm, expm_array
from fockcheck.fock import CutoffSpec, InteriorSpec, OperatorMatrix, interior_distance, number_op
from fockcheck.unitaries import ModeMixParams, theta_generator


def test_zero_is_identity():
    cut = CutoffSpec(2, 2)
    out = expm(OperatorMatrix.zeros(cut))
    assert np.array_equal(out.entries, np.eye(cut.dim))


def test_parity_from_number():
    cut = CutoffSpec(1, 5)
    out = expm(number_op("c", cut) * (1j * math.pi))
    nc = np.tile(np.arange(6), 2)
    assert np.max(np.abs(out.entries - np.diag((-1.0) ** nc))) <= 1e-13


def test_inverse_on_interior():
    cut = CutoffSpec(6, 6)
    g = theta_generator(ModeMixParams(0.7, 0.3), cut)
    prod = expm(g) @ expm(-g)
    assert interior_distance(prod, OperatorMatrix.identity(cut), InteriorSpec(2)) <= 1e-10


@given(st.integers(1, 12), st.floats(0.01, 20.0), st.integers(0, 2**32 - 1))
def test_matches_scipy(n, scale, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a *= scale / np.linalg.norm(a, 1)
    ours, info = expm_array(a)
    ref = scipy.linalg.expm(a)
    assert np.max(np.abs(ours - ref)) <= 1e-11 * max(1.0, np.max(np.abs(ref)))
    assert info.norm == pytest.approx(scale)


@given(st.integers(1, 8), st.floats(0.1, 10.0), st.integers(0, 2**32 - 1))
def test_antihermitian_gives_unitary(n, scale, seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    g = (h - h.conj().T) * (scale / np.linalg.norm(h, 1))
    u, _ = expm_array(g)
    assert np.max(np.abs(u.conj().T @ u - np.eye(n))) <= 1e-12


def test_scaling_reported():
    a = np.array([[0.0, 8.0], [-8.0, 0.0]])
    _, info = expm_array(a)
    # 1-norm 8 scaled down to 0.5
    assert info.squarings == 4
    assert info.error_bound < 1e-10


def test_max_scaling_exceeded():
    with pytest.raises(ExpmError):
        expm_array(np.array([[1e6]]), ExpmOptions(max_scaling=4))


def test_bad_inputs():
    with pytest.raises(ValueError):
        expm_array(np.zeros((2, 3)))
    with pytest.raises(ExpmError):
        expm_array(np.array([[np.inf]]))
    with pytest.raises(ValueError):
        ExpmOptions(tolerance=1e-20)
    with pytest.raises(ValueError):
        ExpmOptions(max_scaling=0)


def test_looser_tolerance_uses_fewer_terms():
    a = np.array([[0.0, 0.4], [-0.4, 0.1]])
    _, tight = expm_array(a)
    _, loose = expm_array(a, ExpmOptions(tolerance=1e-6))
    assert loose.terms < tight.terms
