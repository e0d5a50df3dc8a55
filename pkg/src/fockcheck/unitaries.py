"""Mode mixer, displacements and time reversal, each by two routes.

Every transformed state has a closed-form coefficient formula and an
exponential-of-generator construction; the tests use each as the other's
oracle.

Conventions:

* ``tau = tan(r) exp(-i theta)`` and ``xi = r exp(-i theta)``; the mixer is
  ``exp(xi b^dag c - xi^* b c^dag)``.
* The single-mode displacement is ``exp(-alpha c^dag + alpha^* c)``, i.e. it
  shifts by ``-alpha``.  The parity block identities depend on this sign.
* The mixed-mode displacement is ``exp(alpha a^dag - alpha^* a)`` with the
  usual sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expm import ExpmOptions, expm, expm_array
from .fock import (
    CutoffSpec,
    FockError,
    OperatorMatrix,
    StateVector,
    annihilator,
    creator,
    embed_single_mode,
    single_mode_annihilator,
)


class AdequacyError(FockError):
    """Cutoff too small for the requested displacement."""


@dataclass(frozen=True)
class ModeMixParams:
    r: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.theta)):
            raise ValueError("r and theta must be finite")
        if abs(math.cos(self.r)) < 1e-9:
            raise ValueError(f"r={self.r!r} sits on a pole of tan(r)")

    @classmethod
    def from_tau(cls, tau: complex) -> "ModeMixParams":
        """Principal ``r in [0, pi/2)`` and ``theta = -arg(tau)``."""
        tau = complex(tau)
        return cls(math.atan(abs(tau)), -math.atan2(tau.imag, tau.real) if tau else 0.0)

    @property
    def tau(self) -> complex:
        return math.tan(self.r) * complex(math.cos(self.theta), -math.sin(self.theta))

    @property
    def xi(self) -> complex:
        return self.r * complex(math.cos(self.theta), -math.sin(self.theta))

    @property
    def norm_factor(self) -> float:
        """``(1 + tau^* tau)**(1/2)``."""
        return math.sqrt(1.0 + abs(self.tau) ** 2)


@dataclass(frozen=True)
class DisplacementParams:
    alpha: complex
    max_abs2: float = 16.0

    def __post_init__(self):
        a = complex(self.alpha)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValueError("alpha must be finite")
        if abs(a) ** 2 > self.max_abs2:
            raise ValueError(f"|alpha|^2 = {abs(a) ** 2:.4g} exceeds max_abs2 = {self.max_abs2}")
        object.__setattr__(self, "alpha", a)


def required_cutoff(alpha_abs: float, n: int = 0) -> int:
    """Smallest single-mode cutoff that holds a displaced ``|n>`` at amplitude ``alpha_abs``."""
    return n + math.ceil(16.0 * alpha_abs**2) + 8


def check_adequacy(alpha_abs: float, n: int, mode_max: int) -> None:
    need = required_cutoff(alpha_abs, n)
    if mode_max < need:
        raise AdequacyError(
            f"cutoff {mode_max} too small for |alpha|={alpha_abs:.4g}, n={n}; need >= {need}"
        )


def _check_excitation(n: int, cutoff: CutoffSpec) -> None:
    if n < 0 or int(n) != n:
        raise ValueError("excitation count must be a nonnegative integer")
    if n > min(cutoff.n_b_max, cutoff.n_c_max):
        raise ValueError(f"n={n} not representable in both modes of {cutoff}")


# -- mode mixer --------------------------------------------------------------

def theta_generator(p: ModeMixParams, cutoff: CutoffSpec) -> OperatorMatrix:
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    return p.xi * (b.dag @ c) - p.xi.conjugate() * (b @ c.dag)


def theta_op(
    p: ModeMixParams, cutoff: CutoffSpec, opts: ExpmOptions | None = None
) -> OperatorMatrix:
    return expm(theta_generator(p, cutoff), opts)


def _binomial_state(n, w_first, w_second, cutoff, *, swap=False) -> StateVector:
    # sqrt(C(n,k)) w_first**(n-k) w_second**k on |n-k, k> (or |k, n-k> if swap)
    comps = {}
    for k in range(n + 1):
        key = (k, n - k) if swap else (n - k, k)
        comps[key] = math.sqrt(math.comb(n, k)) * w_first ** (n - k) * w_second**k
    return StateVector.from_components(comps, cutoff)


def phi_n_closed(n: int, p: ModeMixParams, cutoff: CutoffSpec) -> StateVector:
    """Closed-form ``Theta|0, n>``: ``sqrt(C(n,k)) tau**(n-k) / (1+|tau|^2)**(n/2)`` on ``|n-k, k>``."""
    _check_excitation(n, cutoff)
    f = p.norm_factor
    return _binomial_state(n, p.tau / f, 1.0 / f, cutoff)


def phi_n_time_reversed(
    n: int, p: ModeMixParams, cutoff: CutoffSpec, *, slot_order: str = "reversed"
) -> StateVector:
    """Closed-form time-reversed member ``T|phi_n>``.

    The coefficient ``sqrt(C(n,k)) (-tau^*)**(n-k) / (1+|tau|^2)**(n/2)`` is
    placed on ``|k, n-k>`` (``slot_order="reversed"``, the default).  That is
    the state ``(b^dag - tau^* c^dag)**n |0,0> / sqrt(n!)`` produced by the
    time-reversal operator, annihilated by the mixed mode ``a``.

    ``slot_order="literal"`` puts the same coefficient on ``|n-k, k>``.  It
    agrees with the default only up to phase when ``tau`` is real and
    ``|tau| = 1``, and it is not a dark state in general; it exists so the
    discrepancy can be reported.
    """
    _check_excitation(n, cutoff)
    f = p.norm_factor
    w = -p.tau.conjugate() / f
    if slot_order == "reversed":
        return _binomial_state(n, w, 1.0 / f, cutoff, swap=True)
    if slot_order == "literal":
        return _binomial_state(n, w, 1.0 / f, cutoff)
    raise ValueError(f"unknown slot_order {slot_order!r}")


# -- displacements -----------------------------------------------------------

def _single_mode_displacement(
    beta: complex, n_max: int, opts: ExpmOptions | None
) -> np.ndarray:
    """``exp(beta x^dag - beta^* x)`` on one truncated mode."""
    a = single_mode_annihilator(n_max)
    out, _ = expm_array(beta * a.conj().T - np.conj(beta) * a, opts)
    return out


def displacement_c(
    d: DisplacementParams,
    cutoff: CutoffSpec,
    opts: ExpmOptions | None = None,
    *,
    max_fock: int = 0,
    strict: bool = True,
) -> OperatorMatrix:
    """``exp(-alpha c^dag + alpha^* c)``.

    With ``strict`` the cutoff must satisfy the adequacy rule for displaced
    Fock states up to ``max_fock``.  The generator only touches mode c, so it
    is exponentiated on that mode and lifted.
    """
    if strict:
        check_adequacy(abs(d.alpha), max_fock, cutoff.n_c_max)
    single = _single_mode_displacement(-d.alpha, cutoff.n_c_max, opts)
    return embed_single_mode("c", single, cutoff)


def mixed_mode_a(p: ModeMixParams, cutoff: CutoffSpec) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``a = (tau^* b + c) / sqrt(1 + |tau|^2)`` and its adjoint."""
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    a = (p.tau.conjugate() * b + c) / p.norm_factor
    return a, a.dag


def time_reversed_mode(p: ModeMixParams, cutoff: CutoffSpec) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``a_T = (b - tau c)/sqrt(1+|tau|^2)`` and ``a_T^dag = (b^dag - tau^* c^dag)/sqrt(...)``.

    The creation form uses ``c^dag``; with a bare ``c`` it would not be the
    adjoint of ``a_T`` nor generate the time-reversed family.
    """
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    at = (b - p.tau * c) / p.norm_factor
    return at, at.dag


def quadratures(p: ModeMixParams, cutoff: CutoffSpec) -> tuple[OperatorMatrix, OperatorMatrix]:
    """``q = (a^dag + a)/sqrt 2`` and ``p = i (a^dag - a)/sqrt 2`` for the mixed mode."""
    a, ad = mixed_mode_a(p, cutoff)
    q = (ad + a) / math.sqrt(2.0)
    mom = (ad - a) * (1j / math.sqrt(2.0))
    return q, mom


def displacement_a(
    d: DisplacementParams,
    p: ModeMixParams,
    cutoff: CutoffSpec,
    opts: ExpmOptions | None = None,
    *,
    max_fock: int = 0,
    strict: bool = True,
    factorized: bool = True,
) -> OperatorMatrix:
    """``exp(alpha a^dag - alpha^* a)`` with ``a`` from :func:`mixed_mode_a`.

    The b and c parts of the generator commute exactly (also after
    truncation), so by default the exponential is taken per mode:
    shifts ``alpha tau / f`` on b and ``alpha / f`` on c.  ``factorized=False``
    exponentiates the full two-mode generator instead.
    """
    f = p.norm_factor
    beta_b, beta_c = d.alpha * p.tau / f, d.alpha / f
    if strict:
        check_adequacy(abs(beta_b), max_fock, cutoff.n_b_max)
        check_adequacy(abs(beta_c), max_fock, cutoff.n_c_max)
    if not factorized:
        a, ad = mixed_mode_a(p, cutoff)
        return expm(d.alpha * ad - d.alpha.conjugate() * a, opts)
    db = _single_mode_displacement(beta_b, cutoff.n_b_max, opts)
    dc = _single_mode_displacement(beta_c, cutoff.n_c_max, opts)
    return OperatorMatrix(cutoff, np.kron(db, dc))


# -- time reversal -----------------------------------------------------------

def quantum_time_reversal(cutoff: CutoffSpec, opts: ExpmOptions | None = None) -> OperatorMatrix:
    """``R = exp((pi/2)(b^dag c - b c^dag))``: b^dag -> -c^dag, c^dag -> b^dag under conjugation."""
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    return expm((b.dag @ c - b @ c.dag) * (math.pi / 2), opts)


def classical_T1(x: StateVector) -> StateVector:
    """Complex conjugation of Fock amplitudes (the anti-unitary part of T)."""
    return StateVector(x.cutoff, x.amplitudes.conj())


def time_reversal(x: StateVector, r_op: OperatorMatrix | None = None) -> StateVector:
    """``T x = T1 R x``.  ``R`` has real entries, so the order of the two factors is immaterial."""
    r_op = quantum_time_reversal(x.cutoff) if r_op is None else r_op
    return classical_T1(r_op @ x)


def time_reverse_operator(op: OperatorMatrix, r_op: OperatorMatrix | None = None) -> OperatorMatrix:
    """``T op T^{-1}`` as a matrix: ``conj(R op R^dag)``."""
    r_op = quantum_time_reversal(op.cutoff) if r_op is None else r_op
    return OperatorMatrix(op.cutoff, (r_op @ op @ r_op.dag).entries.conj())


def conjugate_by(u: OperatorMatrix, op: OperatorMatrix) -> OperatorMatrix:
    """``U op U^{-1}`` for unitary ``U``."""
    return u @ op @ u.dag


__all__ = [
    "AdequacyError",
    "DisplacementParams",
    "ModeMixParams",
    "check_adequacy",
    "classical_T1",
    "conjugate_by",
    "creator",
    "displacement_a",
    "displacement_c",
    "mixed_mode_a",
    "phi_n_closed",
    "phi_n_time_reversed",
    "quadratures",
    "quantum_time_reversal",
    "required_cutoff",
    "theta_generator",
    "theta_op",
    "time_reversal",
    "time_reverse_operator",
    "time_reversed_mode",
]
