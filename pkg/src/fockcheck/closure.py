"""Projector-closure computations for the mixer family and the displaced parity block.

Two computations live here:

* the mixed-mode probe ``|psi> = (b^dag c + b c^dag)|phi_n>`` tested against
  the subspace projector of ``{phi_m}``, whose Bessel defect is
  ``n (1 - s**2)`` with ``s = (tau + tau^*) / (1 + |tau|^2)``;
* the parity matrix ``D_jn = <j| D^dag Pi D |n>`` over displaced Fock states
  and the determinant of its square, which equals ``exp(-4 |alpha|^2 M)`` for
  the leading ``M x M`` block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .fock import (
    BasisFamily,
    CutoffSpec,
    FockError,
    StateVector,
    annihilator,
    expansion_residual,
    parity_c,
    projector_defect,
)
from .unitaries import (
    DisplacementParams,
    ModeMixParams,
    displacement_c,
    phi_n_closed,
    required_cutoff,
)

ROUTES = ("closed-form", "numeric")


class ConvergenceError(FockError):
    pass


class SingularFactorizationError(FockError):
    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


def mixing_overlap(p: ModeMixParams) -> float:
    """``s = (tau + tau^*) / (1 + tau^* tau)``; ranges over ``[-1, 1]``."""
    tau = p.tau
    return (2.0 * tau.real) / (1.0 + abs(tau) ** 2)


def closure_lhs_closed(n: int, p: ModeMixParams) -> float:
    return n**2 * mixing_overlap(p) ** 2


def closure_rhs_closed(n: int, p: ModeMixParams) -> float:
    return n + n * (n - 1) * mixing_overlap(p) ** 2


def _default_cutoff(n: int, family_size: int) -> CutoffSpec:
    return CutoffSpec.square(max(family_size - 1, n + 1))


def psi_probe(n: int, p: ModeMixParams, cutoff: CutoffSpec) -> StateVector:
    """Unnormalized probe ``(b^dag c + b c^dag)|phi_n>``."""
    if min(cutoff.n_b_max, cutoff.n_c_max) < n + 1:
        raise ValueError(f"probe for n={n} needs both mode cutoffs >= {n + 1}, got {cutoff}")
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    hop = b.dag @ c + b @ c.dag
    return hop @ phi_n_closed(n, p, cutoff)


def mixer_family(p: ModeMixParams, size: int, cutoff: CutoffSpec) -> BasisFamily:
    return BasisFamily([phi_n_closed(m, p, cutoff) for m in range(size)])


@dataclass(frozen=True)
class ClosureThetaResult:
    n: int
    tau: complex
    lhs: float
    rhs: float
    lhs_numeric: float
    rhs_numeric: float
    family_size: int
    cutoff: CutoffSpec

    @property
    def defect(self) -> float:
        return self.rhs - self.lhs

    @property
    def defect_numeric(self) -> float:
        return self.rhs_numeric - self.lhs_numeric

    @property
    def defect_formula(self) -> float:
        s = (2.0 * self.tau.real) / (1.0 + abs(self.tau) ** 2)
        return self.n * (1.0 - s * s)


def closure_theta_test(
    n: int,
    p: ModeMixParams,
    family_size: int | None = None,
    cutoff: CutoffSpec | None = None,
    *,
    tol: float = 1e-12,
) -> ClosureThetaResult:
    """Project the mixed-mode probe onto ``{phi_0 .. phi_{family_size-1}}``.

    Raises :class:`ConvergenceError` when the last family member still
    carries more than ``tol`` of the probe's weight, i.e. the partial sum
    has not saturated.
    """
    family_size = n + 4 if family_size is None else family_size
    if family_size < n + 2:
        raise ValueError(f"family_size must be >= n + 2 = {n + 2}")
    cutoff = _default_cutoff(n, family_size) if cutoff is None else cutoff
    psi = psi_probe(n, p, cutoff)
    fam = mixer_family(p, family_size, cutoff)
    overlaps = np.abs(fam.matrix().conj().T @ psi.amplitudes) ** 2
    if overlaps[-1] > tol:
        raise ConvergenceError(
            f"last family member carries weight {overlaps[-1]:.3g}; enlarge family_size"
        )
    rhs_num = float(np.vdot(psi.amplitudes, psi.amplitudes).real)
    return ClosureThetaResult(
        n=n,
        tau=p.tau,
        lhs=closure_lhs_closed(n, p),
        rhs=closure_rhs_closed(n, p),
        lhs_numeric=float(np.sum(overlaps)),
        rhs_numeric=rhs_num,
        family_size=family_size,
        cutoff=cutoff,
    )


@dataclass(frozen=True)
class ExpansionReport:
    n: int
    tau: complex
    residual_norm: float
    projector_defect: float
    probe_norm: float
    family_size: int


def appendix1_demo(
    p: ModeMixParams,
    n: int,
    cutoff: CutoffSpec | None = None,
    family_size: int | None = None,
) -> ExpansionReport:
    """Norm lost by expanding the mixed-mode probe over ``{phi_m}``.

    ``|| psi - sum_m phi_m <phi_m|psi> ||``; its square equals the projector
    defect, so a nonzero value shows the expansion step failing for this
    family.
    """
    family_size = n + 4 if family_size is None else family_size
    cutoff = _default_cutoff(n, family_size) if cutoff is None else cutoff
    psi = psi_probe(n, p, cutoff)
    fam = mixer_family(p, family_size, cutoff)
    return ExpansionReport(
        n=n,
        tau=p.tau,
        residual_norm=expansion_residual(fam, psi).norm(),
        projector_defect=projector_defect(fam, psi),
        probe_norm=psi.norm(),
        family_size=family_size,
    )


# -- displaced parity block --------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParityBlock:
    alpha: complex
    M: int
    entries: np.ndarray
    route: str

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def parity_entry_closed(j: int, n: int, alpha: complex) -> complex:
    """``exp(-2|alpha|^2) sum_s (-1)^s sqrt(j! n!) (2 alpha)^(j-s) (2 alpha^*)^(n-s) / ((j-s)!(n-s)! s!)``."""
    alpha = complex(alpha)
    two_a, two_ac = 2.0 * alpha, 2.0 * alpha.conjugate()
    total = 0j
    for s in range(min(j, n) + 1):
        # sqrt(j! n!) / ((j-s)! (n-s)! s!), squared as an exact rational
        ratio = Fraction(math.comb(j, s) * math.comb(n, s),
                         math.factorial(j - s) * math.factorial(n - s))
        total += (-1) ** s * math.sqrt(ratio) * two_a ** (j - s) * two_ac ** (n - s)
    return math.exp(-2.0 * abs(alpha) ** 2) * total


def default_parity_cutoff(d: DisplacementParams, M: int) -> CutoffSpec:
    return CutoffSpec(0, max(required_cutoff(abs(d.alpha), M - 1), 48))


def parity_matrix_D(
    d: DisplacementParams,
    M: int,
    route: str = "closed-form",
    cutoff: CutoffSpec | None = None,
    *,
    strict: bool = True,
) -> ParityBlock:
    """``D_jn = <j|_alpha Pi |n>_alpha`` for ``j, n < M`` by either route.

    The numeric route sandwiches the diagonal parity between displaced Fock
    states ``D|0, n>`` built in the truncated space (b mode may sit at 0).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if route == "closed-form":
        mat = np.array(
            [[parity_entry_closed(j, n, d.alpha) for n in range(M)] for j in range(M)],
            dtype=complex,
        )
        return ParityBlock(d.alpha, M, mat, route)
    if route != "numeric":
        raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
    cutoff = default_parity_cutoff(d, M) if cutoff is None else cutoff
    if cutoff.n_c_max < M - 1:
        raise ValueError(f"cutoff {cutoff} cannot hold |{M - 1}>")
    disp = displacement_c(d, cutoff, max_fock=M - 1, strict=strict)
    # columns: displaced Fock states |n>_alpha
    cols = np.column_stack(
        [(disp @ StateVector.basis(0, n, cutoff)).amplitudes for n in range(M)]
    )
    mat = cols.conj().T @ (parity_c(cutoff).entries @ cols)
    return ParityBlock(d.alpha, M, mat, route)


@dataclass(frozen=True)
class DeterminantResult:
    alpha: complex
    M: int
    det_value: complex
    paper_value: float
    rel_error: float
    condition: float
    route: str
    # parity squares to the identity, so the un-inserted product is the identity
    identity_reference: float = 1.0
    extras: dict = field(default_factory=dict)


def _pivoted_det(mat: np.ndarray) -> tuple[complex, float]:
    cond = float(np.linalg.cond(mat))
    if not math.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise SingularFactorizationError(
            f"matrix singular to working precision (condition {cond:.3g})", cond
        )
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=True)
    diag = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(len(piv))))
    return complex((-1) ** swaps * np.prod(diag)), cond


def closure_parity_determinant(
    d: DisplacementParams,
    M: int,
    route: str = "closed-form",
    cutoff: CutoffSpec | None = None,
    *,
    strict: bool = True,
) -> DeterminantResult:
    """``det(sum_n D_jn D_nk)`` against ``exp(-4 |alpha|^2 M)``.

    The product matrix is factorized directly; ``det(B)**2`` is kept in
    ``extras`` as a consistency value.
    """
    block = parity_matrix_D(d, M, route, cutoff, strict=strict)
    product = block.entries @ block.entries
    det, cond = _pivoted_det(product)
    ref = math.exp(-4.0 * abs(d.alpha) ** 2 * M)
    det_b, _ = _pivoted_det(block.entries)
    return DeterminantResult(
        alpha=d.alpha,
        M=M,
        det_value=det,
        paper_value=ref,
        rel_error=abs(det - ref) / ref,
        condition=cond,
        route=route,
        extras={"det_block_squared": det_b**2},
    )
