"""Schwinger angular momentum, dark states and their translated moments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    BasisFamily,
    CutoffSpec,
    OperatorMatrix,
    StateVector,
    annihilator,
    commutator,
    expectation,
    fluctuation,
    number_op,
)
from .reports import CheckReport, make_report
from .unitaries import (
    DisplacementParams,
    ModeMixParams,
    displacement_a,
    mixed_mode_a,
    phi_n_closed,
    phi_n_time_reversed,
    quadratures,
    required_cutoff,
)

AXES = ("x", "y", "z")
# (first, second, third) with [J_first, J_second] = i J_third
CYCLIC = (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y"))


def schwinger_J(cutoff: CutoffSpec) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    b, c = annihilator("b", cutoff), annihilator("c", cutoff)
    jx = (b.dag @ c + b @ c.dag) * 0.5
    jy = (b.dag @ c - b @ c.dag) / 2j
    jz = (number_op("b", cutoff) - number_op("c", cutoff)) * 0.5
    return jx, jy, jz


def schwinger_dict(cutoff: CutoffSpec) -> dict[str, OperatorMatrix]:
    return dict(zip(AXES, schwinger_J(cutoff)))


@dataclass(frozen=True)
class SpectralScalars:
    n: int
    tau: complex
    j1: dict[str, float]
    j2: dict[str, float]

    def sphere_defect(self) -> float:
        return abs(sum(v * v for v in self.j1.values()) - self.n**2 / 4.0)


def spectral_scalars(n: int, p: ModeMixParams) -> SpectralScalars:
    """First- and second-order diagonal values of ``J_mu`` on ``phi_n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    tau = p.tau
    den = 1.0 + abs(tau) ** 2
    if n == 0:
        zero = {a: 0.0 for a in AXES}
        return SpectralScalars(0, tau, zero, dict(zero))
    j1 = {
        "x": (n / 2) * (2 * tau.real) / den,
        # (n / 2i)(tau^* - tau) = (n / 2i)(-2i Im tau)
        "y": -(n / 2) * (2 * tau.imag) / den,
        "z": (n / 2) * (abs(tau) ** 2 - 1.0) / den,
    }
    j2 = {a: n / 4 + (n - 1) / n * v * v for a, v in j1.items()}
    return SpectralScalars(n, tau, j1, j2)


def cross_moment_closed(s: SpectralScalars, first: str, second: str) -> complex:
    """Closed form of ``<phi_n| J_first J_second |phi_n>`` for distinct axes."""
    if first == second:
        raise ValueError("use j2 for squares")
    if s.n == 0:
        return 0j
    third = ({"x", "y", "z"} - {first, second}).pop()
    sign = 1.0 if (first, second, third) in CYCLIC else -1.0
    return (s.n - 1) / s.n * s.j1[first] * s.j1[second] + sign * 0.5j * s.j1[third]


def family_matrix_elements(op: OperatorMatrix, fam: BasisFamily) -> np.ndarray:
    u = fam.matrix()
    return u.conj().T @ (op.entries @ u)


def diagonality_defect(mat: np.ndarray) -> float:
    off = mat - np.diag(np.diag(mat))
    return float(np.max(np.abs(off), initial=0.0))


@dataclass(frozen=True)
class UncertaintyRecord:
    pair: tuple[str, str]
    product: float
    bound: float
    state_label: str
    product_numeric: float | None = None
    bound_numeric: float | None = None

    @property
    def satisfied(self) -> bool:
        return self.product >= self.bound - 1e-10


def robertson_products(
    n: int, p: ModeMixParams, cutoff: CutoffSpec | None = None
) -> list[UncertaintyRecord]:
    """Closed-form ``Delta J_a Delta J_b`` and ``|<J_c>|/2`` for the three cyclic pairs.

    With a cutoff, both are also evaluated from :func:`fluctuation` on the
    closed-form ``phi_n``.
    """
    if n < 1:
        raise ValueError("Robertson products need n >= 1")
    s = spectral_scalars(n, p)
    state = ops = None
    if cutoff is not None:
        state = phi_n_closed(n, p, cutoff)
        ops = schwinger_dict(cutoff)
    out = []
    for a, b, c in CYCLIC:
        prod = math.sqrt((s.j1[a] * s.j1[b]) ** 2 / n**2 + 0.25 * s.j1[c] ** 2)
        bound = 0.5 * abs(s.j1[c])
        pn = bn = None
        if state is not None:
            pn = math.sqrt(fluctuation(ops[a], state) * fluctuation(ops[b], state))
            bn = 0.5 * abs(expectation(commutator(ops[a], ops[b]), state))
        out.append(UncertaintyRecord((a, b), prod, bound, f"phi_{n}", pn, bn))
    return out


# -- moments of a displaced Gaussian ------------------------------------------

MAX_MOMENT_ORDER = 12


@dataclass(frozen=True)
class MomentTable:
    center: float
    values: tuple[float, ...]

    def __getitem__(self, k: int) -> float:
        return self.values[k]


def moment_table(center: float, K: int) -> MomentTable:
    """``f_0 .. f_K`` with ``f_k(x) = exp(-x^2) 2^-k d^k/dx^k exp(x^2)``.

    Uses ``f_{k+1} = x f_k + (k/2) f_{k-1}``: these are the raw moments of a
    normal variable with mean ``x`` and variance 1/2.
    """
    if not 0 <= K <= MAX_MOMENT_ORDER:
        raise ValueError(f"K must lie in [0, {MAX_MOMENT_ORDER}]")
    center = float(center)
    vals = [1.0, center]
    for k in range(1, K):
        vals.append(center * vals[k] + 0.5 * k * vals[k - 1])
    return MomentTable(center, tuple(vals[: K + 1]))


def _family_power_elements(op: OperatorMatrix, u: np.ndarray, K: int) -> list[np.ndarray]:
    mats, v = [], u
    for _ in range(K):
        v = op.entries @ v
        mats.append(u.conj().T @ v)
    return mats


# -- dark states ---------------------------------------------------------------

def dark_family(p: ModeMixParams, size: int, cutoff: CutoffSpec) -> BasisFamily:
    return BasisFamily([phi_n_time_reversed(m, p, cutoff) for m in range(size)])


DEFAULT_TOLERANCES = {
    "dark.matrix": 1e-10,
    "dark.mean": 1e-10,
    "dark.second": 1e-9,
    "dark.J": 1e-9,
    "dark.dqdp": 1e-9,
    "tdark.moment": 1e-8,
    "tdark.dqdp": 1e-8,
}


def _tol(key: str) -> float:
    return DEFAULT_TOLERANCES[key]


def dark_state_suite(
    n: int,
    p: ModeMixParams,
    cutoff: CutoffSpec | None = None,
) -> list[CheckReport]:
    """Number, quadrature and angular-momentum checks on ``{T phi_m, m <= n}``.

    The untransformed-family second moments and the literal slot-order
    reading of the time-reversed state are carried in ``info``.
    """
    cutoff = CutoffSpec.square(n + 4) if cutoff is None else cutoff
    params = {"n": n, "r": p.r, "theta": p.theta, "tau": p.tau}
    fam = dark_family(p, n + 1, cutoff)
    u = fam.matrix()
    state = fam[n]
    a, ad = mixed_mode_a(p, cutoff)
    num = ad @ a
    q, mom = quadratures(p, cutoff)
    reports = []

    for cid, op, anchor in (
        ("dark.number.matrix", num, "<phi_m^T| a^dag a |phi_n^T> = 0"),
        ("dark.number_sq.matrix", num @ num, "<phi_m^T| (a^dag a)^2 |phi_n^T> = 0"),
        ("dark.q.matrix", q, "<phi_m^T| q |phi_n^T> = 0"),
        ("dark.p.matrix", mom, "<phi_m^T| p |phi_n^T> = 0"),
    ):
        mat = u.conj().T @ (op.entries @ u)
        key = "dark.matrix" if "number" in cid else "dark.mean"
        reports.append(
            make_report(cid, anchor, params, numeric=float(np.max(np.abs(mat))),
                        reference=0.0, tol=_tol(key))
        )

    plain = phi_n_closed(n, p, cutoff)
    for cid, op, name in (("dark.q2.matrix", q, "q"), ("dark.p2.matrix", mom, "p")):
        mat = u.conj().T @ (op.entries @ (op.entries @ u))
        dev = float(np.max(np.abs(mat - 0.5 * np.eye(len(fam)))))
        reports.append(
            make_report(
                cid, f"<phi_m^T| {name}^2 |phi_n^T> = delta_mn / 2", params,
                numeric=dev, reference=0.0, tol=_tol("dark.second"),
                info={"untransformed_family_value": expectation(op @ op, plain).real},
            )
        )

    s = spectral_scalars(n, p)
    literal = phi_n_time_reversed(n, p, cutoff, slot_order="literal")
    for axis, jop in schwinger_dict(cutoff).items():
        jmat = u.conj().T @ (jop.entries @ u)
        reports.append(
            make_report(
                f"dark.J{axis}", f"<phi_m^T| J_{axis} |phi_n^T> = -delta_mn j_{axis}", params,
                closed=-s.j1[axis], numeric=expectation(jop, state).real,
                tol=_tol("dark.J"),
                info={
                    "offdiag_max": diagonality_defect(jmat),
                    "literal_slot_order_value": expectation(jop, literal).real,
                },
            )
        )

    dq = math.sqrt(fluctuation(q, state))
    dp = math.sqrt(fluctuation(mom, state))
    tol2 = _tol("dark.second")
    reports.append(make_report("dark.dq", "Delta q = 1/sqrt(2)", params,
                               closed=1 / math.sqrt(2), numeric=dq, tol=tol2))
    reports.append(make_report("dark.dp", "Delta p = 1/sqrt(2)", params,
                               closed=1 / math.sqrt(2), numeric=dp, tol=tol2))
    reports.append(
        make_report("dark.dqdp", "Delta q Delta p = 1/2", params, closed=0.5, numeric=dq * dp,
                    reference=0.5, tol=_tol("dark.dqdp"),
                    info={"literal_slot_order_number": expectation(num, literal).real})
    )
    return reports


def default_translated_cutoff(n: int, d: DisplacementParams, order: int = 6) -> CutoffSpec:
    return CutoffSpec.square(required_cutoff(abs(d.alpha), n) + order)


def translated_dark_state(
    n: int, p: ModeMixParams, d: DisplacementParams, cutoff: CutoffSpec, *, strict: bool = True
) -> StateVector:
    disp = displacement_a(d, p, cutoff, max_fock=n, strict=strict)
    return disp @ phi_n_time_reversed(n, p, cutoff)


def translated_dark_suite(
    n: int,
    p: ModeMixParams,
    d: DisplacementParams,
    cutoff: CutoffSpec | None = None,
    *,
    k_max: int = 4,
    quad_order: int = 6,
    strict: bool = True,
) -> list[CheckReport]:
    """Moments of ``a``, ``a^dag a``, ``q`` and ``p`` on the displaced dark family.

    Diagonal values are compared with their closed forms; the largest
    off-diagonal family element of each power goes into ``info``.
    """
    cutoff = default_translated_cutoff(n, d, quad_order) if cutoff is None else cutoff
    alpha = d.alpha
    params = {"n": n, "r": p.r, "theta": p.theta, "tau": p.tau, "alpha": alpha}
    disp = displacement_a(d, p, cutoff, max_fock=n, strict=strict)
    fam = BasisFamily([disp @ phi_n_time_reversed(m, p, cutoff) for m in range(n + 1)])
    u = fam.matrix()
    a, ad = mixed_mode_a(p, cutoff)
    q, mom = quadratures(p, cutoff)
    tol = _tol("tdark.moment")
    reports = []

    def add_powers(tag, op, closed_values, anchor):
        mats = _family_power_elements(op, u, len(closed_values))
        for k, (m, closed) in enumerate(zip(mats, closed_values), start=1):
            reports.append(
                make_report(
                    f"tdark.{tag}^{k}", anchor.format(k=k), params,
                    closed=closed, numeric=complex(m[n, n]), tol=tol,
                    info={"offdiag_max": diagonality_defect(m)},
                )
            )

    add_powers("a", a, [alpha**k for k in range(1, k_max + 1)], "<phi^DT| a^{k} |phi^DT> = alpha^{k}")
    add_powers("adag", ad, [alpha.conjugate() ** k for k in range(1, k_max + 1)],
               "<phi^DT| (a^dag)^{k} |phi^DT> = (alpha^*)^{k}")

    a2 = abs(alpha) ** 2
    num = ad @ a
    num_mats = _family_power_elements(num, u, 2)
    for k, closed in ((1, a2), (2, a2 * (a2 + 1.0))):
        cid = "tdark.number" if k == 1 else "tdark.number_sq"
        reports.append(
            make_report(cid, "<phi^DT| (a^dag a)^k |phi^DT> Poisson moments", params,
                        closed=closed, numeric=num_mats[k - 1][n, n].real, tol=tol,
                        info={"offdiag_max": diagonality_defect(num_mats[k - 1])})
        )

    qbar = math.sqrt(2.0) * alpha.real  # (alpha^* + alpha)/sqrt(2)
    pbar = math.sqrt(2.0) * alpha.imag  # i(alpha^* - alpha)/sqrt(2)
    for tag, op, center in (("q", q, qbar), ("p", mom, pbar)):
        table = moment_table(center, quad_order)
        mats = _family_power_elements(op, u, quad_order)
        for k in range(1, quad_order + 1):
            reports.append(
                make_report(
                    f"tdark.{tag}^{k}", f"<phi^DT| {tag}^{k} |phi^DT> = f_{k}({tag}bar)", params,
                    closed=table[k], numeric=mats[k - 1][n, n].real, tol=tol,
                    info={"offdiag_max": diagonality_defect(mats[k - 1]),
                          "imag_part": float(mats[k - 1][n, n].imag)},
                )
            )

    dq = math.sqrt(fluctuation(q, fam[n]))
    dp = math.sqrt(fluctuation(mom, fam[n]))
    reports.append(make_report("tdark.dq", "Delta q = 1/sqrt(2)", params,
                               closed=1 / math.sqrt(2), numeric=dq, tol=tol))
    reports.append(make_report("tdark.dp", "Delta p = 1/sqrt(2)", params,
                               closed=1 / math.sqrt(2), numeric=dp, tol=tol))
    reports.append(make_report("tdark.dqdp", "Delta q Delta p = 1/2", params,
                               closed=0.5, numeric=dq * dp, reference=0.5,
                               tol=_tol("tdark.dqdp")))
    reports.append(make_report("tdark.number_fluct", "Delta(a^dag a)^2 = |alpha|^2", params,
                               closed=a2, numeric=fluctuation(num, fam[n]), tol=tol))
    return reports
