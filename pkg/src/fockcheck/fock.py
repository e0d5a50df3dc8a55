"""Truncated two-mode Fock space: basis addressing, states, dense operators.

Kets are ordered ``|n_b, n_c>`` in row-major layout, so the ordinal of
``|n_b, n_c>`` is ``n_b * (n_c_max + 1) + n_c``.  Ladder matrices are the
plain truncations of the infinite ones; commutation relations therefore only
hold away from the cutoff, which is what :class:`InteriorSpec` is for.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: negative fluctuations inside this window are rounding noise and clamp to 0
FLUCTUATION_CLAMP = 1e-12


class FockError(Exception):
    """Base class for kernel errors."""


class CutoffMismatchError(FockError):
    pass


class AddressingError(FockError):
    pass


class ConventionError(FockError):
    """An operator or state violates a convention the operation relies on."""


class NumericalHealthError(FockError):
    pass


@dataclass(frozen=True)
class CutoffSpec:
    n_b_max: int
    n_c_max: int

    def __post_init__(self):
        for name in ("n_b_max", "n_c_max"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def dim(self) -> int:
        return (self.n_b_max + 1) * (self.n_c_max + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_b_max + 1, self.n_c_max + 1)

    @classmethod
    def square(cls, n: int) -> "CutoffSpec":
        return cls(n, n)


@dataclass(frozen=True)
class FockIndex:
    n_b: int
    n_c: int


def basis_dim(cutoff: CutoffSpec) -> int:
    return cutoff.dim


def index_of(ix: FockIndex | tuple[int, int], cutoff: CutoffSpec) -> int:
    n_b, n_c = (ix.n_b, ix.n_c) if isinstance(ix, FockIndex) else ix
    if not (0 <= n_b <= cutoff.n_b_max and 0 <= n_c <= cutoff.n_c_max):
        raise AddressingError(f"|{n_b},{n_c}> lies outside cutoff {cutoff}")
    return n_b * (cutoff.n_c_max + 1) + n_c


def fock_index(ordinal: int, cutoff: CutoffSpec) -> FockIndex:
    if not 0 <= ordinal < cutoff.dim:
        raise AddressingError(f"ordinal {ordinal} outside [0, {cutoff.dim})")
    n_b, n_c = divmod(ordinal, cutoff.n_c_max + 1)
    return FockIndex(n_b, n_c)


def _occupations(cutoff: CutoffSpec) -> tuple[np.ndarray, np.ndarray]:
    nb, nc = np.meshgrid(
        np.arange(cutoff.n_b_max + 1), np.arange(cutoff.n_c_max + 1), indexing="ij"
    )
    return nb.ravel(), nc.ravel()


def _check_same(a: CutoffSpec, b: CutoffSpec) -> None:
    if a != b:
        raise CutoffMismatchError(f"cutoffs differ: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class StateVector:
    cutoff: CutoffSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        if amp.shape != (self.cutoff.dim,):
            raise ValueError(
                f"expected {self.cutoff.dim} amplitudes for {self.cutoff}, got {amp.size}"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("state amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def basis(cls, n_b: int, n_c: int, cutoff: CutoffSpec) -> "StateVector":
        amp = np.zeros(cutoff.dim, dtype=complex)
        amp[index_of((n_b, n_c), cutoff)] = 1.0
        return cls(cutoff, amp)

    @classmethod
    def from_components(
        cls, components: dict[tuple[int, int], complex], cutoff: CutoffSpec
    ) -> "StateVector":
        amp = np.zeros(cutoff.dim, dtype=complex)
        for (n_b, n_c), v in components.items():
            amp[index_of((n_b, n_c), cutoff)] += v
        return cls(cutoff, amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.cutoff, self.amplitudes / nrm)

    def component(self, n_b: int, n_c: int) -> complex:
        return complex(self.amplitudes[index_of((n_b, n_c), self.cutoff)])

    def grid(self) -> np.ndarray:
        """Amplitudes reshaped to ``(n_b_max+1, n_c_max+1)``."""
        return self.amplitudes.reshape(self.cutoff.shape)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same(self.cutoff, other.cutoff)
        return StateVector(self.cutoff, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same(self.cutoff, other.cutoff)
        return StateVector(self.cutoff, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector(self.cutoff, self.amplitudes * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "StateVector":
        return StateVector(self.cutoff, -self.amplitudes)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    cutoff: CutoffSpec
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.cutoff.dim
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix for {self.cutoff}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, cutoff: CutoffSpec) -> "OperatorMatrix":
        return cls(cutoff, np.eye(cutoff.dim, dtype=complex))

    @classmethod
    def zeros(cls, cutoff: CutoffSpec) -> "OperatorMatrix":
        return cls(cutoff, np.zeros((cutoff.dim, cutoff.dim), dtype=complex))

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, self.entries.conj().T)

    def element(self, bra: tuple[int, int], ket: tuple[int, int]) -> complex:
        return complex(
            self.entries[index_of(bra, self.cutoff), index_of(ket, self.cutoff)]
        )

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same(self.cutoff, other.cutoff)
            return OperatorMatrix(self.cutoff, self.entries @ other.entries)
        if isinstance(other, StateVector):
            _check_same(self.cutoff, other.cutoff)
            return StateVector(self.cutoff, self.entries @ other.amplitudes)
        return NotImplemented

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same(self.cutoff, other.cutoff)
        return OperatorMatrix(self.cutoff, self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same(self.cutoff, other.cutoff)
        return OperatorMatrix(self.cutoff, self.entries - other.entries)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, self.entries * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, self.entries / scalar)

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, -self.entries)

    def __pow__(self, k: int) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, np.linalg.matrix_power(self.entries, k))


# -- linear-algebra plumbing -------------------------------------------------

def inner(x: StateVector, y: StateVector) -> complex:
    """``<x|y>``, conjugate-linear in ``x``."""
    _check_same(x.cutoff, y.cutoff)
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def apply(op: OperatorMatrix, x: StateVector) -> StateVector:
    return op @ x


def adjoint(op: OperatorMatrix) -> OperatorMatrix:
    return op.dag


def compose(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b - b @ a


def add(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a + b


def scale(a: OperatorMatrix, s: complex) -> OperatorMatrix:
    return a * s


def expectation(op: OperatorMatrix, x: StateVector) -> complex:
    return inner(x, op @ x)


def matrix_element(bra: StateVector, op: OperatorMatrix, ket: StateVector) -> complex:
    return inner(bra, op @ ket)


# -- ladder and number operators ---------------------------------------------

def _mode_matrix(mode: str, single: np.ndarray, cutoff: CutoffSpec) -> np.ndarray:
    if mode == "b":
        return np.kron(single, np.eye(cutoff.n_c_max + 1))
    if mode == "c":
        return np.kron(np.eye(cutoff.n_b_max + 1), single)
    raise ValueError(f"mode must be 'b' or 'c', got {mode!r}")


def single_mode_annihilator(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def mode_cutoff(mode: str, cutoff: CutoffSpec) -> int:
    if mode == "b":
        return cutoff.n_b_max
    if mode == "c":
        return cutoff.n_c_max
    raise ValueError(f"mode must be 'b' or 'c', got {mode!r}")


def embed_single_mode(mode: str, single: np.ndarray, cutoff: CutoffSpec) -> OperatorMatrix:
    """Lift a single-mode matrix to the two-mode space (identity on the other mode)."""
    return OperatorMatrix(cutoff, _mode_matrix(mode, single, cutoff))


def annihilator(mode: str, cutoff: CutoffSpec) -> OperatorMatrix:
    return embed_single_mode(mode, single_mode_annihilator(mode_cutoff(mode, cutoff)), cutoff)


def creator(mode: str, cutoff: CutoffSpec) -> OperatorMatrix:
    return annihilator(mode, cutoff).dag


def number_op(mode: str, cutoff: CutoffSpec) -> OperatorMatrix:
    nb, nc = _occupations(cutoff)
    occ = {"b": nb, "c": nc}.get(mode)
    if occ is None:
        raise ValueError(f"mode must be 'b' or 'c', got {mode!r}")
    return OperatorMatrix(cutoff, np.diag(occ.astype(complex)))


def total_number(cutoff: CutoffSpec) -> OperatorMatrix:
    nb, nc = _occupations(cutoff)
    return OperatorMatrix(cutoff, np.diag((nb + nc).astype(complex)))


def parity_c(cutoff: CutoffSpec) -> OperatorMatrix:
    """``exp(i pi c^dag c)`` built directly as ``diag((-1)**n_c)`` so it squares to I exactly."""
    _, nc = _occupations(cutoff)
    return OperatorMatrix(cutoff, np.diag(np.where(nc % 2 == 0, 1.0, -1.0).astype(complex)))


# -- interior subspace -------------------------------------------------------

@dataclass(frozen=True)
class InteriorSpec:
    """Safety margin below the cutoff.

    ``kind="rectangular"`` keeps ``n_b <= n_b_max - margin`` and
    ``n_c <= n_c_max - margin``; right for ladder commutators.
    ``kind="total"`` keeps ``n_b + n_c <= min(n_b_max, n_c_max) - margin``,
    i.e. only complete total-excitation blocks; needed whenever a
    number-conserving unitary (mode mixer, quantum time reversal) is
    conjugated, since the rectangular truncation clips the upper blocks.
    """

    margin: int = 2
    kind: str = "rectangular"

    def __post_init__(self):
        if int(self.margin) != self.margin or self.margin < 0:
            raise ValueError("margin must be a nonnegative integer")
        if self.kind not in ("rectangular", "total"):
            raise ValueError(f"unknown interior kind {self.kind!r}")

    def validate(self, cutoff: CutoffSpec) -> None:
        # margin == min cutoff still leaves the vacuum
        if self.margin > min(cutoff.n_b_max, cutoff.n_c_max):
            raise ValueError(f"margin {self.margin} too large for cutoff {cutoff}")


def interior_mask(cutoff: CutoffSpec, spec: InteriorSpec) -> np.ndarray:
    spec.validate(cutoff)
    nb, nc = _occupations(cutoff)
    if spec.kind == "total":
        return nb + nc <= min(cutoff.n_b_max, cutoff.n_c_max) - spec.margin
    return (nb <= cutoff.n_b_max - spec.margin) & (nc <= cutoff.n_c_max - spec.margin)


def interior_projector(cutoff: CutoffSpec, spec: InteriorSpec) -> OperatorMatrix:
    return OperatorMatrix(cutoff, np.diag(interior_mask(cutoff, spec).astype(complex)))


def interior_defect(op: OperatorMatrix, spec: InteriorSpec) -> float:
    """Max-abs entry of ``P op P`` with ``P`` the interior projector."""
    mask = interior_mask(op.cutoff, spec)
    block = op.entries[np.ix_(mask, mask)]
    return float(np.max(np.abs(block))) if block.size else 0.0


def interior_distance(a: OperatorMatrix, b: OperatorMatrix, spec: InteriorSpec) -> float:
    return interior_defect(a - b, spec)


# -- orthonormal families ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class BasisFamily:
    """Ordered list of states sharing one cutoff; the columns of ``U``.

    Orthonormality is not enforced at construction: measuring how far a
    family is from it is the job of :func:`gauge_defect`.
    """

    members: tuple[StateVector, ...]
    labels: tuple[int, ...] = field(default=())

    def __init__(self, members: Iterable[StateVector], labels: Sequence[int] | None = None):
        members = tuple(members)
        if not members:
            raise ValueError("a basis family needs at least one member")
        cut = members[0].cutoff
        for m in members[1:]:
            _check_same(cut, m.cutoff)
        labels = tuple(range(len(members))) if labels is None else tuple(labels)
        if len(labels) != len(members):
            raise ValueError("one label per member required")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "labels", labels)

    @property
    def cutoff(self) -> CutoffSpec:
        return self.members[0].cutoff

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> StateVector:
        return self.members[i]

    def matrix(self) -> np.ndarray:
        """``U``: members as columns, shape ``(dim, len(family))``."""
        return np.column_stack([m.amplitudes for m in self.members])

    def gram(self) -> np.ndarray:
        """``U^H U``."""
        u = self.matrix()
        return u.conj().T @ u

    def projector(self) -> OperatorMatrix:
        """``U U^H = sum_i |phi_i><phi_i|``."""
        u = self.matrix()
        return OperatorMatrix(self.cutoff, u @ u.conj().T)


def gauge_defect(fam: BasisFamily) -> float:
    g = fam.gram()
    return float(np.max(np.abs(g - np.eye(len(fam)))))


def projector_defect(fam: BasisFamily, probe: StateVector) -> float:
    """``<psi|psi> - sum_n |<phi_n|psi>|**2``; Bessel makes this >= 0."""
    _check_same(fam.cutoff, probe.cutoff)
    overlaps = fam.matrix().conj().T @ probe.amplitudes
    return float(np.vdot(probe.amplitudes, probe.amplitudes).real - np.sum(np.abs(overlaps) ** 2))


def expansion_residual(fam: BasisFamily, probe: StateVector) -> StateVector:
    """``|psi> - sum_n |phi_n><phi_n|psi>``."""
    _check_same(fam.cutoff, probe.cutoff)
    u = fam.matrix()
    return StateVector(probe.cutoff, probe.amplitudes - u @ (u.conj().T @ probe.amplitudes))


def is_self_adjoint(op: OperatorMatrix, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op.entries - op.entries.conj().T), initial=0.0) <= tol)


def fluctuation(
    op: OperatorMatrix, state: StateVector, *, tol: float = 1e-10, method: str = "centered"
) -> float:
    """Variance ``<F^2> - <F>^2`` of a self-adjoint ``op`` in a normalized state.

    ``method="centered"`` evaluates ``||(F - <F>) x||**2``, which equals the
    variance for self-adjoint ``F`` and avoids cancellation near eigenstates.
    ``method="raw"`` subtracts the two moments directly and clamps negatives
    inside :data:`FLUCTUATION_CLAMP`.
    """
    _check_same(op.cutoff, state.cutoff)
    if not is_self_adjoint(op, tol):
        raise ConventionError("fluctuation needs a self-adjoint operator")
    nrm = state.norm()
    if abs(nrm - 1.0) > tol:
        raise ConventionError(f"state is not normalized (norm {nrm!r})")
    x = state.amplitudes
    fx = op.entries @ x
    mean = np.vdot(x, fx).real
    if method == "centered":
        dev = fx - mean * x
        return float(np.vdot(dev, dev).real)
    if method != "raw":
        raise ValueError(f"unknown method {method!r}")
    var = np.vdot(fx, fx).real - mean * mean
    if var < 0:
        if var < -FLUCTUATION_CLAMP:
            raise NumericalHealthError(f"negative variance {var!r}")
        var = 0.0
    return float(var)


def fluctuation_matrix(op: OperatorMatrix, fam: BasisFamily) -> np.ndarray:
    """``U^H F^2 U - (U^H F U)(U^H F U)`` over a family.

    Vanishes when the family spans an invariant subspace of ``F``; a nonzero
    diagonal means the family diagonalizes ``F`` without resolving it.
    """
    _check_same(op.cutoff, fam.cutoff)
    u = fam.matrix()
    fu = op.entries @ u
    first = u.conj().T @ fu
    second = fu.conj().T @ fu if is_self_adjoint(op) else u.conj().T @ (op.entries @ fu)
    return second - first @ first


def same_ray(x: StateVector, y: StateVector) -> float:
    """``| |<x|y>| - |x||y| |``: zero iff the states agree up to a global phase."""
    return abs(abs(inner(x, y)) - x.norm() * y.norm())
