"""Dense matrix exponential by scaling and squaring around a Taylor core."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockError, OperatorMatrix

_EPS = np.finfo(float).eps
# scaled matrices are pushed below this 1-norm before the series is summed
_SCALED_NORM = 0.5
_MAX_TERMS = 60


class ExpmError(FockError):
    """The exponential did not converge within the allowed scaling."""


@dataclass(frozen=True)
class ExpmOptions:
    tolerance: float = 1e-13
    max_scaling: int = 64

    def __post_init__(self):
        if not self.tolerance >= _EPS:
            raise ValueError(f"tolerance must be >= machine epsilon, got {self.tolerance!r}")
        if int(self.max_scaling) != self.max_scaling or self.max_scaling < 1:
            raise ValueError("max_scaling must be a positive integer")


@dataclass(frozen=True)
class ExpmInfo:
    squarings: int
    terms: int
    norm: float
    # truncation error bound after squaring
    error_bound: float


def expm_array(a: np.ndarray, opts: ExpmOptions | None = None) -> tuple[np.ndarray, ExpmInfo]:
    opts = opts or ExpmOptions()
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ExpmError("expm input has non-finite entries")
    n = a.shape[0]
    norm = float(np.linalg.norm(a, 1)) if n else 0.0
    if norm == 0.0:
        return np.eye(n, dtype=complex), ExpmInfo(0, 0, 0.0, 0.0)

    s = max(0, math.ceil(math.log2(norm / _SCALED_NORM)))
    if s > opts.max_scaling:
        raise ExpmError(
            f"1-norm {norm:.6g} needs {s} squarings, more than max_scaling={opts.max_scaling}"
        )
    x = a / (2.0 ** s)
    xnorm = norm / (2.0 ** s)

    total = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    tnorm = 1.0
    remainder = math.inf
    k = 0
    while k < _MAX_TERMS:
        k += 1
        term = term @ x / k
        total += term
        tnorm = tnorm * xnorm / k
        # tail of the series after term k, geometric bound
        ratio = xnorm / (k + 2)
        remainder = tnorm * xnorm / (k + 1) / (1.0 - ratio)
        # squaring multiplies the series error by about 2**s
        if remainder <= opts.tolerance * math.exp(-xnorm) / 2.0**s:
            break
    else:
        raise ExpmError(f"Taylor series did not reach tolerance (remainder {remainder:.3g})")

    for _ in range(s):
        total = total @ total
    err = (2.0 ** s) * remainder * math.exp(xnorm) + (2.0 ** s) * _EPS
    return total, ExpmInfo(s, k, norm, err)


def expm(g: OperatorMatrix, opts: ExpmOptions | None = None) -> OperatorMatrix:
    out, _ = expm_array(g.entries, opts)
    return OperatorMatrix(g.cutoff, out)
