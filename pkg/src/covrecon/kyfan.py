"""Ky Fan p-k norms and the nearest-matrix view of the minimum eigenvalue method.

Raising all eigenvalues below ``T = lam_1 / kappa_max`` to T is the minimizer
of ``|R - X|`` in the Ky Fan 1-d (trace) norm over matrices with condition
number ``kappa_max``, provided ``kappa_max >= d - l + 1`` where ``l`` is the
first (descending, 1-based) eigenvalue index at or below T.  The checker
reports the bound and both the non-strict and strict readings of that
condition; a randomized search oracle guards the optimality claim at small
dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceMatrix
from .errors import InvalidParamsError, InvalidTargetError, NoOpRequestError
from .recondition import (
    THRESHOLD_TIE_RTOL,
    min_eigenvalue_threshold,
    minimum_eigenvalue,
)
from .spectral import sym_eigendecompose, validate_symmetric

__all__ = [
    "KyFanParams",
    "ky_fan_norm",
    "MEKyFanCondition",
    "me_kyfan_condition",
    "minimal_satisfying_kappa_max",
    "kyfan_minimizer_oracle",
]


@dataclass(frozen=True)
class KyFanParams:
    """Order p >= 1 and singular-value count k in [1, d]."""

    p: float = 1.0
    k: int = 1

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise InvalidParamsError(f"p must be >= 1, got {self.p}")
        if self.k < 1:
            raise InvalidParamsError(f"k must be >= 1, got {self.k}")


def ky_fan_norm(x: np.ndarray, params: KyFanParams) -> float:
    """Ky Fan p-k norm: (sum of the k largest singular values**p)**(1/p).

    For symmetric input the singular values are the absolute eigenvalues.
    """
    x = validate_symmetric(x)
    if params.k > x.shape[0]:
        raise InvalidParamsError(f"k = {params.k} exceeds dimension {x.shape[0]}")
    singular = np.sort(np.abs(np.linalg.eigvalsh(x)))[::-1]
    top = singular[: params.k]
    if params.p == 1.0:
        return float(top.sum())
    return float((top**params.p).sum() ** (1.0 / params.p))


def trace_norm(x: np.ndarray) -> float:
    """Ky Fan 1-d norm (sum of all singular values)."""
    x = validate_symmetric(x)
    return ky_fan_norm(x, KyFanParams(p=1.0, k=x.shape[0]))


@dataclass(frozen=True)
class MEKyFanCondition:
    """Outcome of the equivalence condition check.

    ``l`` is the first 1-based descending eigenvalue index with
    ``lam_l <= T`` (ties within rounding of T count as below), ``bound`` is
    ``d - l + 1``.  ``satisfied`` uses the non-strict reading
    ``kappa_max >= bound``; ``strictly_satisfied`` requires ``>``.
    """

    satisfied: bool
    strictly_satisfied: bool
    l: int
    bound: int
    threshold: float
    kappa_max: float


def me_kyfan_condition(r: CovarianceMatrix, kappa_max: float) -> MEKyFanCondition:
    """Check whether ME at this target is the Ky Fan 1-d nearest matrix."""
    if not (kappa_max > 1.0):
        raise InvalidTargetError(f"kappa_max must be > 1, got {kappa_max}")
    if not (kappa_max < r.condition_number):
        raise NoOpRequestError(
            f"kappa_max = {kappa_max:g} does not reduce the condition number "
            f"{r.condition_number!r}"
        )
    w = r.decomposition.eigenvalues
    threshold = min_eigenvalue_threshold(float(w[0]), kappa_max)
    below = np.nonzero(w <= threshold + THRESHOLD_TIE_RTOL * w[0])[0]
    l = int(below[0]) + 1
    bound = r.dim - l + 1
    return MEKyFanCondition(
        satisfied=kappa_max >= bound,
        strictly_satisfied=kappa_max > bound,
        l=l,
        bound=bound,
        threshold=threshold,
        kappa_max=kappa_max,
    )


def minimal_satisfying_kappa_max(r: CovarianceMatrix, strict: bool = False) -> int:
    """Smallest integer kappa_max for which the equivalence condition holds."""
    upper = r.dim + 2
    for kappa_max in range(2, upper):
        if not (kappa_max < r.condition_number):
            break
        cond = me_kyfan_condition(r, float(kappa_max))
        if cond.strictly_satisfied if strict else cond.satisfied:
            return kappa_max
    raise InvalidParamsError("no integer target below the condition number satisfies the bound")


def kyfan_minimizer_oracle(
    r: CovarianceMatrix,
    kappa_max: float,
    trials: int = 10_000,
    seed: int = 0,
) -> float:
    """Randomized search for the nearest matrix with the target condition number.

    Samples symmetric PSD candidates with condition number exactly
    ``kappa_max`` (spectra drawn around the original, in the original
    eigenbasis or a random orthogonal one, plus perturbations of the ME
    spectrum) and returns the smallest trace-norm distance seen.  The ME
    result itself is always included as a candidate, so the return value never
    exceeds ``|R - R_ME|`` and equals it exactly when ME is optimal.

    Restricted to small matrices (d <= 4) where the search saturates.
    """
    d = r.dim
    if d > 4:
        raise InvalidParamsError(f"oracle is limited to d <= 4, got d = {d}")
    if trials < 1:
        raise InvalidParamsError("trials must be positive")
    dec = r.decomposition
    w = dec.eigenvalues
    me_spectrum = np.maximum(w, min_eigenvalue_threshold(float(w[0]), kappa_max))
    report = minimum_eigenvalue(r, kappa_max)
    best = trace_norm(r.matrix - report.result.matrix)

    rng = np.random.Generator(np.random.PCG64(seed))
    lam_1 = float(w[0])
    for trial in range(trials):
        if trial % 2 == 0:
            top = lam_1 * np.exp(rng.uniform(-0.5, 0.5))
            interior = rng.uniform(top / kappa_max, top, size=d - 2) if d > 2 else np.empty(0)
            spectrum = np.sort(np.concatenate([[top, top / kappa_max], interior]))[::-1]
        else:
            spectrum = me_spectrum * np.exp(rng.normal(0.0, 0.05, size=d))
            spectrum = np.sort(spectrum)[::-1]
            spectrum = np.clip(spectrum, spectrum[0] / kappa_max, spectrum[0])
            spectrum[-1] = spectrum[0] / kappa_max
        if trial % 3 == 0:
            q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        else:
            q = dec.eigenvectors
        candidate = (q * spectrum) @ q.T
        best = min(best, trace_norm(r.matrix - candidate))
    return best
