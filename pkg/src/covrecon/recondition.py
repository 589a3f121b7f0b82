"""Covariance-matrix modification methods and their analytic consequences.

Three modifications are implemented:

* ridge regression (``RR``): add ``delta * I`` with delta chosen so the result
  has condition number exactly ``kappa_max``;
* minimum eigenvalue (``ME``): raise all eigenvalues below the threshold
  ``T = lam_1 / kappa_max`` to ``T``, keeping the eigenvectors;
* multiplicative variance inflation (``MVI``): scale by ``alpha**2``, which
  changes variances but neither correlations nor the condition number.

Each method also has a closed-form update of the standard deviations and a
diagonal spectrum that corrects the inverse: ``R_mod^-1 = R^-1 - V diag(c) V^T``
for RR/ME, and ``R_mod^-1 = R^-1 / alpha**2`` for MVI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .covariance import CorrStdPair, CovarianceMatrix, decompose_corr_std
from .errors import (
    DimensionMismatchError,
    InvalidTargetError,
    NoOpRequestError,
    NotInvertibleError,
    ValidationError,
)
from .spectral import Infinite, SpectralDecomposition, validate_symmetric

__all__ = [
    "Method",
    "RR",
    "ME",
    "MVI",
    "ReconditionReport",
    "InverseCorrectionSpectrum",
    "ridge_delta",
    "ridge_regression",
    "minimum_eigenvalue",
    "variance_inflation",
    "ridge_sigma_update",
    "min_eigenvalue_sigma_update",
    "equivalent_inflation_factor",
    "inverse_correction_spectrum",
    "correlation_change_report",
    "min_eigenvalue_threshold",
    "gamma_from_threshold",
]

Method = Literal["RR", "ME", "MVI"]
RR: Method = "RR"
ME: Method = "ME"
MVI: Method = "MVI"

# Eigenvalues this close (relative to lam_1) to the threshold count as below it,
# so the raised set is deterministic under floating-point ties.
THRESHOLD_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ReconditionReport:
    """Everything produced by one modification run.

    ``parameter`` is delta for RR, the threshold T for ME, alpha for MVI.
    ``gamma`` is the diagonal of the low-rank eigenvalue update (zero for
    RR/MVI).  ``correlation_delta`` is ``(C - C_mod) o sign(C)``; positive
    entries mean the modification shrank the correlation magnitude.
    """

    method: Method
    kappa_before: float | Infinite
    kappa_after: float
    parameter: float
    gamma: np.ndarray
    result: CovarianceMatrix
    sigma_before: np.ndarray
    sigma_after: np.ndarray
    correlation_delta: np.ndarray


@dataclass(frozen=True)
class InverseCorrectionSpectrum:
    """Diagonal correction turning R^-1 into R_mod^-1.

    For RR entries are ``delta / (lam_i (lam_i + delta))``; for ME they are
    ``(T - lam_i) / (T lam_i)`` below the threshold and zero above; for MVI the
    diagonal is zero and ``uniform_factor`` is ``1 / alpha**2``.
    """

    method: Method
    diag_correction: np.ndarray
    uniform_factor: float


def _check_target(kappa_max: float, kappa: float | Infinite) -> None:
    if not np.isfinite(kappa_max) or kappa_max <= 1.0:
        raise InvalidTargetError(f"kappa_max must be > 1, got {kappa_max!r}")
    if not (kappa_max < kappa):
        raise NoOpRequestError(
            f"kappa_max = {kappa_max:g} does not reduce the condition number {kappa!r}"
        )


def ridge_delta(lambda_1: float, lambda_d: float, kappa_max: float) -> float:
    """Ridge increment delta = (lam_1 - lam_d * kappa_max) / (kappa_max - 1).

    Chosen so that (lam_1 + delta) / (lam_d + delta) equals ``kappa_max``.
    """
    if not (lambda_1 > lambda_d >= 0.0):
        raise ValidationError(
            f"need lam_1 > lam_d >= 0, got lam_1 = {lambda_1:g}, lam_d = {lambda_d:g}"
        )
    kappa = lambda_1 / lambda_d if lambda_d > 0.0 else Infinite()
    _check_target(kappa_max, kappa)
    return (lambda_1 - lambda_d * kappa_max) / (kappa_max - 1.0)


def ridge_regression(r: CovarianceMatrix, kappa_max: float) -> ReconditionReport:
    """Recondition by adding delta * I (ridge regression method)."""
    w = r.decomposition.eigenvalues
    lam_1, lam_d = float(w[0]), max(float(w[-1]), 0.0)
    delta = ridge_delta(lam_1, lam_d, kappa_max)
    result = CovarianceMatrix.from_array(
        r.matrix + delta * np.eye(r.dim),
        circulant_row=None if r.circulant_row is None else _bump_row(r.circulant_row, delta),
    )
    sigma_before = r.std_devs()
    sigma_after = ridge_sigma_update(sigma_before, delta)
    return ReconditionReport(
        method=RR,
        kappa_before=r.condition_number,
        kappa_after=(lam_1 + delta) / (lam_d + delta),
        parameter=delta,
        gamma=np.zeros(r.dim),
        result=result,
        sigma_before=sigma_before,
        sigma_after=sigma_after,
        correlation_delta=_correlation_delta(r, result),
    )


def _bump_row(row: np.ndarray, delta: float) -> np.ndarray:
    out = row.copy()
    out[0] += delta
    return out


def min_eigenvalue_threshold(lambda_1: float, kappa_max: float) -> float:
    """Eigenvalue floor T = lam_1 / kappa_max."""
    return lambda_1 / kappa_max


def gamma_from_threshold(eigenvalues: np.ndarray, threshold: float) -> np.ndarray:
    """Diagonal update Gamma(k) = max(T - lam_k, 0)."""
    return np.maximum(threshold - eigenvalues, 0.0)


def minimum_eigenvalue(r: CovarianceMatrix, kappa_max: float) -> ReconditionReport:
    """Recondition by raising eigenvalues below T = lam_1 / kappa_max to T.

    The result is assembled as ``R + V Gamma V^T`` so the unmodified part of R
    is preserved bit for bit.
    """
    _check_target(kappa_max, r.condition_number)
    dec = r.decomposition
    w = dec.eigenvalues
    threshold = min_eigenvalue_threshold(float(w[0]), kappa_max)
    gamma = gamma_from_threshold(w, threshold)
    v = dec.eigenvectors
    update = (v * gamma) @ v.T
    result = CovarianceMatrix.from_array(r.matrix + 0.5 * (update + update.T))
    sigma_before = r.std_devs()
    sigma_after = min_eigenvalue_sigma_update(r, dec, gamma)
    # kappa_max < kappa guarantees lam_d < T, so the new smallest eigenvalue is T.
    return ReconditionReport(
        method=ME,
        kappa_before=r.condition_number,
        kappa_after=float(w[0]) / threshold,
        parameter=threshold,
        gamma=gamma,
        result=result,
        sigma_before=sigma_before,
        sigma_after=sigma_after,
        correlation_delta=_correlation_delta(r, result),
    )


def variance_inflation(r: CovarianceMatrix, alpha: float) -> ReconditionReport:
    """Multiply the covariance matrix by alpha**2 (variance inflation).

    Leaves correlations, rank and condition number unchanged, so it requires a
    full-rank matrix (the inflated matrix must be invertible to be useful).
    """
    if not (alpha > 0.0 and np.isfinite(alpha)):
        raise InvalidTargetError(f"inflation factor must be positive, got {alpha!r}")
    if not r.is_positive_definite():
        raise NotInvertibleError(
            "variance inflation requires an invertible (full-rank) covariance matrix"
        )
    result = CovarianceMatrix.from_array(
        alpha**2 * r.matrix,
        circulant_row=None if r.circulant_row is None else alpha**2 * r.circulant_row,
    )
    sigma_before = r.std_devs()
    kappa = r.condition_number
    return ReconditionReport(
        method=MVI,
        kappa_before=kappa,
        kappa_after=float(kappa),
        parameter=alpha,
        gamma=np.zeros(r.dim),
        result=result,
        sigma_before=sigma_before,
        sigma_after=alpha * sigma_before,
        # Correlations are unchanged by a scalar scaling (Definition of MVI).
        correlation_delta=np.zeros((r.dim, r.dim)),
    )


def ridge_sigma_update(sigma: np.ndarray, delta: float) -> np.ndarray:
    """Standard deviations after RR: sqrt(sigma_i**2 + delta), entrywise."""
    if delta < 0.0:
        raise ValidationError(f"delta must be nonnegative, got {delta:g}")
    sigma = np.asarray(sigma, dtype=float)
    return np.sqrt(sigma**2 + delta)


def min_eigenvalue_sigma_update(
    r: CovarianceMatrix, decomp: SpectralDecomposition, gamma: np.ndarray
) -> np.ndarray:
    """Standard deviations after ME.

    sigma_ME(i) = sqrt(R(i,i) + sum_k V(i,k)**2 Gamma(k)).  Bounded between
    sigma(i) and sqrt(sigma(i)**2 + T - lam_d).
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0.0):
        raise ValidationError("gamma entries must be nonnegative")
    bump = (decomp.eigenvectors**2) @ gamma
    return np.sqrt(np.diag(r.matrix) + bump)


def equivalent_inflation_factor(
    sigma_before: np.ndarray, sigma_after: np.ndarray
) -> np.ndarray:
    """Entrywise sigma_after / sigma_before.

    For a constant-variance matrix all entries coincide, giving the single
    multiplicative inflation factor that produces the same change.
    """
    before = np.asarray(sigma_before, dtype=float)
    after = np.asarray(sigma_after, dtype=float)
    if before.shape != after.shape:
        raise DimensionMismatchError(
            f"sigma vectors differ in length: {before.shape} vs {after.shape}"
        )
    if np.any(before <= 0.0) or np.any(after <= 0.0):
        raise ValidationError("standard deviations must be strictly positive")
    return after / before


def inverse_correction_spectrum(
    report: ReconditionReport, decomp: SpectralDecomposition
) -> InverseCorrectionSpectrum:
    """Diagonal spectrum c with R_mod^-1 = R^-1 - V diag(c) V^T (RR/ME).

    Only defined for full-rank originals; for MVI the correction is the
    uniform factor 1 / alpha**2 with a zero diagonal.
    """
    w = decomp.eigenvalues
    if w[-1] <= 0.0 or isinstance(report.kappa_before, Infinite):
        raise NotInvertibleError(
            "inverse correction requires a full-rank original matrix"
        )
    if report.method == RR:
        delta = report.parameter
        diag = delta / (w * (w + delta))
        return InverseCorrectionSpectrum(method=RR, diag_correction=diag, uniform_factor=1.0)
    if report.method == ME:
        threshold = report.parameter
        below = w <= threshold + THRESHOLD_TIE_RTOL * w[0]
        diag = np.where(below, np.maximum((threshold - w) / (threshold * w), 0.0), 0.0)
        return InverseCorrectionSpectrum(method=ME, diag_correction=diag, uniform_factor=1.0)
    if report.method == MVI:
        alpha = report.parameter
        return InverseCorrectionSpectrum(
            method=MVI,
            diag_correction=np.zeros(w.size),
            uniform_factor=1.0 / alpha**2,
        )
    raise ValidationError(f"unknown method {report.method!r}")


def correlation_change_report(c_before: np.ndarray, c_after: np.ndarray) -> np.ndarray:
    """Signed correlation change (C - C_mod) o sign(C), Hadamard product.

    Positive entries mean the modification reduced the correlation magnitude
    (while keeping its sign); the diagonal is zero.
    """
    c_before = validate_symmetric(c_before)
    c_after = validate_symmetric(c_after)
    if c_before.shape != c_after.shape:
        raise DimensionMismatchError(
            f"correlation matrices differ in dimension: {c_before.shape} vs {c_after.shape}"
        )
    for name, c in (("before", c_before), ("after", c_after)):
        if np.abs(np.diag(c) - 1.0).max() > 1e-12:
            raise ValidationError(f"{name} matrix must have unit diagonal")
    return (c_before - c_after) * np.sign(c_before)


def _correlation_delta(r: CovarianceMatrix, result: CovarianceMatrix) -> np.ndarray:
    pair_before = decompose_corr_std(r)
    pair_after = decompose_corr_std(result)
    return correlation_change_report(pair_before.correlations, pair_after.correlations)
