"""Covariance matrices and their correlation / standard-deviation split.

A covariance matrix R with strictly positive variances factors as
``R = Sigma C Sigma`` where ``Sigma = diag(sqrt(R_ii))`` and ``C`` is the
correlation matrix with unit diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateVarianceError, NotPositiveSemidefiniteError, ValidationError
from .spectral import (
    INFINITE,
    PSD_CLAMP_RTOL,
    SPD_RTOL,
    Infinite,
    SpectralDecomposition,
    kappa_from_extremes,
    sym_eigendecompose,
    validate_symmetric,
)

__all__ = ["CovarianceMatrix", "CorrStdPair", "decompose_corr_std", "recompose"]


@dataclass(frozen=True)
class CovarianceMatrix:
    """Validated dense symmetric positive semi-definite matrix.

    Construct through :meth:`from_array`, which checks symmetry and the PSD
    tolerance rules: eigenvalues in ``[-1e-10 * lam_1, 0)`` are rounding noise
    (clamped to zero, ``clamped`` flag set); anything lower raises.

    Attributes
    ----------
    matrix:
        The d x d entries.
    validated:
        True once the construction checks have run.
    min_eigenvalue, max_eigenvalue:
        Cached spectral extremes (min is post-clamping).
    clamped:
        Whether tiny negative eigenvalues were snapped to zero.
    circulant_row:
        First row when the matrix is circulant by construction; enables the
        DFT fast path for inverse application.
    """

    matrix: np.ndarray
    validated: bool
    min_eigenvalue: float
    max_eigenvalue: float
    clamped: bool = False
    circulant_row: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_array(cls, a: np.ndarray, circulant_row: np.ndarray | None = None) -> "CovarianceMatrix":
        a = validate_symmetric(a)
        if np.any(np.diag(a) < 0.0):
            raise NotPositiveSemidefiniteError(
                f"diagonal entry {np.diag(a).min():.6e} is negative"
            )
        w = np.linalg.eigvalsh(a)
        lam_min, lam_max = float(w[0]), float(w[-1])
        if lam_max > 0.0 and lam_min < -PSD_CLAMP_RTOL * lam_max:
            raise NotPositiveSemidefiniteError(
                f"matrix is not PSD: lam_min = {lam_min:.6e} "
                f"< -{PSD_CLAMP_RTOL:g} * lam_1 = {-PSD_CLAMP_RTOL * lam_max:.6e}"
            )
        clamped = lam_min < 0.0
        return cls(
            matrix=a,
            validated=True,
            min_eigenvalue=max(lam_min, 0.0),
            max_eigenvalue=lam_max,
            clamped=clamped,
            circulant_row=None if circulant_row is None else np.asarray(circulant_row, float),
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def condition_number(self) -> float | Infinite:
        if self.min_eigenvalue == 0.0:
            return 1.0 if self.max_eigenvalue == 0.0 else INFINITE
        return kappa_from_extremes(self.max_eigenvalue, self.min_eigenvalue)

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        """Spectral decomposition, computed once and cached."""
        return sym_eigendecompose(self.matrix)

    def is_positive_definite(self, rtol: float = SPD_RTOL) -> bool:
        return self.min_eigenvalue > rtol * max(self.max_eigenvalue, 0.0)

    def std_devs(self) -> np.ndarray:
        """Diagonal standard deviations sqrt(R_ii)."""
        return np.sqrt(np.diag(self.matrix))


@dataclass(frozen=True)
class CorrStdPair:
    """Correlation matrix plus the diagonal standard deviations.

    Invariants: unit diagonal, |correlation| <= 1 (+1e-12 rounding slack),
    strictly positive standard deviations.
    """

    correlations: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self):
        c = validate_symmetric(self.correlations)
        s = np.asarray(self.std_devs, dtype=float)
        if s.ndim != 1 or s.size != c.shape[0]:
            raise ValidationError("std_devs length must match correlation dimension")
        if np.any(s <= 0.0):
            raise DegenerateVarianceError("standard deviations must be strictly positive")
        if np.any(np.abs(np.diag(c) - 1.0) > 0.0):
            raise ValidationError("correlation matrix must have exact unit diagonal")
        if np.abs(c).max() > 1.0 + 1e-12:
            raise ValidationError(
                f"correlation magnitude {np.abs(c).max():.15f} exceeds 1 beyond tolerance"
            )
        object.__setattr__(self, "correlations", c)
        object.__setattr__(self, "std_devs", s)

    @property
    def dim(self) -> int:
        return self.std_devs.size


def decompose_corr_std(r: CovarianceMatrix) -> CorrStdPair:
    """Split a covariance matrix into correlations and standard deviations.

    Requires every variance to be strictly positive; rank-deficient matrices
    with a zero variance are rejected rather than patched.
    """
    diag = np.diag(r.matrix)
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise DegenerateVarianceError(
            f"variance at index {bad} is {diag[bad]:.6e}; decomposition needs positive variances"
        )
    sigma = np.sqrt(diag)
    corr = r.matrix / np.outer(sigma, sigma)
    np.fill_diagonal(corr, 1.0)
    return CorrStdPair(correlations=corr, std_devs=sigma)


def recompose(pair: CorrStdPair) -> CovarianceMatrix:
    """Rebuild the covariance matrix ``Sigma C Sigma`` from a pair."""
    s = pair.std_devs
    return CovarianceMatrix.from_array(pair.correlations * np.outer(s, s))
