"""Dense symmetric spectral linear algebra.

Eigendecompositions with a fixed descending order, condition numbers with an
explicit infinite tag for singular matrices, and the fast DFT eigenvalue path
for symmetric circulant matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveSemidefiniteError, SingularMatrixError, ValidationError

__all__ = [
    "INFINITE",
    "Infinite",
    "SpectralDecomposition",
    "sym_eigendecompose",
    "condition_number",
    "kappa_from_extremes",
    "circulant_eigenvalues",
    "spd_inverse_apply",
    "validate_symmetric",
]

SYMMETRY_RTOL = 1e-12
# Eigenvalues in [-PSD_CLAMP_RTOL * lam_1, 0) are rounding noise and clamp to 0.
PSD_CLAMP_RTOL = 1e-10
# Strict positive definiteness for inverse application.
SPD_RTOL = 1e-12


class Infinite:
    """Tag for the condition number of a singular PSD matrix.

    Compares greater than every real number so target checks like
    ``kappa_max < kappa`` read naturally.  Singleton: use :data:`INFINITE`.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __eq__(self, other) -> bool:
        return isinstance(other, Infinite)

    def __hash__(self) -> int:
        return hash("covrecon.INFINITE")

    def __gt__(self, other) -> bool:
        return not isinstance(other, Infinite)

    def __ge__(self, other) -> bool:
        return True

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return isinstance(other, Infinite)


INFINITE = Infinite()


def validate_symmetric(a: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Return ``a`` as a float array after checking square symmetry.

    Raises
    ------
    ValidationError
        If ``a`` is not square or symmetric within ``rtol * max|entry|``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValidationError("matrix dimension must be at least 1")
    scale = np.abs(a).max() if a.size else 0.0
    asym = np.abs(a - a.T).max()
    if asym > rtol * max(scale, 1e-300):
        raise ValidationError(
            f"matrix is not symmetric: max |a - a.T| = {asym:.3e} "
            f"exceeds {rtol:g} * max|entry| = {rtol * scale:.3e}"
        )
    return a


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigenvectors and descending eigenvalues of a symmetric matrix.

    Attributes
    ----------
    eigenvalues:
        Length-d vector, sorted descending.
    eigenvectors:
        d x d matrix whose column k pairs with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=float)
        if w.ndim != 1 or v.shape != (w.size, w.size):
            raise ValidationError("eigenvalues/eigenvectors shapes are inconsistent")
        if np.any(np.diff(w) > 0):
            raise ValidationError("eigenvalues must be sorted descending")
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        """Assemble V diag(eigenvalues) V^T."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T

    def apply_function(self, fn, v: np.ndarray) -> np.ndarray:
        """Apply V diag(fn(eigenvalues)) V^T to a vector or matrix of columns."""
        coeffs = self.eigenvectors.T @ np.asarray(v, dtype=float)
        scale = fn(self.eigenvalues)
        scaled = scale[:, None] * coeffs if coeffs.ndim == 2 else scale * coeffs
        return self.eigenvectors @ scaled


def sym_eigendecompose(s: np.ndarray, rtol: float = SYMMETRY_RTOL) -> SpectralDecomposition:
    """Eigendecompose a symmetric matrix with descending eigenvalue order.

    Ordering ties are broken stably (original LAPACK order preserved within
    equal eigenvalues) so repeated calls on the same input are deterministic.
    """
    s = validate_symmetric(s, rtol)
    w, v = np.linalg.eigh(s)
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def kappa_from_extremes(lam_max: float, lam_min: float) -> float | Infinite:
    """Condition number from extreme eigenvalues, with PSD tolerance rules.

    Small negative ``lam_min`` within ``PSD_CLAMP_RTOL * lam_max`` is treated
    as zero (singular, returns :data:`INFINITE`); anything below that is a
    genuine PSD violation.
    """
    if lam_max <= 0.0:
        if lam_max < -PSD_CLAMP_RTOL * abs(lam_max):
            raise NotPositiveSemidefiniteError(f"largest eigenvalue {lam_max:.6e} is negative")
        return 1.0 if lam_max == lam_min else INFINITE
    if lam_min < -PSD_CLAMP_RTOL * lam_max:
        raise NotPositiveSemidefiniteError(
            f"matrix is not PSD: smallest eigenvalue {lam_min:.6e} "
            f"< -{PSD_CLAMP_RTOL:g} * lam_1 = {-PSD_CLAMP_RTOL * lam_max:.6e}"
        )
    if lam_min <= 0.0:
        if lam_min < 0.0:
            warnings.warn(
                f"eigenvalue {lam_min:.3e} within rounding tolerance of zero; clamped to 0",
                RuntimeWarning,
                stacklevel=3,
            )
        return INFINITE
    return lam_max / lam_min


def condition_number(s: np.ndarray) -> float | Infinite:
    """L2 condition number lam_1 / lam_d of a symmetric PSD matrix.

    Returns :data:`INFINITE` for singular input (smallest eigenvalue zero or
    negative within rounding tolerance).
    """
    s = validate_symmetric(s)
    w = np.linalg.eigvalsh(s)
    return kappa_from_extremes(float(w[-1]), float(w[0]))


def circulant_eigenvalues(first_row: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Eigenvalues of the symmetric circulant matrix with the given first row.

    Computed directly with a discrete Fourier transform; returned sorted
    descending.  The row must satisfy ``row[k] == row[d-k]`` so the matrix is
    symmetric and the DFT is real.
    """
    row = np.asarray(first_row, dtype=float)
    if row.ndim != 1 or row.size < 1:
        raise ValidationError("first_row must be a nonempty vector")
    scale = max(np.abs(row).max(), 1e-300)
    mirrored = row[np.mod(-np.arange(row.size), row.size)]
    asym = np.abs(row - mirrored).max()
    if asym > rtol * scale:
        raise ValidationError(
            f"row does not define a symmetric circulant matrix: "
            f"max |row[k] - row[d-k]| = {asym:.3e}"
        )
    spectrum = np.fft.fft(row)
    imag_max = np.abs(spectrum.imag).max()
    if imag_max > 1e-10 * max(1.0, np.abs(spectrum.real).max()):
        raise ValidationError(f"DFT of symmetric row has imaginary residue {imag_max:.3e}")
    return np.sort(spectrum.real)[::-1].copy()


def spd_inverse_apply(s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Solve ``s @ x = v`` for strictly positive definite symmetric ``s``.

    Uses the spectral decomposition; raises SingularMatrixError when the
    smallest eigenvalue is at or below ``SPD_RTOL * lam_1``.
    """
    dec = sym_eigendecompose(s)
    w = dec.eigenvalues
    if w[-1] <= SPD_RTOL * max(w[0], 0.0) or w[0] <= 0.0:
        raise SingularMatrixError(
            f"matrix is numerically singular: lam_d = {w[-1]:.6e}, lam_1 = {w[0]:.6e}"
        )
    v = np.asarray(v, dtype=float)
    return dec.eigenvectors @ ((dec.eigenvectors.T @ v) / w)
