"""Test-matrix construction, Gaussian sampling and CSV matrix I/O.

The SOAR (second-order auto-regressive) correlation family on a unit circle is
the main construction: ``rho(r) = (1 + r/L) exp(-r/L)`` evaluated at either the
chordal distance ``2 sin(theta/2)`` (default; calibrated so the 200-point,
L = 0.2 matrix has condition number 81121.7) or the great-circle arc ``theta``.

Sampling is deterministic and portable: a PCG64 bit generator drives an
explicit Box-Muller transform, and correlated draws use the spectral square
root ``R^(1/2) = V Lambda^(1/2) V^T``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .covariance import CovarianceMatrix
from .errors import InsufficientSamplesError, MatrixParseError, ValidationError

__all__ = [
    "DistanceConvention",
    "ARC",
    "CHORD",
    "SoarSpec",
    "SampleSet",
    "soar_matrix",
    "gaussian_samples",
    "standard_normals",
    "sample_covariance",
    "truth_signal",
    "TRUTH_FREQUENCIES",
    "load_matrix_csv",
    "save_matrix_csv",
]

DistanceConvention = Literal["ARC", "CHORD"]
ARC: DistanceConvention = "ARC"
CHORD: DistanceConvention = "CHORD"

# Amplitudes and integer frequencies of the five-scale truth signal.
TRUTH_AMPLITUDES = (4.0, -5.1, 1.5, -3.0, 0.75)
TRUTH_FREQUENCIES = (1, 7, 12, 15, 45)


@dataclass(frozen=True)
class SoarSpec:
    """Parameters of a SOAR covariance matrix on the unit circle.

    ``lengthscale`` is in the same units as the chosen distance (the circle
    has radius 1); ``variance`` is constant across all grid points.
    """

    n: int = 200
    lengthscale: float = 0.2
    variance: float = 5.0
    distance_convention: DistanceConvention = CHORD

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"grid size must be at least 2, got {self.n}")
        if not (self.lengthscale > 0.0):
            raise ValidationError(f"lengthscale must be positive, got {self.lengthscale}")
        if not (self.variance > 0.0):
            raise ValidationError(f"variance must be positive, got {self.variance}")
        if self.distance_convention not in (ARC, CHORD):
            raise ValidationError(f"unknown distance convention {self.distance_convention!r}")


@dataclass(frozen=True)
class SampleSet:
    """Rows of Gaussian draws plus the seed and source covariance used."""

    samples: np.ndarray
    seed: int
    source_covariance: CovarianceMatrix | None = None

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def soar_row(spec: SoarSpec) -> np.ndarray:
    """First row of the SOAR covariance matrix for ``spec``."""
    k = np.arange(spec.n)
    separation = np.minimum(k, spec.n - k)
    theta = 2.0 * np.pi * separation / spec.n
    if spec.distance_convention == ARC:
        dist = theta
    else:
        dist = 2.0 * np.sin(theta / 2.0)
    ratio = dist / spec.lengthscale
    return spec.variance * (1.0 + ratio) * np.exp(-ratio)


def soar_matrix(spec: SoarSpec) -> CovarianceMatrix:
    """Circulant SOAR covariance matrix on an n-point unit-circle grid."""
    row = soar_row(spec)
    idx = np.mod(np.arange(spec.n)[:, None] - np.arange(spec.n)[None, :], spec.n)
    return CovarianceMatrix.from_array(row[idx], circulant_row=row)


def standard_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Standard normal draws via the Box-Muller transform of PCG64 uniforms.

    The transform is part of the reproducibility contract: pairs (u1, u2) from
    ``rng.random()`` map to ``sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)``.
    """
    half = (count + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2), radius * np.sin(2.0 * np.pi * u2)])
    return z[:count]


def gaussian_samples(r: CovarianceMatrix, m: int, seed: int) -> SampleSet:
    """Draw ``m`` zero-mean Gaussian vectors with covariance ``r``.

    Deterministic for a fixed seed.  Draws are built as ``R^(1/2) z`` with the
    symmetric spectral square root; eigenvalues within rounding of zero are
    clipped so rank-deficient covariances sample on their range.
    """
    if m < 1:
        raise InsufficientSamplesError(f"sample count must be positive, got {m}")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = standard_normals(rng, m * r.dim).reshape(m, r.dim)
    dec = r.decomposition
    w = np.clip(dec.eigenvalues, 0.0, None)
    sqrt_r = (dec.eigenvectors * np.sqrt(w)) @ dec.eigenvectors.T
    return SampleSet(samples=z @ sqrt_r, seed=seed, source_covariance=r)


def sample_covariance(samples: SampleSet | np.ndarray) -> CovarianceMatrix:
    """Unbiased sample covariance (1/(m-1) about the sample mean)."""
    x = samples.samples if isinstance(samples, SampleSet) else np.asarray(samples, float)
    if x.ndim != 2:
        raise ValidationError(f"samples must be a 2-d array, got shape {x.shape}")
    m = x.shape[0]
    if m < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {m}")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / (m - 1)
    return CovarianceMatrix.from_array(0.5 * (cov + cov.T))


def truth_signal(n: int = 200) -> np.ndarray:
    """Five-scale sinusoidal truth state on an ``n``-point grid.

    x(k) = 4 sin(pi k / h) - 5.1 sin(7 pi k / h) + 1.5 sin(12 pi k / h)
           - 3 sin(15 pi k / h) + 0.75 sin(45 pi k / h),  h = n / 2,

    evaluated at k = 0..n-1.  With n = 200 this is the standard experiment
    signal with integer frequencies 1, 7, 12, 15, 45.
    """
    if n < 1:
        raise ValidationError(f"signal length must be positive, got {n}")
    k = np.arange(n)
    half = n / 2.0
    x = np.zeros(n)
    for amp, freq in zip(TRUTH_AMPLITUDES, TRUTH_FREQUENCIES):
        x += amp * np.sin(freq * np.pi * k / half)
    return x


def save_matrix_csv(r: CovarianceMatrix | np.ndarray, path) -> None:
    """Write a matrix as headerless CSV, one row per line, 17 significant digits."""
    a = r.matrix if isinstance(r, CovarianceMatrix) else np.asarray(r, dtype=float)
    with open(path, "w", newline="") as fh:
        for row in a:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_matrix_csv(path) -> CovarianceMatrix:
    """Load a square symmetric PSD matrix from headerless CSV.

    Malformed files raise :class:`MatrixParseError` naming the offending line
    and column; symmetric but non-PSD matrices raise the validation error from
    :meth:`CovarianceMatrix.from_array` (which reports the smallest eigenvalue).
    """
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for line_no, line in enumerate(csv.reader(fh), start=1):
            if not line or (len(line) == 1 and line[0].strip() == ""):
                continue
            values = []
            for col_no, cell in enumerate(line, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise MatrixParseError(
                        f"cannot parse {cell.strip()!r} as a number", line_no, col_no
                    ) from None
            if rows and len(values) != len(rows[0]):
                raise MatrixParseError(
                    f"row has {len(values)} columns, expected {len(rows[0])}", line_no
                )
            rows.append(values)
    if not rows:
        raise MatrixParseError("file contains no data rows")
    if len(rows) != len(rows[0]):
        raise MatrixParseError(
            f"matrix is not square: {len(rows)} rows x {len(rows[0])} columns",
            len(rows),
        )
    return CovarianceMatrix.from_array(np.array(rows))
