"""Symmetric/Hermitian matrix helpers shared by sampling, estimators and metrics.

All decompositions go through ``numpy.linalg.eigh`` so that positive
definiteness is verified in the same pass that computes the factors; the
failure mode that matters here is near-singularity, and it must surface as a
typed error rather than a LAPACK warning.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError, ValidationError

# Relative tolerances for the Hermitian and positive-(semi)definite contracts.
HERMITIAN_RTOL = 1e-10
EIG_FLOOR_RTOL = 1e-10


def as_array(m) -> np.ndarray:
    """Return the underlying ndarray of a matrix-like object.

    Accepts plain arrays as well as wrapper types exposing ``.entries``.
    """
    return np.asarray(getattr(m, "entries", m))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (M + M*)/2."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def check_square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = as_array(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {m.shape}")
    return m


def check_hermitian(m, rtol: float = HERMITIAN_RTOL, what: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is Hermitian within relative tolerance."""
    m = check_square(m, what)
    scale = np.max(np.abs(m))
    if scale == 0.0:
        return m
    dev = np.max(np.abs(m - m.conj().T))
    if dev > rtol * scale:
        raise ValidationError(
            f"{what} is not Hermitian: max asymmetry {dev:.3e} exceeds "
            f"{rtol:g} * max entry {scale:.3e}"
        )
    return m


def spd_eigh(m, *, what: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian PSD matrix.

    Returns ascending eigenvalues and eigenvectors; raises if any eigenvalue
    falls below -EIG_FLOOR_RTOL times the largest.
    """
    m = as_array(m)
    w, v = np.linalg.eigh(m)
    top = max(w[-1], 0.0)
    if w[0] < -EIG_FLOOR_RTOL * max(top, 1.0):
        raise ValidationError(
            f"{what} is not positive semidefinite: min eigenvalue {w[0]:.3e}"
        )
    return w, v


def spd_inverse(m, *, what: str = "matrix") -> np.ndarray:
    """Inverse of a Hermitian positive definite matrix.

    The eigenvalue floor check (min > EIG_FLOOR_RTOL * max) runs in the same
    decomposition that builds the inverse.
    """
    m = as_array(m)
    w, v = np.linalg.eigh(m)
    if w[-1] <= 0.0 or w[0] <= EIG_FLOOR_RTOL * w[-1]:
        raise SingularMatrixError(
            f"{what} is numerically singular: eigenvalue range "
            f"[{w[0]:.3e}, {w[-1]:.3e}]"
        )
    inv = (v / w) @ v.conj().T
    return hermitize(inv)


def spd_sqrt(m, *, what: str = "matrix") -> np.ndarray:
    """Symmetric square root of a Hermitian PSD matrix.

    Eigenvector-scaled square root rather than Cholesky, so near-singular PSD
    inputs are handled and the factor is itself Hermitian.
    """
    w, v = spd_eigh(m, what=what)
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    return hermitize(root)


def operator_norm(m) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    m = as_array(m)
    if m.shape == (0, 0):
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))
