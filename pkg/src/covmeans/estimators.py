"""Covariance estimators built from Wishart blocks.

Arithmetic and harmonic matrix means work over both fields. The
Rao-Blackwell operations (which condition a two-split harmonic mean on its
arithmetic mean) are exact for real Wisharts only and reject complex input.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError, ValidationError
from .linalg import as_array, hermitize, spd_inverse
from .sampling import SpdMatrix


def _matrices(ws) -> list:
    ms = [as_array(w) for w in ws]
    if not ms:
        raise ValidationError("need at least one matrix")
    shape = ms[0].shape
    for i, m in enumerate(ms):
        if m.ndim != 2 or m.shape != shape or shape[0] != shape[1]:
            raise ValidationError(
                f"matrix {i} has shape {m.shape}, expected square {shape}"
            )
    return ms


def _real_only(m: np.ndarray, op: str) -> np.ndarray:
    if np.iscomplexobj(m):
        raise ValidationError(f"{op} is defined for the real field only")
    return m


def arithmetic_mean(ws) -> SpdMatrix:
    """Entrywise average of the blocks; equals the pooled sample covariance
    when the blocks come from an equal split."""
    ms = _matrices(ws)
    return SpdMatrix(hermitize(sum(ms) / len(ms)))


def harmonic_mean(ws) -> SpdMatrix:
    """N (sum of W_i^{-1})^{-1}; requires every summand strictly PD."""
    ms = _matrices(ws)
    inv_sum = np.zeros_like(ms[0])
    for i, m in enumerate(ms):
        try:
            inv_sum = inv_sum + spd_inverse(m, what=f"summand {i}")
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"singular summand in harmonic mean: {exc}") from None
    return SpdMatrix(len(ms) * spd_inverse(inv_sum, what="sum of inverses"))


def rao_blackwell_factor(p: int, n: int) -> float:
    """The scalar n(2n - p)/((2n - 1)(n + 1)).

    Conditioning the two-split harmonic mean on the arithmetic mean collapses
    to this deterministic multiple; as p/(2n) -> G the factor tends to 1 - G.
    """
    if not (isinstance(p, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise ValidationError("p and n must be integers")
    if p < 1:
        raise ValidationError(f"dimension p must be >= 1, got {p}")
    if n < p:
        raise ValidationError(f"degenerate regime: split size n={n} < dimension p={p}")
    return float(n * (2 * n - p)) / float((2 * n - 1) * (n + 1))


def rao_blackwell_harmonic(a, p: int, n: int) -> SpdMatrix:
    """Conditional expectation of the two-split harmonic mean given A.

    ``a`` is the pooled arithmetic mean of a 2-split with blocks of size n.
    Real field only.
    """
    m = _real_only(as_array(a), "Rao-Blackwellization")
    if m.shape != (p, p):
        raise ValidationError(f"matrix has shape {m.shape}, expected ({p}, {p})")
    return SpdMatrix(rao_blackwell_factor(p, n) * m)


def conditional_quadratic_expectation(a, f, n: int) -> np.ndarray:
    """E[W1 F W1 | A] for a real two-split with block size n and F = F(A).

    Evaluates ({n(2n+1) - 2} A F A + n{(A F A)^T + Tr(A F) A}) / ((2n-1)(n+1)).
    F may be any p x p matrix; the result is not symmetrized.
    """
    am = _real_only(as_array(a), "conditional quadratic expectation")
    fm = _real_only(as_array(f), "conditional quadratic expectation")
    if am.ndim != 2 or am.shape[0] != am.shape[1]:
        raise ValidationError(f"A must be square, got shape {am.shape}")
    if fm.shape != am.shape:
        raise ValidationError(f"F has shape {fm.shape}, expected {am.shape}")
    if n < 1:
        raise ValidationError(f"split size n must be >= 1, got {n}")
    af = am @ fm
    afa = af @ am
    num = (n * (2 * n + 1) - 2) * afa + n * (afa.T + np.trace(af) * am)
    return num / float((2 * n - 1) * (n + 1))


def rb_regularized_harmonic(a, c: float, d: float, lambda_hat, p: int, n: int) -> SpdMatrix:
    """Conditional expectation given A of the harmonic mean of c(W_i + d L).

    With At := c(A + d L) and M := c d L (L = ``lambda_hat``, PSD and a
    function of A only), evaluates

        n [2n - p + Tr(M At^{-1})] / ((2n-1)(n+1)) * At
      + (1 - n) / ((2n-1)(n+1)) * M At^{-1} M
      + [2n + n p - 2 - n Tr(M At^{-1})] / ((2n-1)(n+1)) * M.

    At (c, d) = (1, 0) this reduces exactly to rao_blackwell_harmonic.
    Real field only.
    """
    am = _real_only(as_array(a), "regularized Rao-Blackwellization")
    lm = _real_only(as_array(lambda_hat), "regularized Rao-Blackwellization")
    if am.shape != (p, p):
        raise ValidationError(f"matrix has shape {am.shape}, expected ({p}, {p})")
    if lm.shape != (p, p):
        raise ValidationError(f"regularizer has shape {lm.shape}, expected ({p}, {p})")
    if not c > 0:
        raise ValidationError(f"scale c must be > 0, got {c}")
    if not d >= 0:
        raise ValidationError(f"shift d must be >= 0, got {d}")
    if n < p:
        raise ValidationError(f"degenerate regime: split size n={n} < dimension p={p}")
    atil = c * (am + d * lm)
    atil_inv = spd_inverse(atil, what="regularized arithmetic mean")
    m = (c * d) * lm
    tr_m = float(np.trace(m @ atil_inv))
    den = float((2 * n - 1) * (n + 1))
    out = (
        n * (2 * n - p + tr_m) / den * atil
        + (1 - n) / den * (m @ atil_inv @ m)
        + (2 * n + n * p - 2 - n * tr_m) / den * m
    )
    return SpdMatrix(hermitize(out))


def linear_shrinkage(a, lam: float, target) -> SpdMatrix:
    """Convex combination (1 - lam) A + lam * target."""
    am = as_array(a)
    tm = as_array(target)
    if tm.shape != am.shape:
        raise ValidationError(f"target has shape {tm.shape}, expected {am.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"shrinkage intensity must lie in [0, 1], got {lam}")
    return SpdMatrix(hermitize((1.0 - lam) * am + lam * tm))


def fisher_sun_intensity(a, t_total: int) -> float:
    """Data-driven shrinkage intensity toward the identity, clipped to [0, 1].

    For normal data with known zero mean, A = X X^T / T, the Frobenius-optimal
    intensity for (1 - lam) A + lam I is lam* = beta^2 / (alpha^2 + beta^2)
    with alpha^2 = ||Sigma - I||_F^2 / p and beta^2 = E||A - Sigma||_F^2 / p.
    Both are estimated from the first two spectral moments:

        a1_hat = tr(A) / p                              (unbiased for tr Sigma / p)
        a2_hat = T^2/((T-1)(T+2)) [tr(A^2) - (tr A)^2/T] / p
                                                        (unbiased for tr Sigma^2 / p)
        alpha^2_hat = max(a2_hat - 2 a1_hat + 1, 0)
        beta^2_hat  = (a2_hat + p a1_hat^2) / T

    The moment constants are exact for real Wisharts with T degrees of
    freedom; the same formula is applied verbatim to complex input, where it
    remains a consistent (if not exactly unbiased) intensity.
    """
    am = as_array(a)
    if am.ndim != 2 or am.shape[0] != am.shape[1]:
        raise ValidationError(f"A must be square, got shape {am.shape}")
    if t_total < 2:
        raise ValidationError(f"total sample count must be >= 2, got {t_total}")
    p = am.shape[0]
    t = float(t_total)
    tr_a = float(np.real(np.trace(am)))
    tr_a2 = float(np.real(np.sum(am * am.conj().T)))
    a1 = tr_a / p
    a2 = t * t / ((t - 1.0) * (t + 2.0)) * (tr_a2 - tr_a * tr_a / t) / p
    alpha_sq = max(a2 - 2.0 * a1 + 1.0, 0.0)
    beta_sq = (a2 + p * a1 * a1) / t
    denom = alpha_sq + beta_sq
    if denom <= 0.0 or not np.isfinite(denom):
        return 1.0
    return float(min(max(beta_sq / denom, 0.0), 1.0))
