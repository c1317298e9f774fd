"""Matrix-variate Beta distribution: log-density and exact second moments.

The two-split conditional law (one Wishart block given the pooled mean) is a
matrix Beta with parameters (n, n, 2A); these utilities therefore double as an
independent oracle for the Rao-Blackwell conditional-expectation formulas.
Real symmetric matrices only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import SupportViolationError, ValidationError
from .linalg import as_array, check_hermitian, spd_eigh

SUPPORT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixBetaParams:
    """Parameters (p; n1, n2; Delta) with n1, n2 > p - 1 and Delta PD."""

    p: int
    n1: float
    n2: float
    delta: np.ndarray

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValidationError(f"dimension p must be >= 1, got {self.p}")
        for name, dof in (("n1", self.n1), ("n2", self.n2)):
            if not float(dof) > self.p - 1:
                raise ValidationError(
                    f"degrees of freedom {name} must exceed p - 1 = {self.p - 1}, got {dof}"
                )
        d = as_array(self.delta)
        if np.iscomplexobj(d):
            raise ValidationError("the matrix Beta law is defined over real matrices")
        if d.shape == ():
            d = d.reshape(1, 1)
        d = check_hermitian(d, what="delta")
        w = np.linalg.eigvalsh(d)
        if w[0] <= SUPPORT_RTOL * max(w[-1], 1.0):
            raise ValidationError("delta must be strictly positive definite")
        if d.shape != (self.p, self.p):
            raise ValidationError(f"delta has shape {d.shape}, expected ({self.p}, {self.p})")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "delta", d)

    @property
    def n_total(self) -> float:
        return float(self.n1) + float(self.n2)


def multivariate_gamma_log(p: int, x: float) -> float:
    """log of the multivariate gamma, pi^{p(p-1)/4} prod_i Gamma(x - (i-1)/2).

    Requires x > (p - 1)/2 so every factor is finite.
    """
    if int(p) < 1:
        raise ValidationError(f"dimension p must be >= 1, got {p}")
    x = float(x)
    if not x > (p - 1) / 2.0:
        raise ValidationError(f"need x > (p - 1)/2 = {(p - 1) / 2.0}, got {x}")
    out = 0.25 * p * (p - 1) * math.log(math.pi)
    for i in range(p):
        out += float(gammaln(x - 0.5 * i))
    return out


def _log_det_pd(m: np.ndarray, what: str) -> float:
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise SupportViolationError(f"{what} must be positive definite inside the support")
    return float(logdet)


def matbeta_log_density(l, params: MatrixBetaParams) -> float:
    """Log-density of the matrix Beta law at l, with 0 < l < Delta strictly.

    Normalizer K = Gamma_p(N/2) / (Gamma_p(n1/2) Gamma_p(n2/2)) with
    N = n1 + n2. (Some displays of this constant repeat Gamma_p(n1/2) twice in
    the denominator; the mixed product is the reading consistent with the
    scalar Beta reduction at p = 1, and is what is implemented.)

    Density: K det(l)^{(n1-p-1)/2} det(Delta - l)^{(n2-p-1)/2}
               / det(Delta)^{(N-p-1)/2}.
    """
    lm = as_array(l)
    if lm.shape == ():
        lm = lm.reshape(1, 1)
    lm = check_hermitian(lm, what="l")
    if np.iscomplexobj(lm):
        raise ValidationError("the matrix Beta law is defined over real matrices")
    p = params.p
    if lm.shape != (p, p):
        raise ValidationError(f"l has shape {lm.shape}, expected ({p}, {p})")

    # Scale-free support test: eigenvalues of Delta^{-1/2} l Delta^{-1/2}
    # must lie strictly inside (0, 1).
    dw, dv = spd_eigh(params.delta, what="delta")
    inv_root = (dv / np.sqrt(dw)) @ dv.T
    ratio = inv_root @ lm @ inv_root
    w = np.linalg.eigvalsh(0.5 * (ratio + ratio.T))
    if w[0] <= SUPPORT_RTOL or w[-1] >= 1.0 - SUPPORT_RTOL:
        raise SupportViolationError(
            f"support violation: eigenvalues of delta^(-1/2) l delta^(-1/2) in "
            f"[{w[0]:.3e}, {w[-1]:.3e}] must lie strictly inside (0, 1)"
        )

    n1, n2 = float(params.n1), float(params.n2)
    n_tot = params.n_total
    log_k = (
        multivariate_gamma_log(p, 0.5 * n_tot)
        - multivariate_gamma_log(p, 0.5 * n1)
        - multivariate_gamma_log(p, 0.5 * n2)
    )
    return (
        log_k
        + 0.5 * (n1 - p - 1) * _log_det_pd(lm, "l")
        + 0.5 * (n2 - p - 1) * _log_det_pd(params.delta - lm, "delta - l")
        - 0.5 * (n_tot - p - 1) * _log_det_pd(params.delta, "delta")
    )


def expected_LTL(t, params: MatrixBetaParams) -> np.ndarray:
    """E[L T L] for L matrix-Beta(p; n1, n2; Delta) and deterministic p x p T.

    Exact formula: n1 / (N(N-1)(N+2)) * [ {n1(N+1) - 2} Delta T Delta
    + n2 {(Delta T Delta)^T + Tr(Delta T) Delta} ] with N = n1 + n2.
    At (n1, n2, Delta) = (n, n, 2A) this reproduces the conditional second
    moment E[W1 F W1 | A] of a two-split Wishart pair.
    """
    tm = as_array(t)
    if tm.shape == ():
        tm = tm.reshape(1, 1)
    if np.iscomplexobj(tm):
        raise ValidationError("the matrix Beta law is defined over real matrices")
    p = params.p
    if tm.shape != (p, p):
        raise ValidationError(f"T has shape {tm.shape}, expected ({p}, {p})")
    check_hermitian(tm, what="T")
    n1, n2 = float(params.n1), float(params.n2)
    n_tot = params.n_total
    delta = params.delta
    dt = delta @ tm
    dtd = dt @ delta
    out = (n1 * (n_tot + 1.0) - 2.0) * dtd + n2 * (dtd.T + np.trace(dt) * delta)
    return n1 / (n_tot * (n_tot - 1.0) * (n_tot + 2.0)) * out
