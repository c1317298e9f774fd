"""Deterministic high-dimensional limits for arithmetic and harmonic means.

Conventions: G = lim p/T in (0, 1/2) is the dimension-to-total-sample ratio;
a harmonic mean over N equal blocks sees per-block ratio N*G. All limits are
almost-sure statements about Sigma = I ensembles unless noted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ARITHMETIC = "arithmetic"
HARMONIC = "harmonic"
MEAN_KINDS = (ARITHMETIC, HARMONIC)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 0.5:
        raise ValidationError(f"gamma must lie in (0, 0.5), got {gamma}")
    return gamma


def _check_kind(mean_kind: str) -> str:
    if mean_kind not in MEAN_KINDS:
        raise ValidationError(f"mean kind must be one of {MEAN_KINDS}, got {mean_kind!r}")
    return mean_kind


def _check_splits(gamma: float, n_split: int) -> int:
    if not isinstance(n_split, (int, np.integer)) or n_split < 2:
        raise ValidationError(f"number of splits must be an integer >= 2, got {n_split!r}")
    if n_split > math.floor(1.0 / gamma):
        raise ValidationError(
            f"support undefined: {n_split} splits exceeds floor(1/gamma) = "
            f"{math.floor(1.0 / gamma)} at gamma = {gamma}"
        )
    return int(n_split)


def support_edges(gamma: float, mean_kind: str, n_split: int = None) -> tuple:
    """Support endpoints of the limiting spectral law.

    Arithmetic: (1 -+ sqrt(G))^2. Harmonic over N splits:
    1 - (N-2)G -+ 2 sqrt(G) sqrt(1 - (N-1)G).
    """
    gamma = _check_gamma(gamma)
    _check_kind(mean_kind)
    if mean_kind == ARITHMETIC:
        r = math.sqrt(gamma)
        return ((1.0 - r) ** 2, (1.0 + r) ** 2)
    n = _check_splits(gamma, 2 if n_split is None else n_split)
    half_width = 2.0 * math.sqrt(gamma) * math.sqrt(1.0 - (n - 1) * gamma)
    center = 1.0 - (n - 2) * gamma
    return (center - half_width, center + half_width)


@dataclass(frozen=True)
class SpectralLaw:
    """Limiting spectral measure: support edges plus a density evaluator.

    Both laws share the functional form sqrt((upper - x)(x - lower))/(2 pi G x)
    on [lower, upper]. ``moment(k)`` integrates x^k against the density in
    closed form, so tests can cross-check the evaluator against quadrature.
    """

    kind: str
    gamma: float
    n_split: object
    lower: float
    upper: float

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > self.lower) & (x < self.upper) & (x > 0.0)
        xi = x[inside]
        out[inside] = np.sqrt((self.upper - xi) * (xi - self.lower)) / (
            2.0 * math.pi * self.gamma * xi
        )
        return out

    def mass(self) -> float:
        """Total mass, ((a+b)/2 - sqrt(ab)) / (2G); equals 1 for both laws."""
        a, b = self.lower, self.upper
        return (0.5 * (a + b) - math.sqrt(a * b)) / (2.0 * self.gamma)

    def moment(self, k: int) -> float:
        """Closed-form integral of x^k against the law, k >= 1."""
        return closed_form_moment(self.lower, self.upper, k) / (
            2.0 * math.pi * self.gamma
        )

    def mean(self) -> float:
        """First moment: 1 for the arithmetic law, 1 - (N-1)G harmonic."""
        return self.moment(1)


def limiting_law(gamma: float, mean_kind: str, n_split: int = None) -> SpectralLaw:
    """The limiting spectral law of the estimator at ratio gamma = lim p/T."""
    gamma = _check_gamma(gamma)
    _check_kind(mean_kind)
    if mean_kind == ARITHMETIC:
        lower, upper = support_edges(gamma, mean_kind)
        return SpectralLaw(ARITHMETIC, gamma, None, lower, upper)
    n = _check_splits(gamma, 2 if n_split is None else n_split)
    lower, upper = support_edges(gamma, HARMONIC, n)
    return SpectralLaw(HARMONIC, gamma, n, lower, upper)


def op_error_limit(gamma: float, mean_kind: str, n_split: int = None) -> float:
    """Almost-sure limit of ||estimator - I|| for Sigma = I.

    Arithmetic: G + 2 sqrt(G). Harmonic over N splits:
    (N-2)G + 2 sqrt(G) sqrt(1 - (N-1)G); both equal the distance from 1 to
    the far support edge.
    """
    gamma = _check_gamma(gamma)
    _check_kind(mean_kind)
    if mean_kind == ARITHMETIC:
        return gamma + 2.0 * math.sqrt(gamma)
    n = _check_splits(gamma, 2 if n_split is None else n_split)
    return (n - 2) * gamma + 2.0 * math.sqrt(gamma) * math.sqrt(1.0 - (n - 1) * gamma)


def optimal_split_size(gamma: float, n_max: int) -> tuple:
    """Argmin over N in {2..n_max} of the harmonic op-norm limit.

    Returns (n_star, curve) with curve[i] the limit at N = 2 + i. The curve is
    nondecreasing on the valid range, so n_star is always 2; it is computed
    rather than asserted so callers can inspect the evaluated values.
    """
    gamma = _check_gamma(gamma)
    _check_splits(gamma, n_max)
    curve = [op_error_limit(gamma, HARMONIC, n) for n in range(2, n_max + 1)]
    n_star = 2 + int(np.argmin(curve))
    return n_star, curve


def frobenius_sq_limit(gamma: float, mean_kind: str) -> float:
    """Almost-sure limit of (1/p)||estimator - I||_F^2; equals gamma for both
    the arithmetic mean and the two-split harmonic mean."""
    gamma = _check_gamma(gamma)
    _check_kind(mean_kind)
    return gamma


def closed_form_moment(a: float, b: float, k: int) -> float:
    """Exact value of the integral of x^(k-1) sqrt((b - x)(x - a)) over [a, b].

    Finite sum: (pi/2) ((a+b)/2)^(k+1) * sum over j of
    [1/(j+1)] C(k-1, 2j) C(2j, j) ((b-a)/(b+a))^(2j+2) / 4^j,
    with j running to floor((k-1)/2). Binomials are exact integers.
    """
    a = float(a)
    b = float(b)
    if not 0.0 < a < b:
        raise ValidationError(f"need 0 < a < b, got a={a}, b={b}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"moment order k must be an integer >= 1, got {k!r}")
    ratio = (b - a) / (b + a)
    total = 0.0
    for j in range((k - 1) // 2 + 1):
        term = (
            math.comb(k - 1, 2 * j)
            * math.comb(2 * j, j)
            / (j + 1)
            * ratio ** (2 * j + 2)
            / 4.0**j
        )
        total += term
    return 0.5 * math.pi * (0.5 * (a + b)) ** (k + 1) * total


@dataclass(frozen=True)
class HarmonicTransforms:
    """Stieltjes-type transform machinery for the two-split harmonic law.

    m(z) is the Stieltjes transform of the law, t(z) = -1 + z m(z); t solves
    G t^2 + (1 - z) t + (1 - G) = 0 on the branch decaying like (1 - G)/z as
    z -> infinity. The inverse and derivative locate spiked eigenvalues.
    """

    gamma: float
    lower: float
    upper: float

    @property
    def t_edge(self) -> float:
        """t evaluated at the upper support edge, sqrt((1 - G)/G)."""
        return math.sqrt((1.0 - self.gamma) / self.gamma)

    def t(self, z: float) -> float:
        z = float(z)
        if z < self.upper:
            raise ValidationError(
                f"z = {z} lies at or inside the support (upper edge {self.upper}); "
                "the real branch is defined for z >= the upper edge"
            )
        disc = (z - 1.0) ** 2 - 4.0 * self.gamma * (1.0 - self.gamma)
        # product-of-roots form of the small root; the textbook
        # (z-1) - sqrt(disc) difference cancels catastrophically for large z
        return 2.0 * (1.0 - self.gamma) / ((z - 1.0) + math.sqrt(max(disc, 0.0)))

    def m(self, z: float) -> float:
        return (1.0 + self.t(z)) / float(z)

    def t_inverse(self, w: float) -> float:
        """1 + G w + (1 - G)/w, valid for w in (0, t_edge]."""
        w = float(w)
        if not 0.0 < w <= self.t_edge * (1.0 + 1e-12):
            raise ValidationError(
                f"w = {w} is outside the admissible range (0, {self.t_edge:.6f}]"
            )
        return 1.0 + self.gamma * w + (1.0 - self.gamma) / w

    def t_prime(self, z: float) -> float:
        """Derivative of t, t/(2 G t + 1 - z); diverges at the edge."""
        z = float(z)
        if z <= self.upper:
            raise ValidationError(
                f"z = {z} must lie strictly above the upper edge {self.upper}"
            )
        tz = self.t(z)
        return tz / (2.0 * self.gamma * tz + 1.0 - z)


def t_transform_suite(gamma: float) -> HarmonicTransforms:
    """Transform bundle for the two-split harmonic law at ratio gamma."""
    gamma = _check_gamma(gamma)
    lower, upper = support_edges(gamma, HARMONIC, 2)
    return HarmonicTransforms(gamma, lower, upper)


@dataclass(frozen=True)
class SpikePrediction:
    """Limits for a rank-one spike Sigma = I + theta v v*.

    overlap_sq_limit is exactly 0 when theta <= threshold, and lambda1_limit
    sticks to the bulk's upper edge there.
    """

    mean_kind: str
    theta: float
    gamma: float
    threshold: float
    lambda1_limit: float
    overlap_sq_limit: float


def spike_prediction(theta: float, gamma: float, mean_kind: str) -> SpikePrediction:
    """Top-eigenvalue and top-eigenvector-overlap limits under a rank-one spike.

    Harmonic (two splits): threshold sqrt(G/(1-G)); above it,
    lambda1 -> 1 + G/theta + (1-G) theta and
    |<v1, v>|^2 -> ((theta+1)/theta) (theta^2 (1-G) - G) / (theta^2 (1-G) + theta + G).
    Arithmetic: threshold sqrt(G); above it, lambda1 -> (theta+1)(1 + G/theta)
    and |<v1, v>|^2 -> (1 - G/theta^2) / (1 + G/theta).
    Below threshold lambda1 sticks to the bulk edge and the overlap vanishes.
    """
    gamma = _check_gamma(gamma)
    _check_kind(mean_kind)
    theta = float(theta)
    if not theta > 0:
        raise ValidationError(f"spike strength theta must be > 0, got {theta}")
    if mean_kind == HARMONIC:
        threshold = math.sqrt(gamma / (1.0 - gamma))
        if theta > threshold:
            lam = 1.0 + gamma / theta + (1.0 - gamma) * theta
            ov = ((theta + 1.0) / theta) * (theta**2 * (1.0 - gamma) - gamma) / (
                theta**2 * (1.0 - gamma) + theta + gamma
            )
        else:
            lam = support_edges(gamma, HARMONIC, 2)[1]
            ov = 0.0
    else:
        threshold = math.sqrt(gamma)
        if theta > threshold:
            lam = (theta + 1.0) * (1.0 + gamma / theta)
            ov = (1.0 - gamma / theta**2) / (1.0 + gamma / theta)
        else:
            lam = support_edges(gamma, ARITHMETIC)[1]
            ov = 0.0
    return SpikePrediction(mean_kind, theta, gamma, threshold, lam, ov)


def overlap_gap(theta: float, gamma: float) -> float:
    """overlap_sq(arithmetic) - overlap_sq(harmonic) when both are supercritical.

    Closed form G^2 (1+theta)^2 / ((1 + G/theta) theta (theta^2 (1-G) + theta + G)),
    strictly positive on its domain theta > sqrt(G/(1-G)).
    """
    gamma = _check_gamma(gamma)
    theta = float(theta)
    harmonic_threshold = math.sqrt(gamma / (1.0 - gamma))
    if not theta > harmonic_threshold:
        raise ValidationError(
            f"overlap gap requires both means supercritical: theta = {theta} "
            f"<= {harmonic_threshold:.6f}"
        )
    return (
        gamma**2
        * (1.0 + theta) ** 2
        / ((1.0 + gamma / theta) * theta * (theta**2 * (1.0 - gamma) + theta + gamma))
    )


def favorable_threshold(gamma: float) -> float:
    """Largest theta for which the harmonic mean's eigenvector bound wins:
    (2 + sqrt(G)) / (2 sqrt(1 - G)) - 1."""
    gamma = _check_gamma(gamma)
    return (2.0 + math.sqrt(gamma)) / (2.0 * math.sqrt(1.0 - gamma)) - 1.0


def harmonic_favorable_bound(theta: float, gamma: float) -> bool:
    """True when theta < (2 + sqrt(G))/(2 sqrt(1 - G)) - 1, the window where
    the perturbation bound favors the harmonic mean's leading eigenvector."""
    theta = float(theta)
    if not theta > 0:
        raise ValidationError(f"spike strength theta must be > 0, got {theta}")
    return theta < favorable_threshold(gamma)


def davis_kahan_bound(op_err: float, eigengap: float) -> float:
    """Eigenvector perturbation bound 2^(3/2) * op_err / eigengap."""
    op_err = float(op_err)
    eigengap = float(eigengap)
    if not eigengap > 0:
        raise ValidationError(f"eigengap must be > 0, got {eigengap}")
    if op_err < 0:
        raise ValidationError(f"operator error must be >= 0, got {op_err}")
    return 2.0**1.5 * op_err / eigengap


def ratio_condition(sigma_cond_number: float, gamma: float) -> bool:
    """True when kappa(Sigma) times the two-split harmonic limit stays below
    the arithmetic limit, guaranteeing operator-norm improvement for general
    Sigma with that condition number."""
    kappa = float(sigma_cond_number)
    if not kappa >= 1.0:
        raise ValidationError(f"condition number must be >= 1, got {kappa}")
    gamma = _check_gamma(gamma)
    return kappa * op_error_limit(gamma, HARMONIC, 2) / op_error_limit(gamma, ARITHMETIC) < 1.0
