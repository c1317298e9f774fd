"""Fast deterministic consistency checks across the library.

Each check returns a CheckResult; `run_selftest` runs them all in a few
seconds. These are structural identities (order relations, equivariance,
exact algebraic reductions), not statistical tests, so the tolerances are
tight and there is no flakiness: every draw uses a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .asymptotics import (
    ARITHMETIC,
    HARMONIC,
    closed_form_moment,
    limiting_law,
    t_transform_suite,
)
from .estimators import (
    arithmetic_mean,
    harmonic_mean,
    rao_blackwell_harmonic,
    rb_regularized_harmonic,
)
from .linalg import as_array, operator_norm, spd_inverse
from .matbeta import MatrixBetaParams, expected_LTL, matbeta_log_density
from .sampling import COMPLEX, REAL, Partition, sample_data, split_wisharts

_SEED = 20240817


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _blocks(rng, p, n, n_splits, field):
    data = sample_data(np.eye(p), n * n_splits, field, rng)
    return split_wisharts(data, Partition.equal(n * n_splits, n_splits))


def check_loewner_order() -> CheckResult:
    """A - H is positive semidefinite for every draw (AM-HM order)."""
    rng = np.random.default_rng(_SEED)
    worst = np.inf
    for field in (REAL, COMPLEX):
        for n_splits in (2, 3):
            ws = _blocks(rng, 25, 40, n_splits, field)
            a = as_array(arithmetic_mean(ws))
            h = as_array(harmonic_mean(ws))
            rel = np.linalg.eigvalsh(a - h)[0] / operator_norm(a)
            worst = min(worst, rel)
    ok = worst >= -1e-9
    return CheckResult("loewner_order", ok, f"min eig(A - H) / ||A|| = {worst:.3e}")


def check_congruence_equivariance() -> CheckResult:
    """H(C W C*) = C H(W) C* for invertible C; same for A."""
    rng = np.random.default_rng(_SEED + 1)
    worst = 0.0
    for field in (REAL, COMPLEX):
        ws = [as_array(w) for w in _blocks(rng, 12, 20, 3, field)]
        c = rng.standard_normal((12, 12))
        if field == COMPLEX:
            c = c + 1j * rng.standard_normal((12, 12))
        conj = [c @ w @ c.conj().T for w in ws]
        for mean in (arithmetic_mean, harmonic_mean):
            direct = as_array(mean(conj))
            pushed = c @ as_array(mean(ws)) @ c.conj().T
            worst = max(worst, operator_norm(direct - pushed) / operator_norm(direct))
    ok = worst <= 1e-9
    return CheckResult("congruence_equivariance", ok, f"max relative error = {worst:.3e}")


def check_two_matrix_identity() -> CheckResult:
    """For two blocks, H = 2A - (W1 A^-1 W1 + W2 A^-1 W2) / 2 exactly."""
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    for field in (REAL, COMPLEX):
        w1, w2 = (as_array(w) for w in _blocks(rng, 15, 24, 2, field))
        a = (w1 + w2) / 2.0
        h = as_array(harmonic_mean([w1, w2]))
        a_inv = spd_inverse(a)
        alt = 2.0 * a - 0.5 * (w1 @ a_inv @ w1 + w2 @ a_inv @ w2)
        worst = max(worst, operator_norm(h - alt) / operator_norm(h))
    ok = worst <= 1e-9
    return CheckResult("two_matrix_identity", ok, f"max relative error = {worst:.3e}")


def check_t_transform() -> CheckResult:
    """t_inverse(t(z)) = z above the edge and t(t_inverse(w)) = w below it."""
    worst = 0.0
    for gamma in (0.05, 0.25, 0.45):
        suite = t_transform_suite(gamma)
        edge_gap = abs(suite.t(suite.upper) - suite.t_edge) / suite.t_edge
        worst = max(worst, edge_gap)
        for z in (suite.upper * 1.001, suite.upper + 0.5, suite.upper + 4.0):
            back = suite.t_inverse(suite.t(z))
            worst = max(worst, abs(back - z) / z)
        for frac in (0.1, 0.5, 0.9):
            w = frac * suite.t_edge
            forth = suite.t(suite.t_inverse(w))
            worst = max(worst, abs(forth - w) / w)
    ok = worst <= 1e-10
    return CheckResult("t_transform_round_trip", ok, f"max relative error = {worst:.3e}")


def check_density_unit_mass() -> CheckResult:
    """Each limiting density integrates to 1 (quadrature, smooth substitution)."""
    laws = [
        limiting_law(0.25, ARITHMETIC),
        limiting_law(0.25, HARMONIC, 2),
        limiting_law(0.2, HARMONIC, 3),
    ]
    worst = 0.0
    for law in laws:
        a, b = law.lower, law.upper
        half = (b - a) / 2.0

        def integrand(u, a=a, half=half, law=law):
            x = a + half * (1.0 - np.cos(np.pi * u))
            return float(law.density(x)) * half * np.pi * np.sin(np.pi * u)

        mass, _ = integrate.quad(integrand, 0.0, 1.0, limit=200)
        worst = max(worst, abs(mass - 1.0))
    ok = worst <= 1e-8
    return CheckResult("density_unit_mass", ok, f"max |mass - 1| = {worst:.3e}")


def check_moment_quadrature() -> CheckResult:
    """closed_form_moment against adaptive quadrature with the edge weight."""
    rng = np.random.default_rng(_SEED + 3)
    worst = 0.0
    for _ in range(5):
        a = float(rng.uniform(0.1, 2.0))
        b = a + float(rng.uniform(0.2, 2.5))
        for k in range(1, 7):
            exact = closed_form_moment(a, b, k)
            # weight 'alg' with wvar (0.5, 0.5) supplies sqrt((x-a)(b-x))
            num, _ = integrate.quad(
                lambda x: x ** (k - 1), a, b, weight="alg", wvar=(0.5, 0.5)
            )
            worst = max(worst, abs(num - exact) / exact)
    ok = worst <= 1e-10
    return CheckResult("moment_quadrature", ok, f"max relative error = {worst:.3e}")


def check_scalar_beta() -> CheckResult:
    """p = 1 matrix Beta matches the scalar Beta law it reduces to."""
    n1, n2, delta = 5.5, 7.0, 2.3
    params = MatrixBetaParams(1, n1, n2, np.array([[delta]]))
    ref = stats.beta(n1 / 2.0, n2 / 2.0)
    worst = 0.0
    for x in (0.05, 0.3, 0.62, 0.97):
        ours = matbeta_log_density(np.array([[x * delta]]), params)
        theirs = ref.logpdf(x) - np.log(delta)
        worst = max(worst, abs(ours - theirs))
    second = float(expected_LTL(np.array([[1.0]]), params)[0, 0])
    ref_second = float(ref.moment(2)) * delta**2
    worst = max(worst, abs(second - ref_second) / ref_second)
    ok = worst <= 1e-12
    return CheckResult("scalar_beta_reduction", ok, f"max error = {worst:.3e}")


def check_rb_regularized_reduction() -> CheckResult:
    """rb_regularized at c = 1, d = 0 collapses to the plain RB estimator."""
    rng = np.random.default_rng(_SEED + 4)
    p, n = 10, 25
    ws = _blocks(rng, p, n, 2, REAL)
    a = arithmetic_mean(ws)
    plain = as_array(rao_blackwell_harmonic(a, p, n))
    reduced = as_array(rb_regularized_harmonic(a, 1.0, 0.0, np.eye(p), p, n))
    rel = operator_norm(reduced - plain) / operator_norm(plain)
    ok = rel <= 1e-12
    return CheckResult("rb_regularized_reduction", ok, f"relative error = {rel:.3e}")


_CHECKS = (
    check_loewner_order,
    check_congruence_equivariance,
    check_two_matrix_identity,
    check_t_transform,
    check_density_unit_mass,
    check_moment_quadrature,
    check_scalar_beta,
    check_rb_regularized_reduction,
)


def run_selftest() -> list:
    """Run every check; deterministic, a few seconds total."""
    return [check() for check in _CHECKS]
