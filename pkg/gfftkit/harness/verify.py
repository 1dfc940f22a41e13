"""Per-theorem verifiers.

Each verifier compares a closed form against an independent counterpart:
another closed form, a quadrature oracle, or a Monte-Carlo estimate on
paired paths. Thresholds:

- closed form vs closed form: 1e-10 · (1 + |value|)
- closed form vs quadrature oracle: 1e-8 relative
- anything vs Monte-Carlo: 4 × stderr of the paired difference
"""

from __future__ import annotations

import cmath
import math
import time
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ..core.cmspace import (
    CMElement,
    KernelOperator,
    OrthonormalBasis,
    apply_op,
    decompose,
    inner_cm,
    pair_drift,
)
from ..core.exceptions import DomainError
from ..core.fresnel import (
    AtomicMeasure,
    LambdaPair,
    PhaseFunctional,
    analytic_integral,
    build_fresnel,
    feynman_integral,
    feynman_linear_weighted,
    first_variation,
    gfft,
    gfft_translation_check,
    inv_sqrt,
    sqrt_lambda,
)
from ..core.gbm import PathBatch, PathSample, RngStream, pwz, pwz_noise
from ..core.logging import get_logger
from .montecarlo import mc_expectation, mc_expectations
from .oracle import (
    GH_NODES,
    atom_limit_value,
    g_n_weight,
    gauss_hermite_lemma,
    lambda_path,
    lemma_limit_exact,
)

logger = get_logger("verify")

CLOSED_TOL = 1e-10
ORACLE_TOL = 1e-8
MC_SIGMAS = 4.0
# G_n-weighted integrands have finite variance only for Re λ > 1/2
MC_MIN_RE = 0.6
MONOTONE_SLACK = 1e-12


@dataclass
class VerifyReport:
    theorem_id: str
    closed_form: complex
    estimate: complex
    discrepancy: float
    threshold: float
    n: int | None = None
    stderr: float | None = None
    runtime: float = 0.0
    notes: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.discrepancy <= self.threshold)


def all_passed(reports: Sequence[VerifyReport]) -> bool:
    return all(r.passed for r in reports)


def closed_threshold(value: complex) -> float:
    return CLOSED_TOL * (1.0 + abs(value))


@contextmanager
def _timed(theorem_id: str, reports: list[VerifyReport]) -> Iterator[None]:
    started = time.perf_counter()
    logger.info("Verifier started", theorem=theorem_id)
    yield
    elapsed = time.perf_counter() - started
    for report in reports:
        report.runtime = elapsed
        logger.info(
            "Verifier finished",
            theorem=report.theorem_id,
            n=report.n,
            discrepancy=report.discrepancy,
            threshold=report.threshold,
            passed=report.passed,
            seconds=round(elapsed, 4),
        )


def _mc_report(
    theorem_id: str,
    closed: complex,
    estimate: complex,
    difference: complex,
    stderr: float,
    n: int | None = None,
) -> VerifyReport:
    return VerifyReport(
        theorem_id,
        closed,
        estimate,
        abs(difference),
        MC_SIGMAS * stderr,
        n=n,
        stderr=stderr,
    )


def _phase_shifted(
    F: PhaseFunctional, y1: PathSample, y2: PathSample
) -> PhaseFunctional:
    """x ↦ F(y1 + x1, y2 + x2) as a functional."""
    return F.with_coefs(
        [a.coef * cmath.exp(1j * (pwz(a.u1, y1) + pwz(a.u2, y2))) for a in F.atoms]
    )


def _first_coordinate(G: PhaseFunctional, x: PathBatch) -> np.ndarray:
    return np.sum(
        [a.coef * np.exp(1j * pwz(a.u1, x)) for a in G.atoms], axis=0
    ) * np.ones(x.count)


# -- Gaussian lemma -----------------------------------------------------------


def verify_lemma_limit(
    lam: complex,
    w: CMElement,
    basis: OrthonormalBasis,
    n: int,
    *,
    mc_n: int | None = None,
    rng: RngStream | None = None,
    nodes: int = GH_NODES,
) -> list[VerifyReport]:
    """Exact E[G_n(λ, x) e^{i(w,x)~}] against quadrature and Monte-Carlo."""
    reports: list[VerifyReport] = []
    with _timed("lemma", reports):
        exact = lemma_limit_exact(lam, w, basis, n)
        oracle = gauss_hermite_lemma(lam, w, basis, n, nodes)
        reports.append(
            VerifyReport(
                "lemma-oracle",
                exact,
                oracle,
                abs(exact - oracle),
                ORACLE_TOL * abs(exact),
                n=n,
            )
        )
        if mc_n is not None and rng is not None and complex(lam).real >= MC_MIN_RE:
            estimate = mc_expectation(
                lambda x1, _x2: g_n_weight(lam, x1, basis, n)
                * np.exp(1j * pwz(w, x1)),
                w.cfg,
                mc_n,
                rng,
            )
            reports.append(
                _mc_report(
                    "lemma-mc", exact, estimate.mean, exact - estimate.mean,
                    estimate.stderr, n,
                )
            )
    return reports


# -- GFFT as a limit ----------------------------------------------------------


def _residual_rows(
    theorem_id: str,
    target: complex,
    values: Sequence[tuple[int, complex]],
    final_tolerance: float | None,
) -> list[VerifyReport]:
    rows = []
    previous = math.inf
    for index, (n, value) in enumerate(values):
        residual = abs(value - target)
        threshold = previous + MONOTONE_SLACK
        if final_tolerance is not None and index == len(values) - 1:
            threshold = min(threshold, final_tolerance)
        rows.append(VerifyReport(theorem_id, target, value, residual, threshold, n=n))
        previous = residual
    return rows


def verify_limit_gfft(
    F: PhaseFunctional,
    q: tuple[float, float],
    y1: PathSample,
    y2: PathSample,
    basis: OrthonormalBasis,
    n_list: Sequence[int],
    *,
    q0: float,
    radius: float = 1.0,
    at_boundary: bool = False,
    final_tolerance: float | None = None,
    mc_n: int | None = None,
    rng: RngStream | None = None,
    mc_lambda: tuple[complex, complex] = (0.8 - 0.4j, 0.8 + 0.4j),
    theorem_id: str = "limit",
) -> list[VerifyReport]:
    """Finite-n G_n integrals along λ_n → -iq against the GFFT.

    Residuals must not increase over n_list. With ``at_boundary`` the
    finite-n values are taken at λ = -iq itself.
    """
    reports: list[VerifyReport] = []
    with _timed(theorem_id, reports):
        lam = LambdaPair.boundary(*q)
        target = gfft(F, lam, y1, y2, q0=q0)
        values = []
        for n in n_list:
            if at_boundary:
                lam_n = tuple(lam)
            else:
                lam_n = (
                    lambda_path(q[0], n, q0, radius),
                    lambda_path(q[1], n, q0, radius),
                )
            values.append((n, atom_limit_value(F, lam_n, y1, y2, basis, n)))
        reports.extend(_residual_rows(theorem_id, target, values, final_tolerance))

        if mc_n is not None and rng is not None:
            n = n_list[0]
            l1, l2 = (complex(v) for v in mc_lambda)
            if min(l1.real, l2.real) < MC_MIN_RE:
                raise DomainError(
                    f"Monte-Carlo λ needs Re λ ≥ {MC_MIN_RE}",
                    details={"lambda": [str(l1), str(l2)]},
                )
            closed = atom_limit_value(F, (l1, l2), y1, y2, basis, n)
            shifted = _phase_shifted(F, y1, y2)
            scale = (inv_sqrt(l1) * inv_sqrt(l2)) ** (-n)
            estimate = mc_expectation(
                lambda x1, x2: scale
                * g_n_weight(l1, x1, basis, n)
                * g_n_weight(l2, x2, basis, n)
                * shifted(x1, x2),
                F.cfg,
                mc_n,
                rng,
            )
            reports.append(
                _mc_report(
                    f"{theorem_id}-mc", closed, estimate.mean, closed - estimate.mean,
                    estimate.stderr, n,
                )
            )
    return reports


def verify_change_of_scale(
    F: PhaseFunctional,
    rho1: float,
    rho2: float,
    basis: OrthonormalBasis,
    n_list: Sequence[int],
    *,
    final_tolerance: float | None = None,
    mc_n: int | None = None,
    rng: RngStream | None = None,
    theorem_id: str = "scale",
) -> list[VerifyReport]:
    """E[F(ρ1 x1, ρ2 x2)] against ρ^{-n}-weighted G_n integrals."""
    reports: list[VerifyReport] = []
    with _timed(theorem_id, reports):
        lam = LambdaPair.interior(rho1**-2, rho2**-2)
        lhs = analytic_integral(F, lam)
        zero = PathSample.zero(F.cfg)
        values = [(n, atom_limit_value(F, lam, zero, zero, basis, n)) for n in n_list]
        reports.extend(_residual_rows(theorem_id, lhs, values, final_tolerance))

        if mc_n is not None and rng is not None:
            estimate = mc_expectation(
                lambda x1, x2: F(x1.scaled(rho1), x2.scaled(rho2)),
                F.cfg,
                mc_n,
                rng,
            )
            reports.append(
                _mc_report(
                    f"{theorem_id}-mc", lhs, estimate.mean, lhs - estimate.mean,
                    estimate.stderr,
                )
            )
    return reports


def verify_variation_limits(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    q: tuple[float, float],
    y1: PathSample,
    y2: PathSample,
    basis: OrthonormalBasis,
    n_list: Sequence[int],
    rho: tuple[float, float],
    *,
    q0: float,
    final_tolerance: float | None = None,
    mc_n: int | None = None,
    rng: RngStream | None = None,
) -> list[VerifyReport]:
    """The limit and change-of-scale checks applied to δF(·|g1, g2).

    δF carries the atoms of F with coefficients c_k i[(u_k1, g1) + (u_k2, g2)],
    so both G_n identities hold for it unchanged. ``final_tolerance`` is per
    unit of Σ|c_k| once the variation weights exceed 1.
    """
    delta = first_variation(F, g1, g2)
    if final_tolerance is not None:
        final_tolerance *= max(1.0, delta.total_variation)
    reports = verify_limit_gfft(
        delta,
        q,
        y1,
        y2,
        basis,
        n_list,
        q0=q0,
        final_tolerance=final_tolerance,
        mc_n=mc_n,
        rng=rng,
        theorem_id="variation-limit",
    )
    reports.extend(
        verify_change_of_scale(
            delta,
            *rho,
            basis,
            n_list,
            mc_n=mc_n,
            rng=None if rng is None else rng.sibling(),
            theorem_id="variation-scale",
        )
    )
    return reports


# -- translation --------------------------------------------------------------


def translation_closed_forms(
    G: PhaseFunctional, x0: CMElement
) -> tuple[complex, complex]:
    """Both sides of E[G(x + x0)] = e^{-‖x0‖²/2 - (x0,a)} E[G(x) e^{(x0,x)~}]."""
    x0_norm_sq = inner_cm(x0, x0)
    x0_drift = pair_drift(x0)
    lhs = rhs_expectation = 0j
    for a in G.atoms:
        u_norm_sq = inner_cm(a.u1, a.u1)
        u_drift = pair_drift(a.u1)
        cross = inner_cm(a.u1, x0)
        lhs += a.coef * cmath.exp(1j * cross + 1j * u_drift - u_norm_sq / 2)
        rhs_expectation += a.coef * cmath.exp(
            1j * u_drift + x0_drift + (-u_norm_sq + 2j * cross + x0_norm_sq) / 2
        )
    prefactor = math.exp(-x0_norm_sq / 2 - x0_drift)
    return lhs, prefactor * rhs_expectation


def verify_translation(
    G: PhaseFunctional,
    x0: CMElement,
    *,
    mc_n: int | None = None,
    rng: RngStream | None = None,
) -> list[VerifyReport]:
    """Cameron-Martin translation of a first-coordinate functional G."""
    reports: list[VerifyReport] = []
    with _timed("translation", reports):
        lhs, rhs = translation_closed_forms(G, x0)
        reports.append(
            VerifyReport(
                "translation-closed", lhs, rhs, abs(lhs - rhs), closed_threshold(lhs)
            )
        )
        if mc_n is not None and rng is not None:
            prefactor = math.exp(-inner_cm(x0, x0) / 2 - pair_drift(x0))

            def shifted(x1: PathBatch, _x2: PathBatch) -> np.ndarray:
                return _first_coordinate(G, x1.translated(x0))

            def weighted(x1: PathBatch, _x2: PathBatch) -> np.ndarray:
                return prefactor * _first_coordinate(G, x1) * np.exp(pwz(x0, x1))

            left, diff = mc_expectations(
                [shifted, lambda x1, x2: shifted(x1, x2) - weighted(x1, x2)],
                G.cfg,
                mc_n,
                rng,
            )
            reports.append(
                _mc_report("translation-mc", rhs, left.mean, diff.mean, diff.stderr)
            )
    return reports


def verify_gfft_translation(
    F: PhaseFunctional,
    q: tuple[float, float],
    g1: CMElement,
    g2: CMElement,
    y1: PathSample,
    y2: PathSample,
    *,
    operators: tuple[KernelOperator, KernelOperator] | None = None,
    q0: float | None = None,
) -> VerifyReport:
    """Translation theorem for the GFFT, both sides in closed form."""
    reports: list[VerifyReport] = []
    with _timed("gfft-translation", reports):
        check = gfft_translation_check(
            F, q, g1, g2, y1, y2, operators=operators, q0=q0
        )
        reports.append(
            VerifyReport(
                "gfft-translation",
                check.lhs,
                check.rhs,
                check.difference,
                closed_threshold(check.lhs),
            )
        )
    return reports[0]


# -- Cameron-Storvick ---------------------------------------------------------


def verify_cameron_storvick_mu(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    rho1: float,
    rho2: float,
    *,
    mc_n: int,
    rng: RngStream,
) -> VerifyReport:
    """E[δF(ρx | ρg)] = E[F(ρx) Σ_j (g_j, x_j)~] - Σ_j (g_j, a) E[F(ρx)].

    (g, x)~ - (g, a) is the Stieltjes sum over the Gaussian part, and the
    paths are paired antithetically, so F ≡ 1 gives exactly zero.
    """
    reports: list[VerifyReport] = []
    with _timed("cs-mu", reports):
        delta = first_variation(F, rho1 * g1, rho2 * g2)
        closed = analytic_integral(delta, LambdaPair.interior(rho1**-2, rho2**-2))

        def lhs(x1: PathBatch, x2: PathBatch) -> np.ndarray:
            return np.asarray(delta(x1.scaled(rho1), x2.scaled(rho2)))

        def rhs(x1: PathBatch, x2: PathBatch) -> np.ndarray:
            centered = pwz_noise(g1, x1) + pwz_noise(g2, x2)
            return np.asarray(F(x1.scaled(rho1), x2.scaled(rho2))) * centered

        right, diff = mc_expectations(
            [rhs, lambda x1, x2: lhs(x1, x2) - rhs(x1, x2)],
            F.cfg,
            mc_n,
            rng,
            antithetic=True,
        )
        reports.append(
            _mc_report("cs-mu", closed, right.mean, diff.mean, diff.stderr)
        )
    return reports[0]


def cameron_storvick_sides(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    q: tuple[float, float],
    coefficient: complex = -1.0,
    q0: float | None = None,
) -> tuple[complex, complex]:
    """Both sides of the Feynman-integral Cameron-Storvick identity.

    RHS = -i E^{anf}[F · (q1 (g1,x1)~ + q2 (g2,x2)~)]
          + coefficient · Σ_j (-iq_j)^{1/2} (g_j, a) E^{anf}[F].
    """
    q1, q2 = q
    lam = LambdaPair.boundary(q1, q2)
    lam.require_admissible(q0)
    lhs = feynman_integral(first_variation(F, g1, g2), q1, q2)
    weighted = feynman_linear_weighted(F, g1, g2, q1, q2, lam)
    drift_term = sum(
        sqrt_lambda(complex(0, -qj)) * pair_drift(g)
        for qj, g in ((q1, g1), (q2, g2))
    )
    rhs = -1j * weighted + coefficient * drift_term * feynman_integral(F, q1, q2)
    return lhs, rhs


def verify_cameron_storvick_feynman(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    q: tuple[float, float],
    *,
    q0: float | None = None,
    coefficient: complex = -1.0,
) -> VerifyReport:
    reports: list[VerifyReport] = []
    with _timed("cs-feynman", reports):
        lhs, rhs = cameron_storvick_sides(F, g1, g2, q, coefficient, q0)
        reports.append(
            VerifyReport(
                "cs-feynman", lhs, rhs, abs(lhs - rhs), closed_threshold(lhs)
            )
        )
    return reports[0]


# -- multiplication operators -------------------------------------------------


def kernel_form_sides(
    f: AtomicMeasure, A: KernelOperator, g: CMElement
) -> tuple[complex, complex]:
    """Feynman integral of δF along (A⁺^{1/2} g, -A⁻^{1/2} g) at q = (1, -1).

    The left side runs through the generic transform code. The right side
    is Σ_k c_k i(A w_k, g) e^{-(i/2)(A w_k, w_k)} times the drift phase,
    with the drift pairings taken by direct quadrature of z √φ± a'.
    """
    A_plus, A_minus = decompose(A)
    F = build_fresnel(f, A_plus, A_minus)
    g1 = apply_op(A_plus, g, sqrt=True)
    g2 = -apply_op(A_minus, g, sqrt=True)
    lhs = feynman_integral(first_variation(F, g1, g2), 1.0, -1.0)

    cfg = f.cfg
    root_plus, root_minus = A_plus.sqrt_kernel(), A_minus.sqrt_kernel()
    rhs = 0j
    for c, w in f.atoms:
        Aw = apply_op(A, w)
        drift_plus = w.integrate_against(root_plus * cfg.a_prime_values)
        drift_minus = w.integrate_against(root_minus * cfg.a_prime_values)
        phase = inv_sqrt(-1j) * drift_plus + inv_sqrt(1j) * drift_minus
        rhs += (
            c
            * 1j
            * inner_cm(Aw, g)
            * cmath.exp(-0.5j * inner_cm(Aw, w))
            * cmath.exp(1j * phase)
        )
    return lhs, rhs


def verify_kernel_form(
    f: AtomicMeasure, A: KernelOperator, g: CMElement
) -> VerifyReport:
    reports: list[VerifyReport] = []
    with _timed("section9", reports):
        lhs, rhs = kernel_form_sides(f, A, g)
        reports.append(
            VerifyReport("section9", lhs, rhs, abs(lhs - rhs), closed_threshold(lhs))
        )
    return reports[0]


# -- analyticity --------------------------------------------------------------


def cauchy_riemann_residual(
    F: PhaseFunctional,
    lam: LambdaPair,
    j: int,
    y1: PathSample,
    y2: PathSample,
    step: float = 1e-4,
) -> float:
    """|∂f/∂y - i ∂f/∂x| for f = GFFT as a function of λ_j."""
    base = list(lam)

    def f(delta: complex) -> complex:
        values = list(base)
        values[j] = values[j] + delta
        return gfft(F, LambdaPair.interior(*values), y1, y2)

    dx = (f(step) - f(-step)) / (2 * step)
    dy = (f(1j * step) - f(-1j * step)) / (2 * step)
    return abs(dy - 1j * dx)


def verify_analyticity(
    F: PhaseFunctional,
    lambdas: Sequence[LambdaPair],
    y1: PathSample,
    y2: PathSample,
    *,
    step: float = 1e-4,
    tolerance: float = 1e-6,
) -> list[VerifyReport]:
    reports: list[VerifyReport] = []
    with _timed("analyticity", reports):
        for lam in lambdas:
            value = gfft(F, lam, y1, y2)
            for j in (0, 1):
                residual = cauchy_riemann_residual(F, lam, j, y1, y2, step)
                theorem_id = f"analyticity-{j + 1}"
                reports.append(
                    VerifyReport(theorem_id, value, value, residual, tolerance)
                )
    return reports
