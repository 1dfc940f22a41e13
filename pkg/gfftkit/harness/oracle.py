"""Finite-dimensional exact values and quadrature oracles.

Given an orthonormal basis e_1..e_n, the variables s_k = (e_k, x)~ are
independent N((e_k, a), 1). The weight

    G_n(λ, x) = exp{((1-λ)/2) Σ s_k² + (λ^{1/2} - 1) Σ (e_k, a) s_k}

turns their law into the λ-scaled one, which gives closed forms for
E[G_n(λ, x) exp{i (w, x)~}] and, through them, for the finite-n terms of
the GFFT limit and change of scale formulas.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from ..core.cmspace import CMElement, OrthonormalBasis, extend_basis, pair_drift
from ..core.exceptions import DomainError, VerificationError
from ..core.fresnel import LambdaPair, PhaseFunctional, inv_sqrt, sqrt_lambda
from ..core.gbm import PathBatch, PathSample, pwz

GH_NODES = 96


def g_n_weight(
    lam: complex, x: PathSample | PathBatch, basis: OrthonormalBasis, n: int
) -> complex | np.ndarray:
    """G_n(λ, x); vectorized over a batch."""
    lam = complex(lam)
    if not lam.real > 0:
        raise DomainError(
            "G_n needs Re λ > 0 to be integrable", details={"lambda": str(lam)}
        )
    prefix = basis.prefix(n)
    s = np.array([pwz(e, x) for e in prefix.elements])
    m = prefix.drift_coefficients()
    if n == 0:
        exponent = np.zeros(s.shape[1:]) if s.ndim > 1 else 0.0
    else:
        exponent = (1 - lam) / 2 * np.sum(s**2, axis=0) + (
            sqrt_lambda(lam) - 1
        ) * np.tensordot(m, s, axes=1)
    return np.exp(exponent)


@dataclass(frozen=True)
class LemmaTerms:
    """Projection data of w on the first n basis elements."""

    coeffs: np.ndarray
    drift: np.ndarray
    norm_sq: float
    residual: float
    residual_drift: float

    @classmethod
    def of(cls, w: CMElement, basis: OrthonormalBasis, n: int) -> LemmaTerms:
        prefix = basis.prefix(n)
        ext = extend_basis(prefix, w)
        residual_drift = (
            pair_drift(ext.next_element) if ext.next_element is not None else 0.0
        )
        return cls(
            coeffs=ext.coeffs,
            drift=prefix.drift_coefficients(),
            norm_sq=float(np.sum(ext.coeffs**2)) + ext.residual_norm**2,
            residual=ext.residual_norm,
            residual_drift=residual_drift,
        )


def lemma_limit_normalized(
    lam: complex, w: CMElement, basis: OrthonormalBasis, n: int
) -> complex:
    """λ^{n/2} E[G_n(λ, x) exp{i (w, x)~}], in exponent form.

    Continues analytically to the boundary Re λ = 0, λ ≠ 0.
    """
    terms = LemmaTerms.of(w, basis, n)
    return _normalized(complex(lam), terms)


def _normalized(lam: complex, terms: LemmaTerms) -> complex:
    s = float(np.sum(terms.coeffs**2))
    exponent = (
        (lam - 1) / (2 * lam) * s
        - terms.norm_sq / 2
        + 1j * inv_sqrt(lam) * float(np.dot(terms.drift, terms.coeffs))
        + 1j * terms.residual_drift * terms.residual
    )
    return cmath.exp(exponent)


def lemma_limit_exact(
    lam: complex, w: CMElement, basis: OrthonormalBasis, n: int
) -> complex:
    """E[G_n(λ, x) exp{i (w, x)~}] = λ^{-n/2} × the normalized value."""
    return inv_sqrt(lam) ** n * lemma_limit_normalized(lam, w, basis, n)


def gauss_hermite_lemma(
    lam: complex,
    w: CMElement,
    basis: OrthonormalBasis,
    n: int,
    nodes: int = GH_NODES,
) -> complex:
    """E[G_n(λ, x) exp{i (w, x)~}] by Gauss-Hermite quadrature.

    (w, x)~ = Σ c_k s_k + r s_{n+1} with independent unit-variance s's, so
    the (n+1)-dimensional tensor rule factors into one-dimensional sums.
    Each G dimension is rescaled by σ² = Re λ/|λ|², which keeps the rule
    convergent for complex λ.
    """
    lam = complex(lam)
    if not lam.real > 0:
        raise DomainError("quadrature oracle needs Re λ > 0", {"lambda": str(lam)})
    terms = LemmaTerms.of(w, basis, n)
    t, weights = hermegauss(nodes)
    root = sqrt_lambda(lam)
    sigma = float(np.sqrt(lam.real)) / abs(lam)

    value = 1.0 + 0j
    for c, m in zip(terms.coeffs, terms.drift):
        center = ((root * m + 1j * c) / lam).real
        s = center + sigma * t
        exponent = (
            -((s - m) ** 2) / 2
            + t**2 / 2
            + (1 - lam) / 2 * s**2
            + (root - 1) * m * s
            + 1j * c * s
        )
        value *= sigma * np.sum(weights * np.exp(exponent)) / np.sqrt(2 * np.pi)

    # the residual direction carries no G weight
    s = terms.residual_drift + t
    value *= np.sum(weights * np.exp(1j * terms.residual * s)) / np.sqrt(2 * np.pi)
    if not cmath.isfinite(value):
        raise VerificationError(
            "Gauss-Hermite sum is not finite",
            details={"lambda": str(lam), "n": n, "nodes": nodes},
        )
    return complex(value)


def atom_limit_value(
    F: PhaseFunctional,
    lam: LambdaPair | tuple[complex, complex],
    y1: PathSample,
    y2: PathSample,
    basis: OrthonormalBasis,
    n: int,
) -> complex:
    """λ1^{n/2} λ2^{n/2} E[G_n(λ1, x1) G_n(λ2, x2) F(y1 + x1, y2 + x2)], exact."""
    lam1, lam2 = (complex(v) for v in lam)
    total = 0j
    for a in F.atoms:
        phase = cmath.exp(1j * (pwz(a.u1, y1) + pwz(a.u2, y2)))
        total += (
            a.coef
            * phase
            * lemma_limit_normalized(lam1, a.u1, basis, n)
            * lemma_limit_normalized(lam2, a.u2, basis, n)
        )
    return total


def lambda_path(
    q: float, n: int, q0: float, radius: float = 1.0, max_halvings: int = 60
) -> complex:
    """λ_n = -iq + radius·0.5ⁿ, pulled toward -iq until it lies in Γ_{q0}."""
    offset = radius * 0.5**n
    bound = 1.0 / np.sqrt(2.0 * q0)
    for _ in range(max_halvings):
        lam = complex(offset, -q)
        if abs(inv_sqrt(lam).imag) < bound:
            return lam
        offset /= 2
    raise DomainError(
        "no point of the λ path lies in Γ_q0", details={"q": q, "q0": q0, "n": n}
    )
