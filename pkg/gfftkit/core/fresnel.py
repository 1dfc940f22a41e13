"""Fresnel-type functionals in atomic form and their closed-form transforms.

A functional is a finite sum

    F(x1, x2) = Σ_k c_k exp{i (u_k1, x1)~ + i (u_k2, x2)~}

with u_kj ∈ C'_{a,b}. Every transform below maps atoms to atoms, so the
class is closed under the GFFT, first variation, translation and products.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field

from .cmspace import (
    CMElement,
    KernelOperator,
    _same_space,
    apply_op,
    decompose,
    drift_of,
    inner_cm,
    op_norm_sqrt,
    pair_drift,
)
from .exceptions import DimensionError, DomainError
from .gbm import PathBatch, PathSample, pwz
from .timefns import SpaceConfig

MERGE_TOL = 1e-12


def inv_sqrt(lam: complex) -> complex:
    """λ^{-1/2} on the branch with positive real part."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("λ^{-1/2} is undefined at λ = 0", details={"lambda": 0})
    if lam.real < 0:
        raise DomainError(
            "λ must lie in the closed right half-plane",
            details={"lambda": str(lam)},
        )
    return 1.0 / cmath.sqrt(lam)


def sqrt_lambda(lam: complex) -> complex:
    """λ^{1/2} on the branch with positive real part."""
    return 1.0 / inv_sqrt(lam)


@dataclass(frozen=True)
class LambdaPair:
    """Scaling parameters (λ1, λ2); boundary pairs carry q and mean (-iq1, -iq2)."""

    lam1: complex
    lam2: complex
    q: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.q is None:
            for lam in (self.lam1, self.lam2):
                if not complex(lam).real > 0:
                    raise DomainError(
                        "interior λ needs a positive real part",
                        details={"lambda": str(lam)},
                    )
        elif 0.0 in self.q:
            raise DomainError("boundary q must be nonzero", details={"q": self.q})

    @classmethod
    def interior(cls, lam1: complex, lam2: complex | None = None) -> LambdaPair:
        return cls(complex(lam1), complex(lam1 if lam2 is None else lam2))

    @classmethod
    def boundary(cls, q1: float, q2: float) -> LambdaPair:
        return cls(complex(0.0, -q1), complex(0.0, -q2), (float(q1), float(q2)))

    @property
    def is_boundary(self) -> bool:
        return self.q is not None

    def __iter__(self) -> Iterator[complex]:
        return iter((complex(self.lam1), complex(self.lam2)))

    def gamma_margin(self, q0: float) -> float:
        """min_j (1/√(2 q0) - |Im λ_j^{-1/2}|); positive inside Γ_{q0}."""
        _require_q0(q0)
        bound = 1.0 / math.sqrt(2.0 * q0)
        return min(bound - abs(inv_sqrt(lam).imag) for lam in self)

    def in_gamma(self, q0: float) -> bool:
        return self.gamma_margin(q0) > 0

    def require_admissible(self, q0: float | None) -> None:
        if q0 is None or self.q is None:
            return
        _require_q0(q0)
        for j, qj in enumerate(self.q, start=1):
            if abs(qj) <= q0:
                raise DomainError(
                    f"|q{j}| = {abs(qj)} must exceed q0 = {q0} "
                    "for (-iq1, -iq2) to lie in Γ_{q0}",
                    details={"q": list(self.q), "q0": q0},
                )


def _require_q0(q0: float) -> None:
    if not q0 > 0:
        raise DomainError("q0 must be positive", details={"q0": q0})


# -- measures and functionals -------------------------------------------------


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """A finite complex measure Σ c_k δ_{w_k} on C'_{a,b}."""

    atoms: tuple[tuple[complex, CMElement], ...]
    cfg: SpaceConfig

    @classmethod
    def from_atoms(
        cls, atoms: Sequence[tuple[complex, CMElement]], cfg: SpaceConfig
    ) -> AtomicMeasure:
        """Build a measure, merging atoms whose densities coincide."""
        merged: list[tuple[complex, CMElement]] = []
        for coef, w in atoms:
            _same_space(cfg, w.cfg)
            for i, (c, v) in enumerate(merged):
                if v.supports == w.supports and v.distance(w) <= MERGE_TOL:
                    merged[i] = (c + complex(coef), v)
                    break
            else:
                merged.append((complex(coef), w))
        return cls(tuple(merged), cfg)

    @property
    def total_variation(self) -> float:
        return float(sum(abs(c) for c, _ in self.atoms))


@dataclass(frozen=True, eq=False)
class PhaseAtom:
    coef: complex
    u1: CMElement
    u2: CMElement

    def with_coef(self, coef: complex) -> PhaseAtom:
        return PhaseAtom(complex(coef), self.u1, self.u2)


@dataclass(frozen=True, eq=False)
class FresnelSource:
    """The measure and operators a functional was built from."""

    measure: AtomicMeasure
    A1: KernelOperator
    A2: KernelOperator


@dataclass(frozen=True, eq=False)
class PhaseFunctional:
    atoms: tuple[PhaseAtom, ...]
    cfg: SpaceConfig
    source: FresnelSource | None = field(default=None)

    @classmethod
    def one(cls, cfg: SpaceConfig) -> PhaseFunctional:
        zero = CMElement.zero(cfg)
        return cls((PhaseAtom(1.0 + 0j, zero, zero),), cfg)

    @classmethod
    def zero(cls, cfg: SpaceConfig) -> PhaseFunctional:
        return cls((), cfg)

    @classmethod
    def single(
        cls, coef: complex, u1: CMElement, u2: CMElement | None = None
    ) -> PhaseFunctional:
        cfg = _same_space(u1.cfg, *(() if u2 is None else (u2.cfg,)))
        u2 = CMElement.zero(cfg) if u2 is None else u2
        return cls((PhaseAtom(complex(coef), u1, u2),), cfg)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def coefs(self) -> np.ndarray:
        return np.array([a.coef for a in self.atoms], dtype=complex)

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.coefs)))

    def scaled(self, c: complex) -> PhaseFunctional:
        return PhaseFunctional(
            tuple(a.with_coef(c * a.coef) for a in self.atoms), self.cfg
        )

    def with_coefs(self, coefs: Sequence[complex]) -> PhaseFunctional:
        return PhaseFunctional(
            tuple(a.with_coef(c) for a, c in zip(self.atoms, coefs)), self.cfg
        )

    def __add__(self, other: PhaseFunctional) -> PhaseFunctional:
        _same_space(self.cfg, other.cfg)
        return PhaseFunctional(self.atoms + other.atoms, self.cfg)

    def __mul__(self, other: PhaseFunctional | complex) -> PhaseFunctional:
        """Pointwise product; on measures this is convolution of atoms."""
        if not isinstance(other, PhaseFunctional):
            return self.scaled(complex(other))
        _same_space(self.cfg, other.cfg)
        atoms = tuple(
            PhaseAtom(a.coef * b.coef, a.u1 + b.u1, a.u2 + b.u2)
            for a in self.atoms
            for b in other.atoms
        )
        return PhaseFunctional(atoms, self.cfg)

    def __rmul__(self, other: complex) -> PhaseFunctional:
        return self.scaled(complex(other))

    def __call__(
        self, x1: PathSample | PathBatch, x2: PathSample | PathBatch
    ) -> complex | np.ndarray:
        return eval_functional(self, x1, x2)

    def transformed(
        self, lam: LambdaPair, q0: float | None = None
    ) -> PhaseFunctional:
        """The GFFT of F as a functional: coefficients c_k ψ(λ; atom_k)."""
        lam.require_admissible(q0)
        return self.with_coefs(
            [a.coef * psi(lam, a, self.cfg) for a in self.atoms]
        )


def build_fresnel(
    f: AtomicMeasure, A1: KernelOperator, A2: KernelOperator
) -> PhaseFunctional:
    """Atom (c, w) becomes (c, A1^{1/2} w, A2^{1/2} w)."""
    _same_space(f.cfg, A1.cfg, A2.cfg)
    atoms = tuple(
        PhaseAtom(c, apply_op(A1, w, sqrt=True), apply_op(A2, w, sqrt=True))
        for c, w in f.atoms
    )
    return PhaseFunctional(atoms, f.cfg, FresnelSource(f, A1, A2))


def eval_functional(
    F: PhaseFunctional,
    x1: PathSample | PathBatch,
    x2: PathSample | PathBatch,
) -> complex | np.ndarray:
    """F(x1, x2); vectorized over the rows of a batch."""
    _same_space(F.cfg, x1.cfg, x2.cfg)
    if not F.atoms:
        if isinstance(x1, PathBatch):
            return np.zeros(x1.count, dtype=complex)
        return 0j
    terms = [
        a.coef * np.exp(1j * (pwz(a.u1, x1) + pwz(a.u2, x2))) for a in F.atoms
    ]
    total = np.sum(np.stack(terms), axis=0)
    return total if isinstance(x1, PathBatch) else complex(total)


def _exponent(lam: complex, u: CMElement) -> complex:
    norm_sq = inner_cm(u, u)
    return -norm_sq / (2.0 * lam) + 1j * inv_sqrt(lam) * pair_drift(u)


def psi(lam: LambdaPair, atom: PhaseAtom, cfg: SpaceConfig) -> complex:
    """ψ(λ; u1, u2) = exp{Σ_j [-‖u_j‖²/(2λ_j) + i λ_j^{-1/2} (u_j, a)]}."""
    _same_space(cfg, atom.u1.cfg)
    lam1, lam2 = lam
    return cmath.exp(_exponent(lam1, atom.u1) + _exponent(lam2, atom.u2))


# -- class membership ---------------------------------------------------------


class ClassReport(BaseModel):
    q0: float
    k_values: list[float] = Field(default_factory=list)
    weighted_sum: float = 0.0
    gamma_margin: float = math.inf
    bound_holds: bool = True
    cap: float = math.inf
    lambdas_checked: int = 0

    @property
    def member(self) -> bool:
        return self.weighted_sum < self.cap


def k_bound(F: PhaseFunctional, q0: float) -> list[float]:
    """k(q0; A; w_k) per atom.

    Uses ‖A_j^{1/2}‖ ‖w_k‖ when F remembers its operators, and the
    smaller ‖u_kj‖ otherwise.
    """
    _require_q0(q0)
    drift_norm = _drift_norm(F.cfg)
    factor = drift_norm / math.sqrt(2.0 * q0)
    if F.source is not None and len(F.source.measure.atoms) == len(F.atoms):
        norms = (op_norm_sqrt(F.source.A1), op_norm_sqrt(F.source.A2))
        return [
            math.exp(factor * (norms[0] + norms[1]) * w.norm)
            for _, w in F.source.measure.atoms
        ]
    return [math.exp(factor * (a.u1.norm + a.u2.norm)) for a in F.atoms]


def _drift_norm(cfg: SpaceConfig) -> float:
    return drift_of(cfg).norm


def class_check(
    F: PhaseFunctional,
    q0: float,
    lambdas: Sequence[LambdaPair],
    cap: float = math.inf,
) -> ClassReport:
    """Σ|c_k| k_k and the bound |ψ(λ; atom)| ≤ k on sampled λ ∈ Γ_{q0}."""
    k_values = k_bound(F, q0)
    weighted = float(sum(abs(a.coef) * k for a, k in zip(F.atoms, k_values)))
    report = ClassReport(q0=q0, k_values=k_values, weighted_sum=weighted, cap=cap)

    drift_norm = _drift_norm(F.cfg)
    for lam in lambdas:
        margin = lam.gamma_margin(q0)
        report.gamma_margin = min(report.gamma_margin, margin)
        if margin <= 0:
            continue
        report.lambdas_checked += 1
        for atom, k in zip(F.atoms, k_values):
            size = abs(psi(lam, atom, F.cfg))
            strict = (atom.u1.norm + atom.u2.norm) * drift_norm > 0
            if size > k or (strict and size >= k):
                report.bound_holds = False
    return report


# -- transforms ---------------------------------------------------------------


def gfft(
    F: PhaseFunctional,
    lam: LambdaPair,
    y1: PathSample,
    y2: PathSample,
    q0: float | None = None,
) -> complex:
    """Σ_k c_k exp{i (u_k1, y1)~ + i (u_k2, y2)~} ψ(λ; atom_k).

    The same evaluator serves every p-index of the transform; at boundary
    λ = -iq it is the substituted closed form.
    """
    lam.require_admissible(q0)
    return complex(eval_functional(F.transformed(lam), y1, y2))


def analytic_integral(F: PhaseFunctional, lam: LambdaPair) -> complex:
    """The analytic function space integral: the GFFT at y = 0."""
    zero = PathSample.zero(F.cfg)
    return gfft(F, lam, zero, zero)


def feynman_integral(
    F: PhaseFunctional, q1: float, q2: float, q0: float | None = None
) -> complex:
    """The analytic Feynman integral with parameters (q1, q2)."""
    zero = PathSample.zero(F.cfg)
    return gfft(F, LambdaPair.boundary(q1, q2), zero, zero, q0=q0)


def feynman_kb(f: AtomicMeasure, A: KernelOperator, q: float) -> complex:
    """Feynman integral of F over (A⁺, A⁻) at (q, -q), from the kernel of A.

    Σ_k c_k exp{-(i/2q)(A w_k, w_k)} exp{i[(-iq)^{-1/2}(A⁺^{1/2} w_k, a)
    + (iq)^{-1/2}(A⁻^{1/2} w_k, a)]}.
    """
    A_plus, A_minus = decompose(A)
    total = 0j
    for c, w in f.atoms:
        quadratic = inner_cm(apply_op(A, w), w)
        drift = inv_sqrt(complex(0, -q)) * pair_drift(
            apply_op(A_plus, w, sqrt=True)
        ) + inv_sqrt(complex(0, q)) * pair_drift(apply_op(A_minus, w, sqrt=True))
        total += c * cmath.exp(-1j * quadratic / (2.0 * q) + 1j * drift)
    return total


def first_variation(
    F: PhaseFunctional, g1: CMElement, g2: CMElement
) -> PhaseFunctional:
    """δF(·|g1, g2): coefficients c_k i[(u_k1, g1) + (u_k2, g2)]."""
    _same_space(F.cfg, g1.cfg, g2.cfg)
    return F.with_coefs(
        [
            a.coef * 1j * (inner_cm(a.u1, g1) + inner_cm(a.u2, g2))
            for a in F.atoms
        ]
    )


def first_variation_fd(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    x1: PathSample,
    x2: PathSample,
    h: float = 1e-5,
) -> complex:
    """Central difference of h ↦ F(x1 + h g1, x2 + h g2) at h = 0."""
    plus = eval_functional(F, x1.translated(h * g1), x2.translated(h * g2))
    minus = eval_functional(F, x1.translated(-h * g1), x2.translated(-h * g2))
    return complex((plus - minus) / (2.0 * h))


@dataclass(frozen=True)
class TranslationCheck:
    lhs: complex
    rhs: complex

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)


def translated_functional(
    F: PhaseFunctional, q: tuple[float, float], h1: CMElement, h2: CMElement
) -> PhaseFunctional:
    """F* = F · exp{Σ_j -i q_j (h_j, x_j)~}."""
    q1, q2 = q
    return PhaseFunctional(
        tuple(PhaseAtom(a.coef, a.u1 - q1 * h1, a.u2 - q2 * h2) for a in F.atoms),
        F.cfg,
    )


def gfft_translation_check(
    F: PhaseFunctional,
    q: tuple[float, float],
    g1: CMElement,
    g2: CMElement,
    y1: PathSample,
    y2: PathSample,
    operators: tuple[KernelOperator, KernelOperator] | None = None,
    q0: float | None = None,
) -> TranslationCheck:
    """Both sides of the translation theorem for the GFFT at λ = -iq."""
    if operators is None:
        if F.source is None:
            raise DomainError(
                "translation needs the operators the functional was built with"
            )
        operators = (F.source.A1, F.source.A2)
    A1, A2 = operators
    lam = LambdaPair.boundary(*q)
    lam.require_admissible(q0)

    h1 = apply_op(A1, g1, sqrt=True)
    h2 = apply_op(A2, g2, sqrt=True)
    lhs = gfft(F, lam, y1.translated(h1), y2.translated(h2))

    exponent = 0j
    for qj, A, g, h, y in ((q[0], A1, g1, h1, y1), (q[1], A2, g2, h2, y2)):
        exponent += 1j * qj * inner_cm(apply_op(A, g), g) / 2.0
        exponent -= sqrt_lambda(complex(0, -qj)) * pair_drift(h)
        exponent += 1j * qj * pwz(h, y)
    rhs = cmath.exp(exponent) * gfft(translated_functional(F, q, h1, h2), lam, y1, y2)
    return TranslationCheck(lhs, rhs)


def feynman_linear_weighted(
    F: PhaseFunctional,
    g1: CMElement,
    g2: CMElement,
    c1: complex,
    c2: complex,
    lam: LambdaPair,
) -> complex:
    """E^{an_λ}[F · (c1 (g1, x1)~ + c2 (g2, x2)~)] in closed form.

    Per atom: Σ_j c_j [λ_j^{-1/2} (g_j, a) + i (u_j, g_j)/λ_j] ψ(λ; atom).
    """
    lam1, lam2 = lam
    total = 0j
    for a in F.atoms:
        weight = c1 * (
            inv_sqrt(lam1) * pair_drift(g1) + 1j * inner_cm(a.u1, g1) / lam1
        ) + c2 * (inv_sqrt(lam2) * pair_drift(g2) + 1j * inner_cm(a.u2, g2) / lam2)
        total += a.coef * weight * psi(lam, a, F.cfg)
    return total


def build_from_theta(
    nu: Sequence[tuple[complex, Sequence[float]]],
    gs: Sequence[CMElement],
    A1: KernelOperator,
    A2: KernelOperator,
) -> PhaseFunctional:
    """F from a discrete measure ν on ℝ^d and directions g_1..g_d.

    Each point (weight, v) becomes an atom at w = Σ_l v_l g_l.
    """
    if not gs:
        raise DimensionError("at least one direction is required", {"d": 0})
    d = len(gs)
    cfg = _same_space(*(g.cfg for g in gs))
    atoms = []
    for index, (weight, v) in enumerate(nu):
        if len(v) != d:
            raise DimensionError(
                f"point {index} has dimension {len(v)}, expected {d}",
                details={"point": index, "dimension": len(v), "expected": d},
            )
        w = CMElement.zero(cfg)
        for vl, g in zip(v, gs):
            w = w + float(vl) * g
        atoms.append((complex(weight), w))
    return build_fresnel(AtomicMeasure.from_atoms(atoms, cfg), A1, A2)
