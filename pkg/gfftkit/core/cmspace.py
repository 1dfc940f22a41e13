"""The Cameron-Martin space C'_{a,b}[0, T].

An element w is stored through its density z = D_t w on the grid, so
w(t) = ∫_0^t z db and (w1, w2)_{C'} = ∫ z1 z2 db. The density is kept as a
sum of pieces, each with a support end index s: a piece vanishes after t_s
and every integral involving it stops at t_s. That is how β_t stays exact
for grid-aligned t, alone or inside any linear combination.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as L
from numpy.polynomial import polynomial as P

from .exceptions import DomainError, RankDeficiencyError, SpaceMismatchError
from .timefns import SpaceConfig, grid_values

RANK_TOL = 1e-8
GRAM_TOL = 1e-10

Piece = tuple[int, np.ndarray]


def _same_space(*cfgs: SpaceConfig) -> SpaceConfig:
    first = cfgs[0]
    for other in cfgs[1:]:
        if other is not first:
            raise SpaceMismatchError(
                "objects were built on different function spaces",
                details={"labels": [c.label for c in cfgs]},
            )
    return first


def _merge(pieces: Iterable[Piece], N: int) -> tuple[Piece, ...]:
    by_support: dict[int, np.ndarray] = {}
    for support, density in pieces:
        # a piece stopping at t_0 integrates to nothing
        if support <= 0:
            continue
        support = min(support, N)
        if support in by_support:
            by_support[support] = by_support[support] + density
        else:
            by_support[support] = density
    return tuple(sorted(by_support.items(), key=lambda item: item[0]))


@dataclass(frozen=True, eq=False)
class CMElement:
    """An element of C'_{a,b}: density pieces ``(support, z)`` on the grid."""

    pieces: tuple[Piece, ...]
    cfg: SpaceConfig

    def __post_init__(self) -> None:
        checked = []
        for support, density in self.pieces:
            density = np.asarray(density, dtype=float)
            if density.shape != self.cfg.nodes.shape:
                raise DomainError(
                    "density length does not match the grid",
                    details={"length": density.shape, "nodes": self.cfg.nodes.shape},
                )
            checked.append((int(support), grid_values(density, self.cfg, "density")))
        object.__setattr__(self, "pieces", _merge(checked, self.cfg.N))

    @classmethod
    def from_density(
        cls, density: np.ndarray, cfg: SpaceConfig, support: int | None = None
    ) -> CMElement:
        """A single piece; ``support`` defaults to the whole interval."""
        return cls(((cfg.N if support is None else support, density),), cfg)

    @classmethod
    def zero(cls, cfg: SpaceConfig) -> CMElement:
        return cls((), cfg)

    @property
    def support(self) -> int:
        """Last node where the density may be nonzero; 0 for the zero element."""
        return self.pieces[-1][0] if self.pieces else 0

    @property
    def supports(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.pieces)

    @property
    def density(self) -> np.ndarray:
        """z on the grid, each piece cut off after its support node."""
        total = np.zeros_like(self.cfg.nodes)
        for s, z in self.pieces:
            total[: s + 1] += z[: s + 1]
        return total

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(inner_cm(self, self), 0.0)))

    def integrate_against(self, values: np.ndarray, stop: int | None = None) -> float:
        """Σ over pieces of ∫_0^{min(s, stop)} z · values dt."""
        stop = self.cfg.N if stop is None else stop
        return float(
            sum(self.cfg.integrate_to(z * values, min(s, stop)) for s, z in self.pieces)
        )

    def path(self) -> np.ndarray:
        """w(t_i) at every grid node."""
        values = np.zeros_like(self.cfg.nodes)
        for s, z in self.pieces:
            part = self.cfg.cumulative(z * self.cfg.b_prime_values)
            part[s + 1 :] = part[s]
            values += part
        return values

    def _scaled(self, c: float) -> CMElement:
        return CMElement(tuple((s, c * z) for s, z in self.pieces), self.cfg)

    def __add__(self, other: CMElement) -> CMElement:
        _same_space(self.cfg, other.cfg)
        return CMElement(self.pieces + other.pieces, self.cfg)

    def __sub__(self, other: CMElement) -> CMElement:
        return self + (-other)

    def __mul__(self, scalar: float) -> CMElement:
        return self._scaled(float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> CMElement:
        return self._scaled(1.0 / float(scalar))

    def __neg__(self) -> CMElement:
        return self._scaled(-1.0)

    def distance(self, other: CMElement) -> float:
        """Sup-distance of densities on the grid."""
        _same_space(self.cfg, other.cfg)
        return float(np.max(np.abs(self.density - other.density)))


def d_inv(z: np.ndarray, cfg: SpaceConfig) -> CMElement:
    """D_t^{-1}: the element whose density is z."""
    return CMElement.from_density(np.asarray(z, dtype=float), cfg)


def eval_path(w: CMElement, t: float) -> float:
    """w(t) = ∫_0^t z db, with t snapped to the nearest grid node."""
    return w.integrate_against(w.cfg.b_prime_values, w.cfg.grid.snap(t))


def inner_cm(w1: CMElement, w2: CMElement) -> float:
    """(w1, w2)_{C'} = ∫ z1 z2 db, piece by piece up to the shorter support."""
    cfg = _same_space(w1.cfg, w2.cfg)
    return float(
        sum(w1.integrate_against(z * cfg.b_prime_values, s) for s, z in w2.pieces)
    )


def beta(t: float, cfg: SpaceConfig) -> CMElement:
    """β_t, the representer of evaluation at t: (w, β_t)_{C'} = w(t)."""
    s = cfg.grid.snap(t)
    return CMElement.from_density(np.ones_like(cfg.nodes), cfg, s)


def poly_density(coeffs: Sequence[float], cfg: SpaceConfig) -> np.ndarray:
    """Density values of a polynomial in t (ascending coefficients)."""
    return P.polyval(cfg.nodes, np.asarray(coeffs, dtype=float)) * np.ones_like(
        cfg.nodes
    )


def poly_element(coeffs: Sequence[float], cfg: SpaceConfig) -> CMElement:
    return d_inv(poly_density(coeffs, cfg), cfg)


def drift_element(cfg: SpaceConfig) -> CMElement:
    """The element with density a'/b', so that (w, drift)_{C'} = ∫ z a' dt."""
    return d_inv(cfg.a_prime_values / cfg.b_prime_values, cfg)


def pair_drift(w: CMElement) -> float:
    """(w, a)_{C'}."""
    return inner_cm(w, drift_of(w.cfg))


def drift_of(cfg: SpaceConfig) -> CMElement:
    """Shared drift element of a space, built once per SpaceConfig."""
    return cfg.drift_element


def legendre_seeds(count: int, cfg: SpaceConfig) -> list[np.ndarray]:
    """Shifted Legendre polynomials on [0, T], well conditioned Gram-Schmidt seeds."""
    x = 2.0 * cfg.nodes / cfg.T - 1.0
    seeds = []
    for k in range(count):
        c = np.zeros(k + 1)
        c[k] = 1.0
        seeds.append(L.legval(x, c))
    return seeds


# -- bases --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    elements: tuple[CMElement, ...]
    gram_tol: float = GRAM_TOL

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def prefix(self, n: int) -> OrthonormalBasis:
        if n > self.size:
            raise DomainError(
                f"basis has {self.size} elements, {n} requested",
                details={"size": self.size, "n": n},
            )
        return OrthonormalBasis(self.elements[:n], self.gram_tol)

    def gram(self) -> np.ndarray:
        n = self.size
        g = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = inner_cm(self.elements[i], self.elements[j])
        return g

    def is_orthonormal(self) -> bool:
        if not self.elements:
            return True
        return bool(np.max(np.abs(self.gram() - np.eye(self.size))) <= self.gram_tol)

    def coefficients(self, w: CMElement) -> np.ndarray:
        return np.array([inner_cm(e, w) for e in self.elements])

    def drift_coefficients(self) -> np.ndarray:
        return np.array([pair_drift(e) for e in self.elements])


def _orthogonalize(v: CMElement, against: Sequence[CMElement]) -> CMElement:
    # modified Gram-Schmidt, two passes
    for _ in range(2):
        for e in against:
            v = v - inner_cm(e, v) * e
    return v


def gram_schmidt(
    seeds: Sequence[np.ndarray], n: int, cfg: SpaceConfig
) -> OrthonormalBasis:
    """Orthonormalize the first n seed densities under (·,·)_{C'}."""
    if n > len(seeds):
        raise DomainError(
            f"{n} basis elements requested from {len(seeds)} seeds",
            details={"n": n, "seeds": len(seeds)},
        )
    elements: list[CMElement] = []
    for index, seed in enumerate(seeds[:n]):
        v = _orthogonalize(d_inv(seed, cfg), elements)
        norm = v.norm
        if norm <= RANK_TOL:
            raise RankDeficiencyError(
                f"seed {index} is linearly dependent on the previous seeds",
                details={"seed_index": index, "residual_norm": norm},
            )
        elements.append(v / norm)
    return OrthonormalBasis(tuple(elements))


def standard_basis(n: int, cfg: SpaceConfig) -> OrthonormalBasis:
    return gram_schmidt(legendre_seeds(n, cfg), n, cfg)


@dataclass(frozen=True, eq=False)
class BasisExtension:
    coeffs: np.ndarray
    residual_norm: float
    next_element: CMElement | None = field(default=None)


def extend_basis(basis: OrthonormalBasis, w: CMElement) -> BasisExtension:
    """Project w on the basis; return coefficients, residual norm and e_{n+1}."""
    coeffs = basis.coefficients(w)
    r = _orthogonalize(w, basis.elements)
    actual = r.norm
    # ‖w‖² - Σ c² cancels catastrophically when w lies in the span
    if actual <= RANK_TOL:
        return BasisExtension(coeffs, actual, None)
    residual_sq = inner_cm(w, w) - float(np.sum(coeffs**2))
    residual_norm = float(np.sqrt(max(residual_sq, 0.0)))
    return BasisExtension(coeffs, residual_norm, r / actual)


# -- multiplication operators -------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """A w = ∫_0^t φ z db: bounded, self-adjoint on C'_{a,b}."""

    phi: np.ndarray
    cfg: SpaceConfig

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", grid_values(self.phi, self.cfg, "phi"))

    @classmethod
    def from_poly(cls, coeffs: Sequence[float], cfg: SpaceConfig) -> KernelOperator:
        return cls(poly_density(coeffs, cfg), cfg)

    @classmethod
    def identity(cls, cfg: SpaceConfig) -> KernelOperator:
        return cls(np.ones_like(cfg.nodes), cfg)

    @classmethod
    def zero(cls, cfg: SpaceConfig) -> KernelOperator:
        return cls(np.zeros_like(cfg.nodes), cfg)

    @property
    def nonnegative(self) -> bool:
        return bool(self.phi.min() >= 0.0)

    def sqrt_kernel(self) -> np.ndarray:
        if not self.nonnegative:
            raise DomainError(
                "square root of an operator with a negative kernel",
                details={"min_phi": float(self.phi.min())},
            )
        return np.sqrt(self.phi)


def apply_op(A: KernelOperator, w: CMElement, sqrt: bool = False) -> CMElement:
    """A w, or A^{1/2} w when sqrt is set."""
    _same_space(A.cfg, w.cfg)
    kernel = A.sqrt_kernel() if sqrt else A.phi
    return CMElement(tuple((s, kernel * z) for s, z in w.pieces), w.cfg)


def decompose(A: KernelOperator) -> tuple[KernelOperator, KernelOperator]:
    """Split A = A⁺ - A⁻ by the positive and negative parts of φ."""
    return (
        KernelOperator(np.maximum(A.phi, 0.0), A.cfg),
        KernelOperator(np.maximum(-A.phi, 0.0), A.cfg),
    )


def op_norm_sqrt(A: KernelOperator) -> float:
    """‖A^{1/2}‖, approximated by the grid maximum of √φ."""
    return float(np.max(A.sqrt_kernel()))
