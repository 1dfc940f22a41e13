"""Drift and variance functions, the time grid, and scalar quadrature.

All integrals over [0, T] go through composite Simpson on a uniform grid.
``d|a|`` is realized as ``|a'(t)| dt`` since drifts are absolutely continuous.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import simpson, trapezoid

from .exceptions import ConfigurationError, DomainError, InvalidFunctionError

if TYPE_CHECKING:
    from .cmspace import CMElement

GridFunction = Callable[[np.ndarray], np.ndarray]
Integrand = Union[GridFunction, np.ndarray]

# Tolerances for "a(0) = 0" style checks
ORIGIN_TOL = 1e-12
# Refinement rules for divergent integrals
GROWTH_FACTOR = 2.0
CONTRACTION_LIMIT = 0.9


class FunctionFamily(str, Enum):
    """Parametric families accepted for a(t) and b(t)."""

    ZERO = "zero"
    LINEAR = "linear"  # c*t
    POLY = "poly"  # ascending coefficients
    EXP = "exp"  # c*(exp(k t) - 1)
    POWER = "power"  # c*t**p


def family_function(
    family: FunctionFamily | str, params: Sequence[float]
) -> tuple[GridFunction, GridFunction]:
    """Return ``(f, f')`` as vectorized callables for a parametric family."""
    family = FunctionFamily(family)
    params = [float(p) for p in params]

    if family is FunctionFamily.ZERO:
        return (lambda t: np.zeros_like(t, dtype=float)), (
            lambda t: np.zeros_like(t, dtype=float)
        )

    if family is FunctionFamily.LINEAR:
        if len(params) != 1:
            raise ConfigurationError(
                "linear family takes one parameter c",
                details={"family": family.value, "params": params},
            )
        (c,) = params
        return (lambda t: c * np.asarray(t, dtype=float)), (
            lambda t: np.full_like(t, c, dtype=float)
        )

    if family is FunctionFamily.POLY:
        if not params:
            raise ConfigurationError(
                "poly family needs at least one coefficient",
                details={"family": family.value},
            )
        coeffs = np.asarray(params, dtype=float)
        deriv = P.polyder(coeffs) if coeffs.size > 1 else np.zeros(1)
        return (lambda t: P.polyval(np.asarray(t, dtype=float), coeffs)), (
            lambda t: P.polyval(np.asarray(t, dtype=float), deriv)
            * np.ones_like(t, dtype=float)
        )

    if family is FunctionFamily.EXP:
        if len(params) != 2:
            raise ConfigurationError(
                "exp family takes parameters (c, k)",
                details={"family": family.value, "params": params},
            )
        c, k = params
        return (lambda t: c * np.expm1(k * np.asarray(t, dtype=float))), (
            lambda t: c * k * np.exp(k * np.asarray(t, dtype=float))
        )

    # POWER
    if len(params) != 2:
        raise ConfigurationError(
            "power family takes parameters (c, p)",
            details={"family": family.value, "params": params},
        )
    c, p = params

    def power_prime(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return c * p * np.power(t, p - 1.0)

    return (lambda t: c * np.power(np.asarray(t, dtype=float), p)), power_prime


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_N = T with N even."""

    T: float
    N: int = 1024

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ConfigurationError("horizon T must be positive", {"T": self.T})
        if self.N <= 0 or self.N % 2:
            raise ConfigurationError(
                "grid size N must be even and positive", {"N": self.N}
            )

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.linspace(0.0, self.T, self.N + 1)
        nodes.flags.writeable = False
        return nodes

    @property
    def h(self) -> float:
        return self.T / self.N

    def snap(self, t: float) -> int:
        """Index of the grid node nearest to t."""
        if t < -ORIGIN_TOL or t > self.T + ORIGIN_TOL:
            raise DomainError(
                f"time {t} outside [0, {self.T}]", details={"t": t, "T": self.T}
            )
        return int(np.clip(np.rint(t / self.h), 0, self.N))


@dataclass(frozen=True)
class VarianceSpec:
    b: GridFunction
    b_prime: GridFunction
    T: float


@dataclass(frozen=True)
class DriftSpec:
    a: GridFunction
    a_prime: GridFunction


@dataclass(frozen=True, eq=False)
class SpaceConfig:
    """The pair (a, b) on a time grid.

    Grid values of a, a', b, b' are computed once and shared by every
    element built on this space. Two configs are compatible only if they
    are the same object.
    """

    drift: DriftSpec
    variance: VarianceSpec
    grid: TimeGrid
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if abs(self.grid.T - self.variance.T) > ORIGIN_TOL:
            raise ConfigurationError(
                "grid horizon differs from variance horizon",
                {"grid_T": self.grid.T, "variance_T": self.variance.T},
            )

    @property
    def T(self) -> float:
        return self.grid.T

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @cached_property
    def a_values(self) -> np.ndarray:
        return _finite_on_grid(self.drift.a(self.nodes), self.nodes, "a")

    @cached_property
    def b_values(self) -> np.ndarray:
        return _finite_on_grid(self.variance.b(self.nodes), self.nodes, "b")

    @cached_property
    def b_prime_values(self) -> np.ndarray:
        return _finite_on_grid(self.variance.b_prime(self.nodes), self.nodes, "b'")

    @cached_property
    def a_prime_values(self) -> np.ndarray:
        """a' on the grid.

        a' may be singular at t = 0 (power drift with p < 1). There the node
        value is replaced by the mean slope over the first cell, so every
        space that passes validation has finite drift data.
        """
        values = np.array(self.drift.a_prime(self.nodes), dtype=float)
        values = np.broadcast_to(values, self.nodes.shape).copy()
        if not np.isfinite(values[0]):
            a = self.a_values
            values[0] = (a[1] - a[0]) / (self.nodes[1] - self.nodes[0])
        return _finite_on_grid(values, self.nodes, "a'")

    @cached_property
    def drift_element(self) -> CMElement:
        """The C'_{a,b} element with density a'/b', shared by all paths."""
        from .cmspace import drift_element

        return drift_element(self)

    def integrate(self, values: np.ndarray) -> float | complex:
        return _simpson(values, self.nodes)

    def integrate_to(self, values: np.ndarray, index: int) -> float:
        """Integral of real grid values over [0, t_index].

        Only nodes up to t_index are read, so the result does not depend on
        what the integrand does after the stopping point. An odd number of
        cells gets the three-point end correction of ``simpson``.
        """
        if index <= 0:
            return 0.0
        if index == 1:
            return float(trapezoid(values[:2], x=self.nodes[:2]))
        index = min(index, self.N)
        return float(simpson(values[: index + 1], x=self.nodes[: index + 1]))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Prefix integrals at every node, each computed by integrate_to."""
        return np.array([self.integrate_to(values, i) for i in range(self.N + 1)])


def make_space(
    a_family: FunctionFamily | str,
    a_params: Sequence[float],
    b_family: FunctionFamily | str,
    b_params: Sequence[float],
    T: float = 1.0,
    grid_n: int = 1024,
    label: str = "",
) -> SpaceConfig:
    """Build a SpaceConfig from parametric families."""
    a, a_prime = family_function(a_family, a_params)
    b, b_prime = family_function(b_family, b_params)
    return SpaceConfig(
        drift=DriftSpec(a=a, a_prime=a_prime),
        variance=VarianceSpec(b=b, b_prime=b_prime, T=float(T)),
        grid=TimeGrid(float(T), int(grid_n)),
        label=label,
    )


def _finite_on_grid(values: np.ndarray, nodes: np.ndarray, name: str) -> np.ndarray:
    values = np.broadcast_to(np.asarray(values), nodes.shape).copy()
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise InvalidFunctionError(
            f"{name} is not finite at grid node {i} (t={nodes[i]:.6g})",
            details={"function": name, "node": i, "t": float(nodes[i])},
        )
    values.flags.writeable = False
    return values


def _simpson(values: np.ndarray, nodes: np.ndarray) -> float | complex:
    if np.iscomplexobj(values):
        return complex(
            simpson(values.real, x=nodes), simpson(values.imag, x=nodes)
        )
    return float(simpson(values, x=nodes))


def grid_values(f: Integrand, cfg: SpaceConfig, name: str = "integrand") -> np.ndarray:
    """Evaluate a callable (or accept an array) on the grid, checking finiteness."""
    values = f(cfg.nodes) if callable(f) else np.asarray(f)
    return _finite_on_grid(values, cfg.nodes, name)


def quadrature(f: Integrand, cfg: SpaceConfig) -> float | complex:
    """Composite Simpson integral of f over [0, T]."""
    return _simpson(grid_values(f, cfg), cfg.nodes)


def inner_ab(u: Integrand, v: Integrand, cfg: SpaceConfig) -> float:
    """(u, v)_{a,b} = ∫ u v (b' + |a'|) dt."""
    weight = cfg.b_prime_values + np.abs(cfg.a_prime_values)
    uv = grid_values(u, cfg, "u") * grid_values(v, cfg, "v")
    return float(np.real(_simpson(uv * weight, cfg.nodes)))


# -- validation ---------------------------------------------------------------


@dataclass
class ConfigCheck:
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[ConfigCheck] = field(default_factory=list)

    def add(self, name: str, passed: bool, value: float, detail: str = "") -> None:
        self.checks.append(ConfigCheck(name, bool(passed), float(value), detail))

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[ConfigCheck]:
        return [check for check in self.checks if not check.passed]


def midpoint_integral(f: GridFunction, T: float, cells: int) -> float:
    """Composite midpoint rule; never evaluates f at the endpoints."""
    h = T / cells
    mids = (np.arange(cells) + 0.5) * h
    values = np.asarray(f(mids), dtype=float)
    if not np.all(np.isfinite(values)):
        return float("inf")
    return float(np.sum(values) * h)


def refinement_diverges(
    f: GridFunction, T: float, cells: int
) -> tuple[bool, float]:
    """Detect a divergent integral from its midpoint values at N, 2N and 4N cells.

    Divergent when the value more than doubles under one refinement, or when
    the refinement increments stop contracting (logarithmic blow-up).
    """
    i1, i2, i4 = (midpoint_integral(f, T, cells * k) for k in (1, 2, 4))
    if not np.isfinite(i4):
        return True, i4
    if abs(i2) > GROWTH_FACTOR * abs(i1) or abs(i4) > GROWTH_FACTOR * abs(i2):
        return True, i4
    d1, d2 = i2 - i1, i4 - i2
    if abs(d1) > 1e-9 * (1.0 + abs(i4)) and abs(d2) / abs(d1) >= CONTRACTION_LIMIT:
        return True, i4
    return False, i4


def validate_config(cfg: SpaceConfig) -> ValidationReport:
    """Check the hypotheses on (a, b).

    Raises InvalidFunctionError when a, b or b' is not finite at a grid node.
    a' may be singular at t = 0; the integrability checks decide whether
    that is acceptable.
    """
    report = ValidationReport()
    nodes = cfg.nodes

    a0 = float(cfg.a_values[0])
    b0 = float(cfg.b_values[0])
    report.add("a(0) = 0", abs(a0) <= ORIGIN_TOL, a0)
    report.add("b(0) = 0", abs(b0) <= ORIGIN_TOL, b0)

    b_prime = cfg.b_prime_values
    lo, hi = float(b_prime.min()), float(b_prime.max())
    report.add("b' > 0", lo > 0, lo, f"min b' on grid = {lo:.6g}")
    report.add("b' bounded", np.isfinite(hi), hi, f"max b' on grid = {hi:.6g}")

    increments = np.diff(cfg.b_values)
    report.add(
        "b strictly increasing",
        bool(np.all(increments > 0)),
        float(increments.min()),
    )

    interior = cfg.drift.a_prime(nodes[1:])
    _finite_on_grid(interior, nodes[1:], "a'")

    a_prime = cfg.drift.a_prime
    diverges, value = refinement_diverges(lambda t: a_prime(t) ** 2, cfg.T, cfg.N)
    report.add("∫ a'² dt finite", not diverges, value)
    diverges, value = refinement_diverges(
        lambda t: np.abs(a_prime(t)) ** 3, cfg.T, cfg.N
    )
    report.add("∫ |a'|³ dt finite", not diverges, value)

    return report
