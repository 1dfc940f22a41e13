"""Tests for drift/variance functions, quadrature and space validation."""

import math

import numpy as np
import pytest

from gfftkit.core.exceptions import (
    ConfigurationError,
    DomainError,
    InvalidFunctionError,
)
from gfftkit.core.timefns import (
    FunctionFamily,
    TimeGrid,
    family_function,
    inner_ab,
    make_space,
    quadrature,
    refinement_diverges,
    validate_config,
)

# ── Families and the grid ──


class TestFamilies:
    def test_linear(self) -> None:
        f, fp = family_function("linear", [2.0])
        t = np.array([0.0, 0.5, 1.0])
        np.testing.assert_allclose(f(t), [0.0, 1.0, 2.0])
        np.testing.assert_allclose(fp(t), [2.0, 2.0, 2.0])

    def test_poly_derivative(self) -> None:
        f, fp = family_function(FunctionFamily.POLY, [0.0, 1.0, 3.0])
        t = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(f(t), [0.0, 4.0, 14.0])
        np.testing.assert_allclose(fp(t), [1.0, 7.0, 13.0])

    def test_exp(self) -> None:
        f, fp = family_function("exp", [2.0, 0.5])
        assert f(np.array([0.0]))[0] == 0.0
        assert fp(np.array([0.0]))[0] == pytest.approx(1.0)

    def test_wrong_param_count(self) -> None:
        with pytest.raises(ConfigurationError, match="linear family"):
            family_function("linear", [1.0, 2.0])

    def test_unknown_family(self) -> None:
        with pytest.raises(ValueError):
            family_function("cubic-spline", [1.0])


class TestTimeGrid:
    def test_nodes_are_read_only(self) -> None:
        grid = TimeGrid(2.0, 8)
        assert grid.nodes[-1] == 2.0
        assert grid.h == 0.25
        with pytest.raises(ValueError):
            grid.nodes[0] = 1.0

    def test_odd_grid_rejected(self) -> None:
        with pytest.raises(ConfigurationError, match="even"):
            TimeGrid(1.0, 7)

    def test_snap(self) -> None:
        grid = TimeGrid(1.0, 10)
        assert grid.snap(0.0) == 0
        assert grid.snap(0.31) == 3
        assert grid.snap(1.0) == 10

    def test_snap_outside_interval(self) -> None:
        with pytest.raises(DomainError, match="outside"):
            TimeGrid(1.0, 10).snap(1.5)


# ── Quadrature ──


class TestQuadrature:
    def test_constant(self, wiener) -> None:
        assert quadrature(lambda t: np.ones_like(t), wiener) == pytest.approx(1.0, abs=1e-14)

    def test_exact_on_quadratics(self, wiener) -> None:
        assert quadrature(lambda t: t**2, wiener) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_exponential(self, wiener) -> None:
        assert abs(quadrature(np.exp, wiener) - (math.e - 1.0)) <= 1e-10

    def test_complex_integrand(self, wiener) -> None:
        value = quadrature(lambda t: np.exp(1j * t), wiener)
        expected = (np.exp(1j) - 1.0) / 1j
        assert abs(value - expected) <= 1e-10

    def test_linearity(self, drifted) -> None:
        f = lambda t: np.sin(3 * t)  # noqa: E731
        g = lambda t: t**3 - t  # noqa: E731
        combined = quadrature(lambda t: 2.5 * f(t) + g(t), drifted)
        assert combined == pytest.approx(
            2.5 * quadrature(f, drifted) + quadrature(g, drifted), abs=1e-12
        )

    def test_simpson_halving(self) -> None:
        exact = math.e - 1.0
        errors = []
        for n in (16, 32):
            cfg = make_space("zero", [], "linear", [1.0], grid_n=n)
            errors.append(abs(quadrature(np.exp, cfg) - exact))
        assert 12.0 < errors[0] / errors[1] < 20.0

    def test_non_finite_names_node(self, wiener) -> None:
        with pytest.raises(InvalidFunctionError, match="node 0"):
            quadrature(lambda t: 1.0 / t, wiener)


class TestInnerAB:
    def test_drift_doubles_weight(self, drifted) -> None:
        one = lambda t: np.ones_like(t)  # noqa: E731
        assert inner_ab(one, one, drifted) == pytest.approx(2.0, abs=1e-12)

    def test_wiener_unit(self, wiener) -> None:
        one = lambda t: np.ones_like(t)  # noqa: E731
        assert inner_ab(one, one, wiener) == pytest.approx(1.0, abs=1e-12)

    def test_linear_against_constant(self, wiener) -> None:
        assert inner_ab(lambda t: t, lambda t: np.ones_like(t), wiener) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_bilinear_and_symmetric(self, quadratic) -> None:
        u = lambda t: np.cos(t)  # noqa: E731
        v = lambda t: t**2 + 1  # noqa: E731
        w = lambda t: np.exp(-t)  # noqa: E731
        lhs = inner_ab(lambda t: 1.7 * u(t) + w(t), v, quadratic)
        rhs = 1.7 * inner_ab(u, v, quadratic) + inner_ab(w, v, quadratic)
        assert lhs == pytest.approx(rhs, abs=1e-12)
        assert inner_ab(u, v, quadratic) == pytest.approx(inner_ab(v, u, quadratic))

    def test_zero_only_for_zero(self, wiener) -> None:
        assert inner_ab(np.zeros_like(wiener.nodes), np.zeros_like(wiener.nodes), wiener) == 0.0
        assert inner_ab(lambda t: t, lambda t: t, wiener) > 0.0


# ── Validation ──


class TestValidateConfig:
    def test_linear_pair_passes(self, drifted) -> None:
        report = validate_config(drifted)
        assert report.passed
        assert report.failures() == []

    def test_two_thirds_power_drift_fails_cubic_check(self) -> None:
        cfg = make_space("power", [1.0, 2.0 / 3.0], "linear", [1.0], grid_n=1024)
        report = validate_config(cfg)
        failed = {check.name for check in report.failures()}
        assert "∫ |a'|³ dt finite" in failed
        assert "∫ a'² dt finite" not in failed

    def test_fractional_power_drift_passes(self) -> None:
        cfg = make_space("power", [1.0, 0.8], "linear", [1.0], grid_n=256)
        assert validate_config(cfg).passed
        slope = cfg.a_values[1] / cfg.nodes[1]
        assert cfg.a_prime_values[0] == pytest.approx(slope, rel=1e-12)

    def test_negative_variance_fails(self) -> None:
        cfg = make_space("zero", [], "linear", [-1.0], grid_n=64)
        report = validate_config(cfg)
        assert not report.passed
        assert "b' > 0" in {check.name for check in report.failures()}

    def test_nonzero_origin_fails(self) -> None:
        cfg = make_space("zero", [], "poly", [0.5, 1.0], grid_n=64)
        report = validate_config(cfg)
        assert "b(0) = 0" in {check.name for check in report.failures()}

    def test_non_finite_variance_raises(self) -> None:
        cfg = make_space("zero", [], "power", [1.0, -1.0], grid_n=64)
        with pytest.raises(InvalidFunctionError, match="grid node 0"):
            validate_config(cfg)


class TestRefinement:
    def test_convergent_integral(self) -> None:
        diverges, value = refinement_diverges(lambda t: t**2, 1.0, 64)
        assert not diverges
        assert value == pytest.approx(1.0 / 3.0, rel=1e-4)

    def test_logarithmic_blow_up(self) -> None:
        diverges, _ = refinement_diverges(lambda t: 1.0 / t, 1.0, 64)
        assert diverges
