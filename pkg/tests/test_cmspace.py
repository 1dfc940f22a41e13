"""Tests for Cameron-Martin elements, bases and multiplication operators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfftkit.core.cmspace import (
    CMElement,
    KernelOperator,
    apply_op,
    beta,
    d_inv,
    decompose,
    drift_element,
    drift_of,
    eval_path,
    extend_basis,
    gram_schmidt,
    inner_cm,
    legendre_seeds,
    op_norm_sqrt,
    pair_drift,
    poly_element,
    standard_basis,
)
from gfftkit.core.exceptions import (
    DomainError,
    RankDeficiencyError,
    SpaceMismatchError,
)
from gfftkit.core.gbm import PathSample, pwz
from gfftkit.core.timefns import inner_ab, make_space

coefficients = st.lists(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False), min_size=1, max_size=4
)

# ── Elements and paths ──


class TestElements:
    def test_unit_density_on_wiener(self, wiener) -> None:
        w = d_inv(np.ones_like(wiener.nodes), wiener)
        np.testing.assert_allclose(w.path(), wiener.nodes, atol=1e-13)

    def test_unit_density_on_quadratic_variance(self) -> None:
        cfg = make_space("zero", [], "poly", [0.0, 0.0, 1.0], grid_n=256)
        w = d_inv(np.ones_like(cfg.nodes), cfg)
        np.testing.assert_allclose(w.path(), cfg.nodes**2, atol=1e-13)

    def test_zero_density(self, wiener) -> None:
        assert np.all(CMElement.zero(wiener).path() == 0.0)

    def test_density_length_checked(self, wiener) -> None:
        with pytest.raises(DomainError, match="density length"):
            CMElement.from_density(np.ones(5), wiener)

    def test_arithmetic(self, drifted) -> None:
        u = poly_element([1.0, 2.0], drifted)
        v = poly_element([0.0, -1.0], drifted)
        combined = 2.0 * u - v / 2.0
        np.testing.assert_allclose(combined.density, 2.0 * u.density - 0.5 * v.density)
        assert (-u).distance(u * -1.0) == 0.0

    def test_mixing_spaces_rejected(self, wiener, drifted) -> None:
        with pytest.raises(SpaceMismatchError):
            inner_cm(beta(1.0, wiener), beta(1.0, drifted))


class TestInnerProduct:
    def test_beta_norm(self, wiener) -> None:
        assert inner_cm(beta(1.0, wiener), beta(1.0, wiener)) == pytest.approx(1.0, abs=1e-14)

    def test_legendre_pair_orthogonal(self, wiener) -> None:
        one = d_inv(np.ones_like(wiener.nodes), wiener)
        p1 = d_inv(np.sqrt(3.0) * (2.0 * wiener.nodes - 1.0), wiener)
        assert abs(inner_cm(one, p1)) <= 1e-12

    def test_zero_element(self, drifted) -> None:
        assert inner_cm(poly_element([1.0, 1.0], drifted), CMElement.zero(drifted)) == 0.0

    def test_drift_pairing(self, drifted) -> None:
        # (β_1, a) = ∫ a' dt = a(1)
        assert pair_drift(beta(1.0, drifted)) == pytest.approx(1.0, abs=1e-12)

    def test_drift_element_traces_a(self, quadratic) -> None:
        drift = drift_element(quadratic)
        np.testing.assert_allclose(drift.path(), quadratic.a_values, atol=1e-10)
        # z(t) = t: (w, a) = ∫ t a'(t) dt
        ramp = poly_element([0.0, 1.0], quadratic)
        assert inner_cm(ramp, drift) == pytest.approx(0.5, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(coefficients, st.sampled_from([0.1, 0.25, 0.5, 0.73, 1.0]))
    def test_reproducing_property(self, coeffs: list[float], t: float) -> None:
        cfg = make_space("linear", [0.5], "poly", [0.0, 1.0, 0.5], grid_n=256)
        w = poly_element(coeffs, cfg)
        assert abs(inner_cm(w, beta(t, cfg)) - eval_path(w, t)) <= 1e-8

    def test_beta_zero_is_zero(self, wiener) -> None:
        assert beta(0.0, wiener).norm == 0.0

    @settings(max_examples=25, deadline=None)
    @given(coefficients)
    def test_isometry_bound(self, coeffs: list[float]) -> None:
        cfg = make_space("linear", [1.0], "poly", [0.0, 1.0, 1.0], grid_n=256)
        w = poly_element(coeffs, cfg)
        z = w.density
        assert inner_cm(w, w) <= inner_ab(z, z, cfg) + 1e-12

    def test_drift_element_is_cached(self, drifted) -> None:
        assert drifted.drift_element is drifted.drift_element
        assert drift_of(drifted) is drifted.drift_element
        assert pair_drift(beta(0.5, drifted)) == pytest.approx(0.5, abs=1e-12)


class TestSupports:
    def test_zero_has_no_pieces(self, wiener) -> None:
        zero = CMElement.zero(wiener)
        assert zero.pieces == ()
        assert zero.support == 0
        half = beta(0.5, wiener)
        assert (half + zero).supports == half.supports
        assert (half + zero).norm == pytest.approx(np.sqrt(0.5), abs=1e-14)

    def test_sum_of_betas(self, wiener) -> None:
        w = beta(0.5, wiener) + beta(1.0, wiener)
        assert w.supports == (wiener.N // 2, wiener.N)
        # min(s, t) summed over the four pairs
        assert inner_cm(w, w) == pytest.approx(2.5, abs=1e-12)
        assert eval_path(w, 0.25) == pytest.approx(0.5, abs=1e-14)
        assert eval_path(w, 0.75) == pytest.approx(1.25, abs=1e-14)
        x = PathSample.from_values(wiener.nodes, wiener)
        assert pwz(w, x) == pytest.approx(1.5, abs=1e-12)

    def test_difference_of_betas(self, wiener) -> None:
        w = beta(1.0, wiener) - beta(0.5, wiener)
        assert inner_cm(w, w) == pytest.approx(0.5, abs=1e-12)
        assert abs(eval_path(w, 0.25)) <= 1e-14
        assert eval_path(w, 0.75) == pytest.approx(0.25, abs=1e-14)
        x = PathSample.from_values(wiener.nodes, wiener)
        assert pwz(w, x) == pytest.approx(0.5, abs=1e-12)

    def test_scalar_multiple_keeps_support(self, wiener) -> None:
        half = beta(0.5, wiener)
        w = 3.0 * half
        assert w.supports == half.supports
        assert (-w).supports == half.supports
        assert (w / 3.0).distance(half) == 0.0
        x = PathSample.from_values(wiener.nodes, wiener)
        assert pwz(w, x) == pytest.approx(1.5, abs=1e-12)

    def test_cancellation(self, drifted) -> None:
        half = beta(0.5, drifted)
        assert (half - half).norm == 0.0

    @pytest.mark.parametrize("t", [0.125, 0.37, 0.5, 0.9])
    def test_reproducing_on_combinations(self, drifted, t: float) -> None:
        w = 2.0 * beta(0.25, drifted) - beta(0.75, drifted) + poly_element([1.0, 1.0], drifted)
        assert inner_cm(w, beta(t, drifted)) == pytest.approx(eval_path(w, t), abs=1e-10)


# ── Bases ──


class TestBases:
    def test_standard_basis_orthonormal(self, quadratic) -> None:
        basis = standard_basis(12, quadratic)
        assert basis.size == 12
        assert basis.is_orthonormal()
        assert np.max(np.abs(basis.gram() - np.eye(12))) <= 1e-10

    def test_first_element_is_beta_on_wiener(self, wiener) -> None:
        basis = standard_basis(3, wiener)
        assert basis.elements[0].distance(beta(1.0, wiener)) <= 1e-12

    def test_dependent_seed(self, wiener) -> None:
        seeds = legendre_seeds(2, wiener)
        with pytest.raises(RankDeficiencyError) as exc_info:
            gram_schmidt([seeds[0], seeds[1], 3.0 * seeds[1] - seeds[0]], 3, wiener)
        assert exc_info.value.details["seed_index"] == 2

    def test_prefix_too_long(self, wiener) -> None:
        with pytest.raises(DomainError):
            standard_basis(2, wiener).prefix(3)

    def test_two_seed_legendre(self, wiener) -> None:
        basis = gram_schmidt([np.ones_like(wiener.nodes), wiener.nodes], 2, wiener)
        expected = np.sqrt(3.0) * (2.0 * wiener.nodes - 1.0)
        np.testing.assert_allclose(np.abs(basis.elements[1].density), np.abs(expected), atol=1e-10)

    def test_single_seed_normalized(self, wiener) -> None:
        basis = gram_schmidt([2.0 * np.ones_like(wiener.nodes)], 1, wiener)
        np.testing.assert_allclose(basis.elements[0].density, 1.0, atol=1e-13)

    def test_extension_of_ramp(self, wiener) -> None:
        basis = gram_schmidt([np.ones_like(wiener.nodes)], 1, wiener)
        ext = extend_basis(basis, poly_element([0.0, 1.0], wiener))
        assert ext.coeffs[0] == pytest.approx(0.5, abs=1e-12)
        assert ext.residual_norm**2 == pytest.approx(1.0 / 12.0, abs=1e-10)
        assert ext.next_element is not None

    def test_partial_energy_bounded(self, drifted) -> None:
        w = d_inv(np.abs(drifted.nodes - 0.3), drifted)
        partial = np.cumsum(standard_basis(8, drifted).coefficients(w) ** 2)
        assert np.all(np.diff(partial) >= 0.0)
        assert partial[-1] <= inner_cm(w, w) + 1e-10

    def test_extension_inside_span(self, wiener) -> None:
        basis = standard_basis(4, wiener)
        ext = extend_basis(basis, poly_element([1.0, -2.0, 0.5], wiener))
        assert ext.residual_norm <= 1e-8
        assert ext.next_element is None

    def test_extension_outside_span(self, wiener) -> None:
        basis = standard_basis(2, wiener)
        w = poly_element([0.0, 0.0, 1.0], wiener)
        ext = extend_basis(basis, w)
        assert ext.next_element is not None
        assert ext.residual_norm**2 == pytest.approx(
            inner_cm(w, w) - float(np.sum(ext.coeffs**2)), abs=1e-10
        )
        assert abs(ext.next_element.norm - 1.0) <= 1e-10
        for e in basis.elements:
            assert abs(inner_cm(e, ext.next_element)) <= 1e-10


# ── Operators ──


class TestKernelOperator:
    def test_identity_and_zero(self, drifted) -> None:
        w = poly_element([0.2, 1.0], drifted)
        assert apply_op(KernelOperator.identity(drifted), w).distance(w) == 0.0
        assert apply_op(KernelOperator.zero(drifted), w).norm == 0.0

    @settings(max_examples=20, deadline=None)
    @given(coefficients, coefficients, coefficients)
    def test_self_adjoint(self, phi: list[float], z1: list[float], z2: list[float]) -> None:
        cfg = make_space("linear", [1.0], "linear", [1.0], grid_n=128)
        A = KernelOperator.from_poly(phi, cfg)
        w1, w2 = poly_element(z1, cfg), poly_element(z2, cfg)
        lhs = inner_cm(apply_op(A, w1), w2)
        rhs = inner_cm(w1, apply_op(A, w2))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_square_root_consistency(self, drifted) -> None:
        A = KernelOperator.from_poly([1.0, 2.0], drifted)
        w = poly_element([0.5, -1.0, 2.0], drifted)
        root = apply_op(A, w, sqrt=True)
        assert inner_cm(apply_op(A, w), w) == pytest.approx(inner_cm(root, root), rel=1e-10)

    def test_negative_kernel_has_no_root(self, drifted) -> None:
        A = KernelOperator.from_poly([-0.5, 1.0], drifted)
        assert not A.nonnegative
        with pytest.raises(DomainError, match="negative kernel"):
            apply_op(A, beta(1.0, drifted), sqrt=True)

    def test_decompose(self, drifted) -> None:
        A = KernelOperator.from_poly([-0.5, 1.0], drifted)
        A_plus, A_minus = decompose(A)
        assert A_plus.nonnegative and A_minus.nonnegative
        np.testing.assert_allclose(A_plus.phi - A_minus.phi, A.phi)

    def test_op_norm_sqrt(self, drifted) -> None:
        A = KernelOperator.from_poly([1.0, 3.0], drifted)
        assert op_norm_sqrt(A) == pytest.approx(2.0, rel=1e-14)
        assert op_norm_sqrt(KernelOperator.identity(drifted)) == 1.0

    def test_op_norm_sqrt_needs_nonnegative_kernel(self, drifted) -> None:
        with pytest.raises(DomainError):
            op_norm_sqrt(KernelOperator.from_poly([-1.0], drifted))
