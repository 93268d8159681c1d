import numpy as np
import pytest

import unhippo as uh

SQRT3 = np.sqrt(3.0)


class TestDataFreeMatrix:
    def test_n2_exact(self):
        out = uh.data_free_matrix(uh.make_hippo(2))
        assert np.array_equal(out, np.array([[0.0, SQRT3], [0.0, 1.0]]))

    def test_equals_outer_form_n64(self):
        sys_h = uh.make_hippo(64)
        outer = np.outer(sys_h.b, sys_h.b) - sys_h.a
        assert np.abs(uh.data_free_matrix(sys_h) - outer).max() < 1e-12

    def test_n1_zero(self):
        assert np.array_equal(uh.data_free_matrix(uh.make_hippo(1)), np.zeros((1, 1)))


class TestMakeQ:
    def test_n3_exact(self):
        assert np.allclose(uh.make_q(3), [0.0, SQRT3, 3 * np.sqrt(5.0)], rtol=1e-15)

    def test_first_entry_zero(self):
        for n in (1, 2, 10, 100):
            assert uh.make_q(n)[0] == 0.0

    def test_matches_derivative_recurrence(self):
        # dP_i/dx at 1 via dP_i = i P_{i-1} + x dP_{i-1}, P_j(1) = 1
        q = uh.make_q(65)
        deriv = 0.0
        for i in range(1, 65):
            deriv = i + deriv
            scaled = np.sqrt(2.0 * i + 1.0) * deriv
            assert abs(q[i] - scaled) <= 1e-9 * max(1.0, scaled)


class TestMakeRegularized:
    def test_n1_zero(self):
        reg = uh.make_regularized(uh.make_hippo(1))
        assert np.array_equal(reg.a_r, np.zeros((1, 1)))

    def test_matches_normal_equations(self):
        sys_h = uh.make_hippo(4)
        reg = uh.make_regularized(sys_h)
        q = uh.make_q(4)
        stack = np.vstack([np.eye(4), sys_h.b[None, :], q[None, :]])
        rhs = np.vstack([uh.data_free_matrix(sys_h), 2 * q[None, :], q[None, :]])
        normal = np.linalg.solve(stack.T @ stack, stack.T @ rhs)
        assert np.abs(reg.a_r - normal).max() < 1e-8

    def test_least_squares_minimality(self, rng):
        # no perturbation of the solution reduces the residual
        sys_h = uh.make_hippo(4)
        reg = uh.make_regularized(sys_h)
        q = uh.make_q(4)
        stack = np.vstack([np.eye(4), sys_h.b[None, :], q[None, :]])
        rhs = np.vstack([uh.data_free_matrix(sys_h), 2 * q[None, :], q[None, :]])
        best = np.linalg.norm(stack @ reg.a_r - rhs)
        for _ in range(20):
            other = reg.a_r + 1e-3 * rng.standard_normal((4, 4))
            assert np.linalg.norm(stack @ other - rhs) >= best

    def test_slope_condition_within_residual_bound(self, rng):
        reg = uh.make_regularized(uh.make_hippo(32))
        row_residual = np.linalg.norm(reg.b @ reg.a_r - 2 * reg.q)
        # the slope row is fit to a fraction of a percent of its scale
        assert row_residual < 0.01 * np.linalg.norm(2 * reg.q)
        for _ in range(30):
            c = rng.standard_normal(32)
            violation = abs(reg.b @ (reg.a_r @ c) - 2 * reg.q @ c)
            assert violation <= row_residual * np.linalg.norm(c) * (1 + 1e-12)


class TestTransition:
    def test_equal_times_identity_exact(self):
        reg = uh.make_regularized(uh.make_hippo(8))
        for scheme in uh.dynamics.TRANSITION_SCHEMES:
            assert np.array_equal(uh.transition(reg, 3.0, 3.0, scheme), np.eye(8))

    def test_closed_form_semigroup(self):
        reg = uh.make_regularized(uh.make_hippo(16))
        lhs = uh.transition(reg, 1.0, 2.5) @ uh.transition(reg, 2.5, 4.0)
        assert np.abs(lhs - uh.transition(reg, 1.0, 4.0)).max() < 1e-8

    def test_closed_form_depends_on_ratio_only(self):
        reg = uh.make_regularized(uh.make_hippo(12))
        assert np.array_equal(uh.transition(reg, 1.0, 3.0), uh.transition(reg, 2.0, 6.0))

    def test_unregularized_extension_preserves_polynomial(self):
        # extending the data-free dynamics reproduces the same polynomial
        # on the longer window
        n = 5
        sys_h = uh.make_hippo(n)
        taus = np.linspace(0, 1, 4000)
        f = 0.3 - 0.5 * taus + 0.8 * taus**2
        c = uh.project(uh.Basis(n, 1.0), taus, f)
        c_ext = uh.expm(np.log(1.5) * uh.data_free_matrix(sys_h)) @ c
        rec_old = uh.reconstruct(uh.Basis(n, 1.0), c, taus)
        rec_new = uh.reconstruct(uh.Basis(n, 1.5), c_ext, taus)
        assert np.abs(rec_old - rec_new).max() < 1e-6

    def test_bad_arguments_rejected(self):
        reg = uh.make_regularized(uh.make_hippo(4))
        with pytest.raises(ValueError, match="positive"):
            uh.transition(reg, 0.0, 1.0)
        with pytest.raises(ValueError, match="precedes"):
            uh.transition(reg, 2.0, 1.0)
        with pytest.raises(ValueError, match="scheme"):
            uh.transition(reg, 1.0, 2.0, "rk4")


class TestStability:
    def test_closed_form_stays_bounded_over_250_steps(self):
        # the interior features of the encoded signal survive 250 window
        # extensions without norm growth
        n = 64
        reg = uh.make_regularized(uh.make_hippo(n))
        grid = np.linspace(0, 1, 4001)
        bump = np.exp(-((grid - 0.5) ** 2) / (2 * 0.05**2))
        c = uh.project(uh.Basis(n, 1.0), grid, bump)
        start = np.linalg.norm(c)
        worst = start
        for k in range(250, 500):
            c = uh.transition(reg, float(k), float(k + 1)) @ c
            worst = max(worst, np.linalg.norm(c))
        assert worst <= 10.0 * start

    def test_closed_form_product_telescopes(self):
        # unit-step products match the direct two-point transition, which is
        # what makes the closed form immune to error accumulation
        reg = uh.make_regularized(uh.make_hippo(32))
        prod = np.eye(32)
        for k in range(250, 300):
            prod = uh.transition(reg, float(k), float(k + 1)) @ prod
        direct = uh.transition(reg, 250.0, 300.0)
        assert np.abs(prod - direct).max() < 1e-8 * np.abs(direct).max()

    def test_regularization_reduces_divergence_order(self):
        # past the old horizon the regularized reconstruction grows about
        # linearly; the unregularized one grows like a high-degree polynomial
        n = 32
        sys_h = uh.make_hippo(n)
        reg = uh.make_regularized(sys_h)
        trace = uh.sample_gp(3000, 1.0, 0.1, seed=3)
        c = uh.project(uh.Basis(n, 1.0), trace.taus, trace.clean)
        t_new = 1.2
        c_reg = uh.transition(reg, 1.0, t_new) @ c
        c_unreg = uh.expm(np.log(t_new) * uh.data_free_matrix(sys_h)) @ c
        basis_new = uh.Basis(n, t_new)

        def ext_growth(state, delta):
            return abs(
                uh.reconstruct(basis_new, state, [1.0 + delta])[0]
                - uh.reconstruct(basis_new, state, [1.0])[0]
            )

        # doubling the extension roughly doubles the regularized excursion
        reg_ratio = ext_growth(c_reg, 0.2) / ext_growth(c_reg, 0.1)
        unreg_ratio = ext_growth(c_unreg, 0.2) / ext_growth(c_unreg, 0.1)
        assert reg_ratio < 3.0
        assert unreg_ratio > 4.0
