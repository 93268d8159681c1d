import numpy as np
import pytest

import unhippo as uh

from oracles import gram_matrix


class TestLegendreEval:
    def test_value_one_at_right_end(self):
        # exact under the recurrence, up to the documented degree cap
        for i in (0, 1, 2, 17, 100, 512):
            assert uh.legendre_eval(i, 1.0) == 1.0

    def test_base_cases(self):
        xs = np.linspace(-2, 2, 9)
        assert np.array_equal(uh.legendre_eval(0, xs), np.ones(9))
        assert np.array_equal(uh.legendre_eval(1, xs), xs)

    def test_degree_two_at_zero(self):
        assert uh.legendre_eval(2, 0.0) == pytest.approx(-0.5, abs=1e-15)

    def test_closed_form_degree_three(self):
        xs = np.linspace(-1.5, 1.5, 7)
        assert np.allclose(uh.legendre_eval(3, xs), 0.5 * (5 * xs**3 - 3 * xs), atol=1e-13)

    def test_negative_degree_rejected(self):
        with pytest.raises(ValueError):
            uh.legendre_eval(-1, 0.0)


class TestBasisEval:
    def test_endpoint_value(self):
        b = uh.Basis(6, 2.5)
        for i in range(6):
            assert uh.basis_eval(b, i, b.t) == np.sqrt(2.0 * i + 1.0)

    def test_degree_zero_constant(self):
        b = uh.Basis(4, 1.0)
        for tau in (0.0, 0.3, 1.0, 1.7):
            assert uh.basis_eval(b, 0, tau) == 1.0

    def test_degree_one_midpoint_zero(self):
        b = uh.Basis(4, 3.0)
        assert uh.basis_eval(b, 1, 1.5) == 0.0

    def test_index_out_of_range(self):
        b = uh.Basis(4, 1.0)
        with pytest.raises(ValueError, match="out of range"):
            uh.basis_eval(b, 4, 0.5)

    def test_invalid_basis(self):
        with pytest.raises(ValueError):
            uh.Basis(0, 1.0)
        with pytest.raises(ValueError):
            uh.Basis(4, 0.0)


class TestProject:
    def test_constant_signal(self):
        b = uh.Basis(8, 2.0)
        taus = np.linspace(0, 2, 6000)
        c = uh.project(b, taus, np.ones_like(taus))
        assert np.abs(c - np.eye(8)[0]).max() < 1e-6

    def test_linear_signal_known_coefficients(self):
        # <tau, g_i> on [0, 1]: 1/2, sqrt(3)/6, then zero
        b = uh.Basis(4, 1.0)
        taus = np.linspace(0, 1, 4000)
        c = uh.project(b, taus, taus)
        assert np.abs(c - np.array([0.5, np.sqrt(3) / 6, 0.0, 0.0])).max() < 1e-6

    def test_basis_member_projects_to_unit_vector(self):
        b = uh.Basis(8, 2.0)
        taus = np.linspace(0, 2, 20000)
        c = uh.project(b, taus, uh.reconstruct(b, np.eye(8)[3], taus))
        assert np.abs(c - np.eye(8)[3]).max() < 1e-6

    def test_unsorted_rejected(self):
        b = uh.Basis(2, 1.0)
        with pytest.raises(ValueError, match="increasing"):
            uh.project(b, [0.5, 0.2], [1.0, 1.0])

    def test_too_few_samples_rejected(self):
        b = uh.Basis(2, 1.0)
        with pytest.raises(ValueError, match="at least 2"):
            uh.project(b, [0.5], [1.0])

    def test_out_of_window_rejected(self):
        b = uh.Basis(2, 1.0)
        with pytest.raises(ValueError, match="within"):
            uh.project(b, [0.0, 1.5], [1.0, 1.0])


class TestReconstruct:
    def test_endpoint_equals_b_dot_c(self, rng):
        # same summation as the readout vector, so equality is exact
        for n in (1, 3, 16, 64, 256):
            b = uh.Basis(n, 3.7)
            sys_h = uh.make_hippo(n)
            for _ in range(10):
                c = rng.standard_normal(n)
                assert uh.reconstruct(b, c, [b.t])[0] == sys_h.b @ c

    def test_zero_coefficients(self):
        b = uh.Basis(5, 1.0)
        assert np.array_equal(uh.reconstruct(b, np.zeros(5), np.linspace(0, 1, 7)), np.zeros(7))

    def test_polynomial_roundtrip(self):
        b = uh.Basis(6, 1.0)
        taus = np.linspace(0, 1, 4000)
        coef = np.array([0.2, -1.0, 0.5, 2.0, -0.7, 0.3])
        f = np.polyval(coef[::-1], taus)
        recon = uh.reconstruct(b, uh.project(b, taus, f), taus)
        assert np.abs(recon - f).max() < 1e-5

    def test_length_mismatch_rejected(self):
        b = uh.Basis(5, 1.0)
        with pytest.raises(ValueError, match="shape"):
            uh.reconstruct(b, np.zeros(4), [0.5])


class TestBasisProperties:
    def test_gram_identity_n16(self):
        g = gram_matrix(16, 1.7, panels=625, points=16)
        assert np.abs(g - np.eye(16)).max() < 1e-6

    def test_gram_identity_n32(self):
        g = gram_matrix(32, 1.0, panels=313, points=32)
        assert np.abs(g - np.eye(32)).max() < 1e-6

    def test_projection_idempotent(self, rng):
        b = uh.Basis(8, 2.0)
        taus = np.linspace(0, 2, 50000)
        c0 = rng.standard_normal(8)
        c1 = uh.project(b, taus, uh.reconstruct(b, c0, taus))
        assert np.abs(c1 - c0).max() < 1e-6

    def test_divergence_outside_window(self):
        b = uh.Basis(16, 2.0)
        inside = abs(uh.basis_eval(b, 15, b.t))
        outside = abs(uh.basis_eval(b, 15, 1.5 * b.t))
        assert outside > 1e3 * inside
