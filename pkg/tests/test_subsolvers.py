import numpy as np
import pytest
from numpy.testing import assert_allclose

from harness.oracles import oracle_f, oracle_phi, oracle_v_power
from models.link_models import effective_channel_relay, effective_channel_ris, noise_cov_relay
from optimization.subsolvers import (QuadraticForm, build_f_quadratic, build_phi_quadratic,
                                     relay_constraint_matrix, solve_f, solve_phi,
                                     solve_v_power_constrained, solve_v_two_constraints, unvec, vec,
                                     v_step_objective)
from optimization.wmmse import fresh_state, mse_matrix
from utils.exceptions import ConfigError, InfeasibleSubproblem, ShapeMismatch


def _power(V):
    return float(np.real(np.vdot(V, V)))


class TestPowerConstrainedBeamformer:

    def test_scalar_active_budget(self):
        V, mu = solve_v_power_constrained(2.0, 4.0, 1.0, full_output=True)
        assert_allclose(V, [[1.0]], rtol=1e-9)
        assert_allclose(mu, 2.0, rtol=1e-9)

    def test_zero_linear_term(self, rng, psd):
        V, mu = solve_v_power_constrained(psd(rng, 4), np.zeros((4, 2)), 1.0, full_output=True)
        assert not np.any(V)
        assert mu == 0.0

    def test_inactive_budget(self, rng, cn):
        B = 0.1 * cn(rng, 3, 2)
        V, mu = solve_v_power_constrained(np.eye(3), B, 100.0, full_output=True)
        assert_allclose(V, B, atol=1e-14)
        assert mu == 0.0

    def test_stationarity_and_budget(self, rng, cn, psd):
        A, B = psd(rng, 4), 5.0 * cn(rng, 4, 3)
        V, mu = solve_v_power_constrained(A, B, 0.5, full_output=True)
        assert mu > 0
        assert_allclose(_power(V), 0.5, rtol=1e-9)
        assert_allclose((A + mu * np.eye(4)) @ V, B, atol=1e-9)

    def test_singular_quadratic_term(self, rng, cn):
        # rank-one A with B outside its range needs the budget to stay bounded
        a = cn(rng, 4, 1)
        V = solve_v_power_constrained(a @ a.conj().T, cn(rng, 4, 2), 2.0)
        assert _power(V) <= 2.0 * (1 + 1e-12)

    def test_matches_projected_gradient(self, rng, cn, psd):
        A, B = psd(rng, 4), cn(rng, 4, 2)
        V = solve_v_power_constrained(A, B, 1.0)
        reference = oracle_v_power(A, B, 1.0)
        assert v_step_objective(A, B, V) <= v_step_objective(A, B, reference) + 1e-6

    def test_rejects_bad_inputs(self, rng, psd):
        with pytest.raises(ShapeMismatch):
            solve_v_power_constrained(psd(rng, 3), np.ones((4, 2)), 1.0)
        with pytest.raises(ConfigError):
            solve_v_power_constrained(np.eye(2), np.ones((2, 2)), 0.0)


class TestTwoConstraintBeamformer:

    def test_scalar_relay_budget_binds(self):
        V, (mu1, mu2) = solve_v_two_constraints(1.0, 3.0, 1.0, 4.0, 1.0, full_output=True)
        assert_allclose(V, [[1.0]], rtol=1e-8)
        assert mu1 == 0.0
        assert_allclose(mu2, 2.0, rtol=1e-8)

    def test_identity_relay_term_reduces_to_single_budget(self, rng, cn, psd):
        A, B = psd(rng, 4), 3.0 * cn(rng, 4, 2)
        single = solve_v_power_constrained(A, B, 1.0)
        double = solve_v_two_constraints(A, B, np.eye(4), 1.0, 5.0)
        assert_allclose(double, single, atol=1e-12)

    def test_negative_budget(self):
        with pytest.raises(InfeasibleSubproblem):
            solve_v_two_constraints(np.eye(2), np.ones((2, 1)), np.eye(2), 1.0, -0.1)

    def test_both_constraints_hold(self, rng, cn, psd):
        for _ in range(10):
            A, J, B = psd(rng, 4), psd(rng, 4), 4.0 * cn(rng, 4, 3)
            P1, c2 = rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)
            V, (mu1, mu2) = solve_v_two_constraints(A, B, J, P1, c2, full_output=True)
            assert _power(V) <= P1 * (1 + 1e-9)
            assert np.real(np.trace(V.conj().T @ J @ V)) <= c2 * (1 + 1e-9)
            assert mu1 >= 0 and mu2 >= 0
            assert_allclose((A + mu1 * np.eye(4) + mu2 * J) @ V, B, atol=1e-7 * np.abs(B).max())


class TestReflectionSolver:

    def test_scalar_shrinks_to_origin(self):
        phi = solve_phi(QuadraticForm(Xi=np.eye(1), b=np.zeros(1)), np.ones(1))
        assert_allclose(phi, [0.0])

    def test_unit_quadratic_clips_to_disk(self):
        q = QuadraticForm(Xi=np.eye(2, dtype=complex), b=np.array([2.0, 0.3j]))
        assert_allclose(solve_phi(q, np.zeros(2)), [-1.0, -0.3j], atol=1e-14)

    def test_no_linear_term(self):
        q = QuadraticForm(Xi=2.0 * np.eye(5), b=np.zeros(5))
        assert_allclose(solve_phi(q, np.full(5, 0.5 + 0.5j)), np.zeros(5))

    def test_zero_curvature_goes_to_boundary(self):
        q = QuadraticForm(Xi=np.zeros((2, 2)), b=np.array([1j, -3.0]))
        assert_allclose(solve_phi(q, np.zeros(2)), [-1j, 1.0])

    def test_stays_in_disks_and_descends(self, rng, cn, psd):
        Xi, b = psd(rng, 12), 3.0 * cn(rng, 12)
        q = QuadraticForm(Xi=Xi, b=b)
        phi0 = np.ones(12, dtype=complex)
        phi = solve_phi(q, phi0)
        assert np.all(np.abs(phi) <= 1.0 + 1e-12)
        assert q.value(phi) <= q.value(phi0)

    def test_matches_projected_gradient(self, rng, cn, psd):
        q = QuadraticForm(Xi=psd(rng, 6, 0.5), b=cn(rng, 6))
        phi0 = np.ones(6, dtype=complex)
        gap = q.value(solve_phi(q, phi0)) - q.value(oracle_phi(q, phi0))
        assert gap <= 1e-4 * max(abs(q.value(phi0)), 1.0)

    def test_rejects_start_outside_disks(self):
        with pytest.raises(ConfigError):
            solve_phi(QuadraticForm(Xi=np.eye(2), b=np.zeros(2)), np.array([1.5, 0.0]))


class TestReflectionQuadratic:

    def test_tracks_weighted_mse(self, rng, cn):
        H_d, H_1, H_2, V = cn(rng, 4, 4), cn(rng, 8, 4), cn(rng, 4, 8), cn(rng, 4, 3)
        R_n = 0.3 * np.eye(4)
        wm = fresh_state(effective_channel_ris(H_d, H_1, H_2, np.ones(8)), V, R_n)
        q = build_phi_quadratic(H_d, H_1, H_2, wm.U, wm.W, V)

        def weighted_mse(phi):
            E = mse_matrix(wm.U, effective_channel_ris(H_d, H_1, H_2, phi), V, R_n)
            return float(np.real(np.trace(wm.W @ E)))

        for _ in range(5):
            a = np.sqrt(rng.random(8)) * np.exp(2j * np.pi * rng.random(8))
            b = np.sqrt(rng.random(8)) * np.exp(2j * np.pi * rng.random(8))
            assert_allclose(q.value(a) - q.value(b), weighted_mse(a) - weighted_mse(b),
                            rtol=1e-8, atol=1e-8)

    def test_shape_mismatch(self, rng, cn):
        with pytest.raises(ShapeMismatch):
            build_phi_quadratic(cn(rng, 4, 4), cn(rng, 8, 4), cn(rng, 4, 7),
                                cn(rng, 4, 2), np.eye(2), cn(rng, 4, 2))


class TestRelaySolver:

    def test_scalar_quadratic(self):
        q, D = build_f_quadratic(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        assert_allclose(q.Xi, [[2.0]])
        assert_allclose(q.b, [0.0])
        assert_allclose(D, [[2.0]])

    def test_scalar_inactive_budget(self):
        F, lam = solve_f(QuadraticForm(Xi=np.array([[2.0]]), b=np.array([-4.0])), np.eye(1), 10.0,
                         full_output=True)
        assert_allclose(F, [[2.0]], rtol=1e-12)
        assert lam == 0.0

    def test_scalar_active_budget(self):
        F, lam = solve_f(QuadraticForm(Xi=np.array([[2.0]]), b=np.array([-4.0])), np.eye(1), 1.0,
                         full_output=True)
        assert_allclose(F, [[1.0]], rtol=1e-9)
        assert_allclose(lam, 2.0, rtol=1e-9)

    def test_zero_linear_term(self, rng, psd):
        F = solve_f(QuadraticForm(Xi=psd(rng, 4), b=np.zeros(4)), psd(rng, 2), 1.0)
        assert_allclose(F, np.zeros((2, 2)))

    def test_constraint_matrix(self, rng, cn, psd):
        F, D = cn(rng, 3, 3), psd(rng, 3)
        f = vec(F)
        assert_allclose(np.vdot(f, relay_constraint_matrix(D) @ f),
                        np.trace(F @ D @ F.conj().T), rtol=1e-12)
        assert_allclose(unvec(f, 3), F)

    def test_power_non_increasing_in_multiplier(self, rng, cn, psd):
        Xi, Q, b = psd(rng, 4), relay_constraint_matrix(psd(rng, 2)), cn(rng, 4)
        powers = []
        for lam in np.logspace(-3, 3, 25):
            f = -np.linalg.solve(Xi + lam * Q, b)
            powers.append(float(np.real(np.vdot(f, Q @ f))))
        assert all(b <= a * (1 + 1e-10) for a, b in zip(powers, powers[1:]))

    def test_stationarity_and_budget(self, rng, cn, psd):
        Xi, D, b = psd(rng, 9), psd(rng, 3), 10.0 * cn(rng, 9)
        F, lam = solve_f(QuadraticForm(Xi=Xi, b=b), D, 0.5, full_output=True)
        assert lam > 0
        assert_allclose(np.real(np.trace(F @ D @ F.conj().T)), 0.5, rtol=1e-9)
        Q = relay_constraint_matrix(D)
        assert_allclose((Xi + lam * Q) @ vec(F), -b, atol=1e-8 * np.abs(b).max())

    def test_matches_projected_gradient(self, rng, cn, psd):
        q, D = QuadraticForm(Xi=psd(rng, 4), b=cn(rng, 4)), psd(rng, 2)
        F, reference = solve_f(q, D, 0.7), oracle_f(q, D, 0.7)
        assert q.value(vec(F)) <= q.value(vec(reference)) + 1e-4 * max(abs(q.value(vec(reference))), 1.0)

    def test_tracks_weighted_mse(self, rng, cn):
        H_d, H_1, H_2, V = cn(rng, 4, 4), cn(rng, 3, 4), cn(rng, 4, 3), cn(rng, 4, 2)
        sigma2_R, sigma2_D = 0.2, 0.5
        F0 = cn(rng, 3, 3)
        wm = fresh_state(effective_channel_relay(H_d, H_1, H_2, F0), V,
                         noise_cov_relay(H_2, F0, sigma2_R, sigma2_D))
        q, D = build_f_quadratic(H_d, H_1, H_2, wm.U, wm.W, V, sigma2_R)

        def weighted_mse(F):
            E = mse_matrix(wm.U, effective_channel_relay(H_d, H_1, H_2, F), V,
                           noise_cov_relay(H_2, F, sigma2_R, sigma2_D))
            return float(np.real(np.trace(wm.W @ E)))

        for _ in range(5):
            Fa, Fb = cn(rng, 3, 3), cn(rng, 3, 3)
            assert_allclose(q.value(vec(Fa)) - q.value(vec(Fb)), weighted_mse(Fa) - weighted_mse(Fb),
                            rtol=1e-8, atol=1e-8)

    def test_rejects_bad_budget(self):
        with pytest.raises(ConfigError):
            solve_f(QuadraticForm(Xi=np.eye(1), b=np.ones(1)), np.eye(1), 0.0)
