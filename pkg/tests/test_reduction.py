"""Projection, drift constant, memory kernel, forcing term, regularity."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from impactdde import (
    ConfigurationError,
    HarmonicForcing,
    ModalStructure,
    NumericalError,
    assemble_first_order,
    build_projection,
    drift_constant,
    eb_structure,
    estimate_plateau,
    fit_alpha,
    forcing_term,
    memory_kernel,
    regularity_sweep,
    string_structure,
)
from impactdde.reduction import _kernel_by_quadrature, reduced_rhs_oracle


def random_modal(m, seed, d_max=0.3):
    rng = np.random.default_rng(seed)
    om = np.sort(rng.uniform(1.0, 12.0, m))
    dd = rng.uniform(0.0, d_max, m)
    n = rng.uniform(0.5, 2.0, m) * rng.choice([-1.0, 1.0], m)
    n[0] = abs(n[0])
    return ModalStructure(omegas=om, dampings=dd, tip_values=n,
                          model_tag="string", nominal_alpha=1.0)


class TestProjection:
    def test_single_mode_projection_is_identity(self):
        sys = assemble_first_order(random_modal(1, 0))
        p = build_projection(sys)
        S = p.W() @ p.V()
        np.testing.assert_allclose(S, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(p.Q(), 0.0, atol=1e-14)

    def test_reduced_matrix_is_support_mode_oscillator(self):
        ms = random_modal(4, 1)
        sys = assemble_first_order(ms)
        p = build_projection(sys)
        om, dd = ms.omegas[0], ms.dampings[0]
        np.testing.assert_allclose(
            p.A, [[0.0, 1.0], [-om**2, -2 * dd * om]], rtol=1e-13)

    def test_vw_identity_and_idempotence(self):
        sys = assemble_first_order(random_modal(6, 2))
        p = build_projection(sys, support_mode=3)
        V, W = p.V(), p.W()
        np.testing.assert_allclose(V @ W, np.eye(2), atol=1e-13)
        S = W @ V
        assert np.linalg.norm(S @ S - S) < 1e-12
        assert np.linalg.norm((np.eye(12) - S) @ W) < 1e-12

    def test_span_w_invariant_under_drift(self):
        sys = assemble_first_order(random_modal(6, 3))
        p = build_projection(sys)
        V, W = p.V(), p.W()
        R = sys.R
        resid = (np.eye(12) - W @ np.linalg.solve(V @ W, V)) @ R @ W
        assert np.linalg.norm(resid) < 1e-10

    def test_zero_tip_support_mode_rejected(self):
        ms = random_modal(3, 4)
        ms = ModalStructure(omegas=ms.omegas, dampings=ms.dampings,
                            tip_values=np.array([0.0, 1.0, 1.0]),
                            model_tag="string", nominal_alpha=1.0)
        with pytest.raises(ConfigurationError, match="support mode"):
            build_projection(assemble_first_order(ms))


class TestDriftConstant:
    def test_single_mode_value(self):
        for dd in (0.0, 0.15):
            ms = ModalStructure(omegas=np.array([3.0]), dampings=np.array([dd]),
                                tip_values=np.array([1.7]),
                                model_tag="string", nominal_alpha=1.0)
            sys = assemble_first_order(ms)
            lf = drift_constant(sys, build_projection(sys))
            np.testing.assert_allclose(lf, [0.0, 1.7**2], rtol=1e-13)

    def test_first_component_always_zero(self):
        sys = assemble_first_order(random_modal(7, 5))
        lf = drift_constant(sys, build_projection(sys))
        assert lf[0] == pytest.approx(0.0, abs=1e-13)

    def test_matches_long_time_mean_of_kernel_integrand(self):
        # undamped two-mode system: the integrand oscillates about the drift
        ms = ModalStructure(omegas=np.array([2.0, 9.0]),
                            dampings=np.zeros(2),
                            tip_values=np.array([2.0, -2.0]),
                            model_tag="euler-bernoulli", nominal_alpha=2.0)
        sys = assemble_first_order(ms)
        p = build_projection(sys)
        lf = drift_constant(sys, p)
        RQ = sys.R @ p.Q()
        b = sys.influence
        T, num = 4000.0, 160001
        zs = expm_multiply(RQ, b, start=0.0, stop=T, num=num)
        mean = (p.V() @ zs.T).mean(axis=1)
        np.testing.assert_allclose(mean[1], lf[1], rtol=5e-3, atol=5e-3)


class TestMemoryKernel:
    def test_single_mode_kernel_vanishes(self):
        sys = assemble_first_order(random_modal(1, 6))
        p = build_projection(sys)
        kern = memory_kernel(sys, p, 1e-3, 0.5)
        np.testing.assert_allclose(kern.values, 0.0, atol=1e-13)
        level, verdict = estimate_plateau(kern.values, kern.eps, (5e-3, 5e-2))
        assert verdict == "singular-candidate"
        np.testing.assert_allclose(level, 0.0, atol=1e-13)

    def test_first_component_identically_zero(self):
        sys = assemble_first_order(random_modal(6, 7))
        kern = memory_kernel(sys, build_projection(sys), 1e-3, 1.0)
        np.testing.assert_allclose(kern.values[:, 0], 0.0, atol=1e-12)

    def test_table_head_holds_short_time_level(self):
        sys = assemble_first_order(random_modal(6, 8))
        kern = memory_kernel(sys, build_projection(sys), 1e-3, 1.0)
        np.testing.assert_array_equal(kern.values[0], kern.L_plus)

    def test_string_jump_location_converges_to_wave_return(self):
        taus = {}
        for m in (64, 128):
            sys = assemble_first_order(string_structure(m))
            kern = memory_kernel(sys, build_projection(sys), 1e-3, 3.0)
            jumps = [j for j in kern.jump_table if j.tau > 1.0]
            assert jumps, f"no interior jump detected at M={m}"
            taus[m] = min(jumps, key=lambda j: abs(j.tau - 2.0))
        assert abs(taus[64].tau - 2.0) < 0.06
        assert abs(taus[128].tau - 2.0) < abs(taus[64].tau - 2.0) + 0.01
        # jump size converges under mode doubling
        assert abs(taus[128].dL2 - taus[64].dL2) / abs(taus[64].dL2) < 0.10

    def test_undamped_kernel_never_truncated(self):
        sys = assemble_first_order(string_structure(16))
        kern = memory_kernel(sys, build_projection(sys), 1e-2, 2.0)
        assert kern.truncation_index == len(kern.values) - 1

    def test_damped_total_variation_stabilizes_with_horizon(self):
        sys = assemble_first_order(eb_structure(10, 0.1))
        p = build_projection(sys)
        tv = [memory_kernel(sys, p, 5e-3, h).total_variation() for h in (20.0, 40.0)]
        assert abs(tv[1] - tv[0]) / tv[0] < 1e-3

    def test_plateau_window_overlapping_jump_rejected(self):
        sys = assemble_first_order(string_structure(64))
        p = build_projection(sys)
        kern = memory_kernel(sys, p, 1e-3, 3.0)
        with pytest.raises(ConfigurationError, match="jump"):
            estimate_plateau(kern.values, kern.eps, (1.9, 2.1), kern.jump_table)

    def test_quadrature_fallback_matches_eigen_route(self):
        sys = assemble_first_order(random_modal(4, 9))
        p = build_projection(sys)
        eps, horizon = 2e-2, 0.4
        kern = memory_kernel(sys, p, eps, horizon)
        lf = drift_constant(sys, p)
        taus = eps * np.arange(int(round(horizon / eps)) + 1)
        quad = _kernel_by_quadrature(sys, p, taus, lf)
        np.testing.assert_allclose(quad[1:], kern.values[1:], atol=1e-9)


class TestForcingTerm:
    def test_zero_ic_and_forcing_gives_zero(self):
        sys = assemble_first_order(random_modal(5, 10))
        g = forcing_term(sys, build_projection(sys))
        np.testing.assert_allclose(g(np.linspace(0, 3, 7)), 0.0, atol=1e-14)

    def test_single_mode_reduces_to_direct_drive(self):
        # with one mode the projection is exact and only the direct
        # resolved-velocity drive survives
        ms = ModalStructure(omegas=np.array([4.0]), dampings=np.array([0.1]),
                            tip_values=np.array([1.3]),
                            model_tag="string", nominal_alpha=1.0)
        rng = np.random.default_rng(0)
        ic = rng.standard_normal(2)
        sys = assemble_first_order(ms, HarmonicForcing(1, 2.0, 3.0), ic)
        g = forcing_term(sys, build_projection(sys))
        t = np.linspace(0.0, 2.0, 11)
        expected = 1.3 * 2.0 * np.cos(3.0 * t)
        np.testing.assert_allclose(g(t)[:, 1], expected, rtol=1e-12)
        np.testing.assert_allclose(g(t)[:, 0], 0.0, atol=1e-14)

    def test_closed_form_matches_ode_oracle(self):
        ms = random_modal(6, 11)
        rng = np.random.default_rng(12)
        ic = rng.standard_normal(12) * 0.4
        sys = assemble_first_order(ms, HarmonicForcing(2, 1.7, 5.3), ic)
        p = build_projection(sys)
        g = forcing_term(sys, p)
        R = sys.R
        VRQ = p.V() @ R @ p.Q()

        def rhs_h(t, z):
            return R @ z

        def rhs_p(t, z):
            dz = R @ z
            dz[6:] += sys.forcing_vector(t)
            return dz

        sol_h = solve_ivp(rhs_h, (0, 5.2), sys.initial_state, rtol=1e-12,
                          atol=1e-13, dense_output=True)
        sol_p = solve_ivp(rhs_p, (0, 5.2), np.zeros(12), rtol=1e-12,
                          atol=1e-13, dense_output=True)
        for t in (0.1, 1.0, 5.0):
            direct = np.array([0.0, ms.tip_values @ sys.forcing_vector(t)])
            expected = VRQ @ (sol_h.sol(t) + sol_p.sol(t)) + direct
            np.testing.assert_allclose(g(t), expected, rtol=1e-8, atol=1e-10)

    def test_undamped_resonant_forcing_rejected(self):
        ms = ModalStructure(omegas=np.array([2.0, 5.0]), dampings=np.zeros(2),
                            tip_values=np.array([1.0, 1.0]),
                            model_tag="string", nominal_alpha=1.0)
        sys = assemble_first_order(ms, HarmonicForcing(2, 1.0, 5.0))
        with pytest.raises(NumericalError, match="resonance"):
            forcing_term(sys, build_projection(sys))


class TestExactReduction:
    """Master property: the reduced equation reproduces the full system."""

    @pytest.mark.parametrize("seed", range(5))
    def test_reduced_equation_reproduces_full_trajectory(self, seed):
        m = 8
        ms = random_modal(m, 100 + seed)
        rng = np.random.default_rng(200 + seed)
        ic = rng.standard_normal(2 * m) * 0.5
        sys = assemble_first_order(ms, HarmonicForcing(2, 2.0, 3.7), ic)
        p = build_projection(sys)

        def fc(t):
            return 0.8 * np.sin(1.3 * t) ** 2

        def fc_dot(t):
            return 0.8 * 1.3 * np.sin(2.6 * t)

        t_eval = np.linspace(0.0, 5.0, 201)

        def rhs(t, z):
            dz = sys.R @ z
            dz[m:] += ms.tip_values * fc(t) + sys.forcing_vector(t)
            return dz

        full = solve_ivp(rhs, (0, 5.0), sys.initial_state, t_eval=t_eval,
                         rtol=1e-11, atol=1e-12)
        y_full = (p.V() @ full.y).T
        y_red = reduced_rhs_oracle(sys, p, fc, fc_dot, (0.0, 5.0), t_eval)
        err = np.abs(y_red - y_full).max() / np.abs(y_full).max()
        assert err < 1e-6

    def test_sixteen_mode_system(self):
        m = 16
        ms = random_modal(m, 42)
        rng = np.random.default_rng(43)
        ic = rng.standard_normal(2 * m) * 0.3
        sys = assemble_first_order(ms, HarmonicForcing(3, 1.0, 2.9), ic)
        p = build_projection(sys)
        fc = lambda t: 0.5 * (1 - np.cos(2.0 * t))  # noqa: E731
        fc_dot = lambda t: np.sin(2.0 * t)  # noqa: E731
        t_eval = np.linspace(0.0, 5.0, 101)

        def rhs(t, z):
            dz = sys.R @ z
            dz[m:] += ms.tip_values * fc(t) + sys.forcing_vector(t)
            return dz

        full = solve_ivp(rhs, (0, 5.0), sys.initial_state, t_eval=t_eval,
                         rtol=1e-11, atol=1e-12)
        y_full = (p.V() @ full.y).T
        y_red = reduced_rhs_oracle(sys, p, fc, fc_dot, (0.0, 5.0), t_eval)
        assert np.abs(y_red - y_full).max() / np.abs(y_full).max() < 1e-6


class TestRegularitySweep:
    @pytest.fixture(scope="class")
    def reports(self):
        return {
            "euler-bernoulli": regularity_sweep("euler-bernoulli", [25, 50, 100]),
            "timoshenko": regularity_sweep("timoshenko", [20, 40]),
            "string": regularity_sweep("string", [32, 64]),
        }

    def test_eb_singular_with_collapsing_estimates(self, reports):
        rep = reports["euler-bernoulli"]
        assert rep.verdict == "singular"
        assert all(r <= 0.75 for r in rep.decay_ratios)
        assert all(b < a for a, b in zip(rep.estimates, rep.estimates[1:]))

    def test_timoshenko_regular_with_agreeing_estimates(self, reports):
        rep = reports["timoshenko"]
        assert rep.verdict == "regular"
        assert rep.agreement < 0.05
        assert min(rep.common_estimates) > rep.floor

    def test_string_regular(self, reports):
        assert reports["string"].verdict == "regular"

    def test_fitted_alphas(self, reports):
        assert abs(reports["euler-bernoulli"].fitted_alpha - 2.0) < 0.1
        assert abs(reports["timoshenko"].fitted_alpha - 1.0) < 0.1
        assert abs(reports["string"].fitted_alpha - 1.0) < 0.1

    def test_rejects_non_increasing_sizes(self):
        with pytest.raises(ValueError):
            regularity_sweep("string", [32, 32])


class TestFitAlpha:
    def test_exact_power_law_recovered(self):
        k = np.arange(1, 40)
        assert fit_alpha(3.0 * k**2.0, (20, 39)) == pytest.approx(2.0, abs=1e-12)

    def test_default_window_is_upper_half(self):
        om = np.arange(1, 21, dtype=float) ** 1.5
        assert fit_alpha(om) == pytest.approx(1.5, abs=1e-12)
