"""Structure backends: frequencies, tip values, collocation, assembly."""

import numpy as np
import pytest
from scipy.integrate import quad

from impactdde import (
    ConfigurationError,
    HarmonicForcing,
    assemble_first_order,
    eb_frequencies,
    eb_structure,
    string_structure,
    timoshenko_collocation,
    tip_normalized_ic,
    to_modal,
)
from impactdde.cor import ModalPropagator

# roots of 1 + cos(s) cosh(s) = 0 from a 30-digit independent root finder
EB_SQRT_OMEGA_1 = 1.87510406871196116644530824108
EB_OMEGA_1 = 3.51601526850015118342613386725
EB_OMEGA_2 = 22.0344915646667699054888617199


class TestEbFrequencies:
    def test_first_two_roots_match_high_precision_oracle(self):
        om = eb_frequencies(2)
        np.testing.assert_allclose(om[0], EB_OMEGA_1, rtol=1e-12)
        np.testing.assert_allclose(om[1], EB_OMEGA_2, rtol=1e-12)

    def test_stabilized_residual_below_1e10_at_every_root(self):
        om = eb_frequencies(40)
        s = np.sqrt(om)
        resid = np.cos(s) + 2.0 * np.exp(-s) / (1.0 + np.exp(-2.0 * s))
        assert np.abs(resid).max() < 1e-10

    def test_root_20_close_to_asymptotic_grid(self):
        om = eb_frequencies(20)
        grid = (20 * np.pi - np.pi / 2) ** 2
        assert abs(om[19] - grid) / grid < 1e-6

    def test_roots_bracketed_and_approach_asymptote(self):
        om = eb_frequencies(12)
        s = np.sqrt(om)
        k = np.arange(1, 13)
        assert np.all(s > (k - 1) * np.pi) and np.all(s < k * np.pi)
        gap = np.abs(s - (k * np.pi - np.pi / 2))
        assert np.all(np.diff(gap) < 0)  # monotone approach

    def test_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            eb_frequencies(0)


class TestEbStructure:
    def test_tip_values_alternate_two(self):
        ms = eb_structure(4)
        np.testing.assert_array_equal(ms.tip_values, [2.0, -2.0, 2.0, -2.0])

    def test_uniform_damping(self):
        ms = eb_structure(1, 0.1)
        np.testing.assert_array_equal(ms.dampings, [0.1])

    def test_quadratic_frequency_scaling(self):
        ms = eb_structure(50, 0.1)
        assert ms.nominal_alpha == 2.0
        k = np.arange(25, 51)
        slope = np.polyfit(np.log(k), np.log(ms.omegas[24:]), 1)[0]
        assert abs(slope - 2.0) < 0.1


class TestStringStructure:
    def test_frequencies_match_separation_of_variables(self):
        ms = string_structure(2, wave_speed=1.0)
        np.testing.assert_allclose(ms.omegas, [np.pi / 2, 3 * np.pi / 2], rtol=1e-14)
        ms2 = string_structure(1, wave_speed=2.0)
        np.testing.assert_allclose(ms2.omegas, [np.pi], rtol=1e-14)

    def test_tip_magnitude_is_sqrt2_from_unit_modal_mass(self):
        # mass normalization: integral of (sqrt(2) sin((k-1/2) pi x))^2 = 1
        for k in (1, 3):
            mass, _ = quad(lambda x, k=k: 2 * np.sin((k - 0.5) * np.pi * x) ** 2, 0, 1)
            np.testing.assert_allclose(mass, 1.0, rtol=1e-12)
        ms = string_structure(6)
        np.testing.assert_allclose(np.abs(ms.tip_values), np.sqrt(2.0), rtol=1e-14)
        assert np.all(np.sign(ms.tip_values) == (-1.0) ** np.arange(6))

    def test_linear_scaling_tag(self):
        assert string_structure(3).nominal_alpha == 1.0


class TestTimoshenkoCollocation:
    def test_equilibrium_residual_exactly_zero(self):
        op = timoshenko_collocation(12, 4800.0, 0.25)
        r = op.residual(np.zeros(11), np.zeros(11), 0.0)
        np.testing.assert_array_equal(r, 0.0)

    def test_rejects_too_few_points(self):
        with pytest.raises(ConfigurationError):
            timoshenko_collocation(6, 4800.0, 0.25)

    def test_lowest_frequency_converged_between_20_and_40(self):
        oms = {}
        for n in (20, 40, 80):
            ms = to_modal(timoshenko_collocation(n, 4800.0, 0.25), 0.1)
            oms[n] = ms.omegas[0]
        assert abs(oms[20] - oms[40]) / oms[80] < 5e-3
        assert abs(oms[40] - oms[80]) / oms[80] < 5e-3


class TestToModal:
    @pytest.fixture(scope="class")
    def op20(self):
        return timoshenko_collocation(20, 4800.0, 0.25)

    def test_damping_applied_uniformly(self, op20):
        ms = to_modal(op20, 0.1)
        assert np.all(ms.dampings == 0.1)

    def test_frequencies_real_positive_ascending(self, op20):
        ms = to_modal(op20, 0.0)
        assert np.all(ms.omegas > 0)
        assert np.all(np.diff(ms.omegas) >= 0)

    def test_eigenpairs_recompose_stiffness(self, op20):
        K = op20.stiffness
        lam, P = np.linalg.eig(K)
        back = (P * lam) @ np.linalg.inv(P)
        err = np.linalg.norm(back.real - K) / np.linalg.norm(K)
        assert err < 1e-8

    def test_high_mode_frequency_linear_in_index(self):
        # fit over the upper half of the resolved band (modes that agree
        # with a doubled grid within 1%); the spurious top is excluded
        ms = to_modal(timoshenko_collocation(40, 4800.0, 0.25), 0.1)
        ref = to_modal(timoshenko_collocation(80, 4800.0, 0.25), 0.1)
        sh = ms.n_modes
        rel = np.abs(ref.omegas[:sh] - ms.omegas) / ref.omegas[:sh]
        n_res = int(np.where(rel < 0.01)[0][-1]) + 1
        k = np.arange(n_res // 2, n_res + 1)
        slope = np.polyfit(np.log(k), np.log(ms.omegas[n_res // 2 - 1:n_res]), 1)[0]
        assert abs(slope - 1.0) < 0.1

    def test_tip_sum_matches_nodal_reconstruction(self, op20):
        # tip displacement via modal sum equals the extractor applied to the
        # nodal reconstruction for a random modal state
        ms = to_modal(op20, 0.1)
        rng = np.random.default_rng(7)
        q = rng.standard_normal(ms.n_modes)
        # rebuild nodal state from normalized modes
        lam, P = np.linalg.eig(op20.stiffness)
        order = np.argsort(lam.real)
        P = P[:, order].real
        nun = op20.n_unknowns // 2
        au = op20.tip_extractor[:nun]
        mass = op20.mass_weights @ P**2 + op20.tip_weight * (au @ P[:nun]) ** 2
        P = P / np.sqrt(mass)
        tips = op20.tip_extractor @ P
        signs = np.where(tips == 0, 1.0, np.sign(tips)) * (-1.0) ** np.arange(len(lam))
        P = P * signs
        nodal = P @ q
        tip_nodal = op20.tip_extractor @ nodal
        tip_modal = ms.tip_values @ q
        assert abs(tip_nodal - tip_modal) < 1e-8 * max(1.0, abs(tip_nodal))

    def test_force_influence_matches_tip_values_in_modal_coordinates(self, op20):
        # extraction and force injection coincide on the resolved band; the
        # spurious collocation top is not self-adjoint and is excluded
        ms = to_modal(op20, 0.0)
        lam, P = np.linalg.eig(op20.stiffness)
        order = np.argsort(lam.real)
        P = P[:, order].real
        nun = op20.n_unknowns // 2
        au = op20.tip_extractor[:nun]
        mass = op20.mass_weights @ P**2 + op20.tip_weight * (au @ P[:nun]) ** 2
        P = P / np.sqrt(mass)
        tips = op20.tip_extractor @ P
        signs = np.where(tips == 0, 1.0, np.sign(tips)) * (-1.0) ** np.arange(len(lam))
        P = P * signs
        modal_influence = np.linalg.solve(P, op20.force_influence)
        np.testing.assert_allclose(modal_influence[:8], ms.tip_values[:8], rtol=2e-3)

    def test_positive_force_raises_tip(self, op20):
        # static compliance is positive and matches the modal sum
        ms = to_modal(op20, 0.0)
        x_st = np.linalg.solve(op20.stiffness, op20.force_influence)
        compliance = op20.tip_extractor @ x_st
        modal = np.sum(ms.tip_values**2 / ms.omegas**2)
        assert compliance > 0
        np.testing.assert_allclose(compliance, modal, rtol=1e-4)


class TestAssembleFirstOrder:
    def test_single_mode_drift_matrix(self):
        ms = string_structure(1)
        ms = type(ms)(omegas=np.array([2.0]), dampings=np.array([0.0]),
                      tip_values=np.array([1.0]), model_tag="string",
                      nominal_alpha=1.0)
        sys = assemble_first_order(ms)
        np.testing.assert_allclose(sys.R, [[0.0, 1.0], [-4.0, 0.0]])

    def test_influence_first_block_zero(self):
        sys = assemble_first_order(eb_structure(5))
        np.testing.assert_array_equal(sys.influence[:5], 0.0)
        np.testing.assert_array_equal(sys.influence[5:], sys.structure.tip_values)

    def test_drift_eigenvalues_match_damped_oscillator_pairs(self):
        rng = np.random.default_rng(3)
        om = np.sort(rng.uniform(1.0, 20.0, 5))
        dd = rng.uniform(0.0, 0.5, 5)
        ms = eb_structure(5, 0.0)
        ms = type(ms)(omegas=om, dampings=dd, tip_values=ms.tip_values,
                      model_tag="euler-bernoulli", nominal_alpha=2.0)
        sys = assemble_first_order(ms)
        lam = np.sort_complex(np.linalg.eigvals(sys.R))
        expected = np.concatenate([
            -dd * om + 1j * om * np.sqrt(1 - dd**2),
            -dd * om - 1j * om * np.sqrt(1 - dd**2),
        ])
        np.testing.assert_allclose(np.sort_complex(lam),
                                   np.sort_complex(expected), rtol=1e-10)

    def test_forcing_mode_bounds_checked(self):
        ms = eb_structure(2)
        with pytest.raises(ValueError):
            assemble_first_order(ms, HarmonicForcing(mode=3, amplitude=1.0,
                                                     frequency=2.0))

    def test_tip_normalized_ic_reproduces_tip_amplitude(self):
        ms = to_modal(timoshenko_collocation(12, 4800.0, 0.25), 0.1)
        z = tip_normalized_ic(ms, 1, 1.056, -0.3)
        y1 = ms.tip_values @ z[:ms.n_modes]
        y2 = ms.tip_values @ z[ms.n_modes:]
        np.testing.assert_allclose([y1, y2], [1.056, -0.3], rtol=1e-12)


class TestFreeResponseEnergy:
    @pytest.mark.parametrize("ms", [
        eb_structure(4, 0.0),
        string_structure(4, 1.0, 0.0),
        to_modal(timoshenko_collocation(10, 4800.0, 0.25), 0.0),
    ], ids=["euler-bernoulli", "string", "timoshenko"])
    def test_undamped_free_response_conserves_modal_energy(self, ms):
        rng = np.random.default_rng(11)
        x0 = rng.standard_normal(ms.n_modes) * 0.1
        v0 = rng.standard_normal(ms.n_modes) * 0.1
        prop = ModalPropagator(ms, HarmonicForcing())
        t = np.linspace(0.01, 2.0, 50)
        x, v = prop.advance(x0, v0, 0.0, t)
        e = 0.5 * (v**2 + (ms.omegas**2)[:, None] * x**2)
        e0 = 0.5 * (v0**2 + ms.omegas**2 * x0**2)
        np.testing.assert_allclose(e, np.broadcast_to(e0[:, None], e.shape),
                                   rtol=1e-10)
