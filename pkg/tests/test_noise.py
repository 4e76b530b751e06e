"""Coherent deformation errors, their bounds, and stochastic drive noise."""

import math

import numpy as np
import pytest

from hologate import gates as G
from hologate import noise as N
from hologate.model import ModelConfig

OM2 = np.array([0.0, 1.0])
PI = math.pi


@pytest.fixture(scope="module")
def base_loop():
    sol = G.solve_beta_for_phase(5.0, PI, "alpha2")
    return G.pacman_loop(5.0, sol.beta, 3.0, 4.0, OM2)


class TestPerturbLoop:
    def test_identity_perturbation(self, base_loop):
        pert = N.LoopPerturbation.constant(0.0)
        out = N.perturb_loop(base_loop, pert)
        ts = np.linspace(0, base_loop.duration, 64)
        assert np.max(np.abs(out.f(ts) - base_loop.f(ts))) == 0.0

    def test_constant_epsilon_scales_radius(self, base_loop):
        out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(0.02))
        arc_t = base_loop.meta["t1"] + 0.5 * base_loop.meta["t2"]
        assert abs(abs(out.f(arc_t)) - 5.0 * 1.02) < 1e-12

    def test_direction_untouched(self, base_loop):
        out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(0.1))
        assert np.array_equal(out.omega, base_loop.omega)

    def test_epsilon_magnitude_guard(self):
        with pytest.raises(ValueError):
            N.LoopPerturbation.constant(1.0)

    def test_phase_only_constant_perturbation_preserves_phases(self, base_loop):
        # A rigid rotation of the profile leaves both (radially symmetric)
        # area integrals unchanged.
        pert = N.LoopPerturbation.constant(0.0, phi=0.7)
        out = N.perturb_loop(base_loop, pert)
        a = G.phase_integrals(base_loop, "line")
        b = G.phase_integrals(out, "line")
        assert abs(a.alpha1 - b.alpha1) < 1e-9
        assert abs(a.alpha2 - b.alpha2) < 1e-9

    def test_annulus_integral_identity(self, base_loop):
        # alpha2 shift of a 1% amplitude error equals the annulus integral.
        eps = 0.01
        out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(eps))
        rep = N.delta_alpha_bound(base_loop, out)
        beta = base_loop.meta["beta"]
        annulus = beta * (
            G.radial_phase_integral(2, 5.0 * (1 + eps), panels=128)
            - G.radial_phase_integral(2, 5.0, panels=128)
        )
        assert abs(rep.exact2 - annulus) <= 1e-8

    def test_time_varying_perturbation_line_integrals(self, base_loop):
        ts = np.linspace(0, base_loop.duration, 65)
        eps = 0.01 * np.sin(PI * ts / base_loop.duration) ** 2
        phi = 0.02 * np.sin(2 * PI * ts / base_loop.duration)
        pert = N.LoopPerturbation.from_samples(ts, eps, phi)
        out = N.perturb_loop(base_loop, pert)
        rep = N.delta_alpha_bound(base_loop, out)
        assert rep.bound1 is None  # no annulus bound for time-varying errors
        assert abs(rep.exact1) < 0.05 and abs(rep.exact2) < 0.2


class TestDeltaAlpha:
    def test_zero_perturbation_all_zero(self, base_loop):
        out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(0.0))
        rep = N.delta_alpha_bound(base_loop, out)
        assert rep.exact1 == pytest.approx(0.0, abs=1e-12)
        assert rep.exact2 == pytest.approx(0.0, abs=1e-12)
        assert rep.bound1 == pytest.approx(0.0, abs=1e-12)
        assert rep.lead1 == 0.0 and rep.lead2 == 0.0

    def test_leading_order_by_epsilon_halving(self, base_loop):
        # Residual against the first-order formula is O(eps^2): halving eps
        # must shrink it ~4x.
        def residuals(eps):
            out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(eps))
            rep = N.delta_alpha_bound(base_loop, out)
            return abs(rep.exact1 - rep.lead1), abs(rep.exact2 - rep.lead2)

        r1a, r2a = residuals(1e-3)
        r1b, r2b = residuals(5e-4)
        assert 3.5 <= r1a / r1b <= 4.5
        assert 3.5 <= r2a / r2b <= 4.5

    def test_bound_dominates_exact(self, base_loop, rng):
        for eps in (1e-3, -2e-3, 0.01, 0.05):
            out = N.perturb_loop(base_loop, N.LoopPerturbation.constant(eps))
            rep = N.delta_alpha_bound(base_loop, out)
            assert abs(rep.exact1) <= rep.bound1 + 1e-12
            assert abs(rep.exact2) <= rep.bound2 + 1e-12

    def test_annulus_suppression_with_radius(self):
        # With the entangling phase held at pi, larger radii shrink the
        # phase error of a fixed relative amplitude error.
        shifts = []
        for R in (3.0, 5.0, 7.0, 10.0):
            sol = G.solve_beta_for_phase(R, PI, "alpha2")
            lp = G.pacman_loop(R, sol.beta, 3.0, 4.0, OM2)
            out = N.perturb_loop(lp, N.LoopPerturbation.constant(1e-3))
            shifts.append(abs(N.delta_alpha_bound(lp, out).exact2))
        assert all(a > b for a, b in zip(shifts, shifts[1:]))


@pytest.fixture(scope="module")
def table():
    cfg = ModelConfig(d=2, W=10.0)
    return N.coherent_error_sweep(cfg, [3, 4, 5, 6], np.geomspace(1e-3, 1e-2, 8))


class TestCoherentSweep:
    def test_quadratic_scaling(self, table):
        rows = [r for r in table if r["R"] == 5.0]
        eps = np.array([r["epsilon"] for r in rows])
        infid = 1.0 - np.array([r["F_exact"] for r in rows])
        slope = np.polyfit(np.log(eps), np.log(infid), 1)[0]
        assert abs(slope - 2.0) <= 0.05

    def test_coefficient_decreases_with_radius(self, table):
        cs = {}
        for r in table:
            cs.setdefault(r["R"], []).append((1 - r["F_exact"]) / (r["beta"] ** 2 * r["epsilon"] ** 2))
        means = [np.mean(cs[R]) for R in sorted(cs)]
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_expansion_residual_is_higher_order(self, table):
        # The quadratic expansion and the exact fidelity differ at O(eps^3)
        # at worst; here the cubic term cancels by parity so the measured
        # residual shrinks ~16x per halving (>= the promised 8x).
        rows = sorted((r for r in table if r["R"] == 5.0), key=lambda r: r["epsilon"])
        resid = np.array([abs(r["F_exact"] - r["F_expansion"]) for r in rows])
        eps = np.array([r["epsilon"] for r in rows])
        order = np.polyfit(np.log(eps), np.log(resid), 1)[0]
        assert order >= 3.0

    def test_csv_header_contract(self, table):
        assert set(N.COHERENT_CSV_HEADER) <= set(table[0].keys())


class TestNoiseSampling:
    def test_mean_and_determinism(self):
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.05, seed=42)
        traj = N.sample_noise_trajectories(spec, T=20.0, dt=0.04, n_channels=2, n_traj=10_000)
        bound = 4.0 / math.sqrt(traj.xi.shape[0])
        assert np.max(np.abs(traj.xi.mean(axis=0))) <= bound
        again = N.sample_noise_trajectories(spec, T=20.0, dt=0.04, n_channels=2, n_traj=100)
        assert np.array_equal(again.xi, traj.xi[:100])

    def test_autocovariance_matches_kernel(self):
        spec = N.NoiseProcessSpec(sigma2=1.3, tau_c=0.5, gamma=0.05, seed=3)
        traj = N.sample_noise_trajectories(spec, T=30.0, dt=0.05, n_channels=1, n_traj=4000)
        xi = traj.xi[:, 0, :]
        n_t = xi.shape[1]
        for lag in (0, 4, 20):
            prods = xi[:, : n_t - lag] * xi[:, lag:]
            emp = prods.mean()
            theo = spec.sigma2 * math.exp(-lag * 0.05 / spec.tau_c)
            stderr = prods.std() / math.sqrt(prods.size)
            # correlated samples: inflate the naive standard error
            assert abs(emp - theo) <= 5.0 * stderr * math.sqrt(2 * spec.tau_c / 0.05)

    def test_coarse_dt_warns(self):
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.1, gamma=0.05, seed=1)
        with pytest.warns(UserWarning, match="tau_c"):
            N.sample_noise_trajectories(spec, T=5.0, dt=0.05, n_channels=1, n_traj=2)


class TestTrajectoryVsMaster:
    def test_zero_noise_strength_agrees_exactly(self, cfg2):
        lp = G.pacman_loop(2.0, PI, 5.0, 5.0, OM2)
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.0, seed=1)
        cmp_ = N.noisy_average_vs_master(cfg2.replace(gamma=0.0), lp, spec, 4, 8192, arity="one")
        assert cmp_.trace_distance <= 1e-10
        assert cmp_.rho_avg.purity == pytest.approx(1.0, abs=1e-8)

    def test_lindblad_preserves_trace(self, cfg2):
        lp = G.pacman_loop(2.0, PI, 5.0, 5.0, OM2)
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.05, seed=2)
        cmp_ = N.noisy_average_vs_master(cfg2.replace(gamma=0.0), lp, spec, 16, 512, arity="one")
        assert abs(cmp_.rho_master.trace - 1.0) <= 1e-8

    def test_average_state_is_physical(self, cfg2):
        lp = G.pacman_loop(2.0, PI, 5.0, 5.0, OM2)
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.05, seed=5)
        cmp_ = N.noisy_average_vs_master(cfg2.replace(gamma=0.0), lp, spec, 400, 1024, arity="one")
        rho = cmp_.rho_avg
        assert abs(rho.trace - 1.0) <= 1e-6
        assert rho.min_eigenvalue >= -1e-6
        assert np.max(np.abs(rho.rho - rho.rho.conj().T)) <= 1e-12

    def test_memory_kernel_modes_track_trajectories(self, cfg2):
        # At tau_c ~ gap scale the short-correlation limit is the crudest of
        # the three master equations; the memory-kernel modes must not be
        # farther from the trajectory average.
        lp = G.pacman_loop(2.0, PI, 5.0, 5.0, OM2)
        spec = N.NoiseProcessSpec(sigma2=1.0, tau_c=0.5, gamma=0.05, seed=11)
        dists = {}
        for mode in ("lindblad", "frozen", "exact"):
            cmp_ = N.noisy_average_vs_master(
                cfg2.replace(gamma=0.0), lp, spec, 800, 512, arity="one", master_mode=mode
            )
            dists[mode] = cmp_.trace_distance
        assert dists["frozen"] <= dists["lindblad"] + 0.002
        assert dists["exact"] <= dists["lindblad"] + 0.002

    def test_two_atom_variant_runs(self):
        cfg = ModelConfig(d=2, W=10.0)
        lp = G.pacman_loop(1.5, PI, 4.0, 4.0, OM2)
        spec = N.NoiseProcessSpec(sigma2=0.5, tau_c=0.5, gamma=0.03, seed=4)
        cmp_ = N.noisy_average_vs_master(cfg, lp, spec, 64, 512, arity="two")
        assert cmp_.rho_avg.rho.shape == (16, 16)
        assert abs(cmp_.rho_master.trace - 1.0) <= 1e-8
        assert cmp_.trace_distance <= 0.1

    def test_decay_config_rejected(self):
        cfg = ModelConfig(d=2, W=10.0, gamma=1e-3)
        lp = G.pacman_loop(1.5, PI, 4.0, 4.0, OM2)
        spec = N.NoiseProcessSpec(seed=4)
        with pytest.raises(ValueError):
            N.noisy_average_vs_master(cfg, lp, spec, 8, 512, arity="one")
