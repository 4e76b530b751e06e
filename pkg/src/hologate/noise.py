"""Coherent loop-deformation errors and stochastic drive noise.

Two error families live here:

* **Coherent**: the executed profile is a deformed ``(1 + eps(t)) f(t)
  exp(i phi(t))``.  Both phases shift by area integrals over the region
  between the ideal and deformed profiles, so the damage is controlled by
  the radial decay of the curvature densities; :func:`coherent_error_sweep`
  quantifies the resulting quadratic infidelity law and its collapse with
  loop radius.

* **Stochastic**: zero-mean Gaussian (Ornstein-Uhlenbeck) fluctuations ride
  on each controllable amplitude.  :func:`noisy_average_vs_master` evolves
  explicit trajectories, averages the projectors, and cross-checks the
  mixture against a master equation: by default the short-correlation
  (Lindblad) limit with rates ``2 gamma^2 F_a(t)``,
  ``F_a(t) = sigma^2 tau_c (1 - exp(-t/tau_c))``; slower but less
  approximate memory-kernel modes are available behind ``master_mode``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .gates import (
    Loop,
    _gl_panels,
    curvature_density,
    gate_fidelity,
    pacman_loop,
    phase_integrals,
    solve_beta_for_phase,
    two_gate_matrix,
)
from .model import ModelConfig, drive_parts

__all__ = [
    "LoopPerturbation",
    "NoiseProcessSpec",
    "MixedState",
    "DeltaAlphaReport",
    "NoisyComparison",
    "perturb_loop",
    "delta_alpha_bound",
    "leading_order_delta_alpha",
    "fidelity_expansion",
    "coherent_error_sweep",
    "sample_noise_trajectories",
    "noisy_average_vs_master",
    "trace_distance",
    "COHERENT_CSV_HEADER",
]

COHERENT_CSV_HEADER = [
    "R",
    "beta",
    "epsilon",
    "dalpha1",
    "dalpha2",
    "bound1",
    "bound2",
    "F_exact",
    "F_expansion",
]


# ---------------------------------------------------------------------------
# Coherent loop deformations
# ---------------------------------------------------------------------------


def _const(x: float) -> Callable:
    return lambda t: np.full_like(np.asarray(t, dtype=float), x, dtype=float)


@dataclass(frozen=True, eq=False)
class LoopPerturbation:
    """Multiplicative amplitude error and additive phase error on a profile."""

    epsilon: Callable
    phi: Callable
    epsilon_dot: Callable
    phi_dot: Callable
    constant_epsilon: float | None = None

    @classmethod
    def constant(cls, eps: float, phi: float = 0.0) -> "LoopPerturbation":
        if abs(eps) >= 1.0:
            raise ValueError("|epsilon| must stay below 1")
        return cls(_const(eps), _const(phi), _const(0.0), _const(0.0), constant_epsilon=float(eps))

    @classmethod
    def from_samples(cls, times, eps_vals, phi_vals) -> "LoopPerturbation":
        from scipy.interpolate import CubicSpline

        times = np.asarray(times, dtype=float)
        e = CubicSpline(times, np.asarray(eps_vals, dtype=float))
        p = CubicSpline(times, np.asarray(phi_vals, dtype=float))
        if np.max(np.abs(e(times))) >= 1.0:
            raise ValueError("|epsilon| must stay below 1")
        return cls(e, p, e.derivative(), p.derivative())


def perturb_loop(loop: Loop, pert: LoopPerturbation) -> Loop:
    """Apply a deformation pointwise; the direction vector is untouched."""

    def deform(pair):
        f, fd = pair

        def pf(t):
            t = np.asarray(t, dtype=float)
            return (1.0 + pert.epsilon(t)) * f(t) * np.exp(1j * pert.phi(t))

        def pfd(t):
            t = np.asarray(t, dtype=float)
            ph = np.exp(1j * pert.phi(t))
            amp = 1.0 + pert.epsilon(t)
            return ph * (
                pert.epsilon_dot(t) * f(t)
                + amp * fd(t)
                + 1j * pert.phi_dot(t) * amp * f(t)
            )

        return pf, pfd

    profile, profile_dot = deform((loop.profile, loop.profile_dot))
    branches = None
    if loop.branches is not None:
        branches = tuple(deform(b) for b in loop.branches)
    meta = {**loop.meta, "perturbed": True}
    if pert.constant_epsilon is not None and loop.kind == "pacman":
        meta["base_R"] = loop.meta["R"]
        meta["epsilon_const"] = pert.constant_epsilon
    return Loop(
        omega=loop.omega,
        duration=loop.duration,
        profile=profile,
        profile_dot=profile_dot,
        breakpoints=loop.breakpoints,
        kind="perturbed",
        meta=meta,
        branches=branches,
    )


def leading_order_delta_alpha(R: float, beta: float, eps: float) -> tuple[float, float]:
    """First-order phase shifts of a constant relative radius error."""
    lead1 = eps * beta * 2.0 * R**2 / (1.0 + R**2) ** 2
    lead2 = (
        eps
        * beta
        * 4.0
        * R**4
        * (4.0 - R**2 - 2.0 * R**4 - 6.0 * R**6)
        / (1.0 + R**2 + 2.0 * R**4 + 2.0 * R**6) ** 2
    )
    return lead1, lead2


@dataclass(frozen=True)
class DeltaAlphaReport:
    """Exact phase shifts, their annulus bounds, and leading-order forms."""

    exact1: float
    exact2: float
    bound1: float | None
    bound2: float | None
    lead1: float | None
    lead2: float | None


def _annulus_abs_integral(which: int, r_lo: float, r_hi: float) -> float:
    # |C| can change sign once (the entangling density does, near r ~ 0.85);
    # split there so each panel integrates a smooth signed function.
    from scipy.optimize import brentq

    edges = [r_lo, r_hi]
    if which == 2 and r_lo < 0.8487 < r_hi:
        edges.insert(1, brentq(lambda r: curvature_density(2, r), 0.5, 1.5))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        nodes, weights = _gl_panels(a, b, 16)
        total += abs(float(np.sum(weights * nodes * curvature_density(which, nodes))))
    return total


def delta_alpha_bound(loop: Loop, perturbed: Loop) -> DeltaAlphaReport:
    """Exact phase differences plus the area bound where it is well defined.

    The bound integrates ``|C|`` over the region between the profiles, which
    is only evaluated here for the concentric case (a constant amplitude
    error on a pacman loop: the region is an annulus sector).  The exact
    values always come from line integrals of both loops.
    """
    base = phase_integrals(loop, "line")
    tilt = phase_integrals(perturbed, "line")
    exact1 = tilt.alpha1 - base.alpha1
    exact2 = tilt.alpha2 - base.alpha2
    bound1 = bound2 = lead1 = lead2 = None
    if perturbed.meta.get("epsilon_const") is not None and loop.kind == "pacman":
        eps = perturbed.meta["epsilon_const"]
        R = loop.meta["R"]
        beta = loop.meta["beta"]
        r_lo, r_hi = sorted((R, R * (1.0 + eps)))
        bound1 = beta * _annulus_abs_integral(1, r_lo, r_hi)
        bound2 = beta * _annulus_abs_integral(2, r_lo, r_hi)
        lead1, lead2 = leading_order_delta_alpha(R, beta, eps)
    return DeltaAlphaReport(
        exact1=float(exact1), exact2=float(exact2), bound1=bound1, bound2=bound2, lead1=lead1, lead2=lead2
    )


def fidelity_expansion(d: int, dalpha1: float, dalpha2: float) -> float:
    """Second-order infidelity of a two-qudit phase-pair error."""
    c1 = 2.0 * (d - 1) / (d**2 + 1)
    c2 = (d**2 - 1) / (d**2 * (d**2 + 1))
    c12 = 4.0 * (d - 1) / (d * (d**2 + 1))
    return 1.0 - c1 * dalpha1**2 - c2 * dalpha2**2 - c12 * dalpha1 * dalpha2


def coherent_error_sweep(cfg: ModelConfig, R_list, epsilon_list, *, t1: float = 3.0, t2: float = 4.0) -> list[dict]:
    """Exact and second-order gate fidelity under constant amplitude errors.

    For each radius the arc angle is re-tuned so the unperturbed loop hits
    an entangling phase of pi (the two-qubit benchmark); each epsilon then
    deforms that loop and both the exact phase-level fidelity and the
    quadratic expansion are recorded.
    """
    omega = np.eye(cfg.d)[cfg.d - 1]
    rows = []
    for R in R_list:
        sol = solve_beta_for_phase(float(R), math.pi, "alpha2")
        base = pacman_loop(float(R), sol.beta, t1, t2, omega)
        base_phases = phase_integrals(base, "line")
        u_ref = two_gate_matrix(omega, base_phases.alpha1, base_phases.alpha2)
        for eps in epsilon_list:
            pert = perturb_loop(base, LoopPerturbation.constant(float(eps)))
            rep = delta_alpha_bound(base, pert)
            u_err = two_gate_matrix(
                omega, base_phases.alpha1 + rep.exact1, base_phases.alpha2 + rep.exact2
            )
            rows.append(
                {
                    "R": float(R),
                    "beta": sol.beta,
                    "epsilon": float(eps),
                    "dalpha1": rep.exact1,
                    "dalpha2": rep.exact2,
                    "bound1": rep.bound1,
                    "bound2": rep.bound2,
                    "F_exact": gate_fidelity(u_err, u_ref),
                    "F_expansion": fidelity_expansion(cfg.d, rep.exact1, rep.exact2),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# Stochastic drive noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseProcessSpec:
    """Stationary Ornstein-Uhlenbeck noise, independent across channels.

    Covariance ``sigma2 * exp(-|t - s| / tau_c)`` per channel; ``gamma``
    scales the coupling into the Hamiltonian; ``seed`` pins every draw.
    """

    sigma2: float = 1.0
    tau_c: float = 0.5
    gamma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 < 0 or self.tau_c <= 0:
            raise ValueError("need sigma2 >= 0 and tau_c > 0")

    def stationary_sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def lindblad_weight(self, t) -> np.ndarray:
        """Integrated covariance ``F(t) = sigma2 tau_c (1 - exp(-t/tau_c))``."""
        t = np.asarray(t, dtype=float)
        return self.sigma2 * self.tau_c * (1.0 - np.exp(-t / self.tau_c))


@dataclass(frozen=True, eq=False)
class NoiseTrajectories:
    times: np.ndarray
    xi: np.ndarray  # (n_traj, n_channels, n_times)
    spec: NoiseProcessSpec


def _ou_on_grid(spec: NoiseProcessSpec, times: np.ndarray, n_channels: int, n_traj: int) -> np.ndarray:
    """Exact-discretisation stationary OU samples on an arbitrary grid.

    Trajectory ``j`` draws from the ``j``-th spawned child of the seed, so
    the set {trajectory 0 .. n-1} is a prefix of {trajectory 0 .. 2n-1}:
    doubling the trajectory count extends, never reshuffles.
    """
    n_t = times.size
    sig = spec.stationary_sigma()
    z = np.empty((n_traj, n_channels, n_t))
    children = np.random.SeedSequence(spec.seed).spawn(n_traj)
    for j, child in enumerate(children):
        z[j] = np.random.default_rng(child).standard_normal((n_channels, n_t))
    rho = np.exp(-np.diff(times) / spec.tau_c)
    innov = sig * np.sqrt(np.maximum(0.0, 1.0 - rho**2))
    xi = np.empty_like(z)
    xi[..., 0] = sig * z[..., 0]
    for k in range(1, n_t):
        xi[..., k] = rho[k - 1] * xi[..., k - 1] + innov[k - 1] * z[..., k]
    return xi


def sample_noise_trajectories(
    spec: NoiseProcessSpec, T: float, dt: float, n_channels: int, n_traj: int
) -> NoiseTrajectories:
    """Sample OU trajectories on the uniform grid ``0, dt, ..., ~T``.

    Warns when ``dt`` under-resolves the correlation time.
    """
    if dt > spec.tau_c / 10.0:
        import warnings

        warnings.warn(
            f"dt = {dt} coarser than tau_c/10 = {spec.tau_c / 10}; "
            "sampled trajectories will under-resolve the correlations",
            stacklevel=2,
        )
    times = np.arange(0.0, T + 0.5 * dt, dt)
    return NoiseTrajectories(times=times, xi=_ou_on_grid(spec, times, n_channels, n_traj), spec=spec)


@dataclass(frozen=True, eq=False)
class MixedState:
    """Density matrix with its cheap sanity scalars."""

    rho: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))))


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    diff = rho_a - rho_b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def _noise_operators(cfg: ModelConfig, arity: str) -> np.ndarray:
    """Coupling operator per channel: ``|a><f| + |f><a|`` on each atom."""
    n = cfg.dim
    ops = np.zeros((cfg.d, n, n), dtype=complex)
    for a in range(cfg.d):
        ops[a, a, cfg.f_index] = 1.0
        ops[a, cfg.f_index, a] = 1.0
    if arity == "one":
        return ops
    eye = np.eye(n)
    return np.stack([np.kron(eye, op) + np.kron(op, eye) for op in ops])


def _segment_grids(loop: Loop, steps: int):
    grids = []
    for i, (t0, n, h) in enumerate(loop.segment_grid(steps)):
        th = t0 + 0.5 * h * np.arange(2 * n + 1)
        f, _ = loop.branch(i)
        grids.append((th, np.asarray(f(th), dtype=complex), h))
    return grids


def _master_rhs_factory(spec, noise_ops, mode):
    """Dissipator D(t, rho) for the chosen master-equation mode."""
    gamma2 = spec.gamma**2

    if mode == "lindblad":
        squares = [x @ x for x in noise_ops]

        def dissipator(t, h_now, rho):
            rate = 2.0 * gamma2 * float(spec.lindblad_weight(t))
            out = np.zeros_like(rho)
            for x, x2 in zip(noise_ops, squares):
                out += rate * (x @ rho @ x - 0.5 * (x2 @ rho + rho @ x2))
            return out

        return dissipator

    if mode == "frozen":
        # Memory kernel with the generator frozen at the current time: the
        # s-integral of the covariance times the conjugated coupling has a
        # closed form in the instantaneous eigenbasis.
        def dissipator(t, h_now, rho):
            evals, vecs = np.linalg.eigh(h_now)
            delta = evals[:, None] - evals[None, :]
            lam = 1.0 / spec.tau_c + 1j * delta
            weight = spec.sigma2 * (1.0 - np.exp(-t * lam)) / lam
            out = np.zeros_like(rho)
            for x in noise_ops:
                xt = vecs.conj().T @ x @ vecs
                j_op = vecs @ (xt * weight) @ vecs.conj().T
                comm_inner = j_op @ rho - rho @ j_op
                out += -gamma2 * (x @ comm_inner - comm_inner @ x)
            return out

        return dissipator

    raise ValueError(f"master_mode must be 'lindblad', 'frozen' or 'exact', got {mode!r}")


def _evolve_master(cfg, loop, spec, steps, arity, psi0, mode):
    h_static, c, c_dag = drive_parts(cfg, loop.omega, arity)
    noise_ops = _noise_operators(cfg, arity)
    rho = np.outer(psi0, psi0.conj())
    if mode == "exact":
        return _evolve_master_exact(loop, spec, steps, h_static, c, c_dag, noise_ops, rho)
    dissipator = _master_rhs_factory(spec, noise_ops, mode)
    for th, fv, h in _segment_grids(loop, steps):
        n = (fv.size - 1) // 2
        for k in range(n):
            i0, im, i1 = 2 * k, 2 * k + 1, 2 * k + 2
            h0 = h_static + fv[i0] * c + np.conj(fv[i0]) * c_dag
            hm = h_static + fv[im] * c + np.conj(fv[im]) * c_dag
            h1 = h_static + fv[i1] * c + np.conj(fv[i1]) * c_dag

            def rhs(tt, hh, r):
                return -1j * (hh @ r - r @ hh) + dissipator(tt, hh, r)

            k1 = rhs(th[i0], h0, rho)
            k2 = rhs(th[im], hm, rho + 0.5 * h * k1)
            k3 = rhs(th[im], hm, rho + 0.5 * h * k2)
            k4 = rhs(th[i1], h1, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return rho


def _evolve_master_exact(loop, spec, steps, h_static, c, c_dag, noise_ops, rho):
    """Memory-kernel evolution with the true propagator in the kernel.

    The kernel integral J_a(t) = int_0^t cov(t,s) U(t,s) X_a U(t,s)^dag ds
    obeys a one-step recursion because the covariance is exponential; each
    step conjugates by the one-step propagator and adds a trapezoid
    increment.  The dissipator uses the step-start J (the dissipator is
    O(gamma^2), so this costs one order in h on a small term only).
    """
    gamma2 = spec.gamma**2
    dim = rho.shape[0]
    j_ops = [np.zeros((dim, dim), dtype=complex) for _ in noise_ops]
    for th, fv, h in _segment_grids(loop, steps):
        n = (fv.size - 1) // 2
        decay = math.exp(-h / spec.tau_c)
        for k in range(n):
            i0, im, i1 = 2 * k, 2 * k + 1, 2 * k + 2
            h0 = h_static + fv[i0] * c + np.conj(fv[i0]) * c_dag
            hm = h_static + fv[im] * c + np.conj(fv[im]) * c_dag
            h1 = h_static + fv[i1] * c + np.conj(fv[i1]) * c_dag

            def rhs(hh, r, js):
                out = -1j * (hh @ r - r @ hh)
                for x, j_op in zip(noise_ops, js):
                    inner = j_op @ r - r @ j_op
                    out += -gamma2 * (x @ inner - inner @ x)
                return out

            k1 = rhs(h0, rho, j_ops)
            k2 = rhs(hm, rho + 0.5 * h * k1, j_ops)
            k3 = rhs(hm, rho + 0.5 * h * k2, j_ops)
            k4 = rhs(h1, rho + h * k3, j_ops)
            rho = rho + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            # one-step unperturbed propagator for the kernel recursion
            u_step = kernels.rk4_drive_propagate(
                -1j * h_static, -1j * c, -1j * c_dag, fv[i0 : i1 + 1], np.conj(fv[i0 : i1 + 1]), h,
                np.eye(dim, dtype=complex),
            )
            for a, x in enumerate(noise_ops):
                conj_x = u_step @ x @ u_step.conj().T
                j_ops[a] = decay * (u_step @ j_ops[a] @ u_step.conj().T) + (
                    spec.sigma2 * 0.5 * h
                ) * (x + decay * conj_x)
    return rho


@dataclass(frozen=True, eq=False)
class NoisyComparison:
    """Trajectory-averaged state vs master-equation state."""

    rho_avg: MixedState
    rho_master: MixedState
    trace_distance: float
    n_traj: int
    spec: NoiseProcessSpec
    master_mode: str
    backend: str
    mean_final_norm: float
    #: Relative change of the trace distance when n_traj doubles (if checked).
    doubling_change: float | None = None


def _trajectory_states(cfg, loop, spec, steps, arity, psi0, n_traj) -> np.ndarray:
    """Final per-trajectory states (dim, n_traj) under the noisy drive.

    The noise is sampled once on the concatenated half-step grid of all loop
    segments (duplicated boundary times advance the process by zero), so the
    same trajectory realisations feed every segment.
    """
    h_static, c, c_dag = drive_parts(cfg, loop.omega, arity)
    noise_ops = _noise_operators(cfg, arity)
    a0, a1, a2 = -1j * h_static, -1j * c, -1j * c_dag
    grids = _segment_grids(loop, steps)
    all_times = np.concatenate([g[0] for g in grids])
    xi_all = _ou_on_grid(spec, all_times, cfg.d, n_traj)
    psi = np.repeat(np.asarray(psi0, dtype=complex)[:, None], n_traj, axis=1)
    offset = 0
    for th, fv, h in grids:
        xi_seg = np.ascontiguousarray(xi_all[:, :, offset : offset + th.size])
        psi = kernels.sse_propagate(a0, a1, a2, fv, np.conj(fv), xi_seg, spec.gamma, noise_ops, h, psi)
        offset += th.size
    return psi


def default_initial_state(cfg: ModelConfig, arity: str = "one") -> np.ndarray:
    """Uniform superposition of the computational levels (both atoms if two)."""
    single = np.zeros(cfg.dim, dtype=complex)
    single[: cfg.d] = 1.0 / math.sqrt(cfg.d)
    if arity == "one":
        return single
    return np.kron(single, single)


def noisy_average_vs_master(
    cfg: ModelConfig,
    loop: Loop,
    spec: NoiseProcessSpec,
    n_traj: int,
    steps: int,
    *,
    arity: str = "one",
    psi0: np.ndarray | None = None,
    master_mode: str = "lindblad",
    check_doubling: bool = False,
) -> NoisyComparison:
    """Trajectory-average the noisy evolution and compare to a master equation.

    Trajectory ``j`` always uses the ``j``-th spawned noise stream, so runs
    with the same seed are bit-reproducible and ``check_doubling=True``
    extends the ensemble instead of redrawing it (the relative change of the
    trace distance under doubling is reported, never hidden).
    """
    if cfg.gamma != 0:
        raise ValueError("stochastic-noise comparison assumes gamma = 0 (no decay)")
    if psi0 is None:
        psi0 = default_initial_state(cfg, arity)
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    count = 2 * n_traj if check_doubling else n_traj
    states = _trajectory_states(cfg, loop, spec, steps, arity, psi0, count)
    block = states[:, :n_traj]
    rho_avg = (block @ block.conj().T) / n_traj
    rho_master = _evolve_master(cfg, loop, spec, steps, arity, psi0, master_mode)
    dist = trace_distance(rho_avg, rho_master)
    doubling = None
    if check_doubling:
        rho_2n = (states @ states.conj().T) / count
        dist_2n = trace_distance(rho_2n, rho_master)
        doubling = abs(dist_2n - dist) / max(dist, 1e-30)
    return NoisyComparison(
        rho_avg=MixedState(rho_avg),
        rho_master=MixedState(rho_master),
        trace_distance=dist,
        n_traj=n_traj,
        spec=spec,
        master_mode=master_mode,
        backend=kernels.backend(),
        mean_final_norm=float(np.mean(np.linalg.norm(block, axis=0))),
        doubling_change=doubling,
    )
