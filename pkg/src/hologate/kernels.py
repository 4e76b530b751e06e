"""Hot numeric kernels: fixed-step RK4 propagation and trajectory averaging.

Every kernel here exists in two functionally identical flavours:

* a ``numba.njit``-compiled version (default when numba imports cleanly), and
* a pure-NumPy fallback, selected by setting ``HOLOGATE_DISABLE_NUMBA=1``
  in the environment before import.

Generators are restricted to the form ``G(t) = a0 + c1(t) a1 + c2(t) a2``
with scalar drive samples on a half-step grid ``t_k = t0 + k h/2``
(``k = 0 .. 2n``), which covers everything this package integrates: the
Schrodinger equation with a product drive, the parallel-transport equation,
and the stochastic drive variants.  Sub-stage sampling keeps the schemes
genuinely 4th order for time-dependent generators.

``benchmarks/bench_kernels.py`` times the two flavours against each other.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "backend",
    "rk4_drive_propagate",
    "sse_propagate",
    "NUMBA_ENABLED",
]

_DISABLED = os.environ.get("HOLOGATE_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:  # pragma: no cover - exercised via env flag in CI
    if _DISABLED:
        raise ImportError("numba disabled by HOLOGATE_DISABLE_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def backend() -> str:
    """Name of the active kernel backend."""
    return "numba" if NUMBA_ENABLED else "numpy"


def _rk4_drive_propagate_impl(a0, a1, a2, c1, c2, dt, y0):
    # dY/dt = (a0 + c1(t) a1 + c2(t) a2) Y, c* sampled at half steps.
    y = y0.copy()
    n = (c1.shape[0] - 1) // 2
    h = dt
    for k in range(n):
        g0 = a0 + c1[2 * k] * a1 + c2[2 * k] * a2
        gm = a0 + c1[2 * k + 1] * a1 + c2[2 * k + 1] * a2
        g1 = a0 + c1[2 * k + 2] * a1 + c2[2 * k + 2] * a2
        k1 = g0 @ y
        k2 = gm @ (y + (0.5 * h) * k1)
        k3 = gm @ (y + (0.5 * h) * k2)
        k4 = g1 @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return y


def _sse_propagate_impl(a0, a1, a2, c1, c2, xi, gamma, noise_ops, dt, psi_block):
    # Per-trajectory RK4 with the noisy generator
    #   G_j(t) = a0 + c1 a1 + c2 a2 - i gamma sum_a xi[j, a, t] N_a.
    # psi_block is (dim, n_traj); returns the evolved block.
    n_traj = xi.shape[0]
    n_ch = xi.shape[1]
    dim = psi_block.shape[0]
    n = (c1.shape[0] - 1) // 2
    h = dt
    out = np.empty_like(psi_block)
    g = np.empty((dim, dim), dtype=np.complex128)
    for j in range(n_traj):
        psi = psi_block[:, j].copy()
        for k in range(n):
            i0, im, i1 = 2 * k, 2 * k + 1, 2 * k + 2
            _noisy_generator(g, a0, a1, a2, c1[i0], c2[i0], xi[j], i0, gamma, noise_ops, n_ch)
            k1 = g @ psi
            _noisy_generator(g, a0, a1, a2, c1[im], c2[im], xi[j], im, gamma, noise_ops, n_ch)
            k2 = g @ (psi + (0.5 * h) * k1)
            k3 = g @ (psi + (0.5 * h) * k2)
            _noisy_generator(g, a0, a1, a2, c1[i1], c2[i1], xi[j], i1, gamma, noise_ops, n_ch)
            k4 = g @ (psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[:, j] = psi
    return out


def _noisy_generator_impl(g, a0, a1, a2, c1v, c2v, xi_traj, tidx, gamma, noise_ops, n_ch):
    dim = a0.shape[0]
    for r in range(dim):
        for c in range(dim):
            acc = a0[r, c] + c1v * a1[r, c] + c2v * a2[r, c]
            for a in range(n_ch):
                acc += (-1j * gamma * xi_traj[a, tidx]) * noise_ops[a, r, c]
            g[r, c] = acc


if NUMBA_ENABLED:  # pragma: no branch
    _noisy_generator = njit(cache=True, nogil=True)(_noisy_generator_impl)
    rk4_drive_propagate = njit(cache=True, nogil=True)(_rk4_drive_propagate_impl)
    _sse_propagate_numba = njit(cache=True, nogil=True)(_sse_propagate_impl)
else:
    _noisy_generator = _noisy_generator_impl
    rk4_drive_propagate = _rk4_drive_propagate_impl
    _sse_propagate_numba = None


def _sse_propagate_numpy(a0, a1, a2, c1, c2, xi, gamma, noise_ops, dt, psi_block):
    # Same trajectories as the numba kernel, vectorised across the trajectory
    # axis instead of looped.
    n = (c1.shape[0] - 1) // 2
    h = dt
    psi = psi_block.astype(complex, copy=True)

    def apply(tidx, vec):
        out = (a0 + c1[tidx] * a1 + c2[tidx] * a2) @ vec
        out += -1j * gamma * np.einsum("ja,akl,lj->kj", xi[:, :, tidx], noise_ops, vec)
        return out

    for k in range(n):
        i0, im, i1 = 2 * k, 2 * k + 1, 2 * k + 2
        k1 = apply(i0, psi)
        k2 = apply(im, psi + (0.5 * h) * k1)
        k3 = apply(im, psi + (0.5 * h) * k2)
        k4 = apply(i1, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return psi


def sse_propagate(a0, a1, a2, c1, c2, xi, gamma, noise_ops, dt, psi_block):
    """Evolve a block of noisy trajectories over one uniform-step span.

    Parameters
    ----------
    a0, a1, a2 : (dim, dim) complex
        Generator parts; the deterministic generator is a0 + c1 a1 + c2 a2.
    c1, c2 : (2n+1,) complex
        Drive samples on the half-step grid.
    xi : (n_traj, n_ch, 2n+1) float
        Real noise samples per trajectory and channel.
    gamma : float
        Noise strength multiplying ``xi``.
    noise_ops : (n_ch, dim, dim) complex
        Hermitian coupling operator of each noise channel.
    dt : float
        Full step size (the grid above is at half this spacing).
    psi_block : (dim, n_traj) complex
        Per-trajectory states, evolved in place order.
    """
    noise_ops = np.ascontiguousarray(noise_ops, dtype=np.complex128)
    psi_block = np.ascontiguousarray(psi_block, dtype=np.complex128)
    if NUMBA_ENABLED:
        return _sse_propagate_numba(a0, a1, a2, c1, c2, xi, gamma, noise_ops, dt, psi_block)
    return _sse_propagate_numpy(a0, a1, a2, c1, c2, xi, gamma, noise_ops, dt, psi_block)
