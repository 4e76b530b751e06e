"""Connection 1-form, tangent generators, and numerical parallel transport.

The zero-energy frames of :mod:`hologate.model` define a family of
subspaces over the drive-parameter space.  With a frame ``{v_i}`` and its
Gram matrix ``g``, the transport generator in frame coefficients is the
raised connection ``A^i_j = (g^{-1})_{ik} <v_k | d v_j>``; a state confined
to the subspace obeys ``dpsi/dt = -M(t) psi`` with
``M = lambda_dot^mu A_mu``.  Everything here is expressed in the base-point
computational basis: the frame at the base point is proportional to the
computational states with one fixed scalar per tensor factor, so the
coefficient fundamental matrix *is* the gate.

For product drives the generator takes the two-coefficient form
``M(t) = b1(t) M1 + b2(t) M2`` with constant matrices, which is what lets
:func:`parallel_transport` reuse the generic RK4 kernel.  Integration is
always split at loop segment boundaries; a fixed-step scheme stepping across
a kink in ``b1``/``b2`` would silently lose its order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .gates import Loop, b1_profile, b2_profile
from .model import (
    ModelConfig,
    NullFrame,
    ParameterPoint,
    minus_pairs,
    omega_norm_sq,
    plus_pairs,
    single_atom_null_frame,
    single_gram,
    two_atom_null_frame,
)

__all__ = [
    "ConnectionSample",
    "TangentConnection",
    "Holonomy",
    "connection_at",
    "tangent_connection",
    "parallel_transport",
    "pair_basis_matrix",
]


@dataclass(frozen=True, eq=False)
class ConnectionSample:
    """Connection 1-form at one parameter point, on frame indices.

    ``A_lowered[mu][i, j] = <v_i | d_mu v_j>`` and
    ``A_raised[mu] = gram_inv @ A_lowered[mu]`` for each of the 2d real
    coordinates (first the real parts, then the imaginary parts).
    """

    point: ParameterPoint
    frame: NullFrame
    A_lowered: np.ndarray
    A_raised: np.ndarray
    blocks: dict[str, slice] | None = None


def single_connection_lowered(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Analytic lowered connection of the single-atom frame.

    Real-part coordinate c fills column c with the drive amplitudes; the
    matching imaginary-part coordinate carries an extra ``-i``.
    """
    d = cfg.d
    om = p.omegas
    a = np.zeros((2 * d, d, d), dtype=complex)
    for c in range(d):
        a[c, :, c] = om
        a[d + c, :, c] = -1j * om
    return a


def _u_self_overlap(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    # <u | d_mu u> for u one of the unnormalised +-Omega eigenvectors;
    # identical for both, so the decoupled singlet rate needs only this.
    d = cfg.d
    om = p.omegas
    out = np.zeros(2 * d, dtype=complex)
    out[:d] = om.real + om.conj()
    out[d:] = om.imag + 1j * om.conj()
    return out


def plus_connection_lowered(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Analytic lowered connection on the symmetric two-atom block."""
    d = cfg.d
    om = p.omegas
    od2 = abs(cfg.omega_d) ** 2
    om2 = omega_norm_sq(cfg, p)
    alpha = 1.0 + 2.0 * om2**2 / od2**2
    pairs = plus_pairs(d)
    npair = len(pairs)
    out = np.zeros((2 * d, npair, npair), dtype=complex)
    for mu in range(2 * d):
        c = mu % d
        imag = mu >= d
        for i, (k, l) in enumerate(pairs):
            for j, (a, b) in enumerate(pairs):
                t1 = (
                    (c == b) * (a == k) * om[l]
                    + (c == a) * (b == l) * om[k]
                    + (c == a) * (b == k) * om[l]
                    + (c == b) * (a == l) * om[k]
                )
                t2 = om[k] * om[l] * ((c == a) * np.conj(om[b]) + (c == b) * np.conj(om[a]))
                t3 = om[k] * om[l] * np.conj(om[a]) * np.conj(om[b]) / od2**2
                if not imag:
                    val = 2.0 * od2 * t1 + 4.0 * t2 * alpha + 4.0 * t3 * (3.0 * np.conj(om[c]) + om[c]) * om2
                else:
                    val = (
                        -1j * 2.0 * od2 * t1
                        - 1j * 4.0 * t2 * alpha
                        + 4.0 * t3 * (3j * np.conj(om[c]) - 1j * om[c]) * om2
                    )
                out[mu, i, j] = val
    return out


def minus_connection_lowered(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Analytic lowered connection on the antisymmetric two-atom block."""
    d = cfg.d
    a1 = single_connection_lowered(cfg, p)
    g1 = single_gram(cfg, p)
    pairs = minus_pairs(d)
    npair = len(pairs)
    out = np.zeros((2 * d, npair, npair), dtype=complex)
    for mu in range(2 * d):
        am = a1[mu]
        for i, (k, l) in enumerate(pairs):
            for j, (a, b) in enumerate(pairs):
                out[mu, i, j] = 2.0 * (
                    am[k, a] * g1[l, b] + am[l, b] * g1[k, a] - am[k, b] * g1[l, a] - am[l, a] * g1[k, b]
                )
    return out


def connection_at(cfg: ModelConfig, p: ParameterPoint, frame_kind: str = "single") -> ConnectionSample:
    """Analytic connection sample at ``p`` for the chosen frame."""
    if frame_kind == "single":
        frame = single_atom_null_frame(cfg, p)
        a_low = single_connection_lowered(cfg, p)
        a_raised = np.einsum("ij,mjk->mik", frame.gram_inv, a_low)
        return ConnectionSample(point=p, frame=frame, A_lowered=a_low, A_raised=a_raised)
    if frame_kind == "two_atom":
        frame = two_atom_null_frame(cfg, p)
        d = cfg.d
        nm, npl = len(minus_pairs(d)), len(plus_pairs(d))
        n = 1 + nm + npl
        om2 = omega_norm_sq(cfg, p)
        a_low = np.zeros((2 * d, n, n), dtype=complex)
        a_low[:, 0, 0] = 8.0 * om2 * _u_self_overlap(cfg, p)
        a_low[:, 1 : 1 + nm, 1 : 1 + nm] = minus_connection_lowered(cfg, p)
        a_low[:, 1 + nm :, 1 + nm :] = plus_connection_lowered(cfg, p)
        a_raised = np.einsum("ij,mjk->mik", frame.gram_inv, a_low)
        blocks = {"0": slice(0, 1), "minus": slice(1, 1 + nm), "plus": slice(1 + nm, n)}
        return ConnectionSample(point=p, frame=frame, A_lowered=a_low, A_raised=a_raised, blocks=blocks)
    raise ValueError(f"frame_kind must be 'single' or 'two_atom', got {frame_kind!r}")


# ---------------------------------------------------------------------------
# Tangent generator along a product-drive loop
# ---------------------------------------------------------------------------


def pair_basis_matrix(d: int) -> np.ndarray:
    """Columns mapping (antisymmetric, symmetric) pair coefficients to the
    product computational basis ``|a, b> -> a d + b``."""
    nm = minus_pairs(d)
    npl = plus_pairs(d)
    q = np.zeros((d * d, len(nm) + len(npl)))
    for col, (a, b) in enumerate(nm):
        q[a * d + b, col] = 1.0
        q[b * d + a, col] = -1.0
    off = len(nm)
    for col, (a, b) in enumerate(npl):
        q[a * d + b, off + col] += 1.0
        q[b * d + a, off + col] += 1.0
    return q


def _pair_generators(d: int, omega: np.ndarray):
    """Constant matrices M1, M2 with M(t) = b1 M1 + b2 M2 on pair coefficients."""
    p = np.outer(omega, omega.conj())
    eye = np.eye(d)
    k_op = np.kron(eye, p) + np.kron(p, eye)
    pp = np.kron(p, p)
    q = pair_basis_matrix(d)
    qinv = np.linalg.inv(q)
    return qinv @ k_op @ q, qinv @ pp @ q, q, qinv


@dataclass(frozen=True, eq=False)
class TangentConnection:
    """Transport generator ``lambda_dot^mu A_mu`` at one loop time."""

    t: float
    M: np.ndarray
    blocks: dict[str, np.ndarray] | None = None


def w0_rate(loop: Loop, t) -> np.ndarray:
    """Tangent rate of the decoupled two-atom singlet coefficient."""
    f = np.asarray(loop.f(t))
    fd = np.asarray(loop.fdot(t))
    return (3.0 * np.conj(f) * fd + f * np.conj(fd)) / (2.0 * (1.0 + np.abs(f) ** 2))


def tangent_connection(cfg: ModelConfig, loop: Loop, t: float, frame_kind: str = "single") -> TangentConnection:
    if not 0.0 <= t <= loop.duration + 1e-12:
        raise ValueError(f"t={t} outside [0, {loop.duration}]")
    fv = complex(loop.f(t))
    fd = complex(loop.fdot(t))
    b1 = complex(b1_profile(fv, fd))
    if frame_kind == "single":
        m = b1 * np.outer(loop.omega, loop.omega.conj())
        return TangentConnection(t=float(t), M=m)
    if frame_kind == "two_atom":
        b2 = complex(b2_profile(fv, fd))
        m1, m2, _, _ = _pair_generators(cfg.d, loop.omega)
        m_pm = b1 * m1 + b2 * m2
        nm = len(minus_pairs(cfg.d))
        n = 1 + m_pm.shape[0]
        m = np.zeros((n, n), dtype=complex)
        m[0, 0] = complex(w0_rate(loop, t))
        m[1:, 1:] = m_pm
        blocks = {
            "0": m[0:1, 0:1],
            "minus": m_pm[:nm, :nm],
            "plus": m_pm[nm:, nm:],
        }
        return TangentConnection(t=float(t), M=m, blocks=blocks)
    raise ValueError(f"frame_kind must be 'single' or 'two_atom', got {frame_kind!r}")


# ---------------------------------------------------------------------------
# Parallel transport (holonomy)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Holonomy:
    """Transported operator on the base-point computational basis."""

    U: np.ndarray
    unitarity_defect: float
    steps: int
    method: str
    frame_kind: str
    block_offdiag: float | None = None
    w0_phase: complex | None = None


def _segment_profiles(loop: Loop, steps: int):
    """Per-segment half-step grids with one-sided profile and derivative samples."""
    out = []
    for i, (t0, n, h) in enumerate(loop.segment_grid(steps)):
        th = t0 + 0.5 * h * np.arange(2 * n + 1)
        f, fd = loop.branch(i)
        out.append((np.asarray(f(th), dtype=complex), np.asarray(fd(th), dtype=complex), h, n, t0))
    return out


def parallel_transport(cfg: ModelConfig, loop: Loop, steps: int, frame_kind: str = "single") -> Holonomy:
    """Integrate the transport equation around a closed loop.

    Fixed-step classical RK4 on the frame-coefficient equation
    ``dpsi/dt = -M(t) psi``, with steps distributed across loop segments so
    no step straddles a kink.  The result is expressed in the base-point
    computational basis; for the two-atom frame the decoupled singlet phase
    is integrated separately by quadrature and reported, not mixed in.
    """
    loop.require_closed()
    if frame_kind == "single":
        m1 = np.outer(loop.omega, loop.omega.conj())
        zero = np.zeros_like(m1)
        u = np.eye(cfg.d, dtype=complex)
        total = 0
        for f, fd, h, n, _t0 in _segment_profiles(loop, steps):
            c1 = b1_profile(f, fd)
            u = kernels.rk4_drive_propagate(zero, -m1, zero, c1, np.zeros_like(c1), h, u)
            total += n
        defect = float(np.linalg.norm(u.conj().T @ u - np.eye(cfg.d)))
        return Holonomy(U=u, unitarity_defect=defect, steps=total, method="ode", frame_kind=frame_kind)
    if frame_kind == "two_atom":
        m1, m2, q, qinv = _pair_generators(cfg.d, loop.omega)
        dim = m1.shape[0]
        u = np.eye(dim, dtype=complex)
        zero = np.zeros_like(m1)
        total = 0
        w0_log = 0.0 + 0.0j
        from .gates import _gl_panels  # shared Gauss-Legendre panels

        for f, fd, h, n, t0 in _segment_profiles(loop, steps):
            u = kernels.rk4_drive_propagate(zero, -m1, -m2, b1_profile(f, fd), b2_profile(f, fd), h, u)
            nodes, weights = _gl_panels(t0, t0 + n * h, max(8, n // 8))
            w0_log += np.sum(weights * w0_rate(loop, nodes))
            total += n
        nm = len(minus_pairs(cfg.d))
        off = max(
            float(np.max(np.abs(u[:nm, nm:]))) if nm else 0.0,
            float(np.max(np.abs(u[nm:, :nm]))) if nm else 0.0,
        )
        u_prod = q @ u @ qinv
        defect = float(np.linalg.norm(u_prod.conj().T @ u_prod - np.eye(dim)))
        return Holonomy(
            U=u_prod,
            unitarity_defect=defect,
            steps=total,
            method="ode",
            frame_kind=frame_kind,
            block_offdiag=off,
            w0_phase=complex(np.exp(-w0_log)),
        )
    raise ValueError(f"frame_kind must be 'single' or 'two_atom', got {frame_kind!r}")
