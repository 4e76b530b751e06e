"""Drive loops, geometric phase integrals, and the closed-form gates.

A loop is a closed profile ``f : [0, T] -> C`` with ``f(0) = f(T) = 0``
shared, up to the constant unit vector ``omega``, by all controllable drive
amplitudes.  The two real phases attached to a loop,

* ``alpha1``: rotation angle on the single-atom computational space, and
* ``alpha2``: the additional entangling angle of the two-atom gate,

are area integrals of fixed radial densities over the region the profile
encloses, and equivalently line integrals of the tangent densities ``b1``
and ``b2`` below.  Both routes are implemented and must agree; this is a
load-bearing internal consistency check, not a convenience.

Quadrature is composite Gauss-Legendre, always split at segment boundaries
so panels never straddle a kink of a piecewise profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ModelConfig

__all__ = [
    "Loop",
    "PhasePair",
    "GateReport",
    "BetaSolution",
    "pacman_loop",
    "sampled_loop",
    "phase_integrals",
    "analytic_gate",
    "solve_beta_for_phase",
    "gate_fidelity",
    "curvature_density",
    "radial_phase_integral",
    "reverse_loop",
    "power_reparametrized",
    "b1_profile",
    "b2_profile",
]

TWO_PI = 2.0 * math.pi


def _whole_turns(beta: float) -> int:
    """Completed full turns of an arc angle; beta in (0, 2 pi] gives 0."""
    return max(0, int(math.ceil(beta / TWO_PI)) - 1)

# Gauss-Legendre nodes/weights reused by every quadrature in this module.
_GL_ORDER = 12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True, eq=False)
class Loop:
    """A closed drive profile with direction vector and segment structure.

    ``profile`` and ``profile_dot`` accept scalar or array times.
    ``breakpoints`` lists segment boundaries (including 0 and T); numerical
    consumers never integrate across them.
    """

    omega: np.ndarray
    duration: float
    profile: Callable[[np.ndarray], np.ndarray]
    profile_dot: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...]
    kind: str = "generic"
    meta: dict = field(default_factory=dict)
    #: Optional per-segment (f, fdot) callables.  The global profile_dot is
    #: ambiguous exactly at a kink; integrators sampling a segment endpoint
    #: need the branch belonging to that segment.
    branches: tuple | None = None

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=complex)
        nrm = np.linalg.norm(om)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"direction vector must be unit norm, |omega| = {nrm}")
        object.__setattr__(self, "omega", om)
        bp = tuple(float(b) for b in self.breakpoints)
        if bp[0] != 0.0 or abs(bp[-1] - self.duration) > 1e-12 * max(1.0, self.duration):
            raise ValueError("breakpoints must start at 0 and end at the duration")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def d(self) -> int:
        return self.omega.size

    def f(self, t):
        return self.profile(np.asarray(t, dtype=float))

    def fdot(self, t):
        return self.profile_dot(np.asarray(t, dtype=float))

    def closure_defect(self) -> float:
        return float(max(abs(self.f(0.0)), abs(self.f(self.duration))))

    def branch(self, i: int):
        """(f, fdot) callables valid on segment ``i`` including its endpoints."""
        if self.branches is not None:
            return self.branches[i]
        return self.profile, self.profile_dot

    def require_closed(self, tol: float = 1e-12) -> None:
        defect = self.closure_defect()
        if defect > tol:
            raise ValueError(f"loop is not closed: |f| at endpoints up to {defect:.3e}")

    def segment_grid(self, steps: int, *, min_per_segment: int = 8):
        """Split ``steps`` integrator steps across segments, proportionally.

        Returns a list of ``(t_start, n_seg, h)`` triples whose half-step
        sample grids tile [0, T] without crossing a breakpoint.
        """
        if steps < 16:
            raise ValueError("need at least 16 steps")
        durs = np.diff(self.breakpoints)
        total = self.duration
        alloc = [max(min_per_segment, int(round(steps * dur / total))) for dur in durs]
        return [
            (self.breakpoints[i], alloc[i], durs[i] / alloc[i])
            for i in range(len(durs))
        ]


def _pacman_schedule(schedule: str):
    """Radial time-warp s(x) on [0, 1] plus derivative; 'linear' or 'power(k)'."""
    if schedule == "linear":
        return (lambda x: x), (lambda x: np.ones_like(x)), 1.0
    if schedule.startswith("power(") and schedule.endswith(")"):
        k = float(schedule[len("power(") : -1])
        if k < 1.0:
            raise ValueError("power schedule exponent must be >= 1")
        return (lambda x: x**k), (lambda x: k * x ** (k - 1.0)), k
    raise ValueError(f"unknown schedule {schedule!r}; use 'linear' or 'power(k)'")


def pacman_loop(R: float, beta: float, t1: float, t2: float, omega, schedule: str = "linear") -> Loop:
    """Three-segment loop: radially out, arc of angle ``beta`` at radius ``R``,
    radially back in along ``exp(i beta)``.

    ``beta`` may exceed 2 pi, in which case the arc wraps; the wrap count is
    recorded in ``meta``.  The ``power(k)`` schedule warps time on the two
    radial segments only, leaving the traced shape unchanged.
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    if beta <= 0:
        raise ValueError("arc angle must be positive")
    if t1 <= 0 or t2 <= 0:
        raise ValueError("segment times must be positive")
    s, sdot, _k = _pacman_schedule(schedule)
    T = 2.0 * t1 + t2
    phase_in = np.exp(1j * beta)

    def f_out(t):
        return R * s(np.clip(np.asarray(t, dtype=float) / t1, 0.0, 1.0)) + 0.0j

    def fd_out(t):
        return (R / t1) * sdot(np.clip(np.asarray(t, dtype=float) / t1, 0.0, 1.0)) + 0.0j

    def f_arc(t):
        return R * np.exp(1j * beta * np.clip((np.asarray(t, dtype=float) - t1) / t2, 0.0, 1.0))

    def fd_arc(t):
        return 1j * (beta / t2) * f_arc(t)

    def f_in(t):
        return R * s(np.clip((T - np.asarray(t, dtype=float)) / t1, 0.0, 1.0)) * phase_in

    def fd_in(t):
        return -(R / t1) * sdot(np.clip((T - np.asarray(t, dtype=float)) / t1, 0.0, 1.0)) * phase_in

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where(t < t1, f_out(t), np.where(t < t1 + t2, f_arc(t), f_in(t)))

    def fdot(t):
        t = np.asarray(t, dtype=float)
        return np.where(t < t1, fd_out(t), np.where(t < t1 + t2, fd_arc(t), fd_in(t)))

    meta = {
        "R": float(R),
        "beta": float(beta),
        "t1": float(t1),
        "t2": float(t2),
        "schedule": schedule,
        "wraps": _whole_turns(beta),
    }
    return Loop(
        omega=np.asarray(omega, dtype=complex),
        duration=T,
        profile=f,
        profile_dot=fdot,
        breakpoints=(0.0, t1, t1 + t2, T),
        kind="pacman",
        meta=meta,
        branches=((f_out, fd_out), (f_arc, fd_arc), (f_in, fd_in)),
    )


def sampled_loop(times, values, omega) -> Loop:
    """Loop from sampled complex profile values, interpolated with a cubic
    spline (clamped to zero velocity is not assumed; endpoints must be ~0)."""
    from scipy.interpolate import CubicSpline

    times = np.asarray(times, dtype=float)
    vals = np.asarray(values, dtype=complex)
    if times.ndim != 1 or times.size != vals.size or times.size < 4:
        raise ValueError("need matching 1-D arrays with at least 4 samples")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    spline = CubicSpline(times, vals)
    dspline = spline.derivative()
    T = float(times[-1] - times[0])
    t0 = float(times[0])
    return Loop(
        omega=np.asarray(omega, dtype=complex),
        duration=T,
        profile=lambda t: spline(np.asarray(t) + t0),
        profile_dot=lambda t: dspline(np.asarray(t) + t0),
        breakpoints=(0.0, T),
        kind="samples",
        meta={"n_samples": int(times.size)},
    )


def reverse_loop(loop: Loop) -> Loop:
    """Time-reversed traversal; both phases flip sign, the gate conjugates."""
    T = loop.duration

    def flip(pair):
        f, fd = pair
        return (lambda t: f(T - np.asarray(t)), lambda t: -fd(T - np.asarray(t)))

    branches = None
    if loop.branches is not None:
        branches = tuple(flip(b) for b in reversed(loop.branches))
    return Loop(
        omega=loop.omega,
        duration=T,
        profile=lambda t: loop.profile(T - np.asarray(t)),
        profile_dot=lambda t: -loop.profile_dot(T - np.asarray(t)),
        breakpoints=tuple(T - b for b in reversed(loop.breakpoints)),
        kind=loop.kind,
        meta={**loop.meta, "reversed": True},
        branches=branches,
    )


def power_reparametrized(loop: Loop, k: float = 2.0) -> Loop:
    """Traverse the same shape with warped time ``t -> T (t/T)^k``.

    The traced curve (hence both phases and the transport holonomy) is
    unchanged; only the speed profile differs.
    """
    if k < 1.0:
        raise ValueError("warp exponent must be >= 1")
    T = loop.duration

    def warp(t):
        return T * (np.asarray(t, dtype=float) / T) ** k

    def warp_dot(t):
        return k * (np.asarray(t, dtype=float) / T) ** (k - 1.0)

    # Breakpoint preimages keep panels off the (warped) kinks.
    new_bp = tuple(T * (b / T) ** (1.0 / k) for b in loop.breakpoints)

    def compose(pair):
        f, fd = pair
        return (lambda t: f(warp(t)), lambda t: fd(warp(t)) * warp_dot(t))

    branches = None
    if loop.branches is not None:
        branches = tuple(compose(b) for b in loop.branches)
    return Loop(
        omega=loop.omega,
        duration=T,
        profile=lambda t: loop.profile(warp(t)),
        profile_dot=lambda t: loop.profile_dot(warp(t)) * warp_dot(t),
        breakpoints=new_bp,
        kind=loop.kind,
        meta={**loop.meta, "time_warp": k},
        branches=branches,
    )


# ---------------------------------------------------------------------------
# Tangent densities and radial curvature densities
# ---------------------------------------------------------------------------


def b1_profile(f, fd):
    """Tangent density whose closed-loop integral is ``-i alpha1``."""
    f = np.asarray(f)
    fd = np.asarray(fd)
    return f * np.conj(fd) / (1.0 + np.abs(f) ** 2)


def b2_profile(f, fd):
    """Tangent density whose closed-loop integral is ``-i alpha2``."""
    f = np.asarray(f)
    fd = np.asarray(fd)
    m2 = np.abs(f) ** 2
    num = 3.0 * fd * np.conj(f) * m2**2 + f * np.conj(fd) * m2 * (4.0 + m2)
    return num / ((1.0 + m2) * (1.0 + 2.0 * m2**2))


def curvature_density(which: int, r):
    """Radial area densities of the two phases; ``which`` is 1 or 2."""
    r = np.asarray(r, dtype=float)
    u = r * r
    if which == 1:
        return 2.0 / (1.0 + u) ** 2
    if which == 2:
        return 4.0 * u * (4.0 - u - 2.0 * u**2 - 6.0 * u**3) / ((1.0 + u) ** 2 * (1.0 + 2.0 * u**2) ** 2)
    raise ValueError("which must be 1 or 2")


def _gl_panels(a: float, b: float, n_panels: int):
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _loop_quadrature(loop: Loop, integrand, panels_per_segment: int):
    total = 0.0 + 0.0j
    for a, b in zip(loop.breakpoints[:-1], loop.breakpoints[1:]):
        nodes, weights = _gl_panels(a, b, panels_per_segment)
        total += np.sum(weights * integrand(nodes))
    return total


def radial_phase_integral(which: int, r_max: float, *, panels: int = 64) -> float:
    """Cumulative radial integral ``int_0^R r C(r) dr`` by composite GL."""
    if r_max < 0:
        raise ValueError("radius must be >= 0")
    if r_max == 0.0:
        return 0.0
    nodes, weights = _gl_panels(0.0, r_max, panels)
    return float(np.sum(weights * nodes * curvature_density(which, nodes)))


def _radial_cumulative(which: int, rhos: np.ndarray) -> np.ndarray:
    """Values of the cumulative radial integral at many radii, machine exact.

    Integrates between consecutive sorted radii with one GL panel each, then
    cumulative-sums; panel widths are the gaps between requested radii, so
    accuracy does not depend on a global grid.
    """
    flat = np.asarray(rhos, dtype=float).ravel()
    uniq, inverse = np.unique(np.concatenate([[0.0], flat]), return_inverse=True)
    vals = np.zeros_like(uniq)
    for i in range(1, uniq.size):
        a, b = uniq[i - 1], uniq[i]
        # subdivide long gaps to keep panel error negligible
        n = max(1, int(math.ceil((b - a) / 0.05)))
        nodes, weights = _gl_panels(a, b, n)
        vals[i] = vals[i - 1] + np.sum(weights * nodes * curvature_density(which, nodes))
    return vals[inverse[1:]].reshape(np.shape(rhos))


def _polyline_self_intersects(pts: np.ndarray) -> bool:
    """Proper-crossing test between non-adjacent segments of a closed polyline."""
    p = pts
    q = np.roll(pts, -1, axis=0)
    n = len(pts)
    d = q - p
    for i in range(n - 2):
        js = np.arange(i + 2, n if i > 0 else n - 1)
        r = d[i]
        s = d[js]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        diff = p[js] - p[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (diff[:, 0] * s[:, 1] - diff[:, 1] * s[:, 0]) / denom
            u = (diff[:, 0] * r[1] - diff[:, 1] * r[0]) / denom
        ok = np.isfinite(t) & np.isfinite(u)
        if np.any(ok & (t > 1e-9) & (t < 1 - 1e-9) & (u > 1e-9) & (u < 1 - 1e-9)):
            return True
    return False


@dataclass(frozen=True)
class PhasePair:
    """The two loop phases, with the route used to obtain them."""

    alpha1: float
    alpha2: float
    method: str
    quad_error: float


def phase_integrals(loop: Loop, method: str = "line", *, panels_per_segment: int = 48) -> PhasePair:
    """Compute ``(alpha1, alpha2)`` for a closed loop.

    ``method='line'`` integrates the tangent densities along the profile;
    ``method='surface'`` integrates the radial area densities over the
    enclosed region (via the winding form ``V(|f|) dtheta``, which reduces
    to a single radial integral for pacman loops).  The two must agree for
    any closed loop; self-intersecting sampled profiles are rejected for the
    surface route only.
    """
    loop.require_closed()
    if method == "line":
        alpha = []
        for dens in (b1_profile, b2_profile):
            val = _loop_quadrature(
                loop, lambda t: dens(loop.f(t), loop.fdot(t)), panels_per_segment
            )
            ref = _loop_quadrature(
                loop, lambda t: dens(loop.f(t), loop.fdot(t)), 2 * panels_per_segment
            )
            alpha.append((1j * ref, abs(ref - val)))
        (a1, e1), (a2, e2) = alpha
        _check_real(a1, "alpha1")
        _check_real(a2, "alpha2")
        return PhasePair(float(a1.real), float(a2.real), "line", float(max(e1, e2)))

    if method == "surface":
        if loop.kind == "pacman":
            beta = loop.meta["beta"]
            R = loop.meta["R"]
            a1 = beta * radial_phase_integral(1, R)
            a2 = beta * radial_phase_integral(2, R)
            a1_ref = beta * radial_phase_integral(1, R, panels=128)
            a2_ref = beta * radial_phase_integral(2, R, panels=128)
            return PhasePair(a1_ref, a2_ref, "surface", float(max(abs(a1 - a1_ref), abs(a2 - a2_ref))))
        if loop.kind == "samples":
            ts = np.linspace(0.0, loop.duration, 512)
            fs = loop.f(ts)
            if _polyline_self_intersects(np.column_stack([fs.real, fs.imag])):
                raise ValueError("surface method rejects self-intersecting profiles; use the line method")

        def winding_integrand(which):
            def g(t):
                fv = loop.f(t)
                fd = loop.fdot(t)
                rho = np.abs(fv)
                v = _radial_cumulative(which, rho)
                theta_dot = np.zeros_like(rho)
                mask = rho > 1e-13
                theta_dot[mask] = np.imag(fd[mask] / fv[mask])
                return v * theta_dot
            return g

        a1 = _loop_quadrature(loop, winding_integrand(1), panels_per_segment)
        a2 = _loop_quadrature(loop, winding_integrand(2), panels_per_segment)
        a1_ref = _loop_quadrature(loop, winding_integrand(1), 2 * panels_per_segment)
        a2_ref = _loop_quadrature(loop, winding_integrand(2), 2 * panels_per_segment)
        return PhasePair(
            float(a1_ref.real),
            float(a2_ref.real),
            "surface",
            float(max(abs(a1 - a1_ref), abs(a2 - a2_ref))),
        )

    raise ValueError(f"method must be 'line' or 'surface', got {method!r}")


def _check_real(z: complex, name: str, tol: float = 1e-8) -> None:
    if abs(z.imag) > tol * max(1.0, abs(z)):
        raise RuntimeError(f"{name} came out non-real ({z}); loop may not be closed")


# ---------------------------------------------------------------------------
# Closed-form gates and fidelity
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GateReport:
    """An operator on the computational subspace plus diagnostics."""

    U: np.ndarray
    unitarity_defect: float
    method: str
    alpha1: float | None = None
    alpha2: float | None = None
    target: np.ndarray | None = None
    fidelity: float | None = None
    leakage: float | None = None


def _projector(omega: np.ndarray) -> np.ndarray:
    return np.outer(omega, omega.conj())


def single_gate_matrix(omega: np.ndarray, alpha1: float) -> np.ndarray:
    p = _projector(omega)
    return np.eye(omega.size, dtype=complex) + (np.exp(1j * alpha1) - 1.0) * p


def two_gate_matrix(omega: np.ndarray, alpha1: float, alpha2: float) -> np.ndarray:
    d = omega.size
    p = _projector(omega)
    q = np.eye(d, dtype=complex) - p
    # Spectral form: eigenvalue of (1 x P + P x 1) is the number of factors in P.
    q0 = np.kron(q, q)
    q1 = np.kron(p, q) + np.kron(q, p)
    q2 = np.kron(p, p)
    u1 = q0 + np.exp(1j * alpha1) * q1 + np.exp(2j * alpha1) * q2
    u2 = np.eye(d * d, dtype=complex) + (np.exp(1j * alpha2) - 1.0) * q2
    return u1 @ u2


def analytic_gate(cfg: ModelConfig, loop: Loop, arity: str, *, phases: PhasePair | None = None) -> GateReport:
    """Closed-form gate implemented by a product-drive loop."""
    if loop.d != cfg.d:
        raise ValueError(f"loop direction has d={loop.d}, config has d={cfg.d}")
    pp = phases if phases is not None else phase_integrals(loop)
    if arity == "one":
        u = single_gate_matrix(loop.omega, pp.alpha1)
    elif arity == "two":
        u = two_gate_matrix(loop.omega, pp.alpha1, pp.alpha2)
    else:
        raise ValueError(f"arity must be 'one' or 'two', got {arity!r}")
    defect = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))
    return GateReport(U=u, unitarity_defect=defect, method="analytic", alpha1=pp.alpha1, alpha2=pp.alpha2)


def gate_fidelity(u_tilde: np.ndarray, u_target: np.ndarray) -> float:
    """Average-gate figure of merit ``(D + |tr(U~ U^dag)|^2) / (D (D+1))``.

    Applied verbatim to sub-unitary ``u_tilde`` (loss shows up as reduced
    fidelity, no renormalisation).
    """
    u_tilde = np.asarray(u_tilde)
    u_target = np.asarray(u_target)
    if u_tilde.shape != u_target.shape or u_tilde.ndim != 2 or u_tilde.shape[0] != u_tilde.shape[1]:
        raise ValueError(f"operator shapes differ: {u_tilde.shape} vs {u_target.shape}")
    dim = u_tilde.shape[0]
    overlap = np.trace(u_tilde @ u_target.conj().T)
    return float((dim + abs(overlap) ** 2) / (dim * (dim + 1)))


@dataclass(frozen=True)
class BetaSolution:
    """Arc angle realising a requested phase at fixed radius."""

    beta: float
    wraps: int
    achieved_alpha: float
    target_alpha: float
    two_pi_offset: int
    radial_integral: float
    which: str

    @property
    def folded_beta(self) -> float:
        return self.beta - TWO_PI * self.wraps

    @property
    def is_noop(self) -> bool:
        return self.beta == 0.0


def solve_beta_for_phase(R: float, target_alpha: float, which: str = "alpha2",
                         *, integral_floor: float = 1e-9) -> BetaSolution:
    """Pick the arc angle ``beta > 0`` whose loop phase matches the target.

    The phase is linear in ``beta`` with slope ``I(R)``, the radial integral
    of the matching density.  Because phases only matter modulo 2 pi, the
    target is realised as ``target + 2 pi k`` with the integer ``k`` chosen
    to make ``beta`` positive and smallest; ``two_pi_offset`` reports ``k``.
    Angles beyond a full turn are returned unfolded with ``wraps`` counting
    whole turns (physically: repeated arcs).
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    if which not in ("alpha1", "alpha2"):
        raise ValueError("which must be 'alpha1' or 'alpha2'")
    integral = radial_phase_integral(1 if which == "alpha1" else 2, R, panels=128)
    if abs(integral) < integral_floor:
        raise ValueError(
            f"{which} is unreachable at R={R}: radial integral {integral:.3e} below threshold"
        )
    if target_alpha == 0.0:
        return BetaSolution(0.0, 0, 0.0, 0.0, 0, integral, which)
    candidates = [
        ((target_alpha + TWO_PI * k) / integral, k) for k in range(-4, 5)
    ]
    positives = [(b, k) for b, k in candidates if b > 0]
    beta, k = min(positives, key=lambda bk: bk[0])
    return BetaSolution(
        beta=beta,
        wraps=_whole_turns(beta),
        achieved_alpha=beta * integral,
        target_alpha=target_alpha,
        two_pi_offset=k,
        radial_integral=integral,
        which=which,
    )
