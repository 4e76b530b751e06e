"""Driven-atom models: Hamiltonians, zero-energy frames, and gap structure.

Global conventions, relied on by every other module:

* Single-atom levels are ordered ``|0>, ..., |d-1>, |d>, |f>``.  The ambient
  dimension is ``d + 2``; the Rydberg level sits at index ``d`` and the
  auxiliary excited level at index ``d + 1``.
* Two-atom operators act on Kronecker products ordered ``(atom 1) x (atom 2)``,
  so the product basis state ``|a, b>`` has flat index ``a * (d+2) + b``.
* ``|omega_d|`` is the unit of energy and times are in units of
  ``1 / |omega_d|``; the default ``omega_d = 1`` keeps everything literal.

The zero-energy frames built here are intentionally *unnormalised*: their Gram
matrices feed the connection algebra in :mod:`hologate.geometry`, and the
closed-form Gram inverses below are what make parallel transport cheap.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelConfig",
    "ParameterPoint",
    "NullFrame",
    "SpectrumReport",
    "ComplexRootError",
    "single_atom_hamiltonian",
    "two_atom_hamiltonian",
    "single_atom_null_frame",
    "two_atom_null_frame",
    "single_gram",
    "single_gram_inv",
    "spectral_gap",
    "gap_polynomial_coeffs",
    "gap_polynomial_roots",
    "asymptotic_gap",
    "drive_parts",
    "minus_pairs",
    "plus_pairs",
]

#: Relative tolerance for "annihilated by H" checks on frame vectors.
NULL_TOL = 1e-10


class ComplexRootError(RuntimeError):
    """The gap polynomial produced a root with a non-negligible imaginary part.

    All five roots are expected to be real for every ``(W, p)``; a violation
    indicates an inconsistency, so the offending parameters are embedded in
    the message.
    """


@dataclass(frozen=True)
class ModelConfig:
    """Physical scenario: qudit dimension, fixed drive, blockade, decay.

    Parameters
    ----------
    d : int
        Qudit dimension (>= 2).  Each atom has ``d + 2`` levels.
    omega_d : complex
        Fixed coupling of the Rydberg level, nonzero.  Its modulus is the
        energy unit; keep it at 1 unless you have a reason not to.
    W : float
        Blockade strength on ``|d, d>`` (>= 0), in units of ``|omega_d|``.
    gamma : float
        Decay rate of level ``|d>`` (>= 0), in units of ``|omega_d|``.
    """

    d: int = 2
    omega_d: complex = 1.0 + 0.0j
    W: float = 10.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")
        if abs(self.omega_d) == 0.0:
            raise ValueError("omega_d must be nonzero")
        if self.W < 0:
            raise ValueError(f"blockade strength must be >= 0, got {self.W}")
        if self.gamma < 0:
            raise ValueError(f"decay rate must be >= 0, got {self.gamma}")
        object.__setattr__(self, "omega_d", complex(self.omega_d))

    @property
    def dim(self) -> int:
        """Single-atom ambient dimension d + 2."""
        return self.d + 2

    @property
    def ryd_index(self) -> int:
        return self.d

    @property
    def f_index(self) -> int:
        return self.d + 1

    def replace(self, **kw) -> "ModelConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True, eq=False)
class ParameterPoint:
    """A point in the 2d-real drive-parameter space.

    ``lam`` stores ``(Re O_0, ..., Re O_{d-1}, Im O_0, ..., Im O_{d-1})``.
    """

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 1 or lam.size % 2:
            raise ValueError("parameter vector must be 1-D with even length")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_omegas(cls, omegas) -> "ParameterPoint":
        om = np.asarray(omegas, dtype=complex).ravel()
        return cls(np.concatenate([om.real, om.imag]))

    @property
    def d(self) -> int:
        return self.lam.size // 2

    @property
    def omegas(self) -> np.ndarray:
        """Complex drive amplitudes ``O_0 .. O_{d-1}``."""
        d = self.d
        return self.lam[:d] + 1j * self.lam[d:]

    def omega(self, a: int) -> complex:
        return complex(self.omegas[a])

    def shifted(self, mu: int, h: float) -> "ParameterPoint":
        """Point displaced by ``h`` along real coordinate ``mu``."""
        lam = self.lam.copy()
        lam[mu] += h
        return ParameterPoint(lam)


def _check_point(cfg: ModelConfig, p: ParameterPoint) -> None:
    if p.d != cfg.d:
        raise ValueError(f"parameter point has d={p.d}, config has d={cfg.d}")


def omega_norm_sq(cfg: ModelConfig, p: ParameterPoint) -> float:
    """Total drive strength squared, ``sum_{a<=d} |O_a|^2``."""
    return float(np.sum(np.abs(p.omegas) ** 2) + abs(cfg.omega_d) ** 2)


@dataclass(frozen=True, eq=False)
class NullFrame:
    """Analytic basis of the zero-energy subspace at one parameter point.

    ``basis`` holds the (unnormalised) frame vectors as columns of an
    ``(ambient, n)`` array; ``gram[i, j] = <v_i | v_j>`` and ``gram_inv`` is
    its true matrix inverse.  ``labels`` names the columns: level indices
    for the single-atom frame, ``("0",)``, ``("-", a, b)`` and
    ``("+", a, b)`` tuples for the two-atom frame.
    """

    basis: np.ndarray
    gram: np.ndarray
    gram_inv: np.ndarray
    labels: tuple

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the spanned subspace."""
        return self.basis @ self.gram_inv @ self.basis.conj().T


def single_atom_hamiltonian(cfg: ModelConfig, p: ParameterPoint, *, decay: bool = False) -> np.ndarray:
    """Single-atom Hamiltonian at drive point ``p``.

    Couples each of ``|0> .. |d>`` to ``|f>`` with amplitude ``O_a``
    (``O_d`` fixed from the config).  With ``decay=True`` and ``gamma > 0``
    the anti-Hermitian loss term ``-(i gamma / 2) |d><d|`` is appended.
    """
    _check_point(cfg, p)
    n = cfg.dim
    h = np.zeros((n, n), dtype=complex)
    amps = np.concatenate([p.omegas, [cfg.omega_d]])
    h[: cfg.d + 1, cfg.f_index] = amps
    h[cfg.f_index, : cfg.d + 1] = amps.conj()
    if decay and cfg.gamma > 0:
        h[cfg.ryd_index, cfg.ryd_index] += -0.5j * cfg.gamma
    return h


def two_atom_hamiltonian(cfg: ModelConfig, p: ParameterPoint, *, decay: bool = False) -> np.ndarray:
    """Two-atom Hamiltonian: both atoms driven identically plus blockade."""
    h0 = single_atom_hamiltonian(cfg, p, decay=decay)
    eye = np.eye(cfg.dim)
    h = np.kron(eye, h0) + np.kron(h0, eye)
    dd = cfg.ryd_index * cfg.dim + cfg.ryd_index
    h[dd, dd] += cfg.W
    return h


def single_gram(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Gram matrix of the single-atom frame: ``|O_d|^2 I + O O^dag``."""
    om = p.omegas
    return abs(cfg.omega_d) ** 2 * np.eye(cfg.d) + np.outer(om, om.conj())


def single_gram_inv(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Closed-form inverse of :func:`single_gram`."""
    om = p.omegas
    om2 = omega_norm_sq(cfg, p)
    return (np.eye(cfg.d) - np.outer(om, om.conj()) / om2) / abs(cfg.omega_d) ** 2


def single_null_vectors(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Columns ``e_a = conj(O_a)|d> - conj(O_d)|a>`` for ``a < d``."""
    _check_point(cfg, p)
    basis = np.zeros((cfg.dim, cfg.d), dtype=complex)
    om = p.omegas
    for a in range(cfg.d):
        basis[cfg.ryd_index, a] = np.conj(om[a])
        basis[a, a] = -np.conj(cfg.omega_d)
    return basis


def single_atom_null_frame(cfg: ModelConfig, p: ParameterPoint) -> NullFrame:
    """Zero-energy frame of the single-atom Hamiltonian (gamma must be 0)."""
    if cfg.gamma != 0:
        raise ValueError("zero-energy frames are defined for gamma = 0")
    return NullFrame(
        basis=single_null_vectors(cfg, p),
        gram=single_gram(cfg, p),
        gram_inv=single_gram_inv(cfg, p),
        labels=tuple(range(cfg.d)),
    )


def plus_minus_vectors(cfg: ModelConfig, p: ParameterPoint) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalised eigenvectors ``|+->`` at energies ``+-Omega``."""
    om_tot = np.sqrt(omega_norm_sq(cfg, p))
    amps = np.concatenate([p.omegas, [cfg.omega_d]])
    plus = np.zeros(cfg.dim, dtype=complex)
    minus = np.zeros(cfg.dim, dtype=complex)
    plus[cfg.f_index] = minus[cfg.f_index] = om_tot
    plus[: cfg.d + 1] = amps
    minus[: cfg.d + 1] = -amps
    return plus, minus


def minus_pairs(d: int) -> list[tuple[int, int]]:
    """Strictly ordered index pairs (a, b), a < b, in lexicographic order."""
    return [(a, b) for a in range(d) for b in range(a + 1, d)]


def plus_pairs(d: int) -> list[tuple[int, int]]:
    """Weakly ordered index pairs (a, b), a <= b, in lexicographic order."""
    return [(a, b) for a in range(d) for b in range(a, d)]


def _pair_weights(pairs) -> np.ndarray:
    # Multiplicity of each restricted pair in an unrestricted symmetric sum.
    return np.array([1.0 if a == b else 2.0 for a, b in pairs])


def plus_gram(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Closed-form Gram matrix of the symmetric two-atom frame block."""
    om = p.omegas
    od2 = abs(cfg.omega_d) ** 2
    om2 = omega_norm_sq(cfg, p)
    alpha = 1.0 + 2.0 * om2**2 / od2**2
    pairs = plus_pairs(cfg.d)
    g = np.zeros((len(pairs), len(pairs)), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        for j, (k, l) in enumerate(pairs):
            val = 0.0 + 0.0j
            for kk, ll in ((k, l), (l, k)):
                term = float(a == kk and b == ll)
                term += (om[a] * np.conj(om[kk]) * (b == ll) + (a == kk) * om[b] * np.conj(om[ll])) / od2
                term += alpha / od2**2 * om[a] * om[b] * np.conj(om[kk]) * np.conj(om[ll])
                val += 2.0 * od2**2 * term
            g[i, j] = val
    return g


def plus_gram_inv(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Closed-form matrix inverse of :func:`plus_gram`.

    The underlying closed form is a symmetric-tensor inverse (contractions
    run over both index orders); converting it to the inverse of the
    restricted a <= b matrix requires multiplicity weights on off-diagonal
    pairs.
    """
    om = p.omegas
    od2 = abs(cfg.omega_d) ** 2
    om2 = omega_norm_sq(cfg, p)
    denom = 3.0 * od2**2 - 4.0 * om2 * od2 + 2.0 * om2**2
    beta = (od2**2 - 4.0 * om2 * od2 + 2.0 * om2**2) / denom
    pairs = plus_pairs(cfg.d)
    ginv = np.zeros((len(pairs), len(pairs)), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        for j, (k, l) in enumerate(pairs):
            val = 0.0 + 0.0j
            for kk, ll in ((k, l), (l, k)):
                term = float(a == kk and b == ll)
                term -= (om[a] * np.conj(om[kk]) * (b == ll) + om[b] * np.conj(om[kk]) * (a == ll)) / om2
                term += beta / om2**2 * om[a] * om[b] * np.conj(om[kk]) * np.conj(om[ll])
                val += term / (8.0 * od2**2)
            ginv[i, j] = val
    w = _pair_weights(pairs)
    return ginv * np.outer(w, w)


def minus_gram(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    g1 = single_gram(cfg, p)
    pairs = minus_pairs(cfg.d)
    g = np.empty((len(pairs), len(pairs)), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        for j, (k, l) in enumerate(pairs):
            g[i, j] = 2.0 * (g1[a, k] * g1[b, l] - g1[b, k] * g1[a, l])
    return g


def minus_gram_inv(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    gi = single_gram_inv(cfg, p)
    pairs = minus_pairs(cfg.d)
    ginv = np.empty((len(pairs), len(pairs)), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        for j, (k, l) in enumerate(pairs):
            ginv[i, j] = 0.5 * (gi[a, k] * gi[b, l] - gi[b, k] * gi[a, l])
    return ginv


def two_atom_null_vectors(cfg: ModelConfig, p: ParameterPoint) -> tuple[np.ndarray, tuple]:
    """Columns of the (d^2 + 1)-dimensional two-atom zero-energy frame.

    Order: the decoupled singlet-like vector first, then the antisymmetric
    pairs a < b, then the symmetric pairs a <= b.
    """
    _check_point(cfg, p)
    d, n = cfg.d, cfg.dim
    e = single_null_vectors(cfg, p)
    plus, minus = plus_minus_vectors(cfg, p)
    pm_sym = np.kron(plus, minus) + np.kron(minus, plus)
    cols = [np.kron(plus, minus) - np.kron(minus, plus)]
    labels: list = [("0",)]
    for a, b in minus_pairs(d):
        cols.append(np.kron(e[:, a], e[:, b]) - np.kron(e[:, b], e[:, a]))
        labels.append(("-", a, b))
    odsq = cfg.omega_d**2  # complex square, not modulus
    om = p.omegas
    for a, b in plus_pairs(d):
        vec = np.kron(e[:, a], e[:, b]) + np.kron(e[:, b], e[:, a])
        vec = vec + (np.conj(om[a]) * np.conj(om[b]) / odsq) * pm_sym
        cols.append(vec)
        labels.append(("+", a, b))
    assert all(col.shape == (n * n,) for col in cols)
    return np.column_stack(cols), tuple(labels)


def two_atom_null_frame(cfg: ModelConfig, p: ParameterPoint) -> NullFrame:
    """Zero-energy frame of the blockaded two-atom Hamiltonian.

    Requires ``W > 0``: at ``W = 0`` the zero-energy subspace enlarges and
    the symmetric-block construction below no longer spans it.
    """
    if cfg.gamma != 0:
        raise ValueError("zero-energy frames are defined for gamma = 0")
    if cfg.W <= 0:
        raise ValueError("two-atom frame requires W > 0 (degenerate structure at W = 0)")
    basis, labels = two_atom_null_vectors(cfg, p)
    om2 = omega_norm_sq(cfg, p)
    g0 = np.array([[8.0 * om2**2]], dtype=complex)
    gm = minus_gram(cfg, p)
    gp = plus_gram(cfg, p)
    gram = _block_diag(g0, gm, gp)
    gram_inv = _block_diag(np.array([[1.0 / (8.0 * om2**2)]], dtype=complex),
                           minus_gram_inv(cfg, p), plus_gram_inv(cfg, p))
    return NullFrame(basis=basis, gram=gram, gram_inv=gram_inv, labels=labels)


def _block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k : k + m, k : k + m] = b
        k += m
    return out


# ---------------------------------------------------------------------------
# Spectral structure of the two-atom Hamiltonian
# ---------------------------------------------------------------------------


def gap_polynomial_coeffs(cfg: ModelConfig, p: ParameterPoint) -> np.ndarray:
    """Coefficients (highest power first) of the quintic whose real roots are
    the two-atom eigenvalues not pinned at 0 or +-Omega."""
    om2 = omega_norm_sq(cfg, p)
    od2 = abs(cfg.omega_d) ** 2
    W = cfg.W
    d2 = om2 - od2
    return np.array(
        [
            1.0,
            -W,
            -5.0 * om2,
            W * (5.0 * om2 - 2.0 * od2),
            4.0 * om2**2,
            -W * (2.0 * od2**2 + 4.0 * d2**2),
        ]
    )


def gap_polynomial_roots(cfg: ModelConfig, p: ParameterPoint, *, imag_tol: float = 1e-8) -> np.ndarray:
    """The five real roots of the gap quintic, via companion-matrix eigenvalues.

    Raises :class:`ComplexRootError` if any root has an imaginary part above
    ``imag_tol`` (relative to the spectral scale).
    """
    coeffs = gap_polynomial_coeffs(cfg, p)
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    worst = float(np.max(np.abs(roots.imag)))
    if worst > imag_tol * scale:
        raise ComplexRootError(
            f"gap quintic produced complex roots (max |Im| = {worst:.3e}) "
            f"at W={cfg.W}, omegas={p.omegas.tolist()}"
        )
    return np.sort(roots.real)


def asymptotic_gap(cfg: ModelConfig, p: ParameterPoint) -> float:
    """Large-blockade closed form for the spectral gap."""
    od2 = abs(cfg.omega_d) ** 2
    d2 = omega_norm_sq(cfg, p) - od2
    inner = np.sqrt(od2**2 + 30.0 * d2 * od2 + 9.0 * d2**2)
    return float(np.sqrt((3.0 * od2 + 5.0 * d2 - inner) / 2.0))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Nonzero spectrum of the two-atom Hamiltonian at one drive point."""

    nonzero_eigs: np.ndarray
    gap: float
    quintic_roots: np.ndarray
    asymptotic_gap: float
    D2: float
    root_match_error: float


def spectral_gap(cfg: ModelConfig, p: ParameterPoint, *, match_tol: float = 1e-6) -> SpectrumReport:
    """Eigensolve the two-atom Hamiltonian and reconcile with the quintic.

    The full spectrum decomposes into d^2 + 1 zeros, (2d - 1) eigenvalues at
    each of +-Omega, and the five quintic roots.  Nearest-value pairing of the
    sorted lists must agree to ``match_tol`` or a ``RuntimeError`` is raised.
    """
    if cfg.gamma != 0:
        raise ValueError("spectral analysis assumes gamma = 0")
    h = two_atom_hamiltonian(cfg, p)
    eigs = np.linalg.eigvalsh(h)
    om2 = omega_norm_sq(cfg, p)
    om_tot = np.sqrt(om2)
    null_dim = cfg.d**2 + 1
    order = np.argsort(np.abs(eigs), kind="stable")
    nonzero = np.sort(eigs[order[null_dim:]])
    roots = gap_polynomial_roots(cfg, p)
    predicted = np.sort(
        np.concatenate([roots, np.full(2 * cfg.d - 1, om_tot), np.full(2 * cfg.d - 1, -om_tot)])
    )
    # Sorted alignment is the optimal 1-D nearest-value pairing.
    mismatch = float(np.max(np.abs(predicted - nonzero)))
    if mismatch > match_tol * max(1.0, om_tot):
        raise RuntimeError(
            f"eigenvalue/root matching failed: worst mismatch {mismatch:.3e} "
            f"at W={cfg.W}, omegas={p.omegas.tolist()}"
        )
    gap = float(np.min(np.abs(nonzero)))
    return SpectrumReport(
        nonzero_eigs=nonzero,
        gap=gap,
        quintic_roots=roots,
        asymptotic_gap=asymptotic_gap(cfg, p),
        D2=om2 - abs(cfg.omega_d) ** 2,
        root_match_error=mismatch,
    )


# ---------------------------------------------------------------------------
# Drive decomposition used by the time evolvers
# ---------------------------------------------------------------------------


def drive_parts(cfg: ModelConfig, omega_dir: np.ndarray, arity: str, *, decay: bool = False):
    """Split H(t) = H_static + f(t) C + conj(f)(t) C^dag for a product drive.

    ``omega_dir`` is the constant unit vector multiplying the common profile
    ``f(t)``; the returned triple ``(h_static, c, c_dag)`` reconstructs the
    Hamiltonian at any profile value.
    """
    omega_dir = np.asarray(omega_dir, dtype=complex)
    if omega_dir.shape != (cfg.d,):
        raise ValueError(f"direction vector must have length d={cfg.d}")
    base = ParameterPoint.from_omegas(np.zeros(cfg.d))
    n = cfg.dim
    c1 = np.zeros((n, n), dtype=complex)
    c1[: cfg.d, cfg.f_index] = abs(cfg.omega_d) * omega_dir
    if arity == "one":
        h_static = single_atom_hamiltonian(cfg, base, decay=decay)
        c = c1
    elif arity == "two":
        h_static = two_atom_hamiltonian(cfg, base, decay=decay)
        eye = np.eye(n)
        c = np.kron(eye, c1) + np.kron(c1, eye)
    else:
        raise ValueError(f"arity must be 'one' or 'two', got {arity!r}")
    return h_static, c, c.conj().T


def computational_indices(cfg: ModelConfig, arity: str) -> np.ndarray:
    """Flat ambient indices of the computational basis states."""
    if arity == "one":
        return np.arange(cfg.d)
    if arity == "two":
        return np.array([a * cfg.dim + b for a in range(cfg.d) for b in range(cfg.d)])
    raise ValueError(f"arity must be 'one' or 'two', got {arity!r}")
