"""Hamiltonians, zero-energy frames, Gram identities, and gap structure."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hologate import model as m
from conftest import random_point

NULL_TOL = 1e-10


def swap_operator(n):
    s = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            s[b * n + a, a * n + b] = 1.0
    return s


class TestHamiltonians:
    def test_base_point_single(self):
        cfg = m.ModelConfig(d=2, W=0.0)
        h = m.single_atom_hamiltonian(cfg, m.ParameterPoint.from_omegas([0, 0]))
        expected = np.zeros((4, 4), complex)
        expected[2, 3] = expected[3, 2] = 1.0
        assert np.array_equal(h, expected)

    def test_nonzero_eigenvalues_are_total_drive(self):
        # d=2, O=(3, 0), O_d=4: eigensolve must give +-5.
        cfg = m.ModelConfig(d=2, omega_d=4.0)
        h = m.single_atom_hamiltonian(cfg, m.ParameterPoint.from_omegas([3.0, 0.0]))
        eigs = np.sort(np.linalg.eigvalsh(h))
        assert np.allclose(eigs, [-5.0, 0.0, 0.0, 5.0], atol=1e-12)

    def test_hermitian_without_decay(self, rng):
        cfg = m.ModelConfig(d=3, gamma=0.5)
        for _ in range(20):
            p = random_point(rng, 3)
            h = m.single_atom_hamiltonian(cfg, p)
            assert np.array_equal(h, h.conj().T)
            h2 = m.two_atom_hamiltonian(cfg, p)
            assert np.array_equal(h2, h2.conj().T)

    def test_decay_variant(self):
        cfg = m.ModelConfig(d=2, gamma=1e-3, W=10.0)
        p = m.ParameterPoint.from_omegas([1.0, 2.0])
        h = m.single_atom_hamiltonian(cfg, p, decay=True)
        assert h[2, 2] == -0.5e-3j
        h2 = m.two_atom_hamiltonian(cfg, p, decay=True)
        # trace = blockade entry plus one decay term per atom (times dim)
        assert np.isclose(np.trace(h2), cfg.W + 2 * cfg.dim * h[2, 2], atol=1e-15)

    def test_two_atom_structure(self, rng):
        cfg = m.ModelConfig(d=2, W=7.5)
        p = random_point(rng, 2)
        h = m.two_atom_hamiltonian(cfg, p)
        assert h.shape == (16, 16)
        dd = 2 * 4 + 2
        assert h[dd, dd] == 7.5
        s = swap_operator(4)
        assert np.allclose(s @ h @ s, h, atol=0)

    def test_dimension_mismatch_rejected(self):
        cfg = m.ModelConfig(d=2)
        with pytest.raises(ValueError):
            m.single_atom_hamiltonian(cfg, m.ParameterPoint.from_omegas([1.0, 2.0, 3.0]))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            m.ModelConfig(d=1)
        with pytest.raises(ValueError):
            m.ModelConfig(omega_d=0.0)
        with pytest.raises(ValueError):
            m.ModelConfig(W=-1.0)
        with pytest.raises(ValueError):
            m.ModelConfig(gamma=-0.1)


class TestSingleFrame:
    def test_base_point_frame(self):
        cfg = m.ModelConfig(d=3, omega_d=1 + 1j)
        frame = m.single_atom_null_frame(cfg, m.ParameterPoint.from_omegas([0, 0, 0]))
        for a in range(3):
            expected = np.zeros(5, complex)
            expected[a] = -np.conj(cfg.omega_d)
            assert np.allclose(frame.basis[:, a], expected)
        assert np.allclose(frame.gram, abs(cfg.omega_d) ** 2 * np.eye(3))

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_annihilation_100_points(self, rng, d):
        cfg = m.ModelConfig(d=d)
        for _ in range(100):
            p = random_point(rng, d)
            h = m.single_atom_hamiltonian(cfg, p)
            frame = m.single_atom_null_frame(cfg, p)
            assert np.max(np.abs(h @ frame.basis)) <= NULL_TOL

    def test_gram_closed_form_vs_brute_force(self, rng):
        cfg = m.ModelConfig(d=3)
        for _ in range(25):
            p = random_point(rng, 3)
            frame = m.single_atom_null_frame(cfg, p)
            brute = frame.basis.conj().T @ frame.basis
            assert np.max(np.abs(brute - frame.gram)) <= 1e-12 * np.max(np.abs(brute))
            assert np.max(np.abs(frame.gram @ frame.gram_inv - np.eye(3))) <= 1e-10


class TestTwoAtomFrame:
    def test_base_point_vectors(self):
        cfg = m.ModelConfig(d=2, omega_d=np.exp(0.3j))
        frame = m.two_atom_null_frame(cfg, m.ParameterPoint.from_omegas([0, 0]))
        odsq = np.conj(cfg.omega_d) ** 2
        n = cfg.dim
        for label, col in zip(frame.labels, frame.basis.T):
            if label[0] == "-":
                a, b = label[1:]
                expected = np.zeros(n * n, complex)
                expected[a * n + b] = odsq
                expected[b * n + a] = -odsq
                assert np.allclose(col, expected, atol=1e-14)
            elif label[0] == "+":
                a, b = label[1:]
                expected = np.zeros(n * n, complex)
                expected[a * n + b] += odsq
                expected[b * n + a] += odsq
                assert np.allclose(col, expected, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3])
    def test_annihilation(self, rng, d):
        cfg = m.ModelConfig(d=d, W=4.0)
        for _ in range(40):
            p = random_point(rng, d)
            h = m.two_atom_hamiltonian(cfg, p)
            frame = m.two_atom_null_frame(cfg, p)
            assert frame.basis.shape[1] == d * d + 1
            scale = np.linalg.norm(frame.basis, axis=0)
            assert np.max(np.abs(h @ frame.basis) / scale) <= NULL_TOL

    def test_plus_gram_closed_forms(self, rng):
        # Closed-form Gram and inverse against brute force and numpy inversion.
        # The identity check uses drive magnitudes ~1 (Gram entries grow like
        # |Omega|^8, so the absolute tolerance is only meaningful there).
        for d in (2, 3):
            cfg = m.ModelConfig(d=d, W=3.0)
            for _ in range(20):
                p = random_point(rng, d, scale=0.7)
                frame = m.two_atom_null_frame(cfg, p)
                brute = frame.basis.conj().T @ frame.basis
                scale = np.max(np.abs(brute))
                assert np.max(np.abs(brute - frame.gram)) <= 1e-10 * scale
                gp = m.plus_gram(cfg, p)
                gpi = m.plus_gram_inv(cfg, p)
                numeric = np.linalg.inv(gp)
                assert np.max(np.abs(gpi - numeric)) <= 1e-10 * np.max(np.abs(numeric))
                assert np.max(np.abs(frame.gram @ frame.gram_inv - np.eye(d * d + 1))) <= 1e-10

    def test_w_zero_rejected(self):
        cfg = m.ModelConfig(d=2, W=0.0)
        with pytest.raises(ValueError):
            m.two_atom_null_frame(cfg, m.ParameterPoint.from_omegas([1.0, 0.5]))

    def test_decay_rejected(self):
        cfg = m.ModelConfig(d=2, W=1.0, gamma=0.1)
        with pytest.raises(ValueError):
            m.two_atom_null_frame(cfg, m.ParameterPoint.from_omegas([1.0, 0.5]))


class TestSpectrum:
    def test_quintic_roots_match_eigensolve(self, rng):
        for W in (10.0, 20.0):
            cfg = m.ModelConfig(d=2, W=W)
            for _ in range(20):
                p = random_point(rng, 2)
                rep = m.spectral_gap(cfg, p)
                assert rep.root_match_error <= 1e-8
                assert rep.gap > 0

    def test_w_to_zero_limit(self):
        # The quintic at W = 0 factorises with roots {0, +-Om, +-2 Om}.
        cfg = m.ModelConfig(d=2, W=0.0)
        p = m.ParameterPoint.from_omegas([1.2, -0.7 + 0.4j])
        roots = m.gap_polynomial_roots(cfg, p)
        om = np.sqrt(m.omega_norm_sq(cfg, p))
        assert np.allclose(np.sort(roots), np.sort([0.0, om, -om, 2 * om, -2 * om]), atol=1e-8)

    def test_asymptotic_roots_few_percent(self):
        cfg = m.ModelConfig(d=2)
        p = m.ParameterPoint.from_omegas([0.0, 5.0])
        for W in (10.0, 20.0):
            rep = m.spectral_gap(cfg.replace(W=W), p)
            d2 = rep.D2
            inner = np.sqrt(1.0 + 30.0 * d2 + 9.0 * d2**2)
            mags = [np.sqrt((3.0 + 5.0 * d2 - inner) / 2.0), np.sqrt((3.0 + 5.0 * d2 + inner) / 2.0)]
            asym = np.sort(np.concatenate([[-x for x in mags], mags]))
            roots = rep.quintic_roots
            others = np.sort(roots[np.argsort(np.abs(roots - W))[1:]])
            assert np.max(np.abs(others - asym) / np.abs(asym)) < 0.05
            w_root = roots[np.argmin(np.abs(roots - W))]
            assert abs(w_root - W) / W < 0.02

    def test_gap_lower_bound_large_w(self, rng):
        cfg = m.ModelConfig(d=2, W=50.0)
        for _ in range(30):
            mag = rng.uniform(0, 10, size=2)
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi, size=2))
            rep = m.spectral_gap(cfg, m.ParameterPoint.from_omegas(mag * phase))
            assert rep.gap >= 0.5

    def test_gap_saturation(self):
        cfg = m.ModelConfig(d=2)
        p = m.ParameterPoint.from_omegas([0.0, 5.0])  # on the R = 5 circle
        g10 = m.spectral_gap(cfg.replace(W=10.0), p).gap
        g100 = m.spectral_gap(cfg.replace(W=100.0), p).gap
        assert abs(g10 - g100) / g100 < 0.05

    @given(phases=st.lists(st.floats(0.0, 2 * np.pi), min_size=2, max_size=2))
    @settings(max_examples=25, deadline=None)
    def test_spectrum_depends_only_on_magnitudes(self, phases):
        cfg = m.ModelConfig(d=2, W=13.0)
        mags = np.array([1.3, 0.4])
        base = m.spectral_gap(cfg, m.ParameterPoint.from_omegas(mags)).nonzero_eigs
        rotated = mags * np.exp(1j * np.asarray(phases))
        eigs = m.spectral_gap(cfg, m.ParameterPoint.from_omegas(rotated)).nonzero_eigs
        assert np.max(np.abs(base - eigs)) <= 1e-10


class TestDriveParts:
    def test_reconstructs_hamiltonian(self, rng):
        cfg = m.ModelConfig(d=3, W=5.0)
        omega = rng.normal(size=3) + 1j * rng.normal(size=3)
        omega /= np.linalg.norm(omega)
        f = 0.7 - 0.2j
        for arity in ("one", "two"):
            h_static, c, c_dag = m.drive_parts(cfg, omega, arity)
            build = (
                m.single_atom_hamiltonian if arity == "one" else m.two_atom_hamiltonian
            )(cfg, m.ParameterPoint.from_omegas(abs(cfg.omega_d) * f * omega))
            assert np.allclose(h_static + f * c + np.conj(f) * c_dag, build, atol=1e-14)
