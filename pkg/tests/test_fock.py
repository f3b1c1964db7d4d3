import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_hermite, factorial

from cvteleport.errors import TruncationWarning, ValidationError
from cvteleport.fock import (DensityMatrix, FockState, TruncationConfig, TwoModeState,
                             annihilation, basis_state, coherent_state, creation,
                             displace_state, displacement, displacement_residual, fidelity,
                             hermite_gram, partial_trace, quadrature_exponential,
                             quadrature_ops, quadrature_wavefunction,
                             quadrature_wavefunctions, random_state, von_neumann_entropy)


def test_truncation_config_defaults_and_validation():
    t = TruncationConfig(5)
    assert (t.N_work, t.dim, t.work_dim) == (5, 6, 6)
    for bad in (dict(N=-1), dict(N=4, N_work=3), dict(N=2.5), dict(N=3, abs_tol=0)):
        with pytest.raises(ValidationError):
            TruncationConfig(**bad)


def test_state_validation():
    t = TruncationConfig(3)
    with pytest.raises(ValidationError):
        FockState(np.ones(4), t)
    with pytest.raises(ValidationError):
        FockState(np.ones(3) / math.sqrt(3), t)
    s = FockState(np.ones(4), t, normalized=False).normalize()
    assert s.norm2 == pytest.approx(1)
    with pytest.raises(ValidationError):
        FockState(np.zeros(4), t, normalized=False).normalize()
    with pytest.raises(ValueError):
        s.amps[0] = 1     # frozen


def test_ladder_matrix_elements():
    t = TruncationConfig(6)
    a, ad = annihilation(t).mat, creation(t).mat
    n = np.arange(1, 7)
    np.testing.assert_allclose(np.diag(a, 1), np.sqrt(n))
    np.testing.assert_allclose(ad, a.conj().T)
    num = ad @ a
    np.testing.assert_allclose(np.diag(num).real, np.arange(7))


@pytest.mark.parametrize("N", [4, 16, 64])
def test_commutator_exact_below_cutoff(N):
    a = annihilation(TruncationConfig(N)).mat
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(comm[:N, :N], np.eye(N), atol=1e-12)
    assert comm[N, N] == pytest.approx(-N)   # boundary artifact


def test_quadrature_commutator():
    t = TruncationConfig(20)
    x, p = quadrature_ops(t)
    assert x.hermitian and p.hermitian
    comm = x.mat @ p.mat - p.mat @ x.mat
    np.testing.assert_allclose(comm[:20, :20], 0.5j * np.eye(20), atol=1e-12)


@given(st.integers(0, 20), st.floats(-4, 4))
def test_wavefunction_matches_hermite_formula(n, x):
    ref = ((2 / math.pi) ** 0.25 / math.sqrt(2.0 ** n * factorial(n))
           * eval_hermite(n, math.sqrt(2) * x) * math.exp(-x * x))
    assert quadrature_wavefunction(n, x) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_wavefunction_recurrence_stable_at_high_order():
    x = np.linspace(-20, 20, 8001)     # turning point of n=200 is sqrt(200.5)
    psi = quadrature_wavefunctions(200, x)
    assert np.all(np.isfinite(psi))
    norms = (psi ** 2).sum(axis=1) * (x[1] - x[0])
    np.testing.assert_allclose(norms, 1, atol=1e-10)


def test_hermite_gram_identity():
    np.testing.assert_allclose(hermite_gram(40, 60), np.eye(41), atol=1e-10)


def test_quadrature_exponential_unitary():
    U = quadrature_exponential(0.7, "p", 30)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(30), atol=1e-12)


@given(st.complex_numbers(max_magnitude=2.0))
@settings(max_examples=25, deadline=None)
def test_displacement_on_vacuum_is_coherent(z):
    t = TruncationConfig(30, 200)
    D = displacement(z, t)
    ref = coherent_state(z, TruncationConfig(30)).amps
    out = D.mat[:31, 0]
    # coherent_state renormalizes; compare up to its (tiny) tail weight
    np.testing.assert_allclose(out / np.linalg.norm(out), ref, atol=1e-9)


def test_displacement_composition_phase():
    t = TruncationConfig(10, 120)
    a, b = 0.4 + 0.3j, -0.2 + 0.5j
    lhs = displacement(a, t).mat @ displacement(b, t).mat
    rhs = np.exp(1j * (a * np.conj(b)).imag) * displacement(a + b, t).mat
    np.testing.assert_allclose(lhs[:40, :40], rhs[:40, :40], atol=1e-10)


def test_displacement_warns_when_working_space_too_small():
    with pytest.warns(TruncationWarning):
        displacement(4.0, TruncationConfig(4, 8))
    assert displacement_residual(0.5, TruncationConfig(8, 64)) < 1e-12
    small, big = TruncationConfig(8, 12), TruncationConfig(8, 96)
    with pytest.warns(TruncationWarning):
        assert displacement_residual(2.0, big) < 1e-10 < displacement_residual(2.0, small)


@given(st.complex_numbers(max_magnitude=2.5))
@settings(max_examples=25, deadline=None)
def test_displace_state_matches_dense(z):
    t = TruncationConfig(12, 160)
    s = random_state(np.random.default_rng(3), t)
    dense = displacement(z, t).mat[:13, :13] @ s.amps
    np.testing.assert_allclose(displace_state(z, s).amps, dense, atol=1e-11)


def test_displace_state_is_reproducible():
    t = TruncationConfig(16, 128)
    s = coherent_state(0.3, t)
    outs = set()
    for k in range(5):
        np.random.seed(k)    # global RNG state must not matter
        outs.add(displace_state(1.1 - 0.7j, s).amps.tobytes())
    assert len(outs) == 1


def test_coherent_state_statistics():
    t = TruncationConfig(60)
    alpha = 1.5 * np.exp(0.4j)
    c = coherent_state(alpha, t)
    a = annihilation(t).mat
    assert np.vdot(c.amps, a @ c.amps) == pytest.approx(alpha, abs=1e-10)
    assert coherent_state(0, t).amps[0] == 1


def test_partial_trace_conventions():
    t = TruncationConfig(2)
    rng = np.random.default_rng(0)
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    s = TwoModeState(c / np.linalg.norm(c), t)
    r1, r2 = partial_trace(s, "first").mat, partial_trace(s, "second").mat
    full = np.einsum("ij,kl->ijkl", s.amps, s.amps.conj())
    np.testing.assert_allclose(r1, np.einsum("ijkj->ik", full), atol=1e-14)
    np.testing.assert_allclose(r2, np.einsum("ijil->jl", full), atol=1e-14)
    # Schmidt spectra agree
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(r1)), np.sort(np.linalg.eigvalsh(r2)),
                               atol=1e-14)
    with pytest.raises(ValidationError):
        partial_trace(s, "third")


def test_partial_trace_requires_normalized():
    t = TruncationConfig(1)
    s = TwoModeState(np.eye(2), t, normalized=False)
    with pytest.raises(ValidationError):
        partial_trace(s)
    rho = partial_trace(s, allow_unnormalized=True)    # renormalized on the way
    np.testing.assert_allclose(rho.mat, np.eye(2) / 2)


@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_entropy_bounds(N, seed):
    rng = np.random.default_rng(seed)
    t = TruncationConfig(N)
    c = rng.standard_normal((N + 1, N + 1)) + 1j * rng.standard_normal((N + 1, N + 1))
    E = von_neumann_entropy(partial_trace(TwoModeState(c / np.linalg.norm(c), t)))
    assert -1e-12 <= E <= math.log2(N + 1) + 1e-12


def test_entropy_extremes():
    t = TruncationConfig(3)
    prod = TwoModeState(np.outer(basis_state(1, t).amps, basis_state(2, t).amps), t)
    assert von_neumann_entropy(partial_trace(prod)) == 0.0
    maxent = TwoModeState(np.eye(4) / 2, t)
    assert von_neumann_entropy(partial_trace(maxent)) == pytest.approx(2.0, abs=1e-14)


def test_density_matrix_validation_and_clipping():
    t = TruncationConfig(1)
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[1, 1], [0, 0]]), t)
    with pytest.raises(ValidationError):
        DensityMatrix(np.eye(2), t)
    rho = DensityMatrix(np.diag([1 + 1e-12, -1e-12]), t)
    assert von_neumann_entropy(rho) == pytest.approx(0, abs=1e-10)
    with pytest.raises(ValidationError):
        von_neumann_entropy(DensityMatrix(np.diag([1.1, -0.1]), t))


def test_fidelity():
    t = TruncationConfig(4)
    rng = np.random.default_rng(1)
    s = random_state(rng, t)
    assert fidelity(s, s) == pytest.approx(1, abs=1e-14)
    assert fidelity(basis_state(0, t), basis_state(1, t)) == 0
    phased = FockState(np.exp(0.3j) * s.amps, t)
    assert fidelity(s, phased) == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValidationError):
        fidelity(s, basis_state(0, TruncationConfig(3)))
    with pytest.raises(ValidationError):
        fidelity(s, FockState(2 * s.amps, t, normalized=False))
