import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvteleport.entanglement import squeezed_state
from cvteleport.epr import GammaTable, OutcomeGrid, gamma_closed_form, phi00
from cvteleport.errors import GridCoverageError, TruncationWarning, ValidationError
from cvteleport.fock import (TruncationConfig, basis_state, coherent_state, displace_state,
                             random_state)
from cvteleport.oracles import (OracleGamma, conditional_bruteforce, oracle_average_fidelity,
                                three_mode_tensor)
from cvteleport.teleport import (MeasurementOutcome, average_fidelity,
                                 bob_correction_discrete, bob_correction_displacement,
                                 conditional_state, correction_zeta, covering_grid,
                                 distribution_csv, outcome_distribution, run_ideal_discrete,
                                 run_protocol, run_samples, runs_csv, sample_outcome,
                                 weyl_unitaries)
from cvteleport.verify import outcome_probabilities, random_unitaries, teleport_identity_error

T16 = TruncationConfig(16, 128)
T32 = TruncationConfig(32, 256)


@pytest.mark.parametrize("N", [2, 4, 8])
def test_algebraic_identity_random_unitaries(N):
    rng = np.random.default_rng(N)
    t = TruncationConfig(N)
    for V in random_unitaries(rng, N + 1, 20):
        assert teleport_identity_error(V, random_state(rng, t)) < 1e-12


def test_identity_bob_state_formula():
    t = TruncationConfig(3)
    rng = np.random.default_rng(0)
    V = random_unitaries(rng, 4, 1)[0]
    psi = random_state(rng, t)
    g = GammaTable.from_unitary(V, t)
    beta, dens = conditional_state(psi, phi00(t), g)
    # beta_n = sqrt(N+1) sum_m conj(gamma_mn) alpha_m for the ideal resource
    np.testing.assert_allclose(beta.amps, 2 * g.gamma.conj().T @ psi.amps, atol=1e-14)
    assert dens == pytest.approx(1 / 4)


def test_weyl_basis_is_orthonormal_and_complete():
    d = 4
    W = weyl_unitaries(d)
    gram = np.array([[np.trace(a.conj().T @ b) / d for b in W] for a in W])
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-13)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_no_information(seed):
    rng = np.random.default_rng(seed)
    t = TruncationConfig(3)
    basis = weyl_unitaries(4)
    p1 = outcome_probabilities(random_state(rng, t), basis)
    p2 = outcome_probabilities(random_state(rng, t), basis)
    np.testing.assert_allclose(p1, 1 / 16, atol=1e-12)
    np.testing.assert_allclose(p1, p2, atol=1e-10)


def test_ideal_discrete_runs():
    t = TruncationConfig(5)
    psi = random_state(np.random.default_rng(7), t)
    runs = run_ideal_discrete(psi, 50, seed=1)
    assert max(abs(1 - r.fidelity) for r in runs) < 1e-12
    assert all(r.outcome.probability == pytest.approx(1 / 36) for r in runs)
    again = run_ideal_discrete(psi, 50, seed=1)
    assert runs_csv(runs) == runs_csv(again)


def test_conditional_state_matches_three_mode_tensor():
    t = TruncationConfig(6, 64)
    psi = coherent_state(0.4 - 0.2j, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = squeezed_state(0.5, t)
    g = gamma_closed_form(0.3, -0.2, t)
    beta, dens = conditional_state(psi, res, g)
    b = conditional_bruteforce(g.amplitudes, three_mode_tensor(psi, res))
    np.testing.assert_allclose(beta.amps, math.sqrt(7) * b, atol=1e-14)
    assert dens == pytest.approx(np.vdot(b, b).real)


def test_oracle_gamma_shift_tables():
    grid = OutcomeGrid(0.1, 0.1, 1.0, 1.0)
    og = OracleGamma(grid, 8)
    t = TruncationConfig(8, 64)
    for i in (0, 7, 20):
        G = og.amplitudes(i, grid.P[3])
        np.testing.assert_allclose(G, gamma_closed_form(grid.X[i], grid.P[3], t).amplitudes,
                                   atol=1e-10)


def test_dimension_mismatch():
    psi = basis_state(0, TruncationConfig(3))
    with pytest.raises(ValidationError):
        conditional_state(psi, phi00(TruncationConfig(4)), gamma_closed_form(0, 0, TruncationConfig(3)))


def test_zero_density_warns():
    t = TruncationConfig(1)
    res = phi00(t)
    psi = basis_state(0, t)
    g = GammaTable(0, 0, np.array([[0, 0], [1, 0]]), 1.0, t)
    with pytest.warns(RuntimeWarning):
        conditional_state(psi, res, g)


def test_discrete_correction_warns_when_not_unitary():
    g = gamma_closed_form(0.5, 0.3, T16)
    psi = coherent_state(0.3, T16)
    beta, _ = conditional_state(psi, phi00(T16), g)
    with pytest.warns(TruncationWarning):
        bob_correction_discrete(g, beta)


def test_displacement_correction_zeta():
    o = MeasurementOutcome(0.4, -0.2, 0.1, 0.01)
    assert correction_zeta(o) == complex(-0.4, -0.2)
    assert correction_zeta(o, 0.5) == complex(-0.2, -0.1)
    assert o.p_eigenvalue == -0.1 and o.probability == pytest.approx(1e-3)
    t = TruncationConfig(10, 80)
    s = coherent_state(0.2, t)
    np.testing.assert_allclose(bob_correction_displacement(o, s).amps,
                               displace_state(complex(-0.4, -0.2), s).amps)


def test_coherent_input_through_squeezed_channel_is_coherent_when_corrected():
    # for r -> large the corrected state approaches the input
    t = TruncationConfig(40, 320)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        run = run_protocol(coherent_state(0.3, t), 1.5, t, outcome=(0.2, -0.1))
    assert run.fidelity > 0.9 and run.correction == "displacement"


@pytest.mark.filterwarnings("ignore::cvteleport.errors.TruncationWarning")
@pytest.mark.parametrize("r", [0.3, 0.69, 1.0])
def test_average_fidelity_matches_gaussian_formula(r):
    F = average_fidelity(0.3, r, T32)
    assert F == pytest.approx(1 / (1 + math.exp(-2 * r)), abs=1e-6)


@pytest.mark.filterwarnings("ignore::cvteleport.errors.TruncationWarning")
def test_fidelity_goldens_and_corrections():
    assert average_fidelity(0.3, 0.69, T32) == pytest.approx(0.7989912196, abs=1e-9)
    assert average_fidelity(0.3, 0.69, T32, correction="discrete") == pytest.approx(0.7989912196, abs=1e-8)
    assert average_fidelity(0.3, 1.0, T32, gain=0.0) == pytest.approx(0.4043967175, abs=1e-9)


def test_classical_limit():
    # r = 0: half for every coherent input
    F = average_fidelity([0.3, 0.5j, -0.4 + 0.2j], 0.0, T16)
    assert F == pytest.approx(0.5, abs=1e-6)


def test_main_path_matches_rank3_oracle():
    t = TruncationConfig(16, 128)
    psi = coherent_state(0.3, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = squeezed_state(0.69, t)
    grid = covering_grid(psi, res)
    F = outcome_distribution(psi, res, grid).mean_fidelity()
    Fo, mass = oracle_average_fidelity(0.3, psi, res, grid)
    assert F == pytest.approx(Fo, abs=1e-10)
    assert mass > 0.99


def test_distribution_threads_do_not_change_results():
    psi = coherent_state(0.3, T16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = squeezed_state(0.69, T16)
    grid = covering_grid(psi, res)
    a = outcome_distribution(psi, res, grid, workers=1)
    b = outcome_distribution(psi, res, grid, workers=4)
    assert np.array_equal(a.density, b.density) and np.array_equal(a.fidelity, b.fidelity)
    assert a.mass == pytest.approx(1, abs=1e-4)


def test_distribution_agrees_with_single_outcome_runs():
    psi = coherent_state(0.3, T16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = squeezed_state(0.69, T16)
        grid = OutcomeGrid(0.5, 0.5, 4, 4)
        for corr in ("displacement", "discrete"):
            dist = outcome_distribution(psi, res, grid, corr, check=False)
            for j, i in [(8, 8), (5, 10), (12, 3)]:
                run = run_protocol(psi, 0.69, T16, outcome=(grid.X[i], grid.P[j]), correction=corr)
                assert run.outcome.density == pytest.approx(dist.density[j, i], rel=1e-10)
                assert run.fidelity == pytest.approx(dist.fidelity[j, i], abs=1e-10)


def test_grid_coverage_error():
    psi = coherent_state(0.3, T16)
    with pytest.raises(GridCoverageError):
        outcome_distribution(psi, phi00(T16), OutcomeGrid(0.1, 0.1, 0.5, 0.5))


def test_unknown_correction():
    psi = coherent_state(0.3, T16)
    with pytest.raises(ValidationError):
        outcome_distribution(psi, phi00(T16), OutcomeGrid(), "teleport")


def test_sampling_is_reproducible():
    psi = coherent_state(0.3, T16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = squeezed_state(0.69, T16)
        grid = covering_grid(psi, res)
        a = sample_outcome(psi, res, grid, seed=5, size=10)
        b = sample_outcome(psi, res, grid, seed=5, size=10)
        assert a == b
        r1 = run_samples(psi, 0.69, T16, grid, 20, seed=9)
        r2 = run_samples(psi, 0.69, T16, grid, 20, seed=9)
    assert runs_csv(r1) == runs_csv(r2)
    assert np.mean([r.fidelity for r in r1]) == pytest.approx(0.8, abs=0.1)


def test_run_protocol_with_sampling_and_gamma():
    t = TruncationConfig(4)
    psi = random_state(np.random.default_rng(2), t)
    V = random_unitaries(np.random.default_rng(3), 5, 1)[0]
    run = run_protocol(psi, None, t, gamma=GammaTable.from_unitary(V, t), correction="discrete")
    assert run.fidelity == pytest.approx(1, abs=1e-12) and run.unitarity_residual < 1e-14
    with pytest.raises(ValidationError):
        run_protocol(psi, None, t, gamma=GammaTable.from_unitary(V, t), correction="magic")


def test_covering_grid_scales_with_squeezing():
    psi = coherent_state(0.3, T16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        lo = covering_grid(psi, squeezed_state(0.3, T16))
        hi = covering_grid(psi, squeezed_state(1.5, T16))
    assert hi.LX > lo.LX >= 4


def test_distribution_csv():
    psi = coherent_state(0.1, TruncationConfig(4, 32))
    dist = outcome_distribution(psi, phi00(psi.trunc), OutcomeGrid(0.5, 0.5, 1, 1), check=False)
    lines = distribution_csv(dist).splitlines()
    assert lines[0] == "X0,P0,density,fidelity" and len(lines) == 26
    assert dist.outcome(0, 0).X0 == -1.0
