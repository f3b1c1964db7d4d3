"""
Pass/fail checklist over the library's invariants.

Each check returns a measured value and its tolerance; ``run_checks``
collects them. ``inject`` names checks whose measured value is perturbed
before comparison, so the failure path can be exercised.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import entanglement as ent
from . import epr
from .errors import TruncationWarning
from .fock import (FockState, TruncationConfig, TwoModeState, annihilation,
                   coherent_state, displacement, displacement_residual, fidelity,
                   hermite_gram, partial_trace, random_state, von_neumann_entropy)
from .teleport import (average_fidelity, bob_correction_discrete,
                       conditional_state, weyl_unitaries)

REFERENCE_ENTROPY = 1.46


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.detail} ({self.seconds:.2f}s)"


# --- helpers shared with the test-suite -------------------------------------

def random_unitaries(rng: np.random.Generator, d: int, count: int) -> list[np.ndarray]:
    return [unitary_group.rvs(d, random_state=rng) if d > 1 else
            np.exp(2j * np.pi * rng.random()) * np.ones((1, 1)) for _ in range(count)]


def teleport_identity_error(V: np.ndarray, psi: FockState) -> float:
    """``1 - F`` after conditional collapse and the discrete correction of ``V``."""
    trunc = psi.trunc
    g = epr.GammaTable.from_unitary(V, trunc)
    beta, _ = conditional_state(psi, epr.phi00(trunc), g)
    out = bob_correction_discrete(g, beta, tol=1e-9)
    return abs(1 - fidelity(psi, out.normalize()))


def outcome_probabilities(psi: FockState, basis: list[np.ndarray]) -> np.ndarray:
    """Probabilities of the discrete maximally entangled outcomes on the ideal resource."""
    trunc = psi.trunc
    d = trunc.dim
    res = epr.phi00(trunc)
    out = []
    for V in basis:
        _, dens = conditional_state(psi, res, epr.GammaTable.from_unitary(V, trunc))
        out.append(dens / d)     # weight 1/(N+1) per discrete outcome
    return np.array(out)


# --- individual checks ---------------------------------------------------------

def _entropy_reference_value():
    closed = ent.entropy_closed_form(0.69)
    numeric = ent.entropy_numeric(0.69, TruncationConfig(40))
    dev = max(abs(closed - REFERENCE_ENTROPY), abs(numeric - REFERENCE_ENTROPY))
    ok = dev <= 0.01 and abs(closed - numeric) < 1e-8
    return ok, dev, 0.01, f"E(0.69) closed={closed:.6f} numeric={numeric:.6f} |route diff|={abs(closed-numeric):.1e}"


def _gamma_identity():
    worst = 0.0
    for N in (4, 8, 32):
        t = TruncationConfig(N, 8 * N)
        expect = np.eye(N + 1) / math.sqrt(N + 1)
        for method in ("operator", "series"):
            g = epr.gamma_closed_form(0.0, 0.0, t, method)
            worst = max(worst, float(np.abs(g.gamma - expect).max()))
    return worst == 0.0, worst, 0.0, f"max |gamma(0,0) - I/sqrt(N+1)| = {worst:.1e}"


def _teleport_identity():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for N in (2, 4, 8):
        t = TruncationConfig(N)
        for V in random_unitaries(rng, N + 1, 20):
            worst = max(worst, teleport_identity_error(V, random_state(rng, t)))
    return worst < 1e-12, worst, 1e-12, f"max |1-F| over 60 unitaries = {worst:.1e}"


def _no_information(N=4):
    rng = np.random.default_rng(7)
    t = TruncationConfig(N)
    basis = weyl_unitaries(N + 1)
    p1 = outcome_probabilities(random_state(rng, t), basis)
    p2 = outcome_probabilities(random_state(rng, t), basis)
    dev = float(np.abs(p1 - p2).max())
    return dev < 1e-10, dev, 1e-10, f"max |p1-p2| = {dev:.1e}, sum p = {p1.sum():.12f}"


def _ladder_algebra(N):
    t = TruncationConfig(N, 4 * N)
    a = annihilation(t).mat
    k = t.N_work
    comm = (a @ a.conj().T - a.conj().T @ a)[:k, :k]
    err = float(np.abs(comm - np.eye(k)).max())
    return err < 1e-12, err, 1e-12, f"max |[a,a^dag] - I| on interior = {err:.1e}"


def _hermite_orthonormality(N):
    nmax = max(32, N)
    err = float(np.abs(hermite_gram(nmax, nmax + 8) - np.eye(nmax + 1)).max())
    return err < 1e-8, err, 1e-8, f"Gram deviation n<={nmax}: {err:.1e}"


def _partial_trace_trace(N):
    rng = np.random.default_rng(11)
    t = TruncationConfig(N)
    c = rng.standard_normal((N + 1, N + 1)) + 1j * rng.standard_normal((N + 1, N + 1))
    s = TwoModeState(c / np.linalg.norm(c), t)
    err = max(abs(np.trace(partial_trace(s, k).mat).real - 1) for k in ("first", "second"))
    return err < 1e-12, err, 1e-12, f"|Tr rho - 1| = {err:.1e}"


def _entropy_bounds(N):
    rng = np.random.default_rng(12)
    t = TruncationConfig(N)
    worst = 0.0
    for _ in range(10):
        c = rng.standard_normal((N + 1, N + 1)) + 1j * rng.standard_normal((N + 1, N + 1))
        E = von_neumann_entropy(partial_trace(TwoModeState(c / np.linalg.norm(c), t)))
        worst = max(worst, -E, E - math.log2(N + 1))
    ok = worst <= t.abs_tol
    return ok, worst, t.abs_tol, f"max bound violation = {worst:.1e}"


def _displacement_unitarity(N):
    t = TruncationConfig(N, 8 * N)
    z = math.sqrt(t.N_work) / 4 * complex(0.6, 0.8)
    D = displacement(z, t)
    err = max(displacement_residual(z, t, D), float(np.abs(D.mat.conj().T @ D.mat - np.eye(t.work_dim)).max()))
    return err < 1e-8, err, 1e-8, f"|zeta|={abs(z):.2f}: covariance and unitarity residual {err:.1e}"


def _phi00_equations(N):
    r1, r2 = epr.eigenvalue_residual(epr.phi00(TruncationConfig(N)))
    err = max(r1, r2)
    return err < 1e-12, err, 1e-12, f"eigenvalue residuals ({r1:.1e}, {r2:.1e})"


def _schmidt(N):
    t = TruncationConfig(N)
    worst = 0.0
    for r in (0.2, 0.69, 1.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            lam = np.sort(partial_trace(ent.squeezed_state(r, t)).eigenvalues())[::-1]
        x = math.tanh(r) ** (2 * np.arange(N + 1))
        worst = max(worst, float(np.abs(lam - x / x.sum()).max()))
    return worst < 1e-10, worst, 1e-10, f"Schmidt eigenvalue error = {worst:.1e}"


def _entropy_monotone():
    E = np.array([ent.entropy_closed_form(r) for r in np.linspace(0, 2, 21)])
    gap = float(np.diff(E).min())
    return gap > 0 and E[0] == 0, gap, 0.0, f"min step {gap:.3e}, E(0)={E[0]}"


def _entropy_sweep():
    s = ent.entropy_sweep(0.0, 2.0, 81)
    slope = s.slope(1.0, 2.0)
    rel = abs(slope / ent.SLOPE_ASYMPTOTE - 1)
    route = float(np.abs(s.closed - s.numeric).max())
    ok = (s.closed[0] == 0 and np.all(np.diff(s.closed) > 0) and rel < 0.02
          and route < 1e-6)
    return ok, rel, 0.02, f"slope[1,2]={slope:.4f} (rel {rel:.2%}), route diff {route:.1e}"


def oracle_equivalence(N=8, N_work=64, points=(-1, -0.5, 0, 0.5, 1)) -> float:
    t = TruncationConfig(N, N_work)
    worst = 0.0
    for X in points:
        for P in points:
            a = epr.gamma_closed_form(X, P, t)
            b = epr.gamma_integral_oracle(X, P, t)
            worst = max(worst, epr.max_deviation(a, b))
    return worst


def _oracle_equivalence():
    worst = oracle_equivalence()
    return worst < 1e-6, worst, 1e-6, f"max entrywise deviation = {worst:.1e}"


def unitarity_trend(X=0.5, P=0.3, Ns=(8, 16, 32)) -> list[float]:
    return [epr.unitarity_residual(epr.gamma_closed_form(X, P, TruncationConfig(N, 8 * N)))
            for N in Ns]


def _unitarity_trend():
    res = unitarity_trend()
    ratio = res[0] / res[-1]
    ok = all(b <= a for a, b in zip(res, res[1:])) and ratio >= 2
    return ok, ratio, 2.0, "residuals " + ", ".join(f"{v:.4e}" for v in res) + f" (drop x{ratio:.2f})"


def _completeness():
    t = TruncationConfig(8, 64)
    grid = epr.OutcomeGrid.default(8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        k1 = epr.completeness_constant(grid, t).kappa
        k2 = epr.completeness_constant(grid.refined(), t).kappa
    rel, stab = abs(k1 / math.pi - 1), abs(k2 / k1 - 1)
    return rel < 0.01 and stab < 0.002, rel, 0.01, f"kappa={k1:.6f} (vs pi {rel:.2%}), refined {k2:.6f} ({stab:.3%})"


def _classical_limit(N):
    t = TruncationConfig(max(N, 16), 128)
    F = average_fidelity(coherent_state(0.3, t), 0.0, t)
    return abs(F - 0.5) < 0.005, abs(F - 0.5), 0.005, f"r=0 mean fidelity {F:.6f}"


FAST = [
    ("entropy-reference-value", lambda N: _entropy_reference_value()),
    ("gamma-identity", lambda N: _gamma_identity()),
    ("teleport-identity", lambda N: _teleport_identity()),
    ("no-information", lambda N: _no_information()),
    ("ladder-algebra", _ladder_algebra),
    ("hermite-orthonormality", _hermite_orthonormality),
    ("partial-trace-trace", _partial_trace_trace),
    ("entropy-bounds", _entropy_bounds),
    ("displacement-covariance", _displacement_unitarity),
    ("phi00-eigenvalue-equations", _phi00_equations),
    ("schmidt-consistency", _schmidt),
    ("entropy-monotone", lambda N: _entropy_monotone()),
]
FULL = FAST + [
    ("entropy-sweep", lambda N: _entropy_sweep()),
    ("oracle-equivalence", lambda N: _oracle_equivalence()),
    ("unitarity-trend", lambda N: _unitarity_trend()),
    ("completeness-constant", lambda N: _completeness()),
    ("classical-limit", _classical_limit),
]


def check_names(fast: bool = False) -> list[str]:
    return [n for n, _ in (FAST if fast else FULL)]


def run_checks(N: int = 8, fast: bool = False, inject=(), only=None) -> list[Check]:
    """Run the checklist; ``inject`` names checks forced to fail."""
    out = []
    for name, fn in FAST if fast else FULL:
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, value, tol, detail = fn(N)
        except Exception as exc:  # a crashing check is a failing check
            ok, value, tol, detail = False, math.nan, math.nan, f"{type(exc).__name__}: {exc}"
        if name in inject:
            ok, detail = False, f"injected perturbation; measured {detail}"
        out.append(Check(name, bool(ok), float(value), float(tol), detail,
                         time.perf_counter() - t0))
    return out
