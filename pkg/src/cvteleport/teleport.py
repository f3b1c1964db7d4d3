"""
Teleportation of a single-mode state through a two-mode resource.

Mode 1 carries the input, modes 2 and 3 the resource. Alice projects modes
1 and 2 onto ``|phi(X, P)>`` (see :mod:`cvteleport.epr` for the labels);
Bob's mode 3 is left in

    b_k = sum_{m,n} conj(G[m, n]) alpha_m c[n, k],

with ``G`` the delta-normalized coefficients and ``c`` the resource
amplitudes. ``|b|^2`` is the outcome density: probabilities are
``|b|^2 dX dP / kappa`` over a label grid. Bob then either applies the
discrete unitary ``sqrt(N+1) gamma`` or displaces by
``zeta = gain * (-X + iP)`` (``P`` being twice the eigenvalue of
``(p_1 + p_2)/2``).
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .entanglement import squeezed_state
from .epr import (GammaTable, OutcomeGrid, gamma_closed_form, operator_route,
                  phi00, unitarity_residual)
from .errors import GridCoverageError, TruncationWarning, ValidationError
from .fock import (FockState, TruncationConfig, TwoModeState, _quadrature_eig,
                   coherent_state, displace_state)

__all__ = [
    "MeasurementOutcome", "ProtocolRun", "OutcomeDistribution",
    "conditional_state", "bob_correction_discrete", "bob_correction_displacement",
    "outcome_distribution", "sample_outcome", "run_protocol", "run_samples",
    "average_fidelity", "covering_grid", "weyl_unitaries", "run_ideal_discrete",
]

MIN_MASS = 0.99


@dataclass(frozen=True)
class MeasurementOutcome:
    X0: float
    P0: float
    density: float = math.nan
    weight: float = math.nan

    @property
    def probability(self) -> float:
        return self.density * self.weight

    @property
    def p_eigenvalue(self) -> float:
        """Eigenvalue of ``(p_1 + p_2)/2`` belonging to the label ``P0``."""
        return self.P0 / 2


@dataclass(frozen=True)
class ProtocolRun:
    input: FockState
    resource: TwoModeState
    outcome: MeasurementOutcome
    conditional: FockState
    corrected: FockState
    fidelity: float
    correction: str
    unitarity_residual: float = math.nan

    def csv_row(self) -> list[str]:
        o = self.outcome
        return [repr(float(v)) for v in (o.X0, o.P0, o.density, self.fidelity)]


# --- single-outcome algebra ------------------------------------------------------

def _check_dims(input: FockState, resource: TwoModeState, g: GammaTable | None = None):
    d = input.trunc.dim
    if resource.trunc.dim != d or (g is not None and g.trunc.dim != d):
        raise ValidationError("input, resource and gamma table must share the cutoff N")


def conditional_state(input: FockState, resource: TwoModeState,
                      g: GammaTable) -> tuple[FockState, float]:
    """Bob's unnormalized state after Alice finds the outcome of ``g``.

    Returns ``(beta, density)`` where ``beta = sqrt(N+1) b`` and
    ``density = |b|^2``. For the maximally entangled resource this is
    ``beta_n = sqrt(N+1) sum_m conj(gamma[m, n]) alpha_m`` exactly.
    """
    _check_dims(input, resource, g)
    d = input.trunc.dim
    v = g.amplitudes.conj().T @ input.amps    # trace out mode 1
    b = resource.amps.T @ v                   # mode 2 -> mode 3
    density = float(np.vdot(b, b).real)
    if density < 1e-300:
        warnings.warn(f"outcome ({g.X}, {g.P}) has zero conditional norm",
                      RuntimeWarning, stacklevel=2)
    return FockState(math.sqrt(d) * b, input.trunc, normalized=False), density


def bob_correction_discrete(g: GammaTable, state: FockState,
                            tol: float = 1e-6) -> FockState:
    """Apply ``U |n> = sqrt(N+1) sum_m gamma[m, n] |m>`` to Bob's mode.

    Warns (and proceeds) when ``sqrt(N+1) gamma`` is further than ``tol``
    from unitary.
    """
    res = unitarity_residual(g)
    if res > tol:
        warnings.warn(f"sqrt(N+1) gamma is not unitary (residual {res:.2e})",
                      TruncationWarning, stacklevel=2)
    U = math.sqrt(g.trunc.dim) * g.gamma
    return FockState(U @ state.amps, state.trunc, normalized=False)


def correction_zeta(outcome: MeasurementOutcome, gain: float = 1.0) -> complex:
    return gain * complex(-outcome.X0, outcome.P0)


def bob_correction_displacement(outcome: MeasurementOutcome, state: FockState,
                                gain: float = 1.0) -> FockState:
    """Displace Bob's mode by ``gain * (-X0 + i P0)``."""
    return displace_state(correction_zeta(outcome, gain), state)


def _score(target: FockState, out: FockState, norm2: float | None = None) -> float:
    """Fidelity of ``out`` with ``target``.

    ``norm2`` is the norm of Bob's state before a norm-preserving correction;
    weight the correction pushed past level ``N`` then counts as lost
    instead of being renormalized away.
    """
    norm2 = out.norm2 if norm2 is None else norm2
    if norm2 < 1e-300:
        return 0.0
    return float(abs(np.vdot(target.amps, out.amps)) ** 2 / norm2)


# --- outcome grids ------------------------------------------------------------

def _second_moments(amps: np.ndarray):
    """Means and variances of ``x`` and ``p`` for a pure or reduced mode."""
    d = amps.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    x = (a + a.T) / 2
    p = (a - a.T) / 2j
    rho = amps if amps.ndim == 2 else np.outer(amps, amps.conj())
    out = []
    for q in (x, p):
        m = np.trace(rho @ q).real
        out += [m, np.trace(rho @ q @ q).real - m * m]
    return out


def covering_grid(input: FockState, resource: TwoModeState, spacing: float = 0.1,
                  sigmas: float = 5.0, min_extent: float = 4.0) -> OutcomeGrid:
    """Grid centred on 0 whose extent covers ``sigmas`` standard deviations
    of both outcome labels (``X = x_2 - x_1``, ``P = p_1 + p_2``)."""
    mx1, vx1, mp1, vp1 = _second_moments(input.amps)
    c = resource.amps
    mx2, vx2, mp2, vp2 = _second_moments(c.T @ c.conj())  # reduced state of mode 2
    LX = abs(mx2 - mx1) + sigmas * math.sqrt(vx1 + vx2)
    LP = abs(mp1 + mp2) + sigmas * math.sqrt(vp1 + vp2)
    rnd = lambda L: max(min_extent, math.ceil(L / spacing / 5) * spacing * 5)
    return OutcomeGrid(spacing, spacing, rnd(LX), rnd(LP))


class _Displacer:
    """Batched ``D(zeta)`` on vectors via the factorization

        D(zeta) = exp(2i Im(zeta) x) exp(-2i Re(zeta) p) exp(-i Re(zeta) Im(zeta)),

    using cached quadrature eigenbases of the working space.
    """

    def __init__(self, trunc: TruncationConfig):
        W = trunc.work_dim
        self.d = trunc.dim
        self.wx, self.vx = _quadrature_eig(W, "x")
        self.wp, self.vp = _quadrature_eig(W, "p")
        self.vp_in = self.vp.conj().T[:, : self.d]
        self.xp = self.vx.conj().T @ self.vp
        self.vx_out = self.vx[: self.d]

    def apply(self, re: np.ndarray, im: float, vecs: np.ndarray) -> np.ndarray:
        """Displace columns of ``vecs`` (d x k) by ``re[j] + i im``."""
        t = (self.vp_in @ vecs) * np.exp(-2j * np.outer(self.wp, re))
        t = (self.xp @ t) * np.exp(2j * im * self.wx)[:, None]
        return (self.vx_out @ t) * np.exp(-1j * re * im)


@dataclass
class OutcomeDistribution:
    """Outcome densities (and, optionally, fidelities) on a label grid.

    Arrays are indexed ``[j, i]`` for ``P[j]``, ``X[i]``.
    """

    grid: OutcomeGrid
    density: np.ndarray
    fidelity: np.ndarray | None = None
    residual: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def mass(self) -> float:
        return float(self.density.sum() * self.grid.weight)

    def check_mass(self, lo: float = MIN_MASS):
        if self.mass < lo:
            raise GridCoverageError(
                f"grid captures probability mass {self.mass:.4f} < {lo}; enlarge the "
                f"extent (LX={self.grid.LX}, LP={self.grid.LP})")

    def mean_fidelity(self) -> float:
        """Probability-weighted fidelity, conditioned on the covered grid."""
        if self.fidelity is None:
            raise ValidationError("distribution was built without fidelities")
        return float(np.sum(self.density * self.fidelity) / np.sum(self.density))

    def outcome(self, j: int, i: int) -> MeasurementOutcome:
        return MeasurementOutcome(float(self.grid.X[i]), float(self.grid.P[j]),
                                  float(self.density[j, i]), self.grid.weight)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        p = self.density.ravel() / self.density.sum()
        flat = rng.choice(p.size, size=size, p=p)
        nx = len(self.grid.X)
        if size is None:
            return self.outcome(*divmod(int(flat), nx))
        return [self.outcome(*divmod(int(k), nx)) for k in flat]


def worker_count() -> int:
    """Thread count for grid sweeps, from ``CVTELEPORT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CVTELEPORT_THREADS", "1")))
    except ValueError:
        return 1


def outcome_distribution(input: FockState, resource: TwoModeState,
                         grid: OutcomeGrid, correction: str | None = "displacement",
                         gain: float = 1.0, target: FockState | None = None,
                         check: bool = True, workers: int | None = None) -> OutcomeDistribution:
    """Densities ``|b(X, P)|^2`` over the grid, plus the fidelity of Bob's
    corrected state with ``target`` (default: the input) when ``correction``
    is given.

    The three-mode state is never formed: mode 1 is contracted against the
    eigenstate coefficients first, then mode 2 against the resource. Rows of
    constant ``P`` are independent and may run on ``workers`` threads; the
    result does not depend on the thread count. Raises ``GridCoverageError``
    when ``check`` and the captured mass is below 0.99.
    """
    _check_dims(input, resource)
    if correction not in (None, "displacement", "discrete"):
        raise ValidationError(f"unknown correction {correction!r}")
    trunc = input.trunc
    d = trunc.dim
    target = target or input
    route = operator_route(trunc)
    disp = _Displacer(trunc) if correction == "displacement" else None
    alpha = input.amps
    cT = resource.amps.T
    Xs, Ps = grid.X, grid.P
    phX = np.exp(1j * np.outer(Xs, route.wp))           # nX x W
    CH = route.C.conj().T

    def row(P):
        B = route.B(P)                                   # d x W
        w0 = B.conj().T @ alpha                          # W
        # G = (B ph) C (B conj(ph))^T  =>  G^dag alpha = (conj(B) ph) C^dag (conj(ph) w0)
        u = CH @ (phX.conj() * w0).T                     # W x nX
        v = np.einsum("mw,iw,wi->mi", B.conj(), phX, u)  # d x nX
        b = cT @ v                                       # d x nX
        dens = np.sum(np.abs(b) ** 2, axis=0)
        fid = resid = None
        if correction == "displacement":
            out = disp.apply(-gain * Xs, gain * P, b)
            den = dens
        elif correction == "discrete":
            out = np.empty_like(b)
            resid = np.empty(len(Xs))
            for i, X in enumerate(Xs):
                g = GammaTable.from_amplitudes(X, P, route.amplitudes(X, P, B), trunc)
                out[:, i] = math.sqrt(d) * (g.gamma @ b[:, i])
                resid[i] = unitarity_residual(g)
            den = np.sum(np.abs(out) ** 2, axis=0)
        if correction:
            num = np.abs(target.amps.conj() @ out) ** 2
            fid = np.where(den > 1e-300, num / np.where(den > 0, den, 1), 0.0)
        return dens, fid, resid

    n = workers or worker_count()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            rows = list(pool.map(row, Ps))
    else:
        rows = [row(P) for P in Ps]
    dens = np.array([r[0] for r in rows])
    fid = np.array([r[1] for r in rows]) if correction else None
    resid = np.array([r[2] for r in rows]) if correction == "discrete" else None
    dist = OutcomeDistribution(grid, dens, fid, resid,
                               {"correction": correction, "gain": gain})
    if check:
        dist.check_mass()
    return dist


# --- protocol front ends ------------------------------------------------------

def _resource(r, trunc: TruncationConfig) -> TwoModeState:
    return phi00(trunc) if r is None or math.isinf(r) else squeezed_state(r, trunc)


def sample_outcome(input: FockState, resource: TwoModeState, grid: OutcomeGrid,
                   seed=None, size: int | None = None):
    """Draw grid outcomes with probability ``density * weight``.

    ``seed`` may be an int or a ``numpy.random.Generator``; an int seed makes
    the draw sequence reproducible.
    """
    dist = outcome_distribution(input, resource, grid, correction=None)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return dist.sample(rng, size)


def _finish(input, resource, g, correction, gain, outcome=None):
    beta, dens = conditional_state(input, resource, g)
    weight = outcome.weight if outcome is not None else math.nan
    outcome = MeasurementOutcome(g.X, g.P, dens, weight)
    if correction == "discrete":
        corrected = bob_correction_discrete(g, beta, tol=math.inf)
    elif correction == "displacement":
        corrected = bob_correction_displacement(outcome, beta, gain)
    else:
        raise ValidationError(f"unknown correction {correction!r}")
    return ProtocolRun(input, resource, outcome, beta, corrected,
                       _score(input, corrected, beta.norm2 if correction == "displacement" else None),
                       correction, unitarity_residual(g))


def run_protocol(input: FockState, r: float | None, trunc: TruncationConfig,
                 grid: OutcomeGrid | None = None, correction: str = "displacement",
                 seed=None, *, outcome: tuple[float, float] | None = None,
                 gamma: GammaTable | None = None, gain: float = 1.0) -> ProtocolRun:
    """One pass of the protocol.

    ``r=None`` (or ``inf``) uses the maximally entangled resource. The outcome
    is taken from ``gamma`` or ``outcome`` when given, otherwise sampled on
    ``grid`` with ``seed``.
    """
    resource = _resource(r, trunc)
    drawn = None
    if gamma is None:
        if outcome is None:
            grid = grid or covering_grid(input, resource)
            drawn = sample_outcome(input, resource, grid, seed)
            outcome = (drawn.X0, drawn.P0)
        gamma = gamma_closed_form(outcome[0], outcome[1], trunc)
    return _finish(input, resource, gamma, correction, gain, drawn)


def run_samples(input: FockState, r: float | None, trunc: TruncationConfig,
                grid: OutcomeGrid, n: int, correction: str = "displacement",
                seed=None, gain: float = 1.0) -> list[ProtocolRun]:
    """``n`` independent runs sharing one precomputed outcome distribution."""
    resource = _resource(r, trunc)
    dist = outcome_distribution(input, resource, grid, correction=None)
    rng = np.random.default_rng(seed)
    runs = []
    for o in dist.sample(rng, n):
        g = gamma_closed_form(o.X0, o.P0, trunc)
        runs.append(_finish(input, resource, g, correction, gain, o))
    return runs


def average_fidelity(inputs, r: float | None, trunc: TruncationConfig,
                     grid: OutcomeGrid | None = None, correction: str = "displacement",
                     gain: float = 1.0) -> float:
    """Outcome-averaged fidelity by deterministic grid quadrature.

    ``inputs`` is a :class:`FockState`, a complex coherent amplitude, or a
    sequence of either; the result is the plain mean over inputs of
    ``sum density * weight * F / sum density * weight``.
    """
    if isinstance(inputs, (FockState, complex, float, int)):
        inputs = [inputs]
    states = [s if isinstance(s, FockState) else coherent_state(complex(s), trunc)
              for s in inputs]
    resource = _resource(r, trunc)
    vals = []
    for s in states:
        g = grid or covering_grid(s, resource)
        vals.append(outcome_distribution(s, resource, g, correction, gain).mean_fidelity())
    return float(np.mean(vals))


def weyl_unitaries(d: int) -> list[np.ndarray]:
    """The ``d^2`` clock-and-shift unitaries ``Z^k S^j`` (index ``j*d + k``).

    They are trace-orthogonal, so ``V/sqrt(d)`` over all of them is a complete
    maximally entangled measurement basis of the truncated two-mode space.
    """
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(clock, k) @ np.linalg.matrix_power(shift, j)
            for j in range(d) for k in range(d)]


def run_ideal_discrete(input: FockState, n: int, seed=None) -> list[ProtocolRun]:
    """``n`` runs through the truncated maximally entangled resource, measuring
    in the clock-and-shift basis.

    Outcome ``(j, k)`` is stored as ``(X0, P0)``; every outcome has probability
    ``1/d^2`` and the discrete correction restores the input exactly.
    """
    trunc = input.trunc
    d = trunc.dim
    resource = phi00(trunc)
    basis = weyl_unitaries(d)
    tables = [GammaTable.from_unitary(V, trunc, X=float(i // d), P=float(i % d))
              for i, V in enumerate(basis)]
    dens = np.array([conditional_state(input, resource, g)[1] for g in tables])
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(tables), size=n, p=dens / dens.sum())
    return [_finish(input, resource, tables[k], "discrete", 1.0,
                    MeasurementOutcome(tables[k].X, tables[k].P, dens[k], 1 / d))
            for k in picks]


def distribution_csv(dist: OutcomeDistribution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["X0", "P0", "density", "fidelity"])
    for j, P in enumerate(dist.grid.P):
        for i, X in enumerate(dist.grid.X):
            f = dist.fidelity[j, i] if dist.fidelity is not None else math.nan
            w.writerow([repr(float(X)), repr(float(P)), repr(float(dist.density[j, i])),
                        repr(float(f))])
    return buf.getvalue()


def runs_csv(runs: list[ProtocolRun]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["X0", "P0", "density", "fidelity"])
    for run in runs:
        w.writerow(run.csv_row())
    return buf.getvalue()
