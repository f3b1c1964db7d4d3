"""
Joint eigenstates of Alice's commuting observables

    X = x_2 - x_1,        P_op = (p_2 + p_1) / 2,

and their photon-number coefficients ``gamma[m, n]``.

Outcome labels ``(X, P)`` follow the position-space form

    |phi(X, P)> = int dx1 dx2  delta(x2 - x1 - X) exp(iP (x1 + x2)) |x1>|x2>,

so ``X`` is the eigenvalue of ``x_2 - x_1`` and, with ``[x, p] = i/2``,
``P/2`` is the eigenvalue of ``(p_2 + p_1)/2``. With these labels the
states are delta-normalized as ``<phi(X,P)|phi(X',P')> = pi delta delta``,
i.e. the resolution of the identity carries ``kappa = pi``.

Three routes produce the same coefficients:

* operator: ``exp(iP Y) exp(iX (p_1 - p_2))`` applied to ``sum_n |n>|n>``
  in the working space, with ``Y = x_1 + x_2``;
* series:   the normal-ordered expansion in ``(iP + X) a_1`` and
  ``(iP - X) a_2``;
* oracle:   ``int dx exp(iP(2x + X)) <x|m> <x + X|n>`` by quadrature.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, TruncationWarning, ValidationError
from .fock import (TruncationConfig, TwoModeState, _ladder, _quadrature_eig,
                   quadrature_wavefunctions)

KAPPA = math.pi


@dataclass(frozen=True)
class GammaTable:
    """Coefficients of ``|phi(X, P)>`` on ``0..N`` x ``0..N``.

    ``gamma`` has unit Frobenius norm. ``scale`` is the Frobenius norm the
    delta-normalized state has on the same block, so ``scale * gamma`` are
    the amplitudes entering outcome probabilities.
    """

    X: float
    P: float
    gamma: np.ndarray
    scale: float
    trunc: TruncationConfig
    method: str = "operator"

    def __post_init__(self):
        g = np.array(self.gamma, dtype=complex, copy=True)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        d = self.trunc.dim
        if g.shape != (d, d):
            raise ValidationError(f"gamma must be ({d}, {d}), got {g.shape}")
        if abs(np.sum(np.abs(g) ** 2) - 1) > self.trunc.abs_tol:
            raise ValidationError("gamma table must have unit Frobenius norm")

    @property
    def amplitudes(self) -> np.ndarray:
        return self.scale * self.gamma

    @property
    def normalized(self) -> bool:
        return True

    def as_state(self) -> TwoModeState:
        return TwoModeState(self.gamma, self.trunc)

    @classmethod
    def from_amplitudes(cls, X, P, amps, trunc, method="operator") -> "GammaTable":
        s = float(np.linalg.norm(amps))
        if s == 0:
            raise ValidationError("zero amplitude table")
        return cls(float(X), float(P), amps / s, s, trunc, method)

    @classmethod
    def from_unitary(cls, V: np.ndarray, trunc: TruncationConfig,
                     X: float = math.nan, P: float = math.nan) -> "GammaTable":
        """Table ``gamma = V / sqrt(N+1)`` of a discrete maximally entangled basis state."""
        d = trunc.dim
        return cls(X, P, np.asarray(V) / math.sqrt(d), math.sqrt(d), trunc, "unitary")


@dataclass(frozen=True)
class IntegrationConfig:
    """Uniform trapezoid rule on ``[-L, L]`` with spacing ``h``.

    ``L=None`` picks ``sqrt(N_work) + 4 + |X|``. Trapezoid sums converge
    geometrically for smooth Gaussian-decaying integrands, and halving
    ``h`` gives the convergence check.
    """

    L: float | None = None
    h: float = 0.02
    check: bool = True
    tol: float = 1e-8


@dataclass(frozen=True)
class OutcomeGrid:
    """Symmetric uniform grid of outcome labels ``(X, P)``."""

    dX: float = 0.1
    dP: float = 0.1
    LX: float = 4.0
    LP: float = 4.0
    kappa: float = KAPPA

    def __post_init__(self):
        if not (self.dX > 0 and self.dP > 0 and self.LX >= 0 and self.LP >= 0):
            raise ValidationError("grid spacings must be positive and extents non-negative")

    @classmethod
    def default(cls, N: int) -> "OutcomeGrid":
        """Spacing 0.1; extent 4 up to ``N = 16``, widening as ``sqrt(N+1) + 2`` above."""
        L = 4.0 if N <= 16 else math.ceil(2 * (math.sqrt(N + 1) + 2)) / 2
        return cls(0.1, 0.1, L, L)

    @property
    def X(self) -> np.ndarray:
        n = int(round(self.LX / self.dX))
        return self.dX * np.arange(-n, n + 1)

    @property
    def P(self) -> np.ndarray:
        n = int(round(self.LP / self.dP))
        return self.dP * np.arange(-n, n + 1)

    @property
    def weight(self) -> float:
        return self.dX * self.dP / self.kappa

    def refined(self, factor: int = 2) -> "OutcomeGrid":
        return OutcomeGrid(self.dX / factor, self.dP / factor, self.LX, self.LP, self.kappa)

    def __len__(self):
        return len(self.X) * len(self.P)


# --- |phi(0,0)> and its eigenvalue equations --------------------------------

def phi00(trunc: TruncationConfig) -> TwoModeState:
    """Maximally entangled state ``sum_n |n>|n> / sqrt(N+1)``."""
    d = trunc.dim
    return TwoModeState(np.eye(d) / math.sqrt(d), trunc)


def eigenvalue_residual(state: TwoModeState) -> tuple[float, float]:
    """Norms of ``(a_1 - a_2^dag)|s>`` and ``(a_2 - a_1^dag)|s>`` on levels ``< N``.

    Mode-1 operators act from the left on the amplitude matrix, mode-2
    operators as ``c @ O.T``.
    """
    c = state.amps
    a = _ladder(state.trunc.dim).real
    r1 = a @ c - c @ a       # a_1 c  -  c (a^dag)^T
    r2 = c @ a.T - a.T @ c   # c a^T  -  a^dag c
    k = state.trunc.N
    return (float(np.linalg.norm(r1[:k, :k])), float(np.linalg.norm(r2[:k, :k])))


# --- operator route -----------------------------------------------------------

class _OperatorRoute:
    """Cached factorization for fast evaluation on many outcome points.

    With ``exp(i t x) = Vx e^{i t wx} Vx^dag`` (same for ``p``), the two
    mode unitaries share the ``exp(iP x)`` factor, so

        G(X, P) = (B e^{iX wp}) C (B e^{-iX wp})^T,
        B = [exp(iP x)]_{0..N, :} Vp,   C = Vp^dag conj(Vp).
    """

    def __init__(self, trunc: TruncationConfig):
        W = trunc.work_dim
        self.d = trunc.dim
        self.wx, self.vx = _quadrature_eig(W, "x")
        self.wp, self.vp = _quadrature_eig(W, "p")
        self.vx_top = self.vx[: self.d]
        self.xp = self.vx.conj().T @ self.vp
        self.C = self.vp.conj().T @ self.vp.conj()

    def B(self, P: float) -> np.ndarray:
        return (self.vx_top * np.exp(1j * P * self.wx)) @ self.xp

    def amplitudes(self, X: float, P: float, B: np.ndarray | None = None) -> np.ndarray:
        if X == 0 and P == 0:
            return np.eye(self.d, dtype=complex)
        B = self.B(P) if B is None else B
        ph = np.exp(1j * X * self.wp)
        return ((B * ph) @ self.C) @ (B * ph.conj()).T


@lru_cache(maxsize=8)
def operator_route(trunc: TruncationConfig) -> _OperatorRoute:
    return _OperatorRoute(trunc)


def gamma_amplitudes_grid(grid: OutcomeGrid, trunc: TruncationConfig):
    """Yield ``(i, j, X, P, G)`` over the grid, rows ordered by ``P`` then ``X``."""
    route = operator_route(trunc)
    for j, P in enumerate(grid.P):
        B = route.B(P)
        for i, X in enumerate(grid.X):
            yield i, j, X, P, route.amplitudes(X, P, B)


def _series_amplitudes(X: float, P: float, trunc: TruncationConfig,
                       l_max: int | None = None, rtol: float = 1e-12) -> np.ndarray:
    d = trunc.dim
    l_max = l_max or trunc.N + 200
    c1, c2 = 1j * P + X, 1j * P - X
    rho = abs(c1)
    l = np.arange(l_max + 1)
    m = np.arange(d)
    L, M, Nn = np.meshgrid(l, m, m, indexing="ij")
    # reciprocal factorials of negative integers vanish: keep l >= max(m, n)
    valid = (L >= M) & (L >= Nn)
    km, kn = np.where(valid, L - M, 0), np.where(valid, L - Nn, 0)
    if rho == 0:
        logmag = np.where((km == 0) & (kn == 0), 0.0, -np.inf)
    else:
        logmag = (gammaln(L + 1) - 0.5 * gammaln(M + 1) - 0.5 * gammaln(Nn + 1)
                  - gammaln(km + 1) - gammaln(kn + 1) + (km + kn) * math.log(rho))
    phase = np.exp(1j * (km * np.angle(c1) + kn * np.angle(c2)))
    terms = np.where(valid, np.exp(logmag) * phase, 0)
    total = terms.sum(axis=0)
    scale = np.abs(total).max()
    if np.abs(terms[-1]).max() > rtol * scale:
        raise ConvergenceError(
            f"series for gamma({X}, {P}) not converged by l={l_max}: "
            f"last term {np.abs(terms[-1]).max():.2e} vs {scale:.2e}")
    return math.exp((P * P + X * X) / 2) * total


def gamma_closed_form(X: float, P: float, trunc: TruncationConfig,
                      method: str = "operator") -> GammaTable:
    """Coefficients of ``|phi(X, P)>`` from the displaced maximally entangled state.

    Parameters
    ----------
    X, P : float
        Outcome labels (see module docstring).
    trunc : TruncationConfig
        ``N`` sets the table size. The operator route exponentiates in the
        ``N_work`` space, so truncation error stays near level ``N_work``.
    method : {"operator", "series"}
        ``"series"`` sums the normal-ordered expansion to convergence and
        raises ``ConvergenceError`` otherwise.
    """
    if method == "operator":
        amps = operator_route(trunc).amplitudes(float(X), float(P))
    elif method == "series":
        amps = _series_amplitudes(float(X), float(P), trunc)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return GammaTable.from_amplitudes(X, P, amps, trunc, method)


def _oracle_amplitudes(X, P, nmax, L, h):
    n = int(math.ceil(L / h))
    x = h * np.arange(-n, n + 1)
    A = quadrature_wavefunctions(nmax, x)
    B = quadrature_wavefunctions(nmax, x + X)
    w = h * np.exp(1j * P * (2 * x + X))
    return (A * w) @ B.T


def gamma_integral_oracle(X: float, P: float, trunc: TruncationConfig,
                          quad: IntegrationConfig = IntegrationConfig()) -> GammaTable:
    """Coefficients by direct quadrature of the position-space overlap.

    Independent of the ladder-operator machinery: only the Hermite-function
    recurrence and a trapezoid sum are used.
    """
    L = quad.L if quad.L is not None else math.sqrt(trunc.N_work) + 4 + abs(X)
    amps = _oracle_amplitudes(X, P, trunc.N, L, quad.h)
    if quad.check:
        fine = _oracle_amplitudes(X, P, trunc.N, L, quad.h / 2)
        dev = np.abs(fine - amps).max()
        if dev > quad.tol:
            raise ConvergenceError(
                f"quadrature for gamma({X}, {P}) not converged: halving h moved "
                f"an entry by {dev:.2e}")
    return GammaTable.from_amplitudes(X, P, amps, trunc, "oracle")


# --- comparisons and diagnostics ------------------------------------------------

def phase_align(gamma: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive.

    Entries within a relative 1e-9 of the maximum count as ties; the first in
    row-major order wins, so rounding noise cannot switch the reference.
    """
    mag = np.abs(gamma).ravel()
    k = int(np.argmax(mag >= mag.max() * (1 - 1e-9)))
    z = gamma.ravel()[k]
    return gamma * (abs(z) / z) if z != 0 else gamma


def max_deviation(g1: GammaTable, g2: GammaTable) -> float:
    return float(np.abs(phase_align(g1.gamma) - phase_align(g2.gamma)).max())


def unitarity_residual(g: GammaTable) -> float:
    """``||(N+1) gamma gamma^dag - I||_F / (N+1)``; zero when ``sqrt(N+1) gamma`` is unitary."""
    d = g.trunc.dim
    gg = d * (g.gamma @ g.gamma.conj().T)
    return float(np.linalg.norm(gg - np.eye(d)) / d)


def reduced_diagonal(g: GammaTable) -> np.ndarray:
    """Diagonal of the mode-1 reduced state of ``gamma``."""
    return np.sum(np.abs(g.gamma) ** 2, axis=1)


@dataclass(frozen=True)
class CompletenessReport:
    kappa: float
    leakage: float
    diag_spread: float
    interior: int


def completeness_constant(grid: OutcomeGrid, trunc: TruncationConfig,
                          interior: int | None = None) -> CompletenessReport:
    """Estimate ``kappa`` in ``int dX dP |phi><phi| = kappa I``.

    The grid sum of ``dX dP |phi><phi|`` is formed on the two-mode block
    ``0..N``; ``kappa`` is the mean diagonal over levels ``<= interior``
    (default ``N // 2``). ``leakage`` is the largest off-diagonal element in
    that block relative to ``kappa``; above 1% a ``TruncationWarning`` is
    raised.
    """
    k = (trunc.N // 2 if interior is None else interior) + 1
    acc = np.zeros((k * k, k * k), dtype=complex)
    for _, _, _, _, G in gamma_amplitudes_grid(grid, trunc):
        v = G[:k, :k].reshape(-1)
        acc += np.outer(v, v.conj())
    acc *= grid.dX * grid.dP
    diag = acc.diagonal().real
    kappa = float(diag.mean())
    off = np.abs(acc - np.diag(acc.diagonal())).max() / kappa
    spread = float((diag.max() - diag.min()) / kappa)
    if off > 0.01 or spread > 0.01:
        warnings.warn(
            f"grid sum deviates from proportionality: off-diagonal {off:.2%}, "
            f"diagonal spread {spread:.2%}", TruncationWarning, stacklevel=2)
    return CompletenessReport(kappa, float(off), spread, k - 1)


def gamma_csv(g: GammaTable) -> str:
    """Row-major ``m,n,Re,Im`` dump of ``gamma``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "n", "Re", "Im"])
    for m in range(g.trunc.dim):
        for n in range(g.trunc.dim):
            z = g.gamma[m, n]
            w.writerow([m, n, repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()
