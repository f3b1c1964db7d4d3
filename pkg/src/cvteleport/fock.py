"""
Truncated single-mode Fock space: ladder operators, quadratures, states,
partial traces, entropy and fidelity.

Quadratures follow the half-scaled convention

    x = (a + a^dagger) / 2,    p = (a - a^dagger) / (2i),    [x, p] = i/2,

so the vacuum wavefunction is proportional to exp(-x^2) and the vacuum
variance of either quadrature is 1/4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import TruncationWarning, ValidationError

__all__ = [
    "TruncationConfig", "FockState", "TwoModeState", "Operator",
    "DensityMatrix", "annihilation", "creation", "quadrature_ops",
    "quadrature_wavefunction", "quadrature_wavefunctions",
    "hermite_gram", "displacement", "displacement_residual",
    "displace_state", "partial_trace", "von_neumann_entropy", "fidelity",
    "basis_state", "coherent_state", "random_state",
]


def _frozen(arr: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TruncationConfig:
    """Photon-number cutoffs.

    ``N`` bounds every physical state (levels ``0..N``); ``N_work`` is the
    larger space in which operator products and exponentials are formed
    before projecting back onto ``0..N``.
    """

    N: int
    N_work: int | None = None
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.N_work is None:
            object.__setattr__(self, "N_work", self.N)
        if int(self.N) != self.N or self.N < 0:
            raise ValidationError(f"N must be a non-negative integer, got {self.N}")
        if int(self.N_work) != self.N_work or self.N_work < self.N:
            raise ValidationError(f"N_work must be an integer >= N, got {self.N_work}")
        if not self.abs_tol > 0:
            raise ValidationError("abs_tol must be positive")

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def work_dim(self) -> int:
        return self.N_work + 1


@dataclass(frozen=True)
class FockState:
    """Single-mode amplitudes over ``|0>..|N>``.

    Conditional (post-measurement) states carry their norm as a
    probability weight; set ``normalized=False`` for those.
    """

    amps: np.ndarray
    trunc: TruncationConfig
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.shape != (self.trunc.dim,):
            raise ValidationError(
                f"expected {self.trunc.dim} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amps", amps)
        if self.normalized and abs(self.norm2 - 1.0) > self.trunc.abs_tol:
            raise ValidationError(f"state flagged normalized has norm^2 {self.norm2:.3e}")

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalize(self) -> "FockState":
        n2 = self.norm2
        if n2 <= 0:
            raise ValidationError("cannot normalize a zero vector")
        return FockState(self.amps / np.sqrt(n2), self.trunc, True)


@dataclass(frozen=True)
class TwoModeState:
    """Amplitude matrix ``c[m, n]`` over ``|m>|n>``."""

    amps: np.ndarray
    trunc: TruncationConfig
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(self.amps)
        d = self.trunc.dim
        if amps.shape != (d, d):
            raise ValidationError(f"expected ({d}, {d}) amplitudes, got {amps.shape}")
        object.__setattr__(self, "amps", amps)
        if self.normalized and abs(self.norm2 - 1.0) > self.trunc.abs_tol:
            raise ValidationError(f"state flagged normalized has norm^2 {self.norm2:.3e}")

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def normalize(self) -> "TwoModeState":
        return TwoModeState(self.amps / np.sqrt(self.norm2), self.trunc, True)


@dataclass(frozen=True)
class Operator:
    mat: np.ndarray
    label: str = ""
    hermitian: bool = False

    def __post_init__(self):
        mat = _frozen(self.mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"operator matrix must be square, got {mat.shape}")
        object.__setattr__(self, "mat", mat)
        if self.hermitian and not np.allclose(mat, mat.conj().T, atol=1e-12):
            raise ValidationError(f"operator {self.label!r} claimed Hermitian but is not")

    @property
    def dag(self) -> "Operator":
        return Operator(self.mat.conj().T, f"{self.label}^dag", self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.mat @ other.mat, f"{self.label}*{other.label}")
        return self.mat @ other


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray
    trunc: TruncationConfig

    def __post_init__(self):
        mat = _frozen(self.mat)
        d = self.trunc.dim
        if mat.shape != (d, d):
            raise ValidationError(f"expected ({d}, {d}) density matrix, got {mat.shape}")
        object.__setattr__(self, "mat", mat)
        tol = self.trunc.abs_tol
        if not np.allclose(mat, mat.conj().T, atol=tol):
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > tol:
            raise ValidationError(f"density matrix trace {np.trace(mat).real:.3e} != 1")

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.mat)


# --- operators --------------------------------------------------------------

@lru_cache(maxsize=32)
def _ladder(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(trunc: TruncationConfig) -> Operator:
    """Annihilation operator on ``0..N_work`` with ``<n-1|a|n> = sqrt(n)``."""
    return Operator(_ladder(trunc.work_dim), "a")


def creation(trunc: TruncationConfig) -> Operator:
    return Operator(_ladder(trunc.work_dim).T.copy(), "a^dag")


def quadrature_ops(trunc: TruncationConfig) -> tuple[Operator, Operator]:
    """Return ``(x, p)`` with ``x = (a + a^dag)/2`` and ``p = (a - a^dag)/(2i)``."""
    a = _ladder(trunc.work_dim)
    ad = a.conj().T
    return (Operator((a + ad) / 2, "x", hermitian=True),
            Operator((a - ad) / 2j, "p", hermitian=True))


@lru_cache(maxsize=16)
def _quadrature_eig(dim: int, which: str) -> tuple[np.ndarray, np.ndarray]:
    a = _ladder(dim)
    gen = (a + a.T) / 2 if which == "x" else (a - a.T) / 2j
    w, v = scipy.linalg.eigh(gen)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def quadrature_exponential(theta: float, which: str, dim: int) -> np.ndarray:
    """``exp(i * theta * q)`` for ``q`` in {"x", "p"} on a ``dim``-level space.

    Built from a cached eigendecomposition of the truncated quadrature, so
    repeated calls at different ``theta`` cost one matrix product each.
    """
    w, v = _quadrature_eig(dim, which)
    return (v * np.exp(1j * theta * w)) @ v.conj().T


# --- wavefunctions ----------------------------------------------------------

def quadrature_wavefunctions(nmax: int, x) -> np.ndarray:
    """Values ``<x|n>`` for ``n = 0..nmax`` at the points ``x``.

    Returns an array of shape ``(nmax + 1,) + shape(x)``. The normalized
    Hermite functions are generated directly by the three-term recurrence

        psi_{n+1} = 2 x psi_n / sqrt(n+1) - sqrt(n/(n+1)) psi_{n-1},

    which never forms a raw Hermite polynomial and stays finite for
    ``n`` in the hundreds.
    """
    if nmax < 0:
        raise ValidationError("nmax must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = (2 / np.pi) ** 0.25 * np.exp(-x * x)
    if nmax >= 1:
        out[1] = 2 * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = 2 * x * out[n] / np.sqrt(n + 1) - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def quadrature_wavefunction(n: int, x: float) -> float:
    """``<x|n> = (2/pi)^(1/4) (2^n n!)^(-1/2) H_n(sqrt(2) x) exp(-x^2)``."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    return float(quadrature_wavefunctions(n, x)[n])


def hermite_gram(nmax: int, nodes: int | None = None) -> np.ndarray:
    """Gram matrix of ``<x|n>``, ``n <= nmax``, under Gauss-Hermite quadrature.

    The substitution ``u = sqrt(2) x`` maps the product of two wavefunctions
    onto a polynomial times ``exp(-u^2)``, which ``nodes >= nmax + 1``
    integrates exactly.
    """
    nodes = nodes or nmax + 1
    u, w = np.polynomial.hermite.hermgauss(nodes)
    x = u / np.sqrt(2)
    # strip the Gaussian factor: psi_n(x) = (2/pi)^(1/4) h_n(x) exp(-x^2)
    psi = quadrature_wavefunctions(nmax, x) * np.exp(x * x)
    return (psi * (w / np.sqrt(2))) @ psi.T


# --- displacement -----------------------------------------------------------

def displacement(zeta: complex, trunc: TruncationConfig) -> Operator:
    """``D(zeta) = exp(zeta a^dag - conj(zeta) a)`` on ``0..N_work``.

    The exponential is taken in the working space and is unitary there by
    construction; what truncation breaks is the covariance
    ``D^dag a D = a + zeta`` on the physical block ``0..N``. A
    ``TruncationWarning`` is emitted when that fails by more than 1e-6.
    """
    zeta = complex(zeta)
    a = _ladder(trunc.work_dim)
    if zeta == 0:
        return Operator(np.eye(trunc.work_dim), "D(0)")
    mat = scipy.linalg.expm(zeta * a.conj().T - np.conj(zeta) * a)
    op = Operator(mat, f"D({zeta:.6g})")
    res = displacement_residual(zeta, trunc, op)
    if res > 1e-6:
        warnings.warn(
            f"displacement |zeta|={abs(zeta):.3g} exceeds N_work={trunc.N_work}: "
            f"covariance residual {res:.2e} on levels 0..{trunc.N}", TruncationWarning, stacklevel=2)
    return op


def displacement_residual(zeta: complex, trunc: TruncationConfig,
                          op: Operator | None = None) -> float:
    """Max-norm of ``D^dag a D - a - zeta`` on the block ``0..N``.

    Zero for the exact displacement; grows once the displaced block reaches
    the working cutoff.
    """
    D = (op if op is not None else displacement(zeta, trunc)).mat
    a = _ladder(D.shape[0])
    d = trunc.dim
    lhs = (D.conj().T @ (a @ D[:, :d]))[:d]
    return float(np.abs(lhs - a[:d, :d] - complex(zeta) * np.eye(d)).max())


def displace_state(zeta: complex, state: FockState) -> FockState:
    """Embed ``state`` in the working space, displace, project back to ``0..N``.

    Uses the exact factorization

        D(zeta) = exp(2i Im(zeta) x) exp(-2i Re(zeta) p) exp(-i Re(zeta) Im(zeta))

    with cached eigenbases of the truncated quadratures, so only the action
    on the vector is formed and the result is bitwise reproducible. The
    result is left unnormalized: leakage past ``N`` shows up as lost norm.
    """
    trunc = state.trunc
    zeta = complex(zeta)
    if zeta == 0:
        return FockState(state.amps.copy(), trunc, normalized=False)
    W, d = trunc.work_dim, trunc.dim
    wx, vx = _quadrature_eig(W, "x")
    wp, vp = _quadrature_eig(W, "p")
    t = (vp[:d].conj().T @ state.amps) * np.exp(-2j * zeta.real * wp)
    t = (vx.conj().T @ (vp @ t)) * np.exp(2j * zeta.imag * wx)
    out = (vx[:d] @ t) * np.exp(-1j * zeta.real * zeta.imag)
    return FockState(out, trunc, normalized=False)


# --- states and measures ----------------------------------------------------

def basis_state(n: int, trunc: TruncationConfig) -> FockState:
    amps = np.zeros(trunc.dim, dtype=complex)
    amps[n] = 1
    return FockState(amps, trunc)


def coherent_state(alpha: complex, trunc: TruncationConfig) -> FockState:
    """Coherent state ``|alpha>`` restricted to ``0..N`` and renormalized."""
    n = np.arange(trunc.dim)
    # log-space avoids overflow of alpha^n / sqrt(n!) at large n
    mag = np.exp(n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)) if alpha != 0 else (n == 0) * 1.0
    amps = mag * np.exp(1j * np.angle(alpha) * n) * np.exp(-abs(alpha) ** 2 / 2)
    return FockState(amps / np.linalg.norm(amps), trunc)


def random_state(rng: np.random.Generator, trunc: TruncationConfig) -> FockState:
    """Haar-random pure state on ``0..N``."""
    v = rng.standard_normal(trunc.dim) + 1j * rng.standard_normal(trunc.dim)
    return FockState(v / np.linalg.norm(v), trunc)


def partial_trace(state: TwoModeState, keep: str = "first",
                  allow_unnormalized: bool = False) -> DensityMatrix:
    """Reduced density matrix of one mode of a pure two-mode state."""
    if keep not in ("first", "second"):
        raise ValidationError(f"keep must be 'first' or 'second', got {keep!r}")
    if not state.normalized and not allow_unnormalized:
        raise ValidationError("partial_trace requires a normalized state")
    c = state.amps
    rho = c @ c.conj().T if keep == "first" else c.T @ c.conj()
    if allow_unnormalized and not state.normalized:
        rho = rho / np.trace(rho).real
    return DensityMatrix((rho + rho.conj().T) / 2, state.trunc)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy ``-Tr rho log2 rho`` in bits; ``0 log 0`` is taken as 0."""
    lam = rho.eigenvalues()
    tol = rho.trunc.abs_tol
    if lam.min() < -tol:
        raise ValidationError(f"density matrix has eigenvalue {lam.min():.3e} < 0")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam))) + 0.0   # no -0.0


def fidelity(psi: FockState, phi: FockState) -> float:
    """Squared overlap ``|<psi|phi>|^2`` of two normalized states."""
    if psi.amps.shape != phi.amps.shape:
        raise ValidationError(
            f"dimension mismatch: {psi.amps.shape[0]} vs {phi.amps.shape[0]}")
    if not (psi.normalized and phi.normalized):
        raise ValidationError("fidelity requires normalized states")
    return float(abs(np.vdot(psi.amps, phi.amps)) ** 2)
