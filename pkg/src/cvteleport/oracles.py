"""
Independent reference computations used to cross-check the main paths.

Nothing here touches ladder-operator exponentials: eigenstate coefficients
come from position-space quadrature of Hermite functions, the three-mode
state is contracted as an explicit rank-3 tensor, and the fidelity of a
displaced conditional state with a coherent input uses the closed-form
coherent amplitudes ``<alpha - zeta|``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .epr import OutcomeGrid
from .fock import FockState, TwoModeState, quadrature_wavefunctions


def coherent_amplitudes(beta: complex, dim: int) -> np.ndarray:
    """Untruncated coherent-state amplitudes on levels ``0..dim-1`` (not renormalized)."""
    n = np.arange(dim)
    if beta == 0:
        return (n == 0).astype(complex)
    return np.exp(-abs(beta) ** 2 / 2 + n * np.log(abs(beta)) - 0.5 * gammaln(n + 1)
                  + 1j * n * np.angle(beta))


def three_mode_tensor(input: FockState, resource: TwoModeState) -> np.ndarray:
    """``T[m, n, k] = alpha_m c[n, k]`` for ``|psi>_1 |S>_23``."""
    return np.einsum("m,nk->mnk", input.amps, resource.amps)


def conditional_bruteforce(G: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """Project modes 1, 2 of the full tensor onto ``sum G[m, n] |m>|n>``."""
    return np.einsum("mn,mnk->k", G.conj(), tensor)


class OracleGamma:
    """Trapezoid-rule eigenstate coefficients on a whole outcome grid.

    The node spacing divides the grid's ``dX`` so ``<x + X|n>`` is a row
    shift of one precomputed table.
    """

    def __init__(self, grid: OutcomeGrid, N: int, refine: int = 4, margin: float = 5.0):
        self.h = grid.dX / refine
        self.refine = refine
        reach = math.sqrt(N + 0.5) + margin    # classical turning point plus tail
        self.n0 = int(math.ceil(reach / self.h))
        shift = int(round(grid.LX / grid.dX)) * refine
        self.base = self.h * np.arange(-self.n0, self.n0 + 1)
        full = self.h * np.arange(-self.n0 - shift, self.n0 + shift + 1)
        self.psi = quadrature_wavefunctions(N, full)
        self.offset = shift
        self.grid = grid

    def amplitudes(self, i: int, P: float) -> np.ndarray:
        """Coefficients at ``X = grid.X[i]``."""
        X = self.grid.X[i]
        k = int(round(X / self.grid.dX)) * self.refine
        A = self.psi[:, self.offset: self.offset + self.base.size]
        B = self.psi[:, self.offset + k: self.offset + k + self.base.size]
        w = self.h * np.exp(1j * P * (2 * self.base + X))
        return (A * w) @ B.T


def oracle_average_fidelity(alpha: complex, input: FockState, resource: TwoModeState,
                            grid: OutcomeGrid, gain: float = 1.0) -> tuple[float, float]:
    """Mean fidelity with displacement correction, and captured mass.

    ``input`` must be the (truncated) coherent state of amplitude ``alpha``;
    the fidelity of Bob's normalized state ``b`` after ``D(zeta)`` is
    ``|<alpha - zeta|b>|^2``.
    """
    d = input.trunc.dim
    T = three_mode_tensor(input, resource)
    og = OracleGamma(grid, input.trunc.N)
    num = den = 0.0
    for P in grid.P:
        for i, X in enumerate(grid.X):
            b = conditional_bruteforce(og.amplitudes(i, P), T)
            dens = float(np.vdot(b, b).real)
            if dens < 1e-300:
                continue
            zeta = gain * complex(-X, P)
            ov = np.vdot(coherent_amplitudes(alpha - zeta, d), b)
            num += abs(ov) ** 2          # = dens * F
            den += dens
    return float(num / den), float(den * grid.weight)
