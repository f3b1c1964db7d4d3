"""Two-mode squeezed resource states and their entropy of entanglement."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import TruncationWarning, ValidationError
from .fock import TruncationConfig, TwoModeState, partial_trace, von_neumann_entropy

__all__ = [
    "SqueezeParam", "squeezed_state", "entropy_closed_form", "entropy_numeric",
    "entropy_sweep", "auto_truncation", "truncation_tail", "EntropySweep",
]

SLOPE_ASYMPTOTE = 2 / math.log(2)


@dataclass(frozen=True)
class SqueezeParam:
    r: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValidationError(f"squeezing parameter must be >= 0, got {self.r}")

    @property
    def lam(self) -> float:
        return math.tanh(self.r)

    @property
    def variance_factor(self) -> float:
        """Noise reduction ``exp(-2r)`` of the squeezed quadrature combination."""
        return math.exp(-2 * self.r)


def _param(r) -> SqueezeParam:
    return r if isinstance(r, SqueezeParam) else SqueezeParam(float(r))


def truncation_tail(r, N: int) -> float:
    """Weight beyond level ``N`` relative to the retained weight."""
    lam2 = _param(r).lam ** 2
    if lam2 >= 1:
        return math.inf
    tail = lam2 ** (N + 1)
    return tail / (1 - tail)


def auto_truncation(r, tol: float = 1e-12) -> int:
    """Smallest ``N`` with ``tanh(r)^(2(N+1)) / (1 - tanh(r)^2) < tol``."""
    lam2 = _param(r).lam ** 2
    if lam2 == 0:
        return 0
    if lam2 >= 1:
        raise ValidationError("no finite truncation for infinite squeezing")
    # solve lam2^(N+1) < tol (1 - lam2)
    n = math.ceil(math.log(tol * (1 - lam2)) / math.log(lam2)) - 1
    n = max(n, 0)
    while lam2 ** (n + 1) / (1 - lam2) >= tol:
        n += 1
    while n > 0 and lam2 ** n / (1 - lam2) < tol:
        n -= 1
    return n


def squeezed_state(r, trunc: TruncationConfig) -> TwoModeState:
    """Schmidt-form state ``sum_n tanh(r)^n |n>|n>`` renormalized on ``0..N``.

    ``r = inf`` gives equal amplitudes, the maximally entangled state of the
    truncated space. Warns when the discarded tail exceeds 1e-12.
    """
    p = _param(r)
    lam = p.lam
    n = np.arange(trunc.dim)
    amps = np.power(lam, n) if lam < 1 else np.ones(trunc.dim)
    tail = truncation_tail(p, trunc.N)
    if lam < 1 and tail > 1e-12:
        warnings.warn(
            f"N={trunc.N} truncates squeezed state at r={p.r}: relative tail "
            f"weight {tail:.2e}", TruncationWarning, stacklevel=2)
    amps = amps / np.linalg.norm(amps)
    return TwoModeState(np.diag(amps), trunc)


def entropy_closed_form(r) -> float:
    """``cosh^2 r log2 cosh^2 r - sinh^2 r log2 sinh^2 r`` in bits."""
    r = _param(r).r
    c2, s2 = math.cosh(r) ** 2, math.sinh(r) ** 2
    return float((xlogy(c2, c2) - xlogy(s2, s2)) / math.log(2))


def entropy_numeric(r, trunc: TruncationConfig) -> float:
    """Von Neumann entropy of the reduced state of the truncated squeezed state."""
    return von_neumann_entropy(partial_trace(squeezed_state(r, trunc), "second"))


@dataclass(frozen=True)
class EntropySweep:
    r: np.ndarray
    closed: np.ndarray
    numeric: np.ndarray
    N: int

    def slope(self, lo: float = 1.0, hi: float = 2.0) -> float:
        """Least-squares slope of the closed-form curve on ``[lo, hi]``."""
        sel = (self.r >= lo - 1e-12) & (self.r <= hi + 1e-12)
        if sel.sum() < 2:
            raise ValidationError(f"fewer than two sweep points in [{lo}, {hi}]")
        return float(np.polyfit(self.r[sel], self.closed[sel], 1)[0])

    def end_slope(self) -> float:
        """Finite-difference slope over the last sweep interval."""
        return float((self.closed[-1] - self.closed[-2]) / (self.r[-1] - self.r[-2]))

    def at(self, r: float) -> tuple[float, float, float]:
        """Row nearest to ``r``."""
        i = int(np.argmin(np.abs(self.r - r)))
        return float(self.r[i]), float(self.closed[i]), float(self.numeric[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "E_closed_bits", "E_numeric_bits"])
        for row in zip(self.r, self.closed, self.numeric):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def entropy_sweep(r_min: float, r_max: float, steps: int,
                  trunc: TruncationConfig | None = None) -> EntropySweep:
    """Entropy of entanglement on ``steps`` evenly spaced values in ``[r_min, r_max]``.

    Without ``trunc`` each row gets its own cutoff from
    :func:`auto_truncation`, so the numeric column matches the closed form to
    ~1e-10; ``EntropySweep.N`` then reports the largest cutoff used.
    """
    if steps < 2:
        raise ValidationError("steps must be >= 2")
    if not 0 <= r_min <= r_max:
        raise ValidationError(f"need 0 <= r_min <= r_max, got [{r_min}, {r_max}]")
    rs = np.linspace(r_min, r_max, steps)
    rs[0], rs[-1] = r_min, r_max
    truncs = [trunc or TruncationConfig(auto_truncation(r)) for r in rs]
    closed = np.array([entropy_closed_form(r) for r in rs])
    numeric = np.array([entropy_numeric(r, t) for r, t in zip(rs, truncs)])
    return EntropySweep(rs, closed, numeric, max(t.N for t in truncs))
