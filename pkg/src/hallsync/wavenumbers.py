"""Per-solution determining wavenumbers from dyadic shell norms.

For a velocity-type field the reading is the smallest shell index q >= 0 with

    lambda_p^(-1 + 3/r) ||u_p||_r   < c_r kappa   for every resolved p > q,
    lambda_q^(-1 + 3/r) ||u_<=q||_r < c_r kappa,

and for a magnetic-type field

    lambda_{p-q}^delta ||b_p||_inf  < c_r kappa   for every resolved p > q,
    ||b_<=q||_inf                   < c_r kappa.

Shells above the partition's q_max are treated as absent (band-limited
convention).  If no q qualifies the reading is the UNRESOLVED sentinel; the
scale kappa is min(mu, nu, mu/eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .grid import SpectralField
from .lp import DyadicPartition, lambda_q

__all__ = [
    "WavenumberParams",
    "ShellReading",
    "SENTINEL_UNRESOLVED",
    "lambda_u",
    "lambda_b",
    "pairwise_max",
    "BoundMonitor",
]

#: Sentinel shell index: no admissible q at this resolution.
SENTINEL_UNRESOLVED: None = None


@dataclass(frozen=True)
class WavenumberParams:
    r: float
    delta: float
    c_r: float
    kappa: float

    def __post_init__(self):
        if not 2.0 < self.r < 3.0:
            raise ValueError(f"Lebesgue exponent r must lie in (2,3), got {self.r}")
        if self.delta <= 1.0:
            raise ValueError(f"decay exponent delta must exceed 1, got {self.delta}")
        if self.c_r <= 0.0 or self.kappa <= 0.0:
            raise ValueError("c_r and kappa must be positive")

    @classmethod
    def from_coefficients(cls, r: float, delta: float, c_r: float,
                          nu: float, mu: float, eta: float) -> "WavenumberParams":
        kappa = min(mu, nu) if eta == 0.0 else min(mu, nu, mu / eta)
        return cls(r, delta, c_r, kappa)

    @property
    def threshold(self) -> float:
        return self.c_r * self.kappa


@dataclass(frozen=True)
class ShellReading:
    """Resolved shell index (q = None encodes the sentinel) with diagnostics."""

    q: Optional[int]
    margin: float = math.nan        # threshold minus the worst passing quantity
    first_fail_shell: Optional[int] = None
    first_fail_condition: str = ""

    @property
    def resolved(self) -> bool:
        return self.q is not None

    @property
    def lam(self) -> float:
        return math.inf if self.q is None else lambda_q(self.q)


def _shell_and_lowpass_mags(f: SpectralField, part: DyadicPartition):
    """Pointwise Euclidean magnitudes of every shell and running lowpass.

    All shells share one batched inverse transform; the running lowpass is
    the cumulative sum of the shell samples in ascending q, exactly as if
    each projection were synthesized on its own.
    """
    g = f.grid
    masked = part.phi_table[..., None] * f.coeffs[None]
    vals = (sfft.ifftn(masked, axes=(1, 2, 3)) * g.n ** 3).real
    shell_mags = list(np.sqrt(np.einsum("s...j,s...j->s...", vals, vals)))
    run = np.cumsum(vals, axis=0)
    low_mags = list(np.sqrt(np.einsum("s...j,s...j->s...", run, run)))
    return shell_mags, low_mags


def lambda_u(u: SpectralField, p: WavenumberParams,
             part: DyadicPartition) -> ShellReading:
    """Velocity-type determining wavenumber reading."""
    shell_mags, low_mags = _shell_and_lowpass_mags(u, part)
    expo = -1.0 + 3.0 / p.r
    shell_term = {
        q: lambda_q(q) ** expo * float(np.mean(shell_mags[q + 1] ** p.r)) ** (1.0 / p.r)
        for q in range(0, part.q_max + 1)
    }
    low_term = {
        q: lambda_q(q) ** expo * float(np.mean(low_mags[q + 1] ** p.r)) ** (1.0 / p.r)
        for q in range(0, part.q_max + 1)
    }
    return _scan(shell_term, low_term, part.q_max, p.threshold)


def lambda_b(b: SpectralField, p: WavenumberParams,
             part: DyadicPartition) -> ShellReading:
    """Magnetic-type determining wavenumber reading."""
    shell_mags, low_mags = _shell_and_lowpass_mags(b, part)
    shell_inf = {q: float(np.max(shell_mags[q + 1]))
                 for q in range(0, part.q_max + 1)}
    low_inf = {q: float(np.max(low_mags[q + 1]))
               for q in range(0, part.q_max + 1)}

    def weighted(q):
        # high-shell condition values for this candidate q
        return {pp: lambda_q(pp - q) ** p.delta * shell_inf[pp]
                for pp in range(q + 1, part.q_max + 1)}

    shell_term_by_q = {q: weighted(q) for q in range(0, part.q_max + 1)}
    return _scan_weighted(shell_term_by_q, low_inf, part.q_max, p.threshold)


def _scan(shell_term, low_term, q_max, threshold) -> ShellReading:
    for q in range(0, q_max + 1):
        high = {pp: shell_term[pp] for pp in range(q + 1, q_max + 1)}
        reading = _admit(q, high, low_term[q], threshold)
        if reading is not None:
            return reading
    return _sentinel(shell_term, low_term, q_max, threshold)


def _scan_weighted(shell_term_by_q, low_term, q_max, threshold) -> ShellReading:
    for q in range(0, q_max + 1):
        reading = _admit(q, shell_term_by_q[q], low_term[q], threshold)
        if reading is not None:
            return reading
    flat = {q: max(shell_term_by_q[q].values(), default=0.0)
            for q in shell_term_by_q}
    return _sentinel(flat, low_term, q_max, threshold)


def _admit(q, high_terms, low_value, threshold) -> Optional[ShellReading]:
    if any(v >= threshold for v in high_terms.values()):
        return None
    if low_value >= threshold:
        return None
    worst = max(list(high_terms.values()) + [low_value])
    return ShellReading(q, margin=threshold - worst)


def _sentinel(shell_term, low_term, q_max, threshold) -> ShellReading:
    # report why the largest candidate was rejected
    q = q_max
    if low_term[q] >= threshold:
        return ShellReading(SENTINEL_UNRESOLVED, first_fail_shell=q,
                            first_fail_condition="lowpass")
    bad = max((v, pp) for pp, v in shell_term.items())[1]
    return ShellReading(SENTINEL_UNRESOLVED, first_fail_shell=bad,
                        first_fail_condition="shell")


def pairwise_max(a: ShellReading, b: ShellReading) -> ShellReading:
    """Shell-wise max of two readings; the sentinel absorbs."""
    if not a.resolved or not b.resolved:
        bad = a if not a.resolved else b
        return ShellReading(SENTINEL_UNRESOLVED,
                            first_fail_shell=bad.first_fail_shell,
                            first_fail_condition=bad.first_fail_condition)
    return a if a.q >= b.q else b


@dataclass
class BoundMonitor:
    """Accumulates the pointwise and time-averaged wavenumber bounds.

    The pointwise check: whenever the magnetic reading exceeds lambda_0 = 1,
    the sup-norm of grad b must be at least c_r kappa Lambda.  Time averages
    of Lambda^2 and ||grad b||_inf^2 support the end-of-run comparison.
    """

    params: WavenumberParams
    time_weight: float = 0.0
    lambda_sq_integral: float = 0.0
    grad_b_sq_integral: float = 0.0
    samples: int = 0
    skipped: int = 0
    all_pointwise_ok: bool = True
    worst_ratio: float = math.inf   # min of ||grad b||_inf / (c_r kappa Lambda)

    def update(self, reading: ShellReading, linf_grad_b: float, dt: float):
        """Fold in one sample; returns (pointwise_ok, margin)."""
        if not reading.resolved:
            self.skipped += 1
            return None, math.nan
        lam = reading.lam
        self.samples += 1
        self.time_weight += dt
        self.lambda_sq_integral += lam ** 2 * dt
        self.grad_b_sq_integral += linf_grad_b ** 2 * dt
        scale = self.params.threshold * lam
        margin = linf_grad_b - scale
        if lam > 1.0:
            self.worst_ratio = min(self.worst_ratio, linf_grad_b / scale)
            ok = linf_grad_b >= scale
        else:
            ok = True
        self.all_pointwise_ok &= ok
        return ok, margin

    @property
    def mean_lambda_sq(self) -> float:
        return self.lambda_sq_integral / self.time_weight if self.time_weight else 0.0

    @property
    def mean_grad_b_sq(self) -> float:
        return self.grad_b_sq_integral / self.time_weight if self.time_weight else 0.0

    def average_bound_ok(self, slack: float = 4.0) -> bool:
        """<Lambda^2> <= slack * <||grad b||_inf^2> / (c_r kappa)^2."""
        rhs = slack * self.mean_grad_b_sq / self.params.threshold ** 2
        return self.mean_lambda_sq <= rhs
