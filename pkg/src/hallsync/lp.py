"""Dyadic frequency decomposition, paraproducts and commutators.

Shells are indexed q = -1, 0, 1, ... with lambda_q = 2^q (lambda_{-1} taken
as 1/2 where a numeric value is needed).  The radial cutoff profile chi is 1
on [0, 3/4], 0 on [1, inf) and a smooth bump transition in between; the shell
multipliers are phi_{-1}(k) = chi(|k|) and
phi_q(k) = chi(|k| / 2^{q+1}) - chi(|k| / 2^q) for q >= 0, which telescope to
a dyadic partition of unity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Grid,
    SpectralField,
    curl,
    dealiased_product,
    l2_norm,
    norm,
    physical_to_dealiased,
    to_physical,
)

__all__ = [
    "chi",
    "DyadicPartition",
    "PartitionError",
    "build_partition",
    "lambda_q",
    "project",
    "lowpass",
    "lp_sobolev_norm",
    "bony_decompose",
    "commutator_convection",
    "commutator_hall",
    "bernstein_ratio",
]


class PartitionError(ValueError):
    pass


def lambda_q(q: int) -> float:
    """Dyadic scale 2^q; q = -1 maps to 1/2."""
    return 2.0 ** q


def chi(rho: np.ndarray) -> np.ndarray:
    """Smooth radial cutoff: 1 for rho <= 3/4, 0 for rho >= 1."""
    rho = np.asarray(rho, dtype=np.float64)
    t = 4.0 * (rho - 0.75)
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        gc = np.where(t < 1.0,
                      np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    out = gc / (g + gc)
    return out if out.shape else float(out)


@dataclass
class DyadicPartition:
    """Tabulated shell multipliers phi_q and lowpass multipliers on a grid."""

    grid: Grid
    q_max: int
    phi_table: np.ndarray = field(repr=False)   # (q_max + 2, n, n, n), q = -1..q_max
    chi_table: np.ndarray = field(repr=False)   # (q_max + 2, n, n, n), lowpass per Q

    def phi(self, q: int) -> np.ndarray:
        if not -1 <= q <= self.q_max:
            raise PartitionError(f"shell index {q} outside [-1, {self.q_max}]")
        return self.phi_table[q + 1]

    def chi_lowpass(self, Q: int) -> np.ndarray:
        """Multiplier chi(|k| / 2^{Q+1}), the exact telescoped sum of shells <= Q."""
        if not -1 <= Q <= self.q_max:
            raise PartitionError(f"lowpass index {Q} outside [-1, {self.q_max}]")
        return self.chi_table[Q + 1]

    def shells(self):
        return range(-1, self.q_max + 1)


def build_partition(grid: Grid) -> DyadicPartition:
    """Tabulate the dyadic partition with its top shell inside the dealiased band."""
    q_max = int(math.floor(math.log2(grid.dealias_cutoff))) - 1
    if q_max < 2:
        raise PartitionError(
            f"grid n = {grid.n} too small for a dyadic partition (q_max = {q_max})"
        )
    kmag = grid.k_mag
    chis = np.stack([chi(kmag / 2.0 ** (q + 1)) for q in range(-1, q_max + 1)])
    phis = np.empty_like(chis)
    phis[0] = chi(kmag)  # q = -1
    for i in range(1, q_max + 2):
        phis[i] = chis[i] - chis[i - 1]
    return DyadicPartition(grid, q_max, phis, chis)


def project(f: SpectralField, q: int, part: DyadicPartition) -> SpectralField:
    """Littlewood-Paley projection onto shell q."""
    return SpectralField(f.grid, part.phi(q)[..., None] * f.coeffs,
                         f.divergence_free)


def lowpass(f: SpectralField, Q: int, part: DyadicPartition) -> SpectralField:
    """Sum of shells q <= Q, applied as the single telescoped multiplier."""
    if Q < -1:
        return SpectralField(f.grid, np.zeros_like(f.coeffs), f.divergence_free)
    return SpectralField(f.grid, part.chi_lowpass(Q)[..., None] * f.coeffs,
                         f.divergence_free)


def band_limit(f: SpectralField, part: DyadicPartition) -> SpectralField:
    """Restrict to the ball where the partition sums to one exactly."""
    mask = (part.grid.k_mag <= 0.75 * 2.0 ** (part.q_max + 1))
    return SpectralField(f.grid, mask[..., None] * f.coeffs, f.divergence_free)


def shell_l2_norms(f: SpectralField, part: DyadicPartition) -> np.ndarray:
    """|| f_q ||_2 for q = -1 .. q_max as one Parseval pass."""
    e = np.abs(f.coeffs) ** 2
    esum = e.sum(axis=-1)
    return np.sqrt(np.tensordot(part.phi_table ** 2, esum, axes=3))


def lp_sobolev_norm(f: SpectralField, s: float, part: DyadicPartition) -> float:
    """Dyadic-block Sobolev norm (sum_q lambda_q^{2s} ||f_q||_2^2)^(1/2)."""
    norms = shell_l2_norms(f, part)
    lams = np.array([lambda_q(q) for q in part.shells()])
    return float(np.sqrt(np.sum(lams ** (2.0 * s) * norms ** 2)))


def _shell_values(f: SpectralField, part: DyadicPartition) -> list[np.ndarray]:
    """Physical-space values of every shell projection, q = -1 .. q_max."""
    return [
        to_physical(project(f, q, part), check=False).values
        for q in part.shells()
    ]


def bony_decompose(a: SpectralField, b: SpectralField, part: DyadicPartition):
    """Paraproduct split of the componentwise product of a and b.

    Returns (lowhigh, highlow, resonant) with
      lowhigh  = sum_q a_{<= q-2} b_q,
      highlow  = sum_q a_q b_{<= q-2},
      resonant = sum_q (sum_{|p-q| <= 1} a_p) b_q,
    every term dealiased.  For band-limited inputs the three parts sum to the
    dealiased pointwise product.
    """
    if a.grid.n != b.grid.n:
        raise PartitionError("grid mismatch in paraproduct")
    a_sh = _shell_values(a, part)
    b_sh = _shell_values(b, part)
    # running lowpass sums a_{<= q} in physical space (telescoping is exact)
    a_low = np.cumsum(np.stack(a_sh), axis=0)
    b_low = np.cumsum(np.stack(b_sh), axis=0)
    nsh = len(a_sh)
    lowhigh = np.zeros_like(a_sh[0])
    highlow = np.zeros_like(a_sh[0])
    resonant = np.zeros_like(a_sh[0])
    for i in range(nsh):  # i = q + 1
        if i >= 2:
            lowhigh += a_low[i - 2] * b_sh[i]
            highlow += a_sh[i] * b_low[i - 2]
        tilde = a_sh[i].copy()
        if i > 0:
            tilde += a_sh[i - 1]
        if i + 1 < nsh:
            tilde += a_sh[i + 1]
        resonant += tilde * b_sh[i]
    g = a.grid
    return (
        physical_to_dealiased(g, lowhigh),
        physical_to_dealiased(g, highlow),
        physical_to_dealiased(g, resonant),
    )


def commutator_convection(q: int, u: SpectralField, vp: SpectralField, p: int,
                          part: DyadicPartition) -> SpectralField:
    """Defect between localizing and transporting: the advective commutator.

    Returns D_q(u_{<= p-2} . grad vp) - u_{<= p-2} . grad D_q vp with all
    products dealiased; vp is expected to be the shell-p piece of the
    transported field.
    """
    u_low = lowpass(u, p - 2, part)
    term1 = project(dealiased_product(u_low, vp, "dot_grad"), q, part)
    term2 = dealiased_product(u_low, project(vp, q, part), "dot_grad")
    return SpectralField(u.grid, term1.coeffs - term2.coeffs)


def commutator_hall(q: int, b: SpectralField, hp: SpectralField, p: int,
                    part: DyadicPartition) -> SpectralField:
    """Analogous commutator for the cross-curl structure of the Hall term."""
    b_low = lowpass(b, p - 2, part)
    term1 = project(dealiased_product(b_low, curl(hp), "cross"), q, part)
    term2 = dealiased_product(b_low, curl(project(hp, q, part)), "cross")
    return SpectralField(b.grid, term1.coeffs - term2.coeffs)


def commutator_convection_bound(u: SpectralField, vp: SpectralField, p: int,
                                part: DyadicPartition,
                                r2: float = 2.0) -> float:
    """Right-hand side ||vp||_{r2} * sum_{p' <= p-2} lambda_{p'} ||u_{p'}||_inf."""
    tail = 0.0
    for pp in part.shells():
        if pp > p - 2:
            break
        tail += lambda_q(pp) * norm(project(u, pp, part), "Linf")
    vnorm = l2_norm(vp) if r2 == 2.0 else norm(vp, "Lr", r=r2)
    return vnorm * tail


def commutator_hall_bound(b: SpectralField, hp: SpectralField, p: int,
                          part: DyadicPartition, r: float = 2.0) -> float:
    """Right-hand side ||hp||_r * sum_{p' <= p-2} lambda_{p'} ||b_{p'}||_inf."""
    tail = 0.0
    for pp in part.shells():
        if pp > p - 2:
            break
        tail += lambda_q(pp) * norm(project(b, pp, part), "Linf")
    hnorm = l2_norm(hp) if r == 2.0 else norm(hp, "Lr", r=r)
    return hnorm * tail


def bernstein_ratio(f: SpectralField, q: int, r: float, s: float,
                    part: DyadicPartition) -> float:
    """||f_q||_r / (lambda_q^{3(1/r - 1/s)} ||f_q||_s) for s >= r >= 1."""
    if r < 1.0 or (s < r and not math.isinf(s)):
        raise ValueError(f"need s >= r >= 1, got r = {r}, s = {s}")
    fq = project(f, q, part)
    inv_s = 0.0 if math.isinf(s) else 1.0 / s
    nr = norm(fq, "Linf") if math.isinf(r) else norm(fq, "Lr", r=r)
    ns = norm(fq, "Linf") if math.isinf(s) else norm(fq, "Lr", r=s)
    if ns == 0.0:
        raise ZeroDivisionError(f"shell {q} is empty; ratio undefined")
    return nr / (lambda_q(q) ** (3.0 * (1.0 / r - inv_s)) * ns)
