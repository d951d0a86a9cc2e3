"""Deterministic seeded initial data and forcing.

The random stream is SplitMix64 (64-bit add-and-mix), consumed in a fixed
documented order, so any implementation can reproduce the exact fields:
draw 2*n^3*3 uniform doubles in row-major (x1, x2, x3, component) order,
Box-Muller them into white noise on the grid, transform, shape the spectrum
with a |k|^-2 envelope, truncate, project divergence-free, zero the mean and
rescale to the requested L2 amplitude.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, SpectralField, l2_norm, leray_project, physical_to_dealiased
from .lp import DyadicPartition, lambda_q

__all__ = ["SplitMix64", "random_solenoidal_field", "low_mode_forcing",
           "high_shell_perturbation"]

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Minimal reproducible 64-bit generator (SplitMix-style)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, count: int) -> np.ndarray:
        """count doubles in [0, 1) using the top 53 bits of each draw.

        The mix is counter-based, so a block of draws is vectorized over the
        successive internal states; the stream is identical to calling
        next_u64 count times.
        """
        idx = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + idx * np.uint64(0x9E3779B97F4A7C15)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * 0x9E3779B97F4A7C15) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def gaussian(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller, two per pair of uniforms."""
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        rad = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        ang = 2.0 * np.pi * u[:, 1]
        z = np.empty(2 * pairs)
        z[0::2] = rad * np.cos(ang)
        z[1::2] = rad * np.sin(ang)
        return z[:count]


def _white_noise_field(grid: Grid, seed: int) -> SpectralField:
    n = grid.n
    gen = SplitMix64(seed)
    vals = gen.gaussian(n ** 3 * 3).reshape(n, n, n, 3)
    return physical_to_dealiased(grid, vals)


def _shape_spectrum(f: SpectralField, cutoff: float, spectrum_power: float):
    g = f.grid
    kmag = np.maximum(g.k_mag, 1.0)
    envelope = np.where(g.k_mag <= cutoff, kmag ** spectrum_power, 0.0)
    f.coeffs *= envelope[..., None]


def random_solenoidal_field(grid: Grid, seed: int, amplitude: float,
                            cutoff: float | None = None,
                            spectrum_power: float = -2.0,
                            mean: tuple[float, float, float] = (0.0, 0.0, 0.0),
                            ) -> SpectralField:
    """Divergence-free random field with |k|^power envelope and given L2 size."""
    f = _white_noise_field(grid, seed)
    if cutoff is None:
        cutoff = float(grid.dealias_cutoff)
    _shape_spectrum(f, cutoff, spectrum_power)
    f = leray_project(f)
    f.coeffs[0, 0, 0, :] = 0.0
    size = l2_norm(f)
    if size > 0.0 and amplitude > 0.0:
        f.coeffs *= amplitude / size
    elif amplitude == 0.0:
        f.coeffs[:] = 0.0
    f.coeffs[0, 0, 0, :] = np.asarray(mean, dtype=np.float64)
    return f


def _helical_projection(f: SpectralField) -> None:
    """Project onto single-signed curl eigenmodes (Beltrami polarization).

    Maximally helical forcing is the standard driver for low-mode dynamo
    action; the projector P = (I - i k_hat x) / 2 keeps one circular
    polarization per wavevector and preserves Hermitian symmetry because
    k_hat flips sign with k.
    """
    g = f.grid
    kmag = np.maximum(g.k_mag, 1e-300)
    khat = np.stack([g.k1 / kmag, g.k2 / kmag, g.k3 / kmag], axis=-1)
    cross = np.cross(khat, f.coeffs)
    f.coeffs = 0.5 * (f.coeffs - 1j * cross)
    f.coeffs[0, 0, 0, :] = 0.0


def low_mode_forcing(grid: Grid, seed: int, amplitude: float) -> SpectralField:
    """Steady zero-mean divergence-free helical forcing on shells q <= 1."""
    if amplitude == 0.0:
        return SpectralField(grid, grid.zeros_spectral(), divergence_free=True)
    # support inside |k| <= 3 < lambda_2, i.e. shells -1..1 only
    f = random_solenoidal_field(grid, seed ^ 0x5F0C, amplitude,
                                cutoff=3.0, spectrum_power=0.0)
    _helical_projection(f)
    size = l2_norm(f)
    if size > 0.0:
        f.coeffs *= amplitude / size
    return f


def high_shell_perturbation(base: SpectralField, part: DyadicPartition,
                            seed: int, amplitude: float, Q: int,
                            spectrum_power: float = -2.0) -> SpectralField:
    """base plus a solenoidal perturbation supported strictly above shell Q.

    Only modes with |k| >= lambda_{Q+1} are touched, so low-mode agreement
    with base holds exactly at t = 0.  The default envelope matches the
    initial-data spectrum so the perturbation is not concentrated at the
    resolution limit.
    """
    g = base.grid
    pert = random_solenoidal_field(g, seed ^ 0xA1B2, 1.0,
                                   spectrum_power=spectrum_power)
    mask = g.k_mag >= lambda_q(Q + 1)
    pert.coeffs *= mask[..., None]
    size = l2_norm(pert)
    if size == 0.0:
        raise ValueError(f"no perturbable modes above shell {Q} on n = {g.n}")
    pert.coeffs *= amplitude / size
    out = base.copy()
    out.coeffs += pert.coeffs
    return out
