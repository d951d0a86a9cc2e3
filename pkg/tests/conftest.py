import numpy as np
import pytest

from hallsync.grid import Grid, SpectralField, physical_to_dealiased, to_physical
from hallsync.lp import band_limit, build_partition


@pytest.fixture(scope="session")
def grid32():
    return Grid(32)


@pytest.fixture(scope="session")
def part32(grid32):
    return build_partition(grid32)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64)


@pytest.fixture(scope="session")
def part64(grid64):
    return build_partition(grid64)


def random_hermitian_field(grid, seed, dealias=True):
    """Random real-valued vector field as a spectral object."""
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((grid.n,) * 3 + (3,))
    f = physical_to_dealiased(grid, vals)
    if not dealias:
        # keep full spectrum except Nyquist planes, still Hermitian
        import scipy.fft as sfft
        c = sfft.fftn(vals, axes=(0, 1, 2)) / grid.n ** 3
        nyq = grid.n // 2
        c[nyq, :, :] = 0.0
        c[:, nyq, :] = 0.0
        c[:, :, nyq] = 0.0
        return SpectralField(grid, c)
    return f


def random_band_limited_field(grid, part, seed):
    return band_limit(random_hermitian_field(grid, seed), part)


def single_mode_field(grid, k, comp, amplitude=1.0):
    """Real field amplitude*2*cos(2 pi k.x) e_comp via a conjugate mode pair."""
    f = SpectralField(grid, grid.zeros_spectral())
    idx = tuple(ki % grid.n for ki in k)
    nidx = tuple((-ki) % grid.n for ki in k)
    f.coeffs[idx + (comp,)] = amplitude
    f.coeffs[nidx + (comp,)] = amplitude
    return f
