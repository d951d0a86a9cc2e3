"""Periodic grid, spectral fields and the basic Fourier-space operators.

Convention: the domain is the unit torus [0,1)^3, fields are expanded as
u(x) = sum_k c(k) exp(i 2 pi k.x) over integer wavevectors k, so derivatives
are multiplication by i 2 pi k.  Coefficient arrays are complex128 with shape
(n, n, n, 3); axis order is (k1, k2, k3, component) in numpy FFT ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "SpectralField",
    "PhysicalField",
    "GridError",
    "HermitianSymmetryError",
    "to_physical",
    "to_spectral",
    "curl",
    "gradient_of_component",
    "laplacian",
    "divergence",
    "leray_project",
    "dealiased_product",
    "norm",
    "l2_norm",
    "h1_seminorm",
    "linf_gradient_norm",
]


class GridError(ValueError):
    pass


class HermitianSymmetryError(ValueError):
    """Raised when a field that should be real-valued is not."""


@dataclass(frozen=True)
class Grid:
    """Uniform n^3 grid on the unit torus with its wavenumber tables."""

    n: int
    k1: np.ndarray = field(repr=False, compare=False, default=None)
    k2: np.ndarray = field(repr=False, compare=False, default=None)
    k3: np.ndarray = field(repr=False, compare=False, default=None)
    k_sq: np.ndarray = field(repr=False, compare=False, default=None)
    k_mag: np.ndarray = field(repr=False, compare=False, default=None)
    dealias_mask: np.ndarray = field(repr=False, compare=False, default=None)
    ik1: np.ndarray = field(repr=False, compare=False, default=None)
    ik2: np.ndarray = field(repr=False, compare=False, default=None)
    ik3: np.ndarray = field(repr=False, compare=False, default=None)
    k_sq_safe: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        n = self.n
        if n < 16 or n % 2 != 0:
            raise GridError(f"grid size must be even and >= 16, got {n}")
        k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
        k_sq = (k1 * k1 + k2 * k2 + k3 * k3).astype(np.float64)
        cut = self.dealias_cutoff
        mask = (np.abs(k1) <= cut) & (np.abs(k2) <= cut) & (np.abs(k3) <= cut)
        for name, arr in (
            ("k1", k1), ("k2", k2), ("k3", k3),
            ("k_sq", k_sq), ("k_mag", np.sqrt(k_sq)), ("dealias_mask", mask),
            ("ik1", 2j * np.pi * k1), ("ik2", 2j * np.pi * k2),
            ("ik3", 2j * np.pi * k3),
            ("k_sq_safe", np.where(k_sq == 0.0, 1.0, k_sq)),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k_max(self) -> int:
        return self.n // 2 - 1

    @property
    def dealias_cutoff(self) -> int:
        return self.n // 3

    def spectral_shape(self):
        return (self.n, self.n, self.n, 3)

    def zeros_spectral(self) -> np.ndarray:
        return np.zeros(self.spectral_shape(), dtype=np.complex128)


@dataclass
class SpectralField:
    """Three-component vector field stored as Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape():
            raise GridError(
                f"coefficient shape {self.coeffs.shape} does not match grid "
                f"{self.grid.spectral_shape()}"
            )
        if self.coeffs.dtype != np.complex128:
            self.coeffs = self.coeffs.astype(np.complex128)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.divergence_free)

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[0, 0, 0, :]


@dataclass
class PhysicalField:
    """Pointwise real values of a vector field, shape (n, n, n, 3)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n,) * 3 + (3,):
            raise GridError(f"value shape {self.values.shape} invalid")


def hermitian_residual(coeffs: np.ndarray) -> float:
    """Max deviation of coeffs from the reality condition c(-k) = conj(c(k))."""
    reflected = np.conj(np.roll(coeffs[::-1, ::-1, ::-1, :], 1, axis=(0, 1, 2)))
    return float(np.max(np.abs(coeffs - reflected)))


def _check_hermitian(f: SpectralField, tol: float = 1e-10):
    scale = float(np.max(np.abs(f.coeffs)))
    if scale == 0.0:
        return
    res = hermitian_residual(f.coeffs)
    if res > tol * max(scale, 1.0):
        raise HermitianSymmetryError(
            f"field is not conjugate-symmetric (residual {res:.3e})"
        )


def to_physical(f: SpectralField, check: bool = True) -> PhysicalField:
    """Inverse Fourier synthesis onto the grid points."""
    if check:
        _check_hermitian(f)
    n3 = f.grid.n ** 3
    vals = sfft.ifftn(f.coeffs, axes=(0, 1, 2)) * n3
    return PhysicalField(f.grid, np.ascontiguousarray(vals.real))


def to_spectral(p: PhysicalField) -> SpectralField:
    c = sfft.fftn(p.values, axes=(0, 1, 2)) / p.grid.n ** 3
    return SpectralField(p.grid, c)


def _curl_coeffs(g: Grid, c: np.ndarray) -> np.ndarray:
    ik1, ik2, ik3 = g.ik1, g.ik2, g.ik3
    out = np.empty_like(c)
    out[..., 0] = ik2 * c[..., 2] - ik3 * c[..., 1]
    out[..., 1] = ik3 * c[..., 0] - ik1 * c[..., 2]
    out[..., 2] = ik1 * c[..., 1] - ik2 * c[..., 0]
    return out


def curl(f: SpectralField) -> SpectralField:
    """Spectral curl; the output is divergence-free by construction."""
    return SpectralField(f.grid, _curl_coeffs(f.grid, f.coeffs), divergence_free=True)


def laplacian(f: SpectralField) -> SpectralField:
    mult = (-4.0 * np.pi ** 2) * f.grid.k_sq
    return SpectralField(f.grid, mult[..., None] * f.coeffs, f.divergence_free)


def divergence(f: SpectralField) -> np.ndarray:
    """Scalar divergence spectrum i 2 pi k . c(k)."""
    g = f.grid
    c = f.coeffs
    return 2j * np.pi * (g.k1 * c[..., 0] + g.k2 * c[..., 1] + g.k3 * c[..., 2])


def gradient_of_component(f: SpectralField, comp: int) -> SpectralField:
    """Gradient of a single component, returned as a 3-vector field."""
    g = f.grid
    c = f.coeffs[..., comp]
    out = g.zeros_spectral()
    out[..., 0] = 2j * np.pi * g.k1 * c
    out[..., 1] = 2j * np.pi * g.k2 * c
    out[..., 2] = 2j * np.pi * g.k3 * c
    return SpectralField(g, out)


def leray_project(f: SpectralField) -> SpectralField:
    """Project onto divergence-free fields; the k = 0 mode is kept as is."""
    g = f.grid
    c = f.coeffs
    kdotc = (g.k1 * c[..., 0] + g.k2 * c[..., 1] + g.k3 * c[..., 2]) / g.k_sq_safe
    out = np.empty_like(c)
    out[..., 0] = c[..., 0] - g.k1 * kdotc
    out[..., 1] = c[..., 1] - g.k2 * kdotc
    out[..., 2] = c[..., 2] - g.k3 * kdotc
    out[0, 0, 0, :] = c[0, 0, 0, :]
    return SpectralField(g, out, divergence_free=True)


def _require_same_grid(a, b):
    if a.grid.n != b.grid.n:
        raise GridError(f"grid mismatch: {a.grid.n} vs {b.grid.n}")


def _to_values(f) -> np.ndarray:
    if isinstance(f, PhysicalField):
        return f.values
    return to_physical(f, check=False).values


def dealias(g: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Zero every mode with any |k_i| above the 2/3-rule cutoff (in place)."""
    coeffs[~g.dealias_mask] = 0.0
    return coeffs


def physical_to_dealiased(g: Grid, values: np.ndarray) -> SpectralField:
    c = sfft.fftn(values, axes=(0, 1, 2)) / g.n ** 3
    return SpectralField(g, dealias(g, c))


def dealiased_product(a, b, op: str) -> SpectralField:
    """Quadratic nonlinearity evaluated pointwise, 2/3-rule dealiased.

    op = "cross":    a x b
    op = "dot_grad": (a . grad) b, the gradient taken spectrally
    """
    _require_same_grid(a, b)
    g = a.grid if isinstance(a, SpectralField) else b.grid
    av = _to_values(a)
    if op == "cross":
        bv = _to_values(b)
        prod = np.cross(av, bv)
    elif op == "dot_grad":
        if not isinstance(b, SpectralField):
            b = to_spectral(b)
        prod = np.zeros_like(av)
        for i in range(3):
            gradbi = to_physical(gradient_of_component(b, i), check=False).values
            prod[..., i] = np.einsum("...j,...j->...", av, gradbi)
    else:
        raise ValueError(f"unknown product kind {op!r}")
    return physical_to_dealiased(g, prod)


# ----------------------------------------------------------------------------
# norms


def l2_norm(f: SpectralField) -> float:
    """L2 norm over the unit-volume torus, computed by Parseval."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def h1_seminorm(f: SpectralField) -> float:
    """|| grad f ||_2 via the spectral sum."""
    w = 4.0 * np.pi ** 2 * f.grid.k_sq
    return float(np.sqrt(np.sum(w[..., None] * np.abs(f.coeffs) ** 2)))


def norm(f: SpectralField, kind: str, r: float | None = None,
         s: float | None = None) -> float:
    """Field norm of the requested kind.

    kind = "L2" | "Linf" | "Lr" (needs r >= 1) | "Hs" (needs s).
    Pointwise vector magnitude is Euclidean over the 3 components; Lebesgue
    norms are grid means (the torus has unit volume).
    """
    if kind == "Hs":
        if s is None:
            raise ValueError("Hs norm needs the index s")
        w = (1.0 + 4.0 * np.pi ** 2 * f.grid.k_sq) ** s
        return float(np.sqrt(np.sum(w[..., None] * np.abs(f.coeffs) ** 2)))
    vals = to_physical(f, check=False).values
    mag = np.sqrt(np.einsum("...j,...j->...", vals, vals))
    if kind == "Linf":
        return float(np.max(mag))
    if kind == "L2":
        r = 2.0
    elif kind == "Lr":
        if r is None:
            raise ValueError("Lr norm needs the exponent r")
        if r < 1.0:
            raise ValueError(f"Lebesgue exponent must be >= 1, got {r}")
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    return float(np.mean(mag ** r) ** (1.0 / r))


def linf_gradient_norm(f: SpectralField) -> float:
    """Max over grid points of the Frobenius norm of the Jacobian."""
    g = f.grid
    total = np.zeros((g.n,) * 3)
    for i in range(3):
        gv = to_physical(gradient_of_component(f, i), check=False).values
        total += np.einsum("...j,...j->...", gv, gv)
    return float(np.sqrt(np.max(total)))
