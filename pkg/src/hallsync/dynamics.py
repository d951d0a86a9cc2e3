"""Hall-MHD and electron-MHD right-hand sides and time integration.

Momentum:   u_t = P(-(u.grad)u + (b.grad)b + f) + nu Lap u
Induction:  b_t = curl(u x b) - eta curl((curl b) x b) + mu Lap b
EMHD:       b_t =             - eta curl((curl b) x b) + mu Lap b

The induction equation is kept in curl form so div b = 0 holds exactly in
spectral space.  Time stepping is integrating-factor RK4: the diffusion
multipliers exp(-4 pi^2 nu |k|^2 dt) are applied exactly, everything else is
explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .grid import (
    Grid,
    SpectralField,
    curl,
    dealias,
    dealiased_product,
    h1_seminorm,
    l2_norm,
    leray_project,
    linf_gradient_norm,
    norm,
)

__all__ = [
    "SolverParams",
    "State",
    "EnergyReport",
    "BlowUpError",
    "hall_term",
    "rhs_momentum",
    "rhs_induction",
    "rhs_emhd",
    "step",
    "step_emhd",
    "energy_report",
    "cfl_dt",
]


class BlowUpError(RuntimeError):
    """Non-finite norm detected; the run cannot continue."""


@dataclass
class SolverParams:
    nu: float
    mu: float
    eta: float
    dt: float
    t_end: float
    forcing: Optional[SpectralField] = None
    output_every: int = 10

    def __post_init__(self):
        if self.nu <= 0 or self.mu <= 0:
            raise ValueError("viscosity and resistivity must be positive")
        if self.eta < 0:
            raise ValueError("Hall coefficient must be nonnegative")
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.forcing is not None:
            f = self.forcing
            if np.max(np.abs(f.mean_mode())) > 1e-13:
                raise ValueError("forcing must have zero mean")


@dataclass
class State:
    t: float
    u: SpectralField
    b: SpectralField


@dataclass
class EnergyReport:
    E_u: float
    E_b: float
    D_u: float
    D_b: float
    linf_grad_b: float


# ----------------------------------------------------------------------------
# physical-space workhorse shared by the RHS functions and the stepper


def _phys(g: Grid, c: np.ndarray) -> np.ndarray:
    return (sfft.ifftn(c, axes=(0, 1, 2)) * g.n ** 3).real


def _spec_dealiased(g: Grid, v: np.ndarray) -> np.ndarray:
    return dealias(g, sfft.fftn(v, axes=(0, 1, 2)) / g.n ** 3)


def _curl_c(g: Grid, c: np.ndarray) -> np.ndarray:
    ik1, ik2, ik3 = g.ik1, g.ik2, g.ik3
    out = np.empty_like(c)
    out[..., 0] = ik2 * c[..., 2] - ik3 * c[..., 1]
    out[..., 1] = ik3 * c[..., 0] - ik1 * c[..., 2]
    out[..., 2] = ik1 * c[..., 1] - ik2 * c[..., 0]
    return out


def _cross_v(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _leray_c(g: Grid, c: np.ndarray) -> np.ndarray:
    kdotc = (g.k1 * c[..., 0] + g.k2 * c[..., 1] + g.k3 * c[..., 2]) / g.k_sq_safe
    c[..., 0] -= g.k1 * kdotc
    c[..., 1] -= g.k2 * kdotc
    c[..., 2] -= g.k3 * kdotc
    return c


def _nonlinear_mhd(g: Grid, uc: np.ndarray, bc: np.ndarray, eta: float,
                   fc: Optional[np.ndarray]):
    """Non-diffusive RHS terms for both equations, dealiased.

    Convection uses the divergence form d_j(u_j u_i - b_j b_i), which agrees
    with the dot-grad form for exactly divergence-free fields.
    """
    uv = _phys(g, uc)
    bv = _phys(g, bc)
    # symmetric stress u_j u_i - b_j b_i: only the 6 distinct component pairs
    # are transformed, laid out as (00, 11, 22, 01, 02, 12)
    pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
    stress = np.empty(uv.shape[:3] + (6,))
    for s, (j, i) in enumerate(pairs):
        stress[..., s] = uv[..., j] * uv[..., i] - bv[..., j] * bv[..., i]
    stress_hat = dealias(g, sfft.fftn(stress, axes=(0, 1, 2)) / g.n ** 3)
    idx = ((0, 3, 4), (3, 1, 5), (4, 5, 2))   # (j, i) -> packed slot
    ik = (g.ik1, g.ik2, g.ik3)
    du = np.empty_like(uc)
    for i in range(3):
        du[..., i] = -(ik[0] * stress_hat[..., idx[0][i]]
                       + ik[1] * stress_hat[..., idx[1][i]]
                       + ik[2] * stress_hat[..., idx[2][i]])
    if fc is not None:
        du += fc
    du = _leray_c(g, du)
    du[0, 0, 0, :] = 0.0  # zero mean of u preserved exactly

    db = _curl_c(g, _spec_dealiased(g, _cross_v(uv, bv)))
    if eta != 0.0:
        jv = _phys(g, _curl_c(g, bc))
        db -= eta * _curl_c(g, _spec_dealiased(g, _cross_v(jv, bv)))
    return du, db


def _nonlinear_emhd(g: Grid, bc: np.ndarray, eta: float) -> np.ndarray:
    if eta == 0.0:
        return np.zeros_like(bc)
    bv = _phys(g, bc)
    jv = _phys(g, _curl_c(g, bc))
    return -eta * _curl_c(g, _spec_dealiased(g, _cross_v(jv, bv)))


# ----------------------------------------------------------------------------
# public RHS operators


def hall_term(b: SpectralField, eta: float) -> SpectralField:
    """eta curl((curl b) x b); enters the induction equation with a minus sign."""
    j = curl(b)
    return SpectralField(
        b.grid, eta * curl(dealiased_product(j, b, "cross")).coeffs,
        divergence_free=True,
    )


def rhs_momentum(s: State, p: SolverParams) -> SpectralField:
    g = s.u.grid
    adv = dealiased_product(s.u, s.u, "dot_grad").coeffs
    lor = dealiased_product(s.b, s.b, "dot_grad").coeffs
    c = -adv + lor
    if p.forcing is not None:
        c = c + p.forcing.coeffs
    out = leray_project(SpectralField(g, c)).coeffs
    out[0, 0, 0, :] = 0.0
    out += (-4.0 * np.pi ** 2 * p.nu) * g.k_sq[..., None] * s.u.coeffs
    return SpectralField(g, out, divergence_free=True)


def rhs_induction(s: State, p: SolverParams) -> SpectralField:
    g = s.b.grid
    c = curl(dealiased_product(s.u, s.b, "cross")).coeffs
    if p.eta != 0.0:
        c -= hall_term(s.b, p.eta).coeffs
    c += (-4.0 * np.pi ** 2 * p.mu) * g.k_sq[..., None] * s.b.coeffs
    return SpectralField(g, c, divergence_free=True)


def rhs_emhd(b: SpectralField, p: SolverParams) -> SpectralField:
    g = b.grid
    c = (-4.0 * np.pi ** 2 * p.mu) * g.k_sq[..., None] * b.coeffs
    if p.eta != 0.0:
        c = c - hall_term(b, p.eta).coeffs
    return SpectralField(g, c, divergence_free=True)


# ----------------------------------------------------------------------------
# integrating-factor RK4


def _diffusion_factor(g: Grid, coeff: float, tau: float) -> np.ndarray:
    return np.exp((-4.0 * np.pi ** 2 * coeff * tau) * g.k_sq)[..., None]


def _check_finite(*arrays):
    for a in arrays:
        if not np.isfinite(a).all():
            raise BlowUpError("non-finite coefficients; time step too large "
                              "or solution blew up")


def step(s: State, p: SolverParams) -> State:
    """Advance Hall-MHD by one dt with IF-RK4; diffusion is integrated exactly."""
    g = s.u.grid
    dt = p.dt
    Eu = _diffusion_factor(g, p.nu, 0.5 * dt)
    Eb = _diffusion_factor(g, p.mu, 0.5 * dt)
    Eu2, Eb2 = Eu * Eu, Eb * Eb
    fc = p.forcing.coeffs if p.forcing is not None else None
    uc, bc = s.u.coeffs, s.b.coeffs

    ku1, kb1 = _nonlinear_mhd(g, uc, bc, p.eta, fc)
    ku2, kb2 = _nonlinear_mhd(g, Eu * (uc + 0.5 * dt * ku1),
                              Eb * (bc + 0.5 * dt * kb1), p.eta, fc)
    ku3, kb3 = _nonlinear_mhd(g, Eu * uc + 0.5 * dt * ku2,
                              Eb * bc + 0.5 * dt * kb2, p.eta, fc)
    ku4, kb4 = _nonlinear_mhd(g, Eu2 * uc + dt * Eu * ku3,
                              Eb2 * bc + dt * Eb * kb3, p.eta, fc)

    un = Eu2 * uc + (dt / 6.0) * (Eu2 * ku1 + 2.0 * Eu * (ku2 + ku3) + ku4)
    bn = Eb2 * bc + (dt / 6.0) * (Eb2 * kb1 + 2.0 * Eb * (kb2 + kb3) + kb4)
    _check_finite(un, bn)
    return State(
        s.t + dt,
        SpectralField(g, un, divergence_free=True),
        SpectralField(g, bn, divergence_free=True),
    )


def step_emhd(b: SpectralField, t: float, p: SolverParams):
    """One IF-RK4 step of the magnetic-field-only reduction."""
    g = b.grid
    dt = p.dt
    E = _diffusion_factor(g, p.mu, 0.5 * dt)
    E2 = E * E
    bc = b.coeffs
    k1 = _nonlinear_emhd(g, bc, p.eta)
    k2 = _nonlinear_emhd(g, E * (bc + 0.5 * dt * k1), p.eta)
    k3 = _nonlinear_emhd(g, E * bc + 0.5 * dt * k2, p.eta)
    k4 = _nonlinear_emhd(g, E2 * bc + dt * E * k3, p.eta)
    bn = E2 * bc + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
    _check_finite(bn)
    return SpectralField(g, bn, divergence_free=True), t + dt


def energy_report(s: State, p: SolverParams) -> EnergyReport:
    return EnergyReport(
        E_u=0.5 * l2_norm(s.u) ** 2,
        E_b=0.5 * l2_norm(s.b) ** 2,
        D_u=p.nu * h1_seminorm(s.u) ** 2,
        D_b=p.mu * h1_seminorm(s.b) ** 2,
        linf_grad_b=linf_gradient_norm(s.b),
    )


def cfl_dt(s: State, p: SolverParams, c_cfl: float = 0.4) -> float:
    """Advective + Hall (whistler) stability bound for the explicit terms."""
    g = s.u.grid
    dx = 1.0 / g.n
    u_inf = max(norm(s.u, "Linf"), 1e-12)
    b_inf = max(norm(s.b, "Linf"), 1e-12)
    limits = [dx / u_inf, dx / b_inf]
    if p.eta > 0.0:
        limits.append(dx * dx / (2.0 * np.pi * p.eta * b_inf))
    return c_cfl * min(limits)
