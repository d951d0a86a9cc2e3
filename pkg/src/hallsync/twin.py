"""Twin-solution synchronization experiments.

A reference solution and a shadow copy advance under identical forcing; at
every step the determining-wavenumber readings of both are taken, their
pairwise max fixes the synchronization shells, and the shadow's Fourier
modes inside the lowpass support (|k| < lambda_{Q+1}) are overwritten with
the reference values.  The recorded difference norms then probe whether the
untouched high modes are slaved to the low ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import RunConfig
from .dynamics import (
    SolverParams,
    State,
    energy_report,
    step,
    step_emhd,
)
from .grid import Grid, SpectralField, h1_seminorm, l2_norm, linf_gradient_norm
from .initial import high_shell_perturbation, low_mode_forcing, random_solenoidal_field
from .lp import DyadicPartition, build_partition, lambda_q
from .snapshots import read_snapshot, write_snapshot
from .wavenumbers import (
    BoundMonitor,
    ShellReading,
    WavenumberParams,
    lambda_b,
    lambda_u,
    pairwise_max,
)

__all__ = [
    "TwinRecord",
    "TwinResult",
    "DecayFit",
    "run_twin",
    "run_emhd_twin",
    "run_simulation",
    "fit_decay_rate",
    "synchronize",
]


@dataclass
class TwinRecord:
    t: float
    w_l2: float
    m_l2: float
    grad_w_l2: float
    grad_m_l2: float
    Q_u: Optional[int]
    Q_v: Optional[int]
    Q_b: Optional[int]
    Q_h: Optional[int]
    lambda_uv: float
    lambda_bh: float
    linf_grad_b: float
    pointwise_ok: Optional[bool]
    margin: float
    synced: bool


@dataclass
class DecayFit:
    rate: float
    r2: float
    ok: bool


@dataclass
class TwinResult:
    records: list[TwinRecord]
    monitor: BoundMonitor
    sentinel_fraction: float
    unresolved: bool          # > 10% of samples had no admissible shell index
    fit: Optional[DecayFit]
    primary: State
    shadow: State

    @property
    def initial_diff(self) -> float:
        r = self.records[0]
        return r.w_l2 + r.m_l2

    @property
    def final_diff(self) -> float:
        r = self.records[-1]
        return r.w_l2 + r.m_l2


def synchronize(primary: SpectralField, shadow: SpectralField, Q: int) -> None:
    """Overwrite the shadow's modes on the lowpass support |k| < lambda_{Q+1}."""
    mask = primary.grid.k_mag < lambda_q(Q + 1)
    shadow.coeffs[mask] = primary.coeffs[mask]


def fit_decay_rate(records: list[TwinRecord], transient: float = 0.2) -> DecayFit:
    """Least-squares slope of log(w + m) versus t past the transient window."""
    times = np.array([r.t for r in records])
    diffs = np.array([r.w_l2 + r.m_l2 for r in records])
    t_cut = times[0] + transient * (times[-1] - times[0])
    keep = times >= t_cut
    times, diffs = times[keep], diffs[keep]
    if len(times) < 10:
        raise ValueError("need at least 10 samples past the transient window")
    if np.any(diffs <= 0.0):
        # already at the roundoff floor; decay is as complete as it gets
        return DecayFit(rate=-math.inf, r2=1.0, ok=True)
    logd = np.log(diffs)
    slope, intercept = np.polyfit(times, logd, 1)
    pred = slope * times + intercept
    ss_res = float(np.sum((logd - pred) ** 2))
    ss_tot = float(np.sum((logd - np.mean(logd)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return DecayFit(rate=float(slope), r2=r2, ok=slope < 0.0)


def _solver_params(cfg: RunConfig, grid: Grid, forced: bool) -> SolverParams:
    forcing = low_mode_forcing(grid, cfg.seed, cfg.forcing_amplitude) if forced else None
    return SolverParams(nu=cfg.nu, mu=cfg.mu, eta=cfg.eta, dt=cfg.dt,
                        t_end=cfg.t_end, forcing=forcing,
                        output_every=cfg.output_every)


def _wavenumber_params(cfg: RunConfig) -> WavenumberParams:
    return WavenumberParams.from_coefficients(cfg.r, cfg.delta, cfg.cr,
                                              cfg.nu, cfg.mu, cfg.eta)


def _record(t, pri: State, sha: State, ru, rv, rb, rh, pointwise, margin,
            synced, linf_grad_b) -> TwinRecord:
    wc = pri.u.coeffs - sha.u.coeffs
    mc = pri.b.coeffs - sha.b.coeffs
    g = pri.u.grid
    w = SpectralField(g, wc)
    m = SpectralField(g, mc)
    luv = pairwise_max(ru, rv)
    lbh = pairwise_max(rb, rh)
    return TwinRecord(
        t=t, w_l2=l2_norm(w), m_l2=l2_norm(m),
        grad_w_l2=h1_seminorm(w), grad_m_l2=h1_seminorm(m),
        Q_u=ru.q, Q_v=rv.q, Q_b=rb.q, Q_h=rh.q,
        lambda_uv=luv.lam, lambda_bh=lbh.lam,
        linf_grad_b=linf_grad_b,
        pointwise_ok=pointwise, margin=margin, synced=synced,
    )


_ZERO_READING = ShellReading(q=0, margin=math.inf)


def run_twin(cfg: RunConfig, sync: bool = True,
             snapshot_dir: Optional[str] = None,
             resume: Optional[str] = None,
             progress: Optional[Callable[[int, TwinRecord], None]] = None,
             emhd: bool = False) -> TwinResult:
    """Full twin experiment; set emhd=True for the magnetic-only reduction."""
    grid = Grid(cfg.n)
    part = build_partition(grid)
    wp = _wavenumber_params(cfg)
    sp = _solver_params(cfg, grid, forced=not emhd)
    zero = SpectralField(grid, grid.zeros_spectral(), divergence_free=True)

    if resume is not None:
        primary, shadow, t0 = _load_twin(resume, grid, emhd, zero)
    else:
        primary, shadow = _initial_twin(cfg, grid, part, wp, emhd, zero)
        t0 = 0.0

    monitor = BoundMonitor(wp)
    records: list[TwinRecord] = []
    n_steps = int(round((cfg.t_end - t0) / cfg.dt))
    skipped = 0

    def analyze(pri: State, sha: State):
        if emhd:
            ru = rv = _ZERO_READING
        else:
            ru = lambda_u(pri.u, wp, part)
            rv = lambda_u(sha.u, wp, part)
        rb = lambda_b(pri.b, wp, part)
        rh = lambda_b(sha.b, wp, part)
        return ru, rv, rb, rh

    ru, rv, rb, rh = analyze(primary, shadow)
    lgb = linf_gradient_norm(primary.b)
    ok, margin = monitor.update(pairwise_max(rb, rh), lgb, cfg.dt)
    records.append(_record(t0, primary, shadow, ru, rv, rb, rh, ok, margin,
                           False, lgb))

    for istep in range(1, n_steps + 1):
        if emhd:
            pb, t = step_emhd(primary.b, primary.t, sp)
            primary = State(t, primary.u, pb)
            sb, _ = step_emhd(shadow.b, shadow.t, sp)
            shadow = State(t, shadow.u, sb)
        else:
            primary = step(primary, sp)
            shadow = step(shadow, sp)

        ru, rv, rb, rh = analyze(primary, shadow)
        luv = pairwise_max(ru, rv)
        lbh = pairwise_max(rb, rh)
        synced = False
        if sync:
            if (emhd or luv.resolved) and lbh.resolved:
                if not emhd:
                    synchronize(primary.u, shadow.u, luv.q)
                synchronize(primary.b, shadow.b, lbh.q)
                synced = True
            else:
                skipped += 1

        lgb = linf_gradient_norm(primary.b)
        ok, margin = monitor.update(lbh, lgb, cfg.dt)
        if istep % cfg.output_every == 0 or istep == n_steps:
            rec = _record(primary.t, primary, shadow, ru, rv, rb, rh,
                          ok, margin, synced, lgb)
            records.append(rec)
            if progress is not None:
                progress(istep, rec)
        if snapshot_dir and cfg.snapshot_every and istep % cfg.snapshot_every == 0:
            _dump_twin(snapshot_dir, istep, primary, shadow, cfg, emhd)

    sentinel_fraction = skipped / n_steps if n_steps else 0.0
    fit = fit_decay_rate(records) if len(records) >= 13 else None
    return TwinResult(records, monitor, sentinel_fraction,
                      sentinel_fraction > 0.10, fit, primary, shadow)


def run_emhd_twin(cfg: RunConfig, **kwargs) -> TwinResult:
    return run_twin(cfg, emhd=True, **kwargs)


def _initial_twin(cfg, grid, part, wp, emhd, zero):
    mean_b = (0.0, 0.0, cfg.b_mean)
    b0 = random_solenoidal_field(grid, cfg.seed + 1, cfg.init_amplitude_b,
                                 mean=mean_b)
    if emhd:
        u0 = zero
        ru0 = _ZERO_READING
    else:
        u0 = random_solenoidal_field(grid, cfg.seed, cfg.init_amplitude_u)
        ru0 = lambda_u(u0, wp, part)
    rb0 = lambda_b(b0, wp, part)
    if not (ru0.resolved and rb0.resolved):
        raise RuntimeError(
            "initial state has no admissible determining shell; adjust cr, "
            "the amplitudes, or the resolution"
        )
    primary = State(0.0, u0, b0)
    if emhd:
        vu = zero
    else:
        vu = high_shell_perturbation(u0, part, cfg.seed + 11,
                                     cfg.perturbation_amplitude, ru0.q)
    vb = high_shell_perturbation(b0, part, cfg.seed + 12,
                                 cfg.perturbation_amplitude, rb0.q)
    shadow = State(0.0, vu, vb)
    return primary, shadow


def _dump_twin(outdir, istep, primary, shadow, cfg, emhd):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    pf = [primary.b] if emhd else [primary.u, primary.b]
    sf = [shadow.b] if emhd else [shadow.u, shadow.b]
    write_snapshot(outdir / f"snap_{istep:08d}_primary.bin", pf,
                   primary.t, cfg.nu, cfg.mu, cfg.eta)
    write_snapshot(outdir / f"snap_{istep:08d}_shadow.bin", sf,
                   shadow.t, cfg.nu, cfg.mu, cfg.eta)


def _load_twin(prefix, grid, emhd, zero):
    pfields, t, *_ = read_snapshot(f"{prefix}_primary.bin")
    sfields, t2, *_ = read_snapshot(f"{prefix}_shadow.bin")
    if emhd:
        primary = State(t, zero, pfields[0])
        shadow = State(t2, zero, sfields[0])
    else:
        primary = State(t, pfields[0], pfields[1])
        shadow = State(t2, sfields[0], sfields[1])
    return primary, shadow, t


# ----------------------------------------------------------------------------
# single-trajectory simulation driver


@dataclass
class SimRecord:
    t: float
    E_u: float
    E_b: float
    D_u: float
    D_b: float
    linf_grad_b: float
    Q_u: Optional[int]
    Q_b: Optional[int]


def run_simulation(cfg: RunConfig, snapshot_dir: Optional[str] = None,
                   resume: Optional[str] = None) -> list[SimRecord]:
    """Forced Hall-MHD run emitting energy and wavenumber diagnostics."""
    grid = Grid(cfg.n)
    part = build_partition(grid)
    wp = _wavenumber_params(cfg)
    sp = _solver_params(cfg, grid, forced=True)

    if resume is not None:
        fields, t0, *_ = read_snapshot(resume)
        state = State(t0, fields[0], fields[1])
    else:
        u0 = random_solenoidal_field(grid, cfg.seed, cfg.init_amplitude_u)
        b0 = random_solenoidal_field(grid, cfg.seed + 1, cfg.init_amplitude_b,
                                     mean=(0.0, 0.0, cfg.b_mean))
        state = State(0.0, u0, b0)
        t0 = 0.0

    def sample(s: State) -> SimRecord:
        rep = energy_report(s, sp)
        return SimRecord(s.t, rep.E_u, rep.E_b, rep.D_u, rep.D_b,
                         rep.linf_grad_b,
                         lambda_u(s.u, wp, part).q, lambda_b(s.b, wp, part).q)

    records = [sample(state)]
    n_steps = int(round((cfg.t_end - t0) / cfg.dt))
    for istep in range(1, n_steps + 1):
        state = step(state, sp)
        if istep % cfg.output_every == 0 or istep == n_steps:
            records.append(sample(state))
        if snapshot_dir and cfg.snapshot_every and istep % cfg.snapshot_every == 0:
            outdir = Path(snapshot_dir)
            outdir.mkdir(parents=True, exist_ok=True)
            write_snapshot(outdir / f"snap_{istep:08d}.bin",
                           [state.u, state.b], state.t, cfg.nu, cfg.mu, cfg.eta)
    return records
