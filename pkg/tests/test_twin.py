import math

import numpy as np
import pytest

from hallsync.config import RunConfig
from hallsync.grid import SpectralField, l2_norm
from hallsync.lp import lambda_q, shell_l2_norms
from hallsync.twin import (
    TwinRecord,
    fit_decay_rate,
    run_emhd_twin,
    run_twin,
    synchronize,
)

from conftest import random_hermitian_field


def small_cfg(**over):
    base = dict(n=32, nu=0.02, mu=0.01, eta=0.01, dt=2e-3, t_end=0.02,
                seed=3, forcing_amplitude=0.5, output_every=2,
                cr=1e6, r=2.5, delta=2.0,
                init_amplitude_u=0.3, init_amplitude_b=0.3, b_mean=0.0,
                perturbation_amplitude=1e-3)
    base.update(over)
    return RunConfig(**base)


def diff_records(times, diffs):
    return [TwinRecord(t=t, w_l2=d, m_l2=0.0, grad_w_l2=0.0, grad_m_l2=0.0,
                       Q_u=0, Q_v=0, Q_b=0, Q_h=0, lambda_uv=1.0,
                       lambda_bh=1.0, linf_grad_b=0.0, pointwise_ok=True,
                       margin=0.0, synced=True)
            for t, d in zip(times, diffs)]


class TestSynchronize:
    def test_lowpass_equality_exact(self, grid32, part32):
        a = random_hermitian_field(grid32, seed=40)
        b = random_hermitian_field(grid32, seed=41)
        synchronize(a, b, Q=1)
        mask = grid32.k_mag < lambda_q(2)
        assert np.array_equal(a.coeffs[mask], b.coeffs[mask])

    def test_high_modes_untouched_bitwise(self, grid32, part32):
        a = random_hermitian_field(grid32, seed=42)
        b = random_hermitian_field(grid32, seed=43)
        before = b.coeffs.copy()
        synchronize(a, b, Q=1)
        mask = grid32.k_mag >= lambda_q(2)
        assert np.array_equal(b.coeffs[mask], before[mask])

    def test_noop_when_equal(self, grid32):
        a = random_hermitian_field(grid32, seed=44)
        b = SpectralField(grid32, a.coeffs.copy())
        synchronize(a, b, Q=2)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_never_increases_high_shell_difference(self, grid32, part32):
        a = random_hermitian_field(grid32, seed=45)
        b = random_hermitian_field(grid32, seed=46)
        w_before = SpectralField(grid32, a.coeffs - b.coeffs)
        norms_before = shell_l2_norms(w_before, part32)
        synchronize(a, b, Q=0)
        w_after = SpectralField(grid32, a.coeffs - b.coeffs)
        norms_after = shell_l2_norms(w_after, part32)
        for q in part32.shells():
            if q > 1:
                assert norms_after[q + 1] <= norms_before[q + 1] + 1e-15


class TestFitDecayRate:
    def test_exact_exponential(self):
        times = np.linspace(0.0, 3.0, 60)
        recs = diff_records(times, np.exp(-2.0 * times))
        fit = fit_decay_rate(recs)
        assert fit.rate == pytest.approx(-2.0, abs=1e-6)
        assert fit.r2 > 0.999999
        assert fit.ok

    def test_constant_series_fails(self):
        times = np.linspace(0.0, 1.0, 40)
        recs = diff_records(times, np.ones_like(times))
        fit = fit_decay_rate(recs)
        assert fit.rate == pytest.approx(0.0, abs=1e-12)
        assert not fit.ok

    def test_roundoff_floor_passes(self):
        times = np.linspace(0.0, 1.0, 40)
        recs = diff_records(times, np.zeros_like(times))
        fit = fit_decay_rate(recs)
        assert math.isinf(fit.rate) and fit.rate < 0
        assert fit.ok

    def test_too_few_samples(self):
        times = np.linspace(0.0, 1.0, 5)
        recs = diff_records(times, np.exp(-times))
        with pytest.raises(ValueError):
            fit_decay_rate(recs)


class TestRunTwin:
    def test_zero_perturbation_identical(self):
        cfg = small_cfg(perturbation_amplitude=0.0)
        res = run_twin(cfg)
        for rec in res.records:
            assert rec.w_l2 + rec.m_l2 <= 1e-12
        assert np.array_equal(res.primary.u.coeffs, res.shadow.u.coeffs)
        assert np.array_equal(res.primary.b.coeffs, res.shadow.b.coeffs)

    def test_mean_constraints(self):
        cfg = small_cfg(b_mean=0.25)
        res = run_twin(cfg)
        for state in (res.primary, res.shadow):
            assert np.max(np.abs(state.u.coeffs[0, 0, 0])) < 1e-14
        assert np.allclose(res.primary.b.coeffs[0, 0, 0],
                           res.shadow.b.coeffs[0, 0, 0], atol=1e-14)
        assert res.primary.b.coeffs[0, 0, 0, 2].real == pytest.approx(0.25)

    def test_records_cadence_and_sync_flag(self):
        cfg = small_cfg()
        res = run_twin(cfg)
        n_steps = int(round(cfg.t_end / cfg.dt))
        assert len(res.records) == 1 + n_steps // cfg.output_every
        assert res.records[0].t == 0.0
        assert all(r.synced for r in res.records[1:])
        assert res.sentinel_fraction == 0.0
        assert not res.unresolved

    def test_post_sync_lowpass_equality(self):
        cfg = small_cfg()
        res = run_twin(cfg)
        rec = res.records[-1]
        g = res.primary.u.grid
        for pf, sf, Q in ((res.primary.u, res.shadow.u, rec.Q_u),
                          (res.primary.b, res.shadow.b, rec.Q_b)):
            mask = g.k_mag < lambda_q(Q + 1)
            assert np.array_equal(pf.coeffs[mask], sf.coeffs[mask])

    def test_unresolvable_initial_state_raises(self):
        cfg = small_cfg(cr=1e-6)
        with pytest.raises(RuntimeError):
            run_twin(cfg)


class TestRunEmhdTwin:
    def test_velocity_stays_zero(self):
        cfg = small_cfg(eta=0.05)
        res = run_emhd_twin(cfg)
        assert np.max(np.abs(res.primary.u.coeffs)) == 0.0
        assert np.max(np.abs(res.shadow.u.coeffs)) == 0.0
        for rec in res.records:
            assert rec.w_l2 == 0.0

    def test_eta_zero_is_exact_heat_decay(self):
        # pure diffusion: untouched perturbation modes decay by the exact
        # integrating factor, so the difference norm is a closed-form sum
        cfg = small_cfg(eta=0.0, t_end=0.04, mu=0.05)
        res = run_emhd_twin(cfg)
        rec1 = res.records[-1]
        diff0 = res.records[0].m_l2
        assert diff0 > 0
        # every difference mode has |k| >= 2 (perturbation above shell Q0)
        t = rec1.t
        kmin_rate = math.exp(-4 * math.pi ** 2 * cfg.mu * 4.0 * t)
        assert rec1.m_l2 <= diff0 * kmin_rate * (1 + 1e-10)
