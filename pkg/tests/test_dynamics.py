"""Time stepping: linear flow exactness, substep invariants, splitting
order, blowup handling, diagnostics recording, and state files."""

import numpy as np
import pytest

from conftest import gaussian
from oracles import free_gaussian
from nls2lab.errors import NonFiniteFieldError
from nls2lab.dynamics import (
    DiagnosticSeries,
    SolverConfig,
    State,
    evolve,
    linear_step,
    nonlinear_substep,
    read_state,
    strang_step,
    write_state,
)
from nls2lab.observables import mass
from nls2lab.spectral import Field, lp_norm, make_grid, zeros


class TestLinearStep:
    def test_unitary(self):
        rng = np.random.default_rng(2)
        g = make_grid(3, 16, 3.0)
        f = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        out = linear_step(f, 0.3, 1.0)
        assert lp_norm(out, 2.0) == pytest.approx(lp_norm(f, 2.0), rel=1e-13)

    def test_plane_wave_phase(self):
        g = make_grid(1, 32, np.pi)
        k0, t = 4.0, 0.21
        f = Field(g, np.exp(1j * k0 * g.x))
        for a in (1.0, 0.5):
            out = linear_step(f, t, a)
            expected = np.exp(-1j * a * k0 ** 2 * t) * f.values
            assert np.max(np.abs(out.values - expected)) < 1e-13

    def test_free_gaussian_closed_form(self):
        g = make_grid(3, 48, 12.0)
        t = 0.8
        u = linear_step(gaussian(g, width=1.0), t, 1.0)  # exp(-|x|^2/2): a=1/2
        exact = free_gaussian(0.5, t, g.r2, dispersion=1.0)
        # limited by periodic images of the spreading Gaussian, not the solver
        assert np.max(np.abs(u.values - exact)) < 1e-8
        v = linear_step(gaussian(g, width=1.0), t, 0.5)
        exact_v = free_gaussian(0.5, t, g.r2, dispersion=0.5)
        assert np.max(np.abs(v.values - exact_v)) < 1e-8

    def test_rejects_other_coefficients(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            linear_step(zeros(g), 0.1, 0.25)


class TestNonlinearSubstep:
    def test_pointwise_invariant(self):
        rng = np.random.default_rng(3)
        g = make_grid(3, 16, 4.0)
        u = Field(g, 0.5 * (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)))
        v = Field(g, 0.5 * (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)))
        s0 = State(u, v, 0.0)
        inv0 = np.abs(u.values) ** 2 + 2.0 * np.abs(v.values) ** 2
        s1 = nonlinear_substep(s0, 1e-3)
        inv1 = np.abs(s1.u.values) ** 2 + 2.0 * np.abs(s1.v.values) ** 2
        assert np.max(np.abs(inv1 - inv0)) < 1e-12

    def test_fourth_order_self_convergence(self):
        rng = np.random.default_rng(4)
        g = make_grid(1, 16, 2.0)
        u = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        v = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))

        def advance(dt, nsteps):
            s = State(u.copy(), v.copy(), 0.0)
            for _ in range(nsteps):
                s = nonlinear_substep(s, dt)
            return s

        ref = advance(0.4 / 256, 256)
        errs = []
        for nsteps in (4, 8, 16):
            s = advance(0.4 / nsteps, nsteps)
            errs.append(np.max(np.abs(s.u.values - ref.u.values)))
        assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.3)
        assert errs[1] / errs[2] == pytest.approx(16.0, rel=0.3)


class TestEvolve:
    def test_strang_matches_evolve_one_step(self):
        g = make_grid(3, 16, 5.0)
        s = State(gaussian(g, 0.5), gaussian(g, 0.4), 0.0)
        cfg = SolverConfig(dt=1e-2, t_end=1e-2)
        one = strang_step(s, cfg)
        fin, _, _ = evolve(s.copy(), cfg)
        assert np.max(np.abs(one.u.values - fin.u.values)) < 1e-14
        assert fin.t == pytest.approx(1e-2)

    def test_mass_conserved_moderate_run(self):
        # dealias off: the 2/3 mask at this marginal resolution would shave
        # real spectral content (~1e-5 of the mass); both substeps are then
        # mass-preserving up to RK4 roundoff
        g = make_grid(3, 24, 8.0)
        s = State(gaussian(g, 0.5), gaussian(g, 0.4), 0.0)
        m0 = mass(s)
        fin, series, out = evolve(s, SolverConfig(dt=2e-3, t_end=0.2, dealias=False))
        assert out.kind == "completed"
        assert abs(mass(fin) - m0) / m0 < 1e-9

    def test_record_cadence_and_series_columns(self):
        g = make_grid(3, 16, 6.0)
        s = State(gaussian(g, 0.1), gaussian(g, 0.1), 0.0)
        _, series, _ = evolve(s, SolverConfig(dt=1e-2, t_end=0.1, record_every=5))
        # t=0, t=0.05, t=0.1
        assert series.times == pytest.approx([0.0, 0.05, 0.1])
        assert len(series.mass) == len(series.times)
        assert len(DiagnosticSeries.COLUMNS) == 9

    def test_series_csv_json(self, tmp_path):
        g = make_grid(3, 16, 6.0)
        s = State(gaussian(g, 0.1), gaussian(g, 0.1), 0.0)
        _, series, _ = evolve(s, SolverConfig(dt=1e-2, t_end=0.05, record_every=5))
        series.to_csv(tmp_path / "s.csv")
        header = (tmp_path / "s.csv").read_text().splitlines()[0]
        assert header == ",".join(DiagnosticSeries.COLUMNS)
        series.to_json(tmp_path / "s.json")
        import json

        d = json.loads((tmp_path / "s.json").read_text())
        assert d["times"] == series.times

    def test_accumulators_nondecreasing(self):
        g = make_grid(3, 16, 6.0)
        s = State(gaussian(g, 0.2), gaussian(g, 0.2), 0.0)
        _, series, _ = evolve(s, SolverConfig(dt=5e-3, t_end=0.5, record_every=10))
        for acc in (series.s_norm_u_accum, series.w_norm_v_accum):
            assert all(b >= a for a, b in zip(acc, acc[1:]))

    def test_blowup_detection(self):
        g = make_grid(3, 16, 6.0)
        # big data, low threshold: must exit early with a blowup outcome
        s = State(gaussian(g, 6.0), gaussian(g, 6.0), 0.0)
        cfg = SolverConfig(dt=2e-3, t_end=5.0, blowup_linf=12.0, record_every=5)
        fin, series, out = evolve(s, cfg)
        assert out.blew_up
        assert out.t < 5.0
        assert series.times[-1] == pytest.approx(out.t)

    def test_nonfinite_without_threshold_raises(self):
        g = make_grid(3, 16, 6.0)
        # huge dt makes RK4 overflow without any blowup threshold configured
        s = State(gaussian(g, 30.0), gaussian(g, 30.0), 0.0)
        with pytest.raises(NonFiniteFieldError):
            evolve(s, SolverConfig(dt=10.0, t_end=100.0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.0, t_end=1.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=0.1, t_end=1.0, substep_integrator="Euler")
        with pytest.raises(ValueError):
            SolverConfig(dt=0.1, t_end=1.0, record_every=0)


class TestStateIO:
    def test_roundtrip(self, tmp_path):
        g = make_grid(3, 16, 3.0)
        s = State(gaussian(g, 0.3), gaussian(g, 0.2, phase=0.5), 1.25)
        p = tmp_path / "state.nls2"
        write_state(p, s)
        back = read_state(p)
        assert back.t == 1.25
        assert np.array_equal(back.u.values, s.u.values)
        assert np.array_equal(back.v.values, s.v.values)

    def test_field_state_kind_mismatch(self, tmp_path):
        from nls2lab.spectral import write_field, zeros

        g = make_grid(2, 16, 1.0)
        p = tmp_path / "f.nls2"
        write_field(p, zeros(g))
        with pytest.raises(ValueError, match="kind"):
            read_state(p)
