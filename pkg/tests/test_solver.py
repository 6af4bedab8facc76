"""Coupled component evolution: stepping, conservation, schedules, guards."""

import math

import numpy as np
import pytest

from vortexlab.errors import CflViolation
from vortexlab.fields import make_grid
from vortexlab.initial_data import assemble_configuration, BlobSpec, gaussian_component
from vortexlab.diagnostics import centroid, intensity, lp_norm, w2_to_point
from vortexlab.solver import (
    ComponentSet,
    SolverParams,
    advect_diffuse_rhs,
    cfl_dt,
    run,
    step,
    velocity,
)


def single_gaussian_state(L=10.0, n=128, eps=0.5, a=1.0):
    g = make_grid(L, n)
    f = gaussian_component((L / 2, L / 2), eps, a, g)
    return ComponentSet(g, f.values[None], [a])


class TestRhs:
    def test_zero_vorticity_gives_zero_rhs(self):
        g = make_grid(10.0, 32)
        state = ComponentSet(g, np.zeros((1, 32, 32)), [1.0])
        rhs = advect_diffuse_rhs(state, nu=1e-3)
        assert np.max(np.abs(rhs[0].values)) == 0.0

    @pytest.mark.slow
    def test_radial_component_has_negligible_advection(self):
        # tangential velocity is orthogonal to the radial gradient; the
        # residual is the anisotropy of the periodic images, which dies out
        # fast with box size
        n, L = 2048, 432.0
        g = make_grid(L, n)
        c = ((n // 2 + 0.5) * g.h, (n // 2 + 0.5) * g.h)
        f = gaussian_component(c, 2.0, 1.0, g)
        state = ComponentSet(g, f.values[None], [1.0])
        rhs = advect_diffuse_rhs(state, nu=0.0)[0]
        assert np.max(np.abs(rhs.values)) <= 1e-9 * np.max(np.abs(f.values))

    def test_vanishing_second_component_changes_nothing(self):
        state = single_gaussian_state(n=64)
        rhs_single = advect_diffuse_rhs(state, nu=2e-3)
        padded = ComponentSet(
            state.grid,
            np.concatenate([state.omegas, np.zeros_like(state.omegas)]),
            [1.0, 1.0],
        )
        rhs_pair = advect_diffuse_rhs(padded, nu=2e-3)
        np.testing.assert_array_equal(rhs_pair[0].values, rhs_single[0].values)
        assert np.max(np.abs(rhs_pair[1].values)) == 0.0

    def test_nonfinite_state_rejected(self):
        g = make_grid(10.0, 32)
        w = np.zeros((1, 32, 32))
        w[0, 5, 5] = np.inf
        with pytest.raises(ValueError, match="non-finite"):
            advect_diffuse_rhs(ComponentSet(g, w, [1.0]), nu=0.0)


class TestStep:
    def test_heat_spread_gaussian_oracle(self):
        # radial data reduces the dynamics to pure diffusion; the closed-form
        # spread Gaussian is the oracle (box images contribute ~2e-5 * t)
        L, n, eps, nu, t = 10.0, 256, 0.5, 1e-2, 0.03
        state = single_gaussian_state(L=L, n=n, eps=eps)
        res = run(state, SolverParams(nu=nu, t_end=t), [t])
        sigma1 = math.sqrt((eps / 2) ** 2 + nu * t)
        exact = gaussian_component((L / 2, L / 2), 2 * sigma1, 1.0, state.grid)
        err = np.linalg.norm(res.state.omegas[0] - exact.values) / np.linalg.norm(exact.values)
        assert err <= 1e-6

    def test_zero_vorticity_inviscid_step_only_advances_time(self):
        g = make_grid(10.0, 32)
        state = ComponentSet(g, np.zeros((1, 32, 32)), [1.0])
        out = step(state, SolverParams(nu=0.0), dt=0.5)
        np.testing.assert_array_equal(out.omegas, state.omegas)
        assert out.time == pytest.approx(0.5)

    def test_intensity_conserved_per_step(self):
        state = single_gaussian_state(a=-1.5)
        params = SolverParams(nu=1e-3)
        dt = 0.5 * cfl_dt(state, params)
        out = step(state, params, dt)
        assert intensity(out.components[0]) == pytest.approx(-1.5, rel=1e-13)

    def test_cfl_violation_names_admissible_step(self):
        state = single_gaussian_state()
        params = SolverParams(nu=1e-3)
        admissible = cfl_dt(state, params)
        with pytest.raises(CflViolation, match="admissible"):
            step(state, params, 2.0 * admissible)


class TestCflDt:
    def test_zero_velocity_floor(self):
        g = make_grid(10.0, 32)
        state = ComponentSet(g, np.zeros((1, 32, 32)), [1.0])
        params = SolverParams(nu=0.0, cfl=0.4)
        assert cfl_dt(state, params) == pytest.approx(0.4 * g.h / 1e-12, rel=1e-12)

    def test_doubling_intensities_halves_dt(self):
        state = single_gaussian_state()
        doubled = ComponentSet(state.grid, 2.0 * state.omegas, [2.0])
        params = SolverParams(nu=1e-3)
        assert cfl_dt(doubled, params) == pytest.approx(0.5 * cfl_dt(state, params), rel=1e-12)

    def test_matches_direct_max_speed_scan(self):
        g = make_grid(10.0, 128)
        layout = [BlobSpec((4.5, 5.0), 0.3, 1.0), BlobSpec((5.5, 5.0), 0.3, 1.0)]
        state, _ = assemble_configuration(layout, g)
        params = SolverParams(nu=1e-3, cfl=0.4)
        u = velocity(state)
        umax = max(np.max(np.abs(u.u1)), np.max(np.abs(u.u2)))
        assert cfl_dt(state, params) == pytest.approx(0.4 * g.h / umax, rel=1e-14)


class TestRun:
    def test_zero_horizon_returns_initial_record_only(self):
        state = single_gaussian_state(n=64)
        res = run(state, SolverParams(nu=1e-3, t_end=0.0), [0.0])
        assert res.times == [0.0]
        assert res.n_steps == 0
        np.testing.assert_array_equal(res.records[0].omegas, state.omegas)

    def test_lands_exactly_on_schedule(self):
        state = single_gaussian_state(n=64)
        times = [0.0, 0.0333, 0.1, 0.25]
        res = run(state, SolverParams(nu=1e-3, t_end=0.25), times)
        assert res.times == times
        assert [r.time for r in res.records] == times

    def test_determinism(self):
        state = single_gaussian_state(n=64)
        params = SolverParams(nu=1e-3, t_end=0.2)
        r1 = run(state, params, [0.0, 0.1, 0.2])
        r2 = run(state, params, [0.0, 0.1, 0.2])
        np.testing.assert_array_equal(r1.state.omegas, r2.state.omegas)
        assert r1.n_steps == r2.n_steps

    def test_intensity_drift_and_lp_monotonicity(self):
        g = make_grid(10.0, 128)
        layout = [BlobSpec((4.4, 5.0), 0.4, 1.0), BlobSpec((5.6, 5.0), 0.4, -0.5)]
        state, _ = assemble_configuration(layout, g)
        times = [0.0, 0.2, 0.4, 0.6]
        res = run(state, SolverParams(nu=2e-3, t_end=0.6), times)
        assert not res.aborted
        for i, a in enumerate((1.0, -0.5)):
            intensities = [intensity(s.components[i]) for s in res.records]
            assert all(abs(v - a) <= 1e-12 * abs(a) for v in intensities)
            for p in (2, 4):
                norms = [lp_norm(s.components[i], p) for s in res.records]
                assert all(b <= a_ * (1 + 1e-8) for a_, b in zip(norms, norms[1:]))

    def test_sign_preserved_for_gaussian_data(self):
        state = single_gaussian_state(n=128, eps=0.5)
        res = run(state, SolverParams(nu=1e-3, t_end=0.5), [0.5])
        viol = res.state.sign_violations()[0]
        assert viol <= 1e-6

    def test_moment_growth_matches_viscous_production(self):
        state = single_gaussian_state(n=128, eps=0.5)
        nu = 5e-3
        times = [0.0, 0.5, 1.0]
        res = run(state, SolverParams(nu=nu, t_end=1.0), times)
        w2sq = []
        for s in res.records:
            comp = s.components[0]
            w2sq.append(w2_to_point(comp, 1.0, centroid(comp, 1.0)) ** 2)
        for t, w in zip(times[1:], w2sq[1:]):
            growth = 4.0 * nu * t
            assert abs((w - w2sq[0]) - growth) <= 1e-4 * growth

    def test_sign_guard_aborts_with_partial_records(self):
        state = single_gaussian_state(n=64)
        params = SolverParams(nu=1e-3, t_end=0.4, sign_abort_tol=1e-17)
        res = run(state, params, [0.0, 0.2, 0.4])
        assert res.aborted
        assert "sign violation" in res.abort_reason
        assert len(res.records) >= 1

    def test_schedule_validation(self):
        state = single_gaussian_state(n=64)
        params = SolverParams(nu=1e-3, t_end=0.1)
        with pytest.raises(ValueError, match="increasing"):
            run(state, params, [0.0, 0.0])
        with pytest.raises(ValueError, match="within"):
            run(state, params, [0.0, 0.2])


class TestComponentSet:
    def test_component_count_must_match(self):
        g = make_grid(10.0, 16)
        with pytest.raises(ValueError, match="mismatch"):
            ComponentSet(g, np.zeros((2, 16, 16)), [1.0])

    def test_zero_intensity_rejected(self):
        g = make_grid(10.0, 16)
        with pytest.raises(ValueError, match="nonzero"):
            ComponentSet(g, np.zeros((1, 16, 16)), [0.0])

    def test_total_is_component_sum(self):
        g = make_grid(10.0, 64)
        layout = [BlobSpec((4.5, 5.0), 0.4, 1.0), BlobSpec((5.5, 5.0), 0.4, -2.0)]
        state, _ = assemble_configuration(layout, g)
        np.testing.assert_allclose(
            state.total().values, state.omegas[0] + state.omegas[1], rtol=1e-15
        )
