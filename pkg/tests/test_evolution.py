"""Integrating-factor RK4 for the profile equation."""

import numpy as np
import pytest

from nlsmooth.equations import get_equation, nonlinearity
from nlsmooth.evolution import (
    BlowupError,
    StepperConfig,
    apply_group,
    duhamel_term,
    evolve,
    nls_soliton,
    physical_field,
    profile_drift,
)
from nlsmooth.fitting import fit_loglog
from nlsmooth.grids import (
    FourierField,
    SpectralGrid,
    sobolev_norm,
    transform_forward,
    transform_inverse,
)
from nlsmooth.roughdata import RoughDataSpec, generate

ALL_EQUATIONS = ("mkdv", "kdv", "nls", "mzk", "dnls")


def small_grid(eq) -> SpectralGrid:
    n = 16 if eq.dim == 2 else 64
    return SpectralGrid(eq.dim, n, 2.0 * np.pi)


def rough_field(eq, grid: SpectralGrid, amplitude: float,
                seed: int = 0) -> FourierField:
    spec = RoughDataSpec(s=1.0, amplitude=amplitude,
                         real_symmetric=eq.real_symmetric)
    return generate(spec, grid, seed)


def picard_first_iterate(eq, u0: FourierField, t_end: float,
                         n_intervals: int) -> np.ndarray:
    """u-tilde(T) to first order in the nonlinearity: u0 plus the Duhamel
    integral of the frozen profile, with composite-Simpson quadrature."""
    symbol = eq.symbol_on(u0.grid)

    def force(t: float) -> np.ndarray:
        phase = np.exp(-1j * t * symbol)
        field_t = FourierField(u0.grid, phase * u0.coeffs,
                               real_symmetric=eq.real_symmetric)
        return np.conj(phase) * nonlinearity(eq, field_t).coeffs

    times = np.linspace(0.0, t_end, 2 * n_intervals + 1)
    weights = np.ones(len(times))
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    h = t_end / (2 * n_intervals)
    integral = (h / 3.0) * np.tensordot(
        weights, np.stack([force(t) for t in times]), axes=(0, 0))
    return u0.coeffs + integral


class TestStepperConfig:
    """Configuration validation and sampling schedule."""

    def test_rejects_nonpositive_times(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=-0.1, t_end=1.0)
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, t_end=0.0)

    def test_rejects_noninteger_step_count(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=0.3, t_end=1.0)

    def test_accepts_rounded_step_count(self):
        cfg = StepperConfig(dt=0.1, t_end=1.0)
        assert cfg.n_steps == 10

    def test_rejects_bad_samples_and_guard(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, t_end=1.0, n_samples=1)
        with pytest.raises(ValueError):
            StepperConfig(dt=0.1, t_end=1.0, guard=1.0)

    def test_sample_steps_include_endpoints(self):
        cfg = StepperConfig(dt=0.125, t_end=1.0, n_samples=5)
        assert cfg.sample_steps().tolist() == [0, 2, 4, 6, 8]

    def test_sample_steps_deduplicate(self):
        cfg = StepperConfig(dt=0.25, t_end=1.0, n_samples=17)
        assert cfg.sample_steps().tolist() == [0, 1, 2, 3, 4]


class TestLinearExactness:
    """With the nonlinearity off, the profile must be constant to the bit."""

    @pytest.mark.parametrize("name", ALL_EQUATIONS)
    def test_profile_is_frozen(self, name):
        eq = get_equation(name)
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=1.0)
        cfg = StepperConfig(dt=0.05, t_end=1.0, n_samples=5)
        traj = evolve(eq, u0, cfg, nonlinear=False)
        assert profile_drift(traj) == 0.0

    def test_physical_field_carries_group_phase(self):
        eq = get_equation("nls")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=1.0)
        cfg = StepperConfig(dt=0.1, t_end=1.0, n_samples=3)
        traj = evolve(eq, u0, cfg, nonlinear=False)
        expect = apply_group(u0, eq, 1.0)
        got = physical_field(traj)
        np.testing.assert_allclose(got.coeffs, expect.coeffs,
                                   rtol=0.0, atol=1e-14)

    def test_duhamel_term_vanishes(self):
        eq = get_equation("kdv")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=1.0)
        cfg = StepperConfig(dt=0.1, t_end=1.0)
        traj = evolve(eq, u0, cfg, nonlinear=False)
        assert np.max(np.abs(duhamel_term(traj).coeffs)) == 0.0


class TestTrajectory:
    """Recorded states and lookups."""

    def test_times_follow_sample_schedule(self):
        eq = get_equation("nls")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=0.1)
        cfg = StepperConfig(dt=0.125, t_end=1.0, n_samples=5)
        traj = evolve(eq, u0, cfg)
        np.testing.assert_allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0],
                                   atol=1e-12)

    def test_state_lookup_and_missing_time(self):
        eq = get_equation("nls")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=0.1)
        cfg = StepperConfig(dt=0.25, t_end=1.0, n_samples=5)
        traj = evolve(eq, u0, cfg)
        st = traj.state_at(0.5)
        assert st.time == pytest.approx(0.5)
        assert traj.state_at() is traj.states[-1]
        with pytest.raises(KeyError):
            traj.state_at(0.3)

    def test_initial_state_matches_input(self):
        eq = get_equation("mkdv")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=0.1)
        cfg = StepperConfig(dt=0.25, t_end=1.0)
        traj = evolve(eq, u0, cfg)
        np.testing.assert_array_equal(traj.states[0].coeffs, u0.coeffs)

    def test_duhamel_matches_definition(self):
        eq = get_equation("nls")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=0.5)
        cfg = StepperConfig(dt=0.01, t_end=0.5, n_samples=3)
        traj = evolve(eq, u0, cfg)
        diff = traj.state_at(0.5).coeffs - u0.coeffs
        expect = apply_group(FourierField(grid, diff), eq, 0.5)
        got = duhamel_term(traj, 0.5)
        np.testing.assert_allclose(got.coeffs, expect.coeffs, atol=1e-15)
        assert np.max(np.abs(diff)) > 0.0


class TestPicardOracle:
    """Short weakly nonlinear runs against a first Picard iterate."""

    @pytest.mark.parametrize("name,amplitude", [
        ("nls", 0.005),
        ("mkdv", 0.005),
        ("mzk", 0.01),
    ])
    def test_matches_frozen_duhamel_integral(self, name, amplitude):
        eq = get_equation(name)
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=amplitude, seed=3)
        t_end = 0.05
        n_steps = 64 if eq.dim == 1 else 256
        cfg = StepperConfig(dt=t_end / n_steps, t_end=t_end, n_samples=2)
        traj = evolve(eq, u0, cfg)
        oracle = picard_first_iterate(eq, u0, t_end, n_intervals=1024)
        increment = oracle - u0.coeffs
        scale = np.linalg.norm(increment)
        assert scale > 0.0
        err = np.linalg.norm(traj.state_at(t_end).coeffs - oracle)
        assert err < 1e-3 * scale


class TestSolitons:
    """Exact nonlinear solutions propagated to machine-level accuracy."""

    def test_nls_standing_soliton(self):
        grid = SpectralGrid(1, 512, 16.0 * np.pi)
        eq = get_equation("nls")
        u0 = nls_soliton(grid)
        t_end = 0.5
        cfg = StepperConfig(dt=1e-3, t_end=t_end, n_samples=2)
        traj = evolve(eq, u0, cfg)
        exact = nls_soliton(grid, t=t_end)
        diff = physical_field(traj).coeffs - exact.coeffs
        err = sobolev_norm(FourierField(grid, diff), 0.0)
        assert err < 1e-8

    def test_nls_soliton_fourth_order_in_dt(self):
        grid = SpectralGrid(1, 512, 16.0 * np.pi)
        eq = get_equation("nls")
        u0 = nls_soliton(grid)
        t_end = 0.4
        exact = nls_soliton(grid, t=t_end)
        dts = np.array([4e-2, 2e-2, 1e-2, 5e-3])
        errs = []
        for dt in dts:
            cfg = StepperConfig(dt=float(dt), t_end=t_end, n_samples=2)
            traj = evolve(eq, u0, cfg)
            diff = physical_field(traj).coeffs - exact.coeffs
            errs.append(sobolev_norm(FourierField(grid, diff), 0.0))
        fit = fit_loglog(dts, np.array(errs))
        assert fit.slope == pytest.approx(4.0, abs=0.3)

    def test_mkdv_traveling_soliton(self):
        # c = 1 wave: sqrt(2) sech(x - t - x0) solves u_t + u_xxx = -(u^3)_x
        grid = SpectralGrid(1, 512, 16.0 * np.pi)
        eq = get_equation("mkdv")
        x0 = 0.5 * grid.length
        u0 = transform_forward(np.sqrt(2.0) / np.cosh(grid.x1d - x0), grid)
        t_end = 0.5
        cfg = StepperConfig(dt=1e-3, t_end=t_end, n_samples=2)
        traj = evolve(eq, u0, cfg)
        got = transform_inverse(physical_field(traj))
        exact = np.sqrt(2.0) / np.cosh(grid.x1d - x0 - t_end)
        err = np.sqrt(np.mean(np.abs(got - exact) ** 2))
        assert err < 1e-6

    def test_soliton_profile_is_one_dimensional(self):
        with pytest.raises(ValueError):
            nls_soliton(SpectralGrid(2, 16, 2.0 * np.pi))


class TestBlowupGuard:
    """Runaway runs abort with a timestamped error."""

    def test_norm_growth_raises(self):
        eq = get_equation("mkdv")
        grid = SpectralGrid(1, 64, 2.0 * np.pi)
        u0 = rough_field(eq, grid, amplitude=50.0)
        cfg = StepperConfig(dt=0.05, t_end=1.0)
        with pytest.raises(BlowupError) as info:
            evolve(eq, u0, cfg)
        assert info.value.time > 0.0

    def test_gentle_run_does_not_trip(self):
        eq = get_equation("nls")
        grid = small_grid(eq)
        u0 = rough_field(eq, grid, amplitude=0.5)
        cfg = StepperConfig(dt=0.01, t_end=1.0, guard=1.5)
        traj = evolve(eq, u0, cfg)
        assert traj.state_at(1.0) is not None
