"""Time integration of the profile equation by integrating-factor RK4.

The profile (interaction) representation pulls the linear group out of the
solution, u-tilde(t) = e^{+itL(xi)} u-hat(t), leaving the ODE system

    d/dt u-tilde(t, xi) = e^{+itL(xi)} Nhat( e^{-itL} u-tilde )(xi),

which classical RK4 integrates with the linear part handled exactly: with
the nonlinearity switched off the profile is constant to the last bit.
Stage phases are recomputed from the absolute stage time, so there is no
accumulated phase drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equations import EquationSpec, nonlinearity
from .grids import FourierField, SpectralGrid, transform_forward

__all__ = [
    "StepperConfig",
    "ProfileState",
    "Trajectory",
    "BlowupError",
    "evolve",
    "apply_group",
    "physical_field",
    "duhamel_term",
    "profile_drift",
    "nls_soliton",
]


class BlowupError(RuntimeError):
    """Raised when monitored norms grow past the per-step guard."""

    def __init__(self, time: float, message: str):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    n_samples: int = 17
    guard: float = 4.0  # max allowed one-step growth of monitored norms

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-8 * max(1.0, steps):
            raise ValueError(
                f"t_end={self.t_end} is not an integer number of steps of {self.dt}")
        if self.n_samples < 2:
            raise ValueError("need at least the two endpoint samples")
        if self.guard <= 1.0:
            raise ValueError("the blowup guard must exceed 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def sample_steps(self) -> np.ndarray:
        """Step indices at which the profile is recorded (0 and n_steps included)."""
        marks = np.round(np.linspace(0.0, self.n_steps, self.n_samples))
        return np.unique(marks.astype(int))


@dataclass(frozen=True)
class ProfileState:
    time: float
    coeffs: np.ndarray  # profile coefficients u-tilde


@dataclass(frozen=True)
class Trajectory:
    eq: EquationSpec
    grid: SpectralGrid
    config: StepperConfig
    states: tuple[ProfileState, ...]
    nonlinear: bool = True

    @property
    def times(self) -> np.ndarray:
        return np.array([st.time for st in self.states])

    def state_at(self, time: float | None = None) -> ProfileState:
        if time is None:
            return self.states[-1]
        for st in self.states:
            if abs(st.time - time) <= 1e-9 * max(1.0, abs(time)):
                return st
        raise KeyError(f"no recorded state at t={time}")


def _monitor(coeffs: np.ndarray, bracket_sq: np.ndarray) -> tuple[float, float]:
    low = float(np.linalg.norm(coeffs))
    high = float(np.linalg.norm(bracket_sq * coeffs))
    return low, high


def evolve(eq: EquationSpec, u0: FourierField, config: StepperConfig,
           nonlinear: bool = True) -> Trajectory:
    """Integrate the profile ODE from the initial field's coefficients."""
    grid = u0.grid
    symbol = eq.symbol_on(grid)
    h = config.dt
    y = np.array(u0.coeffs, dtype=np.complex128)
    sample_steps = set(config.sample_steps().tolist())
    states = [ProfileState(0.0, y.copy())]

    def force(t: float, phase_fwd: np.ndarray, vals: np.ndarray) -> np.ndarray:
        if not nonlinear:
            return np.zeros_like(vals)
        field_t = FourierField(grid, phase_fwd * vals,
                               real_symmetric=eq.real_symmetric)
        return np.conj(phase_fwd) * nonlinearity(eq, field_t).coeffs

    guard_ref = _monitor(y, grid.bracket_sq)
    phase_end = np.exp(-1j * 0.0 * symbol)
    for step in range(config.n_steps):
        t = step * h
        phase_0 = phase_end
        phase_half = np.exp(-1j * (t + 0.5 * h) * symbol)
        phase_end = np.exp(-1j * (t + h) * symbol)
        k1 = force(t, phase_0, y)
        k2 = force(t + 0.5 * h, phase_half, y + 0.5 * h * k1)
        k3 = force(t + 0.5 * h, phase_half, y + 0.5 * h * k2)
        k4 = force(t + h, phase_end, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_next = (step + 1) * h
        low, high = _monitor(y, grid.bracket_sq)
        if not (np.isfinite(low) and np.isfinite(high)):
            raise BlowupError(t_next, f"non-finite profile at t={t_next:.6g}")
        if (low > config.guard * max(guard_ref[0], 1e-300)
                or high > config.guard * max(guard_ref[1], 1e-300)):
            raise BlowupError(
                t_next, f"norm growth beyond guard at t={t_next:.6g}")
        guard_ref = (low, high)
        if step + 1 in sample_steps:
            states.append(ProfileState(t_next, y.copy()))
    return Trajectory(eq, grid, config, tuple(states), nonlinear)


def apply_group(field: FourierField, eq: EquationSpec,
                t: float) -> FourierField:
    """Linear propagator e^{-itL(D)} acting on Fourier coefficients."""
    symbol = eq.symbol_on(field.grid)
    return field.replace_coeffs(np.exp(-1j * t * symbol) * field.coeffs)


def physical_field(traj: Trajectory, time: float | None = None) -> FourierField:
    """Solution coefficients u-hat(t) = e^{-itL} u-tilde(t)."""
    st = traj.state_at(time)
    base = FourierField(traj.grid, st.coeffs,
                        real_symmetric=traj.eq.real_symmetric)
    return apply_group(base, traj.eq, st.time)


def duhamel_term(traj: Trajectory, time: float | None = None) -> FourierField:
    """Nonlinear Duhamel part w(t): what remains after subtracting the free
    evolution of the initial data, w-hat = e^{-itL}(u-tilde(t) - u-tilde(0))."""
    st = traj.state_at(time)
    diff = st.coeffs - traj.states[0].coeffs
    base = FourierField(traj.grid, diff, real_symmetric=traj.eq.real_symmetric)
    return apply_group(base, traj.eq, st.time)


def profile_drift(traj: Trajectory) -> float:
    """max_xi |u-tilde(t) - u-tilde(0)| over all recorded samples."""
    first = traj.states[0].coeffs
    return max(float(np.max(np.abs(st.coeffs - first)))
               for st in traj.states[1:]) if len(traj.states) > 1 else 0.0


def nls_soliton(grid: SpectralGrid, t: float = 0.0,
                x0: float | None = None) -> FourierField:
    """Standing soliton sqrt(2) e^{it} sech(x - x0) of the focusing cubic."""
    if grid.dim != 1:
        raise ValueError("the soliton profile is one-dimensional")
    if x0 is None:
        x0 = 0.5 * grid.length
    values = np.sqrt(2.0) / np.cosh(grid.x1d - x0) * np.exp(1j * t)
    return transform_forward(values, grid)
