"""Catalog of the five model equations and their interaction data.

Every equation is kept in the canonical form

    u_t + i L(D) u = N(u),

so the linear flow is G(t) = exp(-i t L(D)) and the profile (interaction
picture) variable is v~(t) = exp(+i t L(xi)) u^(t).  Substituting the
profile into the equation turns each nonlinear term into a signed
convolution over xi = sum_j s_j xi_j carrying an oscillatory factor whose
frequency is the dispersion combination

    -L(xi) + sum_j s_j L(xi_j) = phase_const * Phi(Xi),

with ``Phi`` the factored closed form stored on each term and
``phase_const`` a recorded per-equation constant (negative for the
Schroedinger family, where the customary closed form carries the opposite
orientation).  Only |Phi| enters any estimate downstream, so the sign is
bookkeeping, but it is pinned here and asserted in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import FourierField, SpectralGrid, dealiased_product

__all__ = [
    "InteractionTerm",
    "EquationSpec",
    "FrequencyTuple",
    "get_equation",
    "equation_names",
    "phase",
    "dispersion_combination",
    "sample_constraint_tuples",
    "nonlinearity",
    "predicted_gain",
    "window_exponent",
    "gauge_forward",
    "gauge_inverse",
]

# Integer codes shared with the compute kernels (see kernels.py).
PHASE_MKDV = 0
PHASE_KDV = 1
PHASE_NLS = 2
PHASE_DNLS3 = 3
PHASE_DNLS5 = 4
PHASE_MZK = 5

MULT_ONE = 0
MULT_XI_OUT = 1
MULT_XI_SLOT2 = 2
MULT_HALF = 3
MULT_SUM_XY = 4


@dataclass(frozen=True)
class FrequencyTuple:
    """An output frequency with its k interacting input frequencies.

    1D: ``output`` is a float and ``inputs`` a (k,) array.  2D: ``output``
    is a (2,) array and ``inputs`` a (k, 2) array.
    """

    output: np.ndarray
    inputs: np.ndarray

    @classmethod
    def make(cls, output, inputs) -> "FrequencyTuple":
        return cls(np.asarray(output, dtype=float),
                   np.asarray(inputs, dtype=float))


@dataclass(frozen=True)
class InteractionTerm:
    """One multilinear term: arity, conjugation signature, weights."""

    k: int
    signature: tuple[int, ...]
    phase_code: int
    mult_code: int
    phase_const: float  # -L(xi) + sum s_j L(xi_j) == phase_const * Phi

    def __post_init__(self):
        if len(self.signature) != self.k:
            raise ValueError("signature length must equal k")
        if any(s not in (-1, 1) for s in self.signature):
            raise ValueError("signature entries must be +-1")


def _phase_closed(code: int, out: np.ndarray, ins: np.ndarray) -> np.ndarray:
    """Closed-form Phi; `out` has shape (d, ...), `ins` shape (k, d, ...)."""
    if code == PHASE_MKDV:
        x = out[0]
        return 3.0 * (x - ins[0, 0]) * (x - ins[1, 0]) * (x - ins[2, 0])
    if code == PHASE_KDV:
        return 3.0 * out[0] * ins[0, 0] * ins[1, 0]
    if code == PHASE_NLS:
        x = out[0]
        return (x - ins[0, 0]) * (x - ins[2, 0])
    if code == PHASE_DNLS3:
        x = out[0]
        return 2.0 * (x - ins[0, 0]) * (x - ins[2, 0])
    if code == PHASE_DNLS5:
        x = out[0]
        alt = ins[0, 0] ** 2 - ins[1, 0] ** 2 + ins[2, 0] ** 2 \
            - ins[3, 0] ** 2 + ins[4, 0] ** 2
        return x ** 2 - alt
    if code == PHASE_MZK:
        px = (out[0] - ins[0, 0]) * (out[0] - ins[1, 0]) * (out[0] - ins[2, 0])
        py = (out[1] - ins[0, 1]) * (out[1] - ins[1, 1]) * (out[1] - ins[2, 1])
        return px + py
    raise ValueError(f"unknown phase code {code}")


def _multiplier(code: int, out: np.ndarray, ins: np.ndarray) -> np.ndarray:
    if code == MULT_ONE:
        return np.ones_like(out[0])
    if code == MULT_XI_OUT:
        return out[0]
    if code == MULT_XI_SLOT2:
        return ins[1, 0]
    if code == MULT_HALF:
        return 0.5 * np.ones_like(out[0])
    if code == MULT_SUM_XY:
        return out[0] + out[1]
    raise ValueError(f"unknown multiplier code {code}")


@dataclass(frozen=True)
class EquationSpec:
    """Dispersion, nonlinearity and smoothing data for one model equation."""

    name: str
    dim: int
    dispersion: Callable[..., np.ndarray]  # L(xi) resp. L(x, y)
    terms: tuple[InteractionTerm, ...]
    s_min: float
    s_min_strict: bool
    gain_cap: float  # upper saturation of the predicted gain
    gain_rate: tuple[float, float]  # eps_th = rate[0]*s + rate[1] below cap
    real_symmetric: bool
    sign: float = 1.0

    @property
    def primary_term(self) -> InteractionTerm:
        return self.terms[0]

    def term(self, k: int) -> InteractionTerm:
        for t in self.terms:
            if t.k == k:
                return t
        raise ValueError(f"{self.name} has no term of order {k}")

    def symbol_on(self, grid: SpectralGrid) -> np.ndarray:
        """Dispersion symbol tabulated on the grid's frequency lattice."""
        if grid.dim != self.dim:
            raise ValueError(
                f"{self.name} lives in {self.dim}D, grid is {grid.dim}D")
        if self.dim == 1:
            return self.dispersion(grid.freqs)
        return self.dispersion(grid.freqs[:, None], grid.freqs[None, :])


def _tuple_arrays(ft: FrequencyTuple, dim: int) -> tuple[np.ndarray, np.ndarray]:
    out = np.atleast_1d(np.asarray(ft.output, dtype=float))
    ins = np.asarray(ft.inputs, dtype=float)
    if dim == 1:
        if ins.ndim == 1:
            ins = ins[:, None]
    else:
        if out.shape != (2,):
            raise ValueError("2D tuple output must have two components")
        if ins.ndim != 2 or ins.shape[1] != 2:
            raise ValueError("2D tuple inputs must have shape (k, 2)")
    return out, ins


def _check_constraint(term: InteractionTerm, out: np.ndarray,
                      ins: np.ndarray) -> None:
    signed = sum(s * ins[j] for j, s in enumerate(term.signature))
    scale = max(1.0, float(np.max(np.abs(ins))))
    if np.max(np.abs(out - signed)) > 1e-9 * scale:
        raise ValueError(
            f"frequency tuple violates the signed-sum constraint: "
            f"output {out}, signed sum {signed}")


def _infer_term(eq: EquationSpec, ft: FrequencyTuple,
                k: int | None) -> InteractionTerm:
    if k is not None:
        return eq.term(k)
    return eq.term(np.asarray(ft.inputs).shape[0])


def phase(eq: EquationSpec, ft: FrequencyTuple,
          k: int | None = None) -> float:
    """Closed-form interaction phase Phi(Xi); validates the constraint."""
    term = _infer_term(eq, ft, k)
    out, ins = _tuple_arrays(ft, eq.dim)
    _check_constraint(term, out, ins)
    return float(_phase_closed(term.phase_code, out[:, None], ins[:, :, None])[0])


def multiplier(eq: EquationSpec, ft: FrequencyTuple,
               k: int | None = None) -> complex:
    """Multiplier weight m(Xi) of the matching interaction term."""
    term = _infer_term(eq, ft, k)
    out, ins = _tuple_arrays(ft, eq.dim)
    _check_constraint(term, out, ins)
    return complex(_multiplier(term.mult_code, out[:, None], ins[:, :, None])[0])


def dispersion_combination(eq: EquationSpec, term: InteractionTerm,
                           out: np.ndarray, ins: np.ndarray) -> np.ndarray:
    """-L(xi) + sum_j s_j L(xi_j), vectorized over trailing axes."""
    if eq.dim == 1:
        total = -eq.dispersion(out[0])
        for j, s in enumerate(term.signature):
            total = total + s * eq.dispersion(ins[j, 0])
    else:
        total = -eq.dispersion(out[0], out[1])
        for j, s in enumerate(term.signature):
            total = total + s * eq.dispersion(ins[j, 0], ins[j, 1])
    return total


def phase_closed_batch(term: InteractionTerm, out: np.ndarray,
                       ins: np.ndarray) -> np.ndarray:
    """Vectorized closed-form phase for test batches."""
    return _phase_closed(term.phase_code, out, ins)


def sample_constraint_tuples(eq: EquationSpec, term: InteractionTerm,
                             count: int, rng: np.random.Generator,
                             scale: float = 50.0):
    """Random inputs in [-scale, scale]; outputs forced onto the constraint.

    Returns (out, ins) with shapes (d, count) and (k, d, count).
    """
    ins = rng.uniform(-scale, scale, size=(term.k, eq.dim, count))
    out = sum(s * ins[j] for j, s in enumerate(term.signature))
    return out, ins


# ---------------------------------------------------------------------------
# nonlinearities (physical space, dealiased)

def _derivative(field: FourierField, axis: int = 0) -> FourierField:
    grid = field.grid
    ik = 1j * grid.axis_freq(axis)
    return field.replace_coeffs(ik * field.coeffs,
                                real_symmetric=field.real_symmetric)


def nonlinearity(eq: EquationSpec, field: FourierField) -> FourierField:
    """Evaluate N(u) for the canonical form u_t + i L(D) u = N(u).

    Requires a real-symmetric field for the real-valued models.  All
    products are dealiased; derivatives act spectrally.
    """
    if eq.real_symmetric and not field.real_symmetric:
        raise ValueError(f"{eq.name} expects a real-symmetric field")
    grid = field.grid
    if grid.dim != eq.dim:
        raise ValueError(f"{eq.name} lives in {eq.dim}D, grid is {grid.dim}D")

    if eq.name == "mkdv":
        cubed = dealiased_product([field, field, field])
        out = _derivative(cubed)
        return out.replace_coeffs(-eq.sign * out.coeffs)
    if eq.name == "kdv":
        squared = dealiased_product([field, field])
        out = _derivative(squared)
        return out.replace_coeffs(-eq.sign * out.coeffs)
    if eq.name == "nls":
        cubic = dealiased_product([field, field, field], (1, -1, 1))
        return cubic.replace_coeffs(1j * eq.sign * cubic.coeffs,
                                    real_symmetric=False)
    if eq.name == "mzk":
        cubed = dealiased_product([field, field, field])
        ik = 1j * (grid.axis_freq(0) + grid.axis_freq(1))
        return cubed.replace_coeffs(eq.sign * ik * cubed.coeffs)
    if eq.name == "dnls":
        wx = _derivative(field)
        # w^2 dx(conj w) = w * w * conj(w_x)
        cubic = dealiased_product([field, field, wx], (1, 1, -1))
        quintic = dealiased_product([field] * 5, (1, -1, 1, -1, 1))
        coeffs = -cubic.coeffs + 0.5j * quintic.coeffs
        return FourierField(grid, coeffs, real_symmetric=False)
    raise ValueError(f"unknown equation {eq.name}")


def predicted_gain(eq: EquationSpec, s: float) -> float:
    """Predicted extra regularity eps_th(s) of the Duhamel term at level s."""
    below = s < eq.s_min or (eq.s_min_strict and s == eq.s_min)
    if below:
        cmp = ">" if eq.s_min_strict else ">="
        raise ValueError(
            f"{eq.name} smoothing requires s {cmp} {eq.s_min}, got {s}")
    a, b = eq.gain_rate
    return min(a * s + b, eq.gain_cap)


def window_exponent(s: float) -> float:
    """Default exponent for the low-frequency window norm, 2/(1-s).

    Grows as s approaches 1 (the window contribution fades); capped so the
    norm stays a finite sum.
    """
    return 2.0 / max(1.0 - s, 0.125)


# ---------------------------------------------------------------------------
# gauge transform for the derivative Schroedinger model

def _cumulative_trapezoid(g: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(g, dtype=float)
    out[1:] = np.cumsum(0.5 * (g[1:] + g[:-1])) * dx
    return out


def gauge_forward(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """u -> exp(-i int_0^x |u|^2 dy) u  (trapezoid from the left box edge)."""
    if grid.dim != 1:
        raise ValueError("gauge transform is one-dimensional")
    values = np.asarray(values, dtype=complex)
    primitive = _cumulative_trapezoid(np.abs(values) ** 2, grid.dx)
    return np.exp(-1j * primitive) * values


def gauge_inverse(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Inverse gauge; uses |w| = |u| so the same primitive unwinds exactly."""
    if grid.dim != 1:
        raise ValueError("gauge transform is one-dimensional")
    values = np.asarray(values, dtype=complex)
    primitive = _cumulative_trapezoid(np.abs(values) ** 2, grid.dx)
    return np.exp(1j * primitive) * values


# ---------------------------------------------------------------------------
# registry

def _airy_symbol(xi):
    return -xi ** 3


def _schrodinger_symbol(xi):
    return xi ** 2


def _zk_symbol(x, y):
    return -(x ** 3 + y ** 3)


_CATALOG: dict[str, dict] = {
    "mkdv": dict(
        dim=1, dispersion=_airy_symbol, real_symmetric=True,
        s_min=0.25, s_min_strict=True, gain_cap=1.0, gain_rate=(2.0, -0.5),
        terms=(InteractionTerm(3, (1, 1, 1), PHASE_MKDV, MULT_XI_OUT,
                               phase_const=1.0),),
    ),
    "kdv": dict(
        dim=1, dispersion=_airy_symbol, real_symmetric=True,
        s_min=0.0, s_min_strict=False, gain_cap=1.0, gain_rate=(1.0, 0.0),
        terms=(InteractionTerm(2, (1, 1), PHASE_KDV, MULT_XI_OUT,
                               phase_const=1.0),),
    ),
    "nls": dict(
        dim=1, dispersion=_schrodinger_symbol, real_symmetric=False,
        s_min=0.0, s_min_strict=False, gain_cap=1.0, gain_rate=(2.0, 0.0),
        terms=(InteractionTerm(3, (1, -1, 1), PHASE_NLS, MULT_ONE,
                               phase_const=-2.0),),
    ),
    "mzk": dict(
        dim=2, dispersion=_zk_symbol, real_symmetric=True,
        s_min=1.5, s_min_strict=True, gain_cap=1.0, gain_rate=(2.0, -3.0),
        terms=(InteractionTerm(3, (1, 1, 1), PHASE_MZK, MULT_SUM_XY,
                               phase_const=3.0),),
    ),
    "dnls": dict(
        dim=1, dispersion=_schrodinger_symbol, real_symmetric=False,
        s_min=0.5, s_min_strict=True, gain_cap=0.5, gain_rate=(2.0, -1.0),
        terms=(InteractionTerm(3, (1, -1, 1), PHASE_DNLS3, MULT_XI_SLOT2,
                               phase_const=-1.0),
               InteractionTerm(5, (1, -1, 1, -1, 1), PHASE_DNLS5, MULT_HALF,
                               phase_const=-1.0)),
    ),
}


def equation_names() -> tuple[str, ...]:
    return tuple(_CATALOG)


def get_equation(name: str, sign: float = 1.0) -> EquationSpec:
    """Look up an equation; ``sign`` flips the nonlinearity where meaningful."""
    if name not in _CATALOG:
        raise ValueError(
            f"unknown equation {name!r}; choose from {sorted(_CATALOG)}")
    if sign not in (1.0, -1.0, 1, -1):
        raise ValueError(f"sign must be +-1, got {sign}")
    if name == "dnls" and sign != 1.0:
        raise ValueError("the gauged derivative model has a fixed sign")
    entry = _CATALOG[name]
    return EquationSpec(name=name, sign=float(sign), **entry)
