"""Direct lattice realization of the two frequency-weighted operators.

Both operators share the signed-convolution form

    T(u_1, ..., u_k)(xi) = sum_{xi = sum_j s_j xi_j} W(Phi(Xi)) m(Xi)
                           prod_j u_j^{(s_j)}(xi_j),

with the phase-damped weight W = <Phi>^{-sigma} or the band restriction
W = 1_{|Phi - alpha| < M}.  Norms are *estimated*: randomized unit probes
give lower bounds, and an exact lattice Cauchy-Schwarz functional gives an
upper bound, so ``lower <= upper`` holds on every probe by construction.

Lattices here are plain truncated frequency boxes (no FFT grid attached);
brute-force summation keeps every constraint tuple, which is exactly what
the dealiased products on a padded FFT grid would produce.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import kernels
from .equations import EquationSpec, InteractionTerm
from .fitting import SlopeFit, fit_loglog

__all__ = [
    "FreqLattice",
    "BoundProbe",
    "NormEstimate",
    "BandScalingReport",
    "FeasibilityCell",
    "FeasibilityTable",
    "lattice_sobolev_norm",
    "lattice_window_norm",
    "lattice_adapted_norm",
    "probe_inputs",
    "apply_phase_damped",
    "apply_band_limited",
    "apply_weighted",
    "estimate_norm",
    "sweep_band_scaling",
    "sweep_gain_feasibility",
]

# weight code -> squared-kernel code used by the upper functional
_SQUARED_CODE = {
    kernels.WEIGHT_PLAIN: kernels.WEIGHT_SIGMA_SQ,  # sigma=0 -> weight 1
    kernels.WEIGHT_SIGMA: kernels.WEIGHT_SIGMA_SQ,
    kernels.WEIGHT_BAND: kernels.WEIGHT_BAND_SQ,
    kernels.WEIGHT_NEAR: kernels.WEIGHT_NEAR_SQ,
    kernels.WEIGHT_FAR: kernels.WEIGHT_FAR_SQ,
    kernels.WEIGHT_BOUNDARY: kernels.WEIGHT_BOUNDARY_SQ,
}


@dataclass(frozen=True)
class FreqLattice:
    """Truncated frequency box: m points per axis spanning [-extent, extent)."""

    m: int
    extent: float
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.m < 2 or self.m % 2:
            raise ValueError(f"lattice size must be even and >= 2, got {self.m}")
        if self.extent <= 0:
            raise ValueError(f"extent must be positive, got {self.extent}")

    @property
    def dxi(self) -> float:
        return 2.0 * self.extent / self.m

    @property
    def freqs(self) -> np.ndarray:
        return (np.arange(self.m) - self.m // 2) * self.dxi

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.dim

    def bracket_sq(self) -> np.ndarray:
        f = self.freqs
        if self.dim == 1:
            return 1.0 + f * f
        return 1.0 + (f * f)[:, None] + (f * f)[None, :]

    def radius(self) -> np.ndarray:
        """Euclidean |xi| per lattice point."""
        return np.sqrt(self.bracket_sq() - 1.0)

    def doubled(self) -> "FreqLattice":
        """Same spacing, twice the extent (refinement used by sweeps)."""
        return FreqLattice(self.m * 2, self.extent * 2.0, self.dim)


def lattice_sobolev_norm(vals: np.ndarray, lattice: FreqLattice,
                         s: float) -> float:
    w = lattice.bracket_sq() ** s
    return float(np.sqrt(np.sum(w * np.abs(vals) ** 2)
                         * lattice.dxi ** lattice.dim))


def lattice_window_norm(vals: np.ndarray, lattice: FreqLattice,
                        lam: float) -> float:
    if lam <= 1.0:
        raise ValueError(f"window exponent must exceed 1, got {lam}")
    inside = lattice.radius() < 1.0
    total = np.sum(np.abs(vals[inside]) ** lam) * lattice.dxi ** lattice.dim
    return float(total ** (1.0 / lam))


def lattice_adapted_norm(vals: np.ndarray, lattice: FreqLattice, s: float,
                         lam: float) -> float:
    return (lattice_sobolev_norm(vals, lattice, s)
            + lattice_window_norm(vals, lattice, lam))


@dataclass(frozen=True)
class BoundProbe:
    """Parameter bundle for one multilinear norm experiment.

    The operator codes default to the equation term of order ``k``; the
    override fields swap in surrogate kernels (calibration runs).
    """

    eq: EquationSpec
    s: float
    eps: float
    lattice: FreqLattice
    k: int = 0                      # 0 -> primary term's order
    sigma: float = 0.6
    alpha: float = 0.0
    band_m: float = 4.0
    trials: int = 8
    seed: int = 0
    norm: str = "sobolev"           # or "adapted" (Sobolev + window)
    window_exponent: float = 4.0
    signature_override: tuple[int, ...] | None = None
    phase_override: int | None = None
    mult_override: int | None = None

    def __post_init__(self):
        if self.k == 0:
            object.__setattr__(self, "k", self.eq.primary_term.k)
        if not self._surrogate():
            self.eq.term(self.k)  # must exist
        if self.lattice.dim != self.eq.dim:
            raise ValueError("lattice dimension must match the equation")
        min_m = 32 if self.k <= 3 else 16  # quintic sums stay desk-scale
        if self.lattice.m < min_m:
            raise ValueError(
                f"lattice size {self.lattice.m} below minimum {min_m} for k={self.k}")
        if not 0.0 <= self.sigma < 1.0:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")
        if self.band_m <= 0:
            raise ValueError(f"band width must be positive, got {self.band_m}")
        if self.trials < 1:
            raise ValueError("at least one probe trial is required")
        if self.eps < 0:
            raise ValueError(f"gain must be nonnegative, got {self.eps}")
        if self.norm not in ("sobolev", "adapted"):
            raise ValueError(f"unknown norm kind {self.norm!r}")
        if self.norm == "adapted" and self.window_exponent < 2.0:
            raise ValueError("adapted-norm probes need window exponent >= 2")
        if (self.signature_override is not None
                and len(self.signature_override) != self.k):
            raise ValueError("signature override length must equal k")

    def _surrogate(self) -> bool:
        """True when every operator code is overridden (no equation term)."""
        return (self.signature_override is not None
                and self.phase_override is not None
                and self.mult_override is not None)

    def codes(self) -> tuple[tuple[int, ...], int, int]:
        if self._surrogate():
            return (tuple(self.signature_override), self.phase_override,
                    self.mult_override)
        term: InteractionTerm = self.eq.term(self.k)
        sig = self.signature_override or term.signature
        phase = term.phase_code if self.phase_override is None else self.phase_override
        mult = term.mult_code if self.mult_override is None else self.mult_override
        return tuple(sig), phase, mult

    def input_norm(self, vals: np.ndarray) -> float:
        if self.norm == "adapted":
            return lattice_adapted_norm(vals, self.lattice, self.s,
                                        self.window_exponent)
        return lattice_sobolev_norm(vals, self.lattice, self.s)

    def output_norm(self, vals: np.ndarray, gain: float) -> float:
        if self.norm == "adapted":
            return lattice_adapted_norm(vals, self.lattice, self.s + gain,
                                        self.window_exponent)
        return lattice_sobolev_norm(vals, self.lattice, self.s + gain)


def probe_inputs(probe: BoundProbe, trial: int) -> list[np.ndarray]:
    """Unit-norm random inputs, flat in H^s per mode (hat u = g / <xi>^s)."""
    envelope = probe.lattice.bracket_sq() ** (-0.5 * probe.s)
    out = []
    for slot in range(probe.k):
        rng = np.random.default_rng([probe.seed, trial, slot])
        shape = probe.lattice.shape
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        vals = g * envelope / np.sqrt(2.0)
        out.append(vals / probe.input_norm(vals))
    return out


def _apply(probe: BoundProbe, inputs, weight_code: int, pa: float, pb: float,
           backend: str | None) -> np.ndarray:
    sig, phase, mult = probe.codes()
    if len(inputs) != probe.k:
        raise ValueError(f"expected {probe.k} inputs, got {len(inputs)}")
    vals = []
    for v, s in zip(inputs, sig):
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != probe.lattice.shape:
            raise ValueError("input shape does not match the probe lattice")
        vals.append(np.conj(v) if s == -1 else v)
    return kernels.lattice_convolution(vals, probe.lattice.freqs, sig,
                                       probe.lattice.dim, phase, mult,
                                       weight_code, pa, pb, backend=backend)


def apply_phase_damped(probe: BoundProbe, inputs,
                       backend: str | None = None) -> np.ndarray:
    """Operator with kernel m(Xi) / <Phi(Xi)>^sigma."""
    return _apply(probe, inputs, kernels.WEIGHT_SIGMA, probe.sigma, 0.0,
                  backend)


def apply_band_limited(probe: BoundProbe, inputs,
                       backend: str | None = None) -> np.ndarray:
    """Operator with kernel m(Xi) * 1_{|Phi(Xi) - alpha| < M}."""
    return _apply(probe, inputs, kernels.WEIGHT_BAND, probe.alpha,
                  probe.band_m, backend)


def apply_weighted(probe: BoundProbe, inputs, weight_code: int,
                   pa: float = 0.0, pb: float = 0.0,
                   backend: str | None = None) -> np.ndarray:
    """Operator with an explicit weight code (near/far/boundary splits)."""
    if weight_code in _SQUARED_CODE.values():
        raise ValueError("squared weight codes are internal to the upper bound")
    return _apply(probe, inputs, weight_code, pa, pb, backend)


@dataclass(frozen=True)
class NormEstimate:
    """Randomized lower bound and Cauchy-Schwarz upper bound for one probe."""

    lower: float
    upper: float
    gain: float
    trial_norms: tuple[float, ...]

    def __post_init__(self):
        if self.lower > self.upper * (1.0 + 1e-12):
            raise AssertionError(
                f"lower bound {self.lower} exceeds upper functional {self.upper}")


def _upper_functional(probe: BoundProbe, weight_code: int, pa: float,
                      pb: float, gain: float, backend: str | None) -> float:
    """sup_xi <xi>^{2(s+gain)} sum_{Xi -> xi} |K|^2 prod <xi_j>^{-2s}.

    Cauchy-Schwarz against prod <xi_j>^{2s}|u_j|^2 bounds the operator norm
    by dxi^{d(1-k)/2} * sup^{1/2}; for adapted-norm probes the low-frequency
    window adds at most a factor 1 + dxi^{1/lam - 1/2} on the output side
    (l^lam <= l^2 on the window set) while the input norms only grow.
    """
    sq_code = _SQUARED_CODE[weight_code]
    if weight_code == kernels.WEIGHT_PLAIN:
        pa, pb = 0.0, 0.0  # sigma-squared weight with sigma=0 is identically 1
    sig, phase, mult = probe.codes()
    profile = probe.lattice.bracket_sq() ** (-probe.s)
    vals = [profile] * probe.k
    shell = kernels.lattice_convolution(vals, probe.lattice.freqs, sig,
                                        probe.lattice.dim, phase, mult,
                                        sq_code, pa, pb, backend=backend)
    shell = np.maximum(shell.real, 0.0)
    peak = float(np.max(probe.lattice.bracket_sq() ** (probe.s + gain) * shell))
    d = probe.lattice.dim
    upper = probe.lattice.dxi ** (0.5 * d * (1 - probe.k)) * np.sqrt(peak)
    if probe.norm == "adapted":
        lam = probe.window_exponent
        upper *= 1.0 + probe.lattice.dxi ** (1.0 / lam - 0.5)
    return float(upper)


def estimate_norm(probe: BoundProbe, weight_code: int = kernels.WEIGHT_SIGMA,
                  pa: float | None = None, pb: float | None = None,
                  gain: float | None = None,
                  backend: str | None = None) -> NormEstimate:
    """Estimate the operator norm H^s x ... x H^s -> H^{s+gain}.

    The band-limited operator is measured without gain (its scaling lives
    in the M exponent); the phase-damped operator at the probe's eps.
    """
    if pa is None:
        pa = {kernels.WEIGHT_SIGMA: probe.sigma,
              kernels.WEIGHT_BAND: probe.alpha}.get(weight_code, 0.0)
    if pb is None:
        pb = probe.band_m if weight_code == kernels.WEIGHT_BAND else 0.0
    if gain is None:
        gain = 0.0 if weight_code == kernels.WEIGHT_BAND else probe.eps
    trial_norms = []
    for trial in range(probe.trials):
        inputs = probe_inputs(probe, trial)
        out = _apply(probe, inputs, weight_code, pa, pb, backend)
        trial_norms.append(probe.output_norm(out, gain))
    lower = max(trial_norms)
    upper = _upper_functional(probe, weight_code, pa, pb, gain, backend)
    return NormEstimate(lower, upper, gain, tuple(trial_norms))


@dataclass(frozen=True)
class BandScalingReport:
    """Fitted growth exponents of the band-limited operator norm."""

    m_values: tuple[float, ...]
    m_lowers: tuple[float, ...]
    m_uppers: tuple[float, ...]
    alpha_values: tuple[float, ...]
    alpha_lowers: tuple[float, ...]
    alpha_uppers: tuple[float, ...]
    beta_fit: SlopeFit
    gamma_fit: SlopeFit
    alpha_fixed: float
    m_fixed: float


def sweep_band_scaling(probe: BoundProbe, m_values, alpha_values,
                       alpha_fixed: float = 0.0, m_fixed: float | None = None,
                       backend: str | None = None) -> BandScalingReport:
    """Fit the norm lower bound against <M> (at alpha fixed) and <alpha>.

    Probe draws reuse the same seed at every sweep point, so the fitted
    exponents are not polluted by independent sampling noise.
    """
    m_values = [float(v) for v in m_values]
    alpha_values = [float(v) for v in alpha_values]
    if len(m_values) < 5 or len(alpha_values) < 5:
        raise ValueError("band sweeps need at least 5 values per parameter")
    if m_fixed is None:
        m_fixed = m_values[len(m_values) // 2]
    m_lowers, m_uppers = [], []
    for m_val in m_values:
        p = dataclasses.replace(probe, alpha=alpha_fixed, band_m=m_val)
        est = estimate_norm(p, kernels.WEIGHT_BAND, backend=backend)
        m_lowers.append(est.lower)
        m_uppers.append(est.upper)
    a_lowers, a_uppers = [], []
    for a_val in alpha_values:
        p = dataclasses.replace(probe, alpha=a_val, band_m=m_fixed)
        est = estimate_norm(p, kernels.WEIGHT_BAND, backend=backend)
        a_lowers.append(est.lower)
        a_uppers.append(est.upper)
    m_brackets = np.sqrt(1.0 + np.square(m_values))
    a_brackets = np.sqrt(1.0 + np.square(alpha_values))
    beta_fit = fit_loglog(m_brackets, m_lowers, min_points=5)
    gamma_fit = fit_loglog(a_brackets, a_lowers, min_points=5)
    return BandScalingReport(tuple(m_values), tuple(m_lowers), tuple(m_uppers),
                             tuple(alpha_values), tuple(a_lowers),
                             tuple(a_uppers), beta_fit, gamma_fit,
                             alpha_fixed, float(m_fixed))


@dataclass(frozen=True)
class FeasibilityCell:
    s: float
    eps: float
    sigma: float
    lower_base: float
    lower_refined: float
    upper_base: float
    growth: float
    bounded: bool


@dataclass(frozen=True)
class FeasibilityTable:
    equation: str
    growth_threshold: float
    cells: tuple[FeasibilityCell, ...]

    def cell(self, s: float, eps: float) -> FeasibilityCell:
        for c in self.cells:
            if abs(c.s - s) < 1e-12 and abs(c.eps - eps) < 1e-12:
                return c
        raise KeyError(f"no cell at s={s}, eps={eps}")


def sweep_gain_feasibility(probe: BoundProbe, s_values, eps_values,
                           sigma_values=None, growth_threshold: float = 1.3,
                           backend: str | None = None) -> FeasibilityTable:
    """Classify (s, eps) cells by norm growth under lattice doubling.

    A cell is bounded when the phase-damped norm lower bound grows by less
    than `growth_threshold` as the lattice extent (and size) double.
    """
    if sigma_values is None:
        sigma_values = [probe.sigma]
    cells = []
    for sigma in sigma_values:
        for s in s_values:
            for eps in eps_values:
                base = dataclasses.replace(probe, s=float(s), eps=float(eps),
                                           sigma=float(sigma))
                fine = dataclasses.replace(base, lattice=base.lattice.doubled())
                est0 = estimate_norm(base, kernels.WEIGHT_SIGMA, backend=backend)
                est1 = estimate_norm(fine, kernels.WEIGHT_SIGMA, backend=backend)
                growth = est1.lower / est0.lower if est0.lower > 0 else np.inf
                cells.append(FeasibilityCell(
                    float(s), float(eps), float(sigma), est0.lower, est1.lower,
                    est0.upper, float(growth), bool(growth < growth_threshold)))
    return FeasibilityTable(probe.eq.name, growth_threshold, tuple(cells))
