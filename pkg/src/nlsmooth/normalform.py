"""First steps of the normal form reduction on the frequency lattice.

Step 1 splits the interaction kernel at a threshold N into near-resonant
(|Phi| <= N) and nonresonant (|Phi| > N) parts; integrating the latter by
parts in time leaves a boundary term with kernel m(Xi) e^{itPhi}/(iPhi).
Step 2 substitutes the equation back into one slot of the nonresonant part
and splits the total modulation mu_2 = Phi_0 + Phi_1 against
beta_2 |Phi_0|^{1-delta}, with delta = sigma tied structurally.

The module measures how the term norms scale in N over ensembles of sharp
random profiles; the fitted slopes are compared against sigma (near term)
and -(1 - sigma) (boundary term).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .equations import EquationSpec
from .fitting import SlopeFit, fit_loglog
from .multilinear import BoundProbe, FreqLattice, apply_weighted, \
    lattice_sobolev_norm

__all__ = [
    "InfrConfig",
    "InfrScalingReport",
    "split_threshold",
    "sharp_profile",
    "split_resonant",
    "boundary_term",
    "second_step",
    "verify_scalings",
]


def split_threshold(j: int, k: int) -> float:
    """Threshold coefficient ((k-1)(j+1)+1)^k for the j-th splitting step."""
    if j < 1 or j != int(j):
        raise ValueError(f"step index must be a positive integer, got {j}")
    if k < 2 or k != int(k):
        raise ValueError(f"nonlinearity order must be an integer >= 2, got {k}")
    return float(((k - 1) * (j + 1) + 1) ** k)


@dataclass(frozen=True)
class InfrConfig:
    """Parameters of a normal-form scaling run.

    ``delta`` (the second-step modulation exponent) is structurally tied to
    ``sigma`` and cannot be set independently.
    """

    eq: EquationSpec
    s: float
    eps: float
    sigma: float
    n_values: tuple[float, ...]
    lattice: FreqLattice = field(default_factory=lambda: FreqLattice(256, 1024.0))
    j_max: int = 1
    ensemble: int = 4
    seed: int = 0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_values",
                           tuple(float(n) for n in self.n_values))
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if any(n <= 1.0 for n in self.n_values):
            raise ValueError("all thresholds must exceed 1")
        if self.j_max not in (1, 2):
            raise ValueError(f"j_max must be 1 or 2, got {self.j_max}")
        if self.j_max == 2 and (self.eq.dim != 1
                                or self.eq.primary_term.k != 3):
            raise ValueError("the second step is realized for 1D cubic terms")
        if self.ensemble < 1:
            raise ValueError("ensemble size must be positive")
        if self.lattice.dim != self.eq.dim:
            raise ValueError("lattice dimension must match the equation")

    @property
    def delta(self) -> float:
        return self.sigma


def _probe(eq: EquationSpec, lattice: FreqLattice, k: int | None) -> BoundProbe:
    k = eq.primary_term.k if k is None else k
    return BoundProbe(eq, s=0.0, eps=0.0, lattice=lattice, k=k, trials=1)


def sharp_profile(lattice: FreqLattice, s: float, seed, *,
                  delta_reg: float = 0.01) -> np.ndarray:
    """Random profile with sharp H^s decay <xi>^{-s - d/2 - delta_reg}."""
    rng = np.random.default_rng(seed)
    shape = lattice.shape
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    envelope = lattice.bracket_sq() ** (-0.5 * (s + 0.5 * lattice.dim
                                                + delta_reg))
    return g * envelope / np.sqrt(2.0)


def split_resonant(eq: EquationSpec, inputs, threshold: float,
                   lattice: FreqLattice, k: int | None = None,
                   backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Near-resonant and nonresonant parts; they sum to the full term."""
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    probe = _probe(eq, lattice, k)
    near = apply_weighted(probe, inputs, kernels.WEIGHT_NEAR, threshold,
                          backend=backend)
    far = apply_weighted(probe, inputs, kernels.WEIGHT_FAR, threshold,
                         backend=backend)
    return near, far


def boundary_term(eq: EquationSpec, inputs, threshold: float,
                  lattice: FreqLattice, t: float = 0.0, k: int | None = None,
                  backend: str | None = None) -> np.ndarray:
    """Integration-by-parts boundary term m e^{itPhi}/(iPhi) 1_{|Phi|>N}."""
    if threshold <= 1.0:
        raise ValueError(f"boundary threshold must exceed 1, got {threshold}")
    probe = _probe(eq, lattice, k)
    return apply_weighted(probe, inputs, kernels.WEIGHT_BOUNDARY, threshold,
                          t, backend=backend)


_J2_CODES = {"near": kernels.J2_NEAR, "far": kernels.J2_FAR,
             "boundary": kernels.J2_BOUNDARY}


def second_step(eq: EquationSpec, inputs, threshold: float, delta: float,
                lattice: FreqLattice, kind: str = "boundary", t: float = 0.0,
                backend: str | None = None) -> np.ndarray:
    """One substitution into slot 1 of the nonresonant part (J = 2).

    ``inputs`` are the five profile arrays: three for the substituted inner
    term, then the two remaining outer slots.  The five-slot conjugation
    pattern is the inner signature followed by the outer tail (for the
    Schroedinger-type cubic: +,-,+,-,+).
    """
    if kind not in _J2_CODES:
        raise ValueError(f"kind must be one of {sorted(_J2_CODES)}")
    term = eq.term(3)
    if eq.dim != 1:
        raise ValueError("the second step is realized for 1D cubic terms")
    if len(inputs) != 5:
        raise ValueError("second step expects 5 inputs")
    sig5 = term.signature + term.signature[1:]
    vals = []
    for v, sgn in zip(inputs, sig5):
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != lattice.shape:
            raise ValueError("input shape does not match the lattice")
        vals.append(np.conj(v) if sgn == -1 else v)
    beta = split_threshold(2, term.k)
    return kernels.second_step_convolution(
        vals, lattice.freqs, term.signature, term.signature,
        term.phase_code, term.mult_code, _J2_CODES[kind], threshold, beta,
        delta, t, backend=backend)


@dataclass(frozen=True)
class InfrScalingReport:
    """Measured N-scalings of the split terms for one configuration."""

    equation: str
    s: float
    eps: float
    sigma: float
    n_values: tuple[float, ...]
    near_norms: tuple[float, ...]       # geometric means over the ensemble
    far_norms: tuple[float, ...]
    boundary_norms: tuple[float, ...]
    near_fit: SlopeFit
    boundary_fit: SlopeFit
    partition_residual: float
    theory_near: float
    theory_boundary: float
    j2_boundary_norms: tuple[float, ...] | None = None
    j2_boundary_fit: SlopeFit | None = None
    theory_j2_boundary: float | None = None


def _geomean(rows: np.ndarray) -> np.ndarray:
    return np.exp(np.mean(np.log(rows), axis=0))


def verify_scalings(cfg: InfrConfig, backend: str | None = None
                    ) -> InfrScalingReport:
    """Fit near/boundary norm growth in N over the upper half of the range."""
    if len(cfg.n_values) < 5:
        raise ValueError("threshold scaling needs at least 5 N values")
    k = cfg.eq.primary_term.k
    probe = _probe(cfg.eq, cfg.lattice, k)
    out_s = cfg.s + cfg.eps
    near = np.zeros((cfg.ensemble, len(cfg.n_values)))
    far = np.zeros_like(near)
    bnd = np.zeros_like(near)
    j2 = np.zeros_like(near) if cfg.j_max == 2 else None
    residual = 0.0
    for i in range(cfg.ensemble):
        prof = sharp_profile(cfg.lattice, cfg.s, [cfg.seed, i])
        inputs = [prof] * k
        full = apply_weighted(probe, inputs, kernels.WEIGHT_PLAIN,
                              backend=backend)
        full_norm = lattice_sobolev_norm(full, cfg.lattice, out_s)
        for j, n_thr in enumerate(cfg.n_values):
            near_v, far_v = split_resonant(cfg.eq, inputs, n_thr, cfg.lattice,
                                           backend=backend)
            near[i, j] = lattice_sobolev_norm(near_v, cfg.lattice, out_s)
            far[i, j] = lattice_sobolev_norm(far_v, cfg.lattice, out_s)
            bnd_v = boundary_term(cfg.eq, inputs, n_thr, cfg.lattice, cfg.t,
                                  backend=backend)
            bnd[i, j] = lattice_sobolev_norm(bnd_v, cfg.lattice, out_s)
            gap = lattice_sobolev_norm(near_v + far_v - full, cfg.lattice,
                                       out_s)
            residual = max(residual, gap / full_norm)
            if j2 is not None:
                j2_v = second_step(cfg.eq, [prof] * 5, n_thr, cfg.delta,
                                   cfg.lattice, "boundary", cfg.t,
                                   backend=backend)
                j2[i, j] = lattice_sobolev_norm(j2_v, cfg.lattice, out_s)
    n_arr = np.asarray(cfg.n_values)
    upper_half = (float(n_arr[len(n_arr) // 2]), float(n_arr[-1]))
    near_gm = _geomean(near)
    bnd_gm = _geomean(bnd)
    near_fit = fit_loglog(n_arr, near_gm, window=upper_half)
    bnd_fit = fit_loglog(n_arr, bnd_gm, window=upper_half)
    j2_gm = _geomean(j2) if j2 is not None else None
    j2_fit = (fit_loglog(n_arr, j2_gm, window=upper_half)
              if j2 is not None else None)
    return InfrScalingReport(
        equation=cfg.eq.name, s=cfg.s, eps=cfg.eps, sigma=cfg.sigma,
        n_values=cfg.n_values,
        near_norms=tuple(near_gm), far_norms=tuple(_geomean(far)),
        boundary_norms=tuple(bnd_gm),
        near_fit=near_fit, boundary_fit=bnd_fit,
        partition_residual=float(residual),
        theory_near=cfg.sigma, theory_boundary=-(1.0 - cfg.sigma),
        j2_boundary_norms=tuple(j2_gm) if j2_gm is not None else None,
        j2_boundary_fit=j2_fit,
        theory_j2_boundary=(-1.5 * (1.0 - cfg.sigma)
                            if j2 is not None else None))
