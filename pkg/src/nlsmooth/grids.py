"""Periodic spectral grids, Fourier fields, and the norms used throughout.

A large periodic box stands in for the real line (or plane): fields are
sampled on ``n`` points per axis of a box of side ``length``, and Fourier
coefficients are stored as *mode amplitudes*, i.e. the transform is
normalized so that a pure mode ``exp(i xi0 x)`` has coefficient 1 at
``xi0``.  All norms carry the frequency measure ``dxi**dim`` so that values
are stable as the box grows; the matching physical-side quadrature weight
is ``(dxi/n)**dim`` per sample, which makes the discrete Parseval identity
between `physical_l2_norm` and ``sobolev_norm(field, 0)`` exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralGrid",
    "FourierField",
    "transform_forward",
    "transform_inverse",
    "sobolev_norm",
    "physical_l2_norm",
    "weighted_norm",
    "lambda_window_norm",
    "adapted_norm",
    "dealiased_product",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


class SpectralGrid:
    """Uniform periodic grid with precomputed frequency arrays.

    Args:
        dim: spatial dimension, 1 or 2.
        n: modes per axis; must be a power of two.
        length: box side length (same along every axis).
        dealias_fraction: fraction of the Nyquist frequency kept when
            truncating products; 2/3 is the classical rule.
    """

    def __init__(self, dim: int, n: int, length: float,
                 dealias_fraction: float = 2.0 / 3.0):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if not _is_power_of_two(int(n)):
            raise ValueError(f"n must be a power of two, got {n}")
        if not length > 0:
            raise ValueError(f"length must be positive, got {length}")
        if not 0 < dealias_fraction <= 1:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {dealias_fraction}")

        self.dim = int(dim)
        self.n = int(n)
        self.length = float(length)
        self.dealias_fraction = float(dealias_fraction)

        self.dx = self.length / self.n
        self.dxi = 2.0 * np.pi / self.length
        self.xi_max = self.dxi * self.n / 2.0
        self.xi_cut = self.dealias_fraction * self.xi_max

        # 1D arrays per axis; FFT storage order throughout.
        self.x1d = self.dx * np.arange(self.n)
        self.freqs = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

        if self.dim == 1:
            self.xi_sq = self.freqs ** 2
            self.dealias_mask = np.abs(self.freqs) <= self.xi_cut
        else:
            fx = self.freqs[:, None]
            fy = self.freqs[None, :]
            self.xi_sq = fx ** 2 + fy ** 2
            self.dealias_mask = ((np.abs(fx) <= self.xi_cut)
                                 & (np.abs(fy) <= self.xi_cut))

        self.bracket_sq = 1.0 + self.xi_sq  # <xi>^2 on the lattice
        self.xi_abs = np.sqrt(self.xi_sq)

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    def axis_freq(self, axis: int) -> np.ndarray:
        """Frequency array broadcast along the given axis (2D helper)."""
        if self.dim == 1:
            return self.freqs
        return self.freqs[:, None] if axis == 0 else self.freqs[None, :]

    def meta(self) -> dict:
        return {
            "dim": self.dim,
            "n": self.n,
            "length": self.length,
            "dealias_fraction": self.dealias_fraction,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "SpectralGrid":
        return cls(meta["dim"], meta["n"], meta["length"],
                   meta["dealias_fraction"])

    def __eq__(self, other) -> bool:
        return (isinstance(other, SpectralGrid)
                and self.meta() == other.meta())

    def __repr__(self) -> str:
        return (f"SpectralGrid(dim={self.dim}, n={self.n}, "
                f"length={self.length}, "
                f"dealias_fraction={self.dealias_fraction})")


@dataclass(frozen=True)
class FourierField:
    """Fourier coefficients (mode amplitudes, FFT order) on a grid.

    ``real_symmetric`` records that the physical-space field is real, i.e.
    coefficients satisfy c(-xi) = conj(c(xi)).
    """

    grid: SpectralGrid
    coeffs: np.ndarray
    real_symmetric: bool = False

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid "
                f"shape {self.grid.shape}")
        if self.coeffs.dtype != np.complex128:
            object.__setattr__(self, "coeffs",
                               self.coeffs.astype(np.complex128))

    def replace_coeffs(self, coeffs: np.ndarray,
                       real_symmetric: bool | None = None) -> "FourierField":
        flag = self.real_symmetric if real_symmetric is None else real_symmetric
        return FourierField(self.grid, coeffs, flag)


def transform_forward(values: np.ndarray, grid: SpectralGrid) -> FourierField:
    """Physical samples -> mode amplitudes (pure mode exp(i xi0 x) -> 1)."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(
            f"value shape {values.shape} does not match grid {grid.shape}")
    coeffs = np.fft.fftn(values) / values.size
    return FourierField(grid, coeffs, real_symmetric=np.isrealobj(values))


def transform_inverse(field: FourierField) -> np.ndarray:
    """Mode amplitudes -> physical samples; real output for real fields."""
    values = np.fft.ifftn(field.coeffs) * field.coeffs.size
    return values.real if field.real_symmetric else values


def sobolev_norm(field: FourierField, s: float) -> float:
    """H^s norm: (sum <xi>^(2s) |c|^2 dxi^dim)^(1/2)."""
    grid = field.grid
    weighted = grid.bracket_sq ** s * np.abs(field.coeffs) ** 2
    return float(np.sqrt(weighted.sum() * grid.dxi ** grid.dim))


def physical_l2_norm(values: np.ndarray, grid: SpectralGrid) -> float:
    """L^2 norm from physical samples, in the same scaling as `sobolev_norm`.

    Quadrature weight (dxi/n)^dim per sample; equals sobolev_norm(., 0)
    exactly by Parseval.
    """
    values = np.asarray(values)
    mean_sq = np.mean(np.abs(values) ** 2)
    return float(np.sqrt(mean_sq * grid.dxi ** grid.dim))


def _center_bracket_sq(grid: SpectralGrid) -> np.ndarray:
    """<x - center>^2 on the physical lattice."""
    xc = grid.x1d - grid.length / 2.0
    if grid.dim == 1:
        return 1.0 + xc ** 2
    return 1.0 + xc[:, None] ** 2 + xc[None, :] ** 2


def weighted_norm(values: np.ndarray, grid: SpectralGrid, r: float) -> float:
    """Spatially weighted L^2 norm with weight <x - center>^(2r).

    r = 0 reduces to `physical_l2_norm`.  Decaying weights (r < 0) are
    allowed; the weight is measured from the box center.
    """
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(
            f"value shape {values.shape} does not match grid {grid.shape}")
    w = _center_bracket_sq(grid) ** r
    sq = np.sum(w * np.abs(values) ** 2) / values.size
    return float(np.sqrt(sq * grid.dxi ** grid.dim))


def lambda_window_norm(field: FourierField, lam: float) -> float:
    """l^lambda norm of the coefficients over the unit window |xi| < 1.

    Carries the measure factor dxi^dim, so flat coefficients of height c
    give c * 2^(1/lambda) in 1D as the lattice refines.
    """
    if not lam > 1:
        raise ValueError(f"lambda must exceed 1, got {lam}")
    grid = field.grid
    window = grid.xi_abs < 1.0
    amps = np.abs(field.coeffs[window])
    return float((amps ** lam).sum() * grid.dxi ** grid.dim) ** (1.0 / lam)


def adapted_norm(field: FourierField, s: float, lam: float) -> float:
    """Sobolev norm plus the low-frequency lambda-window norm."""
    return sobolev_norm(field, s) + lambda_window_norm(field, lam)


def _pad_modes(n: int, k: int) -> int:
    """Padded size for an alias-free product of k factors: ceil((k+1)/2 * n)."""
    n_pad = int(np.ceil((k + 1) * n / 2))
    return n_pad + (n_pad % 2)  # keep it even


def _embed(coeffs: np.ndarray, grid: SpectralGrid, n_pad: int) -> np.ndarray:
    """Zero-pad FFT-ordered coefficients onto the finer lattice."""
    n = grid.n
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)  # 0,1,..,-1 order
    if grid.dim == 1:
        out = np.zeros(n_pad, dtype=np.complex128)
        out[idx] = coeffs
    else:
        out = np.zeros((n_pad, n_pad), dtype=np.complex128)
        out[np.ix_(idx, idx)] = coeffs
    return out


def _extract(coeffs_pad: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    n = grid.n
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    if grid.dim == 1:
        return coeffs_pad[idx]
    return coeffs_pad[np.ix_(idx, idx)]


def dealiased_product(fields: list[FourierField],
                      signature: tuple[int, ...] | None = None) -> FourierField:
    """Pointwise product of fields (conjugating -1 slots), alias-free.

    The product is evaluated on a lattice padded by the factor (k+1)/2 for k
    factors, transformed back, restricted to the original lattice, and
    truncated at the dealias cutoff.  In mode space this realizes the signed
    convolution sum over xi = sum_j s_j xi_j restricted to |xi| <= xi_cut.
    """
    if len(fields) < 2:
        raise ValueError("need at least two factors")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields[1:]):
        raise ValueError("all factors must share one grid")
    k = len(fields)
    if signature is None:
        signature = (1,) * k
    if len(signature) != k or any(s not in (-1, 1) for s in signature):
        raise ValueError(f"signature must be k entries of +-1, got {signature}")

    n_pad = _pad_modes(grid.n, k)
    scale = n_pad ** grid.dim
    prod = None
    phys_cache: dict[int, np.ndarray] = {}  # repeated factors transform once
    for field, s in zip(fields, signature):
        phys = phys_cache.get(id(field))
        if phys is None:
            phys = np.fft.ifftn(_embed(field.coeffs, grid, n_pad)) * scale
            phys_cache[id(field)] = phys
        if s == -1:
            phys = np.conj(phys)
        prod = phys if prod is None else prod * phys
    coeffs = _extract(np.fft.fftn(prod) / scale, grid)
    coeffs = np.where(grid.dealias_mask, coeffs, 0.0)
    real_out = all(f.real_symmetric for f in fields)
    return FourierField(grid, coeffs, real_symmetric=real_out)
