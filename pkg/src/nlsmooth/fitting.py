"""Log-log least-squares fits shared by the sweep and smoothing reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SlopeFit", "fit_loglog"]


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least-squares fit of log(y) against log(x)."""

    slope: float
    intercept: float
    stderr: float
    r_squared: float
    n_points: int
    window: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "window": list(self.window) if self.window is not None else None,
        }


def fit_loglog(x, y, window: tuple[float, float] | None = None,
               min_points: int = 2) -> SlopeFit:
    """Fit log y = slope * log x + intercept over x in `window`.

    Nonpositive y values are dropped (they carry no log information);
    raises ValueError when fewer than `min_points` usable points remain.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1D arrays of equal length")
    keep = (y > 0.0) & (x > 0.0)
    if window is not None:
        lo, hi = window
        if not lo < hi:
            raise ValueError(f"empty fit window {window}")
        keep &= (x >= lo) & (x <= hi)
    x, y = x[keep], y[keep]
    n = x.size
    if n < min_points:
        raise ValueError(
            f"degenerate fit: {n} usable points, need at least {min_points}")
    lx, ly = np.log(x), np.log(y)
    mx = lx.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate fit: all x identical")
    slope = float(np.sum((lx - mx) * ly) / sxx)
    intercept = float(ly.mean() - slope * mx)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    stderr = float(np.sqrt(ss_res / (n - 2) / sxx)) if n > 2 else float("nan")
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope, intercept, stderr, r_squared, n,
                    tuple(window) if window is not None else None)
