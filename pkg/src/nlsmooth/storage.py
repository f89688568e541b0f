"""Deterministic on-disk formats for fields, checkpoints, and reports.

A spectrum file is a flat CSV with one row per lattice point -- frequency
components first, then the real and imaginary parts -- next to a small JSON
header describing the grid.  Reports are JSON documents plus flat CSV tables
meant for external plotting.  All floats are written with repr (shortest
round trip), so identical runs produce byte-identical files; nothing here
emits timestamps.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .grids import FourierField, SpectralGrid

__all__ = [
    "StorageExistsError",
    "ensure_writable",
    "write_field",
    "read_field",
    "write_json",
    "read_json",
    "write_csv",
    "field_csv_rows",
]


class StorageExistsError(FileExistsError):
    """Raised when an output path exists and overwrite was not forced."""


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; str() for the rest."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def ensure_writable(path: str, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise StorageExistsError(f"{path} exists (use --force to overwrite)")


def write_csv(path: str, header: Sequence[str],
              rows: Iterable[Sequence], *, force: bool = False) -> None:
    """Write rows with repr-formatted floats (byte-stable across runs)."""
    ensure_writable(path, force)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path: str, payload: dict, *, force: bool = False) -> None:
    """Canonical JSON: sorted keys, newline-terminated."""
    ensure_writable(path, force)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def field_csv_rows(field: FourierField) -> Iterable[tuple]:
    """Rows (xi components..., Re, Im) in C order of the coefficient array."""
    grid = field.grid
    coeffs = field.coeffs
    if grid.dim == 1:
        for k in range(grid.n):
            c = coeffs[k]
            yield (grid.freqs[k], c.real, c.imag)
    else:
        fx = grid.axis_freq(0)
        fy = grid.axis_freq(1)
        for i in range(grid.n):
            for j in range(grid.n):
                c = coeffs[i, j]
                yield (fx[i, 0], fy[0, j], c.real, c.imag)


def write_field(base: str, field: FourierField, *,
                sidecar: dict | None = None, force: bool = False) -> None:
    """Write `base`.csv (spectrum rows) and `base`.json (grid header).

    The header records the grid (dim, length, n, dealias fraction), the
    coefficient symmetry, the code version, and any caller-provided sidecar
    entries (equation name, time, config hash for checkpoints).
    """
    grid = field.grid
    header = {
        "dim": grid.dim,
        "length": grid.length,
        "n": grid.n,
        "dealias_fraction": grid.dealias_fraction,
        "real_symmetric": field.real_symmetric,
        "version": __version__,
    }
    if sidecar:
        header.update(sidecar)
    cols = (("xi", "re", "im") if grid.dim == 1
            else ("xi_x", "xi_y", "re", "im"))
    write_csv(base + ".csv", cols, field_csv_rows(field), force=force)
    write_json(base + ".json", header, force=force)


def read_field(base: str) -> tuple[FourierField, dict]:
    """Inverse of write_field; returns the field and the full header."""
    header = read_json(base + ".json")
    grid = SpectralGrid(int(header["dim"]), int(header["n"]),
                        float(header["length"]))
    if abs(grid.dealias_fraction - float(header["dealias_fraction"])) > 1e-12:
        raise ValueError("dealias fraction in header does not match grid")
    raw = np.loadtxt(base + ".csv", delimiter=",", skiprows=1,
                     dtype=float, ndmin=2)
    vals = raw[:, -2] + 1j * raw[:, -1]
    shape = (grid.n,) if grid.dim == 1 else (grid.n, grid.n)
    field = FourierField(grid, vals.reshape(shape),
                         real_symmetric=bool(header["real_symmetric"]))
    return field, header
