"""On-disk CSV/JSON formats."""

import json

import numpy as np
import pytest

from nlsmooth.grids import FourierField, SpectralGrid
from nlsmooth.storage import (
    StorageExistsError,
    field_csv_rows,
    read_field,
    read_json,
    write_csv,
    write_field,
    write_json,
)


def random_field(dim: int, n: int, seed: int = 0,
                 real_symmetric: bool = False) -> FourierField:
    grid = SpectralGrid(dim, n, 2.0 * np.pi)
    rng = np.random.default_rng(seed)
    shape = (n,) * dim
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return FourierField(grid, coeffs * grid.dealias_mask,
                        real_symmetric=real_symmetric)


class TestFieldRoundtrip:
    """write_field / read_field recover coefficients exactly."""

    @pytest.mark.parametrize("dim,n", [(1, 32), (2, 8)])
    def test_bitwise_roundtrip(self, tmp_path, dim, n):
        field = random_field(dim, n)
        base = str(tmp_path / "field")
        write_field(base, field)
        back, header = read_field(base)
        np.testing.assert_array_equal(back.coeffs, field.coeffs)
        assert back.grid.n == n
        assert back.grid.dim == dim
        assert header["length"] == field.grid.length

    def test_header_records_symmetry_and_sidecar(self, tmp_path):
        field = random_field(1, 16, real_symmetric=True)
        base = str(tmp_path / "chk")
        write_field(base, field, sidecar={"equation": "kdv", "time": 0.5})
        back, header = read_field(base)
        assert back.real_symmetric is True
        assert header["equation"] == "kdv"
        assert header["time"] == 0.5
        assert "version" in header

    def test_row_layout_matches_lattice(self, tmp_path):
        field = random_field(2, 4)
        rows = list(field_csv_rows(field))
        assert len(rows) == 16
        fx = field.grid.axis_freq(0)
        fy = field.grid.axis_freq(1)
        # C order: second lattice row starts after grid.n entries
        xi_x, xi_y, re, im = rows[4]
        assert xi_x == fx[1, 0]
        assert xi_y == fy[0, 0]
        assert re + 1j * im == field.coeffs[1, 0]

    def test_dealias_mismatch_rejected(self, tmp_path):
        field = random_field(1, 16)
        base = str(tmp_path / "field")
        write_field(base, field)
        header = read_json(base + ".json")
        header["dealias_fraction"] = 0.5
        write_json(base + ".json", header, force=True)
        with pytest.raises(ValueError):
            read_field(base)


class TestOverwriteGuard:
    """Existing outputs are never clobbered without force."""

    def test_write_field_refuses_then_forces(self, tmp_path):
        field = random_field(1, 16)
        base = str(tmp_path / "field")
        write_field(base, field)
        with pytest.raises(StorageExistsError):
            write_field(base, field)
        write_field(base, field, force=True)

    def test_csv_and_json_guards(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_csv(path, ["a"], [[1.0]])
        with pytest.raises(StorageExistsError):
            write_csv(path, ["a"], [[1.0]])
        jpath = str(tmp_path / "t.json")
        write_json(jpath, {"a": 1})
        with pytest.raises(StorageExistsError):
            write_json(jpath, {"a": 1})


class TestDeterminism:
    """Identical payloads produce byte-identical files."""

    def test_csv_bytes_stable(self, tmp_path):
        rows = [(0.1, -2, "tag"), (1e-17, 3.5, "x")]
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        write_csv(p1, ["f", "i", "s"], rows)
        write_csv(p2, ["f", "i", "s"], rows)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_float_repr_roundtrips(self, tmp_path):
        values = [0.1, 1 / 3, 1e-300, 123456.789012345]
        path = str(tmp_path / "f.csv")
        write_csv(path, ["v"], [[v] for v in values])
        lines = open(path).read().splitlines()[1:]
        assert [float(s) for s in lines] == values

    def test_json_sorted_and_newline_terminated(self, tmp_path):
        path = str(tmp_path / "r.json")
        write_json(path, {"zeta": 1, "alpha": 2})
        text = open(path).read()
        assert text.index('"alpha"') < text.index('"zeta"')
        assert text.endswith("\n")
        assert json.loads(text) == {"zeta": 1, "alpha": 2}
