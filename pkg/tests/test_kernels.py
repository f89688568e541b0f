"""Convolution kernel backends against direct-sum oracles."""

import numpy as np
import pytest

from nlsmooth import kernels
from nlsmooth.kernels import (J2_BOUNDARY, J2_FAR, J2_NEAR, PHASE_COORD1,
                              WEIGHT_BAND, WEIGHT_BOUNDARY, WEIGHT_BOUNDARY_SQ,
                              WEIGHT_FAR, WEIGHT_NEAR, WEIGHT_PLAIN,
                              WEIGHT_SIGMA, WEIGHT_SIGMA_SQ,
                              available_backends, lattice_convolution,
                              second_step_convolution, selected_backend)

BACKENDS = available_backends()


def centered_freqs(m, dxi=1.0):
    return (np.arange(m) - m // 2) * dxi


def phase_scalar(code, xo, xis):
    if code == 0:
        return 3.0 * (xo - xis[0]) * (xo - xis[1]) * (xo - xis[2])
    if code == 1:
        return 3.0 * xo * xis[0] * xis[1]
    if code == 2:
        return (xo - xis[0]) * (xo - xis[2])
    if code == 3:
        return 2.0 * (xo - xis[0]) * (xo - xis[2])
    if code == 4:
        return (xo ** 2 - xis[0] ** 2 + xis[1] ** 2 - xis[2] ** 2
                + xis[3] ** 2 - xis[4] ** 2)
    if code == PHASE_COORD1:
        return xis[0]
    raise ValueError(code)


def mult_scalar(code, xo, xis):
    if code == 0:
        return 1.0
    if code == 1:
        return xo
    if code == 2:
        return xis[1]
    if code == 3:
        return 0.5
    raise ValueError(code)


def weight_scalar(code, phi, pa, pb):
    if code == WEIGHT_PLAIN:
        return 1.0
    if code == WEIGHT_SIGMA:
        return (1.0 + phi * phi) ** (-0.5 * pa)
    if code == WEIGHT_SIGMA_SQ:
        return (1.0 + phi * phi) ** (-pa)
    if code in (WEIGHT_BAND, kernels.WEIGHT_BAND_SQ):
        return float(abs(phi - pa) < pb)
    if code in (WEIGHT_NEAR, kernels.WEIGHT_NEAR_SQ):
        return float(abs(phi) <= pa)
    if code in (WEIGHT_FAR, kernels.WEIGHT_FAR_SQ):
        return float(abs(phi) > pa)
    if code == WEIGHT_BOUNDARY:
        return np.exp(1j * pb * phi) / (1j * phi) if abs(phi) > pa else 0.0
    if code == WEIGHT_BOUNDARY_SQ:
        return 1.0 / (phi * phi) if abs(phi) > pa else 0.0
    raise ValueError(code)


def oracle_1d(vals, freqs, sig, phase_code, mult_code, weight_code,
              pa=0.0, pb=0.0):
    """Direct loop over all index tuples; the definition, written plainly."""
    m = freqs.size
    h = m // 2
    k = len(vals)
    out = np.zeros(m, dtype=np.complex128)
    sq = weight_code >= WEIGHT_SIGMA_SQ
    import itertools
    for o in range(m):
        total = 0.0 + 0.0j
        for idx in itertools.product(range(m), repeat=k - 1):
            # last index is fixed by the constraint o-h = sum s_j (i_j - h)
            partial = sum(sig[j] * (idx[j] - h) for j in range(k - 1))
            last_off = sig[-1] * ((o - h) - partial)
            if not -h <= last_off <= h - 1:
                continue
            ids = idx + (last_off + h,)
            xis = [freqs[i] for i in ids]
            phi = phase_scalar(phase_code, freqs[o], xis)
            mult = mult_scalar(mult_code, freqs[o], xis)
            if sq:
                mult = mult * mult
            w = weight_scalar(weight_code, phi, pa, pb)
            term = w * mult
            for j, i in enumerate(ids):
                term = term * vals[j][i]
            total += term
        out[o] = total
    return out


def oracle_2d_k3(vals, freqs, sig, weight_code, mult_code, pa=0.0, pb=0.0):
    m = freqs.size
    h = m // 2
    out = np.zeros((m, m), dtype=np.complex128)
    sq = weight_code >= WEIGHT_SIGMA_SQ
    flat = [v.reshape(-1) for v in vals]
    import itertools
    for ox in range(m):
        for oy in range(m):
            total = 0.0 + 0.0j
            for i1, i2 in itertools.product(range(m * m), repeat=2):
                x1, y1 = divmod(i1, m)
                x2, y2 = divmod(i2, m)
                x3 = sig[2] * ((ox - h) - sig[0] * (x1 - h) - sig[1] * (x2 - h))
                y3 = sig[2] * ((oy - h) - sig[0] * (y1 - h) - sig[1] * (y2 - h))
                if not (-h <= x3 <= h - 1 and -h <= y3 <= h - 1):
                    continue
                fo = (freqs[ox], freqs[oy])
                fx = [freqs[x1], freqs[x2], freqs[x3 + h]]
                fy = [freqs[y1], freqs[y2], freqs[y3 + h]]
                phi = ((fo[0] - fx[0]) * (fo[0] - fx[1]) * (fo[0] - fx[2])
                       + (fo[1] - fy[0]) * (fo[1] - fy[1]) * (fo[1] - fy[2]))
                mult = fo[0] + fo[1] if mult_code == 4 else 1.0
                if sq:
                    mult = mult * mult
                w = weight_scalar(weight_code, phi, pa, pb)
                total += (w * mult * flat[0][i1] * flat[1][i2]
                          * flat[2][(x3 + h) * m + (y3 + h)])
            out[ox, oy] = total
    return out


def rand_vals(m, k, seed, dim=1):
    rng = np.random.default_rng(seed)
    shape = (m,) if dim == 1 else (m, m)
    return [rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            for _ in range(k)]


class TestBackendSelection:
    """Environment-driven backend switching."""

    def test_numba_available_here(self):
        assert "numba" in available_backends()
        assert "numpy" in available_backends()

    def test_env_selects(self, monkeypatch):
        monkeypatch.setenv("NLSMOOTH_BACKEND", "numpy")
        assert selected_backend() == "numpy"
        monkeypatch.setenv("NLSMOOTH_BACKEND", "numba")
        assert selected_backend() == "numba"
        monkeypatch.setenv("NLSMOOTH_BACKEND", "auto")
        assert selected_backend() in ("numba", "numpy")

    def test_env_validation(self, monkeypatch):
        monkeypatch.setenv("NLSMOOTH_BACKEND", "gpu")
        with pytest.raises(ValueError):
            selected_backend()

    def test_explicit_backend_argument(self):
        vals = rand_vals(8, 2, 0)
        freqs = centered_freqs(8)
        a = lattice_convolution(vals, freqs, (1, 1), 1, 1, 0, WEIGHT_PLAIN,
                                backend="numpy")
        b = lattice_convolution(vals, freqs, (1, 1), 1, 1, 0, WEIGHT_PLAIN,
                                backend="numba")
        assert np.allclose(a, b, atol=1e-12)
        with pytest.raises(ValueError):
            lattice_convolution(vals, freqs, (1, 1), 1, 1, 0, WEIGHT_PLAIN,
                                backend="gpu")


class TestOracle1D:
    """Both backends against the direct-sum oracle, 1D."""

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_k2_kdv_weights(self, backend):
        m = 12
        freqs = centered_freqs(m, 0.5)
        vals = rand_vals(m, 2, 1)
        for wc, pa, pb in [(WEIGHT_PLAIN, 0, 0), (WEIGHT_SIGMA, 0.75, 0),
                           (WEIGHT_NEAR, 3.0, 0), (WEIGHT_BOUNDARY, 3.0, 0.7)]:
            got = lattice_convolution(vals, freqs, (1, 1), 1, 1, 1, wc,
                                      pa, pb, backend=backend)
            want = oracle_1d(vals, freqs, (1, 1), 1, 1, wc, pa, pb)
            assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_k3_nls_signature(self, backend):
        m = 10
        freqs = centered_freqs(m, 1.0)
        vals = rand_vals(m, 3, 2)
        for wc, pa, pb in [(WEIGHT_SIGMA, 0.6, 0.0), (WEIGHT_BAND, 4.0, 2.0),
                           (WEIGHT_FAR, 2.0, 0.0), (WEIGHT_SIGMA_SQ, 0.6, 0)]:
            got = lattice_convolution(vals, freqs, (1, -1, 1), 1, 2, 0, wc,
                                      pa, pb, backend=backend)
            want = oracle_1d(vals, freqs, (1, -1, 1), 2, 0, wc, pa, pb)
            assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_k3_mkdv_multiplier(self, backend):
        m = 10
        freqs = centered_freqs(m, 0.7)
        vals = rand_vals(m, 3, 3)
        got = lattice_convolution(vals, freqs, (1, 1, 1), 1, 0, 1,
                                  WEIGHT_SIGMA, 0.8, 0.0, backend=backend)
        want = oracle_1d(vals, freqs, (1, 1, 1), 0, 1, WEIGHT_SIGMA, 0.8, 0.0)
        assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_k5_quintic(self, backend):
        m = 8
        freqs = centered_freqs(m, 1.0)
        vals = rand_vals(m, 5, 4)
        got = lattice_convolution(vals, freqs, (1, -1, 1, -1, 1), 1, 4, 3,
                                  WEIGHT_SIGMA, 0.5, 0.0, backend=backend)
        want = oracle_1d(vals, freqs, (1, -1, 1, -1, 1), 4, 3,
                         WEIGHT_SIGMA, 0.5, 0.0)
        assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_k1_diagonal(self, backend):
        m = 16
        freqs = centered_freqs(m, 0.5)
        vals = rand_vals(m, 1, 5)
        got = lattice_convolution(vals, freqs, (1,), 1, PHASE_COORD1, 0,
                                  WEIGHT_SIGMA, 0.6, 0.0, backend=backend)
        want = (1.0 + freqs ** 2) ** (-0.3) * vals[0]
        assert np.allclose(got, want, atol=1e-12)

    def test_backends_agree_exactly(self):
        # same sums, same order per output: identical floating-point results
        m = 16
        freqs = centered_freqs(m, 0.5)
        vals = rand_vals(m, 3, 6)
        a = lattice_convolution(vals, freqs, (1, -1, 1), 1, 2, 0,
                                WEIGHT_SIGMA, 0.6, 0.0, backend="numba")
        b = lattice_convolution(vals, freqs, (1, -1, 1), 1, 2, 0,
                                WEIGHT_SIGMA, 0.6, 0.0, backend="numba")
        assert np.array_equal(a, b)


class TestOracle2D:
    """Both backends against the direct-sum oracle, 2D cubic."""

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_mzk_sigma(self, backend):
        m = 6
        freqs = centered_freqs(m, 1.0)
        vals = rand_vals(m, 3, 7, dim=2)
        got = lattice_convolution(vals, freqs, (1, 1, 1), 2, 5, 4,
                                  WEIGHT_SIGMA, 0.6, 0.0, backend=backend)
        want = oracle_2d_k3(vals, freqs, (1, 1, 1), WEIGHT_SIGMA, 4, 0.6, 0.0)
        assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_mzk_boundary_sq(self, backend):
        m = 6
        freqs = centered_freqs(m, 1.0)
        vals = [np.abs(v) + 0.0j for v in rand_vals(m, 3, 8, dim=2)]
        got = lattice_convolution(vals, freqs, (1, 1, 1), 2, 5, 4,
                                  WEIGHT_BOUNDARY_SQ, 2.0, 0.0,
                                  backend=backend)
        want = oracle_2d_k3(vals, freqs, (1, 1, 1), WEIGHT_BOUNDARY_SQ, 4,
                            2.0, 0.0)
        assert np.allclose(got, want, atol=1e-10)


class TestSecondStep:
    """One-substitution sums against a direct oracle."""

    @staticmethod
    def oracle(vals, freqs, osig, isig, phase_code, mult_code, j2_code,
               nthr, beta, delta, tval):
        m = freqs.size
        h = m // 2
        dxi = freqs[1] - freqs[0]
        vh1, vh2, vh3, v2, v3 = vals
        out = np.zeros(m, dtype=np.complex128)
        for o in range(m):
            for i2 in range(m):
                for i3 in range(m):
                    zoff = (o - h) - osig[1] * (i2 - h) - osig[2] * (i3 - h)
                    zeta = zoff * dxi
                    phi0 = phase_scalar(phase_code, freqs[o],
                                        [zeta, freqs[i2], freqs[i3]])
                    if abs(phi0) <= nthr:
                        continue
                    for j1 in range(m):
                        for j2x in range(m):
                            j3off = isig[2] * (zoff - isig[0] * (j1 - h)
                                               - isig[1] * (j2x - h))
                            if not -h <= j3off <= h - 1:
                                continue
                            xh = [freqs[j1], freqs[j2x], freqs[j3off + h]]
                            phi1 = phase_scalar(phase_code, zeta, xh)
                            mu2 = phi0 + phi1
                            thresh = beta * abs(phi0) ** (1.0 - delta)
                            if j2_code == J2_NEAR:
                                w = (abs(mu2) <= thresh) / phi0
                            elif j2_code == J2_FAR:
                                w = (abs(mu2) > thresh) / phi0
                            else:
                                w = (np.exp(1j * tval * mu2) / (1j * mu2)
                                     if abs(mu2) > thresh else 0.0) / phi0
                            m0 = mult_scalar(mult_code, freqs[o],
                                             [zeta, freqs[i2], freqs[i3]])
                            m1 = mult_scalar(mult_code, zeta, xh)
                            out[o] += (w * m0 * m1 * vh1[j1] * vh2[j2x]
                                       * vh3[j3off + h] * v2[i2] * v3[i3])
        return out

    @pytest.mark.parametrize("backend", BACKENDS)
    @pytest.mark.parametrize("j2_code", [J2_NEAR, J2_FAR, J2_BOUNDARY])
    def test_nls_substitution(self, backend, j2_code):
        m = 8
        freqs = centered_freqs(m, 1.0)
        vals = rand_vals(m, 5, 9)
        args = (freqs, (1, -1, 1), (1, -1, 1), 2, 0, j2_code,
                1.0, 0.9, 0.1, 0.5)
        got = second_step_convolution(vals, *args, backend=backend)
        want = self.oracle(vals, freqs, (1, -1, 1), (1, -1, 1), 2, 0,
                           j2_code, 1.0, 0.9, 0.1, 0.5)
        assert np.allclose(got, want, atol=1e-10)

    def test_conjugated_first_slot_rejected(self):
        m = 8
        vals = rand_vals(m, 5, 10)
        with pytest.raises(ValueError):
            second_step_convolution(vals, centered_freqs(m), (-1, 1, 1),
                                    (1, -1, 1), 2, 0, J2_NEAR, 1.0, 0.9, 0.1)


class TestValidation:
    """Dispatch guards."""

    def test_unknown_combinations(self):
        vals = rand_vals(8, 4, 11)
        with pytest.raises(ValueError):
            lattice_convolution(vals, centered_freqs(8), (1, 1, 1, 1), 1,
                                0, 0, WEIGHT_PLAIN)

    def test_phase_code_compatibility(self):
        vals = rand_vals(8, 3, 12)
        with pytest.raises(ValueError):
            lattice_convolution(vals, centered_freqs(8), (1, 1, 1), 1,
                                5, 0, WEIGHT_PLAIN)  # mzk phase needs 2D

    def test_signature_length(self):
        vals = rand_vals(8, 3, 13)
        with pytest.raises(ValueError):
            lattice_convolution(vals, centered_freqs(8), (1, 1), 1, 0, 0,
                                WEIGHT_PLAIN)
