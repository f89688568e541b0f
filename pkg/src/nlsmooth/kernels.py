"""Brute-force signed-convolution kernels over truncated frequency lattices.

These sums are the hot loops of the whole package: for every output
frequency they enumerate all constraint tuples xi = sum_j s_j xi_j on the
lattice and accumulate ``weight(Phi(Xi)) * m(Xi) * prod_j v_j(xi_j)``.
Two interchangeable implementations exist:

* a numba ``@njit(parallel=True)`` version (`_kernels_numba`), parallel over
  output frequencies with a serial inner accumulation per output, so results
  are independent of the thread count, and
* a pure-numpy version in this module, vectorized over the free tuple
  coordinates one output at a time.

The environment variable ``NLSMOOTH_BACKEND`` selects between them:
``auto`` (default; numba when importable), ``numba``, or ``numpy``.

Value arrays are passed *already conjugated* for -1 signature slots; the
signature only steers the index constraint here.  Lattice frequencies are
in ascending (centered) order, ``freqs[i] = (i - m/2) * dxi``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "available_backends",
    "selected_backend",
    "lattice_convolution",
    "second_step_convolution",
    "WEIGHT_PLAIN",
    "WEIGHT_SIGMA",
    "WEIGHT_BAND",
    "WEIGHT_NEAR",
    "WEIGHT_FAR",
    "WEIGHT_BOUNDARY",
    "WEIGHT_SIGMA_SQ",
    "WEIGHT_BAND_SQ",
    "WEIGHT_NEAR_SQ",
    "WEIGHT_FAR_SQ",
    "WEIGHT_BOUNDARY_SQ",
    "J2_NEAR",
    "J2_FAR",
    "J2_BOUNDARY",
    "PHASE_COORD1",
]

# Weight codes.  Parameters: sigma -> pa; band -> (alpha=pa, M=pb);
# near/far/boundary -> threshold N=pa, time t=pb.  The *_SQ variants square
# both the weight and the multiplier; they implement the Cauchy-Schwarz
# upper functional with nonnegative input profiles.
WEIGHT_PLAIN = 0
WEIGHT_SIGMA = 1
WEIGHT_BAND = 2
WEIGHT_NEAR = 3
WEIGHT_FAR = 4
WEIGHT_BOUNDARY = 5
WEIGHT_SIGMA_SQ = 6
WEIGHT_BAND_SQ = 7
WEIGHT_NEAR_SQ = 8
WEIGHT_FAR_SQ = 9
WEIGHT_BOUNDARY_SQ = 10

# Extra phase code (on top of the equation codes in equations.py): the
# "phase" is the first input coordinate.  Used by the calibration surrogate
# where the band indicator must cut a plain interval.
PHASE_COORD1 = 6

# Second-step (one substitution) weight codes.
J2_NEAR = 0
J2_FAR = 1
J2_BOUNDARY = 2

_VALID_BACKENDS = ("auto", "numba", "numpy")
_numba_module = None
_numba_failed = False


def _load_numba_kernels():
    global _numba_module, _numba_failed
    if _numba_module is None and not _numba_failed:
        try:
            from . import _kernels_numba
            _numba_module = _kernels_numba
        except ImportError:
            _numba_failed = True
    return _numba_module


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _load_numba_kernels() else ("numpy",)


def selected_backend() -> str:
    """Backend chosen by NLSMOOTH_BACKEND (auto/numba/numpy)."""
    env = os.environ.get("NLSMOOTH_BACKEND", "auto").lower()
    if env not in _VALID_BACKENDS:
        raise ValueError(
            f"NLSMOOTH_BACKEND must be one of {_VALID_BACKENDS}, got {env!r}")
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not _load_numba_kernels():
            raise RuntimeError("numba backend requested but numba is not usable")
        return "numba"
    return "numba" if _load_numba_kernels() else "numpy"


# ---------------------------------------------------------------------------
# scalar weight/phase helpers shared by the numpy implementations

def _phase_np(code: int, xi_out, xis) -> np.ndarray:
    """Vectorized phase; `xi_out` broadcasts against the entries of `xis`.

    1D: xis is a list of k arrays; 2D: xi_out and each entry are (x, y) pairs.
    """
    if code == 0:   # mkdv
        x = xi_out
        return 3.0 * (x - xis[0]) * (x - xis[1]) * (x - xis[2])
    if code == 1:   # kdv
        return 3.0 * xi_out * xis[0] * xis[1]
    if code == 2:   # nls
        return (xi_out - xis[0]) * (xi_out - xis[2])
    if code == 3:   # dnls cubic
        return 2.0 * (xi_out - xis[0]) * (xi_out - xis[2])
    if code == 4:   # dnls quintic
        return (xi_out ** 2 - xis[0] ** 2 + xis[1] ** 2 - xis[2] ** 2
                + xis[3] ** 2 - xis[4] ** 2)
    if code == PHASE_COORD1:
        return xis[0] + 0.0 * xi_out
    raise ValueError(f"unsupported 1D phase code {code}")


def _phase_np_2d(code: int, ox, oy, xs, ys) -> np.ndarray:
    if code == 5:   # mzk
        return ((ox - xs[0]) * (ox - xs[1]) * (ox - xs[2])
                + (oy - ys[0]) * (oy - ys[1]) * (oy - ys[2]))
    raise ValueError(f"unsupported 2D phase code {code}")


def _mult_np(code: int, xi_out, xis) -> np.ndarray:
    if code == 0:
        return np.ones_like(np.asarray(xi_out, dtype=float) + 0.0 * xis[0])
    if code == 1:
        return xi_out + 0.0 * xis[0]
    if code == 2:
        return xis[1] + 0.0 * xi_out
    if code == 3:
        return 0.5 * np.ones_like(np.asarray(xi_out, dtype=float) + 0.0 * xis[0])
    raise ValueError(f"unsupported 1D multiplier code {code}")


def _weight_np(code: int, phi: np.ndarray, pa: float, pb: float) -> np.ndarray:
    if code == WEIGHT_PLAIN:
        return np.ones_like(phi)
    if code == WEIGHT_SIGMA:
        return (1.0 + phi * phi) ** (-0.5 * pa)
    if code == WEIGHT_BAND or code == WEIGHT_BAND_SQ:
        return (np.abs(phi - pa) < pb).astype(float)
    if code == WEIGHT_NEAR or code == WEIGHT_NEAR_SQ:
        return (np.abs(phi) <= pa).astype(float)
    if code == WEIGHT_FAR or code == WEIGHT_FAR_SQ:
        return (np.abs(phi) > pa).astype(float)
    if code == WEIGHT_BOUNDARY:
        far = np.abs(phi) > pa
        safe = np.where(far, phi, 1.0)
        return np.where(far, np.exp(1j * pb * safe) / (1j * safe), 0.0)
    if code == WEIGHT_SIGMA_SQ:
        return (1.0 + phi * phi) ** (-pa)
    if code == WEIGHT_BOUNDARY_SQ:
        far = np.abs(phi) > pa
        safe = np.where(far, phi, 1.0)
        return np.where(far, 1.0 / (safe * safe), 0.0)
    raise ValueError(f"unknown weight code {code}")


def _squared(code: int) -> bool:
    return code >= WEIGHT_SIGMA_SQ


# ---------------------------------------------------------------------------
# numpy implementations

def _conv_1d_k2(vals, freqs, sig, phase_code, mult_code, weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    off = np.arange(m) - h
    out = np.zeros(m, dtype=np.complex128)
    v1, v2 = vals
    s1, s2 = sig
    for o in range(m):
        i2off = s2 * ((o - h) - s1 * off)
        valid = (i2off >= -h) & (i2off <= h - 1)
        idx2 = np.clip(i2off + h, 0, m - 1)
        xi1 = freqs
        xi2 = freqs[idx2]
        phi = _phase_np(phase_code, freqs[o], [xi1, xi2])
        mult = _mult_np(mult_code, freqs[o], [xi1, xi2])
        if _squared(weight_code):
            mult = mult * mult
        w = _weight_np(weight_code, phi, pa, pb) * mult
        out[o] = np.sum(np.where(valid, w * v1 * v2[idx2], 0.0))
    return out


def _conv_1d_k3(vals, freqs, sig, phase_code, mult_code, weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    off = np.arange(m) - h
    out = np.zeros(m, dtype=np.complex128)
    v1, v2, v3 = vals
    s1, s2, s3 = sig
    o1 = off[:, None]
    o2 = off[None, :]
    xi1 = freqs[:, None]
    xi2 = freqs[None, :]
    prod12 = v1[:, None] * v2[None, :]
    for o in range(m):
        i3off = s3 * ((o - h) - s1 * o1 - s2 * o2)
        valid = (i3off >= -h) & (i3off <= h - 1)
        idx3 = np.clip(i3off + h, 0, m - 1)
        xi3 = freqs[idx3]
        phi = _phase_np(phase_code, freqs[o], [xi1, xi2, xi3])
        mult = _mult_np(mult_code, freqs[o], [xi1, xi2, xi3])
        if _squared(weight_code):
            mult = mult * mult
        w = _weight_np(weight_code, phi, pa, pb) * mult
        out[o] = np.sum(np.where(valid, w * prod12 * v3[idx3], 0.0))
    return out


def _conv_1d_k5(vals, freqs, sig, phase_code, mult_code, weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    off = np.arange(m) - h
    out = np.zeros(m, dtype=np.complex128)
    v1, v2, v3, v4, v5 = vals
    s1, s2, s3, s4, s5 = sig
    o2 = off[:, None, None]
    o3 = off[None, :, None]
    o4 = off[None, None, :]
    xi2 = freqs[:, None, None]
    xi3 = freqs[None, :, None]
    xi4 = freqs[None, None, :]
    prod234 = v2[:, None, None] * v3[None, :, None] * v4[None, None, :]
    for o in range(m):
        for i1 in range(m):
            i5off = s5 * ((o - h) - s1 * (i1 - h) - s2 * o2 - s3 * o3 - s4 * o4)
            valid = (i5off >= -h) & (i5off <= h - 1)
            idx5 = np.clip(i5off + h, 0, m - 1)
            xi5 = freqs[idx5]
            xis = [freqs[i1], xi2, xi3, xi4, xi5]
            phi = _phase_np(phase_code, freqs[o], xis)
            mult = _mult_np(mult_code, freqs[o], xis)
            if _squared(weight_code):
                mult = mult * mult
            w = _weight_np(weight_code, phi, pa, pb) * mult
            out[o] += v1[i1] * np.sum(np.where(valid, w * prod234 * v5[idx5],
                                               0.0))
    return out


def _conv_2d_k3(vals, freqs, sig, phase_code, mult_code, weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    s1, s2, s3 = sig
    v1, v2, v3 = (v.reshape(m * m) for v in vals)
    out = np.zeros((m, m), dtype=np.complex128)
    # flattened lattice: p = ix * m + iy
    ix = (np.arange(m * m) // m) - h
    iy = (np.arange(m * m) % m) - h
    fx = freqs[ix + h]
    fy = freqs[iy + h]
    chunk = max(1, (1 << 22) // (m * m))  # keep temporaries ~ tens of MB
    for ox in range(m):
        for oy in range(m):
            oxo = ox - h
            oyo = oy - h
            row = np.complex128(0.0)
            for lo in range(0, m * m, chunk):
                hi = min(lo + chunk, m * m)
                i3x = s3 * (oxo - s1 * ix[:, None] - s2 * ix[None, lo:hi])
                i3y = s3 * (oyo - s1 * iy[:, None] - s2 * iy[None, lo:hi])
                valid = ((i3x >= -h) & (i3x <= h - 1)
                         & (i3y >= -h) & (i3y <= h - 1))
                idx3 = np.clip(i3x + h, 0, m - 1) * m + np.clip(i3y + h, 0, m - 1)
                x3 = i3x * (freqs[1] - freqs[0])
                y3 = i3y * (freqs[1] - freqs[0])
                phi = _phase_np_2d(phase_code, freqs[ox], freqs[oy],
                                   [fx[:, None], fx[None, lo:hi], x3],
                                   [fy[:, None], fy[None, lo:hi], y3])
                if mult_code == 4:
                    mult = (freqs[ox] + freqs[oy]) * np.ones_like(phi)
                elif mult_code == 0:
                    mult = np.ones_like(phi)
                else:
                    raise ValueError(
                        f"unsupported 2D multiplier code {mult_code}")
                if _squared(weight_code):
                    mult = mult * mult
                w = _weight_np(weight_code, phi, pa, pb) * mult
                term = w * v1[:, None] * v2[None, lo:hi] * v3[idx3]
                row += np.sum(np.where(valid, term, 0.0))
            out[ox, oy] = row
    return out


def _second_step_1d_k3_np(vals, freqs, outer_sig, inner_sig, phase_code,
                          mult_code, j2_code, nthr, beta, delta, tval):
    """One-substitution (second step) sum; slot 1 of the outer tuple expands.

    vals = (v_h1, v_h2, v_h3, v_2, v_3): the three inner slots followed by
    the two remaining outer slots, already conjugated.
    """
    m = freqs.size
    h = m // 2
    off = np.arange(m) - h
    dxi = freqs[1] - freqs[0]
    out = np.zeros(m, dtype=np.complex128)
    vh1, vh2, vh3, v2, v3 = vals
    s1, s2, s3 = outer_sig
    t1, t2, t3 = inner_sig
    oh1 = off[:, None]
    oh2 = off[None, :]
    xh1 = freqs[:, None]
    xh2 = freqs[None, :]
    prod12 = vh1[:, None] * vh2[None, :]
    for o in range(m):
        for i2 in range(m):
            for i3 in range(m):
                zoff = (o - h) - s2 * (i2 - h) - s3 * (i3 - h)
                zeta = zoff * dxi
                phi0 = _phase_np(phase_code, freqs[o],
                                 [np.asarray(zeta), freqs[i2], freqs[i3]])
                if abs(phi0) <= nthr:
                    continue
                ih3off = t3 * (zoff - t1 * oh1 - t2 * oh2)
                valid = (ih3off >= -h) & (ih3off <= h - 1)
                idx3 = np.clip(ih3off + h, 0, m - 1)
                xh3 = freqs[idx3]
                phi1 = _phase_np(phase_code, zeta, [xh1, xh2, xh3])
                mu2 = phi0 + phi1
                thresh = beta * abs(phi0) ** (1.0 - delta)
                if j2_code == J2_NEAR:
                    sel = np.abs(mu2) <= thresh
                    w = sel / phi0
                elif j2_code == J2_FAR:
                    sel = np.abs(mu2) > thresh
                    w = sel / phi0
                else:
                    sel = np.abs(mu2) > thresh
                    mu_safe = np.where(sel, mu2, 1.0)
                    w = np.where(sel, np.exp(1j * tval * mu_safe)
                                 / (1j * mu_safe), 0.0) / phi0
                m0 = _mult_np(mult_code, freqs[o],
                              [np.asarray(zeta), freqs[i2], freqs[i3]])
                m1 = _mult_np(mult_code, zeta, [xh1, xh2, xh3])
                term = w * m0 * m1 * prod12 * vh3[idx3]
                out[o] += v2[i2] * v3[i3] * np.sum(np.where(valid, term, 0.0))
    return out


# ---------------------------------------------------------------------------
# dispatch

_ALLOWED_PHASES = {
    (1, 1): {0, 1, 2, 3, 4, PHASE_COORD1},  # phase unused unless COORD1
    (1, 2): {1, PHASE_COORD1},
    (1, 3): {0, 2, 3, PHASE_COORD1},
    (1, 5): {4, PHASE_COORD1},
    (2, 3): {5},
}


def _validate_codes(dim: int, k: int, phase_code: int, mult_code: int,
                    weight_code: int) -> None:
    allowed = _ALLOWED_PHASES.get((dim, k))
    if allowed is None:
        raise ValueError(f"no kernel for dim={dim}, k={k}")
    if phase_code not in allowed:
        raise ValueError(
            f"phase code {phase_code} incompatible with dim={dim}, k={k}")
    if dim == 1 and mult_code not in (0, 1, 2, 3):
        raise ValueError(f"unsupported 1D multiplier code {mult_code}")
    if dim == 2 and mult_code not in (0, 4):
        raise ValueError(f"unsupported 2D multiplier code {mult_code}")
    if not 0 <= weight_code <= WEIGHT_BOUNDARY_SQ:
        raise ValueError(f"unknown weight code {weight_code}")


def _resolve(backend: str | None) -> str:
    if backend is None:
        return selected_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
    if backend == "numba" and not _load_numba_kernels():
        raise RuntimeError("numba backend requested but numba is not usable")
    return backend


def lattice_convolution(vals, freqs: np.ndarray, signature, dim: int,
                        phase_code: int, mult_code: int, weight_code: int,
                        pa: float = 0.0, pb: float = 0.0,
                        backend: str | None = None) -> np.ndarray:
    """Weighted signed-convolution sum over the truncated lattice.

    ``vals`` are the k input coefficient arrays (conjugation already
    applied), shape (m,) in 1D or (m, m) in 2D.  Returns the output array
    in the same layout.
    """
    k = len(vals)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    vals = [np.ascontiguousarray(v, dtype=np.complex128) for v in vals]
    sig = tuple(int(s) for s in signature)
    if len(sig) != k:
        raise ValueError("signature length must match the number of inputs")
    _validate_codes(dim, k, phase_code, mult_code, weight_code)

    if k == 1:
        # Diagonal operator: the only tuple through xi is xi1 = xi.
        if dim != 1 or sig != (1,):
            raise ValueError("k=1 is only supported in 1D with signature (+1,)")
        phi = freqs if phase_code == PHASE_COORD1 else np.zeros_like(freqs)
        mult = np.ones_like(freqs) if mult_code == 0 else freqs
        if _squared(weight_code):
            mult = mult * mult
        return _weight_np(weight_code, phi, pa, pb) * mult * vals[0]

    use = _resolve(backend)
    if use == "numba":
        mod = _load_numba_kernels()
        if dim == 1 and k == 2:
            return mod.conv_1d_k2(vals[0], vals[1], freqs, sig[0], sig[1],
                                  phase_code, mult_code, weight_code, pa, pb)
        if dim == 1 and k == 3:
            return mod.conv_1d_k3(vals[0], vals[1], vals[2], freqs,
                                  sig[0], sig[1], sig[2],
                                  phase_code, mult_code, weight_code, pa, pb)
        if dim == 1 and k == 5:
            return mod.conv_1d_k5(vals[0], vals[1], vals[2], vals[3], vals[4],
                                  freqs, sig[0], sig[1], sig[2], sig[3], sig[4],
                                  phase_code, mult_code, weight_code, pa, pb)
        if dim == 2 and k == 3:
            return mod.conv_2d_k3(vals[0], vals[1], vals[2], freqs,
                                  sig[0], sig[1], sig[2],
                                  phase_code, mult_code, weight_code, pa, pb)
        raise ValueError(f"no kernel for dim={dim}, k={k}")

    if dim == 1 and k == 2:
        return _conv_1d_k2(vals, freqs, sig, phase_code, mult_code,
                           weight_code, pa, pb)
    if dim == 1 and k == 3:
        return _conv_1d_k3(vals, freqs, sig, phase_code, mult_code,
                           weight_code, pa, pb)
    if dim == 1 and k == 5:
        return _conv_1d_k5(vals, freqs, sig, phase_code, mult_code,
                           weight_code, pa, pb)
    if dim == 2 and k == 3:
        return _conv_2d_k3(vals, freqs, sig, phase_code, mult_code,
                           weight_code, pa, pb)
    raise ValueError(f"no kernel for dim={dim}, k={k}")


def second_step_convolution(vals, freqs: np.ndarray, outer_sig, inner_sig,
                            phase_code: int, mult_code: int, j2_code: int,
                            threshold: float, beta: float, delta: float,
                            t: float = 0.0,
                            backend: str | None = None) -> np.ndarray:
    """Second-step tree sum (one substitution into outer slot 1, 1D cubic).

    The outer tuple must be nonresonant (|Phi_0| > threshold); the second
    split compares |Phi_0 + Phi_1| against beta * |Phi_0|**(1 - delta).
    """
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    vals = [np.ascontiguousarray(v, dtype=np.complex128) for v in vals]
    if len(vals) != 5:
        raise ValueError("second step expects 5 input arrays")
    osig = tuple(int(s) for s in outer_sig)
    isig = tuple(int(s) for s in inner_sig)
    if osig[0] != 1:
        raise ValueError("substitution is implemented for an unconjugated "
                         "first outer slot")
    use = _resolve(backend)
    if use == "numba":
        mod = _load_numba_kernels()
        return mod.second_step_1d_k3(
            vals[0], vals[1], vals[2], vals[3], vals[4], freqs,
            osig[0], osig[1], osig[2], isig[0], isig[1], isig[2],
            phase_code, mult_code, j2_code, threshold, beta, delta, t)
    return _second_step_1d_k3_np(vals, freqs, osig, isig, phase_code,
                                 mult_code, j2_code, threshold, beta, delta, t)
