"""Numba-compiled versions of the lattice convolution kernels.

Must mirror the numpy implementations in `kernels` exactly: same index
constraint, same weight formulas, and a serial accumulation per output
frequency so the result does not depend on the number of threads.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit, prange

# hosts with an old libtbb warn when the threading layer is probed (lazily,
# at the first parallel call); the fallback layer is fine, so silence it
warnings.filterwarnings("ignore", message=r".*TBB threading layer.*")


@njit(inline="always", cache=True)
def _phase_k2(code, xo, x1, x2):
    if code == 1:
        return 3.0 * xo * x1 * x2
    if code == 6:
        return x1
    return 0.0


@njit(inline="always", cache=True)
def _phase_k3(code, xo, x1, x2, x3):
    if code == 0:
        return 3.0 * (xo - x1) * (xo - x2) * (xo - x3)
    if code == 2:
        return (xo - x1) * (xo - x3)
    if code == 3:
        return 2.0 * (xo - x1) * (xo - x3)
    if code == 6:
        return x1
    return 0.0


@njit(inline="always", cache=True)
def _phase_k5(code, xo, x1, x2, x3, x4, x5):
    if code == 4:
        return (xo * xo - x1 * x1 + x2 * x2 - x3 * x3 + x4 * x4 - x5 * x5)
    if code == 6:
        return x1
    return 0.0


@njit(inline="always", cache=True)
def _mult_1d(code, xo, x2):
    if code == 0:
        return 1.0
    if code == 1:
        return xo
    if code == 2:
        return x2
    if code == 3:
        return 0.5
    return 1.0


@njit(inline="always", cache=True)
def _weight(code, phi, pa, pb):
    if code == 0:
        return 1.0 + 0.0j
    if code == 1:
        return (1.0 + phi * phi) ** (-0.5 * pa) + 0.0j
    if code == 2 or code == 7:
        return (1.0 + 0.0j) if abs(phi - pa) < pb else 0.0j
    if code == 3 or code == 8:
        return (1.0 + 0.0j) if abs(phi) <= pa else 0.0j
    if code == 4 or code == 9:
        return (1.0 + 0.0j) if abs(phi) > pa else 0.0j
    if code == 5:
        if abs(phi) > pa:
            return (math.cos(pb * phi) + 1j * math.sin(pb * phi)) / (1j * phi)
        return 0.0j
    if code == 6:
        return (1.0 + phi * phi) ** (-pa) + 0.0j
    if code == 10:
        return (1.0 / (phi * phi) + 0.0j) if abs(phi) > pa else 0.0j
    return 0.0j


@njit(cache=True, parallel=True)
def conv_1d_k2(v1, v2, freqs, s1, s2, phase_code, mult_code, weight_code,
               pa, pb):
    m = freqs.size
    h = m // 2
    sq = weight_code >= 6
    out = np.zeros(m, dtype=np.complex128)
    for o in prange(m):
        xo = freqs[o]
        acc = 0.0j
        for i1 in range(m):
            a1 = v1[i1]
            if a1 == 0.0j:
                continue
            i2off = s2 * ((o - h) - s1 * (i1 - h))
            if i2off < -h or i2off > h - 1:
                continue
            i2 = i2off + h
            a2 = v2[i2]
            if a2 == 0.0j:
                continue
            phi = _phase_k2(phase_code, xo, freqs[i1], freqs[i2])
            mlt = _mult_1d(mult_code, xo, freqs[i2])
            if sq:
                mlt = mlt * mlt
            acc += _weight(weight_code, phi, pa, pb) * mlt * a1 * a2
        out[o] = acc
    return out


@njit(cache=True, parallel=True)
def conv_1d_k3(v1, v2, v3, freqs, s1, s2, s3, phase_code, mult_code,
               weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    sq = weight_code >= 6
    out = np.zeros(m, dtype=np.complex128)
    for o in prange(m):
        xo = freqs[o]
        acc = 0.0j
        for i1 in range(m):
            a1 = v1[i1]
            if a1 == 0.0j:
                continue
            x1 = freqs[i1]
            r1 = (o - h) - s1 * (i1 - h)
            for i2 in range(m):
                a2 = v2[i2]
                if a2 == 0.0j:
                    continue
                i3off = s3 * (r1 - s2 * (i2 - h))
                if i3off < -h or i3off > h - 1:
                    continue
                i3 = i3off + h
                a3 = v3[i3]
                if a3 == 0.0j:
                    continue
                phi = _phase_k3(phase_code, xo, x1, freqs[i2], freqs[i3])
                mlt = _mult_1d(mult_code, xo, freqs[i2])
                if sq:
                    mlt = mlt * mlt
                acc += _weight(weight_code, phi, pa, pb) * mlt * a1 * a2 * a3
        out[o] = acc
    return out


@njit(cache=True, parallel=True)
def conv_1d_k5(v1, v2, v3, v4, v5, freqs, s1, s2, s3, s4, s5, phase_code,
               mult_code, weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    sq = weight_code >= 6
    out = np.zeros(m, dtype=np.complex128)
    for o in prange(m):
        xo = freqs[o]
        acc = 0.0j
        for i1 in range(m):
            a1 = v1[i1]
            if a1 == 0.0j:
                continue
            r1 = (o - h) - s1 * (i1 - h)
            for i2 in range(m):
                a2 = v2[i2]
                if a2 == 0.0j:
                    continue
                r2 = r1 - s2 * (i2 - h)
                for i3 in range(m):
                    a3 = v3[i3]
                    if a3 == 0.0j:
                        continue
                    r3 = r2 - s3 * (i3 - h)
                    for i4 in range(m):
                        a4 = v4[i4]
                        if a4 == 0.0j:
                            continue
                        i5off = s5 * (r3 - s4 * (i4 - h))
                        if i5off < -h or i5off > h - 1:
                            continue
                        i5 = i5off + h
                        a5 = v5[i5]
                        if a5 == 0.0j:
                            continue
                        phi = _phase_k5(phase_code, xo, freqs[i1], freqs[i2],
                                        freqs[i3], freqs[i4], freqs[i5])
                        mlt = _mult_1d(mult_code, xo, freqs[i2])
                        if sq:
                            mlt = mlt * mlt
                        acc += (_weight(weight_code, phi, pa, pb) * mlt
                                * a1 * a2 * a3 * a4 * a5)
        out[o] = acc
    return out


@njit(cache=True, parallel=True)
def conv_2d_k3(v1, v2, v3, freqs, s1, s2, s3, phase_code, mult_code,
               weight_code, pa, pb):
    m = freqs.size
    h = m // 2
    sq = weight_code >= 6
    out = np.zeros((m, m), dtype=np.complex128)
    for op in prange(m * m):
        ox = op // m
        oy = op % m
        fox = freqs[ox]
        foy = freqs[oy]
        acc = 0.0j
        for i1x in range(m):
            r1x = (ox - h) - s1 * (i1x - h)
            for i1y in range(m):
                a1 = v1[i1x, i1y]
                if a1 == 0.0j:
                    continue
                r1y = (oy - h) - s1 * (i1y - h)
                for i2x in range(m):
                    i3xoff = s3 * (r1x - s2 * (i2x - h))
                    if i3xoff < -h or i3xoff > h - 1:
                        continue
                    i3x = i3xoff + h
                    for i2y in range(m):
                        a2 = v2[i2x, i2y]
                        if a2 == 0.0j:
                            continue
                        i3yoff = s3 * (r1y - s2 * (i2y - h))
                        if i3yoff < -h or i3yoff > h - 1:
                            continue
                        i3y = i3yoff + h
                        a3 = v3[i3x, i3y]
                        if a3 == 0.0j:
                            continue
                        phi = ((fox - freqs[i1x]) * (fox - freqs[i2x])
                               * (fox - freqs[i3x])
                               + (foy - freqs[i1y]) * (foy - freqs[i2y])
                               * (foy - freqs[i3y]))
                        if mult_code == 4:
                            mlt = fox + foy
                        else:
                            mlt = 1.0
                        if sq:
                            mlt = mlt * mlt
                        acc += (_weight(weight_code, phi, pa, pb)
                                * mlt * a1 * a2 * a3)
        out[ox, oy] = acc
    return out


@njit(cache=True, parallel=True)
def second_step_1d_k3(vh1, vh2, vh3, v2, v3, freqs, s1, s2, s3, t1, t2, t3,
                      phase_code, mult_code, j2_code, nthr, beta, delta,
                      tval):
    m = freqs.size
    h = m // 2
    dxi = freqs[1] - freqs[0]
    out = np.zeros(m, dtype=np.complex128)
    for o in prange(m):
        xo = freqs[o]
        acc = 0.0j
        for i2 in range(m):
            b2 = v2[i2]
            if b2 == 0.0j:
                continue
            for i3 in range(m):
                b3 = v3[i3]
                if b3 == 0.0j:
                    continue
                zoff = (o - h) - s2 * (i2 - h) - s3 * (i3 - h)
                zeta = zoff * dxi
                phi0 = _phase_k3(phase_code, xo, zeta, freqs[i2], freqs[i3])
                if abs(phi0) <= nthr:
                    continue
                thresh = beta * abs(phi0) ** (1.0 - delta)
                m0 = _mult_1d(mult_code, xo, freqs[i2])
                inner = 0.0j
                for ih1 in range(m):
                    c1 = vh1[ih1]
                    if c1 == 0.0j:
                        continue
                    q1 = zoff - t1 * (ih1 - h)
                    for ih2 in range(m):
                        c2 = vh2[ih2]
                        if c2 == 0.0j:
                            continue
                        ih3off = t3 * (q1 - t2 * (ih2 - h))
                        if ih3off < -h or ih3off > h - 1:
                            continue
                        ih3 = ih3off + h
                        c3 = vh3[ih3]
                        if c3 == 0.0j:
                            continue
                        phi1 = _phase_k3(phase_code, zeta, freqs[ih1],
                                         freqs[ih2], freqs[ih3])
                        mu2 = phi0 + phi1
                        if j2_code == 0:
                            if abs(mu2) > thresh:
                                continue
                            w = 1.0 + 0.0j
                        elif j2_code == 1:
                            if abs(mu2) <= thresh:
                                continue
                            w = 1.0 + 0.0j
                        else:
                            if abs(mu2) <= thresh:
                                continue
                            w = (math.cos(tval * mu2)
                                 + 1j * math.sin(tval * mu2)) / (1j * mu2)
                        m1 = _mult_1d(mult_code, zeta, freqs[ih2])
                        inner += w * m1 * c1 * c2 * c3
                acc += b2 * b3 * m0 * inner / phi0
        out[o] = acc
    return out
