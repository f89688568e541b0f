"""Normal form splitting: thresholds, partitions, boundary terms, scalings."""

import numpy as np
import pytest

from nlsmooth import kernels
from nlsmooth.equations import get_equation
from nlsmooth.multilinear import (
    BoundProbe,
    FreqLattice,
    apply_weighted,
    lattice_sobolev_norm,
)
from nlsmooth.normalform import (
    InfrConfig,
    boundary_term,
    second_step,
    sharp_profile,
    split_resonant,
    split_threshold,
    verify_scalings,
)

NLS = get_equation("nls")


def brute_weighted_cubic(vals, freqs, weight):
    """Signed cubic lattice sum xi = xi1 - xi2 + xi3 with explicit weight
    of phi = (xi - xi1)(xi - xi3); inputs are taken as passed."""
    m = len(freqs)
    out = np.zeros(m, dtype=np.complex128)
    for i in range(m):
        for i1 in range(m):
            for i3 in range(m):
                i2 = i1 + i3 - i
                if not 0 <= i2 < m:
                    continue
                phi = (freqs[i] - freqs[i1]) * (freqs[i] - freqs[i3])
                w = weight(phi)
                if w != 0.0:
                    out[i] += w * vals[0][i1] * vals[1][i2] * vals[2][i3]
    return out


def nls_inputs(lattice, seed=0):
    prof = sharp_profile(lattice, 0.3, seed)
    return [prof, prof, prof], [prof, np.conj(prof), prof]


class TestSplitThreshold:
    """Threshold coefficients ((k-1)(j+1)+1)^k."""

    def test_cubic_steps(self):
        assert split_threshold(1, 3) == 125.0
        assert split_threshold(2, 3) == 343.0

    def test_quadratic_first_step(self):
        assert split_threshold(1, 2) == 9.0

    def test_validation(self):
        with pytest.raises(ValueError):
            split_threshold(0, 3)
        with pytest.raises(ValueError):
            split_threshold(1, 1)


class TestSharpProfile:
    """Random profiles with prescribed Sobolev-critical decay."""

    def test_deterministic_and_complex(self):
        lat = FreqLattice(32, 16.0)
        a = sharp_profile(lat, 0.5, [0, 1])
        b = sharp_profile(lat, 0.5, [0, 1])
        np.testing.assert_array_equal(a, b)
        assert np.iscomplexobj(a)
        assert np.max(np.abs(sharp_profile(lat, 0.5, [0, 2]) - a)) > 1e-3

    def test_envelope_decay(self):
        lat = FreqLattice(256, 128.0)
        s = 0.5
        prof = sharp_profile(lat, s, 7)
        r = np.abs(lat.freqs)
        lo = np.sqrt(np.mean(np.abs(prof[(r > 4) & (r < 8)]) ** 2))
        hi = np.sqrt(np.mean(np.abs(prof[(r > 64) & (r < 128)]) ** 2))
        # rms amplitude falls like <xi>^{-(s + 1/2 + delta_reg)}
        expect = (6.0 / 92.0) ** (s + 0.5 + 0.01)
        assert hi / lo == pytest.approx(expect, rel=0.35)


class TestResonantSplit:
    """Near/far partition of the interaction kernel."""

    def test_partition_is_exact(self):
        lat = FreqLattice(32, 16.0)
        raw, _ = nls_inputs(lat)
        near, far = split_resonant(NLS, raw, 40.0, lat)
        probe = BoundProbe(NLS, s=0.0, eps=0.0, lattice=lat, trials=1)
        full = apply_weighted(probe, raw, kernels.WEIGHT_PLAIN)
        scale = np.max(np.abs(full))
        np.testing.assert_allclose(near + far, full, atol=1e-12 * scale)

    def test_near_part_matches_brute(self):
        lat = FreqLattice(32, 16.0)
        raw, conjed = nls_inputs(lat)
        near, far = split_resonant(NLS, raw, 25.0, lat)
        want_near = brute_weighted_cubic(
            conjed, lat.freqs, lambda p: 1.0 if abs(p) <= 25.0 else 0.0)
        want_far = brute_weighted_cubic(
            conjed, lat.freqs, lambda p: 1.0 if abs(p) > 25.0 else 0.0)
        np.testing.assert_allclose(near, want_near, atol=1e-12)
        np.testing.assert_allclose(far, want_far, atol=1e-12)

    def test_threshold_validation(self):
        lat = FreqLattice(32, 16.0)
        raw, _ = nls_inputs(lat)
        with pytest.raises(ValueError):
            split_resonant(NLS, raw, 0.0, lat)


class TestBoundaryTerm:
    """Integration-by-parts boundary kernel m e^{it phi} / (i phi)."""

    def test_matches_brute_with_time_phase(self):
        lat = FreqLattice(32, 16.0)
        raw, conjed = nls_inputs(lat)
        got = boundary_term(NLS, raw, 25.0, lat, t=0.7)
        want = brute_weighted_cubic(
            conjed, lat.freqs,
            lambda p: np.exp(1j * 0.7 * p) / (1j * p) if abs(p) > 25.0 else 0.0)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_threshold_must_exceed_one(self):
        lat = FreqLattice(32, 16.0)
        raw, _ = nls_inputs(lat)
        with pytest.raises(ValueError):
            boundary_term(NLS, raw, 1.0, lat)


class TestSecondStep:
    """Substitution step wiring on top of the raw kernel."""

    def test_matches_direct_kernel_call(self):
        lat = FreqLattice(32, 512.0)
        prof = sharp_profile(lat, 0.3, [1, 0])
        term = NLS.term(3)
        # five-slot conjugation: inner signature then outer tail (+,-,+,-,+)
        vals = [prof, np.conj(prof), prof, np.conj(prof), prof]
        for kind, code in [("near", kernels.J2_NEAR), ("far", kernels.J2_FAR),
                           ("boundary", kernels.J2_BOUNDARY)]:
            got = second_step(NLS, [prof] * 5, 64.0, 0.6, lat, kind, t=0.5)
            want = kernels.second_step_convolution(
                vals, lat.freqs, term.signature, term.signature,
                term.phase_code, term.mult_code, code, 64.0,
                split_threshold(2, 3), 0.6, 0.5)
            np.testing.assert_allclose(got, want, atol=0.0)

    def test_validation(self):
        lat = FreqLattice(32, 512.0)
        prof = sharp_profile(lat, 0.3, 0)
        with pytest.raises(ValueError):
            second_step(NLS, [prof] * 5, 64.0, 0.6, lat, "sideways")
        with pytest.raises(ValueError):
            second_step(NLS, [prof] * 4, 64.0, 0.6, lat)
        mzk = get_equation("mzk")
        lat2 = FreqLattice(32, 16.0, dim=2)
        prof2 = sharp_profile(lat2, 1.75, 0)
        with pytest.raises(ValueError):
            second_step(mzk, [prof2] * 5, 64.0, 0.6, lat2)
        with pytest.raises(ValueError):
            second_step(get_equation("kdv"), [prof] * 5, 64.0, 0.6, lat)


class TestInfrConfig:
    """Configuration validation and tied parameters."""

    def make(self, **kw):
        args = dict(eq=NLS, s=0.3, eps=0.6, sigma=0.6,
                    n_values=(8.0, 16.0, 32.0, 64.0, 128.0),
                    lattice=FreqLattice(32, 32.0))
        args.update(kw)
        return InfrConfig(**args)

    def test_delta_is_tied_to_sigma(self):
        assert self.make(sigma=0.7).delta == 0.7

    def test_validation(self):
        with pytest.raises(ValueError):
            self.make(sigma=0.0)
        with pytest.raises(ValueError):
            self.make(sigma=1.0)
        with pytest.raises(ValueError):
            self.make(n_values=(0.5, 2.0, 4.0, 8.0, 16.0))
        with pytest.raises(ValueError):
            self.make(j_max=3)
        with pytest.raises(ValueError):
            self.make(ensemble=0)
        with pytest.raises(ValueError):
            self.make(lattice=FreqLattice(32, 32.0, dim=2))
        with pytest.raises(ValueError):
            self.make(eq=get_equation("mzk"), j_max=2,
                      lattice=FreqLattice(32, 32.0, dim=2))

    def test_default_lattice_is_production_scale(self):
        cfg = InfrConfig(NLS, s=0.3, eps=0.6, sigma=0.6,
                         n_values=(8.0, 16.0, 32.0, 64.0, 128.0))
        assert cfg.lattice.m == 256
        assert cfg.lattice.extent == 1024.0


class TestVerifyScalings:
    """Measured threshold scalings on desk-size lattices."""

    def test_first_step_report(self):
        cfg = InfrConfig(NLS, s=0.3, eps=0.6, sigma=0.6,
                         n_values=(8.0, 16.0, 32.0, 64.0, 128.0),
                         lattice=FreqLattice(32, 32.0), ensemble=2, t=0.5)
        rep = verify_scalings(cfg)
        assert rep.partition_residual < 1e-12
        assert rep.theory_near == 0.6
        assert rep.theory_boundary == pytest.approx(-0.4)
        # the near norm grows no faster than the structural exponent sigma
        assert rep.near_fit.slope < cfg.sigma + 0.15
        # 1/N domination: the boundary term decays as N grows
        assert rep.boundary_fit.slope < -0.3
        assert rep.j2_boundary_fit is None
        assert len(rep.near_norms) == len(rep.far_norms) == 5

    def test_second_step_fields_populated(self):
        cfg = InfrConfig(NLS, s=0.3, eps=0.6, sigma=0.6,
                         n_values=(8.0, 16.0, 32.0, 64.0, 128.0),
                         lattice=FreqLattice(32, 512.0), j_max=2,
                         ensemble=1, t=0.5)
        rep = verify_scalings(cfg)
        assert rep.j2_boundary_fit is not None
        assert rep.theory_j2_boundary == pytest.approx(-0.6)
        assert len(rep.j2_boundary_norms) == 5

    def test_needs_five_thresholds(self):
        cfg = InfrConfig(NLS, s=0.3, eps=0.6, sigma=0.6,
                         n_values=(8.0, 16.0),
                         lattice=FreqLattice(32, 32.0))
        with pytest.raises(ValueError):
            verify_scalings(cfg)
