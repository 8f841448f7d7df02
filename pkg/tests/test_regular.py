"""Frequency-domain cutoff weights and the weighted (regularized) solve."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convsys import (
    ConfigError,
    Fejer,
    Gaussian,
    GridFn,
    Laplace,
    MomentSet,
    bandlimit_diagnostic,
    eval_on_grid,
    fourier_inverse,
    make_grid,
    make_weight,
    oracle_moments,
    recover_real,
    solve_case_b,
    solve_regularized,
)

from conftest import l1_distance


class TestMakeWeight:
    def test_raised_cosine_values(self, freq_1024):
        # C=2.5 puts the landmarks (2.0, 2.25, 2.5) exactly on the
        # h=1/64 grid
        w = make_weight(2.5, "raised_cosine", freq_1024)
        z = freq_1024.axis(0)

        def at(v):
            return w.psi.values[np.argmin(np.abs(z - v))].real

        assert at(0.0) == 1.0
        assert at(2.0) == 1.0  # flat out to 0.8 C
        assert at(2.25) == pytest.approx(0.5)  # cosine midpoint
        assert at(2.5) == 0.0
        assert at(3.0) == 0.0
        assert at(-2.25) == pytest.approx(0.5)

    def test_raised_cosine_no_jumps(self, freq_1024):
        w = make_weight(2.0, "raised_cosine", freq_1024)
        h = freq_1024.step[0]
        max_slope = 0.5 * math.pi / (0.2 * 2.0)
        assert np.max(np.abs(np.diff(w.psi.values.real))) <= max_slope * h * 1.01

    def test_bump_profile(self, freq_1024):
        w = make_weight(2.0, "bump", freq_1024)
        z = freq_1024.axis(0)
        vals = w.psi.values.real
        assert vals[np.argmin(np.abs(z))] == 1.0
        assert np.all(vals[np.abs(z) >= 2.0] == 0.0)
        # flat-to-all-orders approach to the edge
        near_edge = vals[np.argmin(np.abs(z - 1.984375))]
        assert 0 < near_edge < 1e-20

    def test_cutoff_beyond_grid_rejected(self, freq_1024):
        with pytest.raises(ConfigError, match="exceeds"):
            make_weight(9.0, "raised_cosine", freq_1024)

    def test_bad_cutoffs_rejected(self, freq_1024):
        with pytest.raises(ConfigError):
            make_weight(0.0, "raised_cosine", freq_1024)
        with pytest.raises(ConfigError):
            make_weight((1.0, 1.0), "raised_cosine", freq_1024)

    def test_unknown_profile_rejected(self, freq_1024):
        with pytest.raises(ConfigError, match="profile"):
            make_weight(2.0, "hann", freq_1024)

    def test_kernel_real_and_even(self, freq_1024):
        w = make_weight(2.0, "raised_cosine", freq_1024)
        k = fourier_inverse(w.psi)
        assert np.max(np.abs(k.values.imag)) < 1e-12
        assert np.max(np.abs(k.values.real - k.values.real[::-1].take(
            np.arange(-1, k.spec.n[0] - 1)))) < 1e-12

    def test_2d_separable(self):
        spec = make_grid(2, (-4.0, -4.0), (4.0, 4.0), (64, 64))
        w = make_weight((2.0, 1.0), "raised_cosine", spec)
        a0 = w.psi.values[:, spec.origin_index[1]]
        a1 = w.psi.values[spec.origin_index[0], :]
        assert np.allclose(w.psi.values, np.multiply.outer(a0, a1))
        z1 = spec.axis(1)
        assert np.all(a1[np.abs(z1) >= 1.0] == 0.0)


class TestSolveRegularized:
    def test_bandlimited_latent_recovered_exactly(self):
        # triangle density: cf vanishes outside [-1.5, 1.5], inside the
        # flat region of the C=2 raised cosine, so smoothing is lossless
        spec = make_grid(1, -2.2, 2.2, 2**13)
        M = oracle_moments(Fejer(1.5), Laplace(0.0, 1.0), spec)
        w = make_weight(2.0, "raised_cosine", spec)
        sol = solve_regularized(M, w, case="b")
        g = recover_real(sol, "g", density=True)
        assert l1_distance(g, Fejer(1.5).pdf) < 1e-4
        assert sol.meta["regularized"]["profile"] == "raised_cosine"
        assert sol.meta["regularized"]["floored_points"] > 0

    def test_smooth_latent_matches_smoothing_oracle(self):
        # gaussian latent is not bandlimited: the target is the
        # psi-smoothed density, checked against direct quadrature
        spec = make_grid(1, -8.0, 8.0, 4096)
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), spec)
        w = make_weight(2.0, "raised_cosine", spec)
        sol = solve_regularized(M, w, case="b")
        g = recover_real(sol, "g", density=False)
        x = g.spec.axis(0)
        zf = np.linspace(-2.0, 2.0, 40001)
        flat, roll = 1.6, 0.4
        psif = np.where(
            np.abs(zf) <= flat,
            1.0,
            np.where(
                np.abs(zf) >= 2.0,
                0.0,
                0.5 * (1 + np.cos(math.pi * (np.abs(zf) - flat) / roll)),
            ),
        )
        spec_weighted = psif * np.exp(-0.5 * zf**2)
        smoothed = np.empty_like(x)
        for i0 in range(0, x.size, 512):
            xs = x[i0 : i0 + 512]
            smoothed[i0 : i0 + 512] = (
                np.trapezoid(
                    spec_weighted * np.exp(-1j * np.outer(xs, zf)), zf, axis=1
                ).real
                / (2 * math.pi)
            )
        err = np.trapezoid(np.abs(g.values.real - smoothed), dx=g.spec.step[0])
        assert err < 1e-4
        # and the smoothing is genuinely lossy against the raw density
        raw_gap = np.trapezoid(
            np.abs(g.values.real - Gaussian(0.0, 1.0).pdf(x)), dx=g.spec.step[0]
        )
        assert raw_gap > 0.1

    def test_spectral_gap_at_cutoff(self):
        # sup |psi gamma - gamma| for a standard gaussian with C=2 sits
        # just above e^{-2}, attained near the outer edge of the rolloff
        spec = make_grid(1, -8.0, 8.0, 4096)
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), spec)
        w = make_weight(2.0, "raised_cosine", spec)
        sol = solve_regularized(M, w, case="b")
        z = spec.axis(0)
        gap = np.max(np.abs(sol.gamma.values - np.exp(-0.5 * z * z)))
        assert math.exp(-2) <= gap < 0.2

    def test_beyond_cutoff_data_is_ignored(self):
        spec = make_grid(1, -8.0, 8.0, 2048)
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), spec)
        z = spec.axis(0)
        junk = np.where(np.abs(z) > 2.0, 17.0 + 3j, 0.0)
        M2 = MomentSet(
            eps1=GridFn(spec, M.eps1.values + junk),
            eps2=(GridFn(spec, M.eps2[0].values + junk),),
            deps1=(GridFn(spec, M.deps1[0].values + junk),),
            source="oracle",
        )
        w = make_weight(2.0, "raised_cosine", spec)
        s1 = solve_regularized(M, w, case="b")
        s2 = solve_regularized(M2, w, case="b")
        assert np.array_equal(s1.gamma.values, s2.gamma.values)
        assert np.array_equal(s1.phi.values, s2.phi.values)

    def test_agrees_with_plain_solve_in_flat_region(self):
        spec = make_grid(1, -8.0, 8.0, 2048)
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), spec)
        w = make_weight(6.0, "raised_cosine", spec)
        reg = solve_regularized(M, w, case="b", tau=1e-8)
        plain = solve_case_b(M, tau=1e-8)
        z = spec.axis(0)
        sel = (np.abs(z) <= 0.8 * 6.0) & plain.mask.mask
        assert np.max(np.abs(reg.phi.values[sel] - plain.phi.values[sel])) < 1e-12
        # gamma picks up the weight: reg gamma == psi * plain gamma
        want = w.psi.values[sel] * plain.gamma.values[sel]
        assert np.max(np.abs(reg.gamma.values[sel] - want)) < 1e-12

    def test_grid_mismatch_rejected(self, freq_1024, freq_2048):
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        w = make_weight(2.0, "raised_cosine", freq_2048)
        with pytest.raises(ConfigError, match="grid"):
            solve_regularized(M, w)

    def test_bad_case_rejected(self, freq_1024):
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        w = make_weight(2.0, "raised_cosine", freq_1024)
        with pytest.raises(ConfigError, match="case"):
            solve_regularized(M, w, case="c")

    def test_case_a_weights_the_noise_factor(self, freq_1024):
        # case a leaves gamma unweighted and smooths phi instead
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        w = make_weight(2.0, "raised_cosine", freq_1024)
        sol = solve_regularized(M, w, case="a", tau=1e-10)
        z = freq_1024.axis(0)
        sel = np.abs(z) < 1.9
        gam = Gaussian(0.0, 1.0).cf(z)
        phi = Laplace(0.0, 1.0).cf(z)
        assert np.max(np.abs(sol.gamma.values[sel] - gam[sel])) < 1e-8
        assert np.max(np.abs(sol.phi.values[sel] - (w.psi.values * phi)[sel])) < 1e-8


class TestBandlimitDiagnostic:
    def test_zero_for_bandlimited(self):
        spec = make_grid(1, -4.0, 4.0, 512)
        gam = eval_on_grid(spec, Fejer(1.5).cf)
        assert bandlimit_diagnostic(gam, 2.0) == 0.0

    def test_gaussian_tail_fraction(self):
        spec = make_grid(1, -8.0, 8.0, 4096)
        gam = eval_on_grid(spec, Gaussian(0.0, 1.0).cf)
        assert bandlimit_diagnostic(gam, 2.0) == pytest.approx(
            math.erfc(math.sqrt(2.0)), rel=0.02
        )

    def test_half_split(self):
        spec = make_grid(1, -4.0, 4.0, 512)
        flat = GridFn(spec, np.ones(512, dtype=complex))
        assert bandlimit_diagnostic(flat, 2.0) == pytest.approx(0.5, abs=0.01)

    def test_zero_mass_rejected(self):
        spec = make_grid(1, -4.0, 4.0, 512)
        with pytest.raises(ConfigError):
            bandlimit_diagnostic(GridFn(spec, np.zeros(512, dtype=complex)), 2.0)


@given(
    C=st.floats(0.5, 6.0),
    frac=st.floats(0.01, 0.99),
)
@settings(max_examples=30, deadline=None)
def test_weight_monotone_in_radius(C, frac):
    spec = make_grid(1, -8.0, 8.0, 512)
    w = make_weight(C, "raised_cosine", spec)
    z = np.abs(spec.axis(0))
    order = np.argsort(z, kind="stable")
    vals = w.psi.values.real[order]
    assert np.all(np.diff(vals) <= 1e-12)
    v = w.psi.values.real[np.argmin(np.abs(spec.axis(0) - frac * C))]
    assert 0.0 <= v <= 1.0
