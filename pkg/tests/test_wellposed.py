"""Membership diagnostics, tail-envelope fitting, and the two demonstrators."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convsys import (
    ClassParams,
    ConfigError,
    Diagnosis,
    Gaussian,
    GridFn,
    Laplace,
    NumericalError,
    TailClassParams,
    build_bn,
    check_phi_mV,
    check_tail_class,
    default_demo_grid,
    eval_on_grid,
    fit_tail_gaussian,
    illposed_demo,
    make_grid,
    stability_experiment,
)

GRID16 = make_grid(1, -16.0, 16.0, 2048)


class TestCheckPhiMV:
    def test_member_fast_decay(self):
        d = check_phi_mV(lambda t: np.exp(-t * t), ClassParams((2,), 10.0), dim=1)
        assert d.verdict == "member"
        assert d.trace[-1][1] < 2.0

    def test_nonmember_exceeds_V(self):
        d = check_phi_mV(lambda t: np.ones_like(t), ClassParams((2,), 0.1), dim=1)
        assert d.verdict == "nonmember"
        assert d.detail["reason"] == "exceeds V"

    def test_nonmember_growing_increments(self):
        d = check_phi_mV(
            lambda t: (1.0 + t * t) ** 2 * t * t,
            ClassParams((2,), 1e12),
            dim=1,
        )
        assert d.verdict == "nonmember"
        assert d.detail["reason"] == "increments grow"

    def test_zero_function_is_member(self):
        d = check_phi_mV(lambda t: np.zeros_like(t), ClassParams((2,), 1.0), dim=1)
        assert d.verdict == "member"
        assert all(v == 0.0 for _, v in d.trace)

    def test_slow_decay_on_short_grid_inconclusive(self):
        # integrand ~ t^-2 under the m=1 weight: the +-16 grid cannot
        # certify the Cauchy tail, and saying so is the correct verdict
        b = GridFn(GRID16, np.ones(GRID16.shape, dtype=complex))
        d = check_phi_mV(b, ClassParams((1,), 100.0))
        assert d.verdict == "inconclusive"

    def test_single_radius_inconclusive(self):
        d = check_phi_mV(
            lambda t: np.exp(-t * t), ClassParams((2,), 10.0), radii=[5.0], dim=1
        )
        assert d.verdict == "inconclusive"
        assert d.detail["reason"] == "single radius"

    def test_grid_function_member(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        d = check_phi_mV(b, ClassParams((2,), 10.0))
        assert d.verdict == "member"
        # radii were clipped to the grid edge
        assert d.trace[-1][0] <= 16.0

    def test_bad_radii_rejected(self):
        with pytest.raises(ConfigError, match="increasing"):
            check_phi_mV(
                lambda t: np.exp(-t * t),
                ClassParams((2,), 1.0),
                radii=[10.0, 10.0],
                dim=1,
            )

    def test_exponent_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            check_phi_mV(lambda t: np.exp(-t * t), ClassParams((2, 2), 1.0), dim=1)

    def test_2d_callable_member(self):
        d = check_phi_mV(
            lambda a, b: np.exp(-a * a - b * b),
            ClassParams((2, 2), 10.0),
            radii=[2.0, 4.0, 8.0, 16.0],
            dim=2,
        )
        assert d.verdict == "member"

    def test_inner_radius_excludes_core(self):
        full = check_phi_mV(
            lambda t: np.exp(-np.abs(t)), ClassParams((2,), 10.0), dim=1
        )
        tail = check_phi_mV(
            lambda t: np.exp(-np.abs(t)),
            ClassParams((2,), 10.0),
            inner_radius=2.0,
            dim=1,
        )
        assert tail.trace[-1][1] < full.trace[-1][1]


class TestFitTailGaussian:
    def test_pure_gaussian_exact(self):
        b = GridFn(GRID16, np.exp(-GRID16.axis(0) ** 2).astype(complex))
        Lam, bbar, resid = fit_tail_gaussian(b, 2.0)
        assert abs(Lam[0, 0] - 1.0) < 1e-6
        assert resid < 1e-8
        tail = np.abs(GRID16.axis(0)) > 2.0
        assert np.max(np.abs(bbar.values.real[tail] - 1.0)) < 1e-4

    def test_narrower_envelope(self):
        b = GridFn(GRID16, np.exp(-2.0 * GRID16.axis(0) ** 2).astype(complex))
        Lam, _, resid = fit_tail_gaussian(b, 2.0)
        assert abs(Lam[0, 0] - 2.0) < 1e-6
        assert resid < 1e-8

    def test_polynomial_prefactor_absorbed(self):
        z = GRID16.axis(0)
        b = GridFn(GRID16, (np.exp(-0.5 * z * z) / (1.0 + z * z)).astype(complex))
        Lam, _, resid = fit_tail_gaussian(b, 2.0)
        assert abs(Lam[0, 0] - 0.5) < 1e-6
        assert resid < 1e-8

    def test_laplace_has_no_gaussian_envelope(self):
        b = eval_on_grid(GRID16, Laplace(0.0, 1.0).cf)
        Lam, _, _ = fit_tail_gaussian(b, 2.0)
        assert abs(Lam[0, 0]) < 0.005

    def test_empty_tail_raises(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        with pytest.raises(NumericalError, match="tail"):
            fit_tail_gaussian(b, 20.0)

    def test_2d_cross_term(self):
        spec = make_grid(2, (-8.0, -8.0), (8.0, 8.0), (128, 128))
        m1, m2 = spec.meshgrid()
        quad = 1.0 * m1 * m1 + 2 * 0.3 * m1 * m2 + 2.0 * m2 * m2
        b = GridFn(spec, np.exp(-quad).astype(complex))
        Lam, _, resid = fit_tail_gaussian(b, 2.0)
        want = np.array([[1.0, 0.3], [0.3, 2.0]])
        assert np.max(np.abs(Lam - want)) < 1e-6
        assert resid < 1e-6


class TestCheckTailClass:
    PARAMS = TailClassParams(B=2.0, Lam=np.array([[0.5]]), m=(2,), V=10.0)

    def test_member(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        d = check_tail_class(b, self.PARAMS)
        assert d.verdict == "member"
        assert abs(d.fitted_lambda[0, 0] - 0.5) < 1e-6

    def test_envelope_rigidity_both_directions(self):
        # a 10% envelope misdeclaration must flip the verdict
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        for lam in (0.45, 0.55):
            params = TailClassParams(B=2.0, Lam=np.array([[lam]]), m=(2,), V=10.0)
            d = check_tail_class(b, params)
            assert d.verdict == "nonmember", lam
            assert d.detail["reason"] == "envelope mismatch"

    def test_tiny_V_fails_integrability(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        params = TailClassParams(B=2.0, Lam=np.array([[0.5]]), m=(2,), V=1e-6)
        d = check_tail_class(b, params)
        assert d.verdict == "nonmember"

    def test_slow_weight_inconclusive(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        params = TailClassParams(B=2.0, Lam=np.array([[0.5]]), m=(1,), V=100.0)
        d = check_tail_class(b, params)
        assert d.verdict == "inconclusive"

    def test_lam_shape_mismatch(self):
        b = eval_on_grid(GRID16, Gaussian(0.0, 1.0).cf)
        params = TailClassParams(B=2.0, Lam=np.eye(2), m=(2,), V=10.0)
        with pytest.raises(ConfigError, match="shape"):
            check_tail_class(b, params)


class TestBuildBn:
    def test_plateau_and_shoulders(self):
        spec = default_demo_grid(10)
        b = build_bn(5, spec)
        x = spec.axis(0)
        at5 = b.values.real[np.argmin(np.abs(x - 5.0))]
        assert at5 == pytest.approx(math.exp(-5.0))
        assert np.max(b.values.real) == pytest.approx(math.exp(-5.0))
        # half height at the shoulder midpoints n +- 1.5/n
        mid = b.values.real[np.argmin(np.abs(x - 5.3))]
        assert mid == pytest.approx(0.5 * math.exp(-5.0), rel=0.03)
        assert np.all(b.values.real[np.abs(x - 5.0) > 0.4 + spec.step[0]] == 0.0)
        assert np.all(b.values.real >= 0.0)

    def test_support_shrinks_with_n(self):
        spec = default_demo_grid(10)
        for n in (2, 5, 9):
            b = build_bn(n, spec)
            sup = np.nonzero(b.values.real)[0]
            x = spec.axis(0)
            width = x[sup[-1]] - x[sup[0]]
            assert width == pytest.approx(4.0 / n, abs=2 * spec.step[0])

    def test_grid_too_short(self):
        spec = default_demo_grid(10)
        with pytest.raises(ConfigError, match="too short"):
            build_bn(20, spec)

    def test_small_n_rejected(self):
        with pytest.raises(ConfigError):
            build_bn(1, default_demo_grid(10))

    def test_needs_1d(self):
        spec = make_grid(2, (-4.0, -4.0), (4.0, 4.0), (32, 32))
        with pytest.raises(ConfigError):
            build_bn(2, spec)


class TestIllposedDemo:
    def test_default_table(self):
        rep = illposed_demo()
        assert rep.bound_holds
        assert rep.pairings_decreasing
        assert [r.n for r in rep.rows] == list(range(2, 11))
        # closed-form lower bound at n=2: log(1) - 4 + (2 - 1/2)^2
        assert rep.rows[0].log_lower_bound == pytest.approx(-1.75)
        assert rep.rows[0].log_pairing_inverse >= rep.rows[0].log_lower_bound
        # bumps vanish weakly long before the divergence saturates
        by_n = {r.n: r for r in rep.rows}
        assert by_n[8].weak_norm < 1e-3
        assert by_n[10].log_pairing_inverse > 70.0

    def test_pairing_magnitude_envelope(self):
        rep = illposed_demo(ns=[2, 4])
        for r in rep.rows:
            n = r.n
            hi = (4.0 / n) * math.exp(-2 * n + 2.0 / n)
            lo = 0.5 * (2.0 / n) * math.exp(-2 * n - 2.0 / n)
            assert lo <= r.pairing_bn <= hi

    def test_no_overflow_far_out(self):
        # exp(x^2) overflows float64 near x = 27; the log-space pairing
        # must stay finite well beyond that
        rep = illposed_demo(ns=[27, 30], spec=default_demo_grid(30))
        assert all(np.isfinite(r.log_pairing_inverse) for r in rep.rows)
        assert rep.bound_holds
        assert rep.rows[-1].log_pairing_inverse > 800.0

    def test_bad_index_rejected(self):
        with pytest.raises(ConfigError):
            illposed_demo(ns=[1, 2])


@pytest.fixture(scope="module")
def report():
    spec = make_grid(1, -8.0, 8.0, 2048)
    return stability_experiment(Gaussian(0.0, 0.25), Gaussian(0.0, 1.0), spec)


class TestStabilityExperiment:
    def test_envelope_self_calibrates(self, report):
        # eps1 = exp(-0.125 z^2) exp(-0.5 z^2): envelope 0.625
        assert report.fitted_lambda == pytest.approx(0.625, abs=1e-6)

    def test_distances_vanish_linearly(self, report):
        assert report.monotone_vanishing
        assert report.failed_trials == []
        for r in report.decade_ratios:
            assert 0.05 <= r <= 0.2

    def test_wrong_envelope_contrast(self, report):
        assert report.contrast_ratio >= 100.0
        assert report.wrong_distance > max(report.distances)

    def test_report_serializes(self, report):
        d = report.to_dict()
        assert d["scales"] == [1e-1, 1e-2, 1e-3]
        assert len(d["distances"]) == 3

    def test_needs_1d(self):
        spec = make_grid(2, (-4.0, -4.0), (4.0, 4.0), (32, 32))
        with pytest.raises(ConfigError):
            stability_experiment(Gaussian(0.0, 0.25), Gaussian(0.0, 1.0), spec)


class TestDiagnosisType:
    def test_trace_must_increase(self):
        with pytest.raises(ConfigError):
            Diagnosis("member", [(2.0, 1.0), (1.0, 2.0)])

    def test_to_dict_round(self):
        d = Diagnosis("member", [(1.0, 0.5), (2.0, 0.6)])
        out = d.to_dict()
        assert out["verdict"] == "member"
        assert out["trace"] == [[1.0, 0.5], [2.0, 0.6]]


@given(bump=st.floats(0.1, 5.0))
@settings(max_examples=20, deadline=None)
def test_verdict_monotone_in_V(bump):
    # enlarging the budget V can only move the verdict toward member
    fn = lambda t: bump * np.exp(-t * t)
    total = check_phi_mV(fn, ClassParams((2,), 1e9), dim=1).trace[-1][1]
    small = check_phi_mV(fn, ClassParams((2,), total * 0.5), dim=1)
    big = check_phi_mV(fn, ClassParams((2,), total * 2.0), dim=1)
    assert small.verdict == "nonmember"
    assert big.verdict == "member"
