"""Well-posedness diagnostics, the divergence demonstrator, and stability experiments.

Three ingredients:

  * membership checks for the polynomially weighted integrability class
    (finite weighted L1 with weights prod (1+t_k^2)^{-m_k}) and for the
    tail-factorization class where the function beyond radius B factors
    as (weighted-integrable) * exp(-z' Lam z);

  * the classical counterexample: a sequence of far-out bumps b_n that
    converges weakly to zero while b_n / (Gaussian cf) diverges, with all
    arithmetic in log space because the relevant products overflow
    doubles long before the effect saturates;

  * a stability experiment contrasting class-consistent perturbations of
    the observables (response vanishes linearly with the scale) with a
    wrong-envelope perturbation of the same nominal size (response does
    not vanish).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, NumericalError
from .ecf import MomentSet, oracle_moments
from .gridfn import (
    GridFn,
    GridSpec,
    TestBank,
    eval_on_grid,
    make_grid,
    pair,
    trapezoid_nd,
    weak_distance,
)
from .ident import solve_case_a, threshold_support


@dataclass(frozen=True)
class ClassParams:
    """Exponents and bound for the weighted-integrability class."""

    m: tuple[int, ...]
    V: float

    def __post_init__(self):
        if any(mi < 0 for mi in self.m):
            raise ConfigError("exponents must be nonnegative")
        if self.V <= 0:
            raise ConfigError("V must be positive")


@dataclass(frozen=True)
class TailClassParams:
    """Tail radius B, Gaussian envelope matrix Lam, and the inner-class params."""

    B: float
    Lam: np.ndarray
    m: tuple[int, ...]
    V: float

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.Lam, dtype=float))
        if lam.shape[0] != lam.shape[1]:
            raise ConfigError("Lam must be square")
        if not np.allclose(lam, lam.T):
            raise ConfigError("Lam must be symmetric")
        if self.B <= 0:
            raise ConfigError("B must be positive")
        object.__setattr__(self, "Lam", lam)


@dataclass
class Diagnosis:
    verdict: str
    trace: list[tuple[float, float]] = field(default_factory=list)
    fitted_lambda: np.ndarray | None = None
    fit_residual: float | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        radii = [r for r, _ in self.trace]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("trace radii must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "trace": [[float(r), float(v)] for r, v in self.trace],
            "fitted_lambda": None
            if self.fitted_lambda is None
            else np.asarray(self.fitted_lambda).tolist(),
            "fit_residual": self.fit_residual,
            "detail": {
                k: (v.to_dict() if isinstance(v, Diagnosis) else v)
                for k, v in self.detail.items()
            },
        }


CAUCHY_REL = 0.01


def _weighted_integral_grid(b: GridFn, m: tuple[int, ...], R: float, inner: float) -> float:
    spec = b.spec
    vals = np.abs(b.values).astype(float)
    radial2 = np.zeros(spec.shape)
    for k in range(spec.dim):
        ax = spec.axis(k)
        shape = [1] * spec.dim
        shape[k] = spec.n[k]
        with np.errstate(over="ignore"):
            vals = vals * (1.0 + ax * ax).reshape(shape) ** (-m[k])
        radial2 = radial2 + (ax * ax).reshape(shape)
    vals = np.where(radial2 <= R * R, vals, 0.0)
    if inner > 0:
        vals = np.where(radial2 > inner * inner, vals, 0.0)
    return float(np.real(trapezoid_nd(vals, spec)))


def _weighted_integral_callable(
    fn: Callable, dim: int, m: tuple[int, ...], R: float, inner: float, step: float
) -> float:
    n = max(int(math.ceil(2 * R / step)), 64)
    axis = np.linspace(-R, R, n + 1)
    if dim == 1:
        with np.errstate(over="ignore"):
            vals = np.abs(np.asarray(fn(axis), dtype=complex)).astype(float)
            vals = vals * (1.0 + axis * axis) ** (-m[0])
        if inner > 0:
            vals = np.where(np.abs(axis) > inner, vals, 0.0)
        return float(np.trapezoid(vals, dx=axis[1] - axis[0]))
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    with np.errstate(over="ignore"):
        vals = np.abs(np.asarray(fn(x1, x2), dtype=complex)).astype(float)
        vals = vals * (1.0 + x1 * x1) ** (-m[0]) * (1.0 + x2 * x2) ** (-m[1])
    r2 = x1 * x1 + x2 * x2
    vals = np.where(r2 <= R * R, vals, 0.0)
    if inner > 0:
        vals = np.where(r2 > inner * inner, vals, 0.0)
    h = axis[1] - axis[0]
    return float(np.trapezoid(np.trapezoid(vals, dx=h, axis=1), dx=h))


def check_phi_mV(
    b,
    params: ClassParams,
    radii: Sequence[float] | None = None,
    inner_radius: float = 0.0,
    dim: int | None = None,
) -> Diagnosis:
    """Membership diagnosis for the weighted-integrability class.

    The weighted absolute integral is computed on nested truncations. The
    verdict is member when the trace is Cauchy (last increment below 1% of
    the value) and stays under V, nonmember when the value exceeds V or
    the increments grow, inconclusive otherwise. A finite procedure can
    only probe an improper integral, so inconclusive is an honest output.
    """
    is_grid = isinstance(b, GridFn)
    if is_grid:
        d = b.spec.dim
        grid_edge = min(
            max(abs(b.spec.lo[k]), abs(b.spec.hi[k] - b.spec.step[k]))
            for k in range(d)
        )
    else:
        d = dim or len(params.m)
    if len(params.m) != d:
        raise ConfigError("one exponent per axis required")
    if radii is None:
        radii = [10.0 * 2**j for j in range(6)]
        if is_grid:
            radii = [r for r in radii if r <= grid_edge]
            if not radii or radii[-1] < grid_edge:
                radii = sorted(set(radii + [grid_edge]))
    radii = [float(r) for r in radii]
    if any(b2 <= a2 for a2, b2 in zip(radii, radii[1:])):
        raise ConfigError("radii must be strictly increasing")

    trace = []
    for R in radii:
        if is_grid:
            v = _weighted_integral_grid(b, params.m, R, inner_radius)
        else:
            step = 0.05 if d == 1 else 0.1
            v = _weighted_integral_callable(b, d, params.m, R, inner_radius, step)
        trace.append((R, v))

    values = [v for _, v in trace]
    if any(not np.isfinite(v) or v > params.V for v in values):
        return Diagnosis("nonmember", trace, detail={"reason": "exceeds V"})
    increments = [b2 - a2 for a2, b2 in zip(values, values[1:])]
    if len(increments) >= 2 and increments[-1] > increments[-2] > 0:
        return Diagnosis("nonmember", trace, detail={"reason": "increments grow"})
    if increments and increments[-1] <= CAUCHY_REL * max(values[-1], 0.0):
        return Diagnosis("member", trace)
    if not increments and values and values[-1] < params.V:
        return Diagnosis("inconclusive", trace, detail={"reason": "single radius"})
    return Diagnosis("inconclusive", trace, detail={"reason": "not Cauchy at max radius"})


def fit_tail_gaussian(b: GridFn, B: float):
    """Fit log|b| ~ offset + c*log(1+|z|^2) - z' Lam z over the tail region.

    The logarithmic regressor absorbs polynomially varying prefactors so
    the quadratic coefficient is unbiased for products like
    (1+z^2)^{-1} exp(-Lam z^2). Returns (Lam, compensated b_bar as a
    GridFn, rms fit residual).
    """
    spec = b.spec
    d = spec.dim
    mesh = spec.meshgrid() if d == 2 else (spec.axis(0),)
    r2 = sum(np.asarray(a, dtype=float) ** 2 for a in mesh)
    absb = np.abs(b.values)
    tail = (r2 > B * B) & (absb > 1e-300)
    if not np.any(tail):
        raise NumericalError("b vanishes on the tail region; cannot fit")
    logb = np.log(absb[tail])
    cols = [np.ones(logb.shape), np.log1p(r2[tail])]
    if d == 1:
        z = mesh[0][tail]
        cols.append(-(z * z))
    else:
        z1, z2 = mesh[0][tail], mesh[1][tail]
        cols.extend([-(z1 * z1), -2.0 * z1 * z2, -(z2 * z2)])
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, logb, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - logb) ** 2)))
    if d == 1:
        Lam = np.array([[coef[2]]])
        quad = Lam[0, 0] * r2
    else:
        Lam = np.array([[coef[2], coef[3]], [coef[3], coef[4]]])
        quad = (
            Lam[0, 0] * mesh[0] ** 2
            + 2 * Lam[0, 1] * mesh[0] * mesh[1]
            + Lam[1, 1] * mesh[1] ** 2
        )
    with np.errstate(over="ignore"):
        bbar = b.values * np.exp(quad)
    return Lam, GridFn(spec, bbar, "b_bar"), resid


LAMBDA_REL_TOL = 0.05
LAMBDA_ABS_TOL = 0.005


def check_tail_class(b: GridFn, params: TailClassParams) -> Diagnosis:
    """Tail-class membership: envelope match plus two-sided weighted integrability.

    Member iff the fitted envelope matches params.Lam within tolerance and
    both the compensated tail factor and its reciprocal pass the weighted
    integrability check with (m, V). The envelope tolerance is tight on
    purpose: the class pins the Gaussian exponent exactly.
    """
    d = b.spec.dim
    lam_target = np.atleast_2d(np.asarray(params.Lam, dtype=float))
    if lam_target.shape != (d, d):
        raise ConfigError("Lam shape does not match grid dimension")
    Lam, bbar, resid = fit_tail_gaussian(b, params.B)
    tol = max(LAMBDA_ABS_TOL, LAMBDA_REL_TOL * float(np.max(np.abs(lam_target))))
    mismatch = float(np.max(np.abs(Lam - lam_target)))
    if mismatch > tol:
        return Diagnosis(
            "nonmember",
            fitted_lambda=Lam,
            fit_residual=resid,
            detail={"reason": "envelope mismatch", "mismatch": mismatch, "tol": tol},
        )
    inner = ClassParams(params.m, params.V)
    with np.errstate(divide="ignore", over="ignore"):
        inv_vals = np.where(np.abs(bbar.values) > 0, 1.0 / bbar.values, np.inf)
    d1 = check_phi_mV(bbar, inner, inner_radius=params.B)
    d2 = check_phi_mV(GridFn(b.spec, inv_vals, "b_bar_inv"), inner, inner_radius=params.B)
    sub = {"b_bar": d1, "b_bar_inv": d2}
    if d1.verdict == "nonmember" or d2.verdict == "nonmember":
        verdict = "nonmember"
    elif d1.verdict == "member" and d2.verdict == "member":
        verdict = "member"
    else:
        verdict = "inconclusive"
    return Diagnosis(
        verdict,
        trace=d1.trace,
        fitted_lambda=Lam,
        fit_residual=resid,
        detail=sub,
    )


def build_bn(n: int, spec: GridSpec) -> GridFn:
    """Far-out bump: e^{-n} on [n-1/n, n+1/n], raised-cosine shoulders to n+-2/n.

    The bump pairs to zero against any fixed test function as n grows, yet
    dividing it by a Gaussian characteristic function produces a sequence
    whose pairings diverge; build_bn is the raw material for that
    demonstration.
    """
    if spec.dim != 1:
        raise ConfigError("bumps are one-dimensional")
    if n < 2:
        raise ConfigError("n must be >= 2")
    x = spec.axis(0)
    left, right = n - 2.0 / n, n + 2.0 / n
    if x[0] > left or x[-1] < right:
        raise ConfigError(
            f"grid [{x[0]}, {x[-1]}] too short for bump support [{left}, {right}]"
        )
    flat_l, flat_r = n - 1.0 / n, n + 1.0 / n
    vals = np.zeros(x.shape)
    flat = (x >= flat_l) & (x <= flat_r)
    vals[flat] = 1.0
    lsh = (x > left) & (x < flat_l)
    vals[lsh] = 0.5 * (1.0 + np.cos(math.pi * (flat_l - x[lsh]) * n))
    rsh = (x > flat_r) & (x < right)
    vals[rsh] = 0.5 * (1.0 + np.cos(math.pi * (x[rsh] - flat_r) * n))
    return GridFn(spec, vals * math.exp(-n), f"b_{n}")


@dataclass
class IllposedRow:
    n: int
    pairing_bn: float
    weak_norm: float
    log_pairing_inverse: float
    log_lower_bound: float

    def to_dict(self):
        return {
            "n": self.n,
            "pairing_bn": self.pairing_bn,
            "weak_norm": self.weak_norm,
            "log_pairing_inverse": self.log_pairing_inverse,
            "log_lower_bound": self.log_lower_bound,
            "margin": self.log_pairing_inverse - self.log_lower_bound,
        }


@dataclass
class IllposedReport:
    rows: list[IllposedRow]
    bound_holds: bool
    pairings_decreasing: bool

    def to_dict(self):
        return {
            "rows": [r.to_dict() for r in self.rows],
            "bound_holds": self.bound_holds,
            "pairings_decreasing": self.pairings_decreasing,
        }


def default_demo_grid(max_n: int = 10) -> GridSpec:
    """Origin-anchored grid with step 2^-8 covering bumps up to max_n."""
    width = 4.0
    while width < max_n + 4.0:
        width *= 2.0
    return make_grid(1, -2.0, width - 2.0, int(width) * 256)


def illposed_demo(ns: Sequence[int] = tuple(range(2, 11)), spec: GridSpec | None = None) -> IllposedReport:
    """Divergence table: bumps vanish weakly while bump/(Gaussian cf) explodes.

    The denominator is the Gaussian form exp(-x^2), the probe is the
    exponential taper exp(-|x|), and every pairing with the inverted
    denominator is evaluated in log space (log-sum-exp over the support),
    since exp(+x^2) overflows float64 already near x = 27. Each row is
    checked against the closed-form lower bound
        log(2/n) - 2n + (n - 1/n)^2.
    """
    ns = sorted(set(int(n) for n in ns))
    if any(n < 2 for n in ns):
        raise ConfigError("bump indices must be >= 2")
    if spec is None:
        spec = default_demo_grid(max(ns))
    x = spec.axis(0)
    h = spec.step[0]
    bank = TestBank.default()
    zero = GridFn(spec, np.zeros(spec.shape), "zero")
    rows = []
    for n in ns:
        bn = build_bn(n, spec)
        i1 = float(np.real(pair(bn, lambda t: np.exp(-np.abs(t)))))
        wn = weak_distance(bn, zero, bank)
        support = bn.values.real > 0.0
        logb = np.log(bn.values.real[support])
        xs = x[support]
        log_terms = logb + xs * xs - np.abs(xs) + math.log(h)
        L = float(logsumexp(log_terms))
        bound = math.log(2.0 / n) - 2.0 * n + (n - 1.0 / n) ** 2
        rows.append(IllposedRow(n, i1, wn, L, bound))
    bound_holds = all(r.log_pairing_inverse >= r.log_lower_bound for r in rows)
    decreasing = all(
        a.pairing_bn > b.pairing_bn for a, b in zip(rows, rows[1:])
    )
    return IllposedReport(rows, bound_holds, decreasing)


@dataclass
class StabilityReport:
    scales: list[float]
    distances: list[float]
    decade_ratios: list[float]
    wrong_scale: float
    wrong_distance: float
    contrast_ratio: float
    failed_trials: list[dict]
    fitted_lambda: float

    def to_dict(self):
        return {
            "scales": self.scales,
            "distances": self.distances,
            "decade_ratios": self.decade_ratios,
            "wrong_scale": self.wrong_scale,
            "wrong_distance": self.wrong_distance,
            "contrast_ratio": self.contrast_ratio,
            "failed_trials": self.failed_trials,
            "fitted_lambda": self.fitted_lambda,
        }

    @property
    def monotone_vanishing(self) -> bool:
        return all(a > b for a, b in zip(self.distances, self.distances[1:]))


def _hermitian_bump(spec: GridSpec, center: float, width: float, lam: float):
    """Even and odd class-envelope bumps at +-center (d=1)."""
    z = spec.axis(0)
    t = np.abs(z)
    prof = np.where(
        np.abs(t - center) <= width,
        0.5 * (1.0 + np.cos(math.pi * (t - center) / width)),
        0.0,
    )
    envelope = prof / (1.0 + z * z) * np.exp(-lam * z * z)
    even = envelope
    odd = -1j * np.sign(z) * envelope
    return GridFn(spec, even, "bump_even"), GridFn(spec, odd, "bump_odd")


def stability_experiment(
    g_spec,
    f_spec,
    spec: GridSpec,
    scales: Sequence[float] = (1e-1, 1e-2, 1e-3),
    tail_B: float = 2.0,
    bump_center: float = 4.0,
    bump_width: float = 1.0,
    wrong_lambda_factor: float = 0.25,
    contrast_scale: float = 1e-2,
    tau: float = 1e-6,
) -> StabilityReport:
    """Contrast class-consistent and wrong-envelope observable perturbations.

    The Gaussian envelope of the class is calibrated from the base
    observable itself (tail fit of eps1). Class-consistent perturbations
    carry that envelope, so dividing by eps1 stays bounded and the solved
    gamma moves linearly with the scale. The wrong-envelope run widens the
    Gaussian (Lam scaled by wrong_lambda_factor), reproducing the
    divergence mechanism of the bump counterexample at finite scale.
    """
    if spec.dim != 1:
        raise ConfigError("stability experiment is one-dimensional")
    M = oracle_moments(g_spec, f_spec, spec)
    lam_fit, _, _ = fit_tail_gaussian(M.eps1, tail_B)
    lam = float(lam_fit[0, 0])
    even, odd = _hermitian_bump(spec, bump_center, bump_width, lam)
    even_w, odd_w = _hermitian_bump(
        spec, bump_center, bump_width, lam * wrong_lambda_factor
    )
    base = solve_case_a(M, tau=tau)
    bank = TestBank.default()

    def perturbed_distance(s: float, e1: GridFn, e2: GridFn) -> float:
        Mp = MomentSet(
            eps1=M.eps1 + s * e1,
            eps2=(M.eps2[0] + s * e2,),
            deps1=M.deps1,
            source="oracle",
            n_samples=None,
        )
        sol = solve_case_a(Mp, tau=tau)
        if sol.mask.is_trivial():
            raise NumericalError("perturbed eps1 lost its support mask")
        return weak_distance(sol.gamma, base.gamma, bank)

    distances, kept_scales, failed = [], [], []
    for s in sorted(scales, reverse=True):
        try:
            distances.append(perturbed_distance(s, even, odd))
            kept_scales.append(s)
        except NumericalError as e:
            failed.append({"scale": s, "error": str(e)})
    ratios = [d2 / d1 for d1, d2 in zip(distances, distances[1:])]
    try:
        wrong = perturbed_distance(contrast_scale, even_w, odd_w)
    except NumericalError as e:
        failed.append({"scale": contrast_scale, "error": str(e), "kind": "wrong"})
        wrong = float("inf")
    ref = distances[kept_scales.index(contrast_scale)] if contrast_scale in kept_scales else float("nan")
    contrast = wrong / ref if ref and np.isfinite(ref) and ref > 0 else float("inf")
    return StabilityReport(
        scales=kept_scales,
        distances=distances,
        decade_ratios=ratios,
        wrong_scale=contrast_scale,
        wrong_distance=wrong,
        contrast_ratio=contrast,
        failed_trials=failed,
        fitted_lambda=lam,
    )
