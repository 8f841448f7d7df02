"""Constructive solution of the Fourier-domain deconvolution system.

Two cases, mirroring which factor is assumed continuously differentiable:

  case a:  kappa_k = i eps2_k / eps1  is the log-derivative of gamma;
           gamma = c * exp of its path integral from the origin, and
           phi = eps1 / gamma.

  case b:  kappa~_k = (d_k eps1 - i eps2_k) / eps1  is the log-derivative
           of phi; phi~ = exp of its path integral (phi~(0) = 1), and
           gamma = eps1 / phi~.

Both exponentiate after integrating, so no complex logarithm of data
ratios (and no phase unwrapping) ever happens. Case b tolerates kinked
gamma (e.g. Laplace latent density) because only phi is differentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError, NumericalError
from .ecf import MomentSet
from .gridfn import GridFn, GridSpec, fourier_inverse, line_integral_cumulative, trapezoid_nd

DEFAULT_TAU_FLOOR = 1e-6
DEFAULT_TAU_COEF = 2.5


@dataclass
class SupportMask:
    """Origin-containing convex support estimate for the identified region."""

    spec: GridSpec
    mask: np.ndarray
    tau: float

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.spec.shape:
            raise ConfigError("mask shape does not match grid")
        self.mask = m

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    def is_trivial(self) -> bool:
        return self.count <= 1

    def edge_radius(self) -> float:
        """Largest symmetric sup-norm radius certainly inside the mask."""
        idx = np.nonzero(self.mask)
        radii = []
        for k in range(self.spec.dim):
            ax = self.spec.axis(k)
            radii.append(min(abs(ax[idx[k].min()]), abs(ax[idx[k].max()])))
        return float(min(radii))


def default_tau(n_samples: int | None) -> float:
    if n_samples is None:
        return DEFAULT_TAU_FLOOR
    return max(DEFAULT_TAU_FLOOR, DEFAULT_TAU_COEF / math.sqrt(n_samples))


def _convexify_1d(component: np.ndarray) -> np.ndarray:
    idx = np.nonzero(component)[0]
    out = np.zeros_like(component)
    out[idx.min() : idx.max() + 1] = True
    return out


def _convexify_2d(component: np.ndarray, spec: GridSpec) -> np.ndarray:
    from scipy.spatial import ConvexHull, QhullError

    pts = np.argwhere(component).astype(float)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # degenerate (collinear) component: keep as is
        return component
    ii, jj = np.meshgrid(
        np.arange(spec.n[0]), np.arange(spec.n[1]), indexing="ij"
    )
    coords = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(float)
    inside = np.ones(coords.shape[0], dtype=bool)
    for a, b, c in hull.equations:
        inside &= coords @ np.array([a, b]) + c <= 1e-9
    return inside.reshape(spec.shape)


def threshold_support(eps1: GridFn, tau: float, gap_fill: int = 2) -> SupportMask:
    """Mask where |eps1| > tau, convexified around the origin component.

    Isolated sub-threshold dips of width <= 2*gap_fill cells are bridged
    by morphological closing before the component is extracted: genuine
    characteristic functions can have isolated zeros (Gaussian mixtures)
    that must not truncate the support. Pass gap_fill=0 to disable.
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    spec = eps1.spec
    raw = np.abs(eps1.values) > tau
    raw[spec.origin_index] = True
    if gap_fill > 0:
        size = 2 * gap_fill + 1
        structure = np.ones((size,) * spec.dim, dtype=bool)
        raw = ndimage.binary_closing(raw, structure=structure)
        raw[spec.origin_index] = True
    labels, _ = ndimage.label(raw)
    component = labels == labels[spec.origin_index]
    if spec.dim == 1:
        mask = _convexify_1d(component)
    else:
        mask = _convexify_2d(component, spec)
    return SupportMask(spec, mask, tau)


def _safe_ratio(numer: np.ndarray, eps1: np.ndarray, mask: np.ndarray, floor: float | None):
    out = np.zeros_like(numer)
    if not np.any(mask):
        return out
    denom = eps1[mask]
    absd = np.abs(denom)
    if floor is None:
        tiny = absd <= np.finfo(float).eps
        if np.any(tiny):
            raise NumericalError(
                f"|eps1| at machine epsilon on {int(tiny.sum())} masked points; "
                "tighten the support threshold"
            )
    else:
        # clamp modulus at the floor, preserving phase, so the
        # weighted solve stays total on the weight's support
        stretch = np.divide(
            floor, absd, out=np.ones_like(absd), where=absd > 0
        )
        denom = np.where(absd >= floor, denom, np.where(absd > 0, denom * stretch, floor))
    out[mask] = numer[mask] / denom
    return out


def kappa_a(M: MomentSet, mask: SupportMask, floor: float | None = None) -> list[GridFn]:
    """kappa_k = i eps2_k / eps1 on the mask (log-derivative of gamma)."""
    mk = mask.mask
    return [
        GridFn(M.spec, _safe_ratio(1j * M.eps2[k].values, M.eps1.values, mk, floor), f"kappa_{k}")
        for k in range(M.dim)
    ]


def kappa_b(M: MomentSet, mask: SupportMask, floor: float | None = None) -> list[GridFn]:
    """kappa~_k = (d_k eps1 - i eps2_k) / eps1 on the mask (log-derivative of phi)."""
    mk = mask.mask
    return [
        GridFn(
            M.spec,
            _safe_ratio(M.deps1[k].values - 1j * M.eps2[k].values, M.eps1.values, mk, floor),
            f"kappa~_{k}",
        )
        for k in range(M.dim)
    ]


def _reachable_1d(mask: np.ndarray, j0: int) -> np.ndarray:
    reach = np.zeros_like(mask)
    if not mask[j0]:
        return reach
    hi = j0
    while hi + 1 < mask.size and mask[hi + 1]:
        hi += 1
    lo = j0
    while lo - 1 >= 0 and mask[lo - 1]:
        lo -= 1
    reach[lo : hi + 1] = True
    return reach


def _staircase_reach(mask: np.ndarray, j0: tuple[int, int]) -> np.ndarray:
    """Points whose path (0,0)->(z1,0)->(z1,z2) stays inside the mask."""
    i0, j0c = j0
    row_ok = np.zeros(mask.shape[0], dtype=bool)
    row = mask[:, j0c]
    if row[i0]:
        row_ok = _reachable_1d(row, i0)
    up = np.logical_and.accumulate(mask[:, j0c:], axis=1)
    down = np.logical_and.accumulate(mask[:, j0c::-1], axis=1)[:, ::-1]
    seg2 = np.concatenate([down[:, :-1], up], axis=1)
    return row_ok[:, None] & seg2 & mask


def exp_path_integral(
    kappas: list[GridFn], c: complex, mask: SupportMask
) -> tuple[GridFn, np.ndarray]:
    """c * exp of the path integral of sum_k kappa_k dxi_k from the origin.

    d=1 integrates along the axis; d=2 follows the axis-ordered staircase
    (0,0)->(z1,0)->(z1,z2). Returns the GridFn (zero outside the mask) and
    the reachability mask; masked points whose path exits the mask are
    dropped from the output and reported through that second value.
    """
    spec = kappas[0].spec
    j0 = spec.origin_index
    if not mask.mask[j0]:
        raise ConfigError("origin must belong to the mask")
    if spec.dim == 1:
        reach = _reachable_1d(mask.mask, j0[0])
        I = line_integral_cumulative(kappas[0]).values
    else:
        reach = _staircase_reach(mask.mask, j0)
        leg1 = line_integral_cumulative(kappas[0], axis=0).values[:, j0[1]]
        leg2 = line_integral_cumulative(kappas[1], axis=1).values
        I = leg1[:, None] + leg2
    vals = np.zeros(spec.shape, dtype=complex)
    vals[reach] = c * np.exp(I[reach])
    return GridFn(spec, vals, "exp_path_integral"), reach


def path_independence_check(kappas: list[GridFn], mask: SupportMask) -> float:
    """Max over doubly-reachable points of the two staircase orders' difference."""
    spec = kappas[0].spec
    if spec.dim != 2:
        raise ConfigError("path independence check requires d=2")
    j0 = spec.origin_index
    leg1 = line_integral_cumulative(kappas[0], axis=0).values[:, j0[1]]
    leg2 = line_integral_cumulative(kappas[1], axis=1).values
    I12 = leg1[:, None] + leg2
    leg1b = line_integral_cumulative(kappas[1], axis=1).values[j0[0], :]
    leg2b = line_integral_cumulative(kappas[0], axis=0).values
    I21 = leg1b[None, :] + leg2b
    reach12 = _staircase_reach(mask.mask, j0)
    reach21 = _staircase_reach(mask.mask.T, (j0[1], j0[0])).T
    both = reach12 & reach21
    if not np.any(both):
        return 0.0
    return float(np.max(np.abs(I12[both] - I21[both])))


@dataclass
class Solution:
    """Recovered Fourier factors and bookkeeping for one solve."""

    gamma: GridFn
    phi: GridFn
    case: str
    c: complex
    mask: SupportMask
    identified: bool = True
    g_real: GridFn | None = None
    f_real: GridFn | None = None
    meta: dict = field(default_factory=dict)

    @property
    def spec(self) -> GridSpec:
        return self.gamma.spec

    def residual(self) -> float:
        """sup over the mask of |gamma*phi - eps1| when eps1 is recorded."""
        eps1 = self.meta.get("eps1")
        if eps1 is None:
            return float("nan")
        diff = self.gamma.values * self.phi.values - eps1.values
        m = self.mask.mask
        return float(np.max(np.abs(diff[m]))) if m.any() else 0.0


def _trivial_solution(M: MomentSet, mask: SupportMask, case: str, c: complex) -> Solution:
    spec = M.spec
    gv = np.zeros(spec.shape, dtype=complex)
    pv = np.zeros(spec.shape, dtype=complex)
    gv[spec.origin_index] = c
    pv[spec.origin_index] = M.eps1.values[spec.origin_index] / c
    return Solution(
        gamma=GridFn(spec, gv, "gamma"),
        phi=GridFn(spec, pv, "phi"),
        case=case,
        c=c,
        mask=mask,
        identified=False,
        meta={"eps1": M.eps1, "reason": "support mask is a single point"},
    )


def _finish(M, mask, case, c, gamma_vals, phi_vals, reach, extra=None) -> Solution:
    spec = M.spec
    dropped = int(mask.mask.sum() - reach.sum())
    eff_mask = SupportMask(spec, reach, mask.tau)
    meta = {"eps1": M.eps1, "dropped_points": dropped, "tau": mask.tau}
    if extra:
        meta.update(extra)
    return Solution(
        gamma=GridFn(spec, gamma_vals, "gamma"),
        phi=GridFn(spec, phi_vals, "phi"),
        case=case,
        c=c,
        mask=eff_mask,
        meta=meta,
    )


def solve_case_a(
    M: MomentSet,
    tau: float | None = None,
    c: complex = 1.0,
    mask: SupportMask | None = None,
    denom_floor: float | None = None,
) -> Solution:
    """Case (a): gamma differentiable; gamma from the path integral of
    i eps2/eps1, then phi = eps1/gamma on the mask."""
    if tau is None:
        tau = default_tau(M.n_samples)
    if mask is None:
        mask = threshold_support(M.eps1, tau)
    if mask.is_trivial():
        return _trivial_solution(M, mask, "a", c)
    kap = kappa_a(M, mask, floor=denom_floor)
    gamma, reach = exp_path_integral(kap, c, mask)
    phi_vals = np.zeros(M.spec.shape, dtype=complex)
    phi_vals[reach] = M.eps1.values[reach] / gamma.values[reach]
    return _finish(M, mask, "a", c, gamma.values, phi_vals, reach)


def solve_case_b(
    M: MomentSet,
    tau: float | None = None,
    c: complex = 1.0,
    mask: SupportMask | None = None,
    denom_floor: float | None = None,
) -> Solution:
    """Case (b): phi differentiable; phi~ from the path integral of
    (eps1' - i eps2)/eps1, then gamma = eps1/phi~ on the mask."""
    if not M.deps1:
        raise ConfigError("case b requires derivative moments")
    if tau is None:
        tau = default_tau(M.n_samples)
    if mask is None:
        mask = threshold_support(M.eps1, tau)
    if mask.is_trivial():
        return _trivial_solution(M, mask, "b", c)
    kap = kappa_b(M, mask, floor=denom_floor)
    phi, reach = exp_path_integral(kap, 1.0, mask)
    gamma_vals = np.zeros(M.spec.shape, dtype=complex)
    gamma_vals[reach] = c * M.eps1.values[reach] / phi.values[reach]
    return _finish(M, mask, "b", c, gamma_vals, phi.values, reach)


IMAG_TOL = 0.01


def recover_real(solution: Solution, which: str = "g", density: bool = True) -> GridFn:
    """Inverse-transform one factor to real space and clean it up.

    The imaginary part must stay below 1% of the real sup-norm (a larger
    residual signals a sign-convention or masking failure). For densities,
    negatives are clipped and the result is renormalized to unit mass.
    The result is cached on the Solution.
    """
    if which not in ("g", "f"):
        raise ConfigError("which must be 'g' or 'f'")
    src = solution.gamma if which == "g" else solution.phi
    out = fourier_inverse(src)
    real = out.values.real
    imag_sup = float(np.max(np.abs(out.values.imag)))
    real_sup = float(np.max(np.abs(real)))
    if real_sup == 0.0:
        raise NumericalError("inverse transform is identically zero")
    if imag_sup > IMAG_TOL * real_sup:
        raise NumericalError(
            f"imaginary residual {imag_sup:.3g} exceeds {IMAG_TOL:.0%} of sup-norm "
            f"{real_sup:.3g}; check sign convention and mask"
        )
    if density:
        real = np.clip(real, 0.0, None)
        mass = trapezoid_nd(real, out.spec).real
        if mass <= 0:
            raise NumericalError("clipped density has nonpositive mass")
        real = real / mass
    result = GridFn(out.spec, real, f"{which}_real")
    if which == "g":
        solution.g_real = result
    else:
        solution.f_real = result
    return result
