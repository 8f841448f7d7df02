"""Nonparametric identification from systems of convolution equations.

The pipeline: sample (or synthesize) observations, turn them into
Fourier-domain moment functions, solve the system pointwise on an
estimated support region by exponentiating path integrals of log
derivatives, optionally through a spectral cutoff weight, then transform
back and diagnose how well posed the whole exercise was.
"""

from .errors import ConfigError, ConvsysError, NumericalError
from .gridfn import (
    GridFn,
    GridSpec,
    TestBank,
    dual_grid,
    eval_on_grid,
    fourier_forward,
    fourier_inverse,
    hermitian_defect,
    line_integral_cumulative,
    make_grid,
    pair,
    trapezoid_nd,
    weak_distance,
)
from .families import (
    Fejer,
    GaussMix,
    Gaussian,
    Laplace,
    PointMass,
    RegLinear,
    RegQuadratic,
    RegStep,
    Uniform,
    family_from_dict,
    parse_family,
    parse_regression,
    regression_from_dict,
)
from .ecf import (
    MomentSet,
    SampleSet,
    ecf,
    ecf_derivative,
    empirical_moments,
    moment_ecf,
    oracle_moments,
    regression_moments,
    silverman_bandwidth,
)
from .ident import (
    Solution,
    SupportMask,
    default_tau,
    exp_path_integral,
    kappa_a,
    kappa_b,
    path_independence_check,
    recover_real,
    solve_case_a,
    solve_case_b,
    threshold_support,
)
from .regular import RegWeight, bandlimit_diagnostic, make_weight, solve_regularized
from .wellposed import (
    ClassParams,
    Diagnosis,
    IllposedReport,
    StabilityReport,
    TailClassParams,
    build_bn,
    check_phi_mV,
    check_tail_class,
    default_demo_grid,
    fit_tail_gaussian,
    illposed_demo,
    stability_experiment,
)
from .sim import ModelSpec, gen_example1, gen_example2, gen_example3, generate
from .serialize import (
    config_hash,
    load_gridfn,
    load_momentset,
    load_sampleset,
    load_solution,
    save_gridfn,
    save_momentset,
    save_sampleset,
    save_solution,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
