"""Synthetic data generators for the three observation schemes.

Every generator is a pure function of (ModelSpec, seed): the same spec and
seed reproduce the same SampleSet bit for bit, which the test suite and
the CLI manifests both rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .families import Family, Gaussian, family_from_dict, regression_from_dict
from .ecf import SampleSet


@dataclass(frozen=True)
class ModelSpec:
    """Distributional description of one synthetic model.

    model 1: latent density with classical measurement error,
        z = x_latent + u,  x = x_latent + u_x.
    model 2: Berkson regression, x_latent = z + u with z observed,
        y = g(x_latent) + u_y,  x = x_latent + u_x.
    model 3: two noisy measurements of the same latent draw,
        z1 = x_latent + u1,  z2 = x_latent + u2 (u1, u2 iid).
    """

    model: int
    g_spec: dict = field(default_factory=dict)
    f_spec: dict = field(default_factory=dict)
    u_x_spec: dict | None = None
    u_y_spec: dict | None = None
    z_spec: dict | None = None
    n: int = 10_000

    def __post_init__(self):
        if self.model not in (1, 2, 3):
            raise ConfigError(f"unknown model {self.model}")
        if self.n < 2:
            raise ConfigError("need at least 2 observations")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "g_spec": self.g_spec,
            "f_spec": self.f_spec,
            "u_x_spec": self.u_x_spec,
            "u_y_spec": self.u_y_spec,
            "z_spec": self.z_spec,
            "n": self.n,
        }


def _family(spec: dict | None, default: Family | None = None) -> Family | None:
    if spec is None:
        return default
    return family_from_dict(spec)


def gen_example1(spec: ModelSpec, seed: int) -> SampleSet:
    """Latent variable measured twice: once with error f, once with error u_x."""
    rng = np.random.default_rng(seed)
    latent = family_from_dict(spec.g_spec).sample(rng, spec.n)
    u = family_from_dict(spec.f_spec).sample(rng, spec.n)
    u_x_fam = _family(spec.u_x_spec)
    u_x = u_x_fam.sample(rng, spec.n) if u_x_fam is not None else np.zeros(spec.n)
    z = latent + u
    x = latent + u_x
    return SampleSet("example1", z=z[:, None], x=x[:, None], seed=seed,
                     meta={"spec": spec.to_dict()})


def gen_example2(spec: ModelSpec, seed: int) -> SampleSet:
    """Berkson design: the regressor is the observed z plus unobserved noise."""
    rng = np.random.default_rng(seed)
    z_fam = _family(spec.z_spec, Gaussian(0.0, 1.0))
    z = z_fam.sample(rng, spec.n)
    u = family_from_dict(spec.f_spec).sample(rng, spec.n)
    latent = z + u
    g = regression_from_dict(spec.g_spec)
    u_y_fam = _family(spec.u_y_spec)
    u_y = u_y_fam.sample(rng, spec.n) if u_y_fam is not None else np.zeros(spec.n)
    u_x_fam = _family(spec.u_x_spec)
    u_x = u_x_fam.sample(rng, spec.n) if u_x_fam is not None else np.zeros(spec.n)
    y = g(latent) + u_y
    x = latent + u_x
    return SampleSet("example2", z=z[:, None], x=x[:, None], y=y, seed=seed,
                     meta={"spec": spec.to_dict()})


def gen_example3(spec: ModelSpec, seed: int) -> SampleSet:
    """Two repeated noisy measurements; the second plays the role of x."""
    rng = np.random.default_rng(seed)
    latent = family_from_dict(spec.g_spec).sample(rng, spec.n)
    f = family_from_dict(spec.f_spec)
    z1 = latent + f.sample(rng, spec.n)
    z2 = latent + f.sample(rng, spec.n)
    return SampleSet("example3", z=z1[:, None], x=z2[:, None], seed=seed,
                     meta={"spec": spec.to_dict()})


_GENERATORS = {1: gen_example1, 2: gen_example2, 3: gen_example3}


def generate(spec: ModelSpec, seed: int) -> SampleSet:
    return _GENERATORS[spec.model](spec, seed)
