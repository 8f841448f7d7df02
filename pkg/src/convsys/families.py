"""Closed-form distribution and regression families used for oracles and simulation.

Each density family exposes its characteristic function and the exact
derivative of that characteristic function, so noiseless Fourier
observables can be synthesized without quadrature. Sign convention
matches the transform in gridfn: cf(zeta) = E exp(+i zeta X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import ConfigError


class Family(Protocol):
    def cf(self, z: np.ndarray) -> np.ndarray: ...
    def cf_prime(self, z: np.ndarray) -> np.ndarray: ...
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...
    def pdf(self, x: np.ndarray) -> np.ndarray: ...
    def to_dict(self) -> dict: ...


@dataclass(frozen=True)
class Gaussian:
    mu: float = 0.0
    var: float = 1.0

    def cf(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(1j * self.mu * z - 0.5 * self.var * z * z)

    def cf_prime(self, z):
        z = np.asarray(z, dtype=float)
        return (1j * self.mu - self.var * z) * self.cf(z)

    def sample(self, rng, n):
        return rng.normal(self.mu, math.sqrt(self.var), n)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.mu) ** 2) / (2 * self.var)) / math.sqrt(
            2 * math.pi * self.var
        )

    def to_dict(self):
        return {"kind": "gaussian", "mu": self.mu, "var": self.var}


@dataclass(frozen=True)
class Laplace:
    mu: float = 0.0
    b: float = 1.0

    def cf(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(1j * self.mu * z) / (1.0 + self.b**2 * z * z)

    def cf_prime(self, z):
        z = np.asarray(z, dtype=float)
        denom = 1.0 + self.b**2 * z * z
        return np.exp(1j * self.mu * z) * (1j * self.mu / denom - 2 * self.b**2 * z / denom**2)

    def sample(self, rng, n):
        return rng.laplace(self.mu, self.b, n)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.abs(x - self.mu) / self.b) / (2 * self.b)

    def to_dict(self):
        return {"kind": "laplace", "mu": self.mu, "b": self.b}


@dataclass(frozen=True)
class GaussMix:
    """Two-component Gaussian mixture."""

    w1: float = 0.5
    mu1: float = -1.0
    var1: float = 1.0
    mu2: float = 1.0
    var2: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.w1 < 1.0:
            raise ConfigError("mixture weight must be in (0, 1)")

    @property
    def _parts(self):
        return (
            (self.w1, Gaussian(self.mu1, self.var1)),
            (1.0 - self.w1, Gaussian(self.mu2, self.var2)),
        )

    def cf(self, z):
        return sum(w * g.cf(z) for w, g in self._parts)

    def cf_prime(self, z):
        return sum(w * g.cf_prime(z) for w, g in self._parts)

    def sample(self, rng, n):
        pick = rng.random(n) < self.w1
        (_, g1), (_, g2) = self._parts
        return np.where(pick, g1.sample(rng, n), g2.sample(rng, n))

    def pdf(self, x):
        return sum(w * g.pdf(x) for w, g in self._parts)

    def to_dict(self):
        return {
            "kind": "gaussmix",
            "w1": self.w1,
            "mu1": self.mu1,
            "var1": self.var1,
            "mu2": self.mu2,
            "var2": self.var2,
        }


@dataclass(frozen=True)
class Uniform:
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigError("uniform requires a < b")

    def cf(self, z):
        z = np.asarray(z, dtype=float)
        w = self.b - self.a
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)
        exact = (np.exp(1j * self.b * zs) - np.exp(1j * self.a * zs)) / (1j * zs * w)
        m1 = 0.5 * (self.a + self.b)
        m2 = (self.a**2 + self.a * self.b + self.b**2) / 3.0
        taylor = 1.0 + 1j * m1 * z - 0.5 * m2 * z * z
        return np.where(small, taylor, exact)

    def cf_prime(self, z):
        # E[i U e^{izU}] via integration by parts; Taylor switch near 0
        z = np.asarray(z, dtype=float)
        w = self.b - self.a
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)

        def term(u):
            return np.exp(1j * u * zs) * (u / (1j * zs) + 1.0 / zs**2)

        exact = 1j * (term(self.b) - term(self.a)) / w
        m1 = 0.5 * (self.a + self.b)
        m2 = (self.a**2 + self.a * self.b + self.b**2) / 3.0
        m3 = (self.a**3 + self.a**2 * self.b + self.a * self.b**2 + self.b**3) / 4.0
        taylor = 1j * m1 - m2 * z - 0.5j * m3 * z * z
        return np.where(small, taylor, exact)

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, n)

    def pdf(self, x):
        # half-jump values at the exact endpoints: the Fourier-inversion
        # convention, and it keeps trapezoid quadrature second order
        x = np.asarray(x, dtype=float)
        h = 1.0 / (self.b - self.a)
        vals = np.where((x > self.a) & (x < self.b), h, 0.0)
        vals = np.where((x == self.a) | (x == self.b), 0.5 * h, vals)
        return vals

    def to_dict(self):
        return {"kind": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PointMass:
    """Degenerate distribution at x0; cf has unit modulus everywhere."""

    x0: float = 0.0

    def cf(self, z):
        return np.exp(1j * self.x0 * np.asarray(z, dtype=float))

    def cf_prime(self, z):
        return 1j * self.x0 * self.cf(z)

    def sample(self, rng, n):
        return np.full(n, self.x0)

    def pdf(self, x):
        raise ConfigError("point mass has no density")

    def to_dict(self):
        return {"kind": "pointmass", "x0": self.x0}


@dataclass(frozen=True)
class Fejer:
    """Density whose characteristic function is the triangle (1 - |z|/w)_+.

    The density is the Fejer kernel (w/(2 pi)) sinc^2(w x / (2 pi)); its
    spectrum is exactly bandlimited to |z| <= w, which makes it the
    canonical test case for lossless regularized recovery.
    """

    w: float = 1.0

    def cf(self, z):
        z = np.asarray(z, dtype=float)
        return np.maximum(1.0 - np.abs(z) / self.w, 0.0).astype(complex)

    def cf_prime(self, z):
        # kink at 0 and +-w; odd-symmetry convention gives 0 at the origin
        z = np.asarray(z, dtype=float)
        inside = np.abs(z) < self.w
        return np.where(inside, -np.sign(z) / self.w, 0.0).astype(complex)

    def sample(self, rng, n):
        raise ConfigError("fejer family is oracle-only; sampling not supported")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return (self.w / (2 * math.pi)) * np.sinc(self.w * x / (2 * math.pi)) ** 2

    def to_dict(self):
        return {"kind": "fejer", "w": self.w}


_REGISTRY = {
    "gaussian": Gaussian,
    "laplace": Laplace,
    "gaussmix": GaussMix,
    "uniform": Uniform,
    "pointmass": PointMass,
    "fejer": Fejer,
}


def family_from_dict(d: dict):
    kind = d.get("kind")
    if kind not in _REGISTRY:
        raise ConfigError(f"unknown family kind {kind!r}")
    params = {k: v for k, v in d.items() if k != "kind"}
    return _REGISTRY[kind](**params)


def parse_family(text: str):
    """Parse CLI shorthand like 'gaussian:1,0.25' or 'laplace:0,1'.

    Parameter order follows each family's constructor.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _REGISTRY:
        raise ConfigError(f"unknown family {kind!r}; choices: {sorted(_REGISTRY)}")
    args = [float(tok) for tok in rest.split(",") if tok.strip()] if rest else []
    try:
        return _REGISTRY[kind](*args)
    except TypeError as e:
        raise ConfigError(f"bad parameters for family {kind!r}: {e}") from None


# Regression functions for the Berkson model (example 2)


@dataclass(frozen=True)
class RegLinear:
    slope: float = 1.0
    intercept: float = 0.0

    def __call__(self, t):
        return self.slope * np.asarray(t, dtype=float) + self.intercept

    def to_dict(self):
        return {"kind": "linear", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class RegQuadratic:
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t * t

    def to_dict(self):
        return {"kind": "quadratic"}


@dataclass(frozen=True)
class RegStep:
    """Binary threshold regression 1{t > c}."""

    c: float = 0.0

    def __call__(self, t):
        return (np.asarray(t, dtype=float) > self.c).astype(float)

    def to_dict(self):
        return {"kind": "step", "c": self.c}


_REG_REGISTRY = {"linear": RegLinear, "quadratic": RegQuadratic, "step": RegStep}


def regression_from_dict(d: dict):
    kind = d.get("kind")
    if kind not in _REG_REGISTRY:
        raise ConfigError(f"unknown regression kind {kind!r}")
    return _REG_REGISTRY[kind](**{k: v for k, v in d.items() if k != "kind"})


def parse_regression(text: str):
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _REG_REGISTRY:
        raise ConfigError(
            f"unknown regression {kind!r}; choices: {sorted(_REG_REGISTRY)}"
        )
    args = [float(tok) for tok in rest.split(",") if tok.strip()] if rest else []
    return _REG_REGISTRY[kind](*args)
