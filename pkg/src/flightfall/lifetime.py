"""Particle lifetime distributions.

Exponential lifetimes describe heavy particles (most of them land near the
source); gamma lifetimes with shape alpha > 2 describe light particles whose
lifetime density peaks away from zero.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import DomainError


def _open_unit_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # (k + 1/2) / 2**53 lies strictly inside (0, 1), so -log(u) is never 0 or inf.
    return (rng.integers(0, 2**53, size=size, dtype=np.int64) + 0.5) * 2.0**-53


def exponential_variates(rate: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Inverse-CDF exponential variates with the given rate."""
    return -np.log(_open_unit_uniform(rng, size)) / rate


@dataclass(frozen=True)
class Exponential:
    """Exponential lifetime with rate ``mu``."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"exponential rate must be positive, got {self.mu!r}")

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0, self.mu * np.exp(-self.mu * np.maximum(t, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def survival(self, t: float) -> float:
        return math.exp(-self.mu * t) if t > 0 else 1.0

    def survival_inverse(self, p: float) -> float:
        """Smallest t with P(T > t) <= p."""
        return -math.log(p) / self.mu

    def laplace(self, s: float) -> float:
        if s < 0:
            raise DomainError(f"Laplace argument must be >= 0, got {s!r}")
        return self.mu / (self.mu + s)

    def mean(self) -> float:
        return 1.0 / self.mu

    def variance(self) -> float:
        return 1.0 / self.mu**2

    def sample(self, rng: np.random.Generator, size=None):
        return exponential_variates(self.mu, rng, size)

    def describe(self) -> str:
        return f"exp(mu={self.mu:g})"


@dataclass(frozen=True)
class Gamma:
    """Gamma lifetime with rate ``mu`` and shape ``alpha``.

    Shapes alpha <= 2 are rejected unless ``allow_semi_heavy`` is set, which
    opens the range alpha > 1.
    """

    mu: float
    alpha: float
    allow_semi_heavy: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"gamma rate must be positive, got {self.mu!r}")
        floor = 1.0 if self.allow_semi_heavy else 2.0
        if not self.alpha > floor:
            raise DomainError(f"gamma shape must exceed {floor:g}, got {self.alpha!r}")

    def density(self, t):
        return gamma_density(self.mu, self.alpha, t)

    def survival(self, t: float) -> float:
        return float(_sp.gammaincc(self.alpha, self.mu * t)) if t > 0 else 1.0

    def survival_inverse(self, p: float) -> float:
        return float(_sp.gammainccinv(self.alpha, p)) / self.mu

    def laplace(self, s: float) -> float:
        if s < 0:
            raise DomainError(f"Laplace argument must be >= 0, got {s!r}")
        return (self.mu / (self.mu + s)) ** self.alpha

    def mode(self) -> float:
        return (self.alpha - 1.0) / self.mu

    def mean(self) -> float:
        return self.alpha / self.mu

    def variance(self) -> float:
        return self.alpha / self.mu**2

    def sample(self, rng: np.random.Generator, size=None):
        # numpy's standard_gamma is Marsaglia-Tsang for shape >= 1.
        return rng.standard_gamma(self.alpha, size=size) / self.mu

    def describe(self) -> str:
        return f"gamma(mu={self.mu:g}, alpha={self.alpha:g})"


LifetimeSpec = Exponential | Gamma


def gamma_density(mu: float, alpha: float, t):
    """mu^alpha t^(alpha-1) e^(-mu t) / Gamma(alpha) for t > 0, else 0.

    No restriction on ``alpha`` beyond positivity, so alpha = 1 can be checked
    against the exponential density.
    """
    t = np.asarray(t, dtype=float)
    pos = t > 0
    tt = np.where(pos, t, 1.0)
    logq = alpha * math.log(mu) + (alpha - 1.0) * np.log(tt) - mu * tt - math.lgamma(alpha)
    out = np.where(pos, np.exp(logq), 0.0)
    return out if out.ndim else float(out)


_SPEC_RE = re.compile(r"^\s*(exp|exponential|gamma)\s*\((.*)\)\s*$", re.IGNORECASE)


def parse_lifetime(text: str) -> LifetimeSpec:
    """Parse ``exp(mu=2)`` or ``gamma(mu=2, alpha=5)``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse lifetime spec {text!r}")
    kind = m.group(1).lower()
    kwargs = {}
    for item in filter(None, (p.strip() for p in m.group(2).split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in lifetime spec, got {item!r}")
        kwargs[key.strip()] = float(value)
    try:
        if kind.startswith("exp"):
            return Exponential(**kwargs)
        return Gamma(**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind} lifetime: {text!r}") from exc
