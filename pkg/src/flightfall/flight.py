"""Planar Markov random flight.

A particle leaves the origin at speed ``c`` in a random direction and picks
a fresh, independent direction at the epochs of a Poisson process with rate
``lam``. Paths are simulated exactly: switch epochs come from accumulated
exponential inter-arrival times and positions are integrated segment by
segment, with no time discretisation.

Angles are radians in [-pi, pi). A von Mises direction law with
concentration ``k`` has density exp(k cos(theta)) / (2 pi I_0(k)), so k > 0
favours the +x1 direction and k < 0 the -x1 direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .lifetime import exponential_variates

__all__ = [
    "Uniform",
    "VonMises",
    "FlightParams",
    "FlightPath",
    "transition_density_ac",
    "singular_weight",
    "ac_radial_cdf",
    "sample_direction",
    "simulate_path",
    "simulate_endpoints",
]


@dataclass(frozen=True)
class Uniform:
    """Isotropic direction law."""

    def describe(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class VonMises:
    """Von Mises direction law centred on the +x1 axis."""

    k: float

    def describe(self) -> str:
        return f"vonmises(k={self.k:g})"


DirectionLaw = Uniform | VonMises


@dataclass(frozen=True)
class FlightParams:
    c: float
    lam: float
    direction_law: DirectionLaw = field(default_factory=Uniform)

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"speed c must be positive, got {self.c!r}")
        if not self.lam > 0:
            raise DomainError(f"switching rate must be positive, got {self.lam!r}")

    @property
    def is_symmetric(self) -> bool:
        law = self.direction_law
        return isinstance(law, Uniform) or law.k == 0


@dataclass(frozen=True)
class FlightPath:
    switch_times: np.ndarray
    directions: np.ndarray
    end_time: float
    landing: tuple[float, float]
    speed: float

    @property
    def switches(self) -> int:
        return len(self.switch_times)

    def reconstruct(self) -> tuple[float, float]:
        """Landing point recomputed from the switch times and headings."""
        epochs = np.concatenate(([0.0], self.switch_times, [self.end_time]))
        dt = np.diff(epochs)
        return (
            math.fsum(self.speed * dt * np.cos(self.directions)),
            math.fsum(self.speed * dt * np.sin(self.directions)),
        )


def singular_weight(params: FlightParams, t: float) -> float:
    """Probability of no direction change before ``t``; it sits on the circle |x| = ct."""
    if not t > 0:
        raise DomainError(f"time must be positive, got {t!r}")
    return math.exp(-params.lam * t)


def transition_density_ac(params: FlightParams, x, t: float) -> float:
    """Absolutely continuous part of the transition density at point ``x``.

    ``x`` may be a planar point or a distance. The density is zero outside
    the disk of radius ct; the circle itself carries the singular mass and
    raises DomainError.
    """
    if not params.is_symmetric:
        raise DomainError("closed-form transition density needs the uniform direction law")
    if not t > 0:
        raise DomainError(f"time must be positive, got {t!r}")
    r = math.hypot(*x) if np.ndim(x) else abs(float(x))
    c, lam = params.c, params.lam
    ct = c * t
    if r > ct:
        return 0.0
    if r == ct:
        raise DomainError("density is singular on the boundary |x| = ct; use singular_weight")
    s = math.sqrt((ct - r) * (ct + r))
    return lam / (2.0 * math.pi * c) * math.exp(-lam * t + lam * s / c) / s


def ac_radial_cdf(params: FlightParams, radius, t):
    """Mass of the absolutely continuous part inside the disk of given radius.

    Integrating 2 pi r p_ac(r, t) from 0 to R gives
    1 - exp(-lam (t - sqrt(t^2 - R^2/c^2))) for R < ct and 1 - e^{-lam t} beyond.
    Vectorised over ``radius`` and ``t``.
    """
    radius = np.asarray(radius, dtype=float)
    t = np.asarray(t, dtype=float)
    ct = params.c * t
    rr = np.minimum(radius, ct)
    s = np.sqrt(np.maximum((ct - rr) * (ct + rr), 0.0)) / params.c
    out = -np.expm1(-params.lam * (t - s))
    return out if out.ndim else float(out)


def _best_fisher(k: float, rng: np.random.Generator, size: int) -> np.ndarray:
    # Best & Fisher (1979) rejection sampler for k > 0, vectorised over a batch.
    tau = 1.0 + math.sqrt(1.0 + 4.0 * k * k)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * k)
    rr = (1.0 + rho * rho) / (2.0 * rho) if k > 1e-5 else 1.0 / k + k
    out = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        m = todo.size
        u1, u2, u3 = rng.random(m), rng.random(m), rng.random(m)
        z = np.cos(math.pi * u1)
        f = (1.0 + rr * z) / (rr + z)
        cc = k * (rr - f)
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = (cc * (2.0 - cc) - u2 > 0) | (np.log(cc / u2) + 1.0 - cc >= 0)
        theta = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
        out[todo[accept]] = theta[accept]
        todo = todo[~accept]
    return out


def _wrap(theta: np.ndarray) -> np.ndarray:
    return np.where(theta >= math.pi, theta - 2.0 * math.pi, theta)


def sample_direction(law: DirectionLaw, rng: np.random.Generator, size=None):
    """Draw headings from ``law``; returns a float when ``size`` is None."""
    n = 1 if size is None else int(size)
    if isinstance(law, Uniform) or law.k == 0:
        theta = rng.uniform(-math.pi, math.pi, n)
    else:
        theta = _best_fisher(abs(law.k), rng, n)
        if law.k < 0:
            theta = theta + math.pi
        theta = _wrap(theta)
    return float(theta[0]) if size is None else theta


def simulate_path(params: FlightParams, end_time: float, rng: np.random.Generator) -> FlightPath:
    """Simulate one path on [0, end_time] and record its full history."""
    if not end_time > 0:
        raise DomainError(f"end_time must be positive, got {end_time!r}")
    c = params.c
    times = []
    headings = [sample_direction(params.direction_law, rng)]
    x = y = 0.0
    now = 0.0
    while True:
        gap = float(exponential_variates(params.lam, rng))
        if now + gap >= end_time:
            dt = end_time - now
            x += c * dt * math.cos(headings[-1])
            y += c * dt * math.sin(headings[-1])
            break
        x += c * gap * math.cos(headings[-1])
        y += c * gap * math.sin(headings[-1])
        now += gap
        times.append(now)
        headings.append(sample_direction(params.direction_law, rng))
    return FlightPath(
        switch_times=np.array(times),
        directions=np.array(headings),
        end_time=float(end_time),
        landing=(x, y),
        speed=c,
    )


def simulate_endpoints(params: FlightParams, end_times, rng: np.random.Generator):
    """Vectorised flight simulation for many independent paths.

    ``end_times`` holds one horizon per path. Returns ``(x1, x2, switches)``.
    The draw order is fixed (all initial headings, then one round of
    inter-arrival times and headings per switch level), so a given generator
    state always yields the same result.
    """
    end_times = np.asarray(end_times, dtype=float)
    n = end_times.size
    c, lam, law = params.c, params.lam, params.direction_law
    x1 = np.zeros(n)
    x2 = np.zeros(n)
    switches = np.zeros(n, dtype=np.int64)
    remaining = end_times.copy()
    heading = sample_direction(law, rng, n)
    active = np.arange(n)
    while active.size:
        gap = exponential_variates(lam, rng, active.size)
        left = remaining[active]
        seg = np.minimum(gap, left)
        h = heading[active]
        x1[active] += c * seg * np.cos(h)
        x2[active] += c * seg * np.sin(h)
        keep = gap < left
        active = active[keep]
        remaining[active] = left[keep] - gap[keep]
        switches[active] += 1
        heading[active] = sample_direction(law, rng, active.size)
    return x1, x2, switches
