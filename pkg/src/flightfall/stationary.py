"""Stationary landing densities around a point source.

A particle performs a symmetric planar random flight until its random
lifetime T runs out and lands where it is. Ignoring the zero-switch
(singular) component, the landing density at distance r is

    p(r) = lam/(2 pi c) * int_{r/c}^inf e^{-lam tau}
           exp((lam/c) sqrt(c^2 tau^2 - r^2)) / sqrt(c^2 tau^2 - r^2) q(tau) dtau

where q is the lifetime density. Its total mass is 1 - E[e^{-lam T}].

Quadrature is the reference evaluator for every lifetime law.
:func:`heavy_series_density` is a McDonald-function series for exponential
lifetimes; :func:`light_series_density` evaluates the hypergeometric series
for gamma lifetimes term by term and is diagnostic only.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .flight import FlightParams
from .lifetime import Exponential, Gamma, LifetimeSpec
from .specfun import (
    HYP_MAX_TERMS,
    SpecFunResult,
    hyp1f2,
    log_bessel_k_orders,
    log_beta_signed,
    log_gamma,
)

logger = logging.getLogger(__name__)

Method = Literal["quadrature", "heavy_series", "light_series"]
METHODS = ("quadrature", "heavy_series", "light_series")


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    tail_cutoff_tol: float = 1e-16

    def __post_init__(self):
        if min(self.rel_tol, self.abs_tol, self.tail_cutoff_tol) <= 0:
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be at least 10")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class StationaryModel:
    flight: FlightParams
    lifetime: LifetimeSpec

    def __post_init__(self):
        if not self.flight.is_symmetric:
            raise DomainError("stationary closed forms need the uniform direction law")

    @classmethod
    def heavy(cls, lam: float, mu: float, c: float) -> "StationaryModel":
        return cls(FlightParams(c=c, lam=lam), Exponential(mu))

    @classmethod
    def light(cls, lam: float, mu: float, c: float, alpha: float) -> "StationaryModel":
        return cls(FlightParams(c=c, lam=lam), Gamma(mu, alpha))

    @property
    def is_heavy(self) -> bool:
        return isinstance(self.lifetime, Exponential)

    def expected_mass(self) -> float:
        """1 - L_q(lam), the mass of paths that changed direction at least once."""
        return 1.0 - self.lifetime.laplace(self.flight.lam)

    def describe(self) -> dict:
        out = {"lambda": self.flight.lam, "c": self.flight.c, "mu": self.lifetime.mu}
        if isinstance(self.lifetime, Gamma):
            out["alpha"] = self.lifetime.alpha
        out["lifetime"] = self.lifetime.describe()
        return out


@dataclass(frozen=True)
class RadialDensityTable:
    model: StationaryModel
    rows: list[tuple[float, float]]
    method: str

    def __post_init__(self):
        rs = [r for r, _ in self.rows]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("table radii must be strictly increasing")
        if any(d < 0 for _, d in self.rows):
            raise ValueError(f"{self.method} produced a negative density")

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for r, _ in self.rows])

    @property
    def densities(self) -> np.ndarray:
        return np.array([d for _, d in self.rows])


def _quad(func, a, b, settings: QuadratureSettings, points=None, what="integral"):
    kwargs = dict(
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        full_output=1,
    )
    if points:
        kwargs["points"] = sorted(p for p in points if a < p < b)
    res = integrate.quad(func, a, b, **kwargs)
    value, err, info = res[0], res[1], res[2]
    if len(res) > 3 and res[3]:
        ier = info.get("ier", 1) if isinstance(info, dict) else 1
        # ier == 2 is scipy's roundoff flag: the estimate is already at machine
        # precision, which is accepted when the error bound itself is tiny.
        if not (ier == 2 and err <= max(settings.abs_tol, 1e3 * settings.rel_tol * abs(value))):
            raise ConvergenceError(f"{what}: quadrature failed ({res[3].splitlines()[0]})")
    return value


def _u_cutoff(model: StationaryModel, r: float, settings: QuadratureSettings) -> float:
    c = model.flight.c
    # Survival is non-increasing, so S(r/c + t0) <= S(t0) = tol.
    t0 = model.lifetime.survival_inverse(settings.tail_cutoff_tol)
    tau_max = r / c + t0
    return math.sqrt((c * tau_max - r) * (c * tau_max + r))


def stationary_density(
    model: StationaryModel, r: float, settings: QuadratureSettings = DEFAULT_SETTINGS
) -> float:
    """Landing density at distance ``r`` by adaptive quadrature.

    The substitution u = sqrt(c^2 tau^2 - r^2) removes the inverse square-root
    endpoint singularity and leaves the bounded integrand
    exp(-lam (tau - u/c)) q(tau) / (c sqrt(u^2 + r^2)) on u in (0, inf).
    The tail is cut where the lifetime survival drops below
    ``settings.tail_cutoff_tol``; since exp(-lam (tau - u/c)) <= 1 and u grows
    with tau, the dropped part is at most that survival divided by the cutoff.
    """
    if r < 0:
        raise DomainError(f"distance must be non-negative, got {r!r}")
    if r == 0 and model.is_heavy:
        raise DomainError("heavy-particle density diverges logarithmically at r = 0")
    c, lam = model.flight.c, model.flight.lam
    q = model.lifetime.density
    r2 = r * r

    def integrand(u):
        rho = math.sqrt(u * u + r2)
        if rho == 0.0:
            return 0.0
        tau = rho / c
        # tau - u/c written without cancellation.
        lag = r2 / (c * (rho + u))
        return math.exp(-lam * lag) * q(tau) / (c * rho)

    u_max = _u_cutoff(model, r, settings)
    points = [r]
    lt = model.lifetime
    for tau in (lt.mean(), lt.mode() if isinstance(lt, Gamma) else 1.0 / (lam + lt.mu)):
        if c * tau > r:
            points.append(math.sqrt(c * c * tau * tau - r2))
    val = _quad(integrand, 0.0, u_max, settings, points, what=f"stationary density at r={r:g}")
    return lam / (2.0 * math.pi * c) * val


def heavy_series_density(
    lam: float,
    mu: float,
    c: float,
    r: float,
    rel_tol: float = 1e-16,
    max_terms: int = HYP_MAX_TERMS,
) -> float:
    """Exponential-lifetime density as a series of McDonald functions.

    p(r) = lam mu / (2 pi^{3/2} c^2) * sum_k lam^k/k! Gamma((k+1)/2)
           (2r / (c(lam+mu)))^{k/2} K_{k/2}((lam+mu) r / c)

    Terms are formed in log space and added with compensated summation;
    successive terms shrink roughly like lam/(lam+mu).
    """
    if not r > 0:
        raise DomainError(f"series needs r > 0, got {r!r}")
    s = lam + mu
    z = s * r / c
    log_lam = math.log(lam)
    log_x = 0.5 * math.log(2.0 * r / (c * s))
    terms: list[float] = []
    chunk = 64
    small = 0
    while len(terms) < max_terms:
        n = min(2 * chunk, max_terms)
        # integer orders K_0, K_1, ... and half orders K_{1/2}, K_{3/2}, ...
        lk_int = log_bessel_k_orders(0.0, (n + 1) // 2 + 1, z)
        lk_half = log_bessel_k_orders(0.5, n // 2 + 1, z)
        for k in range(len(terms), n):
            lk = lk_int[k // 2] if k % 2 == 0 else lk_half[k // 2]
            log_t = k * log_lam - math.lgamma(k + 1) + math.lgamma((k + 1) / 2) + k * log_x + lk
            t = math.exp(log_t)
            terms.append(t)
            if t < rel_tol * math.fsum(terms):
                small += 1
                if small >= 3:
                    return lam * mu / (2.0 * math.pi**1.5 * c * c) * math.fsum(terms)
            else:
                small = 0
        chunk *= 2
    raise ConvergenceError(f"heavy series did not converge in {max_terms} terms at r={r:g}")


def _signed_exp(log_mag: float, sign: float) -> float:
    return sign * math.exp(log_mag) if sign else 0.0


def light_series_density(
    lam: float,
    mu: float,
    alpha: float,
    c: float,
    r: float,
    rel_tol: float = 1e-15,
    max_terms: int = 2000,
) -> SpecFunResult:
    """Gamma-lifetime density from the three-term hypergeometric series.

    Evaluated exactly as the closed form is written, including the lower
    parameter -(2 alpha + k + 1)/4 of the third 1F2. Integer ``alpha`` (and
    any alpha that drives a beta or 1F2 lower parameter onto a non-positive
    integer) raises PoleError. The result is for diagnostics: always compare
    it with :func:`stationary_density`.
    """
    if not r > 0:
        raise DomainError(f"series needs r > 0, got {r!r}")
    s = lam + mu
    x = r / c
    z = s * s * r * r / (4.0 * c * c)
    log_x, log_s, log_lam = math.log(x), math.log(s), math.log(lam)
    log_pref = math.log(lam) + alpha * math.log(mu) - math.log(4.0 * math.pi * c * c) - math.lgamma(alpha)

    parts: list[float] = []
    small = 0
    for k in range(max_terms):
        lb1, sb1 = log_beta_signed((k + 1) / 2, -(alpha + k - 1) / 2)
        lb2, sb2 = log_beta_signed((k + 1) / 2, -(alpha + k) / 2)
        lg3, sg3 = log_gamma(alpha + k - 1)
        f1 = hyp1f2(alpha / 2, 0.5, (alpha + k + 1) / 2, z).value
        f2 = hyp1f2((1 + alpha) / 2, 1.5, (alpha + k) / 2 + 1, z).value
        f3 = hyp1f2(-(k - 1) / 2, -(alpha + k - 3) / 2, -(2 * alpha + k + 1) / 4, z).value
        common = log_pref + k * log_lam - math.lgamma(k + 1)
        a = _signed_exp(common + (alpha + k - 1) * log_x + lb1, sb1) * f1
        b = -_signed_exp(common + log_s + (alpha + k) * log_x + lb2, sb2) * f2
        d = (
            _signed_exp(
                common + (2 - alpha - k) * math.log(2.0) + (1 - alpha - k) * log_s + lg3, sg3
            )
            * f3
        )
        term = math.fsum((a, b, d))
        if not math.isfinite(term):
            return SpecFunResult(float("nan"), False, k + 1)
        parts.extend((a, b, d))
        if abs(term) < rel_tol * abs(math.fsum(parts)):
            small += 1
            if small >= 3:
                return SpecFunResult(math.fsum(parts), True, k + 1)
        else:
            small = 0
    return SpecFunResult(math.fsum(parts), False, max_terms)


@dataclass(frozen=True)
class LightSeriesComparison:
    """Series value next to the quadrature reference at one distance."""

    r: float
    series: SpecFunResult | None
    quadrature: float
    error: str | None = None

    @property
    def abs_diff(self) -> float:
        if self.series is None:
            return math.nan
        return abs(self.series.value - self.quadrature)

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / abs(self.quadrature)


def compare_light_series(
    model: StationaryModel, r: float, settings: QuadratureSettings = DEFAULT_SETTINGS
) -> LightSeriesComparison:
    """Evaluate the gamma-lifetime series and the quadrature side by side.

    Pole and convergence failures of the series are captured in ``error``
    instead of being raised, so a report can always be produced.
    """
    lt, fl = model.lifetime, model.flight
    if not isinstance(lt, Gamma):
        raise DomainError("light series comparison requires a gamma lifetime")
    quad = stationary_density(model, r, settings)
    try:
        res = light_series_density(fl.lam, lt.mu, lt.alpha, fl.c, r)
    except (DomainError, ConvergenceError, OverflowError) as exc:
        return LightSeriesComparison(r, None, quad, f"{type(exc).__name__}: {exc}")
    cmp = LightSeriesComparison(r, res, quad)
    logger.info("light series at r=%g: series=%.6g quadrature=%.6g rel_diff=%.3g", r, res.value, quad, cmp.rel_diff)
    return cmp


def radial_mass(
    model: StationaryModel,
    r_lo: float,
    r_hi: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """2 pi * integral of p(r) r dr over [r_lo, r_hi] (``r_hi`` may be inf)."""
    if not 0 <= r_lo <= r_hi:
        raise DomainError(f"need 0 <= r_lo <= r_hi, got {r_lo!r}, {r_hi!r}")
    if r_lo == r_hi:
        return 0.0
    c = model.flight.c
    r_cut = c * model.lifetime.survival_inverse(settings.tail_cutoff_tol)
    hi = min(r_hi, r_cut)
    if hi <= r_lo:
        return 0.0

    def integrand(r):
        return r * stationary_density(model, r, settings) if r > 0 else 0.0

    scale = c * model.lifetime.mean()
    points = [scale * f for f in (0.25, 0.5, 1.0, 2.0, 4.0)]
    outer = QuadratureSettings(
        rel_tol=max(settings.rel_tol, 1e-9),
        abs_tol=max(settings.abs_tol, 1e-13),
        max_subdivisions=settings.max_subdivisions,
        tail_cutoff_tol=settings.tail_cutoff_tol,
    )
    return 2.0 * math.pi * _quad(integrand, r_lo, hi, outer, points, what="radial mass")


def total_mass(model: StationaryModel, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Total mass of the stationary density; equals 1 - L_q(lam)."""
    return radial_mass(model, 0.0, math.inf, settings)


def concentration_in_disk(
    model: StationaryModel,
    radius: float,
    emitted_mass: float = 1.0,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> tuple[float, float]:
    """Return ``(k_r, k_r * emitted_mass)`` for the disk of given radius.

    ``k_r`` is the share of all emitted particles that settle within
    ``radius`` of the source after changing direction at least once.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius!r}")
    if emitted_mass < 0:
        raise DomainError(f"emitted mass must be non-negative, got {emitted_mass!r}")
    k_r = radial_mass(model, 0.0, radius, settings)
    return k_r, k_r * emitted_mass


def evaluate(
    model: StationaryModel,
    r: float,
    method: Method = "quadrature",
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """Density at ``r`` by the named method."""
    lt, fl = model.lifetime, model.flight
    if method == "quadrature":
        return stationary_density(model, r, settings)
    if method == "heavy_series":
        if not isinstance(lt, Exponential):
            raise DomainError("heavy_series requires an exponential lifetime")
        return heavy_series_density(fl.lam, lt.mu, fl.c, r)
    if method == "light_series":
        if not isinstance(lt, Gamma):
            raise DomainError("light_series requires a gamma lifetime")
        res = light_series_density(fl.lam, lt.mu, lt.alpha, fl.c, r)
        if not res.converged:
            raise ConvergenceError(f"light series did not converge at r={r:g}")
        return res.value
    raise DomainError(f"unknown method {method!r}")


def table_radii(r_min: float, r_max: float, r_step: float) -> np.ndarray:
    """Grid r_min, r_min + r_step, ... not exceeding r_max (inclusive)."""
    if not r_step > 0:
        raise DomainError(f"r_step must be positive, got {r_step!r}")
    if not 0 <= r_min < r_max:
        raise DomainError(f"need 0 <= r_min < r_max, got {r_min!r}, {r_max!r}")
    n = int(math.floor((r_max - r_min) / r_step + 1e-9)) + 1
    return np.round(r_min + r_step * np.arange(n), 12)


def density_table(
    model: StationaryModel,
    r_min: float,
    r_max: float,
    r_step: float,
    method: Method = "quadrature",
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> RadialDensityTable:
    rows = [(float(r), evaluate(model, float(r), method, settings)) for r in table_radii(r_min, r_max, r_step)]
    return RadialDensityTable(model=model, rows=rows, method=method)


def light_density_at_origin(lam: float, mu: float, c: float, alpha: float) -> float:
    """Closed form of the gamma-lifetime density at r = 0: lam mu / (2 pi c^2 (alpha - 1))."""
    return lam * mu / (2.0 * math.pi * c * c * (alpha - 1.0))
