"""Special-function kernel.

Gamma, log-gamma and a sign-tracked beta function that accepts negative
non-integer arguments, McDonald functions K_nu for orders with 2*nu integer,
the modified Bessel function I_0, and the generalized hypergeometric
series 1F2.

Integer-order Bessel kernels (K_0, K_1, I_0) are taken from scipy.special;
everything built on top of them (half-integer orders, recurrences, log-space
evaluation, the 1F2 series) lives here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, PoleError, SpecFunOverflowError

__all__ = [
    "SpecFunResult",
    "gamma",
    "log_gamma",
    "beta_signed",
    "log_beta_signed",
    "bessel_k",
    "log_bessel_k",
    "log_bessel_k_orders",
    "bessel_i0",
    "hyp1f2",
    "HYP_MAX_TERMS",
]

HYP_MAX_TERMS = 10_000
_LOG_DBL_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class SpecFunResult:
    """Value of a truncated series together with its convergence status.

    Callers must check ``converged`` before trusting ``value``.
    """

    value: float
    converged: bool
    terms_used: int


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Euler gamma function for real ``x``.

    Raises PoleError at 0, -1, -2, ... and SpecFunOverflowError when the
    result exceeds the double range (x > ~171.6).
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at x={x:g}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise SpecFunOverflowError(f"gamma({x:g}) overflows") from exc


def log_gamma(x: float) -> tuple[float, float]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))``."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at x={x:g}")
    if x > 0:
        return math.lgamma(x), 1.0
    # Gamma alternates sign between consecutive negative integers.
    sign = -1.0 if math.floor(-x) % 2 == 0 else 1.0
    return math.lgamma(x), sign


def log_beta_signed(x: float, y: float) -> tuple[float, float]:
    """Return ``(log|B(x, y)|, sign)`` with B = Gamma(x)Gamma(y)/Gamma(x+y).

    A pole of Gamma(x) or Gamma(y) raises PoleError. A pole of Gamma(x+y)
    alone sits in the denominator, where 1/Gamma is entire and vanishes, so
    the result is B = 0, returned as ``(-inf, 0.0)``.
    """
    for arg, name in ((x, "x"), (y, "y")):
        if _is_nonpositive_integer(arg):
            raise PoleError(f"beta({x:g}, {y:g}): {name}={arg:g} is a gamma pole")
    if _is_nonpositive_integer(x + y):
        return -math.inf, 0.0
    lx, sx = log_gamma(x)
    ly, sy = log_gamma(y)
    lxy, sxy = log_gamma(x + y)
    return lx + ly - lxy, sx * sy * sxy


def beta_signed(x: float, y: float) -> float:
    """Beta function valid for negative non-integer arguments."""
    logb, sign = log_beta_signed(x, y)
    if logb > _LOG_DBL_MAX:
        raise SpecFunOverflowError(f"beta({x:g}, {y:g}) overflows")
    return sign * math.exp(logb)


def _check_order(nu: float) -> int:
    twice = 2.0 * float(nu)
    if nu < 0 or not twice.is_integer():
        raise DomainError(f"bessel_k order must be a non-negative multiple of 1/2, got {nu!r}")
    return int(twice)


def log_bessel_k_orders(nu0: float, count: int, z: float) -> np.ndarray:
    """log K_nu(z) for nu = nu0, nu0 + 1, ..., nu0 + count - 1.

    ``nu0`` must be 0 or 1/2. The upward recurrence
    K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu is run on the ratios
    K_{nu+1}/K_nu, which stay positive and never overflow.
    """
    if z <= 0:
        raise DomainError(f"bessel_k requires z > 0, got {z!r}")
    if nu0 == 0.0:
        lk0 = math.log(_sp.k0e(z)) - z
        lk1 = math.log(_sp.k1e(z)) - z
    elif nu0 == 0.5:
        lk0 = 0.5 * math.log(math.pi / (2.0 * z)) - z
        lk1 = lk0 + math.log1p(1.0 / z)
    else:
        raise DomainError("nu0 must be 0 or 0.5")
    out = np.empty(count)
    out[0] = lk0
    if count == 1:
        return out
    out[1] = lk1
    ratio = math.exp(lk1 - lk0)
    nu = nu0 + 1.0
    for i in range(2, count):
        ratio = 1.0 / ratio + 2.0 * nu / z
        out[i] = out[i - 1] + math.log(ratio)
        nu += 1.0
    return out


def log_bessel_k(nu: float, z: float) -> float:
    """Natural log of K_nu(z) for 2*nu integer, z > 0."""
    twice = _check_order(nu)
    if z <= 0:
        raise DomainError(f"bessel_k requires z > 0, got {z!r}")
    nu0 = 0.5 * (twice % 2)
    steps = twice // 2
    return float(log_bessel_k_orders(nu0, steps + 1, float(z))[steps])


def bessel_k(nu: float, z: float, scaled: bool = False) -> float:
    """McDonald function K_nu(z); with ``scaled`` returns e^z K_nu(z)."""
    lk = log_bessel_k(nu, z)
    if scaled:
        lk += z
    if lk > _LOG_DBL_MAX:
        raise SpecFunOverflowError(f"K_{nu}({z}) overflows")
    return math.exp(lk)


def bessel_i0(z: float, scaled: bool = False) -> float:
    """Modified Bessel function I_0(z); with ``scaled`` returns e^{-|z|} I_0(z)."""
    if z < 0:
        raise DomainError(f"bessel_i0 requires z >= 0, got {z!r}")
    if scaled:
        return float(_sp.i0e(z))
    if z > 713.0:
        raise SpecFunOverflowError(f"I_0({z}) overflows; use scaled=True")
    return float(_sp.i0(z))


def hyp1f2(
    xi: float,
    eta: float,
    zeta: float,
    z: float,
    rel_tol: float = 1e-15,
    max_terms: int = HYP_MAX_TERMS,
    strict: bool = True,
) -> SpecFunResult:
    """Generalized hypergeometric series 1F2(xi; eta, zeta; z).

    Terms follow the recurrence
    t_{k+1} = t_k * (xi + k) / ((eta + k)(zeta + k)) * z / (k + 1).
    Summation stops once three consecutive terms fall below
    ``rel_tol * |partial sum|``, or when the series terminates because
    ``xi`` is a non-positive integer.

    Raises PoleError if a lower parameter hits a non-positive integer before
    the series terminates. Hitting ``max_terms`` raises ConvergenceError,
    or returns an unconverged result when ``strict`` is false.
    """
    if z == 0:
        return SpecFunResult(1.0, True, 1)
    term = 1.0
    parts = [1.0]
    small = 0
    for k in range(max_terms - 1):
        if xi + k == 0:
            return SpecFunResult(math.fsum(parts), True, len(parts))
        if eta + k == 0 or zeta + k == 0:
            raise PoleError(
                f"1F2({xi:g}; {eta:g}, {zeta:g}; z): lower parameter reaches zero at k={k}"
            )
        term *= (xi + k) / ((eta + k) * (zeta + k)) * z / (k + 1)
        if not math.isfinite(term):
            break
        parts.append(term)
        if abs(term) < rel_tol * abs(math.fsum(parts)):
            small += 1
            if small >= 3:
                return SpecFunResult(math.fsum(parts), True, len(parts))
        else:
            small = 0
    partial = math.fsum(parts)
    if strict:
        raise ConvergenceError(
            f"1F2({xi:g}; {eta:g}, {zeta:g}; {z:g}) did not converge in "
            f"{len(parts)} terms (partial sum {partial:g})"
        )
    return SpecFunResult(partial, False, len(parts))
