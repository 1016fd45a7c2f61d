"""Scalar distribution helpers: normal quantile, chi-square quantile, golden-section search."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from qkbench.errors import DomainError

# Acklam's rational approximation coefficients.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _poly(coeffs, t):
    out = np.zeros_like(t)
    for c in coeffs:
        out = out * t + c
    return out


def normal_quantile(p):
    """Standard-normal quantile ``sqrt(2) * erfinv(2p - 1)``.

    Acklam's rational approximation followed by one Halley step against
    ``erfc``; accepts scalars or arrays.
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("normal_quantile requires 0 < p < 1")
    # Evaluate on the lower half and reflect, so that Q(p) == -Q(1 - p) exactly.
    upper = arr > 0.5
    q = np.where(upper, 1.0 - arr, arr)
    x = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        t = np.sqrt(-2 * np.log(q[tail]))
        x[tail] = _poly(_C, t) / (_poly(_D, t) * t + 1)
    mid = ~tail
    if np.any(mid):
        t = q[mid] - 0.5
        r = t * t
        x[mid] = _poly(_A, r) * t / (_poly(_B, r) * r + 1)
    e = 0.5 * special.erfc(-x / math.sqrt(2)) - q
    u = e * math.sqrt(2 * math.pi) * np.exp(x * x / 2)
    x = x - u / (1 + x * u / 2)
    x = np.where(q == 0.5, 0.0, x)
    x = np.where(upper, -x, x)
    return float(x) if np.ndim(p) == 0 else x


def normal_cdf(x):
    return special.ndtr(x)


def chi2_quantile(prob: float, dof: int, tol: float = 1e-12) -> float:
    """Chi-square quantile by bisection on the regularized lower incomplete gamma."""
    if not 0 < prob < 1:
        raise DomainError("chi2_quantile requires 0 < prob < 1")
    cdf = lambda v: special.gammainc(dof / 2, v / 2)  # noqa: E731
    lo, hi = 0.0, max(1.0, float(dof))
    while cdf(hi) < prob:
        lo, hi = hi, hi * 2
        if hi > 1e300:
            return math.inf
    while hi - lo > tol * max(1.0, hi):
        mid = (lo + hi) / 2
        if cdf(mid) < prob:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


_INVPHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-6) -> float:
    """Maximizer of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2
