"""Gamma function, the odd-denominator series lambda(p), and the constants
gamma_s (limit of the Moser-family seminorms) and alpha* (blow-up exponent).
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InputError
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate, integrate_power_endpoint


@dataclass(frozen=True)
class Params:
    """Critical pair (s, p) with s*p = 1; only s is stored."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not (0.0 < s < 1.0) or not math.isfinite(s):
            raise InputError(f"s must lie strictly inside (0, 1), got {self.s!r}")
        object.__setattr__(self, "s", s)

    @classmethod
    def from_p(cls, p):
        if not p > 1:
            raise InputError(f"p must exceed 1, got {p!r}")
        return cls(1.0 / p)

    @property
    def p(self):
        return 1.0 / self.s

    @property
    def conjugate(self):
        """Exponent 1/(1-s) = p/(p-1) applied to |u| in the exponential."""
        return 1.0 / (1.0 - self.s)


@dataclass(frozen=True)
class ConstantsReport:
    gamma_s: float
    alpha_star: float
    method: str
    est_error: float


def gamma_fn(x):
    """Euler Gamma function for real x > 0."""
    x = float(x)
    if not x > 0:
        raise InputError(f"gamma_fn requires x > 0, got {x!r}")
    return math.gamma(x)


def _em_tail(p, K):
    """Euler-Maclaurin estimate of sum_{k>=K} (1+2k)^-p and a bound on its error."""
    z = 1.0 + 2.0 * K
    integral = z ** (1.0 - p) / (2.0 * (p - 1.0))
    d1 = -2.0 * p * z ** (-p - 1.0)
    d3 = -8.0 * p * (p + 1.0) * (p + 2.0) * z ** (-p - 3.0)
    tail = integral + 0.5 * z**-p - d1 / 12.0 + d3 / 720.0
    # f is completely monotone, so the remainder is bounded by the next term
    d5 = 32.0 * p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * z ** (-p - 5.0)
    return tail, d5 / 30240.0


def dirichlet_lambda(p, tol=1e-12):
    """Sum of (1+2k)^-p over k >= 0.

    Terms are summed directly up to an index K chosen so that the
    Euler-Maclaurin correction of the remaining tail is accurate to
    ``tol``; the tail itself is added in closed form.
    """
    p = float(p)
    if not p > 1:
        raise InputError(f"the series diverges for p <= 1 (p={p!r})")
    if not tol > 0:
        raise InputError("tol must be positive")
    c = 32.0 * p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) / 30240.0
    z = max((c / (0.25 * tol)) ** (1.0 / (p + 5.0)), 3.0)
    K = int(math.ceil((z - 1.0) / 2.0))
    head = math.fsum((1.0 + 2.0 * np.arange(K)) ** -p)
    tail, _ = _em_tail(p, K)
    return head + tail


def dirichlet_lambda_direct(p, tol=1e-12):
    """Plain partial sum with the integral-comparison tail bound.

    Slow for p near 1; kept as the reference the accelerated sum is
    checked against.
    """
    p = float(p)
    if not p > 1:
        raise InputError(f"the series diverges for p <= 1 (p={p!r})")
    # the tail lies between int_K^inf and int_{K-1}^inf of (1+2t)^-p; taking
    # the midpoint, the error is at most (2K-1)^-p / 2
    K = int(math.ceil(((2.0 * tol) ** (-1.0 / p) + 1.0) / 2.0)) + 1
    if K > 50_000_000:
        raise InputError(f"direct summation would need {K} terms")
    lower = (2.0 * K + 1.0) ** (1.0 - p) / (2.0 * (p - 1.0))
    upper = (2.0 * K - 1.0) ** (1.0 - p) / (2.0 * (p - 1.0))
    head = math.fsum((1.0 + 2.0 * np.arange(K)) ** -p)
    return head + 0.5 * (lower + upper)


def _log_integral(p, spec):
    """int_0^1 |log t|^(p-1) / (1 - t^2) dt, written in r = -log t as
    int_0^inf r^(p-1) / (2 sinh r) dr."""

    def smooth_part(r):
        # r / (2 sinh r), with the removable singularity at 0
        out = np.empty_like(r)
        small = r < 1e-4
        out[small] = 0.5 - r[small] ** 2 / 12.0
        rb = r[~small]
        out[~small] = rb / (2.0 * np.sinh(rb))
        return out

    # r^(p-2) * [r / (2 sinh r)] on (0, 1]: algebraic endpoint at 0
    head, e1 = integrate_power_endpoint(smooth_part, 1.0, p - 2.0, spec)
    # exponentially decaying remainder; r^(p-1) e^-r < 1e-18 well before r_max
    r_max = 60.0 + 4.0 * p * math.log(max(p, 2.0))
    edges = np.concatenate([[1.0], np.geomspace(2.0, r_max, 12)])
    tail, e2 = integrate(lambda r: r ** (p - 1.0) / (2.0 * np.sinh(r)), edges, spec)
    return head + tail, e1 + e2


def gamma_s(params: Params, method: Literal["series", "integral"] = "series", spec: QuadratureSpec = DEFAULT_SPEC):
    """Limit of the Moser-family seminorms, 8 Gamma(p+1) lambda(p).

    ``method="integral"`` evaluates the equivalent form
    8 p int_0^1 |log t|^(p-1)/(1-t^2) dt by adaptive quadrature and is
    independent of the series path.
    """
    p = params.p
    if method == "series":
        tol = 1e-15
        lam = dirichlet_lambda(p, tol)
        g = 8.0 * gamma_fn(p + 1.0) * lam
        err = 8.0 * gamma_fn(p + 1.0) * tol + 8 * np.finfo(float).eps * g
    elif method == "integral":
        val, e = _log_integral(p, spec)
        g = 8.0 * p * val
        err = 8.0 * p * e
    else:
        raise InputError(f"unknown method {method!r}")
    a = g ** (params.s / (1.0 - params.s))
    return ConstantsReport(gamma_s=g, alpha_star=a, method=method, est_error=err)


def alpha_star(params: Params, spec: QuadratureSpec = DEFAULT_SPEC):
    """Blow-up exponent gamma_s^(s/(1-s)) from the series value of gamma_s."""
    return gamma_s(params, "series", spec).alpha_star
