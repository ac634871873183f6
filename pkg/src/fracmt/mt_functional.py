"""Exponential (Moser-Trudinger type) functionals of normalized functions.

Two variants are supported:

* ``exp_interval``: int_D exp(alpha |u|^(1/(1-s))) dx over a bounded D;
* ``phi_line``: int_R Phi(alpha |u|^(1/(1-s))) dx, where Phi is the
  exponential with its first Taylor terms removed (``truncated_exp``).

Either can carry a non-negative weight f(|u|) and a normalization of u by
its seminorm or full norm.  The module also provides the sharpness scans
over the concentrating family, the truncation/rescaling split used for
whole-line problems, and a projected gradient ascent over the unit ball.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .constants import Params, alpha_star
from .errors import InputError
from .function_models import GridFunction, MoserFunction, lp_norm_p
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate
from .reports import ScanReport
from .seminorm import check_even_nonincreasing, gagliardo_p, gagliardo_p_pl, moser_decomposition

__all__ = [
    "Weight",
    "WEIGHTS",
    "MTConfig",
    "RufSplit",
    "ConcentrationReport",
    "ExtremalResult",
    "phi_order",
    "truncated_exp",
    "half_exp_threshold",
    "mt_integral",
    "sharpness_scan",
    "classify_growth",
    "ruf_threshold",
    "ruf_split",
    "concentration_fn_check",
    "extremal_search",
]

DIVERGENCE_LEVEL = 1e3
CORE_FLOOR = 0.05


# -- truncated exponential ---------------------------------------------------


def phi_order(p):
    """Index of the last Taylor term removed: the smallest integer >= p - 2."""
    # 1/s can land a hair above an integer; do not let that bump the ceiling
    return max(int(math.ceil(p - 2.0 - 1e-12)), 0)


def _exp_tail(t, j):
    """e^t - sum_{k=0}^{j} t^k / k! for t >= 0; j = -1 gives e^t."""
    t = np.asarray(t, dtype=float)
    if j < 0:
        with np.errstate(over="ignore"):
            return np.exp(t)
    out = np.empty_like(t)
    small = t <= 2.0 * (j + 1)
    ts = t[small]
    # remainder series, free of cancellation where the polynomial dominates
    term = ts ** (j + 1) / math.factorial(j + 1)
    acc = term.copy()
    for m in range(2, 120):
        term = term * ts / (j + m)
        acc += term
    out[small] = acc
    tl = t[~small]
    poly = np.zeros_like(tl)
    for k in range(j, -1, -1):
        poly = poly * tl + 1.0 / math.factorial(k)
    with np.errstate(over="ignore"):
        out[~small] = np.exp(tl) - poly
    return out


def truncated_exp(t, p):
    """Phi(t) = e^t - sum_{k=0}^{ceil(p-2)} t^k / k! for t >= 0."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise InputError("truncated_exp is defined for t >= 0")
    out = _exp_tail(np.atleast_1d(arr), phi_order(p))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def half_exp_threshold(p):
    """Smallest integer M >= 1 whose removed Taylor terms sum to at most e^M / 2,
    so that Phi(t) >= e^t / 2 for t >= M."""
    j = phi_order(p)
    M = 1
    while math.fsum(M**k / math.factorial(k) for k in range(j + 1)) > 0.5 * math.exp(M):
        M += 1
    return M


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    """Non-negative weight f(t) on t >= 0 with its derivative (None if unknown)."""

    name: str
    f: Callable
    df: Optional[Callable] = None

    def __call__(self, t):
        return self.f(t)

    def derivative(self, t):
        if self.df is not None:
            return self.df(t)
        step = 1e-6 * np.maximum(np.abs(t), 1.0)
        lo = np.maximum(t - step, 0.0)
        return (self.f(t + step) - self.f(lo)) / (t + step - lo)


def _pow4_df(t):
    with np.errstate(divide="ignore"):
        return np.where(t > 0, 0.25 * np.abs(t) ** -0.75, 0.0)


WEIGHTS = {
    "log1p": Weight("log1p", np.log1p, lambda t: 1.0 / (1.0 + t)),
    "pow4": Weight("pow4", lambda t: np.abs(t) ** 0.25, _pow4_df),
    "cap": Weight("cap", lambda t: np.minimum(t, 100.0), lambda t: np.where(t < 100.0, 1.0, 0.0)),
}


def _as_weight(w):
    if w is None or isinstance(w, Weight):
        return w
    if isinstance(w, str):
        try:
            return WEIGHTS[w]
        except KeyError:
            raise InputError(f"unknown weight {w!r}; choose from {sorted(WEIGHTS)}") from None
    if callable(w):
        return Weight(getattr(w, "__name__", "custom"), w)
    raise InputError(f"weight must be None, a name, or a callable, got {w!r}")


@dataclass(frozen=True)
class MTConfig:
    """Exponent, normalization, weight and variant of an exponential functional.

    ``weight`` may be None, one of the names in ``WEIGHTS`` or a vectorized
    callable on [0, inf).
    """

    alpha: float
    params: Params
    normalization: str = "seminorm"
    weight: Union[None, str, Callable, Weight] = None
    variant: str = "exp_interval"

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise InputError(f"alpha must be finite and non-negative, got {self.alpha!r}")
        if self.normalization not in ("seminorm", "full_norm", "none"):
            raise InputError(f"unknown normalization {self.normalization!r}")
        if self.variant not in ("exp_interval", "phi_line"):
            raise InputError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "weight", _as_weight(self.weight))

    @property
    def exponent(self):
        return self.params.conjugate

    def outer(self, t):
        """G(t): exp for the interval variant, Phi for the line variant."""
        j = -1 if self.variant == "exp_interval" else phi_order(self.params.p)
        return _exp_tail(t, j)

    def outer_derivative(self, t):
        j = -1 if self.variant == "exp_interval" else phi_order(self.params.p)
        return _exp_tail(t, j - 1)

    def integrand(self, a):
        """weight(|a|) * G(alpha |a|^(1/(1-s))) for an array of (normalized) values."""
        a = np.abs(np.asarray(a, dtype=float))
        val = self.outer(self.alpha * a**self.exponent)
        if self.weight is not None:
            val = self.weight(a) * val
        return val

    def integrand_derivative(self, a):
        """d/da of ``integrand``, odd in a, with subgradient 0 at a = 0."""
        a = np.asarray(a, dtype=float)
        t = np.abs(a)
        c = self.exponent
        inner = self.alpha * t**c
        with np.errstate(divide="ignore", invalid="ignore"):
            dinner = np.where(t > 0, self.alpha * c * t ** (c - 1.0), 0.0)
        d = self.outer_derivative(inner) * dinner
        if self.weight is not None:
            d = self.weight(t) * d + self.weight.derivative(t) * self.outer(inner)
        return np.sign(a) * d


def _norm_root(u, config, spec):
    p = config.params.p
    if config.normalization == "none":
        return 1.0
    if isinstance(u, MoserFunction):
        value = moser_decomposition(u.eps, config.params, spec).total
    else:
        value = gagliardo_p(u, config.params, spec)
    if config.normalization == "full_norm":
        value += lp_norm_p(u, p, spec)
    if not value > 0:
        raise InputError("cannot normalize a function of zero norm")
    return value ** (1.0 / p)


# -- the functional ----------------------------------------------------------


def _check_domain(domain, config):
    if domain is None:
        if config.variant == "exp_interval":
            raise InputError("the exponential variant needs a bounded domain")
        return None
    a, b = (float(d) for d in domain)
    if not a < b:
        raise InputError("domain must be an interval (a, b) with a < b")
    if config.variant == "exp_interval" and not (math.isfinite(a) and math.isfinite(b)):
        raise InputError("the exponential variant needs a bounded domain")
    return a, b


def _moser_half(u: MoserFunction, config, c, R, spec):
    """int_0^R of the integrand for the normalized Moser function."""
    if R <= 0:
        return 0.0
    eps, L, s = u.eps, u.log_eps, config.params.s
    plateau = float(config.integrand(u.peak / c))
    value = min(R, eps) * plateau
    if R > eps:
        scale = 1.0 / (L**s * c)

        def ring(r):
            return config.integrand(r * scale) * np.exp(-r)

        # x = e^-r maps (max(eps, ...), min(R, 1)) onto r in (r_lo, L)
        r_lo = -math.log(min(R, 1.0))
        edges = np.linspace(r_lo, L, max(int(math.ceil(L - r_lo)), 1) + 1)
        ring_val, _ = integrate(ring, edges, spec)
        value += ring_val
    if R > 1.0:
        value += (R - 1.0) * float(config.integrand(0.0))
    return value


def _interval_sum(half, a, b):
    """int_a^b of an even integrand, from its one-sided integral ``half(R)``."""
    if a >= 0:
        return half(b) - half(a)
    if b <= 0:
        return half(-a) - half(-b)
    return half(-a) + half(b)


def mt_integral(u, config: MTConfig, domain=None, spec: QuadratureSpec = DEFAULT_SPEC, model="linear"):
    """int_domain weight(|u|) G(alpha |u/c|^(1/(1-s))) dx with c the configured norm.

    Parameters
    ----------
    u : GridFunction or MoserFunction
    config : MTConfig
    domain : (a, b), optional
        Integration interval.  Required (and bounded) for ``exp_interval``;
        the whole line when omitted for ``phi_line``.
    spec : QuadratureSpec
    model : {"linear", "cell"}
        For grid functions: integrate the piecewise-linear interpolant
        adaptively, or use h * sum over node values (uniform grids only;
        the form under which rearrangement is exactly measure preserving).
    """
    dom = _check_domain(domain, config)
    c = _norm_root(u, config, spec)

    if isinstance(u, MoserFunction):
        if dom is None:
            dom = (-math.inf, math.inf)
        if config.variant == "phi_line":
            # the integrand vanishes outside the support
            dom = (max(dom[0], -1.0), min(dom[1], 1.0))
            if dom[0] >= dom[1]:
                return 0.0
        return _interval_sum(lambda R: _moser_half(u, config, c, R, spec), *dom)

    if not isinstance(u, GridFunction):
        raise InputError(f"unsupported function type {type(u).__name__}")
    lo, hi = u.support
    outside = float(config.integrand(0.0))
    if model == "cell":
        if not u.is_uniform:
            raise InputError("the cell model needs uniformly spaced nodes")
        h = float(u.nodes[1] - u.nodes[0])
        inside = h * math.fsum(config.integrand(u.values / c))
        if dom is None:
            return inside
        extra = max((dom[1] - dom[0]) - h * u.nodes.size, 0.0)
        return inside + extra * outside
    if model != "linear":
        raise InputError(f"unknown model {model!r}")
    a, b = (lo, hi) if dom is None else (max(dom[0], lo), min(dom[1], hi))
    value = 0.0
    if a < b:
        x = u.nodes
        breaks = np.concatenate([[a], x[(x > a) & (x < b)], [b]])
        value, _ = integrate(lambda t: config.integrand(u(t) / c), breaks, spec)
    if dom is not None and outside != 0.0:
        value += outside * (max(min(dom[1], lo) - dom[0], 0.0) + max(dom[1] - max(dom[0], hi), 0.0))
    return value


# -- sharpness scans ---------------------------------------------------------


def classify_growth(values, level=DIVERGENCE_LEVEL):
    """'divergent' if strictly increasing and the last value reaches ``level``,
    'growing' if strictly increasing below it, 'bounded' otherwise."""
    values = list(values)
    increasing = len(values) >= 2 and all(b > a for a, b in zip(values, values[1:]))
    if not increasing:
        return "bounded"
    return "divergent" if values[-1] >= level else "growing"


def sharpness_scan(config: MTConfig, eps_grid, spec: QuadratureSpec = DEFAULT_SPEC):
    """Evaluate the functional along the concentrating family u_eps.

    ``value_full`` integrates over (-1, 1) for the interval variant and over
    the line for the Phi variant; ``value_core`` over the plateau (-eps, eps).
    Every row carries the growth classification of the whole ``value_full``
    column; ``meta`` also records the smallest core value against the floor.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(not 0.0 < e < 0.5 for e in eps_grid):
        raise InputError("eps values must lie in (0, 0.5)")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise InputError("eps grid must be strictly decreasing")
    full_domain = (-1.0, 1.0) if config.variant == "exp_interval" else None
    full, core = [], []
    for e in eps_grid:
        u = MoserFunction(e, config.params)
        full.append(mt_integral(u, config, full_domain, spec))
        core.append(mt_integral(u, config, (-e, e), spec))
    label = classify_growth(full)
    report = ScanReport(
        ("eps", "alpha", "value_full", "value_core", "classification"),
        meta={
            "s": config.params.s,
            "alpha": config.alpha,
            "alpha_star": alpha_star(config.params),
            "normalization": config.normalization,
            "variant": config.variant,
            "weight": None if config.weight is None else config.weight.name,
            "core_min": min(core, default=math.nan),
            "core_floor": CORE_FLOOR,
        },
    )
    for e, vf, vc in zip(eps_grid, full, core):
        report.append(e, config.alpha, vf, vc, label)
    return report


# -- truncation and rescaling ------------------------------------------------


def ruf_threshold(s):
    """Lower bound 2^((2s-1)/(1-s)) on admissible truncation radii."""
    return 2.0 ** ((2.0 * s - 1.0) / (1.0 - s))


@dataclass(frozen=True)
class RufSplit:
    r0: float
    v: GridFunction
    w: GridFunction
    tau: float
    sigma: float
    scale_factor: float


def _tau_sigma(s, r0):
    if not r0 > ruf_threshold(s):
        raise InputError(f"r0 must exceed {ruf_threshold(s):.17g} for s = {s!r}")
    p = 1.0 / s
    tau = ruf_threshold(s) / (p * r0 * (1.0 - s))
    return tau, (1.0 - s) / s


def ruf_split(u: GridFunction, r0, params: Params):
    """Truncate an even non-increasing u at radius r0 and rescale.

    v = u - u(r0) on (-r0, r0) and 0 outside; w = v (1 + tau ||u||_p^p)^(1-s).
    """
    r0 = float(r0)
    tau, sigma = _tau_sigma(params.s, r0)
    check_even_nonincreasing(u)
    x = u.nodes
    if r0 >= x[-1]:
        v = u
    else:
        inner = x[(x > -r0) & (x < r0)]
        nodes = np.concatenate([[-r0], inner, [r0]])
        level = float(u(r0))
        vals = np.maximum(np.asarray(u(nodes)) - level, 0.0)
        vals[0] = vals[-1] = 0.0
        v = GridFunction(nodes, vals)
    factor = (1.0 + tau * lp_norm_p(u, params.p)) ** (1.0 - params.s)
    return RufSplit(r0=r0, v=v, w=v.scaled(factor), tau=tau, sigma=sigma, scale_factor=factor)


@dataclass(frozen=True)
class ConcentrationReport:
    passed: bool
    tau: float
    sigma: float
    t2: float
    max_f: float


def concentration_fn_check(s, r0, t_samples):
    """Check t2 < 0 and f(t) = (1 - t)(1 + tau t)^sigma < 1 on samples in (0, 1)."""
    tau, sigma = _tau_sigma(float(s), float(r0))
    t = np.asarray(t_samples, dtype=float)
    if np.any((t <= 0) | (t >= 1)):
        raise InputError("samples must lie in (0, 1)")
    t2 = (tau * sigma - 1.0) / (tau * (sigma + 1.0))
    f = (1.0 - t) * (1.0 + tau * t) ** sigma
    max_f = float(f.max()) if f.size else -math.inf
    return ConcentrationReport(passed=bool(t2 < 0 and np.all(f < 1.0)), tau=tau, sigma=sigma, t2=t2, max_f=max_f)


# -- extremal search ---------------------------------------------------------


class ExtremalResult(NamedTuple):
    best: GridFunction
    trace: ScanReport
    converged: bool


def _hat_autocorrelation(t):
    """int phi(x) phi(x + t) dx for the unit hat: the centred cubic B-spline."""
    t = np.abs(t)
    return np.where(t <= 1.0, 2.0 / 3.0 - t * t + 0.5 * t**3, np.where(t < 2.0, (2.0 - t) ** 3 / 6.0, 0.0))


@lru_cache(maxsize=32)
def _hat_coefficients(n, params, spec):
    """Gram entries a_k = B(phi_0, phi_k), k < n, of unit hats for p = 2.

    On a uniform grid the seminorm bilinear form only depends on |i - j|,
    and for s p = 1 it does not depend on the spacing either.  Overlapping
    pairs are evaluated by polarization; for k >= 2 the supports are
    disjoint and a_k = -2 int c(t) / (k - t)^2 dt with c the hat
    autocorrelation, a piecewise cubic integrated exactly enough by Gauss.
    """
    a = np.empty(n)
    nodes = np.arange(-1.0, 3.0)
    e0 = (nodes == 0).astype(float)
    e1 = (nodes == 1).astype(float)
    a[0] = gagliardo_p_pl(GridFunction(nodes, e0), params, spec)
    if n > 1:
        plus = gagliardo_p_pl(GridFunction(nodes, e0 + e1), params, spec)
        minus = gagliardo_p_pl(GridFunction(nodes, e0 - e1), params, spec)
        a[1] = 0.25 * (plus - minus)
    if n > 2:
        g, w = np.polynomial.legendre.leggauss(30)
        pieces = np.arange(-2.0, 2.0)
        t = (pieces[:, None] + 0.5 * (g[None, :] + 1.0)).ravel()
        wt = np.tile(0.5 * w, pieces.size) * _hat_autocorrelation(t)
        k = np.arange(2, n, dtype=float)
        a[2:] = -2.0 * ((k[:, None] - t[None, :]) ** -2.0 @ wt)
    a.setflags(write=False)
    return a


class _Constraint:
    """Constraint norm (p-th root of [u]^p or ||u||^p) for interior node values."""

    def __init__(self, nodes, config, spec):
        self.nodes = nodes
        self.config = config
        self.spec = spec
        self.gram = None
        if abs(config.params.p - 2.0) < 1e-12:
            n = nodes.size - 2
            a = _hat_coefficients(n, config.params, spec)
            self.gram = a[np.abs(np.subtract.outer(np.arange(n), np.arange(n)))]
            if config.normalization == "full_norm":
                # exact L^2 mass matrix of the hats
                h = nodes[1] - nodes[0]
                self.gram = self.gram + h / 6.0 * (
                    4.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
                )

    def grid(self, interior):
        return GridFunction(self.nodes, np.concatenate([[0.0], interior, [0.0]]))

    def power(self, interior):
        p = self.config.params.p
        if self.gram is not None:
            return max(float(interior @ self.gram @ interior), 0.0)
        value = gagliardo_p_pl(self.grid(interior), self.config.params, self.spec)
        if self.config.normalization == "full_norm":
            value += lp_norm_p(self.grid(interior), p)
        return value

    def __call__(self, interior):
        return self.power(interior) ** (1.0 / self.config.params.p)

    def gradient(self, interior):
        """Gradient of the constraint norm; forward differences when no Gram matrix exists."""
        norm = self(interior)
        if self.gram is not None:
            return self.gram @ interior / norm
        step = 1e-6 * max(float(np.abs(interior).max()), 1e-300)
        out = np.empty_like(interior)
        for i in range(interior.size):
            bumped = interior.copy()
            bumped[i] += step
            out[i] = (self(bumped) - norm) / step
        return out


class _Objective:
    """Gauss-rule discretization of the functional on a fixed uniform grid."""

    def __init__(self, nodes, config, order=4):
        self.config = config
        g, w = np.polynomial.legendre.leggauss(order)
        g, w = (g + 1.0) / 2.0, w / 2.0
        h = nodes[1] - nodes[0]
        self.left = 1.0 - g  # weight of the left node at each Gauss point
        self.wts = w * h

    def values(self, interior):
        full = np.concatenate([[0.0], interior, [0.0]])
        a, b = full[:-1, None], full[1:, None]
        return a * self.left + b * (1.0 - self.left)

    def __call__(self, interior):
        vals = self.values(interior)
        return math.fsum((self.config.integrand(vals) @ self.wts).tolist())

    def gradient(self, interior):
        vals = self.values(interior)
        d = self.config.integrand_derivative(vals) * self.wts
        # node i receives (1 - g) from the cell on its right and g from the cell on its left
        from_right = d @ self.left
        from_left = d @ (1.0 - self.left)
        grad = from_right[1:] + from_left[:-1]
        return grad


def extremal_search(
    config: MTConfig,
    n_cells,
    max_iters,
    seed,
    domain=(-1.0, 1.0),
    spec: QuadratureSpec = DEFAULT_SPEC,
    init=None,
    tol=1e-10,
):
    """Projected gradient ascent of the functional over the constraint ball.

    The unknowns are the interior node values of a uniform grid on
    ``domain`` with zero end values.  Each step moves along the exact
    gradient of the discretized objective, then rescales by
    max(1, constraint norm); the step is halved until the objective does
    not decrease, so the recorded trace is non-decreasing.

    Returns
    -------
    ExtremalResult
        ``best`` grid function, ``trace`` with columns
        ``iter, objective, constraint_norm, step``, and ``converged``.
    """
    if config.normalization == "none":
        raise InputError("extremal search needs a seminorm or full-norm constraint")
    n_cells = int(n_cells)
    if n_cells < 2:
        raise InputError("n_cells must be at least 2")
    if int(max_iters) < 0:
        raise InputError("max_iters must be non-negative")
    a, b = (float(d) for d in domain)
    if not (a < b and math.isfinite(a) and math.isfinite(b)):
        raise InputError("the search domain must be a bounded interval")
    nodes = np.linspace(a, b, n_cells + 1)
    constraint = _Constraint(nodes, config, spec)
    objective = _Objective(nodes, config)

    def project(x):
        norm = constraint(x)
        return x / norm if norm > 1.0 else x

    rng = np.random.default_rng(seed)
    if init is None:
        x = rng.random(n_cells - 1)
    else:
        x = np.asarray(init, dtype=float)
        if x.shape != (n_cells - 1,):
            raise InputError(f"init must hold {n_cells - 1} interior values")
        if not np.any(x):
            # a random nudge lets the search leave a stationary zero start
            x = 1e-3 * rng.standard_normal(n_cells - 1)
    x = project(x)
    norm = constraint(x)
    val = objective(x)
    step = 1.0
    trace = ScanReport(("iter", "objective", "constraint_norm", "step"), meta={"seed": int(seed), "n_cells": n_cells})
    trace.append(0, val, norm, 0.0)
    converged = False
    for it in range(1, int(max_iters) + 1):
        grad = objective.gradient(x)
        if norm >= 1.0 - 1e-12:
            # on the sphere: drop the part of the gradient that the rescaling undoes
            normal = constraint.gradient(x)
            grad = grad - (grad @ x) / (normal @ x) * normal
        gnorm = float(np.linalg.norm(grad))
        if not gnorm > 0:
            converged = True
            break
        direction = grad / gnorm
        accepted = False
        while step > 1e-12:
            trial = project(x + step * direction)
            tval = objective(trial)
            if tval >= val:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        gain = tval - val
        x, val = trial, tval
        norm = constraint(x)
        trace.append(it, val, norm, step)
        if gain <= tol * max(abs(val), 1.0):
            converged = True
            break
        step = min(2.0 * step, 1.0)
    best = constraint.grid(x)
    trace.meta["converged"] = converged
    return ExtremalResult(best=best, trace=trace, converged=converged)
