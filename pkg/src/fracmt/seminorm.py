"""Gagliardo seminorms for s*p = 1 in one dimension.

All routines return the p-th power

    [u]^p = int int |u(x) - u(y)|^p / |x - y|^2 dx dy.

Three independent evaluation paths are provided:

* ``gagliardo_p_pl`` -- exact-in-x evaluation for piecewise-linear functions.
  Writing y = x + r, the seminorm is ``2 int_0^inf F(r) / r^2 dr`` with
  ``F(r) = int |u(x) - u(x + r)|^p dx``.  For a piecewise-linear u the inner
  integrand is itself piecewise linear in x, so F is exact at every lag; lags
  below the smallest cell width and beyond the support diameter are done in
  closed form and the remaining 1D integral adaptively.
* ``gagliardo_p_radial`` -- the even-function quadrant formula with kernel
  4 (x^2 + y^2) / (x^2 - y^2)^2, by 2D adaptive cubature with Duffy-type
  maps that absorb the diagonal singularity.
* ``moser_decomposition`` -- the four-piece split of [u_eps]^p, each piece
  reduced to a 1D integral.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import Params, gamma_s
from .errors import InputError
from .function_models import GridFunction, MoserFunction, lp_norm_p, segment_power_mean
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    integrate,
    integrate_power_endpoint,
    integrate_squares,
)
from .reports import ScanReport

__all__ = [
    "QuadratureSpec",
    "DecompositionReport",
    "same_cell_contribution",
    "gagliardo_p_pl",
    "gagliardo_p_radial",
    "gagliardo_p",
    "moser_decomposition",
    "rate_check",
    "tail_bound_check",
    "embedding_ratio",
]

_MAX_EXACT_BREAKS = 6000


@dataclass(frozen=True)
class DecompositionReport:
    eps: float
    i1: float
    i2: float
    i3: float
    i4: float
    total: float
    gamma_gap: float
    log_rate: float
    error: float = 0.0


@dataclass(frozen=True)
class TailBoundReport:
    passed: bool
    worst_margin: float
    n_probes: int


def same_cell_contribution(slope, width, p):
    """Seminorm contribution of one linear cell against itself,
    2 |m|^p h^p / (p (p - 1))."""
    return 2.0 * abs(slope) ** p * width**p / (p * (p - 1.0))


def lag_profile(u: GridFunction, lags, p):
    """F(r) = int |u(x) - u(x + r)|^p dx for an array of lags, exactly."""
    r = np.atleast_1d(np.asarray(lags, dtype=float))
    x = u.nodes
    pts = np.concatenate([np.broadcast_to(x, (r.size, x.size)), x[None, :] - r[:, None]], axis=1)
    pts.sort(axis=1)
    d = np.interp(pts, x, u.values, left=0.0, right=0.0) - np.interp(
        pts + r[:, None], x, u.values, left=0.0, right=0.0
    )
    widths = np.diff(pts, axis=1)
    seg = widths * segment_power_mean(d[:, :-1], d[:, 1:], p)
    return seg.sum(axis=1)


def _lag_breakpoints(x, r_lo, r_hi):
    if x.size * (x.size - 1) // 2 <= _MAX_EXACT_BREAKS:
        diffs = (x[None, :] - x[:, None])[np.triu_indices(x.size, 1)]
    else:
        # every pairwise difference is a kink of F; keep a representative subset
        idx = np.unique(np.geomspace(1, x.size - 1, 64).astype(int))
        diffs = np.concatenate([x[k:] - x[:-k] for k in idx])
        diffs = np.quantile(diffs, np.linspace(0.0, 1.0, 2000))
    diffs = np.concatenate([diffs, np.geomspace(r_lo, r_hi, 32)])
    return np.unique(np.clip(diffs, r_lo, r_hi))


def gagliardo_p_pl(u: GridFunction, params: Params, spec: QuadratureSpec = DEFAULT_SPEC, return_error=False):
    """[u]^p for a conforming piecewise-linear function.

    Parameters
    ----------
    u : GridFunction
        Must vanish at both end nodes.
    params : Params
    spec : QuadratureSpec
    return_error : bool
        Also return the quadrature error estimate.

    Returns
    -------
    float, or (float, float) when ``return_error`` is set.
    """
    if not isinstance(u, GridFunction):
        raise InputError("gagliardo_p_pl expects a GridFunction")
    if not u.conforming:
        raise InputError("non-conforming grid function: end values must be zero")
    p = params.p
    x, v = u.nodes, u.values
    if not np.any(v):
        return (0.0, 0.0) if return_error else 0.0
    h = np.diff(x)
    m = np.diff(v) / h
    r_star = float(h.min())
    diameter = float(x[-1] - x[0])

    # lags r <= r_star: F(r) = r^p sum |m_i|^p (h_i - r) + r^(p+1) sum_k C_k, where
    # C_k = int_0^1 |m_left t + m_right (1 - t)|^p dt straddles node k
    ext = np.concatenate([[0.0], m, [0.0]])
    straddle = math.fsum(segment_power_mean(ext[:-1], ext[1:], p))
    slopes_p = np.abs(m) ** p
    small = math.fsum(slopes_p * (h * r_star ** (p - 1.0) / (p - 1.0) - r_star**p / p))
    small += straddle * r_star**p / p

    # lags beyond the diameter: supports are disjoint and F = 2 ||u||_p^p
    far = 2.0 * lp_norm_p(u, p) / diameter

    middle, err = 0.0, 0.0
    if diameter > r_star:
        if u.is_uniform:
            breaks = r_star * np.arange(1, int(round(diameter / r_star)) + 1)
            breaks[-1] = diameter
        else:
            breaks = _lag_breakpoints(x, r_star, diameter)
        middle, err = integrate(lambda r: lag_profile(u, r, p) / r**2, breaks, spec)
    value = 2.0 * math.fsum([small, middle, far])
    if return_error:
        return value, 2.0 * err
    return value


def _even_support(u, spec):
    """Positive breakpoints (starting at 0) and support radius for the radial path."""
    if isinstance(u, GridFunction):
        x, v = u.nodes, u.values
        scale = max(float(np.abs(x).max()), 1.0)
        if not (np.allclose(x, -x[::-1], rtol=0, atol=1e-12 * scale) and np.allclose(v, v[::-1], rtol=1e-12, atol=1e-14)):
            raise InputError("the radial formula needs an even grid function with symmetric nodes")
        pos = x[x > 0]
        return np.concatenate([[0.0], pos]), float(x[-1])
    if isinstance(u, MoserFunction):
        return np.concatenate([[0.0], u.breakpoints()]), 1.0
    cut = spec.domain_cut
    return np.linspace(0.0, cut, 65), cut


def _smoothing_power(p):
    """Smallest integer k <= 12 with k*p integral, else the singularity-removing power.

    With t = w^k, t^(p-2) dt and t^(p-1) dt become polynomial in w and a
    function smooth in t stays smooth in w.
    """
    for k in range(1, 13):
        if abs(k * p - round(k * p)) < 1e-9:
            return k
    return max(1.0, 1.0 / (p - 1.0))


def _rect_pieces(u, x0, x1, y0, y1, smooth_power):
    """Split [x0, x1] x [y0, y1] along the zero line of u(x) - u(y).

    With u linear on both sides the difference is affine and its zero set a
    straight line, across which |u(x) - u(y)|^p has a kink.  Each piece is
    returned as (xa, xb, lower(xa), lower(xb), upper(xa), upper(xb)) with
    y-bounds linear in x.
    """
    whole = [(x0, x1, y0, y0, y1, y1)]
    if smooth_power:
        return whole
    ux0, ux1, uy0, uy1 = (float(u(t)) for t in (x0, x1, y0, y1))
    mx = (ux1 - ux0) / (x1 - x0)
    my = (uy1 - uy0) / (y1 - y0)
    corners = [ux0 - uy0, ux1 - uy0, ux0 - uy1, ux1 - uy1]
    if my == 0.0 or min(corners) >= 0.0 or max(corners) <= 0.0:
        return whole

    # zero line: y*(x) = y0 + (ux0 - uy0 + mx (x - x0)) / my
    def ystar(x):
        return y0 + (ux0 - uy0 + mx * (x - x0)) / my

    xs = [x0, x1]
    if mx != 0.0:
        for level in (y0, y1):
            xc = x0 + ((level - y0) * my - (ux0 - uy0)) / mx
            if x0 < xc < x1:
                xs.append(xc)
    xs = sorted(xs)
    pieces = []
    for xa, xb in zip(xs[:-1], xs[1:]):
        ca, cb = (min(max(ystar(t), y0), y1) for t in (xa, xb))
        if max(ca, cb) > y0:
            pieces.append((xa, xb, y0, y0, ca, cb))
        if min(ca, cb) < y1:
            pieces.append((xa, xb, ca, cb, y1, y1))
    return pieces


def _cell_increment(u, lo, hi):
    """Function (y, d) -> u(y + d) - u(y) for y and y + d inside [lo, hi].

    Grid functions are linear on the cell and Moser functions logarithmic,
    so the increment is formed from d directly rather than as a difference
    of two nearly equal values.
    """
    if isinstance(u, GridFunction):
        slope = (u(hi) - u(lo)) / (hi - lo)
        return lambda y, d: slope * d
    if isinstance(u, MoserFunction):
        if hi <= u.eps or lo >= 1.0:
            return lambda y, d: np.zeros_like(d)
        scale = -1.0 / u.log_eps**u.params.s
        return lambda y, d: scale * np.log1p(d / y)
    return lambda y, d: u(y + d) - u(y)


def _radial_regions(u, b, p):
    """Unit-square integrands whose sum is int_{0<y<x<B} |u(x)-u(y)|^p K dx dy,
    K = (x^2 + y^2) / (x^2 - y^2)^2."""

    def kernel_term(x, y, dxy, diff=None):
        if diff is None:
            diff = u(x) - u(y)
        return np.abs(diff) ** p * (x * x + y * y) / (dxy * dxy * (x + y) ** 2)

    k = _smoothing_power(p)
    # |t|^p is smooth at t = 0 only for even integer p
    smooth_power = abs(p / 2.0 - round(p / 2.0)) < 1e-12
    regions = []
    steps = [_cell_increment(u, b[i], b[i + 1]) for i in range(len(b) - 1)]
    for i in range(len(b) - 1):
        lo, hi = b[i], b[i + 1]
        hx = hi - lo

        def diag(w, t, lo=lo, hx=hx, step=steps[i]):
            # distance to the diagonal x - y = h sigma with sigma = w^k; y fills the rest
            sigma = w**k
            dxy = hx * sigma
            y = lo + hx * (1.0 - sigma) * t
            x = y + dxy
            with np.errstate(divide="ignore", invalid="ignore"):
                g = kernel_term(x, y, dxy, step(y, dxy)) * hx * hx * (1.0 - sigma) * k * w ** (k - 1)
            return np.nan_to_num(g, nan=0.0, posinf=0.0)

        def origin(w, z, hx=hx, step=steps[i]):
            # cell touching x = y = 0: polar-type map x = h xi, y = h xi (1 - z^k), under
            # which (x^2 + y^2) / (x + y)^2 is smooth; xi = w^k
            xi = w**k
            gap = z**k
            x = hx * xi
            y = x * (1.0 - gap)
            dxy = x * gap
            with np.errstate(divide="ignore", invalid="ignore"):
                g = kernel_term(x, y, dxy, step(y, dxy)) * hx * hx * xi * k * k * (w * z) ** (k - 1)
            return np.nan_to_num(g, nan=0.0, posinf=0.0)

        regions.append(origin if lo == 0.0 else diag)
        for j in range(i):
            ylo, yhi = b[j], b[j + 1]
            hy = yhi - ylo
            if j == i - 1:
                # rectangle touching the diagonal at (lo, lo): two Duffy triangles.  Along
                # a ray from the corner u(x) - u(y) is proportional to m_x hx + m_y hy e
                # (or its swapped form); a sign change there is a kink, so split at it.
                mx = (u(hi) - u(lo)) / hx
                my = (u(lo) - u(ylo)) / hy
                for swap in (False, True):
                    num, den = (my * hy, mx * hx) if swap else (mx * hx, my * hy)
                    cuts = [0.0, 1.0]
                    if den != 0.0 and 0.0 < -num / den < 1.0:
                        cuts = [0.0, -num / den, 1.0]
                    for e0, e1 in zip(cuts[:-1], cuts[1:]):

                        def corner(
                            w, t, lo=lo, hx=hx, hy=hy, swap=swap, e0=e0, de=e1 - e0, right=steps[i], left=steps[j]
                        ):
                            xi = w**k
                            e = e0 + de * t
                            if swap:
                                a, c = hx * xi * e, hy * xi
                                dxy = xi * (hy + hx * e)
                            else:
                                a, c = hx * xi, hy * xi * e
                                dxy = xi * (hx + hy * e)
                            x, y = lo + a, lo - c
                            # difference through the shared node, free of cancellation
                            diff = right(lo, a) + left(y, c)
                            with np.errstate(divide="ignore", invalid="ignore"):
                                g = kernel_term(x, y, dxy, diff) * hx * hy * xi * k * w ** (k - 1) * de
                            return np.nan_to_num(g, nan=0.0, posinf=0.0)

                        regions.append(corner)
            else:
                for xa, xb, la, lb, ua, ub in _rect_pieces(u, lo, hi, ylo, yhi, smooth_power):

                    def rect(X, Y, xa=xa, dx=xb - xa, la=la, dl=lb - la, ua=ua, du=ub - ua):
                        x = xa + dx * X
                        bottom = la + dl * X
                        height = (ua - la) + (du - dl) * X
                        y = bottom + height * Y
                        return kernel_term(x, y, x - y) * dx * height

                    regions.append(rect)
    return regions


def gagliardo_p_radial(u, params: Params, spec: QuadratureSpec = DEFAULT_SPEC, return_error=False):
    """[u]^p of an even function through the quadrant formula

        [u]^p = 4 int_0^inf int_0^inf |u(x) - u(y)|^p (x^2 + y^2) / (x^2 - y^2)^2 dx dy.

    ``u`` may be an even GridFunction, a MoserFunction, or any vectorized
    even callable; the latter is treated as zero beyond ``spec.domain_cut``.
    """
    p = params.p
    b, B = _even_support(u, spec)
    regions = _radial_regions(u, b, p)
    inner, err2 = integrate_squares(regions, spec)

    # x beyond the support: int_B^inf K dx = B / (B^2 - y^2) in closed form
    def tail(y):
        return np.abs(u(y)) ** p * B / ((B - y) * (B + y))

    outer, err1 = integrate(tail, b, spec)
    value = 8.0 * (inner + outer)
    if return_error:
        return value, 8.0 * (err1 + err2)
    return value


def gagliardo_p(u, params: Params, spec: QuadratureSpec = DEFAULT_SPEC):
    """Dispatch to the most accurate path for the function type."""
    if isinstance(u, GridFunction):
        return gagliardo_p_pl(u, params, spec)
    if isinstance(u, MoserFunction):
        return moser_decomposition(u.eps, u.params, spec).total
    return gagliardo_p_radial(u, params, spec)


def _coth_csch(d):
    """cosh(d) / sinh(d)^2 without overflow."""
    e = np.exp(-2.0 * d)
    return 2.0 * np.exp(-d) * (1.0 + e) / (-np.expm1(-2.0 * d)) ** 2


def moser_decomposition(eps, params: Params, spec: QuadratureSpec = DEFAULT_SPEC):
    """The four contributions to [u_eps]^p.

    * i1: plateau against the logarithmic ring (eps, 1);
    * i2: ring against itself;
    * i3: plateau against the exterior |x| >= 1;
    * i4: ring against the exterior.

    Inner integrals with a closed-form antiderivative (from
    d/dx [x / (y^2 - x^2)] = (x^2 + y^2) / (x^2 - y^2)^2) are done exactly;
    the remaining 1D integrals adaptively.
    """
    eps = float(eps)
    if not 0.0 < eps < 0.5:
        raise InputError(f"eps must lie in (0, 0.5), got {eps!r}")
    p = params.p
    L = -math.log(eps)
    errs = []

    # i1 = (8/L) int_eps^1 log(y/eps)^p eps / (y^2 - eps^2) dy
    def i1_integrand(y):
        return np.log(y / eps) ** p * eps / ((y - eps) * (y + eps))

    ring = np.geomspace(eps, 1.0, max(int(math.ceil(L / math.log(2.0))), 2) + 1)
    v1, e1 = integrate(i1_integrand, ring, spec)
    i1 = 8.0 / L * v1
    errs.append(8.0 / L * e1)

    # i2 = (4/L) int int_{[eps,1]^2} |log x - log y|^p K, with x = e^-a, y = e^-b this
    # depends on d = |a - b| only: (4/L) int_0^L (L - d) d^p cosh d / sinh^2 d dd
    head_len = min(1.0, L)

    def i2_head(d):
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(d > 1e-4, d * d * _coth_csch(d), 1.0 + d * d / 6.0)
        return (L - d) * g

    v2a, e2a = integrate_power_endpoint(i2_head, head_len, p - 2.0, spec)
    v2b, e2b = 0.0, 0.0
    if L > head_len:
        edges = np.concatenate([[head_len], np.linspace(head_len, L, 9)[1:]])
        v2b, e2b = integrate(lambda d: (L - d) * d**p * _coth_csch(d), edges, spec)
    i2 = 4.0 / L * (v2a + v2b)
    errs.append(4.0 / L * (e2a + e2b))

    # i3 = 8 L^(p-1) int_1^inf eps / (y^2 - eps^2) dy; y = 1/t gives a smooth integrand
    v3, e3 = integrate(lambda t: eps / (1.0 - (eps * t) ** 2), [0.0, 1.0], spec)
    i3 = 8.0 * L ** (p - 1.0) * v3
    errs.append(8.0 * L ** (p - 1.0) * e3)

    # i4 = (8/L) int_eps^1 |log x|^p int_1^inf K dy dx, inner integral 1 / (1 - x^2)
    def i4_integrand(x):
        return np.abs(np.log(x)) ** p / ((1.0 - x) * (1.0 + x))

    v4, e4 = integrate(i4_integrand, ring, spec)
    i4 = 8.0 / L * v4
    errs.append(8.0 / L * e4)

    total = math.fsum([i1, i2, i3, i4])
    gap = total - gamma_s(params).gamma_s
    return DecompositionReport(
        eps=eps,
        i1=i1,
        i2=i2,
        i3=i3,
        i4=i4,
        total=total,
        gamma_gap=gap,
        log_rate=L * gap,
        error=math.fsum(errs),
    )


def moser_i3_closed_form(eps, params: Params):
    """4 |log eps|^(p-1) log((1 + eps) / (1 - eps))."""
    L = -math.log(eps)
    return 4.0 * L ** (params.p - 1.0) * (math.log1p(eps) - math.log1p(-eps))


def rate_check(eps_grid, params: Params, mode="seminorm", spec: QuadratureSpec = DEFAULT_SPEC):
    """Convergence table of the Moser family toward gamma_s.

    ``mode="seminorm"`` tabulates [u_eps]^p, ``mode="full_norm"`` (alias
    ``"full"``) tabulates ||u_eps||_p^p + [u_eps]^p.  Columns are
    ``eps, value, gap, log_rate`` with ``log_rate = log(1/eps) * gap``.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(not 0.0 < e < 0.5 for e in eps_grid):
        raise InputError("eps values must lie in (0, 0.5)")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise InputError("eps grid must be strictly decreasing")
    if mode == "full":
        mode = "full_norm"
    if mode not in ("seminorm", "full_norm"):
        raise InputError(f"unknown mode {mode!r}")
    g = gamma_s(params).gamma_s
    report = ScanReport(("eps", "value", "gap", "log_rate"), meta={"s": params.s, "mode": mode, "gamma_s": g})
    for e in eps_grid:
        value = moser_decomposition(e, params, spec).total
        if mode == "full_norm":
            value += lp_norm_p(MoserFunction(e, params), params.p, spec)
        gap = value - g
        report.append(e, value, gap, -math.log(e) * gap)
    return report


def check_even_nonincreasing(u: GridFunction, rtol=1e-12):
    """Raise InputError unless u is even with symmetric nodes and non-increasing on [0, inf)."""
    x, v = u.nodes, u.values
    scale = max(float(np.abs(x).max()), 1.0)
    vscale = max(float(np.abs(v).max()), 1e-300)
    if not np.allclose(x, -x[::-1], rtol=0, atol=rtol * scale):
        raise InputError("nodes must be symmetric about 0")
    if not np.allclose(v, v[::-1], rtol=0, atol=rtol * vscale):
        raise InputError("values must be even")
    right = v[x >= 0]
    if np.any(np.diff(right) > rtol * vscale):
        raise InputError("function must be non-increasing on [0, inf)")


def tail_bound_check(u: GridFunction, params: Params, probes, slack=1e-12):
    """Check |u(x)|^p <= ||u||_p^p / (2 |x|) at every probe point."""
    check_even_nonincreasing(u)
    probes = np.asarray(probes, dtype=float)
    if np.any(probes == 0):
        raise InputError("probe points must be nonzero")
    p = params.p
    bound = lp_norm_p(u, p) / (2.0 * np.abs(probes))
    lhs = np.abs(u(probes)) ** p
    margin = bound - lhs
    worst = float(margin.min()) if margin.size else math.inf
    return TailBoundReport(passed=bool(np.all(lhs <= bound + slack)), worst_margin=worst, n_probes=int(probes.size))


def embedding_ratio(u, q_grid, params: Params, spec: QuadratureSpec = DEFAULT_SPEC):
    """Table of ||u||_q / (q^(1-s) [u]) over ``q_grid``; ``meta["sup"]`` holds the maximum."""
    semi = gagliardo_p(u, params, spec)
    if not semi > 0:
        raise InputError("embedding ratio needs a function with positive seminorm")
    root = semi ** (1.0 / params.p)
    report = ScanReport(("q", "ratio"), meta={"s": params.s})
    for q in q_grid:
        q = float(q)
        if not q > 1:
            raise InputError("q values must exceed 1")
        lq = lp_norm_p(u, q, spec) ** (1.0 / q)
        report.append(q, lq / (q ** (1.0 - params.s) * root))
    report.meta["sup"] = max(report.column("ratio"), default=float("nan"))
    return report
