"""Adaptive Gauss-Legendre quadrature in one and two dimensions.

Both integrators bisect panels and estimate the error of each panel as
the difference between the rule applied to the whole panel and the sum
over its halves (quarters in 2D).  Panels are kept in positional order
and reduced with ``math.fsum`` so results do not depend on refinement
history or thread count.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, InputError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for the singular integrals in this package.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Requested relative and absolute accuracy.
    max_panels : int
        Budget on the number of panels of a single adaptive integration.
    domain_cut : float
        Truncation radius used when a function has unbounded support.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_panels: int = 20000
    domain_cut: float = 1e3

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InputError("tolerances must be positive")
        if int(self.max_panels) < 16:
            raise InputError("max_panels must be at least 16")
        if not self.domain_cut > 0:
            raise InputError("domain_cut must be positive")


DEFAULT_SPEC = QuadratureSpec()


def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _select(err, errsum, target):
    """Mask of the largest-error panels whose removal brings the sum under target/2."""
    idx = np.argsort(-err, kind="stable")
    remaining = errsum - np.cumsum(err[idx])
    n = min(int(np.searchsorted(-remaining, -0.5 * target)) + 1, len(err))
    mask = np.zeros(len(err), dtype=bool)
    mask[idx[:n]] = True
    return mask


class _Panels1D:
    def __init__(self, f, order):
        self.f = f
        self.nodes, self.weights = _leggauss(order)

    def rule(self, a, b):
        h = b - a
        x = a[:, None] + h[:, None] * self.nodes[None, :]
        fx = np.asarray(self.f(x.ravel()), dtype=float).reshape(x.shape)
        q = fx @ self.weights * h
        qa = np.abs(fx) @ self.weights * np.abs(h)
        return q, qa

    def refine(self, a, b, whole):
        m = 0.5 * (a + b)
        ql, al = self.rule(a, m)
        qr, ar = self.rule(m, b)
        return ql, qr, al + ar, np.abs(ql + qr - whole)


def integrate(f, breakpoints, spec=DEFAULT_SPEC, order=10):
    """Integrate a vectorized function over consecutive breakpoint intervals.

    Parameters
    ----------
    f : callable
        Maps a 1D float array of abscissae to an array of the same shape.
    breakpoints : sequence of float
        Increasing points; the integral runs from the first to the last and
        each interval starts as its own panel.
    spec : QuadratureSpec
    order : int
        Number of Gauss-Legendre nodes per panel.

    Returns
    -------
    value, error : float
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if pts.size < 2:
        return 0.0, 0.0
    eng = _Panels1D(f, order)
    a, b = pts[:-1], pts[1:]
    whole, _ = eng.rule(a, b)
    ql, qr, absval, err = eng.refine(a, b, whole)
    while True:
        value = ql + qr
        total = math.fsum(value)
        target = max(spec.abs_tol, spec.rel_tol * abs(total), 64 * _EPS * math.fsum(absval))
        errsum = math.fsum(err)
        if errsum <= target:
            return total, errsum
        split = _select(err, errsum, target)
        n_new = len(a) + int(split.sum())
        if n_new > spec.max_panels:
            raise AccuracyError(
                f"1D quadrature exhausted its budget of {spec.max_panels} panels",
                estimate=total,
                error=errsum,
            )
        sa, sb = a[split], b[split]
        sm = 0.5 * (sa + sb)
        ca = np.concatenate([sa, sm])
        cb = np.concatenate([sm, sb])
        cwhole = np.concatenate([ql[split], qr[split]])
        cl, cr, cabs, cerr = eng.refine(ca, cb, cwhole)
        keep = ~split
        a = np.concatenate([a[keep], ca])
        b = np.concatenate([b[keep], cb])
        ql = np.concatenate([ql[keep], cl])
        qr = np.concatenate([qr[keep], cr])
        absval = np.concatenate([absval[keep], cabs])
        err = np.concatenate([err[keep], cerr])
        order_idx = np.argsort(a, kind="stable")
        a, b, ql, qr, absval, err = (arr[order_idx] for arr in (a, b, ql, qr, absval, err))


def integrate_power_endpoint(g, length, exponent, spec=DEFAULT_SPEC, order=10):
    """Integrate ``d**exponent * g(d)`` over ``(0, length)`` for exponent > -1.

    The substitution ``d = length * w**(1/(exponent+1))`` absorbs the
    algebraic endpoint behaviour, leaving ``g`` to the adaptive rule.
    """
    if exponent <= -1:
        raise InputError("endpoint exponent must exceed -1")
    k = 1.0 / (exponent + 1.0)
    scale = length ** (exponent + 1.0) / (exponent + 1.0)

    def h(w):
        return g(length * w**k)

    val, err = integrate(h, [0.0, 1.0], spec, order)
    return scale * val, scale * err


class _Panels2D:
    def __init__(self, funcs, order):
        self.funcs = funcs
        self.nodes, self.weights = _leggauss(order)
        self.w2 = np.outer(self.weights, self.weights).ravel()
        gx, gy = np.meshgrid(self.nodes, self.nodes, indexing="ij")
        self.gx, self.gy = gx.ravel(), gy.ravel()

    def rule(self, rid, x0, x1, y0, y1):
        q = np.empty(len(rid))
        qa = np.empty(len(rid))
        for r in np.unique(rid):
            sel = rid == r
            hx = (x1[sel] - x0[sel])[:, None]
            hy = (y1[sel] - y0[sel])[:, None]
            X = x0[sel][:, None] + hx * self.gx[None, :]
            Y = y0[sel][:, None] + hy * self.gy[None, :]
            fx = np.asarray(self.funcs[r](X.ravel(), Y.ravel()), dtype=float).reshape(X.shape)
            area = (hx * hy)[:, 0]
            q[sel] = fx @ self.w2 * area
            qa[sel] = np.abs(fx) @ self.w2 * area
        return q, qa

    def refine(self, rid, x0, x1, y0, y1, whole):
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        quads = []
        absval = 0.0
        for ax, bx, ay, by in ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)):
            q, qa = self.rule(rid, ax, bx, ay, by)
            quads.append(q)
            absval = absval + qa
        quads = np.stack(quads, axis=1)
        return quads, absval, np.abs(quads.sum(axis=1) - whole)


def integrate_squares(funcs, spec=DEFAULT_SPEC, order=8):
    """Sum of integrals of several functions over the unit square.

    Parameters
    ----------
    funcs : list of callable
        Each maps flat arrays ``(X, Y)`` in ``[0, 1]^2`` to integrand values
        (Jacobians already folded in).
    spec : QuadratureSpec
        Tolerances apply to the sum; refinement is global across regions.
    order : int
        Gauss-Legendre nodes per direction.

    Returns
    -------
    value, error : float
    """
    if not funcs:
        return 0.0, 0.0
    eng = _Panels2D(funcs, order)
    n = len(funcs)
    rid = np.arange(n)
    x0, y0 = np.zeros(n), np.zeros(n)
    x1, y1 = np.ones(n), np.ones(n)
    whole, _ = eng.rule(rid, x0, x1, y0, y1)
    quads, absval, err = eng.refine(rid, x0, x1, y0, y1, whole)
    while True:
        value = quads.sum(axis=1)
        total = math.fsum(value)
        target = max(spec.abs_tol, spec.rel_tol * abs(total), 256 * _EPS * math.fsum(absval))
        errsum = math.fsum(err)
        if errsum <= target:
            return total, errsum
        split = _select(err, errsum, target)
        if len(rid) + 3 * int(split.sum()) > spec.max_panels:
            raise AccuracyError(
                f"2D quadrature exhausted its budget of {spec.max_panels} panels",
                estimate=total,
                error=errsum,
            )
        sr, sx0, sx1, sy0, sy1 = rid[split], x0[split], x1[split], y0[split], y1[split]
        sxm, sym = 0.5 * (sx0 + sx1), 0.5 * (sy0 + sy1)
        cr = np.tile(sr, 4)
        cx0 = np.concatenate([sx0, sxm, sx0, sxm])
        cx1 = np.concatenate([sxm, sx1, sxm, sx1])
        cy0 = np.concatenate([sy0, sy0, sym, sym])
        cy1 = np.concatenate([sym, sym, sy1, sy1])
        cwhole = quads[split].T.ravel()
        cq, cabs, cerr = eng.refine(cr, cx0, cx1, cy0, cy1, cwhole)
        keep = ~split
        rid = np.concatenate([rid[keep], cr])
        x0 = np.concatenate([x0[keep], cx0])
        x1 = np.concatenate([x1[keep], cx1])
        y0 = np.concatenate([y0[keep], cy0])
        y1 = np.concatenate([y1[keep], cy1])
        quads = np.concatenate([quads[keep], cq])
        absval = np.concatenate([absval[keep], cabs])
        err = np.concatenate([err[keep], cerr])
        order_idx = np.lexsort((y0, x0, rid))
        rid, x0, x1, y0, y1, quads, absval, err = (
            arr[order_idx] for arr in (rid, x0, x1, y0, y1, quads, absval, err)
        )
