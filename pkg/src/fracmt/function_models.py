"""Test functions: the concentrating logarithmic family and sampled
piecewise-linear functions, with their L^p integrals."""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .constants import Params
from .errors import InputError
from .quadrature import DEFAULT_SPEC, integrate


@dataclass(frozen=True)
class MoserFunction:
    """u_eps(x) = |log eps|^(1-s) on |x| <= eps, |log|x|| / |log eps|^s on
    eps < |x| < 1, and 0 for |x| >= 1."""

    eps: float
    params: Params

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise InputError(f"eps must lie in (0, 1), got {self.eps!r}")

    @property
    def log_eps(self):
        """|log eps|."""
        return -math.log(self.eps)

    @property
    def peak(self):
        return self.log_eps ** (1.0 - self.params.s)

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        L, s = self.log_eps, self.params.s
        with np.errstate(divide="ignore"):
            mid = -np.log(ax) / L**s
        out = np.where(ax <= self.eps, self.peak, np.where(ax < 1.0, mid, 0.0))
        return out if out.ndim else float(out)

    def breakpoints(self, ratio=2.0):
        """Positive kinks plus geometric points on (eps, 1) for quadrature panels."""
        n = max(int(math.ceil(self.log_eps / math.log(ratio))), 1)
        return np.geomspace(self.eps, 1.0, n + 1)


def moser_eval(f: MoserFunction, x):
    return f(x)


def moser_nodes(eps, per_decade=64):
    """Symmetric node set for sampling u_eps: 0, geometric points on
    [eps, 1] at ``per_decade`` per decade, and their mirror images."""
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie in (0, 1)")
    n = max(int(math.ceil(per_decade * math.log10(1.0 / eps))), 2)
    right = np.geomspace(eps, 1.0, n + 1)
    return np.concatenate([-right[::-1], [0.0], right])


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Continuous piecewise-linear interpolant of ``values`` at ``nodes``,
    identically zero outside ``[nodes[0], nodes[-1]]``.

    Nonzero end values are allowed (the function then jumps to zero at the
    boundary) but such a function is flagged as non-conforming and has
    infinite fractional seminorm for sp = 1.
    """

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        v = np.array(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise InputError("nodes and values must be 1D arrays of equal length")
        if x.size < 2:
            raise InputError("a grid function needs at least two nodes")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
            raise InputError("nodes and values must be finite")
        if np.any(np.diff(x) <= 0):
            raise InputError("nodes must be strictly increasing")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", v)

    @property
    def conforming(self):
        return self.values[0] == 0.0 and self.values[-1] == 0.0

    @property
    def is_uniform(self):
        h = np.diff(self.nodes)
        return bool(np.allclose(h, h[0], rtol=1e-9, atol=0.0))

    @property
    def support(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    def __call__(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.nodes, self.values, left=0.0, right=0.0)
        return out if np.ndim(out) else float(out)

    def scaled(self, c):
        return GridFunction(self.nodes, c * self.values)

    def dilated(self, delta):
        """x -> u(x / delta)."""
        return GridFunction(self.nodes * delta, self.values)

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"GridFunction(n={self.nodes.size}, support={self.support})"

    def to_csv(self, path=None):
        """Write ``x,u`` rows with 17 significant digits; returns the text if no path."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "u"])
        for x, u in zip(self.nodes, self.values):
            writer.writerow([format(x, ".17g"), format(u, ".17g")])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return path

    @classmethod
    def from_csv(cls, path_or_text):
        if isinstance(path_or_text, str) and "\n" in path_or_text:
            text = path_or_text
        else:
            with open(path_or_text, newline="") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "u"]:
            raise InputError("grid CSV must start with the header 'x,u'")
        try:
            data = np.array([[float(a), float(b)] for a, b in (r for r in rows[1:] if r)], dtype=float)
        except ValueError as exc:
            raise InputError(f"malformed grid CSV: {exc}") from None
        if data.ndim != 2 or data.shape[0] < 2:
            raise InputError("grid CSV needs at least two rows")
        return cls(data[:, 0], data[:, 1])


def sample_to_grid(f, nodes):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
        raise InputError("nodes must be a strictly increasing sequence of length >= 2")
    return GridFunction(nodes, np.asarray(f(nodes), dtype=float) * np.ones_like(nodes))


def segment_power_mean(a, b, p):
    """int_0^1 |a + (b - a) t|^p dt, vectorized and stable when a ~ b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa, ab = np.abs(a), np.abs(b)
    hi = np.maximum(aa, ab)
    lo = np.minimum(aa, ab)
    cross = (a * b) < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        # sign change: the two pieces integrate to (|a|^(p+1) + |b|^(p+1)) / ((p+1)(|a|+|b|))
        mixed = (aa ** (p + 1) + ab ** (p + 1)) / ((p + 1) * (aa + ab))
        # same sign: hi^p * (1 - rho^(p+1)) / ((p+1)(1 - rho)) with rho = lo/hi
        delta = (hi - lo) / hi
        ratio = -np.expm1((p + 1) * np.log1p(-delta)) / ((p + 1) * delta)
        same = hi**p * np.where(delta > 0, ratio, 1.0)
    out = np.where(cross, mixed, np.where(hi > 0, same, 0.0))
    return out


def _grid_lp(u: GridFunction, p):
    h = np.diff(u.nodes)
    seg = h * segment_power_mean(u.values[:-1], u.values[1:], p)
    return math.fsum(seg)


def _moser_lp(f: MoserFunction, p, spec):
    L = f.log_eps
    # int_eps^1 |log x|^p dx = int_0^L r^p e^-r dr
    edges = np.concatenate([[0.0], np.geomspace(min(1.0, L), L, 8)])
    val, _ = integrate(lambda r: r**p * np.exp(-r), edges, spec)
    s = f.params.s
    return 2.0 * f.eps * L ** (p * (1.0 - s)) + 2.0 * val / L ** (s * p)


def lp_norm_p(u, p, spec=DEFAULT_SPEC):
    """p-th power of the L^p norm, int |u|^p dx (no root taken)."""
    if not p >= 1:
        raise InputError(f"p must be at least 1, got {p!r}")
    if isinstance(u, GridFunction):
        return _grid_lp(u, p)
    if isinstance(u, MoserFunction):
        return _moser_lp(u, p, spec)
    raise InputError(f"unsupported function type {type(u).__name__}")


def full_norm_p(u, params: Params, spec=DEFAULT_SPEC):
    """||u||^p = ||u||_p^p + [u]^p."""
    from .seminorm import gagliardo_p

    return lp_norm_p(u, params.p, spec) + gagliardo_p(u, params, spec)
