"""Independent brute-force reference computations used by the tests."""

import numpy as np


def dense_seminorm(u, p, n_cells=4000):
    """[u]^p of a piecewise-linear u by a midpoint double sum.

    Off-diagonal cell pairs use the midpoint rule; each diagonal cell uses
    the exact self-interaction of a linear piece, and the exterior of the
    support is integrated in closed form (inner integral 1/dist).
    """
    a, b = u.nodes[0], u.nodes[-1]
    edges = np.linspace(a, b, n_cells + 1)
    h = edges[1] - edges[0]
    mid = 0.5 * (edges[:-1] + edges[1:])
    um = u(mid)
    slope = (u(edges[1:]) - u(edges[:-1])) / h
    diff = np.abs(um[:, None] - um[None, :]) ** p
    dist = (mid[:, None] - mid[None, :]) ** 2
    np.fill_diagonal(dist, 1.0)
    np.fill_diagonal(diff, 0.0)
    inner = h * h * (diff / dist).sum()
    inner += (2.0 * np.abs(slope) ** p * h**p / (p * (p - 1.0))).sum()
    exterior = 2.0 * h * (np.abs(um) ** p * (1.0 / (mid - a) + 1.0 / (b - mid))).sum()
    return inner + exterior


def random_even_grid(rng, n_half=8, nonincreasing=False, uniform=False):
    """Even conforming grid function with random values on symmetric nodes."""
    from fracmt import GridFunction

    if uniform:
        pos = np.arange(1, n_half + 1, dtype=float)
    else:
        pos = np.cumsum(rng.uniform(0.2, 1.0, n_half))
    vals = rng.uniform(0.0, 1.0, n_half)
    if nonincreasing:
        vals = np.sort(vals)[::-1]
    vals[-1] = 0.0
    center = rng.uniform(0.0, 1.0) if not nonincreasing else max(vals[0], rng.uniform(vals[0], 1.0))
    nodes = np.concatenate([-pos[::-1], [0.0], pos])
    values = np.concatenate([vals[::-1], [center], vals])
    return GridFunction(nodes, values)
