"""Independent reference computations used by the tests."""

import math

import numpy as np


def quadrature_action(f, q, samples=100_001):
    """Integrate |f'|^q on a dense grid refined by the knots, using only point evaluations."""
    xs = np.union1d(np.linspace(0.0, 1.0, samples), np.asarray(f.base.us, dtype=float))
    ys = f(xs)
    dx = np.diff(xs)
    slope = np.diff(ys) / dx
    return math.fsum(dx * np.abs(slope) ** q)


def brute_interp(pairs, x):
    """Textbook piecewise-linear interpolation with constant extension."""
    if not pairs:
        return 0.0
    pts = sorted(pairs)
    if x <= pts[0][0]:
        return pts[0][1]
    if x >= pts[-1][0]:
        return pts[-1][1]
    for (u0, v0), (u1, v1) in zip(pts, pts[1:]):
        if u0 <= x <= u1:
            return v0 + (v1 - v0) * (x - u0) / (u1 - u0)
    raise AssertionError("unreachable")


def brute_nn(history, x):
    """Least-index L1 nearest neighbour by full enumeration."""
    if not history:
        return 0.0
    dists = [sum(abs(a - b) for a, b in zip(np.ravel(hx), np.ravel(x))) for hx, _ in history]
    best = min(dists)
    return history[dists.index(best)][1]


def brute_distances(inputs):
    return [min(abs(inputs[j] - inputs[i]) for j in range(i)) for i in range(1, len(inputs))]
