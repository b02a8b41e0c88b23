"""Brute-force reference computations shared by several test modules."""

import numpy as np


def stolz_covered(theta, rn, C, res):
    """For each angle: does the ray at that angle meet {1-|z| > C|z - rn|} on an r-grid of step res?"""
    rho = (1 - rn) / (C - 1)
    r = np.arange(max(rn - rho, 0.0), min(rn + rho, 1.0) + res, res)
    th = np.atleast_1d(theta)[:, None]
    z = r[None, :] * np.exp(1j * th)
    return np.any((1 - r[None, :]) - C * np.abs(z - rn) > 0, axis=1)


def scan_half_width(rn, C, res=1e-5, coarse=1e-3):
    """Arc half-width from a 2-D (r, theta) scan: coarse pass, then a fine pass near the edge."""
    rho = (1 - rn) / (C - 1)
    top = np.pi if rho >= rn else np.arcsin(rho / rn)
    th = np.arange(0.0, top + coarse, coarse)
    edge = th[stolz_covered(th, rn, C, coarse / 10)].max()
    fine = np.arange(max(edge - 3 * coarse, 0.0), edge + 3 * coarse, res)
    hits = np.concatenate([stolz_covered(fine[i:i + 64], rn, C, res) for i in range(0, fine.size, 64)])
    return float(fine[hits].max())


def grid_union(lefts, rights, step=1e-6):
    """Components of a union of open intervals, read off a uniform grid on (0, 1)."""
    t = np.arange(step, 1.0, step)
    inside = np.zeros(t.size, dtype=bool)
    for a, b in zip(lefts, rights):
        inside |= (t > a) & (t < b)
    edges = np.diff(inside.astype(np.int8))
    starts = t[1:][edges == 1]
    ends = t[:-1][edges == -1]
    if inside[0]:
        starts = np.r_[t[0], starts]
    if inside[-1]:
        ends = np.r_[ends, t[-1]]
    return starts, ends
