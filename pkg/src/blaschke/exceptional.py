"""Circular exceptional sets E in (0, 1) and radial arc systems on the circle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .weights import Weight
from .zeros import ZeroSequence

TWO_PI = 2.0 * math.pi
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
ANGLE_TOL = 1e-10
RADIUS_TOL = 1e-12


# -- circular set --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IntervalSet:
    lefts: np.ndarray
    rights: np.ndarray
    beta: float
    raw_count: int
    dropped: int = 0

    def __len__(self):
        return self.lefts.size

    def __iter__(self):
        return iter(zip(self.lefts.tolist(), self.rights.tolist()))


def merge_open(lefts, rights) -> tuple[np.ndarray, np.ndarray]:
    """Union of open intervals; touching intervals (a, b), (b, c) stay separate."""
    order = np.argsort(lefts, kind="stable")
    out_l, out_r = [], []
    for a, b in zip(np.asarray(lefts)[order].tolist(), np.asarray(rights)[order].tolist()):
        if out_r and a < out_r[-1]:
            out_r[-1] = max(out_r[-1], b)
        else:
            out_l.append(a)
            out_r.append(b)
    return np.array(out_l, dtype=float), np.array(out_r, dtype=float)


def half_widths(seq: ZeroSequence, h: Weight, beta: float) -> np.ndarray:
    gaps = seq.gaps
    return gaps**beta * np.asarray(h(gaps), dtype=float)


def build_circular_E(seq: ZeroSequence, h: Weight, beta: float) -> IntervalSet:
    """Union over n of (r_n - w_n, r_n + w_n), w_n = (1 - r_n)^beta h(1 - r_n).

    Intervals reaching 0 or below are removed; right ends are cut at 1.
    Intervals whose half-width vanishes against r_n in floating point are
    empty open sets and are skipped without counting as removed.
    """
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    hw = half_widths(seq, h, beta)
    a = seq.radii - hw
    b = np.minimum(seq.radii + hw, 1.0)
    keep = a > 0.0
    nonempty = b > a
    lefts, rights = merge_open(a[keep & nonempty], b[keep & nonempty])
    return IntervalSet(lefts, rights, float(beta), len(seq), int(np.count_nonzero(~keep)))


def contains(E: IntervalSet, t):
    """Membership in the open set E (endpoints excluded)."""
    t_arr = np.asarray(t, dtype=float)
    i = np.searchsorted(E.lefts, t_arr, side="left") - 1
    ok = i >= 0
    ic = np.where(ok, i, 0)
    out = ok & (t_arr < E.rights[ic]) if len(E) else np.zeros(t_arr.shape, dtype=bool)
    return bool(out) if out.ndim == 0 else out


def _weighted_length(a: float, b: float, beta: float) -> float:
    if beta == 1.0:
        return math.log((1.0 - a) / (1.0 - b))
    return ((1.0 - b) ** (1.0 - beta) - (1.0 - a) ** (1.0 - beta)) / (beta - 1.0)


def interval_weighted_lengths(E: IntervalSet, beta: float) -> np.ndarray:
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    if len(E) and E.rights[-1] >= 1.0:
        raise DomainError("exceptional set reaches t = 1; weighted measure is infinite")
    return np.array([_weighted_length(a, b, beta) for a, b in E])


def weighted_measure(E: IntervalSet, beta: float) -> float:
    """Integral of dt / (1 - t)^beta over E, from exact antiderivatives."""
    return math.fsum(interval_weighted_lengths(E, beta).tolist())


def measure_constant(seq: ZeroSequence, h: Weight, beta: float) -> float:
    """max_n 2 (1-r_n)^beta / ((1-r_n) - w_n)^beta over retained intervals.

    Each retained interval contributes at most this constant times
    h(1 - r_n) to the weighted measure.
    """
    hw = half_widths(seq, h, beta)
    gaps = seq.gaps
    keep = (seq.radii - hw > 0.0) & (gaps - hw > 0.0)
    if not np.any(keep):
        return 0.0
    return float(np.max(2.0 * gaps[keep] ** beta / (gaps[keep] - hw[keep]) ** beta))


def write_intervals(E: IntervalSet, path) -> None:
    lines = [
        f"# beta: {E.beta:.17g}",
        f"# raw_count: {E.raw_count}",
        f"# dropped: {E.dropped}",
        "# left right",
    ]
    lines += [f"{a:.17g} {b:.17g}" for a, b in E]
    Path(path).write_text("\n".join(lines) + "\n")


def _header(lines: list[str]) -> dict[str, str]:
    out = {}
    for ln in lines:
        if ln.startswith("#") and ":" in ln:
            k, v = ln[1:].split(":", 1)
            out[k.strip()] = v.strip()
    return out


def read_intervals(path) -> IntervalSet:
    lines = Path(path).read_text().splitlines()
    head = _header(lines)
    rows = [ln.split() for ln in lines if ln.strip() and not ln.startswith("#")]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return IntervalSet(arr[:, 0], arr[:, 1], float(head["beta"]),
                       int(head.get("raw_count", len(arr))), int(head.get("dropped", 0)))


# -- radial arcs ---------------------------------------------------------


def golden_section_min(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimum of a unimodal f on [a, b]; returns (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _stolz_gap(phi: float, rn: float, C: float, lo: float, hi: float) -> float:
    """min over r in [lo, hi] of C |r e^{i phi} - r_n| - (1 - r); negative iff the ray meets U_n."""
    cp, sp = math.cos(phi), math.sin(phi)

    def f(r):
        return C * math.hypot(r * cp - rn, r * sp) - (1.0 - r)

    tol = max(RADIUS_TOL * (hi - lo), 4.0 * np.finfo(float).eps * hi)
    return golden_section_min(f, lo, hi, tol)[1]


def arc_half_width(rn: float, C: float) -> float:
    """Half-width of the radial projection of U_n = {1 - |z| > C |z - z_n|}.

    Bisection over the angle offset; the inner problem is convex in r.
    Points of U_n satisfy |z - z_n| < (1 - r_n)/(C - 1), which brackets both
    searches.
    """
    if rn == 0.0:
        return math.pi
    rho = (1.0 - rn) / (C - 1.0)
    lo_r, hi_r = max(0.0, rn - rho), min(1.0, rn + rho)
    hi = math.asin(rho / rn) if rho < rn else math.pi
    if _stolz_gap(hi, rn, C, lo_r, hi_r) < 0.0:
        return math.pi
    lo = 0.0
    tol = ANGLE_TOL * min(1.0, hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _stolz_gap(mid, rn, C, lo_r, hi_r) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class RadialArcs:
    centers: np.ndarray
    half_widths: np.ndarray
    radii: np.ndarray
    aperture: float
    projection_constant: float = field(init=False)

    def __post_init__(self):
        ratio = 2.0 * self.half_widths / (1.0 - self.radii)
        object.__setattr__(self, "projection_constant", float(np.max(ratio)))

    def __len__(self):
        return self.centers.size

    def tail_intervals(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """Merged unwrapped open arcs of I_k, k >= N (1-based), as angle intervals."""
        if not (1 <= N <= len(self)):
            raise DomainError(f"N must lie in [1, {len(self)}], got {N!r}")
        c, w = self.centers[N - 1:], self.half_widths[N - 1:]
        return merge_open(c - w, c + w)

    def wrapped_pieces(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """Tail arcs folded into [0, 2 pi), wrapped arcs split in two, then merged."""
        c, w = self.centers[N - 1:], self.half_widths[N - 1:]
        if np.any(w >= math.pi):
            return np.array([0.0]), np.array([TWO_PI])
        a, b = c - w, c + w
        low, high = a < 0, b > TWO_PI  # w < pi, so never both
        inside = ~(low | high)
        nl, nh = int(np.count_nonzero(low)), int(np.count_nonzero(high))
        lefts = np.concatenate([a[inside], a[low] + TWO_PI, np.zeros(nl), a[high], np.zeros(nh)])
        rights = np.concatenate([b[inside], np.full(nl, TWO_PI), b[low], np.full(nh, TWO_PI), b[high] - TWO_PI])
        return merge_open(lefts, rights)


def build_radial_arcs(seq: ZeroSequence, aperture: float) -> RadialArcs:
    if not aperture > 1.0:
        raise DomainError(f"aperture C must be > 1, got {aperture!r}")
    widths = np.array([arc_half_width(float(r), aperture) for r in seq.radii])
    return RadialArcs(seq.angles.copy(), widths, seq.radii.copy(), float(aperture))


@dataclass(frozen=True)
class TailMeasure:
    measure: float  # Lebesgue measure of the union of I_k, k >= N
    crude_bound: float  # sum_{k >= N} 2 w_k


def radial_tail_measure(arcs: RadialArcs, N: int) -> TailMeasure:
    if not (1 <= N <= len(arcs)):
        raise DomainError(f"N must lie in [1, {len(arcs)}], got {N!r}")
    lefts, rights = arcs.wrapped_pieces(N)
    crude = 2.0 * math.fsum(arcs.half_widths[N - 1:].tolist())
    # endpoints near 2 pi carry absolute rounding; the union never exceeds the sum
    measure = min(TWO_PI, crude, math.fsum((rights - lefts).tolist()))
    return TailMeasure(measure, crude)


def radial_membership(arcs: RadialArcs, theta: float, N: int) -> bool:
    """Is e^{i theta} in the union of the open arcs I_k, k >= N?"""
    lefts, rights = arcs.tail_intervals(N)
    base = theta % TWO_PI
    for t in (base - TWO_PI, base, base + TWO_PI):
        i = int(np.searchsorted(lefts, t, side="left")) - 1
        if i >= 0 and t < rights[i]:
            return True
    return False


def free_angle(arcs: RadialArcs, N: int) -> float:
    """Midpoint of the widest gap between the tail arcs k >= N."""
    lefts, rights = arcs.wrapped_pieces(N)
    if lefts.size == 1 and lefts[0] <= 0.0 and rights[0] >= TWO_PI:
        raise DomainError(f"arcs k >= {N} cover the whole circle")
    # gaps between consecutive pieces, including the one across 2 pi
    starts = rights
    ends = np.append(lefts[1:], lefts[0] + TWO_PI)
    k = int(np.argmax(ends - starts))
    if ends[k] - starts[k] <= 0.0:
        raise DomainError(f"arcs k >= {N} leave no open gap")
    return float((0.5 * (starts[k] + ends[k])) % TWO_PI)


def write_arcs(arcs: RadialArcs, path) -> None:
    lines = [
        f"# aperture: {arcs.aperture:.17g}",
        f"# projection_constant: {arcs.projection_constant:.17g}",
        "# n theta_n r_n w_n start end",
    ]
    for n, (c, r, w) in enumerate(zip(arcs.centers, arcs.radii, arcs.half_widths), 1):
        a, b = c - w, c + w
        if w >= math.pi:
            pieces = [(0.0, TWO_PI)]
        elif a < 0:
            pieces = [(a + TWO_PI, TWO_PI), (0.0, b)]
        elif b > TWO_PI:
            pieces = [(a, TWO_PI), (0.0, b - TWO_PI)]
        else:
            pieces = [(a, b)]
        lines += [f"{n} {c:.17g} {r:.17g} {w:.17g} {s:.17g} {e:.17g}" for s, e in pieces]
    Path(path).write_text("\n".join(lines) + "\n")


def read_arcs(path) -> RadialArcs:
    lines = Path(path).read_text().splitlines()
    head = _header(lines)
    seen = {}
    for ln in lines:
        if not ln.strip() or ln.startswith("#"):
            continue
        parts = ln.split()
        seen.setdefault(int(parts[0]), tuple(float(x) for x in parts[1:4]))
    rows = np.array([seen[k] for k in sorted(seen)])
    return RadialArcs(rows[:, 0], rows[:, 2], rows[:, 1], float(head["aperture"]))
