"""Growth checks for B'/B off the exceptional sets.

Each check samples a geometric ladder of radii r_k = 1 - 2**-k, measures
|B'/B| there, multiplies it by the predicted rate and looks at the trend:
o(1) statements must decrease, O(1) statements must stay bounded.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BlaschkeError, DomainError, ExceptionalSetError
from .exceptional import RadialArcs, build_circular_E, build_radial_arcs, contains, free_angle, radial_membership
from .product import csum, eval_logderiv_many, logderiv_terms, remark1_delta, ring_split
from .weights import Weight, WeightFunction
from .zeros import ZeroSequence, density_condition_check, gen_geometric, gen_power_law, ladder_samples

TWO_PI = 2.0 * math.pi
MIN_SEPARATION = 1e-12  # keeps samples well clear of the pole guard
DEFAULT_EPSILON = 0.5
DEFAULT_FILL = 512


@dataclass
class Sample:
    r: float
    M: float
    normalized: float
    theta: float  # angle where M was attained
    requested: float  # ladder radius before nudging out of E
    nudges: int = 0
    extra: dict = field(default_factory=dict)


@dataclass
class GrowthReport:
    kind: str
    samples: list[Sample]
    fitted_slope: float
    residual: float
    predicted_exponent: float
    epsilon_margin: float
    trend_ok: bool
    verdict: bool
    notes: list[str] = field(default_factory=list)
    summary_extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.predicted_exponent + self.epsilon_margin - self.fitted_slope

    @property
    def normalized(self) -> np.ndarray:
        return np.array([s.normalized for s in self.samples])

    def summary(self) -> dict:
        out = {
            "kind": self.kind,
            "fitted_slope": self.fitted_slope,
            "residual": self.residual,
            "predicted_exponent": self.predicted_exponent,
            "epsilon_margin": self.epsilon_margin,
            "margin": self.margin,
            "trend_ok": self.trend_ok,
            "verdict": "pass" if self.verdict else "fail",
            "samples": len(self.samples),
            "notes": list(self.notes),
        }
        out.update(self.summary_extra)
        return out

    def table(self) -> str:
        """One tab-separated row per radius, floats at 17 significant digits."""
        extra_keys = sorted({k for s in self.samples for k in s.extra})
        cols = ["r", "requested", "nudges", "theta", "M", "normalized"] + extra_keys
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(cols)
        for s in self.samples:
            row = asdict(s)
            row.update(s.extra)
            w.writerow([_fmt(row.get(c, "")) for c in cols])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def ladder(kmin: int, kmax: int) -> np.ndarray:
    if kmin < 1 or kmax < kmin:
        raise DomainError(f"need 1 <= kmin <= kmax, got {kmin}, {kmax}")
    return 1.0 - 2.0 ** -np.arange(kmin, kmax + 1, dtype=float)


def angle_grid(seq: ZeroSequence, fill: int = DEFAULT_FILL) -> np.ndarray:
    """All zero angles plus ``fill`` equispaced angles."""
    return np.unique(np.concatenate([seq.angles, TWO_PI * np.arange(fill) / fill]))


def fit_exponent(samples) -> tuple[float, float]:
    """Least-squares slope of log M against log 1/(1 - r), and the RMS residual."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 4:
        raise DomainError("fit_exponent needs at least 4 (r, M) samples")
    r, M = arr[:, 0], arr[:, 1]
    if np.any(M <= 0):
        raise DomainError("fit_exponent needs M > 0")
    x, y = -np.log1p(-r), np.log(M)
    A = np.column_stack([x, np.ones_like(x)])
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), res


def decreasing_tail(values) -> bool:
    """Nonincreasing over the last half and final value at most half the first."""
    v = np.asarray(values, dtype=float)
    tail = v[len(v) // 2:]
    return bool(np.all(np.diff(tail) <= 0) and v[-1] <= 0.5 * v[0])


def bounded(values) -> bool:
    """O(1) surrogate: max of the last half within twice the median of the first half."""
    v = np.asarray(values, dtype=float)
    half = len(v) // 2
    return bool(np.max(v[half:]) <= 2.0 * np.median(v[:max(half, 1)]))


def nudge_outside(E, r: float, zero_radii=None) -> tuple[float, int]:
    """Nearest radius >= r outside E, and the number of moves it took.

    A radius inside E moves to the first float above the right end of its
    interval, i.e. as close to the zeros as E allows.  When E is thinner
    than MIN_SEPARATION the radius is also kept that far from every zero
    radius.  The move may not leave the window [r, (1 + r)/2].
    """
    zr = np.sort(np.asarray([] if zero_radii is None else zero_radii, dtype=float))
    t, steps = r, 0
    while True:
        if contains(E, t):
            i = int(np.searchsorted(E.lefts, t, side="left")) - 1
            t = float(np.nextafter(E.rights[i], 2.0))
        else:
            k = int(np.searchsorted(zr, t))
            near = [x for x in zr[max(k - 1, 0):k + 1] if abs(t - x) < MIN_SEPARATION]
            if not near:
                break
            t = float(np.nextafter(max(near) + MIN_SEPARATION, 2.0))
        steps += 1
    if t - r > (1.0 - r) / 2.0:
        raise ExceptionalSetError(f"no radius outside E in [{r!r}, {(1.0 + r) / 2.0!r}]")
    return t, steps


def admissible_radii(E, radii, zero_radii=None) -> tuple[list[tuple[float, float, int]], list[float]]:
    """Nudge each ladder radius out of E.

    Returns (requested, nudged, moves) triples and the requested radii whose
    whole window [r, (1 + r)/2] lies in E.  Raises ExceptionalSetError when
    fewer than 4 radii survive, the minimum for a slope fit.
    """
    kept, skipped = [], []
    for r0 in radii:
        try:
            r, j = nudge_outside(E, float(r0), zero_radii)
        except ExceptionalSetError:
            skipped.append(float(r0))
            continue
        kept.append((float(r0), r, j))
    if len(kept) < 4:
        raise ExceptionalSetError(
            f"only {len(kept)} of {len(kept) + len(skipped)} radii have a point outside E in their window")
    return kept, skipped


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _report(kind, samples, predicted, epsilon, trend_ok, notes, extra=None) -> GrowthReport:
    slope, res = fit_exponent([(s.r, s.M) for s in samples])
    verdict = slope <= predicted + epsilon and trend_ok
    return GrowthReport(kind, samples, slope, res, predicted, epsilon, trend_ok, verdict, notes, extra or {})


def _ring_max(seq, r, thetas):
    vals = np.abs(eval_logderiv_many(seq, r * np.exp(1j * thetas)))
    k = int(np.argmax(vals))
    return float(vals[k]), float(thetas[k])


def verify_circular(seq: ZeroSequence, h: Weight, beta: float, radii, n_angles: int = DEFAULT_FILL,
                    epsilon: float = DEFAULT_EPSILON, workers: int = 1) -> GrowthReport:
    """|B'/B| = o(1) / ((1-|z|)^beta h(1-|z|)^2) for |z| outside E.

    At every sample the near/far split with delta = (1 - r)/2 is checked
    against both proof-side bounds over the whole angle grid.
    """
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    E = build_circular_E(seq, h, beta)
    thetas = angle_grid(seq, n_angles)

    kept, skipped = admissible_radii(E, radii, seq.radii)

    def one(item):
        r0, r, j = item
        split = ring_split(seq, r, thetas, (1.0 - r) / 2.0, h, beta)
        vals = split.values
        direct = eval_logderiv_many(seq, r * np.exp(1j * thetas))
        absv = np.abs(direct)
        k = int(np.argmax(absv))
        M = float(absv[k])
        part_err = float(np.max(np.abs(vals - direct) / np.maximum(absv, 1e-300)))
        far_viol = int(np.count_nonzero(np.abs(split.far_sums) > split.far_bound))
        near_viol = int(np.count_nonzero(np.abs(split.near_sums) > split.near_bound))
        extra = {
            "far_max": float(np.max(np.abs(split.far_sums))),
            "far_bound": split.far_bound,
            "near_max": float(np.max(np.abs(split.near_sums))),
            "near_bound": split.near_bound,
            "near_count": split.near_count,
            "near_certified": split.near_certified,
            "bound_violations": far_viol + near_viol,
            "partition_error": part_err,
        }
        norm = M * (1.0 - r) ** beta * h(1.0 - r) ** 2
        return Sample(r, M, norm, float(thetas[k]), float(r0), j, extra)

    samples = _map(one, kept, workers)
    trend = decreasing_tail([s.normalized for s in samples])
    predicted = beta + 2.0 * h.power_exponent
    notes = [f"{sum(s.nudges > 0 for s in samples)} radii nudged out of E"]
    if skipped:
        notes.append("skipped (window inside E): " + " ".join(f"{x:.17g}" for x in skipped))
    extra = {
        "bound_violations": sum(s.extra["bound_violations"] for s in samples),
        "max_partition_error": max(s.extra["partition_error"] for s in samples),
        "exceptional_intervals": len(E),
    }
    return _report("circular", samples, predicted, epsilon, trend, notes, extra)


def _segment_distance(a: complex, theta: float) -> float:
    """Distance from a to the radius {rho e^{i theta}: 0 <= rho <= 1}."""
    u = complex(math.cos(theta), math.sin(theta))
    proj = (a * u.conjugate()).real
    rho = min(max(proj, 0.0), 1.0)
    return abs(a - rho * u)


@dataclass(frozen=True)
class RadialSplit:
    """B'/B(z) split into zeros with |z_n| >= R (n >= N), |z_n| < R (n >= N), and n < N."""

    outer: complex
    middle: complex
    head: complex
    total: complex
    outer_bound: float
    middle_bound: float
    head_bound: float

    @property
    def partition_error(self) -> float:
        return abs(self.outer + self.middle + self.head - self.total) / max(abs(self.total), 1e-300)


def radial_split(seq: ZeroSequence, z: complex, N: int, h: Weight, aperture: float) -> RadialSplit:
    """Three-way split at R = (1 + |z|)/2 with the bound for each part.

    outer:  2 K^2 sum_{outer} h(1-r_n) / (delta h(1-|z|)), delta = (1-|z|)/2
    middle: 2 C m / (1 - |z|), m zeros, valid when z/|z| is outside I_n for n >= N
    head:   sum_{n<N} (1 + r_n) / dist(z_n, radius through z), uniform in |z|
    """
    r = abs(z)
    R = (1.0 + r) / 2.0
    terms = logderiv_terms(seq, z)
    idx = np.arange(1, len(seq) + 1)
    head = idx < N
    outer = ~head & (seq.radii >= R)
    middle = ~head & ~outer
    delta = (1.0 - r) / 2.0
    hz = h(1.0 - r)
    K2 = h.almost_constant**2
    outer_bound = 2.0 * K2 * math.fsum(np.asarray(h(seq.gaps[outer])).tolist()) / (delta * hz) if outer.any() else 0.0
    middle_bound = 2.0 * aperture * int(np.count_nonzero(middle)) / (1.0 - r)
    theta = math.atan2(z.imag, z.real)
    head_bound = math.fsum(
        (1.0 + float(rn)) / _segment_distance(complex(a), theta) if _segment_distance(complex(a), theta) > 0 else math.inf
        for rn, a in zip(seq.radii[head], seq.points[head])
    )
    return RadialSplit(csum(terms[outer]), csum(terms[middle]), csum(terms[head]), csum(terms),
                       outer_bound, middle_bound, head_bound)


def verify_radial(seq: ZeroSequence, h: Weight, theta: float, N: int, radii, arcs: RadialArcs | None = None,
                  aperture: float = 2.0, epsilon: float = DEFAULT_EPSILON, workers: int = 1) -> GrowthReport:
    """|B'/B|(r e^{i theta}) = o(1) / ((1-r) h(1-r)) for e^{i theta} outside the arc tail k >= N."""
    if arcs is None:
        arcs = build_radial_arcs(seq, aperture)
    if radial_membership(arcs, theta, N):
        raise DomainError(f"theta = {theta!r} lies in the union of I_k, k >= {N}")

    def one(r0):
        r = float(r0)
        z = r * complex(math.cos(theta), math.sin(theta))
        sp = radial_split(seq, z, N, h, arcs.aperture)
        M = abs(sp.total)
        extra = {
            "outer": abs(sp.outer), "outer_bound": sp.outer_bound,
            "middle": abs(sp.middle), "middle_bound": sp.middle_bound,
            "head": abs(sp.head), "head_bound": sp.head_bound,
            "partition_error": sp.partition_error,
            "bound_violations": int(abs(sp.outer) > sp.outer_bound) + int(abs(sp.middle) > sp.middle_bound)
            + int(abs(sp.head) > sp.head_bound),
        }
        return Sample(r, M, M * (1.0 - r) * h(1.0 - r), theta, r, 0, extra)

    samples = _map(one, list(radii), workers)
    trend = decreasing_tail([s.normalized for s in samples])
    extra = {
        "theta": theta,
        "N": N,
        "aperture": arcs.aperture,
        "bound_violations": sum(s.extra["bound_violations"] for s in samples),
        "max_partition_error": max(s.extra["partition_error"] for s in samples),
    }
    return _report("radial", samples, 1.0 + h.power_exponent, epsilon, trend, [], extra)


def verify_remark1(seq: ZeroSequence, h: Weight, beta: float, radii, n_angles: int = DEFAULT_FILL,
                   epsilon: float = DEFAULT_EPSILON, workers: int = 1) -> GrowthReport:
    """|B'/B| = O(1) / ((1-|z|)^((1+beta)/2) h(1-|z|)^(3/2)) under the density condition.

    Uses the exceptional set of ``verify_circular`` at the same beta.  Raises
    ExceptionalSetError when that set leaves no admissible radius.
    """
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    radii = np.asarray(radii, dtype=float)
    predicted = (1.0 + beta) / 2.0 + 1.5 * h.power_exponent
    ks = np.rint(-np.log2(1.0 - radii)).astype(int)
    density = density_condition_check(seq, ladder_samples(int(ks.min()), int(ks.max())))
    if not math.isfinite(density.max_ratio):
        return GrowthReport("remark1", [], math.nan, math.nan, predicted, epsilon, False, False,
                            ["inapplicable: density condition has no finite constant"])
    E = build_circular_E(seq, h, beta)
    thetas = angle_grid(seq, n_angles)
    kept, skipped = admissible_radii(E, radii, seq.radii)
    notes = ["skipped (window inside E): " + " ".join(f"{x:.17g}" for x in skipped)] if skipped else []

    def one(item):
        r0, r, j = item
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = min(remark1_delta(h, beta, r), (1.0 - r) / 2.0)
        split = ring_split(seq, r, thetas, d, h, beta)
        absv = np.abs(split.values)
        k = int(np.argmax(absv))
        M = float(absv[k])
        norm = M * (1.0 - r) ** ((1.0 + beta) / 2.0) * h(1.0 - r) ** 1.5
        extra = {"delta": d, "estimate_rhs": split.far_bound + split.near_bound, "near_count": split.near_count}
        return Sample(r, M, norm, float(thetas[k]), float(r0), j, extra)

    samples = _map(one, kept, workers)
    ok = bounded([s.normalized for s in samples])
    extra = {"density_constant": density.max_ratio}
    return _report("remark1", samples, predicted, epsilon, ok, notes, extra)


# -- sweeps --------------------------------------------------------------


def build_sequence(spec: dict) -> ZeroSequence:
    """Sequence from a config record such as {"family": "geometric", "c": 0.5, "count": 25}."""
    from .zeros import ingest

    fam = spec.get("family", "geometric")
    angles = spec.get("angles", 0.0)
    seed = spec.get("seed")
    if fam == "geometric":
        return gen_geometric(float(spec["c"]), int(spec["count"]), angles, seed)
    if fam == "power_law":
        return gen_power_law(float(spec["p"]), int(spec["count"]), angles, seed)
    if fam == "file":
        return ingest(spec["path"])
    raise DomainError(f"unknown family {fam!r}")


def _family_label(spec: dict) -> str:
    fam = spec.get("family", "geometric")
    if fam == "geometric":
        return f"geometric(c={spec['c']},n={spec['count']})"
    if fam == "power_law":
        return f"power_law(p={spec['p']},n={spec['count']})"
    return f"file({spec.get('path')})"


SWEEP_COLUMNS = ["family", "mode", "alpha", "log_exponents", "beta", "fitted_slope", "predicted",
                 "epsilon", "margin", "verdict", "detail"]


def sweep(config: dict, workers: int = 1) -> list[dict]:
    """Run circular and/or radial checks over families x weights x betas.

    Failures in a row are recorded in that row and the sweep continues.
    An optional "interpolating" block probes shrinking epsilon in
    |B'/B| = o(1)/(1-|z|)^(beta+epsilon) for a geometric family, reporting the
    smallest epsilon that still passes; no claim is attached to it.
    """
    lad = config.get("ladder", {})
    radii = ladder(int(lad.get("kmin", 4)), int(lad.get("kmax", 16)))
    eps = float(config.get("epsilon", DEFAULT_EPSILON))
    n_angles = int(config.get("n_angles", DEFAULT_FILL))
    aperture = float(config.get("aperture", 2.0))
    tail_start = int(config.get("tail_start", 5))
    rows = []
    for fam in config.get("families", []):
        seq = build_sequence(fam)
        arcs = None
        for wrec in config.get("weights", [{"alpha": 0.5}]):
            h = WeightFunction(float(wrec["alpha"]), tuple(wrec.get("log_exponents", ())),
                               float(wrec.get("almost_constant", 1.0)))
            for mode in config.get("modes", ["circular"]):
                betas = config.get("betas", [1.0]) if mode == "circular" else [None]
                for beta in betas:
                    row = {"family": _family_label(fam), "mode": mode, "alpha": h.alpha,
                           "log_exponents": " ".join(map(str, h.log_exponents)),
                           "beta": "" if beta is None else float(beta), "epsilon": eps}
                    try:
                        if mode == "circular":
                            rep = verify_circular(seq, h, float(beta), radii, n_angles, eps, workers)
                        elif mode == "radial":
                            if arcs is None:
                                arcs = build_radial_arcs(seq, aperture)
                            theta = free_angle(arcs, tail_start)
                            rep = verify_radial(seq, h, theta, tail_start, radii, arcs, aperture, eps, workers)
                        else:
                            raise DomainError(f"unknown mode {mode!r}")
                        row.update(fitted_slope=rep.fitted_slope, predicted=rep.predicted_exponent,
                                   margin=rep.margin, verdict="pass" if rep.verdict else "fail", detail="")
                    except (BlaschkeError, ExceptionalSetError) as exc:
                        row.update(fitted_slope="", predicted="", margin="", verdict="error", detail=str(exc))
                    rows.append(row)
    if "interpolating" in config:
        rows.append(_interpolating_probe(config["interpolating"], radii, n_angles, workers))
    return rows


def _interpolating_probe(block: dict, radii, n_angles: int, workers: int) -> dict:
    fam = block.get("family", {"family": "geometric", "c": 0.5, "count": 25, "angles": "golden"})
    seq = build_sequence(fam)
    beta = float(block.get("beta", 1.0))
    passing = []
    for e in block.get("epsilons", [1.0, 0.5, 0.25, 0.1, 0.05, 0.01]):
        e = float(e)
        h = WeightFunction(min(1.0, e / 2.0))
        try:
            rep = verify_circular(seq, h, beta, radii, n_angles, 0.0, workers)
        except (BlaschkeError, ExceptionalSetError):
            continue
        norm = [s.M * (1.0 - s.r) ** (beta + e) for s in rep.samples]
        if rep.fitted_slope <= beta + e and decreasing_tail(norm):
            passing.append(e)
    smallest = min(passing) if passing else ""
    return {"family": _family_label(fam), "mode": "interpolating", "alpha": "", "log_exponents": "",
            "beta": beta, "fitted_slope": "", "predicted": "", "epsilon": smallest, "margin": "",
            "verdict": "probe", "detail": "passing epsilons: " + " ".join(f"{e:g}" for e in passing)}


def sweep_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, delimiter=",", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k, "")) for k in SWEEP_COLUMNS})
    return buf.getvalue()
