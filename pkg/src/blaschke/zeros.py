"""Zero sequences in the unit disc and their counting function."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, ZeroFileError
from .weights import TabulatedWeight, Weight, WeightFunction

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ANGLE_RULES = ("constant", "equidistributed", "golden", "random")


@dataclass(frozen=True)
class Generator:
    """Analytic family a truncated sequence was drawn from.

    ``kind`` is ``"geometric"`` (1 - r_n = c**n) or ``"power_law"``
    (1 - r_n = n**-p).  Knowing the family lets us bound the omitted tail.
    """

    kind: str
    param: float

    def gap(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "geometric":
            return self.param**n
        return n ** (-self.param)

    def tail_gap_sum(self, count: int) -> float:
        """Upper bound for sum_{n > count} (1 - r_n)."""
        return self.tail_power_sum(count, 1.0)

    def tail_power_sum(self, count: int, a: float) -> float:
        """Upper bound for sum_{n > count} (1 - r_n)**a."""
        if self.kind == "geometric":
            q = self.param**a
            return q ** (count + 1) / (1.0 - q)
        x = self.param * a
        if x <= 1.0:
            return math.inf
        return count ** (1.0 - x) / (x - 1.0)

    def first_tail_radius(self, count: int) -> float:
        return float(1.0 - self.gap(count + 1))

    def to_record(self) -> dict:
        return {"kind": self.kind, "param": self.param}


@dataclass(frozen=True, eq=False)
class ZeroSequence:
    radii: np.ndarray
    angles: np.ndarray
    generator: Generator | None = None
    order: np.ndarray = field(init=False, repr=False)
    sorted_radii: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float).copy()
        th = np.asarray(self.angles, dtype=float).copy()
        if r.ndim != 1 or r.size == 0 or r.shape != th.shape:
            raise DomainError("need a nonempty 1-d list of (radius, angle) pairs")
        bad = np.flatnonzero(~((r >= 0.0) & (r < 1.0)))
        if bad.size:
            raise DomainError(f"radius {r[bad[0]]!r} at index {bad[0]} outside [0, 1)")
        th = np.mod(th, TWO_PI)
        th[th >= TWO_PI] = 0.0  # mod of a tiny negative angle rounds up to 2 pi
        r.flags.writeable = False
        th.flags.writeable = False
        order = np.argsort(r, kind="stable")
        sr = r[order]
        sr.flags.writeable = False
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "angles", th)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "sorted_radii", sr)

    def __len__(self):
        return self.radii.size

    def __eq__(self, other):
        if not isinstance(other, ZeroSequence):
            return NotImplemented
        return (
            np.array_equal(self.radii, other.radii)
            and np.array_equal(self.angles, other.angles)
            and self.generator == other.generator
        )

    @property
    def points(self) -> np.ndarray:
        return self.radii * np.exp(1j * self.angles)

    @property
    def gaps(self) -> np.ndarray:
        return 1.0 - self.radii

    @property
    def has_origin_zero(self) -> bool:
        return bool(self.sorted_radii[0] == 0.0)

    def head(self, count: int) -> "ZeroSequence":
        """The first ``count`` zeros, keeping the generator tag."""
        return ZeroSequence(self.radii[:count], self.angles[:count], self.generator)


def assign_angles(rule, count: int, seed: int | None = None) -> np.ndarray:
    """Angles for ``count`` zeros.

    ``rule`` is a number (constant angle), ``"constant"`` (angle 0),
    ``"equidistributed"``, ``"golden"`` (rotation by the golden ratio) or
    ``"random"`` (uniform, reproducible through ``seed``).
    """
    if isinstance(rule, (int, float)):
        return np.full(count, float(rule) % TWO_PI)
    n = np.arange(count, dtype=float)
    if rule == "constant":
        return np.zeros(count)
    if rule == "equidistributed":
        return TWO_PI * n / count
    if rule == "golden":
        return TWO_PI * np.mod(n * GOLDEN, 1.0)
    if rule == "random":
        return np.random.default_rng(seed).uniform(0.0, TWO_PI, count)
    raise DomainError(f"unknown angle rule {rule!r}; expected a number or one of {ANGLE_RULES}")


def gen_geometric(c: float, count: int, angle_rule=0.0, seed: int | None = None) -> ZeroSequence:
    """Zeros with 1 - r_n = c**n; 1 - r_{n+1} = c (1 - r_n) as for interpolating radii."""
    if not (0.0 < c < 1.0):
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count!r}")
    gen = Generator("geometric", float(c))
    radii = 1.0 - gen.gap(np.arange(1, count + 1))
    return ZeroSequence(radii, assign_angles(angle_rule, count, seed), gen)


def gen_power_law(p: float, count: int, angle_rule=0.0, seed: int | None = None) -> ZeroSequence:
    """Zeros with 1 - r_n = n**-p, so sum (1 - r_n)**a converges iff p a > 1.

    The first zero sits at the origin (1 - r_1 = 1).
    """
    if not p > 0:
        raise DomainError(f"p must be > 0, got {p!r}")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count!r}")
    gen = Generator("power_law", float(p))
    radii = np.clip(1.0 - gen.gap(np.arange(1, count + 1)), 0.0, None)
    return ZeroSequence(radii, assign_angles(angle_rule, count, seed), gen)


# -- file format ---------------------------------------------------------

_GEN_TAG = "# generator:"


def export(seq: ZeroSequence, path) -> None:
    lines = ["# zeros: one 'r theta' pair per line"]
    if seq.generator is not None:
        lines.append(f"{_GEN_TAG} {json.dumps(seq.generator.to_record(), sort_keys=True)}")
    lines += [f"{r:.17g} {t:.17g}" for r, t in zip(seq.radii, seq.angles)]
    Path(path).write_text("\n".join(lines) + "\n")


def ingest(path) -> ZeroSequence:
    radii, angles = [], []
    generator = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.startswith(_GEN_TAG):
                try:
                    rec = json.loads(line[len(_GEN_TAG):])
                    generator = Generator(rec["kind"], float(rec["param"]))
                except (ValueError, KeyError) as exc:
                    raise ZeroFileError(path, lineno, f"bad generator header: {exc}") from None
                continue
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ZeroFileError(path, lineno, f"expected 'r theta', got {body!r}")
            try:
                r, t = float(parts[0]), float(parts[1])
            except ValueError:
                raise ZeroFileError(path, lineno, f"not a number pair: {body!r}") from None
            if not (0.0 <= r < 1.0):
                raise DomainError(f"{path}:{lineno}: radius {r!r} outside [0, 1)")
            if not math.isfinite(t):
                raise ZeroFileError(path, lineno, f"angle {t!r} is not finite")
            if r == 0.0:
                log.warning("%s:%d: zero at the origin", path, lineno)
            radii.append(r)
            angles.append(t)
    if not radii:
        raise ZeroFileError(path, 0, "no zeros in file")
    return ZeroSequence(np.array(radii), np.array(angles), generator)


# -- weighted sums and counting ------------------------------------------


@dataclass(frozen=True)
class SumReport:
    partial_sum: float
    tail_bound: float | None  # None: tail exists but no analytic bound
    verdict: str  # "convergent" | "divergent" | "inconclusive"
    terms: int
    extended: int  # zeros with 1 - r_n >= domain_cutoff (weight extended)

    @property
    def total_bound(self) -> float | None:
        if self.tail_bound is None:
            return None
        return self.partial_sum + self.tail_bound


def _pure_power(h: Weight) -> bool:
    return isinstance(h, WeightFunction) and not any(h.log_exponents)


def _series_verdict(gen: Generator, h: Weight) -> str:
    """Convergence of sum h(1 - r_n) over the whole (infinite) family."""
    if isinstance(h, TabulatedWeight):
        s = h.power_exponent
        if gen.kind == "geometric":
            return "convergent" if s > 0 else "divergent"
        x = gen.param * s
        if x == 1.0:
            return "inconclusive"
        return "convergent" if x > 1.0 else "divergent"
    if gen.kind == "geometric":
        return "convergent"
    x = gen.param * h.alpha
    if x != 1.0:
        return "convergent" if x > 1.0 else "divergent"
    # sum 1/n * prod log_k(n)**a_k: the first exponent different from -1 decides
    for a in h.log_exponents:
        if a != -1.0:
            return "convergent" if a < -1.0 else "divergent"
    return "divergent"


def blaschke_sum(seq: ZeroSequence, h: Weight) -> SumReport:
    gaps = seq.gaps
    terms = np.asarray(h(np.maximum(gaps, np.finfo(float).tiny)), dtype=float)
    terms = np.where(gaps > 0, terms, 0.0)
    partial = math.fsum(np.sort(terms))
    extended = int(np.count_nonzero(gaps >= h.domain_cutoff))
    gen = seq.generator
    if gen is None:
        return SumReport(partial, 0.0, "convergent", len(seq), extended)
    verdict = _series_verdict(gen, h)
    if verdict == "divergent":
        tail = math.inf
    elif _pure_power(h):
        tail = gen.tail_power_sum(len(seq), h.alpha)
    else:
        tail = None
    return SumReport(partial, tail, verdict, len(seq), extended)


def counting_fn(seq: ZeroSequence, t):
    """n(t): number of zeros with |z_n| <= t."""
    out = np.searchsorted(seq.sorted_radii, t, side="right")
    return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class CountingProfile:
    thresholds: np.ndarray
    counts: np.ndarray
    decay_products: np.ndarray

    @property
    def decaying(self) -> bool:
        q = max(1, self.decay_products.size // 4)
        return bool(np.all(self.decay_products[-q:] < np.min(self.decay_products[:q])))

    @property
    def verdict(self) -> str:
        return "decaying" if self.decaying else "not-decaying"


def decay_grid(seq: ZeroSequence, h: Weight, points: int = 64) -> np.ndarray:
    """Thresholds t with 1 - t geometric between the weight cutoff and the last zero.

    Stopping at the truncation radius keeps the saturated part of n(t)
    (which decays for any finite list) out of the diagnostic.
    """
    top = h.domain_cutoff * (1.0 - 1e-9)
    bottom = max(1.0 - seq.sorted_radii[-1], 1e-300)
    if bottom >= top:
        raise DomainError("every zero lies inside the cutoff disc; nothing to profile")
    return 1.0 - np.geomspace(top, bottom, points)


def counting_decay_profile(seq: ZeroSequence, h: Weight, grid: Sequence[float] | None = None) -> CountingProfile:
    t = decay_grid(seq, h) if grid is None else np.asarray(grid, dtype=float)
    if np.any(t <= 1.0 - h.domain_cutoff) or np.any(t >= 1.0):
        raise DomainError(f"grid must lie in ({1.0 - h.domain_cutoff!r}, 1)")
    counts = counting_fn(seq, t)
    return CountingProfile(t, counts, counts * np.asarray(h(1.0 - t)))


@dataclass(frozen=True)
class DensityReport:
    max_ratio: float
    ratios: list  # (r, delta, ratio)
    skipped: list  # (r, delta) with n(r) = 0


def density_condition_check(seq: ZeroSequence, samples) -> DensityReport:
    """Empirical constant C in n(r + d) - n(r - d) <= C d n(r) / (1 - r)."""
    ratios, skipped = [], []
    for r, d in samples:
        if not (0.0 < d < min(r, 1.0 - r)):
            raise DomainError(f"need 0 < delta < min(r, 1 - r), got r={r!r}, delta={d!r}")
        nr = counting_fn(seq, r)
        if nr == 0:
            skipped.append((r, d))
            continue
        window = counting_fn(seq, r + d) - counting_fn(seq, r - d)
        ratios.append((r, d, window * (1.0 - r) / (d * nr)))
    max_ratio = max((x[2] for x in ratios), default=math.nan)
    return DensityReport(max_ratio, ratios, skipped)


def ladder_samples(kmin: int, kmax: int) -> list[tuple[float, float]]:
    """(r, delta) pairs r = 1 - 2**-k, delta = (1 - r)/2."""
    return [(1.0 - 2.0**-k, 2.0 ** -(k + 1)) for k in range(kmin, kmax + 1)]
