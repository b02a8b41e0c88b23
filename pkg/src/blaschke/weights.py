"""Admissible weight functions h.

A weight is admissible when it is continuous, positive and increasing with
h(0+) = 0 and h(t)/t is decreasing.  The prototype family is

    h(t) = t**alpha * log(1/t)**a1 * log(log(1/t))**a2 * ...

and arbitrary tabulated weights are accepted so that the almost-monotone
relaxation (monotone up to a multiplicative constant) can be exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

REL_TOL = 1e-12
# smallest t used when probing a prototype numerically; kept above the
# double-precision normal range so iterated logs stay finite
PROTOTYPE_FLOOR = 1e-300


def _iterated_exp_one(m: int) -> float:
    """exp(exp(...exp(1))) with m exponentials, i.e. the t-threshold 1/t."""
    x = 1.0
    for _ in range(m):
        x = math.exp(x)
    return x


def _iterated_logs(t, m: int) -> list[np.ndarray]:
    """[log(1/t), log(log(1/t)), ...] up to depth m."""
    out = []
    x = -np.log(t)
    for _ in range(m):
        out.append(x)
        x = np.log(x)
    return out


class _Weight:
    """Shared behaviour of prototype and tabulated weights."""

    almost_constant: float
    domain_cutoff: float
    grid_floor: float

    def _raw(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        """Evaluate h, extended by the constant h(domain_cutoff) to the right.

        The constant extension keeps both monotonicity conditions, so the
        proof inequalities stay valid for arguments up to 1.
        """
        arr = np.asarray(t, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("weight evaluated at t <= 0")
        clipped = np.minimum(arr, self.domain_cutoff)
        out = self._raw(clipped)
        if np.ndim(out) == 0:
            return float(out)
        return out

    @property
    def power_exponent(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class WeightFunction(_Weight):
    alpha: float
    log_exponents: tuple[float, ...] = ()
    almost_constant: float = 1.0
    domain_cutoff: float = field(init=False)
    grid_floor: float = field(init=False, default=PROTOTYPE_FLOOR)

    def __post_init__(self):
        object.__setattr__(self, "log_exponents", tuple(float(a) for a in self.log_exponents))
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.almost_constant < 1.0:
            raise DomainError(f"almost_constant must be >= 1, got {self.almost_constant}")
        if self.alpha == 1.0:
            nonzero = [a for a in self.log_exponents if a != 0.0]
            if nonzero and nonzero[0] < 0:
                raise DomainError(
                    "alpha = 1 requires the first nonzero log exponent to be positive"
                )
        object.__setattr__(self, "domain_cutoff", self._find_cutoff())

    def _find_cutoff(self) -> float:
        m = len(self.log_exponents)
        cut = 0.5 / _iterated_exp_one(m)
        if not cut > 0:
            raise DomainError(f"{m} iterated logs exceed double precision range")
        # shrink until the elasticity t h'(t)/h(t) stays in [0, 1] below cut,
        # which is exactly "h increasing and h(t)/t decreasing"
        for _ in range(2000):
            if cut <= PROTOTYPE_FLOOR * 1e10:
                break
            ts = np.geomspace(PROTOTYPE_FLOOR, cut, 4000)
            e = self.elasticity(ts)
            if np.all(e >= -REL_TOL) and np.all(e <= 1.0 + REL_TOL):
                return float(cut)
            cut *= 0.5
        raise DomainError(
            f"no admissible domain above {PROTOTYPE_FLOOR} for alpha={self.alpha}, logs={self.log_exponents}"
        )

    def elasticity(self, t):
        """d log h / d log t; lies in [0, 1] exactly where h is admissible."""
        t = np.asarray(t, dtype=float)
        logs = _iterated_logs(t, len(self.log_exponents))
        e = np.full(t.shape, self.alpha)
        prod = np.ones(t.shape)
        for a, lk in zip(self.log_exponents, logs):
            prod = prod * lk
            if a != 0.0:
                e = e - a / prod
        return e

    def _raw(self, t):
        logs = _iterated_logs(t, len(self.log_exponents))
        out = t**self.alpha
        for a, lk in zip(self.log_exponents, logs):
            if a != 0.0:
                out = out * lk**a
        return out

    @property
    def power_exponent(self) -> float:
        return self.alpha

    def to_record(self) -> dict:
        return {
            "alpha": self.alpha,
            "log_exponents": list(self.log_exponents),
            "almost_constant": self.almost_constant,
        }


@dataclass(frozen=True, eq=False)
class TabulatedWeight(_Weight):
    """Weight given by samples (t_i, h_i) on a log-spaced table.

    Interpolation is linear in log-log coordinates, which preserves the
    monotonicity of both h and h(t)/t between nodes.  Below the first node
    the first segment is extended as a power law.
    """

    ts: np.ndarray
    hs: np.ndarray
    almost_constant: float = 1.0
    domain_cutoff: float = field(init=False)
    grid_floor: float = field(init=False)

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        hs = np.asarray(self.hs, dtype=float)
        if ts.ndim != 1 or ts.shape != hs.shape or ts.size < 2:
            raise DomainError("table needs at least two (t, h) pairs of equal length")
        if np.any(np.diff(ts) <= 0) or ts[0] <= 0 or ts[-1] >= 1:
            raise DomainError("table abscissae must be strictly increasing inside (0, 1)")
        if np.any(hs <= 0):
            raise DomainError("table values must be positive")
        if self.almost_constant < 1.0:
            raise DomainError(f"almost_constant must be >= 1, got {self.almost_constant}")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "hs", hs)
        object.__setattr__(self, "domain_cutoff", float(ts[-1]))
        object.__setattr__(self, "grid_floor", float(ts[0]))

    def _raw(self, t):
        lt, lx, ly = np.log(t), np.log(self.ts), np.log(self.hs)
        y = np.interp(lt, lx, ly)
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        y = np.where(lt < lx[0], ly[0] + slope * (lt - lx[0]), y)
        return np.exp(y)

    @property
    def power_exponent(self) -> float:
        lx, ly = np.log(self.ts[:2]), np.log(self.hs[:2])
        return float((ly[1] - ly[0]) / (lx[1] - lx[0]))

    def to_record(self) -> dict:
        return {
            "table": [[float(a), float(b)] for a, b in zip(self.ts, self.hs)],
            "almost_constant": self.almost_constant,
        }


Weight = WeightFunction | TabulatedWeight


def weight_from_record(rec: dict) -> Weight:
    """Build a weight from its serialized record (see ``to_record``)."""
    if "table" in rec:
        table = np.asarray(rec["table"], dtype=float)
        return TabulatedWeight(table[:, 0], table[:, 1], float(rec.get("almost_constant", 1.0)))
    if "alpha" not in rec:
        raise DomainError("weight record needs 'alpha' or 'table'")
    return WeightFunction(
        float(rec["alpha"]),
        tuple(rec.get("log_exponents", ())),
        float(rec.get("almost_constant", 1.0)),
    )


def eval_h(h: Weight, t: float) -> float:
    """h(t) for 0 < t < h.domain_cutoff; raises DomainError otherwise."""
    if not (0.0 < t < h.domain_cutoff):
        raise DomainError(f"t = {t!r} outside (0, {h.domain_cutoff!r})")
    return float(h(t))


@dataclass(frozen=True)
class AdmissibilityReport:
    increasing: bool
    ratio_decreasing: bool
    vanishes_at_zero: bool
    worst_increase: float  # max over s <= t of h(s)/h(t)
    worst_ratio: float  # max over s <= t of (h(t)/t)/(h(s)/s)
    grid_size: int

    @property
    def admissible(self) -> bool:
        return self.increasing and self.ratio_decreasing and self.vanishes_at_zero


def check_admissible(h: Weight, grid_size: int = 10_000) -> AdmissibilityReport:
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2")
    # stay strictly inside the domain at the top end
    top = h.domain_cutoff * (1.0 - 1e-9)
    ts = np.geomspace(h.grid_floor, top, grid_size)
    hv = np.asarray(h(ts), dtype=float)
    g = hv / ts
    K = h.almost_constant * (1.0 + REL_TOL)

    run_max = np.maximum.accumulate(hv)
    worst_inc = float(np.max(run_max / hv))
    run_min = np.minimum.accumulate(g)
    worst_ratio = float(np.max(g / run_min))
    return AdmissibilityReport(
        increasing=worst_inc <= K,
        ratio_decreasing=worst_ratio <= K,
        vanishes_at_zero=bool(hv[0] < 1e-6 * hv[-1]),
        worst_increase=worst_inc,
        worst_ratio=worst_ratio,
        grid_size=grid_size,
    )


def transfer_ratio(h: Weight, s: float, t: float) -> float:
    """(s/t) * h(t)/h(s); at most almost_constant**2 for admissible h."""
    if s > t:
        raise DomainError(f"transfer_ratio needs s <= t, got s={s!r}, t={t!r}")
    return (s / t) * (eval_h(h, t) / eval_h(h, s))
