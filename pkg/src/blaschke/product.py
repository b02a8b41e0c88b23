"""Evaluation of B(z) and B'(z)/B(z) with certified truncation tails."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError
from .weights import Weight
from .zeros import ZeroSequence, counting_fn

POLE_GUARD = 1e-14
_ROW_CHUNK = 256
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Evaluation:
    value: complex
    tail_bound: float
    terms_used: int
    tail_available: bool = True


@dataclass(frozen=True)
class SplitEvaluation:
    far_sum: complex
    near_sum: complex
    delta: float
    far_bound: float
    near_bound: float
    near_count: int  # n(|z| + delta) - n(|z| - delta)
    near_certified: bool  # every near zero keeps |z| outside its exceptional interval

    @property
    def value(self) -> complex:
        return self.far_sum + self.near_sum


def _check_point(z) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"|z| = {abs(z)!r} is not < 1")
    return z


def csum(terms) -> complex:
    """Correctly rounded sum of complex terms (real and imaginary parts separately).

    The result does not depend on the order of the terms.
    """
    terms = np.asarray(terms, dtype=complex)
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def logderiv_terms(seq: ZeroSequence, z: complex) -> np.ndarray:
    """Series terms (1 - |a|^2) / ((1 - conj(a) z)(z - a)); a zero at 0 gives 1/z."""
    a = seq.points
    d = z - a
    if np.min(np.abs(d)) <= POLE_GUARD:
        k = int(np.argmin(np.abs(d)))
        raise PoleError(f"z = {z!r} within {POLE_GUARD} of zero #{k + 1} at {a[k]!r}")
    return (1.0 - seq.radii**2) / ((1.0 - np.conj(a) * z) * d)


def eval_B(seq: ZeroSequence, z) -> Evaluation:
    z = _check_point(z)
    a = seq.points
    # |a|/a; a zero at the origin gets the convention factor -z
    unimod = np.where(seq.radii > 0, np.exp(-1j * seq.angles), 1.0)
    value = complex(np.prod(unimod * (a - z) / (1.0 - np.conj(a) * z)))
    if seq.generator is None:
        return Evaluation(value, 0.0, len(seq))
    # |1 - b_n(z)| <= 2 (1 - r_n) / (1 - |z|), and |prod(1 + u_n) - 1| <= exp(sum |u_n|) - 1
    s = 2.0 * seq.generator.tail_gap_sum(len(seq)) / (1.0 - abs(z))
    tail = abs(value) * math.expm1(s) if math.isfinite(s) else math.inf
    return Evaluation(value, tail, len(seq), math.isfinite(tail))


def logderiv_tail(seq: ZeroSequence, z: complex) -> tuple[float, bool]:
    gen = seq.generator
    if gen is None:
        return 0.0, True
    r_tail = gen.first_tail_radius(len(seq))
    az = abs(z)
    if az >= r_tail:
        return math.inf, False
    bound = 2.0 * gen.tail_gap_sum(len(seq)) / ((1.0 - az) * (r_tail - az))
    return bound, math.isfinite(bound)


def eval_logderiv(seq: ZeroSequence, z) -> Evaluation:
    z = _check_point(z)
    value = csum(logderiv_terms(seq, z))
    tail, ok = logderiv_tail(seq, z)
    return Evaluation(value, tail, len(seq), ok)


def _term_rows(seq: ZeroSequence, zs: np.ndarray):
    """Yield (offset, term matrix) over chunks of evaluation points."""
    a = seq.points
    num = 1.0 - seq.radii**2
    for lo in range(0, zs.size, _ROW_CHUNK):
        zc = zs[lo:lo + _ROW_CHUNK, None]
        d = zc - a[None, :]
        if np.min(np.abs(d)) <= POLE_GUARD:
            raise PoleError("evaluation point within pole guard of a zero")
        yield lo, num / ((1.0 - np.conj(a)[None, :] * zc) * d)


def _fsum_rows(T: np.ndarray) -> np.ndarray:
    re, im = T.real.tolist(), T.imag.tolist()
    return np.array([complex(math.fsum(x), math.fsum(y)) for x, y in zip(re, im)], dtype=complex)


def eval_logderiv_many(seq: ZeroSequence, zs) -> np.ndarray:
    """B'/B at many points; same summation as ``eval_logderiv`` without tail bounds."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if zs.size and np.max(np.abs(zs)) >= 1.0:
        raise DomainError("all points must satisfy |z| < 1")
    out = np.empty(zs.size, dtype=complex)
    for lo, T in _term_rows(seq, zs):
        out[lo:lo + T.shape[0]] = _fsum_rows(T)
    return out


@dataclass(frozen=True, eq=False)
class RingSplit:
    """Near/far split of B'/B on the circle |z| = r, one entry per angle."""

    far_sums: np.ndarray
    near_sums: np.ndarray
    delta: float
    far_bound: float
    near_bound: float
    near_count: int
    near_certified: bool

    @property
    def values(self) -> np.ndarray:
        return self.far_sums + self.near_sums


def _split_bounds(seq: ZeroSequence, az: float, delta: float, h: Weight, beta: float):
    # 1 - |z| carries an absolute rounding error of about eps; allow it so that
    # delta = (1 - r)/2 is accepted at z = r e^{i theta}
    if not (0.0 < delta <= (1.0 - az) / 2.0 + 2.0 * _EPS):
        raise DomainError(f"delta must lie in (0, (1-|z|)/2] = (0, {(1.0 - az) / 2.0!r}], got {delta!r}")
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    gaps = seq.gaps
    dist = np.abs(az - seq.radii)
    far = dist >= delta
    hz = h(1.0 - az)
    far_bound = 2.0 * h.almost_constant**2 * math.fsum(np.asarray(h(gaps)).tolist()) / (delta * hz)
    count = counting_fn(seq, az + delta) - counting_fn(seq, az - delta)
    near_bound = near_constant(h, beta) * count / ((1.0 - az) ** beta * hz)
    near = ~far
    hw = gaps[near] ** beta * np.asarray(h(gaps[near]))
    certified = bool(np.all((dist[near] >= hw) & (seq.radii[near] - hw > 0)))
    return far, far_bound, near_bound, int(count), certified


def ring_split(seq: ZeroSequence, r: float, thetas, delta: float, h: Weight, beta: float = 1.0) -> RingSplit:
    """``eval_logderiv_split`` at every point r e^{i theta}; the partition depends on r only."""
    _check_point(r)
    far, far_bound, near_bound, count, certified = _split_bounds(seq, r, delta, h, beta)
    zs = r * np.exp(1j * np.asarray(thetas, dtype=float))
    far_sums = np.empty(zs.size, dtype=complex)
    near_sums = np.empty(zs.size, dtype=complex)
    for lo, T in _term_rows(seq, zs):
        far_sums[lo:lo + T.shape[0]] = _fsum_rows(T[:, far])
        near_sums[lo:lo + T.shape[0]] = _fsum_rows(T[:, ~far])
    return RingSplit(far_sums, near_sums, delta, far_bound, near_bound, count, certified)


def near_constant(h: Weight, beta: float) -> float:
    """Constant in |term| <= C / ((1-|z|)^beta h(1-|z|)) for zeros with ||z|-r_n| < (1-|z|)/2."""
    return 2.0 ** (beta + 2.0) * h.almost_constant**2


def eval_logderiv_split(seq: ZeroSequence, z, delta: float, h: Weight, beta: float = 1.0) -> SplitEvaluation:
    """Split the series at ||z| - r_n| = delta and evaluate both proof-side bounds.

    far_bound  = 2 K^2 sum h(1 - r_n) / (delta h(1 - |z|))
    near_bound = 2^(beta+2) K^2 (n(|z|+delta) - n(|z|-delta)) / ((1-|z|)^beta h(1-|z|))
    with K the almost-monotonicity constant of h.  The near bound is only
    guaranteed when |z| avoids the exceptional intervals of the near zeros;
    ``near_certified`` records whether it does.
    """
    z = _check_point(z)
    far, far_bound, near_bound, count, certified = _split_bounds(seq, abs(z), delta, h, beta)
    terms = logderiv_terms(seq, z)
    near = ~far
    return SplitEvaluation(
        far_sum=csum(terms[far]),
        near_sum=csum(terms[near]),
        delta=delta,
        far_bound=far_bound,
        near_bound=near_bound,
        near_count=count,
        near_certified=certified,
    )


def remark1_delta(h: Weight, beta: float, r: float) -> float:
    """delta = (1 - r)^((1+beta)/2) h(1 - r)^(1/2); warns if it exceeds (1 - r)/2."""
    if not (1.0 - h.domain_cutoff < r < 1.0):
        raise DomainError(f"r = {r!r} outside ({1.0 - h.domain_cutoff!r}, 1)")
    if beta < 1.0:
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    t = 1.0 - r
    d = t ** ((1.0 + beta) / 2.0) * math.sqrt(h(t))
    if d > t / 2.0:
        warnings.warn(f"remark1 delta {d!r} exceeds (1 - r)/2 = {t / 2.0!r} at r = {r!r}", stacklevel=2)
    return d
