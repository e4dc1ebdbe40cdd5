"""
Choosing (r_A, r_B).

Two integer programs over positive pairs with Q = (r_A+l)(r_B+1)-1 <= N:

* rate maximization: maximize r_A r_B / Q;
* threshold minimization: minimize Q subject to r_A r_B / Q >= R_th.

Both are solved exactly by enumerating every feasible pair, and
approximately by the closed-form estimators in :func:`theorem1_estimate`
and :func:`theorem2_estimate`. Rates are compared as exact rationals.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Sequence

import numpy as np

from .codec import exploited_servers
from .errors import (
    InfeasibleRateThreshold,
    NoFeasiblePartition,
    NoSatisfyingRA,
    PreconditionError,
)

THREADS_ENV = "ALIGNED_SMM_THREADS"


@total_ordering
@dataclass(frozen=True)
class RationalRate:
    """r_A r_B / Q kept unreduced; ordering uses cross-multiplication."""

    num: int
    den: int

    def __post_init__(self):
        if not 0 < self.num <= self.den:
            raise PreconditionError(f"rate {self.num}/{self.den} outside (0, 1]")

    @classmethod
    def of(cls, r_A: int, r_B: int, ell: int) -> "RationalRate":
        return cls(r_A * r_B, exploited_servers(r_A, r_B, ell))

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __eq__(self, other):
        if isinstance(other, RationalRate):
            return self.num * other.den == other.num * self.den
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, RationalRate):
            return self.num * other.den < other.num * self.den
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() < other
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __float__(self):
        return self.num / self.den

    def __str__(self):
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class OptimizationResult:
    N: int
    ell: int
    r_A: int
    r_B: int
    Q: int
    rate: RationalRate
    method: str
    feasible: bool

    @classmethod
    def make(cls, N: int, ell: int, r_A: int, r_B: int, method: str) -> "OptimizationResult":
        Q = exploited_servers(r_A, r_B, ell)
        return cls(N, ell, r_A, r_B, Q, RationalRate.of(r_A, r_B, ell), method, Q <= N)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "ell": self.ell, "r_A": self.r_A, "r_B": self.r_B, "Q": self.Q,
            "rate": str(self.rate), "rate_decimal": format(float(self.rate), ".17g"),
            "method": self.method, "feasible": self.feasible,
        }


def max_ell(N: int) -> int:
    """Largest collusion level with a non-zero rate, floor((N-1)/2)."""
    return (N - 1) // 2


def _check_rate_problem(N: int, ell: int):
    if N < 3:
        raise NoFeasiblePartition(f"N={N}: the smallest scheme needs Q=3 servers")
    if ell < 1:
        raise PreconditionError(f"ell must be >= 1, got {ell}")
    if ell > max_ell(N):
        raise NoFeasiblePartition(f"ell={ell} > floor((N-1)/2)={max_ell(N)} for N={N}")


def _as_fraction(value) -> Fraction:
    if isinstance(value, RationalRate):
        return value.as_fraction()
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def feasible_pairs(N: int, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """Every positive pair (r_A, r_B) with Q <= N, as two int64 arrays."""
    b_max = (N + 1) // (1 + ell) - 1
    if b_max < 1:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    r_b = np.arange(1, b_max + 1, dtype=np.int64)
    a_max = (N + 1) // (r_b + 1) - ell
    keep = a_max >= 1
    r_b, a_max = r_b[keep], a_max[keep]
    total = int(a_max.sum())
    starts = np.repeat(np.cumsum(a_max) - a_max, a_max)
    r_a = np.arange(total, dtype=np.int64) - starts + 1
    return r_a, np.repeat(r_b, a_max)


def _pick(candidates: np.ndarray, keys: Sequence[np.ndarray]) -> int:
    """Index into ``candidates`` maximizing ``keys`` lexicographically."""
    idx = candidates
    for key in keys:
        vals = key[idx]
        idx = idx[vals == vals.max()]
    return int(idx[0])


def exhaustive_rate_opt(N: int, ell: int) -> OptimizationResult:
    """Optimal partition for rate maximization, by enumerating every feasible pair.

    Among rate maximizers the smaller Q wins, then the larger r_A.
    """
    _check_rate_problem(N, ell)
    r_a, r_b = feasible_pairs(N, ell)
    num = r_a * r_b
    den = (r_a + ell) * (r_b + 1) - 1
    # num < den <= N, so cross products stay far inside int64
    best = int(np.argmax(num / den))
    while True:
        better = np.flatnonzero(num * den[best] > num[best] * den)
        if better.size == 0:
            break
        best = int(better[0])
    ties = np.flatnonzero(num * den[best] == num[best] * den)
    i = _pick(ties, (-den, r_a))
    return OptimizationResult.make(N, ell, int(r_a[i]), int(r_b[i]), "exhaustive")


def theorem1_r_B(N: int, ell: int) -> int:
    """max{1, ceil(-3/2 + sqrt(1/4 + N/l))}, in integer arithmetic.

    The ceiling is the least integer m with l(m+1)(m+2) >= N.
    """
    target = -(-N // ell)  # (m+1)(m+2) is integral, so compare with ceil(N/l)
    m = max(math.isqrt(target) - 2, -1)
    while (m + 1) * (m + 2) < target:
        m += 1
    while m > -1 and m * (m + 1) >= target:
        m -= 1
    return max(1, m)


def largest_r_A(N: int, ell: int, r_B: int) -> int:
    """Largest r_A with Q <= N for this r_B (may be < 1 when none exists)."""
    return (N + 1) // (r_B + 1) - ell


def theorem1_estimate(N: int, ell: int) -> OptimizationResult:
    _check_rate_problem(N, ell)
    r_B = theorem1_r_B(N, ell)
    r_A = largest_r_A(N, ell, r_B)
    if r_A < 1:
        res = OptimizationResult.make(N, ell, 1, r_B, "theorem1")
        return OptimizationResult(N, ell, 1, r_B, res.Q, res.rate, "theorem1", False)
    return OptimizationResult.make(N, ell, r_A, r_B, "theorem1")


def _check_threshold(N: int, ell: int, R_th) -> tuple[Fraction, OptimizationResult]:
    R = _as_fraction(R_th)
    if not 0 < R < 1:
        raise PreconditionError(f"rate threshold must lie in (0, 1), got {R}")
    best = exhaustive_rate_opt(N, ell)
    if R > best.rate.as_fraction():
        raise InfeasibleRateThreshold(
            f"R_th={R} exceeds the best achievable rate {best.rate} for N={N}, ell={ell}")
    return R, best


def smallest_r_A(r_B: int, ell: int, R_th) -> int:
    """Smallest r_A >= 1 with r_A r_B / Q >= R_th at fixed r_B.

    r_A r_B >= R((r_A+l)(r_B+1)-1) rearranges to
    r_A (r_B - R(r_B+1)) >= R(l(r_B+1)-1), solvable only while R < r_B/(r_B+1).
    """
    R = _as_fraction(R_th)
    slope = r_B - R * (r_B + 1)
    if slope <= 0:
        raise NoSatisfyingRA(
            f"rate {R} is not below the r_A -> infinity limit {r_B}/{r_B + 1}")
    return max(1, math.ceil(R * (ell * (r_B + 1) - 1) / slope))


def exhaustive_threshold_opt(N: int, ell: int, R_th) -> OptimizationResult:
    """Minimum-Q partition reaching rate R_th, by enumerating every feasible pair.

    Among Q minimizers the higher rate wins, then the larger r_A.
    """
    R, _ = _check_threshold(N, ell, R_th)
    r_a, r_b = feasible_pairs(N, ell)
    num = (r_a * r_b).astype(object)
    den = ((r_a + ell) * (r_b + 1) - 1).astype(object)
    ok = np.flatnonzero(num * R.denominator >= den * R.numerator)
    # ok is non-empty because R <= R*
    q_vals = ((r_a + ell) * (r_b + 1) - 1)
    ok = ok[q_vals[ok] == q_vals[ok].min()]
    # same Q on every candidate, so higher rate == larger r_A r_B
    i = _pick(ok, (r_a * r_b, r_a))
    return OptimizationResult.make(N, ell, int(r_a[i]), int(r_b[i]), "exhaustive")


def theorem2_r_B(R_th) -> int:
    R = _as_fraction(R_th)
    return max(1, math.ceil(2 / (1 - R) - 2))


def theorem2_estimate(N: int, ell: int, R_th) -> OptimizationResult:
    """Closed-form partition for threshold minimization.

    r_B = max{1, ceil(2/(1-R_th) - 2)} and r_A is the smallest value meeting
    the rate. ``feasible`` is False when the pair needs more than N servers.
    """
    R, _ = _check_threshold(N, ell, R_th)
    r_B = theorem2_r_B(R)
    r_A = smallest_r_A(r_B, ell, R)
    return OptimizationResult.make(N, ell, r_A, r_B, "theorem2")


def is_strongly_feasible(N: int, ell: int, r_A: int, r_B: int) -> bool:
    Q = exploited_servers
    return (Q(r_A, r_B, ell) <= N
            and Q(r_A + 1, r_B, ell) > N
            and Q(r_A, r_B + 1, ell) > N)


def breakpoint_estimate(N: int, m: int) -> Fraction:
    """Estimated collusion level N / (m(m+1)) at which the estimated r_B climbs to m."""
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    return Fraction(N, m * (m + 1))


def best_equal_partition(N: int, ell: int) -> OptimizationResult:
    """Best r_A = r_B = r; rate grows with r, so this is the largest feasible r."""
    _check_rate_problem(N, ell)
    r = 1
    while exploited_servers(r + 1, r + 1, ell) <= N:
        r += 1
    return OptimizationResult.make(N, ell, r, r, "equal")


def ct_tolerance(N: int) -> int:
    """floor(sqrt(N) - 1), the collusion tolerance of the Chang-Tandon scheme."""
    return math.isqrt(N) - 1


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class GapRow:
    ell: int
    optimal_rate: RationalRate
    estimate_rate: RationalRate
    additive_gap: Fraction
    estimate_suboptimal: bool


@dataclass(frozen=True)
class GapSweep:
    N: int
    rows: tuple[GapRow, ...]
    max_gap: Fraction
    suboptimal_count: int


@dataclass(frozen=True)
class RateRow:
    ell: int
    exhaustive: OptimizationResult
    theorem1: OptimizationResult
    equal: OptimizationResult
    one_sided_bound: Fraction
    ct_tolerated: bool


def _workers(workers: int | None) -> int:
    cap = int(os.environ.get(THREADS_ENV, "0") or 0)
    w = workers if workers is not None else (cap or 1)
    return max(1, min(w, cap) if cap else w)


def _map_ells(fn, N: int, ells: Sequence[int], workers: int | None):
    w = _workers(workers)
    if w == 1 or len(ells) < 64:
        return [fn(N, ell) for ell in ells]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, [N] * len(ells), ells, chunksize=max(1, len(ells) // (4 * w))))


def _gap_row(N: int, ell: int) -> GapRow:
    opt = exhaustive_rate_opt(N, ell)
    est = theorem1_estimate(N, ell)
    gap = opt.rate.as_fraction() - est.rate.as_fraction() if est.feasible else opt.rate.as_fraction()
    return GapRow(ell, opt.rate, est.rate, gap, gap > 0 or not est.feasible)


def gap_sweep(N: int, workers: int | None = None) -> GapSweep:
    """Exhaustive optimum against the closed-form estimate for every l in [1, floor((N-1)/2)]."""
    if N < 3:
        raise PreconditionError(f"N must be >= 3, got {N}")
    rows = tuple(_map_ells(_gap_row, N, range(1, max_ell(N) + 1), workers))
    return GapSweep(N, rows, max(r.additive_gap for r in rows),
                    sum(r.estimate_suboptimal for r in rows))


def _rate_row(N: int, ell: int) -> RateRow:
    return RateRow(ell, exhaustive_rate_opt(N, ell), theorem1_estimate(N, ell),
                   best_equal_partition(N, ell), Fraction(N - ell, N), ell <= ct_tolerance(N))


def rate_sweep(N: int, workers: int | None = None) -> list[RateRow]:
    if N < 3:
        raise PreconditionError(f"N must be >= 3, got {N}")
    return list(_map_ells(_rate_row, N, range(1, max_ell(N) + 1), workers))


# ---------------------------------------------------------------- tabular output

RATE_COLUMNS = (
    "ell",
    "r_A_exhaustive", "r_B_exhaustive", "rate_exhaustive", "rate_exhaustive_decimal",
    "r_A_theorem1", "r_B_theorem1", "rate_theorem1", "rate_theorem1_decimal",
    "r_A_equal", "rate_equal", "rate_equal_decimal",
    "one_sided_bound", "one_sided_bound_decimal",
    "ct_tolerated",
)

GAP_COLUMNS = (
    "ell", "optimal_rate", "optimal_rate_decimal", "estimate_rate", "estimate_rate_decimal",
    "additive_gap", "additive_gap_decimal", "estimate_suboptimal",
)


def _dec(x) -> str:
    return format(float(x), ".17g")


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def rate_records(rows: Sequence[RateRow]) -> list[dict]:
    return [{
        "ell": r.ell,
        "r_A_exhaustive": r.exhaustive.r_A, "r_B_exhaustive": r.exhaustive.r_B,
        "rate_exhaustive": str(r.exhaustive.rate), "rate_exhaustive_decimal": _dec(r.exhaustive.rate),
        "r_A_theorem1": r.theorem1.r_A, "r_B_theorem1": r.theorem1.r_B,
        "rate_theorem1": str(r.theorem1.rate), "rate_theorem1_decimal": _dec(r.theorem1.rate),
        "r_A_equal": r.equal.r_A,
        "rate_equal": str(r.equal.rate), "rate_equal_decimal": _dec(r.equal.rate),
        "one_sided_bound": _frac(r.one_sided_bound),
        "one_sided_bound_decimal": _dec(r.one_sided_bound),
        "ct_tolerated": r.ct_tolerated,
    } for r in rows]


def gap_records(sweep: GapSweep) -> list[dict]:
    return [{
        "ell": r.ell,
        "optimal_rate": str(r.optimal_rate), "optimal_rate_decimal": _dec(r.optimal_rate),
        "estimate_rate": str(r.estimate_rate), "estimate_rate_decimal": _dec(r.estimate_rate),
        "additive_gap": _frac(r.additive_gap), "additive_gap_decimal": _dec(r.additive_gap),
        "estimate_suboptimal": r.estimate_suboptimal,
    } for r in sweep.rows]


def to_csv(records: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: str(v).lower() if isinstance(v, bool) else v for k, v in rec.items()})
    return buf.getvalue()


def gap_summary(sweep: GapSweep) -> dict:
    return {
        "N": sweep.N,
        "max_gap": _frac(sweep.max_gap),
        "max_gap_decimal": _dec(sweep.max_gap),
        "suboptimal_count": sweep.suboptimal_count,
    }


def to_json(records: Sequence[dict], **extra) -> str:
    return json.dumps({**extra, "rows": list(records)}, indent=2)
