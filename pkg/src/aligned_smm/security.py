"""
Collusion security checks.

The key-dependent part of what a coalition L of l servers sees is
M_A @ (KA_1..KA_l) and M_B @ (KB_1..KB_l), where M_A, M_B are l x l
matrices of powers of the coalition's points. If both are invertible the
uniform keys act as a one-time pad on the shares, so the view of L is
independent of (A, B). :func:`masking_matrix_check` certifies this
algebraically; :func:`leakage_oracle` checks the same conclusion by brute
force on fields small enough to enumerate every key.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import Counter
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .codec import SchemeParams, encoding_exponents
from .errors import ParameterBoxTooLarge, PreconditionError
from .ffield import determinant, is_prime


@dataclass(frozen=True)
class CollusionReport:
    ell: int
    subsets_checked: int
    all_invertible: bool
    failing_subset: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        out = {"ell": self.ell, "subsets_checked": self.subsets_checked,
               "all_invertible": self.all_invertible}
        if self.failing_subset is not None:
            out["failing_subset"] = list(self.failing_subset)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def masking_matrices(points: Sequence[int], r_A: int, r_B: int, ell: int,
                     q: int) -> tuple[list[list[int]], list[list[int]]]:
    """Key-coefficient matrices (rows: coalition members, cols: key index)."""
    a_exp, b_exp = encoding_exponents(r_A, r_B, ell)
    a_key, b_key = a_exp[r_A:], b_exp[r_B:]
    m_a = [[pow(x, e, q) for e in a_key] for x in points]
    m_b = [[pow(x, e, q) for e in b_key] for x in points]
    return m_a, m_b


def _subsets(N: int, ell: int, mode: str, count: int | None, seed: int):
    if mode in ("all", "all_subsets"):
        yield from itertools.combinations(range(1, N + 1), ell)
    elif mode == "sampled":
        if not count or count < 1:
            raise PreconditionError("sampled mode needs a positive count")
        rng = random.Random(seed)
        for _ in range(count):
            yield tuple(sorted(rng.sample(range(1, N + 1), ell)))
    else:
        raise PreconditionError(f"unknown mode {mode!r}")


def masking_matrix_check(params: SchemeParams, r_A: int, r_B: int, mode: str = "all",
                         count: int | None = None, seed: int = 0) -> CollusionReport:
    """Check both masking matrices are invertible for every l-subset of servers.

    ``mode="sampled"`` checks ``count`` random subsets drawn with ``seed``,
    for when C(N, l) is too large to walk.
    """
    ell, q = params.ell, params.q
    checked = 0
    for subset in _subsets(params.N, ell, mode, count, seed):
        xs = [params.point(i).value for i in subset]
        m_a, m_b = masking_matrices(xs, r_A, r_B, ell, q)
        checked += 1
        if determinant(m_a, q) == 0 or determinant(m_b, q) == 0:
            return CollusionReport(ell, checked, False, subset)
    return CollusionReport(ell, checked, True)


def subset_count(N: int, ell: int) -> int:
    return comb(N, ell)


def leakage_oracle(q: int, ell: int, points: Sequence[int], r_A: int = 1,
                   r_B: int = 1) -> bool:
    """Exact zero-leakage check by enumerating every key.

    Works on 1 x 1 inputs over GF(q) with q <= 5, l <= 2 and at most 4
    servers. For every (A, B) the joint distribution of the shares held by
    every l-subset is tabulated over all q^(2l) keys; returns True iff these
    distributions do not depend on (A, B). Points are taken as given, zero
    included, so a broken layout can be fed in as a negative control.
    """
    if not is_prime(q) or q > 5:
        raise ParameterBoxTooLarge(f"q={q} must be a prime <= 5")
    if not 1 <= ell <= 2:
        raise ParameterBoxTooLarge(f"ell={ell} must be 1 or 2")
    if r_A != 1 or r_B != 1:
        raise ParameterBoxTooLarge("only r_A = r_B = 1 is enumerable")
    N = len(points)
    if not ell <= N <= 4:
        raise ParameterBoxTooLarge(f"need ell <= N <= 4, got N={N}")
    if q <= N:
        raise ParameterBoxTooLarge(f"GF({q}) cannot host {N} distinct evaluation points")
    xs = [int(x) % q for x in points]
    if len(set(xs)) != N:
        raise PreconditionError("evaluation points must be pairwise distinct")

    a_exp, b_exp = encoding_exponents(r_A, r_B, ell)
    coalitions = list(itertools.combinations(range(N), ell))
    reference = None
    for a, b in itertools.product(range(q), repeat=2):
        tables = [Counter() for _ in coalitions]
        for ka in itertools.product(range(q), repeat=ell):
            a_coef = (a,) + ka
            a_sh = [sum(c * pow(x, e, q) for c, e in zip(a_coef, a_exp)) % q for x in xs]
            for kb in itertools.product(range(q), repeat=ell):
                b_coef = (b,) + kb
                b_sh = [sum(c * pow(x, e, q) for c, e in zip(b_coef, b_exp)) % q for x in xs]
                for t, members in zip(tables, coalitions):
                    t[tuple((a_sh[i], b_sh[i]) for i in members)] += 1
        if reference is None:
            reference = tables
        elif tables != reference:
            return False
    return True
