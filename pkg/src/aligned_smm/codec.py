"""
Aligned secret sharing of a matrix product.

A is cut into r_A row blocks and B into r_B column blocks. Server i gets

    A~_i = sum_j A_j x_i^(j-1)            + sum_k KA_k x_i^(k+r_A-1)
    B~_i = sum_j B_j x_i^((j-1)(r_A+l))   + sum_k KB_k x_i^((k+r_A-1)+(r_B-1)(r_A+l))

and returns Z_i = A~_i B~_i, an evaluation of a matrix polynomial of degree
Q-1 with Q = (r_A+l)(r_B+1)-1. The exponents are laid out so that every
block product A_j B_j' owns a private exponent while the key-contaminated
terms pile up on shared ones. Any Q answers determine the polynomial, and
reading off the desired coefficients gives AB.
"""

from __future__ import annotations

import warnings
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    DivisibilityViolation,
    DuplicatePoint,
    InfeasiblePartition,
    MismatchedField,
    PreconditionError,
    TooFewAnswers,
)
from .ffield import (
    DEFAULT_PRIME,
    FieldElement,
    FieldMatrix,
    FieldPrime,
    as_prime,
    lagrange_coefficient_matrix,
    modmatmul,
    power_matrix,
    uniform_array,
)


def exploited_servers(r_A: int, r_B: int, ell: int) -> int:
    """Q = (r_A + l)(r_B + 1) - 1, the number of coefficients in the answer polynomial."""
    return (r_A + ell) * (r_B + 1) - 1


@dataclass(frozen=True)
class SchemeParams:
    N: int
    ell: int
    prime: FieldPrime = DEFAULT_PRIME
    points: tuple[FieldElement, ...] = ()

    def __post_init__(self):
        prime = as_prime(self.prime)
        object.__setattr__(self, "prime", prime)
        if self.N < 1:
            raise PreconditionError(f"need at least one server, got N={self.N}")
        if self.ell < 1:
            raise PreconditionError(f"collusion parameter must be >= 1, got {self.ell}")
        if self.ell > self.N:
            raise PreconditionError(f"ell={self.ell} exceeds N={self.N}")
        if prime.q <= self.N:
            raise PreconditionError(
                f"GF({prime.q}) has fewer than N={self.N} distinct nonzero points")
        points = self.points or tuple(range(1, self.N + 1))
        points = tuple(p if isinstance(p, FieldElement) else FieldElement(p, prime)
                       for p in points)
        if len(points) != self.N:
            raise PreconditionError(f"expected {self.N} evaluation points, got {len(points)}")
        if any(p.prime != prime for p in points):
            raise MismatchedField("evaluation points live in a different field")
        if any(p.value == 0 for p in points):
            raise PreconditionError("evaluation points must be nonzero")
        if len({p.value for p in points}) != self.N:
            raise DuplicatePoint("evaluation points must be pairwise distinct")
        object.__setattr__(self, "points", points)
        if self.ell > (self.N - 1) // 2:
            warnings.warn(
                f"ell={self.ell} > floor((N-1)/2)={(self.N - 1) // 2}: "
                "no partition fits on N servers", stacklevel=2)

    @property
    def q(self) -> int:
        return self.prime.q

    def point(self, server_index: int) -> FieldElement:
        if not 1 <= server_index <= self.N:
            raise PreconditionError(f"server index {server_index} outside [1, {self.N}]")
        return self.points[server_index - 1]


@dataclass(frozen=True)
class Partition:
    r_A: int
    r_B: int

    def __post_init__(self):
        if self.r_A < 1 or self.r_B < 1:
            raise PreconditionError(f"partition counts must be positive, got {self}")

    def Q(self, ell: int) -> int:
        return exploited_servers(self.r_A, self.r_B, ell)

    def is_feasible(self, N: int, ell: int) -> bool:
        return self.Q(ell) <= N


@dataclass(frozen=True)
class ExponentMap:
    """Which product terms land on each exponent of the answer polynomial.

    ``desired`` maps an exponent to the block (j, j') whose product sits
    there; ``interference`` maps an exponent to the set of key-contaminated
    terms, tagged ``("P2", k, j')``, ``("P3", j, k')`` or ``("P4", k, k')``.
    """

    Q: int
    desired: dict[int, tuple[int, int]]
    interference: dict[int, frozenset[tuple[str, int, int]]]

    @property
    def interference_count(self) -> int:
        return len(self.interference)

    def aligned_exponents(self) -> list[int]:
        return sorted(e for e, tags in self.interference.items() if len(tags) > 1)


def build_exponent_map(r_A: int, r_B: int, ell: int) -> ExponentMap:
    if min(r_A, r_B, ell) < 1:
        raise PreconditionError("r_A, r_B and ell must all be >= 1")
    stride = r_A + ell
    top = (r_B - 1) * stride
    desired: dict[int, tuple[int, int]] = {}
    interference: dict[int, set] = {}
    for j in range(1, r_A + 1):
        for jp in range(1, r_B + 1):
            e = j + (jp - 1) * stride - 1
            if e in desired:
                raise AssertionError(f"desired terms collide at exponent {e}")
            desired[e] = (j, jp)
    for k in range(1, ell + 1):
        for jp in range(1, r_B + 1):
            interference.setdefault(k + r_A + (jp - 1) * stride - 1, set()).add(("P2", k, jp))
    for j in range(1, r_A + 1):
        for kp in range(1, ell + 1):
            interference.setdefault(j + kp + (r_A - 1) + top - 1, set()).add(("P3", j, kp))
    for k in range(1, ell + 1):
        for kp in range(1, ell + 1):
            interference.setdefault(k + kp + 2 * (r_A - 1) + top, set()).add(("P4", k, kp))
    return ExponentMap(
        Q=exploited_servers(r_A, r_B, ell),
        desired=desired,
        interference={e: frozenset(tags) for e, tags in interference.items()},
    )


def encoding_exponents(r_A: int, r_B: int, ell: int) -> tuple[list[int], list[int]]:
    """Exponents of x_i multiplying (A_1..A_rA, KA_1..KA_l) and (B_1..B_rB, KB_1..KB_l)."""
    stride = r_A + ell
    a_exp = [j - 1 for j in range(1, r_A + 1)] + [k + r_A - 1 for k in range(1, ell + 1)]
    b_exp = ([(j - 1) * stride for j in range(1, r_B + 1)]
             + [(k + r_A - 1) + (r_B - 1) * stride for k in range(1, ell + 1)])
    return a_exp, b_exp


def recovery_threshold(part: Partition, ell: int) -> int:
    return part.Q(ell)


@dataclass(frozen=True)
class SharePair:
    server_index: int
    point: FieldElement
    A_tilde: FieldMatrix
    B_tilde: FieldMatrix


@dataclass(frozen=True)
class Answer:
    server_index: int
    point: FieldElement
    Z: FieldMatrix


@dataclass(frozen=True)
class Keys:
    """Explicit masking keys: ``ell`` blocks for A and ``ell`` blocks for B."""

    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]

    @classmethod
    def zeros(cls, ell: int, a_block: tuple[int, int], b_block: tuple[int, int]) -> "Keys":
        return cls(tuple(np.zeros(a_block, dtype=np.int64) for _ in range(ell)),
                   tuple(np.zeros(b_block, dtype=np.int64) for _ in range(ell)))


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _padded(values: np.ndarray, rows: int, cols: int) -> np.ndarray:
    if values.shape == (rows, cols):
        return values
    out = np.zeros((rows, cols), dtype=values.dtype)
    out[:values.shape[0], :values.shape[1]] = values
    return out


def draw_keys(seed: int, ell: int, a_block: tuple[int, int], b_block: tuple[int, int],
              q: int) -> Keys:
    rng = np.random.Generator(np.random.PCG64(seed))
    ka = uniform_array(rng, (ell,) + a_block, q)
    kb = uniform_array(rng, (ell,) + b_block, q)
    return Keys(tuple(ka), tuple(kb))


def encode(A: FieldMatrix, B: FieldMatrix, part: Partition, params: SchemeParams,
           seed: int = 0, *, keys: Keys | None = None, pad: bool = False) -> list[SharePair]:
    """Split, mask and evaluate the inputs at every server point.

    Keys are drawn from a PCG64 stream seeded with ``seed`` unless ``keys``
    is given. With ``pad=True`` the row count of A and column count of B are
    zero-padded to multiples of r_A and r_B instead of raising.
    """
    if A.prime != params.prime or B.prime != params.prime:
        raise MismatchedField("inputs and scheme use different fields")
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    r_A, r_B, ell, q = part.r_A, part.r_B, params.ell, params.q
    Q = part.Q(ell)
    if Q > params.N:
        raise InfeasiblePartition(f"Q={Q} exceeds N={params.N} for {part}, ell={ell}")
    m, n, p = A.rows, A.cols, B.cols
    if not pad and (m % r_A or p % r_B):
        raise DivisibilityViolation(
            f"r_A={r_A} must divide m={m} and r_B={r_B} must divide p={p}")
    bm, bp = _ceil_div(m, r_A), _ceil_div(p, r_B)
    a_vals = _padded(A.values, bm * r_A, n)
    b_vals = _padded(B.values, n, bp * r_B)

    if keys is None:
        keys = draw_keys(seed, ell, (bm, n), (n, bp), q)
    if len(keys.A) != ell or len(keys.B) != ell:
        raise PreconditionError(f"expected {ell} key blocks per input")
    if any(np.shape(k) != (bm, n) for k in keys.A) or any(np.shape(k) != (n, bp) for k in keys.B):
        raise DimensionMismatch("key block shapes do not match the partition")

    a_blocks = [a_vals[j * bm:(j + 1) * bm].reshape(-1) for j in range(r_A)]
    a_blocks += [np.asarray(k).reshape(-1) for k in keys.A]
    b_blocks = [b_vals[:, j * bp:(j + 1) * bp].reshape(-1) for j in range(r_B)]
    b_blocks += [np.asarray(k).reshape(-1) for k in keys.B]
    a_stack = np.mod(np.stack(a_blocks).astype(params.prime.dtype), q)
    b_stack = np.mod(np.stack(b_blocks).astype(params.prime.dtype), q)

    xs = [pt.value for pt in params.points]
    a_exp, b_exp = encoding_exponents(r_A, r_B, ell)
    a_shares = modmatmul(power_matrix(xs, a_exp, q), a_stack, q)
    b_shares = modmatmul(power_matrix(xs, b_exp, q), b_stack, q)

    return [
        SharePair(
            server_index=i + 1,
            point=params.points[i],
            A_tilde=FieldMatrix(a_shares[i].reshape(bm, n), params.prime),
            B_tilde=FieldMatrix(b_shares[i].reshape(n, bp), params.prime),
        )
        for i in range(params.N)
    ]


def server_compute(share: SharePair) -> Answer:
    if share.A_tilde.cols != share.B_tilde.rows:
        raise DimensionMismatch(f"share {share.server_index}: {share.A_tilde.shape} "
                                f"x {share.B_tilde.shape}")
    return Answer(share.server_index, share.point, share.A_tilde @ share.B_tilde)


@lru_cache(maxsize=4096)
def _interpolation_weights(points: tuple[int, ...], q: int) -> np.ndarray:
    # the same server subset is decoded many times in sweeps and simulations
    w = lagrange_coefficient_matrix(list(points), q)
    w.flags.writeable = False
    return w


def decode(answers: Iterable[Answer], part: Partition, params: SchemeParams,
           m: int, p: int) -> FieldMatrix:
    """Recover the m x p product from at least Q answers.

    Exactly Q answers are used, the ones with the smallest server indices.
    Answers from padded encodings decode fine; the padding is cut off.
    """
    answers = sorted(answers, key=lambda a: a.server_index)
    seen: set[int] = set()
    for ans in answers:
        if ans.point.prime != params.prime:
            raise MismatchedField(f"answer {ans.server_index} is over another field")
        if ans.point.value in seen:
            raise DuplicatePoint(f"point {ans.point.value} answered twice")
        seen.add(ans.point.value)
    Q = part.Q(params.ell)
    if len(answers) < Q:
        raise TooFewAnswers(f"need {Q} answers with distinct points, got {len(answers)}")
    used = answers[:Q]
    bm, bp = _ceil_div(m, part.r_A), _ceil_div(p, part.r_B)
    for ans in used:
        if ans.Z.shape != (bm, bp):
            raise DimensionMismatch(
                f"answer {ans.server_index} has shape {ans.Z.shape}, expected {(bm, bp)}")
    q = params.q
    weights = _interpolation_weights(tuple(a.point.value for a in used), q)
    evals = np.stack([a.Z.values.reshape(-1) for a in used])
    coeffs = modmatmul(weights, evals, q)

    emap = build_exponent_map(part.r_A, part.r_B, params.ell)
    out = np.zeros((bm * part.r_A, bp * part.r_B), dtype=params.prime.dtype)
    for e, (j, jp) in emap.desired.items():
        out[(j - 1) * bm:j * bm, (jp - 1) * bp:jp * bp] = coeffs[e].reshape(bm, bp)
    return FieldMatrix(out[:m, :p], params.prime)
