"""
Exact arithmetic over a prime field GF(q).

Scalars are :class:`FieldElement` values, matrices are :class:`FieldMatrix`
values backed by a read-only numpy array of canonical representatives.
For q < 2**31 the array is int64 and products are reduced with a 16-bit
limb split so no intermediate ever overflows; larger primes fall back to
object arrays of Python ints.

Interpolation is the quadratic-time Lagrange/Newton kind, which is plenty
for the polynomial degrees the scheme produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEvaluationPoint,
    InsufficientSamples,
    InversionOfZero,
    MismatchedField,
    PreconditionError,
)

MERSENNE_31 = 2**31 - 1
DEFAULT_PRIME_Q = MERSENNE_31

_INT64_LIMIT = 2**31
_LIMB = 16
_LIMB_MASK = (1 << _LIMB) - 1
# inner-dimension chunk keeping every partial sum below 2**63
_CHUNK = 1 << 15

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 13 prime bases.

    Deterministic for every n below 3.3e24, which covers any prime that can
    be serialized in the 8-byte share format.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldPrime:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise PreconditionError(f"field prime must be an integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        if not is_prime(self.q):
            raise PreconditionError(f"{self.q} is not prime")

    def __int__(self):
        return self.q

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    @property
    def dtype(self):
        return np.int64 if self.q < _INT64_LIMIT else object


def as_prime(prime: "FieldPrime | int") -> FieldPrime:
    return prime if isinstance(prime, FieldPrime) else FieldPrime(int(prime))


DEFAULT_PRIME = FieldPrime(DEFAULT_PRIME_Q)


@dataclass(frozen=True)
class FieldElement:
    """An element of GF(q), always stored as its representative in [0, q)."""

    value: int
    prime: FieldPrime

    def __post_init__(self):
        prime = as_prime(self.prime)
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "value", int(self.value) % prime.q)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.prime != self.prime:
                raise MismatchedField(f"GF({self.prime.q}) vs GF({other.prime.q})")
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElement(int(other), self.prime)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value + other.value, self.prime)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value - other.value, self.prime)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.value * other.value, self.prime)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.prime)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inv() ** (-exponent)
        return FieldElement(pow(self.value, exponent, self.prime.q), self.prime)

    def inv(self) -> "FieldElement":
        # Fermat: a^(q-2) = a^-1
        if self.value == 0:
            raise InversionOfZero(f"0 has no inverse in GF({self.prime.q})")
        return FieldElement(pow(self.value, self.prime.q - 2, self.prime.q), self.prime)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.prime.q})"


def field_arith(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    """Dispatch a single field operation by name.

    ``op`` is one of ``add``, ``sub``, ``mul``, ``inv`` and ``pow``; ``inv``
    ignores ``b`` and ``pow`` takes ``b`` as an integer exponent.
    """
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    if not isinstance(b, FieldElement):
        raise PreconditionError(f"{op} needs a second field element")
    if a.prime != b.prime:
        raise MismatchedField(f"GF({a.prime.q}) vs GF({b.prime.q})")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise PreconditionError(f"unknown field operation {op!r}")


# ---------------------------------------------------------------- array kernels


def reduce_array(values, q: int) -> np.ndarray:
    """Canonical representatives of an integer array, in the dtype used for GF(q)."""
    if q < _INT64_LIMIT:
        arr = np.asarray(values)
        if arr.dtype == object:
            arr = np.array([int(v) % q for v in arr.ravel()], dtype=np.int64).reshape(arr.shape)
        return np.mod(arr.astype(np.int64, copy=False), q)
    arr = np.asarray(values, dtype=object)
    return np.vectorize(lambda v: int(v) % q, otypes=[object])(arr) if arr.size else arr


def modmatmul(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Matrix product of canonical arrays, reduced mod q."""
    if a.shape[-1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if q >= _INT64_LIMIT:
        return np.mod(np.asarray(a, dtype=object) @ np.asarray(b, dtype=object), q)
    a = a.astype(np.int64, copy=False)
    b = b.astype(np.int64, copy=False)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for start in range(0, a.shape[1], _CHUNK):
        ac = a[:, start:start + _CHUNK]
        bc = b[start:start + _CHUNK]
        lo = (ac @ (bc & _LIMB_MASK)) % q
        hi = (ac @ (bc >> _LIMB)) % q
        out = (out + ((hi << _LIMB) % q) + lo) % q
    return out


def power_matrix(points: Sequence[int], exponents: Sequence[int], q: int) -> np.ndarray:
    """Matrix with entry (i, e) equal to points[i] ** exponents[e] mod q."""
    rows = [[pow(int(x), int(e), q) for e in exponents] for x in points]
    return reduce_array(np.array(rows, dtype=object).reshape(len(points), len(exponents)), q)


# ---------------------------------------------------------------- matrices


class FieldMatrix:
    """Dense matrix over GF(q), immutable."""

    __slots__ = ("_values", "prime")

    def __init__(self, values, prime: FieldPrime | int = DEFAULT_PRIME):
        self.prime = as_prime(prime)
        arr = reduce_array(values, self.prime.q)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"expected a non-empty 2-D array, got shape {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def zeros(cls, rows: int, cols: int, prime: FieldPrime | int = DEFAULT_PRIME) -> "FieldMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), prime)

    @classmethod
    def identity(cls, size: int, prime: FieldPrime | int = DEFAULT_PRIME) -> "FieldMatrix":
        return cls(np.eye(size, dtype=np.int64), prime)

    @classmethod
    def random(cls, rows: int, cols: int, prime: FieldPrime | int = DEFAULT_PRIME,
               rng: np.random.Generator | int | None = None) -> "FieldMatrix":
        prime = as_prime(prime)
        rng = np.random.default_rng(rng)
        return cls(uniform_array(rng, (rows, cols), prime.q), prime)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def rows(self) -> int:
        return self._values.shape[0]

    @property
    def cols(self) -> int:
        return self._values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    @property
    def data(self) -> tuple[FieldElement, ...]:
        """Row-major sequence of elements."""
        return tuple(FieldElement(int(v), self.prime) for v in self._values.ravel())

    def __getitem__(self, idx):
        i, j = idx
        return FieldElement(int(self._values[i, j]), self.prime)

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self._values]

    def _check(self, other: "FieldMatrix"):
        if not isinstance(other, FieldMatrix):
            raise TypeError(f"expected FieldMatrix, got {type(other).__name__}")
        if other.prime != self.prime:
            raise MismatchedField(f"GF({self.prime.q}) vs GF({other.prime.q})")

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return FieldMatrix(self._values + other._values, self.prime)

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (self.prime == other.prime and self.shape == other.shape
                and bool(np.all(self._values == other._values)))

    def __hash__(self):
        return hash((self.prime.q, self.shape, tuple(int(v) for v in self._values.ravel())))

    def __repr__(self):
        return f"FieldMatrix({self.rows}x{self.cols} over GF({self.prime.q}))"


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    a._check(b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return FieldMatrix(modmatmul(a.values, b.values, a.prime.q), a.prime)


def uniform_array(rng: np.random.Generator, shape, q: int) -> np.ndarray:
    """Independent uniform draws from [0, q) with the given shape."""
    if q <= 2**63:
        return rng.integers(0, q, size=shape, dtype=np.int64)
    # rejection sampling on whole bytes for primes past int64
    nbytes = (q.bit_length() + 7) // 8
    bound = (256**nbytes // q) * q
    out = np.empty(int(np.prod(shape)), dtype=object)
    for idx in range(out.size):
        while True:
            v = int.from_bytes(rng.bytes(nbytes), "little")
            if v < bound:
                out[idx] = v % q
                break
    return out.reshape(shape)


# ---------------------------------------------------------------- polynomials


def poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + int(c)) % q
    return acc


def _check_points(xs: Sequence[int], q: int):
    if len(set(x % q for x in xs)) != len(xs):
        seen = set()
        for x in xs:
            if x % q in seen:
                raise DuplicateEvaluationPoint(f"evaluation point {x} repeated")
            seen.add(x % q)


def interpolate(samples: Sequence[tuple[FieldElement, FieldElement]],
                degree_bound: int) -> tuple[FieldElement, ...]:
    """Coefficients c_0..c_d of the unique degree-<=d polynomial through the samples.

    Only the first ``degree_bound + 1`` samples are used. Newton divided
    differences, then expansion of the Newton form into monomials.
    """
    t = degree_bound + 1
    if degree_bound < 0:
        raise PreconditionError("degree bound must be non-negative")
    if len(samples) < t:
        raise InsufficientSamples(f"need {t} samples, got {len(samples)}")
    used = list(samples[:t])
    prime = used[0][0].prime
    for x, y in used:
        if x.prime != prime or y.prime != prime:
            raise MismatchedField("samples drawn from different fields")
    q = prime.q
    xs = [x.value for x, _ in used]
    _check_points(xs, q)
    coef = [y.value for _, y in used]
    for level in range(1, t):
        for i in range(t - 1, level - 1, -1):
            num = coef[i] - coef[i - 1]
            den = xs[i] - xs[i - level]
            coef[i] = num * pow(den, q - 2, q) % q
    # Horner on the Newton form
    poly = [0] * t
    for k in range(t - 1, -1, -1):
        # poly <- poly * (x - xs[k]) + coef[k]
        shifted = [0] + poly[:-1]
        poly = [(shifted[e] - xs[k] * poly[e]) % q for e in range(t)]
        poly[0] = (poly[0] + coef[k]) % q
    return tuple(FieldElement(c, prime) for c in poly)


def lagrange_coefficient_matrix(xs: Sequence[int], q: int) -> np.ndarray:
    """Inverse Vandermonde matrix for the points xs, in O(t^2).

    Row e, column i holds the x^e coefficient of the i-th Lagrange basis
    polynomial, so ``W @ y`` is the coefficient vector interpolating y.
    """
    xs = [int(x) % q for x in xs]
    _check_points(xs, q)
    t = len(xs)
    # master polynomial prod (x - x_i), low degree first
    master = [1]
    for x in xs:
        nxt = [0] * (len(master) + 1)
        for e, c in enumerate(master):
            nxt[e + 1] = (nxt[e + 1] + c) % q
            nxt[e] = (nxt[e] - x * c) % q
        master = nxt
    cols = []
    for i, xi in enumerate(xs):
        # synthetic division master / (x - xi)
        quot = [0] * t
        carry = 0
        for e in range(t, 0, -1):
            carry = (master[e] + carry * xi) % q
            quot[e - 1] = carry
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                denom = denom * (xi - xj) % q
        scale = pow(denom, q - 2, q)
        cols.append([c * scale % q for c in quot])
    return reduce_array(np.array(cols, dtype=object).T.reshape(t, t), q)


def determinant(matrix, q: int) -> int:
    """Determinant over GF(q) by Gaussian elimination with modular pivots."""
    m = [[int(v) % q for v in row] for row in np.asarray(matrix, dtype=object)]
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionMismatch("determinant needs a square matrix")
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col] % q
        inv = pow(m[col][col], q - 2, q)
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv % q
                m[r] = [(a - f * b) % q for a, b in zip(m[r], m[col])]
    return det % q


def elements(values: Iterable[int], prime: FieldPrime | int) -> tuple[FieldElement, ...]:
    prime = as_prime(prime)
    return tuple(FieldElement(v, prime) for v in values)
