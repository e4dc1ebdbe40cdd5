"""Slow, obviously-correct reference computations used as test oracles.

Nothing here imports the package's numeric kernels.
"""

from fractions import Fraction
from itertools import permutations


def naive_matmul(a, b, q):
    n, k, m = len(a), len(b), len(b[0])
    assert all(len(row) == k for row in a)
    return [[sum(a[i][t] * b[t][j] for t in range(k)) % q for j in range(m)] for i in range(n)]


def eval_poly(coeffs, x, q):
    return sum(c * pow(x, e, q) for e, c in enumerate(coeffs)) % q


def leibniz_det(m, q):
    n = len(m)
    total = 0
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1
        for i, p in enumerate(perm):
            prod *= m[i][p]
        total += -prod if inversions % 2 else prod
    return total % q


def Q(r_A, r_B, ell):
    return (r_A + ell) * (r_B + 1) - 1


def all_pairs(N, ell):
    """Every positive pair with Q <= N, scanning a box that is obviously large enough."""
    return [(a, b) for a in range(1, N + 1) for b in range(1, N + 1) if Q(a, b, ell) <= N]


def brute_rate_opt(N, ell):
    """(best rate, set of all maximizing pairs)."""
    pairs = all_pairs(N, ell)
    rates = {p: Fraction(p[0] * p[1], Q(*p, ell)) for p in pairs}
    best = max(rates.values())
    return best, {p for p, r in rates.items() if r == best}


def brute_threshold_opt(N, ell, R):
    """(min Q, set of all minimizing pairs) subject to rate >= R, or None."""
    pairs = [p for p in all_pairs(N, ell) if Fraction(p[0] * p[1], Q(*p, ell)) >= R]
    if not pairs:
        return None
    q_min = min(Q(*p, ell) for p in pairs)
    return q_min, {p for p in pairs if Q(*p, ell) == q_min}


def expand_product_exponents(r_A, r_B, ell):
    """Multiply the two encoding polynomials symbolically.

    Returns {exponent: set of (left term, right term)} with terms named
    ("A", j), ("KA", k), ("B", j'), ("KB", k').
    """
    left = [(("A", j), j - 1) for j in range(1, r_A + 1)]
    left += [(("KA", k), k + r_A - 1) for k in range(1, ell + 1)]
    right = [(("B", j), (j - 1) * (r_A + ell)) for j in range(1, r_B + 1)]
    right += [(("KB", k), (k + r_A - 1) + (r_B - 1) * (r_A + ell)) for k in range(1, ell + 1)]
    out = {}
    for lt, le in left:
        for rt, re in right:
            out.setdefault(le + re, set()).add((lt, rt))
    return out
