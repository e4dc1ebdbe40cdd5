import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aligned_smm.codec import (
    Answer,
    Keys,
    Partition,
    SchemeParams,
    SharePair,
    build_exponent_map,
    decode,
    encode,
    encoding_exponents,
    recovery_threshold,
    server_compute,
)
from aligned_smm.errors import (
    DimensionMismatch,
    DivisibilityViolation,
    DuplicatePoint,
    InfeasiblePartition,
    PreconditionError,
    TooFewAnswers,
)
from aligned_smm.ffield import FieldMatrix, mat_mul

from oracles import expand_product_exponents, naive_matmul

Q31 = 2**31 - 1


def run(A, B, part, params, seed=0, **kw):
    return [server_compute(s) for s in encode(A, B, part, params, seed, **kw)]


# ---------------------------------------------------------------- exponent map


def test_exponent_map_smallest_scheme():
    emap = build_exponent_map(1, 1, 1)
    assert emap.Q == 3
    assert emap.desired == {0: (1, 1)}
    assert emap.interference == {1: {("P2", 1, 1), ("P3", 1, 1)}, 2: {("P4", 1, 1)}}


def test_exponent_map_ra2():
    emap = build_exponent_map(2, 1, 1)
    assert emap.Q == 5
    assert set(emap.desired) == {0, 1}
    assert set(emap.interference) == {2, 3, 4}
    assert emap.interference_count == 1 * (1 + 1) + 2 - 1


@pytest.mark.parametrize("r_A,r_B,ell", list(itertools.product(range(1, 6), repeat=3)))
def test_exponent_map_matches_symbolic_expansion(r_A, r_B, ell):
    """Multiply the encoders term by term and compare with the closed-form layout."""
    expanded = expand_product_exponents(r_A, r_B, ell)
    emap = build_exponent_map(r_A, r_B, ell)
    tag = {("A", "B"): "P1", ("KA", "B"): "P2", ("A", "KB"): "P3", ("KA", "KB"): "P4"}
    for e, terms in expanded.items():
        named = {(tag[(lt[0], rt[0])], lt[1], rt[1]) for lt, rt in terms}
        if e in emap.desired:
            j, jp = emap.desired[e]
            assert named == {("P1", j, jp)}
        else:
            assert not any(t[0] == "P1" for t in named)
            assert named == set(emap.interference[e])
    assert set(expanded) == set(emap.desired) | set(emap.interference)


def test_exponent_bounds():
    for r_A, r_B, ell in itertools.product(range(1, 5), repeat=3):
        emap = build_exponent_map(r_A, r_B, ell)
        exps = set(emap.desired) | set(emap.interference)
        assert min(exps) == 0 and max(exps) == emap.Q - 1


def test_desired_exponent_formula():
    emap = build_exponent_map(3, 4, 2)
    for e, (j, jp) in emap.desired.items():
        assert e == j + (jp - 1) * (3 + 2) - 1


def test_recovery_threshold():
    assert recovery_threshold(Partition(1, 1), 1) == 3
    assert recovery_threshold(Partition(2, 1), 1) == 5
    assert recovery_threshold(Partition(90, 9), 10) == 999


def test_encoding_exponents_layout():
    assert encoding_exponents(2, 2, 1) == ([0, 1, 2], [0, 3, 5])


# ---------------------------------------------------------------- params


def test_scheme_params_defaults_and_validation():
    p = SchemeParams(5, 2, 7)
    assert [x.value for x in p.points] == [1, 2, 3, 4, 5]
    with pytest.raises(PreconditionError):
        SchemeParams(7, 1, 7)  # q must exceed N
    with pytest.raises(PreconditionError):
        SchemeParams(3, 1, 7, points=(0, 1, 2))
    with pytest.raises(DuplicatePoint):
        SchemeParams(3, 1, 7, points=(1, 2, 8))
    with pytest.raises(PreconditionError):
        SchemeParams(3, 0)
    with pytest.warns(UserWarning):
        SchemeParams(4, 2)


def test_partition_rejects_nonpositive():
    with pytest.raises(PreconditionError):
        Partition(0, 1)


# ---------------------------------------------------------------- encode / compute / decode


def test_zero_keys_give_plain_inputs():
    params = SchemeParams(3, 1)
    A, B = FieldMatrix([[11]]), FieldMatrix([[13]])
    shares = encode(A, B, Partition(1, 1), params, keys=Keys.zeros(1, (1, 1), (1, 1)))
    for s in shares:
        assert s.A_tilde == A and s.B_tilde == B


def test_share_formula_by_hand():
    # r_A = r_B = 1, l = 1: A~ = A + KA x, B~ = B + KB x
    q = 101
    params = SchemeParams(3, 1, q)
    keys = Keys((np.array([[5]]),), (np.array([[7]]),))
    shares = encode(FieldMatrix([[2]], q), FieldMatrix([[3]], q), Partition(1, 1), params, keys=keys)
    for s, x in zip(shares, (1, 2, 3)):
        assert s.A_tilde.tolist() == [[(2 + 5 * x) % q]]
        assert s.B_tilde.tolist() == [[(3 + 7 * x) % q]]


def test_roundtrip_2x2_all_answers():
    rng = np.random.default_rng(0)
    A, B = FieldMatrix.random(2, 2, rng=rng), FieldMatrix.random(2, 2, rng=rng)
    params = SchemeParams(5, 1)
    part = Partition(2, 1)
    assert decode(run(A, B, part, params), part, params, 2, 2) == A @ B


def test_encode_is_deterministic():
    A, B = FieldMatrix.random(4, 3, rng=1), FieldMatrix.random(3, 2, rng=2)
    params, part = SchemeParams(6, 1), Partition(2, 1)
    s1 = encode(A, B, part, params, seed=42)
    s2 = encode(A, B, part, params, seed=42)
    s3 = encode(A, B, part, params, seed=43)
    assert s1 == s2
    assert s1 != s3


def test_server_compute_examples():
    p = SchemeParams(3, 1, 7)
    zero = SharePair(1, p.point(1), FieldMatrix.zeros(2, 3, 7), FieldMatrix.zeros(3, 2, 7))
    assert server_compute(zero).Z == FieldMatrix.zeros(2, 2, 7)
    one = SharePair(2, p.point(2), FieldMatrix([[3]], 7), FieldMatrix([[4]], 7))
    assert server_compute(one).Z.tolist() == [[5]]
    rnd = SharePair(3, p.point(3), FieldMatrix.random(3, 4, 7, 1), FieldMatrix.random(4, 2, 7, 2))
    assert server_compute(rnd).Z == mat_mul(rnd.A_tilde, rnd.B_tilde)
    bad = SharePair(1, p.point(1), FieldMatrix.zeros(2, 3, 7), FieldMatrix.zeros(2, 2, 7))
    with pytest.raises(DimensionMismatch):
        server_compute(bad)


def test_decode_smallest_scheme_scalar():
    params, part = SchemeParams(3, 1), Partition(1, 1)
    A, B = FieldMatrix([[123456]]), FieldMatrix([[654321]])
    assert decode(run(A, B, part, params), part, params, 1, 1).tolist() == [[123456 * 654321 % Q31]]


def test_decode_every_single_drop_n6():
    rng = np.random.default_rng(5)
    A, B = FieldMatrix.random(4, 3, rng=rng), FieldMatrix.random(3, 5, rng=rng)
    params, part = SchemeParams(6, 1), Partition(2, 1)
    answers = run(A, B, part, params, seed=9)
    expected = naive_matmul(A.tolist(), B.tolist(), Q31)
    for dropped in range(1, 7):
        kept = [a for a in answers if a.server_index != dropped]
        assert decode(kept, part, params, 4, 5).tolist() == expected


def test_decode_too_few_answers():
    params, part = SchemeParams(6, 1), Partition(2, 1)
    A, B = FieldMatrix.random(2, 2, rng=0), FieldMatrix.random(2, 1, rng=1)
    answers = run(A, B, part, params)
    with pytest.raises(TooFewAnswers):
        decode(answers[:4], part, params, 2, 1)


def test_decode_duplicate_point():
    params, part = SchemeParams(5, 1), Partition(1, 1)
    answers = run(FieldMatrix([[1]]), FieldMatrix([[2]]), part, params)
    with pytest.raises(DuplicatePoint):
        decode([answers[0], answers[0], answers[1]], part, params, 1, 1)


def test_decode_shape_mismatch():
    params, part = SchemeParams(3, 1), Partition(1, 1)
    answers = [Answer(i, params.point(i), FieldMatrix.zeros(2, 2)) for i in (1, 2, 3)]
    with pytest.raises(DimensionMismatch):
        decode(answers, part, params, 1, 1)


def test_encode_errors():
    params = SchemeParams(5, 1)
    A, B = FieldMatrix.random(3, 2, rng=0), FieldMatrix.random(2, 2, rng=1)
    with pytest.raises(DivisibilityViolation):
        encode(A, B, Partition(2, 1), params)
    with pytest.raises(InfeasiblePartition):
        encode(A, B, Partition(3, 1), params)  # Q = 7 > 5
    with pytest.raises(DimensionMismatch):
        encode(A, FieldMatrix.random(3, 2, rng=2), Partition(1, 1), params)


def test_padding_mode_truncates():
    params, part = SchemeParams(12, 1), Partition(2, 3)  # Q = 11
    A, B = FieldMatrix.random(3, 2, rng=0), FieldMatrix.random(2, 4, rng=1)
    answers = run(A, B, part, params, pad=True)
    assert decode(answers, part, params, 3, 4) == A @ B


def test_subset_invariance():
    params, part = SchemeParams(9, 2), Partition(1, 2)  # Q = 8
    A, B = FieldMatrix.random(3, 3, rng=3), FieldMatrix.random(3, 4, rng=4)
    answers = run(A, B, part, params)
    results = {decode(list(sub), part, params, 3, 4)
               for sub in itertools.combinations(answers, 8)}
    assert results == {A @ B}


def test_large_prime_roundtrip():
    q = 2**61 - 1
    params, part = SchemeParams(7, 1, q), Partition(2, 1)
    A, B = FieldMatrix.random(2, 3, q, 0), FieldMatrix.random(3, 2, q, 1)
    answers = run(A, B, part, params)
    assert decode(answers[2:], part, params, 2, 2).tolist() == naive_matmul(A.tolist(), B.tolist(), q)


def test_custom_points():
    params = SchemeParams(6, 1, 101, points=(17, 3, 99, 42, 8, 60))
    part = Partition(2, 1)
    A, B = FieldMatrix.random(2, 2, 101, 0), FieldMatrix.random(2, 3, 101, 1)
    assert decode(run(A, B, part, params)[1:], part, params, 2, 3) == A @ B


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_roundtrip_property(data):
    N = data.draw(st.integers(3, 12))
    ell = data.draw(st.integers(1, (N - 1) // 2))
    r_B = data.draw(st.integers(1, max(1, (N + 1) // (1 + ell) - 1)))
    a_max = (N + 1) // (r_B + 1) - ell
    if a_max < 1:
        return
    r_A = data.draw(st.integers(1, a_max))
    part = Partition(r_A, r_B)
    params = SchemeParams(N, ell)
    m = r_A * data.draw(st.integers(1, 2))
    n = data.draw(st.integers(1, 4))
    p = r_B * data.draw(st.integers(1, 2))
    seed = data.draw(st.integers(0, 2**32))
    A = FieldMatrix.random(m, n, rng=seed)
    B = FieldMatrix.random(n, p, rng=seed + 1)
    answers = run(A, B, part, params, seed)
    subset = data.draw(st.lists(st.sampled_from(answers), min_size=part.Q(ell),
                                max_size=N, unique_by=lambda a: a.server_index))
    assert decode(subset, part, params, m, p).tolist() == naive_matmul(A.tolist(), B.tolist(), Q31)
