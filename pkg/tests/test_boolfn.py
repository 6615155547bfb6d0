from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bftest.boolfn import (
    BitVector,
    Gf2Polynomial,
    Junta,
    KLinear,
    PartiallySymmetric,
    SeededRandom,
    TruthTable,
    algebraic_degree,
    constant,
    dictator,
    estimate_distance,
    evaluate,
    exact_distance,
    majority,
    parse_function,
    parity_function,
    read_truth_table,
    relevant_variables,
    symmetric_function,
    symmetry_classes,
    truth_table,
    walsh_hadamard,
    write_truth_table,
)
from bftest.errors import CapacityError, ContractError, DimensionError

from oracles import naive_fourier, naive_linear_distance


def bv(*bits):
    return BitVector.from_bits(bits)


# ---------- BitVector


def test_bitvector_weight_and_xor():
    x = bv(1, 0, 1, 1)
    assert x.weight == 3
    assert (x ^ x).bits == 0
    assert (x + BitVector(4, 0)) == x
    assert x[2] == 1 and x[1] == 0


def test_bitvector_rejects_overflow_and_mismatch():
    with pytest.raises(ContractError):
        BitVector(3, 8)
    with pytest.raises(DimensionError):
        bv(1, 0) ^ bv(1, 0, 0)


@given(st.integers(0, 2 ** 20 - 1), st.integers(0, 2 ** 20 - 1), st.integers(0, 2 ** 20 - 1))
def test_xor_is_associative_and_commutative(a, b, c):
    x, y, z = BitVector(20, a), BitVector(20, b), BitVector(20, c)
    assert (x ^ y) ^ z == x ^ (y ^ z)
    assert x ^ y == y ^ x
    assert 0 <= x.weight <= 20


# ---------- evaluate


def test_evaluate_examples():
    assert evaluate(KLinear(3, (0, 1)), bv(1, 1, 0)) == 0
    assert evaluate(Gf2Polynomial(3, frozenset({0b011})), bv(1, 1, 0)) == 1
    weight_parity = symmetric_function(3, [0, 1, 0, 1])
    assert evaluate(weight_parity, bv(1, 0, 1)) == 0


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate(KLinear(3, (0,)), bv(1, 0))


def test_truth_table_examples():
    assert list(truth_table(KLinear(1, (0,)))) == [0, 1]
    assert list(truth_table(constant(2))) == [0, 0, 0, 0]
    j = Junta(2, (1,), np.array([0, 1]))
    assert [int(v) for v in truth_table(j)] == [evaluate(j, BitVector(2, x)) for x in range(4)]


def test_truth_table_capacity():
    with pytest.raises(CapacityError):
        truth_table(KLinear(25, (0,)))


def test_batch_matches_pointwise(rng):
    fs = [KLinear(7, (0, 3, 6)), Junta(7, (5, 2), np.array([1, 0, 0, 1])),
          PartiallySymmetric(7, (1,), rng.integers(0, 2, size=(2, 7))),
          Gf2Polynomial(7, frozenset({0, 0b11, 0b1100100})), SeededRandom(7, 99), majority(7)]
    for f in fs:
        table = truth_table(f)
        assert all(int(table[x]) == f._eval_int(x) for x in range(128))


def test_partially_symmetric_is_invariant_off_A(rng):
    n = 6
    f = PartiallySymmetric(n, (1, 4), rng.integers(0, 2, size=(4, n - 1)))
    rest = [0, 2, 3, 5]
    for x in range(1 << n):
        bits = [(x >> i) & 1 for i in range(n)]
        for perm in list(permutations(rest))[:12]:
            y = list(bits)
            for src, dst in zip(rest, perm):
                y[dst] = bits[src]
            assert evaluate(f, BitVector.from_bits(y)) == evaluate(f, BitVector.from_bits(bits))


def test_junta_depends_only_on_J(rng):
    f = Junta(8, (6, 1, 3), rng.integers(0, 2, size=8))
    assert set(relevant_variables(f)) <= {1, 3, 6}


def test_polynomial_degree_and_cancellation():
    p = Gf2Polynomial(4, frozenset({0b11, 0b110}))
    assert algebraic_degree(p) == 2 == p.degree
    assert Gf2Polynomial(3, [(0, 1), (1, 0)]).monomials == frozenset()


def test_seeded_random_is_deterministic_and_balanced():
    f = SeededRandom(20, 5)
    xs = np.arange(1 << 16, dtype=np.uint64)
    assert np.array_equal(f.evaluate_many(xs), SeededRandom(20, 5).evaluate_many(xs))
    assert abs(f.evaluate_many(xs).mean() - 0.5) < 0.01
    assert not np.array_equal(f.evaluate_many(xs), SeededRandom(20, 6).evaluate_many(xs))


# ---------- Fourier


def test_walsh_hadamard_examples():
    spec = walsh_hadamard(parity_function(2))
    assert spec[(0, 1)] == 1 and spec[()] == 0 and spec[(0,)] == 0
    assert walsh_hadamard(constant(3))[()] == 1


def test_majority_spectrum_matches_naive_transform():
    f = majority(3)
    naive = naive_fourier(truth_table(f), 3)
    spec = walsh_hadamard(f)
    assert [Fraction(c).limit_denominator(64) for c in spec.coefficients] == naive
    assert spec[(0,)] == 0.5 and spec[(0, 1, 2)] == -0.5


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 62))
def test_parseval(n, seed):
    spec = walsh_hadamard(SeededRandom(n, seed))
    assert abs(spec.parseval_sum() - 1) <= 1e-9
    assert np.all(np.abs(spec.coefficients) <= 1)


def test_max_coefficient_bound_against_brute_force_distance(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        f = SeededRandom(n, int(rng.integers(0, 2 ** 62)))
        eps = naive_linear_distance(truth_table(f), n)
        assert Fraction(walsh_hadamard(f).max_coefficient()).limit_denominator(1 << n) <= 1 - 2 * eps


# ---------- distances


def test_exact_distance_examples():
    x1 = dictator(2, 0)
    assert exact_distance(x1, x1) == 0
    assert exact_distance(x1, KLinear(2, (0, 1))) == Fraction(1, 2)
    n = 5
    conj = Gf2Polynomial(n, frozenset({(1 << n) - 1}))
    assert exact_distance(constant(n), conj) == Fraction(1, 2 ** n)


def test_exact_distance_is_a_metric(rng):
    for _ in range(30):
        n = int(rng.integers(1, 11))
        f, g, h = (TruthTable(n, rng.integers(0, 2, size=1 << n)) for _ in range(3))
        assert exact_distance(f, g) == exact_distance(g, f)
        assert exact_distance(f, h) <= exact_distance(f, g) + exact_distance(g, h)
        assert (exact_distance(f, g) == 0) == np.array_equal(f.table, g.table)


def test_estimate_distance_concentrates(rng):
    f, g = dictator(2, 0), KLinear(2, (0, 1))
    assert estimate_distance(f, f, 50, rng) == 0
    hits = sum(abs(estimate_distance(f, g, 10_000, rng) - 0.5) <= 0.02 for _ in range(200))
    assert hits >= 198


def test_estimate_within_three_standard_errors(rng):
    m = 4000
    for _ in range(20):
        n = int(rng.integers(3, 9))
        f = SeededRandom(n, int(rng.integers(0, 2 ** 62)))
        g = SeededRandom(n, int(rng.integers(0, 2 ** 62)))
        assert abs(estimate_distance(f, g, m, rng) - float(exact_distance(f, g))) <= 3 / (2 * m ** 0.5)


# ---------- symmetry structure


def test_symmetry_classes():
    assert symmetry_classes(majority(4)) == [(0, 1, 2, 3)]
    assert sorted(map(len, symmetry_classes(KLinear(5, (0, 1))))) == [2, 3]


# ---------- serialization and descriptors


def test_truth_table_file_roundtrip(tmp_path, rng):
    for n in (0, 1, 3, 9):
        f = TruthTable(n, rng.integers(0, 2, size=1 << n))
        path = tmp_path / f"t{n}.bin"
        write_truth_table(path, f)
        data = path.read_bytes()
        assert int.from_bytes(data[:4], "little") == n
        assert len(data) == 4 + ((1 << n) + 7) // 8
        assert np.array_equal(read_truth_table(path).table, f.table)


def test_truth_table_file_lsb_first(tmp_path):
    f = TruthTable(3, np.array([1, 0, 0, 0, 0, 0, 0, 1]))
    path = tmp_path / "f.bin"
    write_truth_table(path, f)
    assert path.read_bytes()[4:] == bytes([0b10000001])


def test_parse_function_descriptors():
    f = parse_function("klinear n=10 I=1,4,7")
    assert isinstance(f, KLinear) and f.indices == (1, 4, 7)
    p = parse_function("poly n=4 M=x0x1+x2+1")
    assert p.monomials == frozenset({0b11, 0b100, 0})
    assert parse_function("psym n=3 A= table=0101").describe() == "psym n=3 A= table=0101"
    for f in (p, parse_function("junta n=5 J=3,0 table=0110"), SeededRandom(9, 4), majority(5)):
        g = parse_function(f.describe())
        assert np.array_equal(truth_table(f), truth_table(g))
    with pytest.raises(ContractError):
        parse_function("wibble n=3")
