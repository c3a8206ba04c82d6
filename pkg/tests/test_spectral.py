from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maskprop import spectral as S
from maskprop.spectral import BitMatrix, Dyadic, DyadicMatrix, FourierVector

from conftest import M, walsh_by_definition


# --- Dyadic -----------------------------------------------------------------------

def test_dyadic_canonical_form():
    assert Dyadic(4, 3) == Dyadic(1, 1)
    assert (Dyadic(4, 3).numerator, Dyadic(4, 3).exponent) == (1, 1)
    assert Dyadic(0, 9).exponent == 0
    assert str(Dyadic(3, 2)) == "3/2^2"
    assert str(Dyadic(-6, 1)) == "-3"


def test_dyadic_coerce_rejects_non_dyadic():
    assert Dyadic.coerce("3/8") == Dyadic(3, 3)
    assert Dyadic.coerce(Fraction(-1, 2)) == Dyadic(-1, 1)
    with pytest.raises(ValueError):
        Dyadic.coerce(Fraction(1, 3))
    with pytest.raises(TypeError):
        Dyadic.coerce(0.5)


@given(st.integers(-1000, 1000), st.integers(0, 20), st.integers(-1000, 1000), st.integers(0, 20))
def test_dyadic_arithmetic_matches_fraction(a, ea, b, eb):
    x, y = Dyadic(a, ea), Dyadic(b, eb)
    fx, fy = Fraction(a, 2 ** ea), Fraction(b, 2 ** eb)
    assert (x + y).to_fraction() == fx + fy
    assert (x - y).to_fraction() == fx - fy
    assert (x * y).to_fraction() == fx * fy
    assert (x < y) == (fx < fy)
    assert (x == y) == (fx == fy)


# --- walsh transform ------------------------------------------------------------------

def test_and_matrix():
    w = S.walsh_from_truth_table([0, 0, 0, 1], 2, 1)
    assert w == M([[1, 0, 0, 0], ["1/2", "1/2", "1/2", "-1/2"]])


def test_not_matrix():
    assert S.walsh_from_truth_table([1, 0], 1, 1) == M([[1, 0], [0, -1]])


def test_identity_and_constant():
    assert S.walsh_from_truth_table(list(range(8)), 3, 3) == DyadicMatrix.identity(3)
    assert S.walsh_from_truth_table({0: 1, 1: 1}, 1, 1) == M([[1, 0], [-1, 0]])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4), st.integers(0, 3), st.data())
def test_fast_and_naive_agree_with_definition(n, m, data):
    fx = data.draw(st.lists(st.integers(0, (1 << m) - 1), min_size=1 << n, max_size=1 << n))
    fast = S.walsh_from_truth_table(fx, n, m)
    naive = S.walsh_from_truth_table(fx, n, m, method="naive")
    assert fast == naive
    assert fast.to_fractions() == walsh_by_definition(lambda x: fx[x], n, m)


def test_malformed_tables():
    with pytest.raises(S.MalformedFunctionError):
        S.walsh_from_truth_table({0: 0}, 1, 1)
    with pytest.raises(S.MalformedFunctionError):
        S.walsh_from_truth_table([0, 2], 1, 1)
    with pytest.raises(ValueError):
        S.walsh_from_truth_table([0] * 4, 2, 1, max_inputs=1)


def test_compose_is_functional_composition(rng):
    for _ in range(20):
        f = [rng.randrange(8) for _ in range(4)]
        g = [rng.randrange(4) for _ in range(8)]
        wf = S.walsh_from_truth_table(f, 2, 3)
        wg = S.walsh_from_truth_table(g, 3, 2)
        assert S.compose(wg, wf) == S.walsh_from_truth_table([g[f[x]] for x in range(4)], 2, 2)
    with pytest.raises(S.DimensionError):
        S.compose(wf, wf)


def test_tensor_puts_first_factor_on_high_wires():
    w_and = S.walsh_from_truth_table([0, 0, 0, 1], 2, 1)
    w_not = S.walsh_from_truth_table([1, 0], 1, 1)
    # (a, b, c) -> (a and b, not c)
    joint = [(((x >> 2) & (x >> 1) & 1) << 1) | (1 - (x & 1)) for x in range(8)]
    assert S.tensor(w_and, w_not) == S.walsh_from_truth_table(joint, 3, 2)


def test_walsh_of_linear_matches_truth_table(rng):
    np_rng = np.random.default_rng(7)
    for n in range(1, 5):
        for _ in range(5):
            bm = BitMatrix.random_invertible(n, np_rng)
            table = [bm.apply_index(x) for x in range(1 << n)]
            assert S.walsh_of_linear(bm) == S.walsh_from_truth_table(table, n, n)


def test_singular_bitmatrix():
    with pytest.raises(S.NotInvertibleError):
        S.walsh_of_linear(BitMatrix([[1, 1], [1, 1]]))


def test_orthogonality():
    assert S.is_orthogonal(S.walsh_from_truth_table([1, 0], 1, 1))
    assert not S.is_orthogonal(S.walsh_from_truth_table([0, 0, 0, 1], 2, 1))
    assert "not square" in S.orthogonality_defect(S.walsh_from_truth_table([0, 1, 1, 0], 2, 1))
    assert S.orthogonality_defect(S.walsh_from_truth_table([0, 0, 1, 1], 1 + 1, 2)) is not None


# --- distributions --------------------------------------------------------------------

def test_uniform_and_constant_vectors():
    assert S.uniform(1) == FourierVector.from_entries([1, 0])
    assert S.constant("1") == FourierVector.from_entries([1, -1])
    assert S.constant([0]) == FourierVector.from_entries([1, 1])


def test_encoder_input_vector():
    for s in (0, 1):
        t = S.joint(S.constant([s]), S.uniform(2))
        assert t.coefficients == tuple(Dyadic(v) for v in [1, 0, 0, 0, (-1) ** s, 0, 0, 0])


def test_to_probabilities_of_parity_ket_is_parity_class():
    # |000> + (-1)^s |111> is the uniform law on the even (s=0) or odd (s=1)
    # parity vectors: 1/4 each, not a two-point mass.
    for s in (0, 1):
        p = S.to_probabilities(FourierVector.from_entries([1, 0, 0, 0, 0, 0, 0, (-1) ** s]))
        expect = [Dyadic(1, 2) if bin(y).count("1") % 2 == s else Dyadic(0) for y in range(8)]
        assert p == expect


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 4), st.data())
def test_probability_round_trip(n, data):
    weights = data.draw(st.lists(st.integers(0, 8), min_size=1 << n, max_size=1 << n))
    total = sum(weights)
    if total == 0:
        weights[0] = total = 1
    # make the total a power of two so the law is dyadic
    scale = 1 << total.bit_length()
    weights[0] += scale - total
    probs = [Dyadic(w, scale.bit_length() - 1) for w in weights]
    t = S.from_probabilities(probs)
    assert t.is_distribution()
    assert t[0] == 1
    assert S.to_probabilities(t) == probs


def test_invalid_distribution_is_flagged():
    assert not FourierVector.from_entries([1, 2]).is_distribution()
    assert not FourierVector.from_entries([2, 0]).is_distribution()


def test_apply_dimension_error():
    with pytest.raises(S.DimensionError):
        S.apply(DyadicMatrix.identity(2), S.uniform(3))


def test_dot_is_parseval():
    a = S.constant("01")
    assert S.dot(a, a) == 4
    assert S.dot(S.uniform(2), a) == 1


def test_factor_check():
    t = S.joint(S.constant("1"), S.uniform(2))
    left, right = S.factor_check(t, 1)
    assert left == S.constant("1") and right == S.uniform(2)
    entangled = FourierVector.from_entries([1, 0, 0, 1])
    assert S.factor_check(entangled, 1) is None
    with pytest.raises(ValueError):
        S.factor_check(t, 0)


def test_factor_check_without_unit_coefficient():
    t = S.joint(FourierVector.from_entries([0, 2]), FourierVector.from_entries([4, -4]))
    left, right = S.factor_check(t, 1)
    assert S.joint(left, right) == t


# --- text formats ----------------------------------------------------------------------

def test_truth_table_text_round_trip():
    text = "00 0\n01 0\n10 0\n11 1  # and\n"
    table, n, m = S.parse_truth_table(text)
    assert (n, m) == (2, 1)
    assert S.format_truth_table(table, n, m) == "00 0\n01 0\n10 0\n11 1\n"


@pytest.mark.parametrize("text", ["", "0 1\n0 0\n", "0 1\n10 1\n", "0x 1\n"])
def test_truth_table_errors(text):
    with pytest.raises(S.MalformedFunctionError):
        S.parse_truth_table(text)


def test_matrix_format_is_exact():
    assert M([[1, "-1/4"]]).format() == "     1 -1/2^2"


def test_large_entries_switch_to_object_dtype():
    big = DyadicMatrix(np.array([[1 << 40, 0], [0, 1 << 40]], dtype=np.int64), 0)
    sq = S.compose(big, big)
    assert sq[0, 0] == Dyadic(1 << 80)


def test_bits_helpers():
    for n in range(4):
        for x in range(1 << n):
            assert S.bits_to_index(S.index_to_bits(x, n)) == x
    assert S.index_to_bits(4, 3) == (1, 0, 0)
