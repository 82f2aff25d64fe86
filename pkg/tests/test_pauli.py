"""Tests for the symplectic Pauli algebra.

DERIVED values are checked against a straightforward Kronecker-product
oracle built here from explicit 2x2 matrices, independent of the package's
dense builder.
"""

import numpy as np
import pytest

from fragsolve.pauli import (
    ComplexCoefficient,
    DuplicateIndex,
    IndexOutOfRange,
    PauliSum,
    PauliWord,
    SizeMismatch,
    UnknownAxis,
    commutes,
    multiply,
    parse_pauli,
    sum_arithmetic,
)

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
MATS = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def word_matrix(word):
    """Independent oracle: plain Kronecker product, qubit 0 leftmost."""
    m = np.ones((1, 1), dtype=complex)
    for q in range(word.n):
        m = np.kron(m, MATS[word.axis(q)])
    return m


def random_word(rng, n):
    return PauliWord(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))


class TestParse:
    def test_empty_is_identity(self):
        w = parse_pauli("", 2)
        assert w.is_identity
        assert w == PauliWord.identity(2)

    def test_encoding(self):
        w = parse_pauli("X0 Z1", 2)
        assert w.axis(0) == "X" and w.axis(1) == "Z"
        # qubit 0 at the high bit: x_bits = 10, z_bits = 01
        assert w.x == 0b10 and w.z == 0b01

    def test_y_sets_both_bits(self):
        w = parse_pauli("Y1", 3)
        assert w.axis(1) == "Y"
        assert w.x == w.z == 0b010

    def test_identity_tokens_ignored(self):
        assert parse_pauli("I0 X1", 2) == parse_pauli("X1", 2)

    def test_duplicate_index(self):
        with pytest.raises(DuplicateIndex):
            parse_pauli("X0 Y0", 2)

    def test_unknown_axis(self):
        with pytest.raises(UnknownAxis):
            parse_pauli("W0", 2)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            parse_pauli("X5", 2)

    def test_roundtrip_str(self):
        w = parse_pauli("X0 Y2 Z3", 4)
        assert parse_pauli(str(w), 4) == w


class TestMultiply:
    def test_involutory(self):
        x0 = parse_pauli("X0", 2)
        phase, word = multiply(x0, x0)
        assert phase == 1 and word.is_identity

    def test_xz_gives_minus_i_y(self):
        phase, word = multiply(parse_pauli("X0", 1), parse_pauli("Z0", 1))
        assert phase == -1j
        assert word == parse_pauli("Y0", 1)

    def test_zx_gives_plus_i_y(self):
        phase, word = multiply(parse_pauli("Z0", 1), parse_pauli("X0", 1))
        assert phase == 1j
        assert word == parse_pauli("Y0", 1)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            multiply(parse_pauli("X0", 1), parse_pauli("X0", 2))

    def test_against_dense_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            a, b = random_word(rng, 4), random_word(rng, 4)
            phase, word = multiply(a, b)
            np.testing.assert_allclose(
                phase * word_matrix(word),
                word_matrix(a) @ word_matrix(b),
                atol=1e-12,
            )

    def test_associative_and_self_inverse(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a, b, c = (random_word(rng, 5) for _ in range(3))
            pa, ab = multiply(a, b)
            p1, left = multiply(ab, c)
            pb, bc = multiply(b, c)
            p2, right = multiply(a, bc)
            assert left == right and pa * p1 == pb * p2
            ps, sq = multiply(a, a)
            assert ps == 1 and sq.is_identity


class TestCommutes:
    def test_anticommuting_pair(self):
        assert not commutes(parse_pauli("X0", 1), parse_pauli("Z0", 1))

    def test_two_positions_cancel(self):
        assert commutes(parse_pauli("X0 Z1", 2), parse_pauli("Z0 X1", 2))

    def test_against_dense_commutator(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a, b = random_word(rng, 3), random_word(rng, 3)
            ma, mb = word_matrix(a), word_matrix(b)
            comm = np.linalg.norm(ma @ mb - mb @ ma)
            assert commutes(a, b) == (comm < 1e-12)

    def test_consistent_with_product_phases(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a, b = random_word(rng, 4), random_word(rng, 4)
            pab, _ = multiply(a, b)
            pba, _ = multiply(b, a)
            assert commutes(a, b) == (pab == pba)


class TestPauliSum:
    def test_cancellation_gives_empty(self):
        a = PauliSum.from_strings(2, [(0.5, "X0"), (1.5, "Z1")])
        assert len(a + (a * -1.0)) == 0

    def test_scale(self):
        a = PauliSum.from_strings(2, [(0.5, "X0"), (1.5, "Z1")])
        doubled = sum_arithmetic(a, 2.0, "scale")
        assert doubled.coeff(parse_pauli("X0", 2)) == 1.0
        assert doubled.coeff(parse_pauli("Z1", 2)) == 3.0

    def test_merge_duplicate_terms(self):
        a = PauliSum.from_strings(1, [(0.25, "X0"), (0.75, "X0")])
        assert len(a) == 1 and a.coeff(parse_pauli("X0", 1)) == 1.0

    def test_prune_small(self):
        a = PauliSum.from_strings(1, [(1e-15, "X0")])
        assert len(a) == 0

    def test_complex_coefficient_rejected(self):
        with pytest.raises(ComplexCoefficient):
            PauliSum.from_strings(1, [(0.5 + 0.1j, "X0")])

    def test_near_real_complex_accepted(self):
        a = PauliSum.from_strings(1, [(0.5 + 1e-14j, "X0")])
        assert a.coeff(parse_pauli("X0", 1)) == 0.5

    def test_size_mismatch_add(self):
        with pytest.raises(SizeMismatch):
            PauliSum.zero(1) + PauliSum.zero(2)

    def test_canonical_iteration_order(self):
        a = PauliSum.from_strings(2, [(1.0, "X0"), (2.0, "Z0"), (3.0, "X1")])
        keys = [w.key() for w, _ in a.items()]
        assert keys == sorted(keys)

    def test_max_abs_diff(self):
        a = PauliSum.from_strings(2, [(1.0, "X0"), (2.0, "Z1")])
        b = PauliSum.from_strings(2, [(1.0, "X0"), (2.001, "Z1")])
        assert a.max_abs_diff(b) == pytest.approx(0.001)
