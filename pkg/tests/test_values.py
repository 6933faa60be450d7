import random

import pytest

from hdldiff import values
from hdldiff.values import Bits


def test_defined_roundtrip():
    b = Bits.of(4, 10)
    assert b.to_int() == 10
    assert str(b) == "4'b1010"
    assert Bits.parse("4'b1010") == b


def test_x_and_z_render():
    assert str(Bits.all_x(2)) == "2'bxx"
    assert str(Bits.all_z(3)) == "3'bzzz"
    assert Bits.parse("3'b0xz") == Bits(3, 0, 0b010, 0b001)


def test_invert_truth_table():
    # per-bit: ~0=1, ~1=0, ~x=x, ~z=x
    assert values.bit_not(Bits.of(1, 0)) == Bits.of(1, 1)
    assert values.bit_not(Bits.of(1, 1)) == Bits.of(1, 0)
    assert values.bit_not(Bits.all_x(1)) == Bits.all_x(1)
    assert values.bit_not(Bits.all_z(1)) == Bits.all_x(1)


def test_double_negation_on_defined_and_x():
    for v in (Bits.of(1, 0), Bits.of(1, 1), Bits.all_x(1)):
        assert values.bit_not(values.bit_not(v)) == v
    # z degrades to x after a double negation
    assert values.bit_not(values.bit_not(Bits.all_z(1))) == Bits.all_x(1)


def test_and_or_with_unknowns():
    x = Bits.all_x(1)
    zero = Bits.of(1, 0)
    one = Bits.of(1, 1)
    assert values.bit_and(x, zero) == zero  # 0 dominates
    assert values.bit_and(x, one) == x
    assert values.bit_or(x, one) == one  # 1 dominates
    assert values.bit_or(x, zero) == x


def test_arithmetic_poisons_on_unknown():
    assert values.add(Bits.all_x(4), Bits.of(4, 1)) == Bits.all_x(4)
    assert values.sub(Bits.of(4, 0), Bits.of(4, 1)) == Bits.of(4, 15)


def test_width_reconciliation_zero_extends():
    r = values.add(Bits.of(2, 3), Bits.of(4, 3))
    assert r == Bits.of(4, 6)


def test_logic_not():
    assert values.logic_not(Bits.of(4, 0)) == Bits.of(1, 1)
    assert values.logic_not(Bits.of(4, 8)) == Bits.of(1, 0)
    assert values.logic_not(Bits.all_x(4)) == Bits.all_x(1)
    # a definite 1 decides the answer even next to x bits
    assert values.logic_not(Bits(2, 0b10, 0b01, 0)) == Bits.of(1, 0)


def test_shifts():
    assert values.shl(Bits.of(4, 0b0011), Bits.of(2, 1)) == Bits.of(4, 0b0110)
    assert values.shr(Bits.of(4, 0b1100), Bits.of(2, 2)) == Bits.of(4, 0b0011)
    assert values.shl(Bits.of(4, 1), Bits.of(4, 9)) == Bits.of(4, 0)
    assert values.shl(Bits.of(4, 1), Bits.all_x(2)) == Bits.all_x(4)


def test_compare_unknown_is_x():
    assert values.eq(Bits.all_x(1), Bits.of(1, 0)) == Bits.all_x(1)
    assert values.eq(Bits.of(4, 3), Bits.of(4, 3)) == Bits.of(1, 1)
    assert values.lt(Bits.of(4, 3), Bits.of(4, 5)) == Bits.of(1, 1)


def test_random_defined_ops_match_python_ints():
    rng = random.Random(7)
    for _ in range(2000):
        w = rng.randint(1, 16)
        a = rng.randrange(1 << w)
        b = rng.randrange(1 << w)
        mask = (1 << w) - 1
        assert values.add(Bits.of(w, a), Bits.of(w, b)).to_int() == (a + b) & mask
        assert values.sub(Bits.of(w, a), Bits.of(w, b)).to_int() == (a - b) & mask
        assert values.bit_xor(Bits.of(w, a), Bits.of(w, b)).to_int() == a ^ b
        assert values.bit_and(Bits.of(w, a), Bits.of(w, b)).to_int() == a & b
        assert values.bit_or(Bits.of(w, a), Bits.of(w, b)).to_int() == a | b


def test_invalid_constructions_rejected():
    with pytest.raises(ValueError):
        Bits(0, 0)
    with pytest.raises(ValueError):
        Bits(2, 1, 1, 0)  # value overlaps x
    with pytest.raises(ValueError):
        Bits(1, 0, 1, 1)  # both x and z
