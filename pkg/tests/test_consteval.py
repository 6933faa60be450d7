import random

from hdldiff.consteval import const_eval, loop_trip_count
from hdldiff.sim import _eval_expr
from hdldiff.source import Binary, For, Identifier, SizedLiteral, SourceLoc, Unary
from hdldiff.values import Bits

L = SourceLoc(0, 1)


def lit(width, value):
    return SizedLiteral(width, value, L)


def test_simple_sums():
    assert const_eval(Binary("+", lit(2, 1), lit(2, 1), L), 2) == 2
    # 2-bit wraparound
    assert const_eval(Binary("+", lit(2, 3), lit(2, 1), L), 2) == 0


def test_two_bit_wraparound_exhaustive():
    # brute force over all operand pairs at width 2
    for a in range(4):
        for b in range(4):
            expr = Binary("+", lit(2, a), lit(2, b), L)
            assert const_eval(expr, 2) == (a + b) % 4


def test_identifier_is_not_constant():
    expr = Binary("+", Identifier("i", L), lit(1, 1), L)
    assert const_eval(expr, 1) is None


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        w = rng.randint(1, 8)
        return lit(w, rng.randrange(1 << w))
    if rng.random() < 0.25:
        return Unary(rng.choice(["~", "-", "!"]), _random_expr(rng, depth - 1), L)
    op = rng.choice(["+", "-", "&", "|", "^", "==", "!=", "<", ">", "<<", ">>"])
    return Binary(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1), L)


def _no_reads(name):
    raise AssertionError("constant expressions read no signals")


def test_agrees_with_four_state_evaluator():
    # independent oracle: the simulator's vector evaluator on defined bits
    rng = random.Random(1234)
    for _ in range(10_000):
        expr = _random_expr(rng, rng.randint(1, 5))
        width = rng.randint(1, 16)
        got = const_eval(expr, width)
        oracle = _eval_expr(expr, _no_reads)
        assert oracle.is_defined()
        assert got == oracle.value & ((1 << width) - 1)


def _random_addsub(rng, depth, width):
    if depth == 0 or rng.random() < 0.35:
        return lit(width, rng.randrange(1 << width))
    return Binary(rng.choice(["+", "-"]), _random_addsub(rng, depth - 1, width),
                  _random_addsub(rng, depth - 1, width), L)


def _bigint(e):
    if isinstance(e, SizedLiteral):
        return e.value
    if e.op == "+":
        return _bigint(e.lhs) + _bigint(e.rhs)
    return _bigint(e.lhs) - _bigint(e.rhs)


def test_addsub_trees_match_bigint_modulo():
    # modular congruence makes intermediate wrapping invisible for +/-
    # as long as every literal carries the evaluation width
    rng = random.Random(99)
    for _ in range(2000):
        width = rng.randint(1, 16)
        expr = _random_addsub(rng, rng.randint(1, 5), width)
        assert const_eval(expr, width) == _bigint(expr) % (1 << width)


def _loop(init, cond_op, bound, step):
    return For("i", lit(32, init),
               Binary(cond_op, Identifier("i", L), lit(32, bound), L),
               Binary("+", Identifier("i", L), lit(32, step), L),
               SizedLiteral(1, 0, L), L)  # body unused here


def test_loop_trip_counts():
    assert loop_trip_count(_loop(0, "<", 8, 1)) == 8
    assert loop_trip_count(_loop(5, "<", 3, 1)) == 0
    assert loop_trip_count(_loop(0, "<", 7, 2)) == 4


def test_loop_trip_count_non_constant():
    loop = For("i", Identifier("n", L),
               Binary("<", Identifier("i", L), lit(32, 8), L),
               Binary("+", Identifier("i", L), lit(32, 1), L),
               SizedLiteral(1, 0, L), L)
    assert loop_trip_count(loop) is None
