"""Constant evaluation of subset expressions.

Used by transformation eligibility checks (dead-loop guards, literal
splits). Evaluation mirrors the simulator's width rules: operands are
zero-extended to the wider width, each operator wraps at its result
width, and the final value is reduced modulo 2**width.
"""

from __future__ import annotations

from .source import Binary, Expression, For, Identifier, SizedLiteral, Unary

_TRIP_LIMIT = 1 << 16


def _eval(e: Expression, env: dict[str, tuple[int, int]]) -> tuple[int, int] | None:
    """(value, width) or None when the expression is not constant."""
    if isinstance(e, SizedLiteral):
        return e.value, e.width
    if isinstance(e, Identifier):
        return env.get(e.name)
    if isinstance(e, Unary):
        inner = _eval(e.operand, env)
        if inner is None:
            return None
        v, w = inner
        if e.op == "~":
            return (~v) & ((1 << w) - 1), w
        if e.op == "-":
            return (-v) & ((1 << w) - 1), w
        return (0 if v else 1), 1
    if isinstance(e, Binary):
        lhs = _eval(e.lhs, env)
        rhs = _eval(e.rhs, env)
        if lhs is None or rhs is None:
            return None
        (a, wa), (b, wb) = lhs, rhs
        w = max(wa, wb)
        mask = (1 << w) - 1
        op = e.op
        if op == "+":
            return (a + b) & mask, w
        if op == "-":
            return (a - b) & mask, w
        if op == "&":
            return a & b, w
        if op == "|":
            return a | b, w
        if op == "^":
            return a ^ b, w
        if op == "==":
            return (1 if a == b else 0), 1
        if op == "!=":
            return (1 if a != b else 0), 1
        if op == "<":
            return (1 if a < b else 0), 1
        if op == ">":
            return (1 if a > b else 0), 1
        if op == "<<":
            # shift results keep the left operand's width; the shift count
            # is self-determined
            return ((a << b) & ((1 << wa) - 1) if b < wa else 0), wa
        if op == ">>":
            return ((a >> b) if b < wa else 0), wa
    return None


def const_eval(expr: Expression, width: int) -> int | None:
    """Value of a constant expression modulo 2**width; None when any
    identifier makes it non-constant."""
    if width < 1:
        raise ValueError("width must be >= 1")
    result = _eval(expr, {})
    if result is None:
        return None
    value, _ = result
    return value & ((1 << width) - 1)


def const_eval_with_env(expr: Expression, env: dict[str, tuple[int, int]]) -> int | None:
    result = _eval(expr, env)
    return result[0] if result is not None else None


def loop_trip_count(loop: For, var_width: int = 32) -> int | None:
    """Number of iterations of a for loop whose init/cond/step depend only
    on the loop variable and constants. None when not statically known."""
    init = _eval(loop.init, {})
    if init is None:
        return None
    value = init[0] & ((1 << var_width) - 1)
    trips = 0
    while trips <= _TRIP_LIMIT:
        env = {loop.var: (value, var_width)}
        cond = _eval(loop.cond, env)
        if cond is None:
            return None
        if cond[0] == 0:
            return trips
        trips += 1
        step = _eval(loop.step, env)
        if step is None:
            return None
        value = step[0] & ((1 << var_width) - 1)
    return None
