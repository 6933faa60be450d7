"""Four-state logic vectors for the Verilog subset.

A ``Bits`` is a fixed-width vector whose bits are 0, 1, x (unknown) or
z (high impedance). Defined bits live in ``value``; ``x_mask`` and
``z_mask`` flag the unknown/high-impedance positions. Bits covered by a
mask are always zero in ``value``, so equal vectors compare equal as
dataclasses.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_WIDTH = 64


@dataclass(frozen=True)
class Bits:
    width: int
    value: int = 0
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} out of range")
        m = self.mask
        if self.x_mask & self.z_mask:
            raise ValueError("bit cannot be both x and z")
        if self.value & (self.x_mask | self.z_mask):
            raise ValueError("defined value overlaps x/z bits")
        if (self.value | self.x_mask | self.z_mask) & ~m:
            raise ValueError("bits outside declared width")

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def unknown(self) -> int:
        """Bits that are either x or z."""
        return self.x_mask | self.z_mask

    @staticmethod
    def of(width: int, value: int) -> "Bits":
        return Bits(width, value & ((1 << width) - 1))

    @staticmethod
    def all_x(width: int) -> "Bits":
        return Bits(width, 0, (1 << width) - 1, 0)

    @staticmethod
    def all_z(width: int) -> "Bits":
        return Bits(width, 0, 0, (1 << width) - 1)

    def is_defined(self) -> bool:
        return self.unknown == 0

    def to_int(self) -> int | None:
        """Unsigned integer value, or None if any bit is x/z."""
        return self.value if self.is_defined() else None

    def has_z(self) -> bool:
        return self.z_mask != 0

    def zext(self, width: int) -> "Bits":
        """Zero-extend to a wider width (extension bits are defined 0)."""
        if width < self.width:
            raise ValueError("zext cannot narrow")
        return Bits(width, self.value, self.x_mask, self.z_mask)

    def trunc(self, width: int) -> "Bits":
        m = (1 << width) - 1
        return Bits(width, self.value & m, self.x_mask & m, self.z_mask & m)

    def is_truthy(self) -> bool:
        """Condition semantics: true iff some bit is a definite 1.

        An all-unknown condition selects the false branch, matching
        event-simulation behavior for x conditions.
        """
        return self.value != 0

    def __str__(self) -> str:
        chars = []
        for i in range(self.width - 1, -1, -1):
            bit = 1 << i
            if self.x_mask & bit:
                chars.append("x")
            elif self.z_mask & bit:
                chars.append("z")
            else:
                chars.append("1" if self.value & bit else "0")
        return f"{self.width}'b{''.join(chars)}"

    @staticmethod
    def parse(text: str) -> "Bits":
        """Inverse of str(); accepts ``<width>'b<bits>`` with x/z digits."""
        width_s, _, digits = text.partition("'b")
        if not width_s or not digits:
            raise ValueError(f"bad bits literal: {text!r}")
        width = int(width_s)
        if len(digits) != width:
            raise ValueError(f"bad bits literal: {text!r}")
        value = x_mask = z_mask = 0
        for ch in digits:
            value <<= 1
            x_mask <<= 1
            z_mask <<= 1
            if ch == "1":
                value |= 1
            elif ch == "x":
                x_mask |= 1
            elif ch == "z":
                z_mask |= 1
            elif ch != "0":
                raise ValueError(f"bad bits digit {ch!r}")
        return Bits(width, value, x_mask, z_mask)


def _reconcile(a: Bits, b: Bits) -> tuple[Bits, Bits, int]:
    w = max(a.width, b.width)
    return a.zext(w), b.zext(w), w


def bit_not(a: Bits) -> Bits:
    """~a: x and z map to x, defined bits invert."""
    xm = a.unknown
    return Bits(a.width, ~a.value & a.mask & ~xm, xm, 0)


def bit_and(a: Bits, b: Bits) -> Bits:
    a, b, w = _reconcile(a, b)
    # definite 0 wherever either side is definite 0
    zero = (~a.value & ~a.unknown) | (~b.value & ~b.unknown)
    one = a.value & b.value
    xm = ~(zero | one) & a.mask
    return Bits(w, one, xm & a.mask, 0)


def bit_or(a: Bits, b: Bits) -> Bits:
    a, b, w = _reconcile(a, b)
    one = a.value | b.value
    zero = (~a.value & ~a.unknown) & (~b.value & ~b.unknown)
    xm = ~(zero | one) & a.mask
    return Bits(w, one, xm, 0)


def bit_xor(a: Bits, b: Bits) -> Bits:
    a, b, w = _reconcile(a, b)
    xm = a.unknown | b.unknown
    return Bits(w, (a.value ^ b.value) & ~xm, xm, 0)


def _arith(a: Bits, b: Bits, op) -> Bits:
    """Arithmetic helper: any unknown operand bit poisons the whole result."""
    a, b, w = _reconcile(a, b)
    if a.unknown or b.unknown:
        return Bits.all_x(w)
    return Bits.of(w, op(a.value, b.value))


def add(a: Bits, b: Bits) -> Bits:
    return _arith(a, b, lambda x, y: x + y)


def sub(a: Bits, b: Bits) -> Bits:
    return _arith(a, b, lambda x, y: x - y)


def neg(a: Bits) -> Bits:
    if a.unknown:
        return Bits.all_x(a.width)
    return Bits.of(a.width, -a.value)


def logic_not(a: Bits) -> Bits:
    """!a — 1-bit result; x unless the truth value is decided."""
    if a.value != 0:
        return Bits.of(1, 0)
    if a.unknown:
        return Bits.all_x(1)
    return Bits.of(1, 1)


def _compare(a: Bits, b: Bits, op) -> Bits:
    a, b, _ = _reconcile(a, b)
    if a.unknown or b.unknown:
        return Bits.all_x(1)
    return Bits.of(1, 1 if op(a.value, b.value) else 0)


def eq(a: Bits, b: Bits) -> Bits:
    return _compare(a, b, lambda x, y: x == y)


def ne(a: Bits, b: Bits) -> Bits:
    return _compare(a, b, lambda x, y: x != y)


def lt(a: Bits, b: Bits) -> Bits:
    return _compare(a, b, lambda x, y: x < y)


def gt(a: Bits, b: Bits) -> Bits:
    return _compare(a, b, lambda x, y: x > y)


def shl(a: Bits, b: Bits) -> Bits:
    """a << b; result keeps a's width. Unknown shift poisons the result."""
    if b.unknown:
        return Bits.all_x(a.width)
    n = b.value
    if n >= a.width:
        return Bits.of(a.width, 0)
    m = a.mask
    return Bits(a.width, (a.value << n) & m, (a.x_mask << n) & m, (a.z_mask << n) & m)


def shr(a: Bits, b: Bits) -> Bits:
    if b.unknown:
        return Bits.all_x(a.width)
    n = b.value
    if n >= a.width:
        return Bits.of(a.width, 0)
    return Bits(a.width, a.value >> n, a.x_mask >> n, a.z_mask >> n)


BINARY_OPS = {
    "+": add,
    "-": sub,
    "&": bit_and,
    "|": bit_or,
    "^": bit_xor,
    "==": eq,
    "!=": ne,
    "<": lt,
    ">": gt,
    "<<": shl,
    ">>": shr,
}

UNARY_OPS = {
    "~": bit_not,
    "-": neg,
    "!": logic_not,
}
