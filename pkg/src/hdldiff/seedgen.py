"""Random generation of subset-conforming seed designs.

Seeds are built as text and re-validated (parse, elaborate, short
simulation) before being returned. Every seed ships the raw material the
transformations need: registers written in isolation whose values are
read by later-scheduled blocks, if/else pairs, constant-trip and
unreachable loops, comments and blank lines near executable statements,
and blocks long enough to fold.
"""

from __future__ import annotations

import random

from .debugger import RunAll, Session
from .parser import parse
from .sim import SimConfig
from .source import SourceUnit

MAX_ATTEMPTS = 25

_COMMENTS = (
    "// state update",
    "// control path",
    "// data path",
    "// pipeline stage",
    "// scratch values",
    "// derived result",
)


def _literal(rng: random.Random, width: int) -> str:
    value = rng.randrange(1 << min(width, 16))
    return f"{width}'h{value:x}"


def _expr(rng: random.Random, names: list[tuple[str, int]], depth: int) -> str:
    if depth <= 0 or rng.random() < 0.35 or not names:
        if names and rng.random() < 0.6:
            return rng.choice(names)[0]
        return _literal(rng, rng.choice(names)[1] if names else rng.randint(1, 8))
    if rng.random() < 0.2:
        op = rng.choice(["~", "!", "-"])
        return f"{op}({_expr(rng, names, depth - 1)})"
    op = rng.choice(["+", "-", "&", "|", "^", "+", "&", "|", "<<", ">>"])
    return f"({_expr(rng, names, depth - 1)} {op} {_expr(rng, names, depth - 1)})"


def _cond(rng: random.Random, names: list[tuple[str, int]]) -> str:
    name, width = rng.choice(names)
    op = rng.choice(["==", "!=", "<", ">"])
    return f"{name} {op} {_literal(rng, width)}"


class _Design:
    """Accumulates one random top module, sized roughly to a line target."""

    def __init__(self, rng: random.Random, target: int):
        self.rng = rng
        self.target = target
        self.n_blocks = max(2, min(30, target // 30))
        self.reg_seq = 0
        self.int_seq = 0
        self.block_regs: list[list[tuple[str, int]]] = [[] for _ in range(self.n_blocks)]
        self.xfer_regs: dict[int, tuple[str, int]] = {}
        self.integers: list[str] = []
        self.body: list[str] = []
        self.with_instance = rng.random() < 0.35

    def _new_reg(self, block: int) -> tuple[str, int]:
        self.reg_seq += 1
        reg = (f"reg{self.reg_seq}", self.rng.choice([1, 1, 2, 4, 8, 16]))
        self.block_regs[block].append(reg)
        return reg

    def _new_integer(self) -> str:
        self.int_seq += 1
        self.integers.append(f"idx{self.int_seq}")
        return self.integers[-1]

    def _filler(self, out: list[str], p=0.25):
        r = self.rng.random()
        if r < p * 0.6:
            out.append("    " + self.rng.choice(_COMMENTS))
        elif r < p:
            out.append("")

    def _emit_block(self, index: int):
        rng = self.rng
        out = self.body
        out.append("")
        if rng.random() < 0.4:
            out.append("  " + rng.choice(_COMMENTS))
        out.append("  always @(posedge clk) begin")
        owned = [self._new_reg(index) for _ in range(rng.randint(2, 5))]
        readable = list(owned)
        if index > 0 and (index - 1) in self.xfer_regs:
            upstream = self.xfer_regs[index - 1]
            readable.append(upstream)
            # guaranteed downstream read of the transfer register
            out.append(f"    {owned[0][0]} <= {upstream[0]} ^ {_literal(rng, upstream[1])};")
        for _ in range(rng.randint(2, 6)):
            kind = rng.random()
            if kind < 0.45:
                reg = rng.choice(owned)
                op = "<=" if rng.random() < 0.7 else "="
                out.append(f"    {reg[0]} {op} {_expr(rng, readable, rng.randint(0, 2))};")
            elif kind < 0.68:
                then_reg = rng.choice(owned)
                else_reg = rng.choice(owned)
                out.append(f"    if ({_cond(rng, readable)}) begin")
                out.append(f"      {then_reg[0]} <= {_expr(rng, readable, 1)};")
                out.append("    end else begin")
                out.append(f"      {else_reg[0]} <= {_expr(rng, readable, 1)};")
                out.append("    end")
            elif kind < 0.86:
                reg = rng.choice(owned)
                idx = self._new_integer()
                if rng.random() < 0.25:
                    init, bound = 5, 3  # guard fails at entry
                else:
                    init, bound = 0, rng.randint(1, 8)
                out.append(f"    for ({idx} = {init}; {idx} < {bound}; {idx} = {idx} + 1) begin")
                out.append(f"      {reg[0]} <= {_expr(rng, readable, 1)};")
                out.append("    end")
            else:
                self._filler(out, 0.9)
        if index < self.n_blocks - 1:
            # written exactly once in this block; read by the next block
            xfer = self._new_reg(index)
            self.xfer_regs[index] = xfer
            donors = [r for r in readable if r != xfer]
            out.append(f"    {xfer[0]} <= {_expr(rng, donors, 1)};")
        out.append("  end")

    def _decl_estimate(self) -> int:
        return self.reg_seq + self.int_seq + 10

    def render(self) -> str:
        rng = self.rng
        for i in range(self.n_blocks):
            self._emit_block(i)
            if len(self.body) + self._decl_estimate() > self.target - 8:
                break

        lines: list[str] = [f"// generated design {rng.randrange(1 << 30):08x}"]
        if rng.random() < 0.5:
            lines.append("")
        lines.append("module top(input wire clk);")
        all_regs = [r for block in self.block_regs for r in block]
        for name, width in all_regs:
            lines.append(f"  reg [{width - 1}:0] {name};" if width > 1
                         else f"  reg {name};")
            if rng.random() < 0.05:
                lines.append("  " + rng.choice(_COMMENTS))
        for name in self.integers:
            lines.append(f"  integer {name};")
        n_wires = rng.randint(1, 3)
        for i in range(n_wires):
            name, width = f"net{i + 1}", rng.choice([1, 2, 4, 8])
            lines.append(f"  wire [{width - 1}:0] {name};" if width > 1
                         else f"  wire {name};")
            lines.append(f"  assign {name} = {_expr(rng, all_regs, rng.randint(1, 2))};")
        if self.with_instance and all_regs:
            src = rng.choice(all_regs)[0]
            lines.append("  wire sub_out;")
            lines.append(f"  sub u1(.clk(clk), .din({src}), .dout(sub_out));")
        lines.extend(self.body)
        lines.append("endmodule")
        if self.with_instance and all_regs:
            lines.append("")
            lines.extend([
                "module sub(input wire clk, input wire [15:0] din, output wire dout);",
                "  reg [15:0] hold;",
                "  always @(posedge clk) begin",
                "    hold <= din + 16'h0001;",
                "  end",
                "  assign dout = hold == 16'h0000;",
                "endmodule",
            ])
        return "\n".join(lines) + "\n"


def generate_seed_text(rng: random.Random, line_budget: tuple[int, int]) -> str:
    lo, hi = line_budget
    target = rng.randint(lo, hi)
    text = _Design(rng, target).render()
    lines = text.splitlines()
    while len(lines) < lo:
        # pad inside the top module, just before endmodule
        at = len(lines) - 1
        while lines[at] != "endmodule":
            at -= 1
        lines.insert(at, "  " + rng.choice(_COMMENTS))
    return "\n".join(lines) + "\n"


class GenerationRetryExceeded(Exception):
    pass


def generate_seed(rng: random.Random, line_budget: tuple[int, int] = (700, 1000)) -> SourceUnit:
    """A random subset design within the line budget that parses,
    elaborates and simulates cleanly."""
    if line_budget[0] < 20:
        raise ValueError("line budget minimum must be >= 20")
    last_error = None
    for _ in range(MAX_ATTEMPTS):
        text = generate_seed_text(rng, line_budget)
        if not line_budget[0] <= len(text.splitlines()) <= line_budget[1]:
            last_error = f"line count {len(text.splitlines())} outside budget"
            continue
        try:
            unit = parse(text)
            session = Session(unit, SimConfig(total_sim_time=30, reset_window=0))
            session.apply(RunAll())
            return unit
        except Exception as exc:  # retry on any self-check failure
            last_error = repr(exc)
    raise GenerationRetryExceeded(f"could not generate a valid seed: {last_error}")
