"""AST, per-line layout, and renderer for the Verilog subset.

Every node carries a SourceLoc. The layout table records what each
physical line is (executable statement, declaration-ish code, comment,
blank) so that designs can be re-rendered with exact line fidelity and
breakpoint sliding can reason about non-executable lines.

Structural equality deliberately ignores columns and literal bases:
``structural_key`` is what the round-trip law compares.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class SourceLoc:
    file: int  # index into SourceUnit.files
    line: int  # 1-based
    col: int = 0  # 1-based; 0 for synthesized nodes


class LineClass(enum.Enum):
    EXECUTABLE = "executable"
    COMMENT = "comment"
    BLANK = "blank"
    DECLARATION = "declaration"


@dataclass(frozen=True)
class LineInfo:
    cls: LineClass
    comment: str | None = None  # full text for COMMENT lines, trailing text otherwise


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class SizedLiteral:
    width: int
    value: int
    loc: SourceLoc
    base: str = "h"  # rendering hint only, not structural

    def __post_init__(self):
        if self.value >= (1 << self.width):
            raise ValueError(f"literal {self.value} does not fit in {self.width} bits")


@dataclass(frozen=True)
class Identifier:
    name: str
    loc: SourceLoc


@dataclass(frozen=True)
class Unary:
    op: str  # ~ - !
    operand: "Expression"
    loc: SourceLoc


@dataclass(frozen=True)
class Binary:
    op: str  # + - & | ^ == != < > << >>
    lhs: "Expression"
    rhs: "Expression"
    loc: SourceLoc


Expression = SizedLiteral | Identifier | Unary | Binary


# --- statements ------------------------------------------------------------

@dataclass(frozen=True)
class BlockingAssign:
    target: str
    rhs: Expression
    loc: SourceLoc


@dataclass(frozen=True)
class NonBlockingAssign:
    target: str
    rhs: Expression
    loc: SourceLoc


@dataclass(frozen=True)
class BeginEnd:
    statements: tuple["Statement", ...]
    loc: SourceLoc       # the `begin` line
    end_line: int        # the `end` line


@dataclass(frozen=True)
class If:
    cond: Expression
    then_branch: "Statement"
    else_branch: "Statement | None"
    loc: SourceLoc
    else_line: int | None = None  # line carrying the `else` keyword


@dataclass(frozen=True)
class For:
    var: str
    init: Expression
    cond: Expression
    step: Expression  # new value assigned to var each iteration
    body: "Statement"
    loc: SourceLoc


Statement = BlockingAssign | NonBlockingAssign | BeginEnd | If | For


# --- module items ----------------------------------------------------------

class SignalKind(enum.Enum):
    WIRE = "wire"
    REG = "reg"
    INTEGER = "integer"


@dataclass(frozen=True)
class SignalDecl:
    kind: SignalKind
    width: int  # integers are 32
    names: tuple[str, ...]
    loc: SourceLoc


@dataclass(frozen=True)
class ContinuousAssign:
    target: str
    rhs: Expression
    loc: SourceLoc


@dataclass(frozen=True)
class AlwaysBlock:
    clock: str
    body: Statement
    loc: SourceLoc


@dataclass(frozen=True)
class PortConnection:
    port: str
    expr: Expression


@dataclass(frozen=True)
class ModuleInstance:
    module_name: str
    instance_name: str
    connections: tuple[PortConnection, ...]
    loc: SourceLoc


ModuleItem = SignalDecl | ContinuousAssign | AlwaysBlock | ModuleInstance


@dataclass(frozen=True)
class Port:
    direction: str  # "input" | "output"
    is_reg: bool
    width: int
    name: str


@dataclass(frozen=True)
class Module:
    name: str
    ports: tuple[Port, ...]
    items: tuple[ModuleItem, ...]
    loc: SourceLoc
    end_line: int  # the `endmodule` line


@dataclass(frozen=True)
class IncludeDirective:
    filename: str
    loc: SourceLoc


@dataclass(frozen=True)
class SourceFile:
    name: str
    includes: tuple[IncludeDirective, ...]
    modules: tuple[Module, ...]
    layout: tuple[LineInfo, ...]  # layout[i] describes line i+1
    # auxiliary (.vh) files carry declarations instead of modules
    decls: tuple[SignalDecl, ...] = ()

    @property
    def line_count(self) -> int:
        return len(self.layout)

    def line_class(self, line: int) -> LineClass:
        return self.layout[line - 1].cls

    def executable_lines(self) -> list[int]:
        return [i + 1 for i, info in enumerate(self.layout)
                if info.cls is LineClass.EXECUTABLE]

    def module_span(self, line: int) -> tuple[int, int] | None:
        """(header line, endmodule line) of the module containing `line`."""
        for mod in self.modules:
            if mod.loc.line <= line <= mod.end_line:
                return (mod.loc.line, mod.end_line)
        return None


@dataclass(frozen=True)
class SourceUnit:
    files: tuple[SourceFile, ...]

    @property
    def main(self) -> SourceFile:
        return self.files[0]

    def file_named(self, name: str) -> SourceFile | None:
        for f in self.files:
            if f.name == name:
                return f
        return None


# --- structural equality ---------------------------------------------------

def expr_key(e: Expression):
    if isinstance(e, SizedLiteral):
        return ("lit", e.width, e.value, e.loc.line)
    if isinstance(e, Identifier):
        return ("id", e.name, e.loc.line)
    if isinstance(e, Unary):
        return ("un", e.op, expr_key(e.operand), e.loc.line)
    return ("bin", e.op, expr_key(e.lhs), expr_key(e.rhs), e.loc.line)


def stmt_key(s: Statement):
    if isinstance(s, BlockingAssign):
        return ("ba", s.target, expr_key(s.rhs), s.loc.line)
    if isinstance(s, NonBlockingAssign):
        return ("nba", s.target, expr_key(s.rhs), s.loc.line)
    if isinstance(s, BeginEnd):
        return ("blk", tuple(stmt_key(x) for x in s.statements), s.loc.line, s.end_line)
    if isinstance(s, If):
        return ("if", expr_key(s.cond), stmt_key(s.then_branch),
                stmt_key(s.else_branch) if s.else_branch else None,
                s.loc.line, s.else_line)
    return ("for", s.var, expr_key(s.init), expr_key(s.cond), expr_key(s.step),
            stmt_key(s.body), s.loc.line)


def item_key(it: ModuleItem):
    if isinstance(it, SignalDecl):
        return ("decl", it.kind.value, it.width, it.names, it.loc.line)
    if isinstance(it, ContinuousAssign):
        return ("assign", it.target, expr_key(it.rhs), it.loc.line)
    if isinstance(it, AlwaysBlock):
        return ("always", it.clock, stmt_key(it.body), it.loc.line)
    return ("inst", it.module_name, it.instance_name,
            tuple((c.port, expr_key(c.expr)) for c in it.connections), it.loc.line)


def module_key(m: Module):
    return (m.name,
            tuple((p.direction, p.is_reg, p.width, p.name) for p in m.ports),
            tuple(item_key(i) for i in m.items),
            m.loc.line, m.end_line)


def file_key(f: SourceFile):
    return (f.name,
            tuple((i.filename, i.loc.line) for i in f.includes),
            tuple(module_key(m) for m in f.modules),
            tuple((li.cls, li.comment) for li in f.layout),
            tuple(item_key(d) for d in f.decls))


def unit_key(u: SourceUnit):
    return tuple(file_key(f) for f in u.files)


def units_equal(a: SourceUnit, b: SourceUnit) -> bool:
    return unit_key(a) == unit_key(b)


# --- rendering -------------------------------------------------------------

_PRECEDENCE = {"|": 1, "^": 2, "&": 3, "==": 4, "!=": 4,
               "<": 5, ">": 5, "<<": 6, ">>": 6, "+": 7, "-": 7}
_UNARY_PRECEDENCE = 8


def render_expr(e: Expression, parent_prec: int = 0) -> str:
    if isinstance(e, SizedLiteral):
        if e.base == "b":
            digits = format(e.value, "b")
        elif e.base == "d":
            digits = str(e.value)
        elif e.base == "o":
            digits = format(e.value, "o")
        else:
            digits = format(e.value, "x")
        return f"{e.width}'{e.base}{digits}"
    if isinstance(e, Identifier):
        return e.name
    if isinstance(e, Unary):
        inner = render_expr(e.operand, _UNARY_PRECEDENCE)
        text = f"{e.op}{inner}"
        return f"({text})" if parent_prec > _UNARY_PRECEDENCE else text
    prec = _PRECEDENCE[e.op]
    text = f"{render_expr(e.lhs, prec)} {e.op} {render_expr(e.rhs, prec + 1)}"
    return f"({text})" if parent_prec > prec else text


class _LineBuilder:
    def __init__(self, layout: tuple[LineInfo, ...]):
        self.layout = layout
        self.parts: dict[int, list[str]] = {}
        self.indent: dict[int, int] = {}

    def put(self, line: int, depth: int, text: str):
        self.parts.setdefault(line, []).append(text)
        if line not in self.indent:
            self.indent[line] = depth

    def build(self) -> str:
        out = []
        for i, info in enumerate(self.layout):
            line = i + 1
            if info.cls is LineClass.BLANK:
                out.append("")
                continue
            if info.cls is LineClass.COMMENT:
                out.append(info.comment or "//")
                continue
            pieces = self.parts.get(line, [])
            text = "  " * self.indent.get(line, 0) + " ".join(pieces)
            if info.comment:
                text = f"{text}  {info.comment}" if pieces else info.comment
            out.append(text)
        return "\n".join(out) + "\n"


def _emit_stmt(b: _LineBuilder, s: Statement, depth: int):
    if isinstance(s, (BlockingAssign, NonBlockingAssign)):
        op = "=" if isinstance(s, BlockingAssign) else "<="
        b.put(s.loc.line, depth, f"{s.target} {op} {render_expr(s.rhs)};")
    elif isinstance(s, BeginEnd):
        b.put(s.loc.line, depth, "begin")
        for inner in s.statements:
            _emit_stmt(b, inner, depth + 1)
        b.put(s.end_line, depth, "end")
    elif isinstance(s, If):
        b.put(s.loc.line, depth, f"if ({render_expr(s.cond)})")
        _emit_stmt(b, s.then_branch, depth if isinstance(s.then_branch, BeginEnd) else depth + 1)
        if s.else_branch is not None:
            b.put(s.else_line, depth, "else")
            _emit_stmt(b, s.else_branch,
                       depth if isinstance(s.else_branch, BeginEnd) else depth + 1)
    elif isinstance(s, For):
        header = (f"for ({s.var} = {render_expr(s.init)}; {render_expr(s.cond)}; "
                  f"{s.var} = {render_expr(s.step)})")
        b.put(s.loc.line, depth, header)
        _emit_stmt(b, s.body, depth if isinstance(s.body, BeginEnd) else depth + 1)
    else:
        raise TypeError(f"unknown statement {s!r}")


def _render_port(p: Port) -> str:
    kind = "reg" if p.is_reg else "wire"
    rng = f"[{p.width - 1}:0] " if p.width > 1 else ""
    return f"{p.direction} {kind} {rng}{p.name}"


def _render_decl(d: SignalDecl) -> str:
    names = ", ".join(d.names)
    if d.kind is SignalKind.INTEGER:
        return f"integer {names};"
    rng = f"[{d.width - 1}:0] " if d.width > 1 else ""
    return f"{d.kind.value} {rng}{names};"


def render_file(f: SourceFile) -> str:
    b = _LineBuilder(f.layout)
    for inc in f.includes:
        b.put(inc.loc.line, 0, f'`include "{inc.filename}"')
    for d in f.decls:
        b.put(d.loc.line, 0, _render_decl(d))
    for mod in f.modules:
        ports = ", ".join(_render_port(p) for p in mod.ports)
        b.put(mod.loc.line, 0, f"module {mod.name}({ports});")
        for item in mod.items:
            if isinstance(item, SignalDecl):
                b.put(item.loc.line, 1, _render_decl(item))
            elif isinstance(item, ContinuousAssign):
                b.put(item.loc.line, 1, f"assign {item.target} = {render_expr(item.rhs)};")
            elif isinstance(item, AlwaysBlock):
                b.put(item.loc.line, 1, f"always @(posedge {item.clock})")
                _emit_stmt(b, item.body, 1 if isinstance(item.body, BeginEnd) else 2)
            else:
                conns = ", ".join(f".{c.port}({render_expr(c.expr)})"
                                  for c in item.connections)
                b.put(item.loc.line, 1, f"{item.module_name} {item.instance_name}({conns});")
        b.put(mod.end_line, 0, "endmodule")
    return b.build()


def render(unit: SourceUnit) -> str:
    """Text of the unit's main file."""
    return render_file(unit.main)


def render_all(unit: SourceUnit) -> dict[str, str]:
    return {f.name: render_file(f) for f in unit.files}


# --- line arithmetic helpers (used by transformations) ----------------------

def _shift_loc(loc: SourceLoc, at: int, delta: int) -> SourceLoc:
    return replace(loc, line=loc.line + delta) if loc.line >= at else loc


def _shift_expr(e: Expression, at: int, delta: int) -> Expression:
    if isinstance(e, (SizedLiteral, Identifier)):
        return replace(e, loc=_shift_loc(e.loc, at, delta))
    if isinstance(e, Unary):
        return replace(e, operand=_shift_expr(e.operand, at, delta),
                       loc=_shift_loc(e.loc, at, delta))
    return replace(e, lhs=_shift_expr(e.lhs, at, delta),
                   rhs=_shift_expr(e.rhs, at, delta),
                   loc=_shift_loc(e.loc, at, delta))


def _shift_line_no(line: int | None, at: int, delta: int) -> int | None:
    if line is None:
        return None
    return line + delta if line >= at else line


def _shift_stmt(s: Statement, at: int, delta: int) -> Statement:
    loc = _shift_loc(s.loc, at, delta)
    if isinstance(s, (BlockingAssign, NonBlockingAssign)):
        return replace(s, rhs=_shift_expr(s.rhs, at, delta), loc=loc)
    if isinstance(s, BeginEnd):
        return replace(s, statements=tuple(_shift_stmt(x, at, delta) for x in s.statements),
                       loc=loc, end_line=_shift_line_no(s.end_line, at, delta))
    if isinstance(s, If):
        return replace(s, cond=_shift_expr(s.cond, at, delta),
                       then_branch=_shift_stmt(s.then_branch, at, delta),
                       else_branch=_shift_stmt(s.else_branch, at, delta) if s.else_branch else None,
                       loc=loc, else_line=_shift_line_no(s.else_line, at, delta))
    return replace(s, init=_shift_expr(s.init, at, delta),
                   cond=_shift_expr(s.cond, at, delta),
                   step=_shift_expr(s.step, at, delta),
                   body=_shift_stmt(s.body, at, delta), loc=loc)


def _shift_item(it: ModuleItem, at: int, delta: int) -> ModuleItem:
    loc = _shift_loc(it.loc, at, delta)
    if isinstance(it, SignalDecl):
        return replace(it, loc=loc)
    if isinstance(it, ContinuousAssign):
        return replace(it, rhs=_shift_expr(it.rhs, at, delta), loc=loc)
    if isinstance(it, AlwaysBlock):
        return replace(it, body=_shift_stmt(it.body, at, delta), loc=loc)
    return replace(it, connections=tuple(
        PortConnection(c.port, _shift_expr(c.expr, at, delta)) for c in it.connections), loc=loc)


def shift_file_lines(f: SourceFile, at: int, delta: int,
                     new_layout: tuple[LineInfo, ...]) -> SourceFile:
    """Shift every construct at line >= `at` by `delta`, installing `new_layout`."""
    return replace(
        f,
        includes=tuple(replace(i, loc=_shift_loc(i.loc, at, delta)) for i in f.includes),
        modules=tuple(
            replace(m,
                    items=tuple(_shift_item(it, at, delta) for it in m.items),
                    loc=_shift_loc(m.loc, at, delta),
                    end_line=_shift_line_no(m.end_line, at, delta))
            for m in f.modules),
        layout=new_layout,
        decls=tuple(_shift_item(d, at, delta) for d in f.decls),
    )


def stmt_span(s: Statement) -> tuple[int, int]:
    """First and last physical line occupied by a statement."""
    first = s.loc.line
    last = s.loc.line
    if isinstance(s, BeginEnd):
        last = max(last, s.end_line)
        for inner in s.statements:
            last = max(last, stmt_span(inner)[1])
    elif isinstance(s, If):
        last = max(last, stmt_span(s.then_branch)[1])
        if s.else_line is not None:
            last = max(last, s.else_line)
        if s.else_branch is not None:
            last = max(last, stmt_span(s.else_branch)[1])
    elif isinstance(s, For):
        last = max(last, stmt_span(s.body)[1])
    return first, last


def walk_statements(s: Statement):
    """Yield every statement in the subtree, preorder."""
    yield s
    if isinstance(s, BeginEnd):
        for inner in s.statements:
            yield from walk_statements(inner)
    elif isinstance(s, If):
        yield from walk_statements(s.then_branch)
        if s.else_branch is not None:
            yield from walk_statements(s.else_branch)
    elif isinstance(s, For):
        yield from walk_statements(s.body)


def walk_expressions(e: Expression):
    yield e
    if isinstance(e, Unary):
        yield from walk_expressions(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expressions(e.lhs)
        yield from walk_expressions(e.rhs)


def statement_expressions(s: Statement):
    """Expressions appearing directly in one statement (not recursing into children)."""
    if isinstance(s, (BlockingAssign, NonBlockingAssign)):
        yield s.rhs
    elif isinstance(s, If):
        yield s.cond
    elif isinstance(s, For):
        yield s.init
        yield s.cond
        yield s.step
