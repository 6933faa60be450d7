"""Tokenizer and recursive-descent parser for the Verilog subset.

The accepted grammar is documented in docs/grammar.md. The subset keeps
a strict line discipline (headers, declarations and statements each fit
on one line; `begin`/`end` may share a header line), which is what makes
exact-line re-rendering possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .source import (
    AlwaysBlock, BeginEnd, BlockingAssign, Binary, ContinuousAssign, Expression,
    For, Identifier, If, IncludeDirective, LineClass, LineInfo, Module,
    ModuleInstance, NonBlockingAssign, Port, PortConnection, SignalDecl,
    SignalKind, SizedLiteral, SourceFile, SourceLoc, SourceUnit, Statement,
    Unary, walk_statements,
)

KEYWORDS = {
    "module", "endmodule", "input", "output", "wire", "reg", "integer",
    "assign", "always", "posedge", "begin", "end", "if", "else", "for",
}

_TOKEN_RE = re.compile(r"""
    (?P<sized>\d+'[bdho][0-9a-fA-FxzXZ_]+)
  | (?P<number>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<string>"[^"\n]*")
  | (?P<directive>`[A-Za-z_]+)
  | (?P<op><<|>>|<=|==|!=|[~!&|^+\-<>=@(),;.\[\]:])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, filename: str = "<input>"):
        super().__init__(f"{filename}:{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename


@dataclass(frozen=True)
class Token:
    kind: str  # sized | number | id | keyword | string | directive | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str, filename: str = "<input>") -> tuple[list[Token], list[LineInfo]]:
    """Tokens plus a provisional layout (comment/blank lines classified now,
    code lines refined after parsing)."""
    tokens: list[Token] = []
    layout: list[LineInfo] = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, raw in enumerate(lines, start=1):
        code = raw
        trailing = None
        idx = raw.find("//")
        if idx != -1:
            code = raw[:idx]
            trailing = raw[idx:]
        if code.strip() == "":
            if trailing is not None:
                layout.append(LineInfo(LineClass.COMMENT, raw.rstrip()))
            else:
                layout.append(LineInfo(LineClass.BLANK))
            continue
        layout.append(LineInfo(LineClass.DECLARATION, trailing.strip() if trailing else None))
        pos = 0
        while pos < len(code):
            if code[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(code, pos)
            if not m:
                raise ParseError(f"unexpected character {code[pos]!r}",
                                 lineno, pos + 1, filename)
            kind = m.lastgroup
            value = m.group()
            if kind == "id" and value in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, value, lineno, pos + 1))
            pos = m.end()
    last_line = len(lines) if lines else 1
    tokens.append(Token("eof", "", last_line + 1, 1))
    return tokens, layout


def _parse_sized(tok: Token, filename: str) -> tuple[int, int, str]:
    width_s, rest = tok.text.split("'", 1)
    base = rest[0]
    digits = rest[1:].replace("_", "")
    if re.search(r"[xzXZ]", digits):
        raise ParseError("x/z digits are outside the subset (literals are 2-state)",
                         tok.line, tok.col, filename)
    width = int(width_s)
    if width < 1 or width > 64:
        raise ParseError(f"literal width {width} out of range 1..64",
                         tok.line, tok.col, filename)
    radix = {"b": 2, "d": 10, "h": 16, "o": 8}[base]
    value = int(digits, radix)
    if value >= (1 << width):
        raise ParseError(f"literal value does not fit in {width} bits",
                         tok.line, tok.col, filename)
    return width, value, base


class _Parser:
    def __init__(self, tokens: list[Token], filename: str, file_index: int):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename
        self.file_index = file_index

    # -- token helpers --
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col, self.filename)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col, self.filename)
        return self.next()

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def loc(self, tok: Token) -> SourceLoc:
        return SourceLoc(self.file_index, tok.line, tok.col)

    # -- grammar --
    def parse_expression(self) -> Expression:
        return self._parse_binary(1)

    _LEVELS = [["|"], ["^"], ["&"], ["==", "!="], ["<", ">"], ["<<", ">>"], ["+", "-"]]

    def _parse_binary(self, level: int) -> Expression:
        if level > len(self._LEVELS):
            return self._parse_unary()
        ops = self._LEVELS[level - 1]
        lhs = self._parse_binary(level + 1)
        while self.at("op") and self.peek().text in ops:
            tok = self.next()
            rhs = self._parse_binary(level + 1)
            lhs = Binary(tok.text, lhs, rhs, self.loc(tok))
        return lhs

    def _parse_unary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("~", "-", "!"):
            self.next()
            inner = self._parse_unary()
            return Unary(tok.text, inner, self.loc(tok))
        return self._parse_primary()

    def _parse_primary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "sized":
            self.next()
            width, value, base = _parse_sized(tok, self.filename)
            return SizedLiteral(width, value, self.loc(tok), base)
        if tok.kind == "number":
            # bare decimal integers are 32-bit literals
            self.next()
            value = int(tok.text)
            if value >= (1 << 32):
                self.fail("bare integer too large", tok)
            return SizedLiteral(32, value, self.loc(tok), "d")
        if tok.kind == "id":
            self.next()
            return Identifier(tok.text, self.loc(tok))
        if tok.kind == "op" and tok.text == "(":
            self.next()
            inner = self.parse_expression()
            self.expect("op", ")")
            return inner
        self.fail(f"expected expression, found {tok.text or 'end of input'!r}", tok)

    def _parse_range(self) -> int:
        """[msb:0] -> width msb+1; absent -> width 1."""
        if not self.at("op", "["):
            return 1
        open_tok = self.next()
        msb_tok = self.expect("number")
        self.expect("op", ":")
        lsb_tok = self.expect("number")
        self.expect("op", "]")
        if int(lsb_tok.text) != 0:
            self.fail("ranges must be [msb:0]", lsb_tok)
        width = int(msb_tok.text) + 1
        if width < 1 or width > 64:
            self.fail(f"width {width} out of range 1..64", msb_tok)
        return width

    def parse_port(self) -> Port:
        dir_tok = self.peek()
        if not (self.at("keyword", "input") or self.at("keyword", "output")):
            self.fail("expected 'input' or 'output'")
        self.next()
        is_reg = False
        if self.at("keyword", "wire"):
            self.next()
        elif self.at("keyword", "reg"):
            if dir_tok.text == "input":
                self.fail("input ports cannot be reg", self.peek())
            self.next()
            is_reg = True
        width = self._parse_range()
        name = self.expect("id")
        return Port(dir_tok.text, is_reg, width, name.text)

    def parse_module(self) -> Module:
        mod_tok = self.expect("keyword", "module")
        name = self.expect("id")
        self.expect("op", "(")
        ports: list[Port] = []
        if not self.at("op", ")"):
            ports.append(self.parse_port())
            while self.at("op", ","):
                self.next()
                ports.append(self.parse_port())
        self.expect("op", ")")
        semi = self.expect("op", ";")
        if semi.line != mod_tok.line:
            self.fail("module header must fit on one line", mod_tok)
        items: list = []
        while not self.at("keyword", "endmodule"):
            if self.at("eof"):
                self.fail("unterminated module (missing 'endmodule')")
            items.append(self.parse_item())
        end_tok = self.next()
        return Module(name.text, tuple(ports), tuple(items),
                      self.loc(mod_tok), end_tok.line)

    def parse_decl(self) -> SignalDecl:
        kw = self.next()
        kind = SignalKind(kw.text) if kw.text != "integer" else SignalKind.INTEGER
        width = 32 if kind is SignalKind.INTEGER else self._parse_range()
        names = [self.expect("id").text]
        while self.at("op", ","):
            self.next()
            names.append(self.expect("id").text)
        semi = self.expect("op", ";")
        if semi.line != kw.line:
            self.fail("declaration must fit on one line", kw)
        return SignalDecl(kind, width, tuple(names), self.loc(kw))

    def parse_item(self):
        tok = self.peek()
        if tok.kind == "keyword" and tok.text in ("wire", "reg", "integer"):
            return self.parse_decl()
        if self.at("keyword", "assign"):
            self.next()
            target = self.expect("id")
            self.expect("op", "=")
            rhs = self.parse_expression()
            semi = self.expect("op", ";")
            if semi.line != tok.line:
                self.fail("continuous assignment must fit on one line", tok)
            return ContinuousAssign(target.text, rhs, self.loc(tok))
        if self.at("keyword", "always"):
            self.next()
            self.expect("op", "@")
            self.expect("op", "(")
            self.expect("keyword", "posedge")
            clock = self.expect("id")
            close = self.expect("op", ")")
            if close.line != tok.line:
                self.fail("always header must fit on one line", tok)
            body = self.parse_statement()
            return AlwaysBlock(clock.text, body, self.loc(tok))
        if tok.kind == "id":
            # module instantiation: <module> <name> ( .port(expr), ... );
            mod_name = self.next()
            inst_name = self.expect("id")
            self.expect("op", "(")
            conns: list[PortConnection] = []
            if not self.at("op", ")"):
                conns.append(self._parse_connection())
                while self.at("op", ","):
                    self.next()
                    conns.append(self._parse_connection())
            self.expect("op", ")")
            semi = self.expect("op", ";")
            if semi.line != tok.line:
                self.fail("instantiation must fit on one line", tok)
            return ModuleInstance(mod_name.text, inst_name.text, tuple(conns),
                                  self.loc(mod_name))
        self.fail(f"expected module item, found {tok.text!r}", tok)

    def _parse_connection(self) -> PortConnection:
        self.expect("op", ".")
        port = self.expect("id")
        self.expect("op", "(")
        expr = self.parse_expression()
        self.expect("op", ")")
        return PortConnection(port.text, expr)

    def parse_statement(self) -> Statement:
        tok = self.peek()
        if self.at("keyword", "begin"):
            self.next()
            stmts: list[Statement] = []
            while not self.at("keyword", "end"):
                if self.at("eof"):
                    self.fail("unterminated begin block (missing 'end')")
                stmts.append(self.parse_statement())
            end_tok = self.next()
            return BeginEnd(tuple(stmts), self.loc(tok), end_tok.line)
        if self.at("keyword", "if"):
            self.next()
            self.expect("op", "(")
            cond = self.parse_expression()
            close = self.expect("op", ")")
            if close.line != tok.line:
                self.fail("if condition must fit on one line", tok)
            then_branch = self.parse_statement()
            else_branch = None
            else_line = None
            if self.at("keyword", "else"):
                else_tok = self.next()
                else_line = else_tok.line
                else_branch = self.parse_statement()
            return If(cond, then_branch, else_branch, self.loc(tok), else_line)
        if self.at("keyword", "for"):
            self.next()
            self.expect("op", "(")
            var = self.expect("id")
            self.expect("op", "=")
            init = self.parse_expression()
            self.expect("op", ";")
            cond = self.parse_expression()
            self.expect("op", ";")
            var2 = self.expect("id")
            if var2.text != var.text:
                self.fail("for-loop init and step must assign the same variable", var2)
            self.expect("op", "=")
            step = self.parse_expression()
            close = self.expect("op", ")")
            if close.line != tok.line:
                self.fail("for header must fit on one line", tok)
            body = self.parse_statement()
            return For(var.text, init, cond, step, body, self.loc(tok))
        if tok.kind == "id":
            target = self.next()
            op_tok = self.peek()
            if self.at("op", "<="):
                self.next()
                rhs = self.parse_expression()
                semi = self.expect("op", ";")
                if semi.line != tok.line:
                    self.fail("assignment must fit on one line", tok)
                return NonBlockingAssign(target.text, rhs, self.loc(tok))
            if self.at("op", "="):
                self.next()
                rhs = self.parse_expression()
                semi = self.expect("op", ";")
                if semi.line != tok.line:
                    self.fail("assignment must fit on one line", tok)
                return BlockingAssign(target.text, rhs, self.loc(tok))
            self.fail(f"expected '=' or '<=', found {op_tok.text!r}", op_tok)
        self.fail(f"expected statement, found {tok.text or 'end of input'!r}", tok)


def _classify_code_lines(modules: tuple[Module, ...], layout: list[LineInfo]) -> tuple[LineInfo, ...]:
    """Mark lines bearing pausable statements as EXECUTABLE."""
    executable: set[int] = set()
    for mod in modules:
        for item in mod.items:
            if isinstance(item, AlwaysBlock):
                for stmt in walk_statements(item.body):
                    if not isinstance(stmt, BeginEnd):
                        executable.add(stmt.loc.line)
    out = []
    for i, info in enumerate(layout):
        line = i + 1
        if info.cls is LineClass.DECLARATION and line in executable:
            out.append(LineInfo(LineClass.EXECUTABLE, info.comment))
        else:
            out.append(info)
    return tuple(out)


def parse_main_file(text: str, filename: str, file_index: int) -> SourceFile:
    tokens, layout = tokenize(text, filename)
    p = _Parser(tokens, filename, file_index)
    includes: list[IncludeDirective] = []
    modules: list[Module] = []
    while not p.at("eof"):
        if p.at("directive"):
            tok = p.next()
            if tok.text != "`include":
                p.fail(f"unsupported directive {tok.text!r}", tok)
            if modules:
                p.fail("`include directives must precede module definitions", tok)
            name_tok = p.expect("string")
            includes.append(IncludeDirective(name_tok.text.strip('"'), p.loc(tok)))
        elif p.at("keyword", "module"):
            modules.append(p.parse_module())
        else:
            p.fail(f"expected 'module' or `include, found {p.peek().text!r}")
    if not modules:
        p.fail("no module definition found")
    final_layout = _classify_code_lines(tuple(modules), list(layout))
    return SourceFile(filename, tuple(includes), tuple(modules), final_layout)


def parse_aux_file(text: str, filename: str, file_index: int) -> SourceFile:
    """An included .vh file: declarations only."""
    tokens, layout = tokenize(text, filename)
    p = _Parser(tokens, filename, file_index)
    decls: list[SignalDecl] = []
    while not p.at("eof"):
        tok = p.peek()
        if tok.kind == "keyword" and tok.text in ("wire", "reg", "integer"):
            decls.append(p.parse_decl())
        else:
            p.fail(f"include files may only contain declarations, found {tok.text!r}")
    return SourceFile(filename, (), (), tuple(layout), decls=tuple(decls))


def parse(text: str, filename: str = "design.v",
          include_files: dict[str, str] | None = None) -> SourceUnit:
    """Parse a design plus any files its `include directives reference.

    Raises ParseError on any construct outside the subset, including an
    `include whose file text was not supplied.
    """
    include_files = include_files or {}
    main = parse_main_file(text, filename, 0)
    files = [main]
    for inc in main.includes:
        if inc.filename not in include_files:
            raise ParseError(f"include file {inc.filename!r} not provided",
                             inc.loc.line, inc.loc.col, filename)
        files.append(parse_aux_file(include_files[inc.filename], inc.filename, len(files)))
    return SourceUnit(tuple(files))


def parse_unit_files(files: list[tuple[str, str]]) -> SourceUnit:
    """Parse an ordered (name, text) list; the first entry is the main file."""
    name0, text0 = files[0]
    aux = {name: text for name, text in files[1:]}
    return parse(text0, name0, aux)
