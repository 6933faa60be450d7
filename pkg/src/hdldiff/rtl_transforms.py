"""Equivalence-preserving RTL design transformations.

Five operators, each with a site enumerator, an eligibility check
re-validated at apply time, and an application that yields the variant
design plus the original-to-variant LineMap. Only unreachable-loop
removal and include mutation move lines; the others are identity maps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .consteval import const_eval_with_env, loop_trip_count
from .expectations import ExpectNoPauseAt, ExpectationEntry
from .linemap import LineMap
from .sim import maybe_z_signals
from .source import (
    AlwaysBlock, BeginEnd, Binary, BlockingAssign, ContinuousAssign, Expression,
    For, Identifier, If, IncludeDirective, LineClass, LineInfo, Module,
    ModuleInstance, NonBlockingAssign, SignalDecl, SignalKind, SizedLiteral,
    SourceFile, SourceLoc, SourceUnit, Statement, Unary, shift_file_lines,
    stmt_span, statement_expressions, walk_expressions, walk_statements,
)


class IneligibleSite(Exception):
    pass


@dataclass(frozen=True)
class TransformSite:
    kind: str
    module_index: int
    item_index: int
    loc: SourceLoc
    stmt_path: tuple[int, ...] | None = None
    expr_slot: str | None = None  # rhs | cond | init | step
    expr_path: tuple[int, ...] = ()
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RtlRecord:
    kind: str
    params: dict

    def to_text(self) -> str:
        fields = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind} {fields}".strip()


@dataclass(frozen=True)
class TransformResult:
    variant: SourceUnit
    line_map: LineMap
    record: RtlRecord
    expectations: tuple[ExpectationEntry, ...] = ()


# --- immutable tree editing --------------------------------------------------

def _edit_statement(root: Statement, path: tuple[int, ...], edit):
    """Rebuild the statement tree with edit() applied at `path`; edit may
    return None to delete (valid only inside a BeginEnd)."""
    if not path:
        return edit(root)
    head, rest = path[0], path[1:]
    if isinstance(root, BeginEnd):
        child = _edit_statement(root.statements[head], rest, edit)
        stmts = list(root.statements)
        if child is None:
            del stmts[head]
        else:
            stmts[head] = child
        return replace(root, statements=tuple(stmts))
    if isinstance(root, If):
        if head == 0:
            return replace(root, then_branch=_edit_statement(root.then_branch, rest, edit))
        return replace(root, else_branch=_edit_statement(root.else_branch, rest, edit))
    if isinstance(root, For):
        return replace(root, body=_edit_statement(root.body, rest, edit))
    raise IneligibleSite(f"path {path} does not exist under {type(root).__name__}")


def _edit_expression(expr: Expression, path: tuple[int, ...], edit) -> Expression:
    if not path:
        return edit(expr)
    head, rest = path[0], path[1:]
    if isinstance(expr, Unary):
        return replace(expr, operand=_edit_expression(expr.operand, rest, edit))
    if isinstance(expr, Binary):
        if head == 0:
            return replace(expr, lhs=_edit_expression(expr.lhs, rest, edit))
        return replace(expr, rhs=_edit_expression(expr.rhs, rest, edit))
    raise IneligibleSite(f"expression path {path} does not exist")


_EXPR_SLOTS = {
    "rhs": lambda s: s.rhs,
    "cond": lambda s: s.cond,
    "init": lambda s: s.init,
    "step": lambda s: s.step,
}


def _edit_stmt_expr(stmt: Statement, slot: str, path: tuple[int, ...], edit) -> Statement:
    current = _EXPR_SLOTS[slot](stmt)
    new_expr = _edit_expression(current, path, edit)
    return replace(stmt, **{slot: new_expr})


def _replace_item(unit: SourceUnit, module_index: int, item_index: int, new_item) -> SourceUnit:
    main = unit.main
    mod = main.modules[module_index]
    items = list(mod.items)
    items[item_index] = new_item
    modules = list(main.modules)
    modules[module_index] = replace(mod, items=tuple(items))
    files = list(unit.files)
    files[0] = replace(main, modules=tuple(modules))
    return SourceUnit(tuple(files))


def _edit_always_stmt(unit: SourceUnit, site: TransformSite, edit) -> SourceUnit:
    main = unit.main
    item = main.modules[site.module_index].items[site.item_index]
    if not isinstance(item, AlwaysBlock):
        raise IneligibleSite("site does not address an always block")
    new_body = _edit_statement(item.body, site.stmt_path, edit)
    return _replace_item(unit, site.module_index, site.item_index,
                         replace(item, body=new_body))


def _stmt_at(unit: SourceUnit, site: TransformSite) -> Statement:
    item = unit.main.modules[site.module_index].items[site.item_index]
    stmt = item.body
    for idx in site.stmt_path:
        if isinstance(stmt, BeginEnd):
            stmt = stmt.statements[idx]
        elif isinstance(stmt, If):
            stmt = stmt.then_branch if idx == 0 else stmt.else_branch
        elif isinstance(stmt, For):
            stmt = stmt.body
        else:
            raise IneligibleSite("stale statement path")
    return stmt


# --- occurrence scans --------------------------------------------------------

def occurrences_in_block(body: Statement, name: str) -> int:
    """How many times `name` appears in a block: as an assignment target
    or as an identifier inside any statement-level expression."""
    count = 0
    for stmt in walk_statements(body):
        if isinstance(stmt, (BlockingAssign, NonBlockingAssign)) and stmt.target == name:
            count += 1
        if isinstance(stmt, For) and stmt.var == name:
            count += 1
        for expr in statement_expressions(stmt):
            count += sum(1 for n in walk_expressions(expr)
                         if isinstance(n, Identifier) and n.name == name)
    return count


def _module_name_references(mod: Module) -> set[str]:
    refs: set[str] = set()
    for item in mod.items:
        if isinstance(item, ContinuousAssign):
            refs.add(item.target)
            refs.update(n.name for n in walk_expressions(item.rhs)
                        if isinstance(n, Identifier))
        elif isinstance(item, AlwaysBlock):
            refs.add(item.clock)
            for stmt in walk_statements(item.body):
                if isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
                    refs.add(stmt.target)
                if isinstance(stmt, For):
                    refs.add(stmt.var)
                for expr in statement_expressions(stmt):
                    refs.update(n.name for n in walk_expressions(expr)
                                if isinstance(n, Identifier))
        elif isinstance(item, ModuleInstance):
            for conn in item.connections:
                refs.update(n.name for n in walk_expressions(conn.expr)
                            if isinstance(n, Identifier))
    return refs


def unit_name_references(unit: SourceUnit) -> set[str]:
    refs: set[str] = set()
    for mod in unit.main.modules:
        refs |= _module_name_references(mod)
    return refs


def declared_names(unit: SourceUnit) -> set[str]:
    names: set[str] = set()
    for mod in unit.main.modules:
        names.update(p.name for p in mod.ports)
        for item in mod.items:
            if isinstance(item, SignalDecl):
                names.update(item.names)
    for f in unit.files[1:]:
        for d in f.decls:
            names.update(d.names)
    return names


# --- site enumeration --------------------------------------------------------

def _walk_paths(body: Statement, path=()):
    yield path, body
    if isinstance(body, BeginEnd):
        for i, inner in enumerate(body.statements):
            yield from _walk_paths(inner, path + (i,))
    elif isinstance(body, If):
        yield from _walk_paths(body.then_branch, path + (0,))
        if body.else_branch is not None:
            yield from _walk_paths(body.else_branch, path + (1,))
    elif isinstance(body, For):
        yield from _walk_paths(body.body, path + (0,))


def _expr_paths(expr: Expression, path=()):
    yield path, expr
    if isinstance(expr, Unary):
        yield from _expr_paths(expr.operand, path + (0,))
    elif isinstance(expr, Binary):
        yield from _expr_paths(expr.lhs, path + (0,))
        yield from _expr_paths(expr.rhs, path + (1,))


def _assign_conv_sites(unit: SourceUnit) -> list[TransformSite]:
    sites = []
    for mi, mod in enumerate(unit.main.modules):
        for ii, item in enumerate(mod.items):
            if not isinstance(item, AlwaysBlock):
                continue
            for path, stmt in _walk_paths(item.body):
                if isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
                    if occurrences_in_block(item.body, stmt.target) == 1:
                        sites.append(TransformSite(
                            "assign-conv", mi, ii, stmt.loc, path,
                            detail={"target": stmt.target}))
    return sites


def _literal_sites(unit: SourceUnit) -> list[TransformSite]:
    sites = []
    for mi, mod in enumerate(unit.main.modules):
        for ii, item in enumerate(mod.items):
            if isinstance(item, ContinuousAssign):
                for epath, node in _expr_paths(item.rhs):
                    if isinstance(node, SizedLiteral):
                        sites.append(TransformSite(
                            "literal-expr", mi, ii, node.loc, None, "rhs", epath,
                            detail={"width": node.width, "value": node.value}))
            elif isinstance(item, AlwaysBlock):
                for path, stmt in _walk_paths(item.body):
                    for slot in ("rhs", "cond", "init", "step"):
                        getter = _EXPR_SLOTS[slot]
                        try:
                            expr = getter(stmt)
                        except AttributeError:
                            continue
                        for epath, node in _expr_paths(expr):
                            if isinstance(node, SizedLiteral):
                                sites.append(TransformSite(
                                    "literal-expr", mi, ii, node.loc, path, slot, epath,
                                    detail={"width": node.width, "value": node.value}))
    return sites


def _bit_mutate_sites(unit: SourceUnit) -> list[TransformSite]:
    may_z = maybe_z_signals(unit)
    sites = []

    def rhs_safe(mod: Module, expr: Expression) -> bool:
        return not any((mod.name, n.name) in may_z
                       for n in walk_expressions(expr) if isinstance(n, Identifier))

    for mi, mod in enumerate(unit.main.modules):
        for ii, item in enumerate(mod.items):
            if isinstance(item, ContinuousAssign) and rhs_safe(mod, item.rhs):
                sites.append(TransformSite("bit-mutate", mi, ii, item.loc, None, "rhs",
                                           detail={"target": item.target}))
            elif isinstance(item, AlwaysBlock):
                for path, stmt in _walk_paths(item.body):
                    if isinstance(stmt, (BlockingAssign, NonBlockingAssign)) \
                            and rhs_safe(mod, stmt.rhs):
                        sites.append(TransformSite(
                            "bit-mutate", mi, ii, stmt.loc, path, "rhs",
                            detail={"target": stmt.target}))
    return sites


def _loop_guard_false_at_entry(loop: For) -> bool:
    init = const_eval_with_env(loop.init, {})
    if init is None:
        return False
    guard = const_eval_with_env(loop.cond, {loop.var: (init, 32)})
    return guard == 0


def _dead_loop_sites(unit: SourceUnit) -> list[TransformSite]:
    sites = []
    for mi, mod in enumerate(unit.main.modules):
        everywhere = _module_name_references(mod)
        for ii, item in enumerate(mod.items):
            if not isinstance(item, AlwaysBlock):
                continue
            for path, stmt in _walk_paths(item.body):
                if not isinstance(stmt, For):
                    continue
                if not _loop_guard_false_at_entry(stmt):
                    continue
                if not path:
                    continue  # the loop must sit inside a begin/end
                parent = _parent_of(item.body, path)
                if not isinstance(parent, BeginEnd) or len(parent.statements) < 2:
                    continue
                if _written_before(item.body, path, stmt.var):
                    continue
                inside = occurrences_in_block(stmt, stmt.var)
                if occurrences_in_block(item.body, stmt.var) != inside:
                    continue  # loop variable leaks outside the loop
                if _loop_var_used_elsewhere(unit, mod, item, stmt.var, inside):
                    continue
                sites.append(TransformSite(
                    "dead-loop", mi, ii, stmt.loc, path,
                    detail={"var": stmt.var, "span": stmt_span(stmt)}))
    return sites


def _parent_of(body: Statement, path: tuple[int, ...]) -> Statement:
    stmt = body
    for idx in path[:-1]:
        if isinstance(stmt, BeginEnd):
            stmt = stmt.statements[idx]
        elif isinstance(stmt, If):
            stmt = stmt.then_branch if idx == 0 else stmt.else_branch
        else:
            stmt = stmt.body
    return stmt


def _written_before(body: Statement, path: tuple[int, ...], name: str) -> bool:
    """Is `name` assigned by any statement that executes before the loop
    in the same always block? Conservative: any write outside the loop."""
    target_stmt = None
    for p, s in _walk_paths(body):
        if p == path:
            target_stmt = s
            break
    loop_writes = sum(1 for s in walk_statements(target_stmt)
                      if (isinstance(s, (BlockingAssign, NonBlockingAssign)) and s.target == name)
                      or (isinstance(s, For) and s.var == name))
    total_writes = sum(1 for s in walk_statements(body)
                       if (isinstance(s, (BlockingAssign, NonBlockingAssign)) and s.target == name)
                       or (isinstance(s, For) and s.var == name))
    return total_writes != loop_writes


def _loop_var_used_elsewhere(unit: SourceUnit, mod: Module, home: AlwaysBlock,
                             var: str, inside_count: int) -> bool:
    total = 0
    for item in mod.items:
        if isinstance(item, AlwaysBlock):
            total += occurrences_in_block(item.body, var)
        elif isinstance(item, ContinuousAssign):
            total += sum(1 for n in walk_expressions(item.rhs)
                         if isinstance(n, Identifier) and n.name == var)
    return total != inside_count


def _include_remove_sites(unit: SourceUnit) -> list[TransformSite]:
    used = unit_name_references(unit)
    sites = []
    for inc in unit.main.includes:
        aux = unit.file_named(inc.filename)
        if aux is None:
            continue
        names = {n for d in aux.decls for n in d.names}
        if not names & used:
            sites.append(TransformSite("include-remove", -1, -1, inc.loc,
                                       detail={"filename": inc.filename}))
    return sites


def enumerate_sites(unit: SourceUnit, kind: str) -> list[TransformSite]:
    if kind == "assign-conv":
        return _assign_conv_sites(unit)
    if kind == "literal-expr":
        return _literal_sites(unit)
    if kind == "bit-mutate":
        return _bit_mutate_sites(unit)
    if kind == "dead-loop":
        return _dead_loop_sites(unit)
    if kind == "include-inject":
        return [TransformSite("include-inject", -1, -1, SourceLoc(0, 1))]
    if kind == "include-remove":
        return _include_remove_sites(unit)
    raise ValueError(f"unknown transformation kind {kind!r}")


# --- applications ------------------------------------------------------------

def convert_assignment(unit: SourceUnit, site: TransformSite) -> TransformResult:
    """Flip one isolated register assignment between blocking and
    non-blocking; everything else, including the layout, is untouched."""
    stmt = _stmt_at(unit, site)
    if not isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
        raise IneligibleSite("site is not an assignment")
    item = unit.main.modules[site.module_index].items[site.item_index]
    if occurrences_in_block(item.body, stmt.target) != 1:
        raise IneligibleSite(
            f"register {stmt.target!r} interacts with other statements in its block")

    def flip(s):
        cls = BlockingAssign if isinstance(s, NonBlockingAssign) else NonBlockingAssign
        return cls(s.target, s.rhs, s.loc)

    variant = _edit_always_stmt(unit, site, flip)
    direction = "nb-to-b" if isinstance(stmt, NonBlockingAssign) else "b-to-nb"
    record = RtlRecord("assign-conv", {
        "module": unit.main.modules[site.module_index].name,
        "target": stmt.target, "direction": direction, "line": stmt.loc.line})
    return TransformResult(variant, LineMap.identity(unit.main.line_count), record)


def split_literal(width: int, value: int, rng: random.Random) -> tuple[str, int, int]:
    """(op, a, b) with a op b == value exactly (no wraparound), all at `width`."""
    limit = (1 << width) - 1
    if rng.random() < 0.5:
        a = rng.randint(0, value)
        return "+", a, value - a
    c = rng.randint(value, limit)
    return "-", c, c - value


def literal_to_expression(unit: SourceUnit, site: TransformSite,
                          rng: random.Random) -> TransformResult:
    """Replace a sized literal n with (a + b) or (c - d) of equal width
    evaluating to exactly n."""
    def apply_split(node):
        if not isinstance(node, SizedLiteral):
            raise IneligibleSite("site is not a literal")
        op, a, b = split_literal(node.width, node.value, rng)
        apply_split.chosen = (op, a, b, node)
        return Binary(op, SizedLiteral(node.width, a, node.loc, node.base),
                      SizedLiteral(node.width, b, node.loc, node.base), node.loc)

    variant = _apply_expr_edit(unit, site, apply_split)
    op, a, b, node = apply_split.chosen
    record = RtlRecord("literal-expr", {
        "module": unit.main.modules[site.module_index].name,
        "width": node.width, "value": node.value, "op": op, "a": a, "b": b,
        "line": node.loc.line})
    return TransformResult(variant, LineMap.identity(unit.main.line_count), record)


def bit_double_negate(unit: SourceUnit, site: TransformSite) -> TransformResult:
    """Wrap an assignment's right-hand side in a double bitwise negation."""
    def wrap(expr):
        return Unary("~", Unary("~", expr, expr.loc), expr.loc)

    variant = _apply_expr_edit(unit, site, wrap)
    record = RtlRecord("bit-mutate", {
        "module": unit.main.modules[site.module_index].name,
        "target": site.detail.get("target", "?"), "line": site.loc.line})
    return TransformResult(variant, LineMap.identity(unit.main.line_count), record)


def _apply_expr_edit(unit: SourceUnit, site: TransformSite, edit) -> SourceUnit:
    item = unit.main.modules[site.module_index].items[site.item_index]
    if site.stmt_path is None:
        if not isinstance(item, ContinuousAssign):
            raise IneligibleSite("site does not address a continuous assignment")
        new_rhs = _edit_expression(item.rhs, site.expr_path, edit)
        return _replace_item(unit, site.module_index, site.item_index,
                             replace(item, rhs=new_rhs))
    return _edit_always_stmt(
        unit, site,
        lambda s: _edit_stmt_expr(s, site.expr_slot, site.expr_path, edit))


def remove_unreachable_loop(unit: SourceUnit, site: TransformSite) -> TransformResult:
    """Delete a loop whose guard is statically false at entry; following
    lines shift up and the loop's lines are recorded as deleted."""
    stmt = _stmt_at(unit, site)
    if not isinstance(stmt, For):
        raise IneligibleSite("site is not a for loop")
    if not _loop_guard_false_at_entry(stmt):
        raise IneligibleSite("loop guard is not statically false at entry")
    main = unit.main
    first, last = stmt_span(stmt)
    removed = last - first + 1

    # the deleted lines must belong to the loop alone (statements that
    # properly contain it, e.g. the enclosing begin/end, are fine)
    for mod in main.modules:
        for item in mod.items:
            if isinstance(item, AlwaysBlock):
                for other in walk_statements(item.body):
                    span = stmt_span(other)
                    overlaps = not (span[1] < first or span[0] > last)
                    inside = first <= span[0] and span[1] <= last
                    contains = span[0] <= first and last <= span[1]
                    if overlaps and not inside and not contains:
                        raise IneligibleSite("loop shares lines with other statements")

    without = _edit_always_stmt(unit, site, lambda s: None)
    new_layout = without.main.layout[:first - 1] + without.main.layout[last:]
    shifted_main = shift_file_lines(without.main, last + 1, -removed, new_layout)
    files = (shifted_main,) + without.files[1:]
    variant = SourceUnit(files)

    body_lines = sorted({s.loc.line for s in walk_statements(stmt.body)
                         if not isinstance(s, BeginEnd)})
    record = RtlRecord("dead-loop", {
        "module": main.modules[site.module_index].name,
        "var": stmt.var, "first": first, "last": last})
    return TransformResult(
        variant, LineMap.from_deletion(first, last, main.line_count), record,
        expectations=(ExpectNoPauseAt(frozenset(body_lines)),))


def _fresh_names(unit: SourceUnit, rng: random.Random, count: int) -> list[str]:
    taken = declared_names(unit) | unit_name_references(unit)
    out = []
    while len(out) < count:
        name = f"spare_net_{rng.randrange(1_000_000)}"
        if name not in taken:
            taken.add(name)
            out.append(name)
    return out


def mutate_includes(unit: SourceUnit, mode: str, rng: random.Random) -> TransformResult:
    if mode == "inject":
        return _inject_includes(unit, rng)
    if mode == "remove":
        sites = _include_remove_sites(unit)
        if not sites:
            raise IneligibleSite("no unused include to remove")
        return remove_include(unit, rng.choice(sites))
    raise ValueError(f"unknown include mutation mode {mode!r}")


def _inject_includes(unit: SourceUnit, rng: random.Random) -> TransformResult:
    main = unit.main
    count = rng.randint(1, 3)
    at = main.includes[-1].loc.line + 1 if main.includes else 1
    names = _fresh_names(unit, rng, count * 2)
    new_files = []
    directives = []
    for i in range(count):
        fname = f"unused_{rng.randrange(1_000_000)}.vh"
        while unit.file_named(fname) or any(f.name == fname for f in new_files):
            fname = f"unused_{rng.randrange(1_000_000)}.vh"
        decls = (SignalDecl(SignalKind.WIRE, 1,
                            (names[2 * i], names[2 * i + 1]), SourceLoc(0, 1)),)
        layout = (LineInfo(LineClass.DECLARATION),)
        new_files.append(SourceFile(fname, (), (), layout, decls=decls))
        directives.append(fname)

    inserted = tuple(LineInfo(LineClass.DECLARATION) for _ in range(count))
    new_layout = main.layout[:at - 1] + inserted + main.layout[at - 1:]
    shifted = shift_file_lines(main, at, count, new_layout)
    include_objs = tuple(IncludeDirective(fname, SourceLoc(0, at + i))
                         for i, fname in enumerate(directives))
    new_main = replace(shifted, includes=shifted.includes + include_objs)
    variant = SourceUnit((new_main,) + unit.files[1:] + tuple(new_files))
    record = RtlRecord("include-inject", {"count": count,
                                          "files": ",".join(directives)})
    return TransformResult(variant, LineMap.from_insertion(at, count, main.line_count),
                           record)


def remove_include(unit: SourceUnit, site: TransformSite) -> TransformResult:
    fname = site.detail["filename"]
    main = unit.main
    used = unit_name_references(unit)
    aux = unit.file_named(fname)
    if aux is None:
        raise IneligibleSite(f"no include file {fname!r}")
    if {n for d in aux.decls for n in d.names} & used:
        raise IneligibleSite(f"include {fname!r} declares referenced symbols")
    target = next((i for i in main.includes
                   if i.filename == fname and i.loc.line == site.loc.line), None)
    if target is None:
        raise IneligibleSite(f"no include directive for {fname!r} at line {site.loc.line}")
    line = target.loc.line
    new_layout = main.layout[:line - 1] + main.layout[line:]
    stripped = replace(main, includes=tuple(i for i in main.includes if i is not target))
    shifted = shift_file_lines(stripped, line + 1, -1, new_layout)
    still_referenced = any(i.filename == fname for i in shifted.includes)
    files = (shifted,) + tuple(f for f in unit.files[1:]
                               if still_referenced or f.name != fname)
    record = RtlRecord("include-remove", {"file": fname, "line": line})
    return TransformResult(SourceUnit(files),
                           LineMap.from_deletion(line, line, main.line_count), record)


def apply_at(unit: SourceUnit, site: TransformSite, rng: random.Random) -> TransformResult:
    if site.kind == "assign-conv":
        return convert_assignment(unit, site)
    if site.kind == "literal-expr":
        return literal_to_expression(unit, site, rng)
    if site.kind == "bit-mutate":
        return bit_double_negate(unit, site)
    if site.kind == "dead-loop":
        return remove_unreachable_loop(unit, site)
    if site.kind == "include-inject":
        return mutate_includes(unit, "inject", rng)
    if site.kind == "include-remove":
        return remove_include(unit, site)
    raise ValueError(f"unknown site kind {site.kind!r}")


# --- pipeline ----------------------------------------------------------------

PIPELINE_KINDS = ("assign-conv", "literal-expr", "bit-mutate", "dead-loop",
                  "include-mutate")


@dataclass(frozen=True)
class PipelineResult:
    variant: SourceUnit
    line_map: LineMap
    records: tuple[RtlRecord, ...]
    expectations: tuple[ExpectationEntry, ...]  # original coordinates


def pro_pipeline(unit: SourceUnit, iterations: int, rng: random.Random,
                 weights: dict[str, float] | None = None) -> PipelineResult:
    """Apply up to `iterations` randomly drawn transformations in sequence,
    re-enumerating sites each round and composing the line maps. Rounds
    where no kind has a site end the pipeline early."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    current = unit
    composed = LineMap.identity(unit.main.line_count)
    records: list[RtlRecord] = []
    expectations: list[ExpectationEntry] = []
    for _ in range(iterations):
        kinds = list(PIPELINE_KINDS)
        result = None
        while kinds:
            if weights:
                pool = [max(weights.get(k, 1.0), 0.0) for k in kinds]
                if sum(pool) <= 0:
                    pool = [1.0] * len(kinds)
                kind = rng.choices(kinds, weights=pool, k=1)[0]
            else:
                kind = rng.choice(kinds)
            kinds.remove(kind)
            if kind == "include-mutate":
                removable = _include_remove_sites(current)
                mode = "remove" if removable and rng.random() < 0.5 else "inject"
                if mode == "remove":
                    result = remove_include(current, rng.choice(removable))
                else:
                    result = _inject_includes(current, rng)
                break
            sites = enumerate_sites(current, kind)
            if not sites:
                continue
            result = apply_at(current, rng.choice(sites), rng)
            break
        if result is None:
            break  # nothing applicable anywhere
        for entry in result.expectations:
            expectations.append(_entry_to_original(entry, composed))
        current = result.variant
        composed = composed.compose(result.line_map)
        records.append(result.record)
    return PipelineResult(current, composed, tuple(records), tuple(expectations))


def _entry_to_original(entry: ExpectationEntry, before: LineMap) -> ExpectationEntry:
    """Translate a round-local entry's lines back to original coordinates."""
    if isinstance(entry, ExpectNoPauseAt):
        lines = {before.unmap_line(ln) for ln in entry.lines}
        return ExpectNoPauseAt(frozenset(ln for ln in lines if ln is not None))
    return entry
