"""Elaboration and event-driven simulation of the Verilog subset.

Scheduling model (single clock):
  * always blocks execute once per rising edge, in document order
    (instances inline at their instantiation point);
  * reads of signals not blocking-written earlier in the same block
    execution resolve to the committed pre-edge snapshot, so cross-block
    communication always sees pre-edge values regardless of block order;
  * non-blocking right-hand sides are evaluated at statement execution
    and committed together at the end of the edge;
  * continuous assignments settle at t=0 and after each edge commits.

Uninitialized regs and integers read x; undriven wires read z; top-level
input ports other than the clock are held at constant 0.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

from . import values
from .source import (
    AlwaysBlock, BeginEnd, Binary, BlockingAssign, ContinuousAssign, Expression,
    For, Identifier, If, Module, ModuleInstance, NonBlockingAssign, SignalDecl,
    SignalKind, SizedLiteral, SourceUnit, Statement, Unary, walk_statements,
    statement_expressions, walk_expressions,
)
from .values import Bits

LOOP_ITERATION_CAP = 1 << 16


class ElaborationError(Exception):
    pass


class SimHang(Exception):
    """A for loop exceeded the iteration cap."""


@dataclass(frozen=True)
class SimConfig:
    clock_period: int = 10
    total_sim_time: int = 400
    reset_window: int = 100
    run_wallclock_s: float = 30.0
    step_into_instances: bool = True

    def __post_init__(self):
        if self.clock_period < 2:
            raise ValueError("clock_period must be >= 2")
        if not self.total_sim_time > self.reset_window >= 0:
            raise ValueError("need total_sim_time > reset_window >= 0")

    def edge_times(self) -> list[int]:
        half = self.clock_period // 2
        return list(range(half, self.total_sim_time + 1, self.clock_period))


@dataclass(frozen=True)
class SignalInfo:
    full_name: str
    width: int
    kind: SignalKind
    is_input: bool = False
    is_clock: bool = False


@dataclass(frozen=True)
class FlatBlock:
    prefix: str  # "" for top, "inst." for instances
    block: AlwaysBlock
    module_name: str
    in_top: bool


@dataclass(frozen=True)
class FlatAssign:
    target: str  # full name
    rhs: Expression
    prefix: str  # namespace for identifiers in rhs


@dataclass
class FlatDesign:
    top: Module
    signals: dict[str, SignalInfo]
    blocks: list[FlatBlock]
    assigns: list[FlatAssign]  # topologically ordered
    clock: str | None
    top_wave_signals: list[str]  # top wires/regs (integers excluded)
    constant_zero_inputs: list[str]


def _module_scope(module: Module, include_decls: list[SignalDecl]) -> dict[str, tuple[SignalKind, int]]:
    scope: dict[str, tuple[SignalKind, int]] = {}

    def add(name: str, kind: SignalKind, width: int, where: str):
        if name in scope:
            raise ElaborationError(
                f"module {module.name}: duplicate declaration of {name!r} ({where})")
        scope[name] = (kind, width)

    for port in module.ports:
        add(port.name, SignalKind.REG if port.is_reg else SignalKind.WIRE,
            port.width, "port")
    for item in module.items:
        if isinstance(item, SignalDecl):
            for name in item.names:
                add(name, item.kind, item.width, "declaration")
    for decl in include_decls:
        for name in decl.names:
            add(name, decl.kind, decl.width, "include")
    return scope


def _check_identifiers(module: Module, scope: dict, expr: Expression):
    for node in walk_expressions(expr):
        if isinstance(node, Identifier) and node.name not in scope:
            raise ElaborationError(
                f"module {module.name}: unresolved identifier {node.name!r} "
                f"at line {node.loc.line}")


def elaborate(unit: SourceUnit, cfg: SimConfig | None = None) -> FlatDesign:
    main = unit.main
    include_decls = [d for f in unit.files[1:] for d in f.decls]

    by_name: dict[str, Module] = {}
    for mod in main.modules:
        if mod.name in by_name:
            raise ElaborationError(f"duplicate module name {mod.name!r}")
        by_name[mod.name] = mod

    instantiated: set[str] = set()
    for mod in main.modules:
        for item in mod.items:
            if isinstance(item, ModuleInstance):
                sub = by_name.get(item.module_name)
                if sub is None:
                    raise ElaborationError(
                        f"module {mod.name}: unresolved instance of "
                        f"{item.module_name!r} at line {item.loc.line}")
                if any(isinstance(i, ModuleInstance) for i in sub.items):
                    raise ElaborationError(
                        f"instantiated module {sub.name!r} contains instances "
                        "(hierarchy is limited to one level)")
                instantiated.add(item.module_name)

    roots = [m for m in main.modules if m.name not in instantiated]
    if len(roots) != 1:
        names = ", ".join(m.name for m in roots) or "none"
        raise ElaborationError(f"expected exactly one top module, found: {names}")
    top = roots[0]

    scopes = {m.name: _module_scope(m, include_decls) for m in main.modules}

    signals: dict[str, SignalInfo] = {}
    blocks: list[FlatBlock] = []
    assigns: list[FlatAssign] = []
    clock_candidates: set[str] = set()

    def add_module(mod: Module, prefix: str):
        scope = scopes[mod.name]
        for name, (kind, width) in scope.items():
            full = prefix + name
            signals[full] = SignalInfo(full, width, kind)
        reg_writers: dict[str, int] = {}
        wire_drivers: dict[str, int] = {}
        for item in mod.items:
            if isinstance(item, ContinuousAssign):
                if item.target not in scope:
                    raise ElaborationError(
                        f"module {mod.name}: assign to undeclared {item.target!r}")
                if scope[item.target][0] is not SignalKind.WIRE:
                    raise ElaborationError(
                        f"module {mod.name}: continuous assign target {item.target!r} "
                        "must be a wire")
                wire_drivers[item.target] = wire_drivers.get(item.target, 0) + 1
                _check_identifiers(mod, scope, item.rhs)
                assigns.append(FlatAssign(prefix + item.target, item.rhs, prefix))
            elif isinstance(item, AlwaysBlock):
                if item.clock not in scope:
                    raise ElaborationError(
                        f"module {mod.name}: unknown clock {item.clock!r}")
                if not any(p.name == item.clock and p.direction == "input"
                           for p in mod.ports):
                    raise ElaborationError(
                        f"module {mod.name}: clock {item.clock!r} must be an input port")
                if prefix == "":
                    clock_candidates.add(item.clock)
                for stmt in walk_statements(item.body):
                    for expr in statement_expressions(stmt):
                        _check_identifiers(mod, scope, expr)
                    if isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
                        kind = scope.get(stmt.target, (None, 0))[0]
                        if kind not in (SignalKind.REG, SignalKind.INTEGER):
                            raise ElaborationError(
                                f"module {mod.name}: procedural assignment target "
                                f"{stmt.target!r} must be a reg or integer")
                        reg_writers.setdefault(stmt.target, id(item))
                        if reg_writers[stmt.target] != id(item):
                            raise ElaborationError(
                                f"module {mod.name}: {stmt.target!r} is written by "
                                "multiple always blocks")
                    elif isinstance(stmt, For):
                        if scope.get(stmt.var, (None, 0))[0] is not SignalKind.INTEGER:
                            raise ElaborationError(
                                f"module {mod.name}: loop variable {stmt.var!r} "
                                "must be an integer")
                blocks.append(FlatBlock(prefix, item, mod.name, prefix == ""))
        return wire_drivers

    top_wire_drivers = add_module(top, "")

    for item in top.items:
        if not isinstance(item, ModuleInstance):
            continue
        sub = by_name[item.module_name]
        prefix = item.instance_name + "."
        add_module(sub, prefix)
        sub_ports = {p.name: p for p in sub.ports}
        connected = set()
        for conn in item.connections:
            port = sub_ports.get(conn.port)
            if port is None:
                raise ElaborationError(
                    f"instance {item.instance_name}: no port {conn.port!r} on "
                    f"{sub.name}")
            if conn.port in connected:
                raise ElaborationError(
                    f"instance {item.instance_name}: port {conn.port!r} connected twice")
            connected.add(conn.port)
            _check_identifiers(top, scopes[top.name], conn.expr)
            if port.direction == "input":
                assigns.append(FlatAssign(prefix + port.name, conn.expr, ""))
            else:
                if not isinstance(conn.expr, Identifier):
                    raise ElaborationError(
                        f"instance {item.instance_name}: output port {conn.port!r} "
                        "must connect to a plain wire")
                target = conn.expr.name
                kind = scopes[top.name][target][0]
                if kind is not SignalKind.WIRE:
                    raise ElaborationError(
                        f"instance {item.instance_name}: output port {conn.port!r} "
                        f"must drive a wire, not {kind.value}")
                top_wire_drivers[target] = top_wire_drivers.get(target, 0) + 1
                assigns.append(FlatAssign(target, Identifier(prefix + port.name, conn.expr.loc), ""))
        # unconnected input ports float at z; unconnected outputs are simply unused
        for block in [b for b in blocks if b.prefix == prefix]:
            if block.block.clock in sub_ports:
                bound = next((c.expr for c in item.connections
                              if c.port == block.block.clock), None)
                if not isinstance(bound, Identifier):
                    raise ElaborationError(
                        f"instance {item.instance_name}: clock port "
                        f"{block.block.clock!r} must be bound to the top clock")
                clock_candidates.add(bound.name)

    multi = [name for name, n in top_wire_drivers.items() if n > 1]
    if multi:
        raise ElaborationError(f"wire(s) driven more than once: {', '.join(sorted(multi))}")

    clock = None
    if clock_candidates:
        if len(clock_candidates) > 1:
            raise ElaborationError(
                f"multiple clock signals: {', '.join(sorted(clock_candidates))} "
                "(the subset is single-clock)")
        clock = clock_candidates.pop()
        if not any(p.name == clock and p.direction == "input" for p in top.ports):
            raise ElaborationError(f"clock {clock!r} must be a top-level input port")

    assigns_sorted = _topo_sort_assigns(assigns, signals)

    top_inputs = {p.name for p in top.ports if p.direction == "input"}
    for name in top_inputs:
        signals[name] = SignalInfo(name, signals[name].width, signals[name].kind,
                                   is_input=True, is_clock=(name == clock))

    top_wave = [p.name for p in top.ports]
    for item in top.items:
        if isinstance(item, SignalDecl) and item.kind is not SignalKind.INTEGER:
            top_wave.extend(item.names)

    return FlatDesign(
        top=top,
        signals=signals,
        blocks=blocks,
        assigns=assigns_sorted,
        clock=clock,
        top_wave_signals=top_wave,
        constant_zero_inputs=sorted(top_inputs - ({clock} if clock else set())),
    )


def _topo_sort_assigns(assigns: list[FlatAssign],
                       signals: dict[str, SignalInfo]) -> list[FlatAssign]:
    by_target = {a.target: a for a in assigns}

    def deps(a: FlatAssign) -> list[str]:
        out = []
        for node in walk_expressions(a.rhs):
            if isinstance(node, Identifier):
                full = a.prefix + node.name if a.prefix + node.name in signals else node.name
                if full in by_target:
                    out.append(full)
        return out

    ordered: list[FlatAssign] = []
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(target: str):
        if state.get(target) == 1:
            return
        if state.get(target) == 0:
            raise ElaborationError(f"combinational loop through {target!r}")
        state[target] = 0
        for dep in deps(by_target[target]):
            visit(dep)
        state[target] = 1
        ordered.append(by_target[target])

    for a in assigns:
        visit(a.target)
    return ordered


def maybe_z_signals(unit: SourceUnit) -> set[tuple[str, str]]:
    """(module name, signal name) pairs whose value may include z bits:
    undriven wires and wires combinationally fed by them."""
    main = unit.main
    include_names = {n for f in unit.files[1:] for d in f.decls for n in d.names}
    out: set[tuple[str, str]] = set()
    for mod in main.modules:
        driven: set[str] = {p.name for p in mod.ports if p.direction == "input"}
        wires: set[str] = set()
        driver_rhs: dict[str, Expression] = {}
        for item in mod.items:
            if isinstance(item, SignalDecl) and item.kind is SignalKind.WIRE:
                wires.update(item.names)
            elif isinstance(item, ContinuousAssign):
                driven.add(item.target)
                driver_rhs[item.target] = item.rhs
            elif isinstance(item, ModuleInstance):
                for conn in item.connections:
                    if isinstance(conn.expr, Identifier):
                        driven.add(conn.expr.name)
        for port in mod.ports:
            if port.direction == "output" and not port.is_reg:
                wires.add(port.name)
        wires.update(n for n in include_names)
        floating = {w for w in wires if w not in driven}
        # propagate through continuous assignment chains
        changed = True
        may_z = set(floating)
        while changed:
            changed = False
            for target, rhs in driver_rhs.items():
                if target in may_z:
                    continue
                refs = {n.name for n in walk_expressions(rhs) if isinstance(n, Identifier)}
                if refs & may_z:
                    may_z.add(target)
                    changed = True
        out.update((mod.name, name) for name in may_z)
    return out


@dataclass(frozen=True)
class Arrival:
    """A statement about to execute; the simulator pauses *before* it."""
    line: int
    time: int
    kind: str  # "assign" | "if" | body statement kinds
    prefix: str
    first_loop_iter: bool
    in_loop_body: bool


class SimRun:
    """Resumable simulation of one elaborated design."""

    def __init__(self, design: FlatDesign, cfg: SimConfig, fault=None):
        from .faults import FaultConfig
        self.design = design
        self.cfg = cfg
        self.fault = fault or FaultConfig()
        self.committed: dict[str, Bits] = {}
        self.edge_snapshot: dict[str, Bits] | None = None
        self.wave_log: list[tuple[int, dict[str, str]]] = []
        self.current_time = 0
        for full, info in design.signals.items():
            if info.kind is SignalKind.WIRE:
                self.committed[full] = Bits.all_z(info.width)
            else:
                self.committed[full] = Bits.all_x(info.width)
        for name in design.constant_zero_inputs:
            self.committed[name] = Bits.of(design.signals[name].width, 0)
        if design.clock is not None:
            self.committed[design.clock] = Bits.of(1, 0)
        self._settle()
        self._log_wave(0)

    # -- state access --

    def stable_top_values(self) -> dict[str, str]:
        """Committed values as of the last completed time step."""
        state = self.edge_snapshot if self.edge_snapshot is not None else self.committed
        return {name: str(state[name]) for name in self.design.top_wave_signals}

    def _log_wave(self, t: int):
        self.wave_log.append(
            (t, {name: str(self.committed[name]) for name in self.design.top_wave_signals}))

    # -- execution --

    def run(self):
        for t in self.cfg.edge_times():
            yield from self._edge(t)
        self.current_time = self.cfg.total_sim_time

    def _edge(self, t: int):
        self.current_time = t
        if self.design.clock is not None:
            self.committed[self.design.clock] = Bits.of(1, 1)
        self.edge_snapshot = dict(self.committed)
        nba: dict[str, Bits] = {}
        for block in self.design.blocks:
            ctx = _BlockCtx(self, block.prefix, nba,
                            pausable=block.in_top or self.cfg.step_into_instances)
            yield from self._exec_stmt(block.block.body, ctx)
        self.committed.update(nba)
        self.edge_snapshot = None
        if self.design.clock is not None:
            self.committed[self.design.clock] = Bits.of(1, 0)
        self._settle()
        self._log_wave(t)

    def _settle(self):
        for a in self.design.assigns:
            width = self.design.signals[a.target].width
            self.committed[a.target] = self._coerce(self._eval_settled(a.rhs, a.prefix), width)

    def _eval_settled(self, expr: Expression, prefix: str) -> Bits:
        return _eval_expr(expr, lambda name: self._lookup(prefix, name))

    def _lookup(self, prefix: str, name: str) -> Bits:
        full = prefix + name
        if full not in self.committed:
            full = name
        return self.committed[full]

    @staticmethod
    def _coerce(value: Bits, width: int) -> Bits:
        if value.width == width:
            return value
        return value.zext(width) if value.width < width else value.trunc(width)

    def _exec_stmt(self, stmt: Statement, ctx: "_BlockCtx", loop_depth: int = 0,
                   first_iter: bool = False):
        if isinstance(stmt, BeginEnd):
            for inner in stmt.statements:
                yield from self._exec_stmt(inner, ctx, loop_depth, first_iter)
        elif isinstance(stmt, (BlockingAssign, NonBlockingAssign)):
            if ctx.pausable:
                yield Arrival(stmt.loc.line, self.current_time, "assign", ctx.prefix,
                              first_iter, loop_depth > 0)
            value = ctx.eval(stmt.rhs)
            ctx.assign(stmt.target, value, blocking=isinstance(stmt, BlockingAssign))
        elif isinstance(stmt, If):
            if ctx.pausable:
                yield Arrival(stmt.loc.line, self.current_time, "if", ctx.prefix,
                              first_iter, loop_depth > 0)
            if ctx.eval(stmt.cond).is_truthy():
                yield from self._exec_stmt(stmt.then_branch, ctx, loop_depth, first_iter)
            elif stmt.else_branch is not None:
                yield from self._exec_stmt(stmt.else_branch, ctx, loop_depth, first_iter)
        elif isinstance(stmt, For):
            # loop entry is silent: init/guard/step are not pause points
            ctx.assign(stmt.var, ctx.eval(stmt.init), blocking=True)
            iteration = 0
            while ctx.eval(stmt.cond).is_truthy():
                if iteration >= LOOP_ITERATION_CAP:
                    raise SimHang(f"loop at line {stmt.loc.line} exceeded iteration cap")
                yield from self._exec_stmt(stmt.body, ctx, loop_depth + 1,
                                           iteration == 0)
                ctx.assign(stmt.var, ctx.eval(stmt.step), blocking=True)
                iteration += 1
        else:
            raise TypeError(f"unknown statement {stmt!r}")


class _BlockCtx:
    """Evaluation context for one always-block execution within one edge."""

    def __init__(self, sim: SimRun, prefix: str, nba: dict[str, Bits], pausable: bool):
        self.sim = sim
        self.prefix = prefix
        self.nba = nba
        self.pausable = pausable
        self.local_written: set[str] = set()

    def _resolve(self, name: str) -> str:
        full = self.prefix + name
        return full if full in self.sim.committed else name

    def eval(self, expr: Expression) -> Bits:
        def read(name: str) -> Bits:
            full = self._resolve(name)
            if full in self.local_written:
                return self.sim.committed[full]
            return self.sim.edge_snapshot[full]
        return _eval_expr(expr, read)

    def assign(self, name: str, value: Bits, blocking: bool):
        full = self._resolve(name)
        width = self.sim.design.signals[full].width
        value = SimRun._coerce(value, width)
        if blocking:
            self.sim.committed[full] = value
            self.local_written.add(full)
        elif self.sim.fault.nba_as_blocking:
            # faulted commit: immediate, and leaks into the pre-edge snapshot
            # that later-scheduled blocks read from
            self.sim.committed[full] = value
            self.sim.edge_snapshot[full] = value
            self.local_written.add(full)
        else:
            self.nba[full] = value


def _eval_expr(expr: Expression, read) -> Bits:
    if isinstance(expr, SizedLiteral):
        return Bits.of(expr.width, expr.value)
    if isinstance(expr, Identifier):
        return read(expr.name)
    if isinstance(expr, Unary):
        return values.UNARY_OPS[expr.op](_eval_expr(expr.operand, read))
    if isinstance(expr, Binary):
        return values.BINARY_OPS[expr.op](_eval_expr(expr.lhs, read),
                                          _eval_expr(expr.rhs, read))
    raise TypeError(f"unknown expression {expr!r}")
