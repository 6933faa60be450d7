"""Interactive reference debugger over the event simulator.

The session is a paused/running state machine: actions are accepted only
while paused, and each run/step resolves back to a paused or finished
state before control returns. Breakpoints pause *before* the target
statement executes. Breakpoints requested on non-executable lines slide
to the nearest executable line below within the same module body;
requests made while code is folded are given in view coordinates and
translated to source coordinates first.
"""

from __future__ import annotations

import enum
import time as _time
from dataclasses import dataclass

from .faults import FaultConfig, NO_FAULT
from .sim import Arrival, ElaborationError, SimConfig, SimHang, SimRun, elaborate
from .source import LineClass, SourceUnit


class ActionRejected(Exception):
    pass


class SimTimeout(Exception):
    """A single run-all exceeded the wall-clock budget or hung."""


# --- actions ----------------------------------------------------------------

@dataclass(frozen=True)
class AddBreakpoint:
    line: int  # view coordinates while folds are active


@dataclass(frozen=True)
class RunAll:
    pass


@dataclass(frozen=True)
class Step:
    pass


@dataclass(frozen=True)
class Fold:
    start: int  # lines start+1..end become hidden
    end: int


@dataclass(frozen=True)
class Unfold:
    start: int


DebugAction = AddBreakpoint | RunAll | Step | Fold | Unfold


# --- trace events -----------------------------------------------------------

@dataclass(frozen=True)
class BreakpointSet:
    requested: int
    actual: int | None


@dataclass(frozen=True)
class Paused:
    line: int
    reason: str  # "Breakpoint" | "StepDone"
    time: int


@dataclass(frozen=True)
class WaveOutput:
    time: int
    signals: tuple[tuple[str, str], ...]  # sorted (name, value) pairs


@dataclass(frozen=True)
class Finished:
    time: int


TraceEvent = BreakpointSet | Paused | WaveOutput | Finished

WaveRow = tuple[int, dict[str, str]]


@dataclass(frozen=True)
class Trace:
    events: tuple[TraceEvent, ...]
    wave: tuple[WaveRow, ...]  # per-edge waveform log
    truncated: bool = False


class FsmState(enum.Enum):
    PAUSED_NOT_STARTED = "paused-not-started"
    PAUSED_AT_BREAKPOINT = "paused-at-breakpoint"
    PAUSED_AFTER_STEP = "paused-after-step"
    FINISHED = "finished"


@dataclass(frozen=True)
class BreakpointRecord:
    requested: int  # source coordinates (post view translation)
    actual: int | None


@dataclass(frozen=True)
class SessionView:
    """Immutable snapshot handed to action policies."""
    fsm: FsmState
    sim_time: int
    cursor_line: int | None
    breakpoints: tuple[BreakpointRecord, ...]
    folds: tuple[tuple[int, int], ...]


def slide_breakpoint(unit: SourceUnit, line: int) -> int | None:
    """Resolve a requested source line to the line where a breakpoint lands.

    Executable lines resolve to themselves; other lines slide to the
    nearest executable line strictly below within the same module body;
    None when no such line exists.
    """
    main = unit.main
    if not 1 <= line <= main.line_count:
        return None
    span = main.module_span(line)
    if span is None:
        return None
    if main.line_class(line) is LineClass.EXECUTABLE:
        return line
    for candidate in range(line + 1, span[1]):
        if main.line_class(candidate) is LineClass.EXECUTABLE:
            return candidate
    return None


class Session:
    def __init__(self, unit: SourceUnit, cfg: SimConfig, fault: FaultConfig = NO_FAULT):
        self.unit = unit
        self.cfg = cfg
        self.fault = fault
        self.design = elaborate(unit, cfg)
        self.sim = SimRun(self.design, cfg, fault)
        self._gen = self.sim.run()
        self._pending: Arrival | None = None
        self._done = False
        self.fsm = FsmState.PAUSED_NOT_STARTED
        self.sim_time = 0
        self.breakpoints: list[BreakpointRecord] = []
        self.folds: list[tuple[int, int]] = []
        self._wave_cursor = len(self.sim.wave_log)
        self._advance()

    # -- plumbing --

    def _advance(self):
        try:
            self._pending = next(self._gen)
        except StopIteration:
            self._pending = None
            self._done = True
        except SimHang as exc:
            raise SimTimeout(str(exc)) from exc

    def view(self) -> SessionView:
        return SessionView(
            fsm=self.fsm,
            sim_time=self.sim_time,
            cursor_line=self._pending.line if self._pending else None,
            breakpoints=tuple(self.breakpoints),
            folds=tuple(self.folds),
        )

    def drain_wave_rows(self) -> list[WaveRow]:
        rows = self.sim.wave_log[self._wave_cursor:]
        self._wave_cursor = len(self.sim.wave_log)
        return [(t, dict(vals)) for t, vals in rows]

    def _bp_lines(self) -> set[int]:
        return {bp.actual for bp in self.breakpoints if bp.actual is not None}

    def _snapshot_event(self, t: int) -> WaveOutput:
        vals = self.sim.stable_top_values()
        return WaveOutput(t, tuple(sorted(vals.items())))

    # -- view coordinates --

    def _visible_lines(self) -> list[int]:
        hidden: set[int] = set()
        for start, end in self.folds:
            hidden.update(range(start + 1, end + 1))
        return [ln for ln in range(1, self.unit.main.line_count + 1) if ln not in hidden]

    def view_to_source(self, view_line: int) -> int | None:
        if not self.folds:
            return view_line if 1 <= view_line <= self.unit.main.line_count else None
        visible = self._visible_lines()
        if 1 <= view_line <= len(visible):
            return visible[view_line - 1]
        return None

    def source_to_view(self, source_line: int) -> int | None:
        if not self.folds:
            return source_line
        visible = self._visible_lines()
        try:
            return visible.index(source_line) + 1
        except ValueError:
            return None  # hidden line

    # -- actions --

    def apply(self, action: DebugAction) -> list[TraceEvent]:
        if self.fsm is FsmState.FINISHED:
            raise ActionRejected("session already finished")
        if isinstance(action, AddBreakpoint):
            return [self._add_breakpoint(action.line)]
        if isinstance(action, Fold):
            self._fold(action.start, action.end)
            return []
        if isinstance(action, Unfold):
            self._unfold(action.start)
            return []
        if isinstance(action, RunAll):
            return self._run_all()
        if isinstance(action, Step):
            return self._step()
        raise ActionRejected(f"unknown action {action!r}")

    def _add_breakpoint(self, view_line: int) -> BreakpointSet:
        if self.fault.fold_pre_fold_coords:
            source = view_line if 1 <= view_line <= self.unit.main.line_count else None
        else:
            source = self.view_to_source(view_line)
        if source is None:
            record = BreakpointRecord(view_line, None)
            self.breakpoints.append(record)
            return BreakpointSet(view_line, None)
        if self.fault.sliding_disabled:
            main = self.unit.main
            actual = source if (main.module_span(source) is not None and
                                main.line_class(source) is LineClass.EXECUTABLE) else None
        else:
            actual = slide_breakpoint(self.unit, source)
        record = BreakpointRecord(source, actual)
        self.breakpoints.append(record)
        return BreakpointSet(source, actual)

    def _fold(self, start: int, end: int):
        if not 1 <= start < end <= self.unit.main.line_count:
            raise ActionRejected(f"bad fold region ({start}, {end})")
        for s, e in self.folds:
            disjoint = end < s or start > e
            nested = (s <= start and end <= e) or (start <= s and e <= end)
            if not (disjoint or nested):
                raise ActionRejected(f"fold ({start}, {end}) partially overlaps ({s}, {e})")
        self.folds.append((start, end))

    def _unfold(self, start: int):
        for i, (s, _) in enumerate(self.folds):
            if s == start:
                del self.folds[i]
                return
        raise ActionRejected(f"no fold starting at line {start}")

    def _finish_events(self) -> list[TraceEvent]:
        self.fsm = FsmState.FINISHED
        self.sim_time = self.cfg.total_sim_time
        return [Finished(self.sim_time), self._snapshot_event(self.sim_time)]

    def _pause_events(self, reason: str) -> list[TraceEvent]:
        arrival = self._pending
        self.sim_time = arrival.time
        self.fsm = (FsmState.PAUSED_AT_BREAKPOINT if reason == "Breakpoint"
                    else FsmState.PAUSED_AFTER_STEP)
        return [Paused(arrival.line, reason, arrival.time),
                self._snapshot_event(arrival.time)]

    def _run_all(self) -> list[TraceEvent]:
        deadline = _time.monotonic() + self.cfg.run_wallclock_s
        bp_lines = self._bp_lines()
        overshoot_pending = False
        while True:
            self._advance()
            if self._done:
                return self._finish_events()
            if _time.monotonic() > deadline:
                raise SimTimeout("run-all exceeded the wall-clock budget")
            arrival = self._pending
            if overshoot_pending:
                return self._pause_events("Breakpoint")
            if arrival.line in bp_lines:
                if self.fault.loop_skip_first and arrival.in_loop_body and arrival.first_loop_iter:
                    continue
                if self.fault.pause_overshoot:
                    overshoot_pending = True
                    continue
                return self._pause_events("Breakpoint")

    def _step(self) -> list[TraceEvent]:
        self._advance()
        if self._done:
            return self._finish_events()
        return self._pause_events("StepDone")


def start_session(unit: SourceUnit, cfg: SimConfig,
                  fault: FaultConfig = NO_FAULT) -> Session:
    """Elaborates the design and opens a paused, not-started session.

    Raises ElaborationError when no unambiguous top module exists or an
    instantiation does not resolve.
    """
    return Session(unit, cfg, fault)
