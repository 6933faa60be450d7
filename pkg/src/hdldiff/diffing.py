"""Trace normalization and the differential verdict.

normalize() maps a run's trace back to original-design coordinates,
windows out the reset transient, and removes events a transformation
declared as expected noise. compare() then demands exact equality of the
windowed waveform tables and the remaining event sequences; the first
divergence is reported with a category. check_expectations() validates
the per-run assertions contributed by transformations plus one always-on
self-consistency rule: a breakpoint pause must occur at a line some live
breakpoint resolved to.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .debugger import BreakpointSet, Finished, Paused, Trace, WaveOutput
from .expectations import (ExcludeBreakpointSet, ExcludePausesAt,
                           ExpectNoPauseAt, ExpectPauseCount,
                           ExpectSlideEquivalence, excluded_bp_lines,
                           exclusion_lines)
from .linemap import LineMap
from .sim import SimConfig


class IncomparableTrace(Exception):
    """An event referenced a line outside the line map."""


class Category(enum.Enum):
    BREAKPOINT_PLACEMENT = "BreakpointPlacement"
    PAUSE_LOCATION = "PauseLocation"
    PAUSE_COUNT = "PauseCount"
    WAVE_VALUE = "WaveValue"
    TERMINATION = "Termination"


class FailureKind(enum.Enum):
    CRASH = "Crash"
    TIMEOUT = "Timeout"
    ELABORATION = "Elaboration"


@dataclass(frozen=True)
class Consistent:
    pass


@dataclass(frozen=True)
class Inconsistent:
    category: Category
    index: int
    detail: str

    def summary(self) -> str:
        return f"{self.category.value}@{self.index}: {self.detail}"


@dataclass(frozen=True)
class Failure:
    kind: FailureKind
    detail: str


Verdict = Consistent | Inconsistent | Failure


@dataclass(frozen=True)
class NormEvent:
    """A trace event in original coordinates; deleted-line events are kept
    but flagged so comparison can skip what the variant cannot contain."""
    event: object
    deleted: bool = False


@dataclass(frozen=True)
class NormalizedTrace:
    events: tuple[NormEvent, ...]
    wave: tuple[tuple[int, tuple[tuple[str, str], ...]], ...]
    truncated: bool


def _map_back(line_map: LineMap, line: int, forward_identity: bool) -> tuple[int, bool]:
    """Variant line -> (original line, deleted flag)."""
    if forward_identity:
        return line, False
    original = line_map.unmap_line(line)
    if original is None:
        raise IncomparableTrace(f"line {line} has no original-coordinate image")
    return original, False


def normalize(trace: Trace, line_map: LineMap, expectations,
              cfg: SimConfig, from_variant: bool = False) -> NormalizedTrace:
    """Normalize one run's trace.

    from_variant selects the direction: variant-run lines are inverse
    mapped to original coordinates; original-run lines are kept but
    events on lines the map deletes are flagged.
    """
    excl_pauses = exclusion_lines(expectations)
    excl_bps = excluded_bp_lines(expectations)
    out: list[NormEvent] = []
    drop_next_wave = False
    for event in trace.events:
        if isinstance(event, WaveOutput):
            if drop_next_wave:
                drop_next_wave = False
                continue
            if event.time < cfg.reset_window:
                out.append(NormEvent(replace(event, signals=())))
            else:
                out.append(NormEvent(event))
            continue
        drop_next_wave = False
        if isinstance(event, BreakpointSet):
            if from_variant:
                requested = line_map.unmap_line(event.requested)
                actual = (line_map.unmap_line(event.actual)
                          if event.actual is not None else None)
                if requested is None or (event.actual is not None and actual is None):
                    raise IncomparableTrace(
                        f"breakpoint event at variant line {event.requested} is unmappable")
                mapped = BreakpointSet(requested, actual)
                deleted = False
            else:
                mapped = event
                deleted = event.requested in line_map.deleted or (
                    event.actual is not None and event.actual in line_map.deleted)
            if mapped.requested in excl_bps:
                continue
            out.append(NormEvent(mapped, deleted))
        elif isinstance(event, Paused):
            if from_variant:
                line = line_map.unmap_line(event.line)
                if line is None:
                    raise IncomparableTrace(
                        f"pause at variant line {event.line} is unmappable")
                mapped = replace(event, line=line)
                deleted = False
            else:
                mapped = event
                deleted = event.line in line_map.deleted
            if mapped.line in excl_pauses:
                drop_next_wave = True  # the paired snapshot goes with it
                continue
            out.append(NormEvent(mapped, deleted))
        elif isinstance(event, Finished):
            out.append(NormEvent(event))
        else:
            raise IncomparableTrace(f"unknown event {event!r}")
    wave = tuple((t, tuple(sorted(vals.items()))) for t, vals in trace.wave
                 if t >= cfg.reset_window)
    return NormalizedTrace(tuple(out), wave, trace.truncated)


def _comparable_events(trace: NormalizedTrace):
    return [ne.event for ne in trace.events if not ne.deleted]


def _categorize_pair(a, b) -> tuple[Category, str]:
    if type(a) is not type(b):
        if isinstance(a, Finished) or isinstance(b, Finished):
            return Category.TERMINATION, f"{a!r} vs {b!r}"
        return Category.PAUSE_LOCATION, f"{a!r} vs {b!r}"
    if isinstance(a, BreakpointSet):
        return Category.BREAKPOINT_PLACEMENT, f"{a!r} vs {b!r}"
    if isinstance(a, Paused):
        if a.line != b.line:
            return Category.PAUSE_LOCATION, f"{a!r} vs {b!r}"
        return Category.PAUSE_COUNT, f"{a!r} vs {b!r}"
    if isinstance(a, WaveOutput):
        return Category.WAVE_VALUE, f"{a!r} vs {b!r}"
    return Category.TERMINATION, f"{a!r} vs {b!r}"


def compare(a: NormalizedTrace, b: NormalizedTrace) -> Verdict:
    """Consistent iff the windowed waveform tables agree on every shared
    sample time and the comparable event sequences are equal. Traces cut
    short by the action cap compare on the common prefix only."""
    wave_a = dict(a.wave)
    wave_b = dict(b.wave)
    for t in sorted(set(wave_a) & set(wave_b)):
        if wave_a[t] != wave_b[t]:
            detail = _first_wave_diff(t, wave_a[t], wave_b[t])
            return Inconsistent(Category.WAVE_VALUE, t, detail)
    if not (a.truncated or b.truncated):
        if len(wave_a) != len(wave_b):
            return Inconsistent(Category.TERMINATION, min(len(wave_a), len(wave_b)),
                                "waveform logs cover different time ranges")
    ev_a = _comparable_events(a)
    ev_b = _comparable_events(b)
    prefix_only = a.truncated or b.truncated
    n = min(len(ev_a), len(ev_b))
    for i in range(n):
        if ev_a[i] != ev_b[i]:
            category, detail = _categorize_pair(ev_a[i], ev_b[i])
            return Inconsistent(category, i, detail)
    if len(ev_a) != len(ev_b) and not prefix_only:
        longer = ev_a if len(ev_a) > len(ev_b) else ev_b
        extra = longer[n]
        category = (Category.TERMINATION if isinstance(extra, Finished)
                    else Category.PAUSE_COUNT)
        return Inconsistent(category, n, f"unmatched trailing event {extra!r}")
    return Consistent()


def _first_wave_diff(t: int, row_a, row_b) -> str:
    da, db = dict(row_a), dict(row_b)
    for name in sorted(set(da) | set(db)):
        if da.get(name) != db.get(name):
            return f"t={t} {name}: {da.get(name)} vs {db.get(name)}"
    return f"t={t}: rows differ"


def check_expectations(trace: NormalizedTrace, expectations) -> Verdict:
    """Validate per-run expectation entries against a normalized trace."""
    pauses = [ne.event for ne in trace.events if isinstance(ne.event, Paused)]
    bp_events = [ne.event for ne in trace.events if isinstance(ne.event, BreakpointSet)]

    verdict = _check_pause_self_consistency(trace)
    if not isinstance(verdict, Consistent):
        return verdict

    for idx, entry in enumerate(expectations):
        if isinstance(entry, (ExcludePausesAt, ExcludeBreakpointSet)):
            continue
        if isinstance(entry, ExpectNoPauseAt):
            for p in pauses:
                if p.line in entry.lines:
                    return Inconsistent(Category.PAUSE_LOCATION, idx,
                                        f"unexpected pause at line {p.line} (t={p.time})")
        elif isinstance(entry, ExpectSlideEquivalence):
            hits = [e for e in bp_events if e.requested == entry.from_line]
            if not hits or any(e.actual != entry.to_line for e in hits):
                got = hits[0].actual if hits else "no confirmation"
                return Inconsistent(
                    Category.BREAKPOINT_PLACEMENT, idx,
                    f"breakpoint at {entry.from_line} resolved to {got}, "
                    f"expected {entry.to_line}")
        elif isinstance(entry, ExpectPauseCount):
            observed = _clean_edge_pause_count(trace, entry.line)
            if observed != entry.count:
                return Inconsistent(
                    Category.PAUSE_COUNT, idx,
                    f"line {entry.line}: {observed} pauses per edge, "
                    f"expected {entry.count}")
    return Consistent()


def _clean_edge_pause_count(trace: NormalizedTrace, line: int) -> int:
    """Breakpoint pauses at `line` during the first clock edge reached
    after the step phase ended (step pauses may consume body iterations)."""
    pauses = [ne.event for ne in trace.events if isinstance(ne.event, Paused)]
    last_step_time = max((p.time for p in pauses if p.reason == "StepDone"), default=-1)
    times = sorted({p.time for p in pauses
                    if p.reason == "Breakpoint" and p.line == line
                    and p.time > last_step_time})
    if not times:
        return 0
    t0 = times[0]
    return sum(1 for p in pauses
               if p.reason == "Breakpoint" and p.line == line and p.time == t0)


def _check_pause_self_consistency(trace: NormalizedTrace) -> Verdict:
    """A breakpoint-reason pause must name a line some live breakpoint
    actually resolved to; anything else is a misreported pause."""
    live: set[int] = set()
    for idx, ne in enumerate(trace.events):
        event = ne.event
        if isinstance(event, BreakpointSet) and event.actual is not None:
            live.add(event.actual)
        elif isinstance(event, Paused) and event.reason == "Breakpoint":
            if event.line not in live:
                return Inconsistent(
                    Category.PAUSE_LOCATION, idx,
                    f"breakpoint pause at line {event.line} which no breakpoint resolves to")
    return Consistent()


# --- byte-stable text serialization ------------------------------------------

def trace_to_text(trace: NormalizedTrace) -> str:
    lines = [f"truncated={'true' if trace.truncated else 'false'}"]
    for ne in trace.events:
        e = ne.event
        mark = " deleted=true" if ne.deleted else ""
        if isinstance(e, BreakpointSet):
            actual = "none" if e.actual is None else str(e.actual)
            lines.append(f"BreakpointSet requested={e.requested} actual={actual}{mark}")
        elif isinstance(e, Paused):
            lines.append(f"Paused line={e.line} reason={e.reason} time={e.time}{mark}")
        elif isinstance(e, WaveOutput):
            sig = " ".join(f"{k}={v}" for k, v in e.signals)
            lines.append(f"WaveOutput time={e.time} {sig}".rstrip())
        elif isinstance(e, Finished):
            lines.append(f"Finished time={e.time}")
    for t, row in trace.wave:
        sig = " ".join(f"{k}={v}" for k, v in row)
        lines.append(f"WaveRow time={t} {sig}".rstrip())
    return "\n".join(lines) + "\n"


def trace_from_text(text: str) -> NormalizedTrace:
    truncated = False
    events: list[NormEvent] = []
    wave = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("truncated="):
            truncated = line.endswith("true")
            continue
        parts = line.split()
        kind = parts[0]
        fields = dict(p.split("=", 1) for p in parts[1:])
        deleted = fields.pop("deleted", "false") == "true"
        if kind == "BreakpointSet":
            actual = None if fields["actual"] == "none" else int(fields["actual"])
            events.append(NormEvent(BreakpointSet(int(fields["requested"]), actual), deleted))
        elif kind == "Paused":
            events.append(NormEvent(
                Paused(int(fields["line"]), fields["reason"], int(fields["time"])), deleted))
        elif kind == "WaveOutput":
            t = int(fields.pop("time"))
            events.append(NormEvent(WaveOutput(t, tuple(sorted(fields.items()))), deleted))
        elif kind == "Finished":
            events.append(NormEvent(Finished(int(fields["time"])), deleted))
        elif kind == "WaveRow":
            t = int(fields.pop("time"))
            wave.append((t, tuple(sorted(fields.items()))))
        else:
            raise ValueError(f"unknown trace line {raw!r}")
    return NormalizedTrace(tuple(events), tuple(wave), truncated)
