"""Expectation entries produced by transformations and consumed by the
diff engine.

Exclusion entries remove alignment noise that a transformation knowingly
introduced (extra pauses at an inserted breakpoint, the confirmation
event of a relocated breakpoint) before traces are compared. Check
entries are per-run assertions whose violation is itself a verdict.
All line numbers are in original-design coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ExcludePausesAt:
    lines: frozenset[int]


@dataclass(frozen=True)
class ExcludeBreakpointSet:
    """Drop BreakpointSet confirmations for these requested lines."""
    lines: frozenset[int]


@dataclass(frozen=True)
class ExpectPauseCount:
    """Exactly `count` breakpoint pauses at `line` within the first clock
    edge fully covered by run-all actions (see diffing.check_expectations)."""
    line: int
    count: int


@dataclass(frozen=True)
class ExpectNoPauseAt:
    lines: frozenset[int]


@dataclass(frozen=True)
class ExpectSlideEquivalence:
    """The run must confirm a breakpoint requested at from_line resolving
    to to_line; pause behavior at to_line is covered by the trace compare."""
    from_line: int
    to_line: int


ExpectationEntry = (ExcludePausesAt | ExcludeBreakpointSet | ExpectPauseCount |
                    ExpectNoPauseAt | ExpectSlideEquivalence)

ExpectationSet = tuple[ExpectationEntry, ...]


def exclusion_lines(entries) -> frozenset[int]:
    out: set[int] = set()
    for e in entries:
        if isinstance(e, ExcludePausesAt):
            out.update(e.lines)
    return frozenset(out)


def excluded_bp_lines(entries) -> frozenset[int]:
    out: set[int] = set()
    for e in entries:
        if isinstance(e, ExcludeBreakpointSet):
            out.update(e.lines)
    return frozenset(out)


def entry_to_text(e: ExpectationEntry) -> str:
    if isinstance(e, ExcludePausesAt):
        return "exclude-pauses " + ",".join(map(str, sorted(e.lines)))
    if isinstance(e, ExcludeBreakpointSet):
        return "exclude-bpset " + ",".join(map(str, sorted(e.lines)))
    if isinstance(e, ExpectPauseCount):
        return f"pause-count {e.line} {e.count}"
    if isinstance(e, ExpectNoPauseAt):
        return "no-pause " + ",".join(map(str, sorted(e.lines)))
    return f"slide-equivalence {e.from_line} {e.to_line}"


def entry_from_text(text: str) -> ExpectationEntry:
    kind, _, rest = text.partition(" ")
    if kind in ("exclude-pauses", "exclude-bpset", "no-pause"):
        lines = frozenset(int(x) for x in rest.split(",") if x)
        if kind == "exclude-pauses":
            return ExcludePausesAt(lines)
        if kind == "exclude-bpset":
            return ExcludeBreakpointSet(lines)
        return ExpectNoPauseAt(lines)
    if kind == "pause-count":
        line, count = rest.split()
        return ExpectPauseCount(int(line), int(count))
    if kind == "slide-equivalence":
        frm, to = rest.split()
        return ExpectSlideEquivalence(int(frm), int(to))
    raise ValueError(f"unknown expectation entry {text!r}")
