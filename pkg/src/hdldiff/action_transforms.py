"""Equivalence-preserving transformations of debug-action plans.

Each transformation rewrites a policy's plan and contributes expectation
entries: exclusions that neutralize the noise it knowingly adds, and
checks that must hold on its own run. Some expectations are interactive:
their line sets depend on events observed while the run executes (e.g.
where an inserted breakpoint actually lands after sliding).
"""

from __future__ import annotations

import random

from .consteval import loop_trip_count
from .debugger import AddBreakpoint, BreakpointSet, Fold, Paused, Unfold, slide_breakpoint
from .expectations import (ExcludeBreakpointSet, ExcludePausesAt,
                           ExpectNoPauseAt, ExpectPauseCount,
                           ExpectSlideEquivalence)
from .policy import ActionPolicy, ActionRecord, Resolver, UnresolvedExpectation
from .source import (AlwaysBlock, BeginEnd, For, If, LineClass, SourceUnit,
                     Statement, walk_statements)


class TransformNotApplicable(Exception):
    pass


class NoSlideSite(TransformNotApplicable):
    pass


class NoBranchSite(TransformNotApplicable):
    pass


class NoLoopSite(TransformNotApplicable):
    pass


class NoFoldSite(TransformNotApplicable):
    pass


def _first_pausable_line(stmt: Statement) -> int | None:
    for s in walk_statements(stmt):
        if not isinstance(s, BeginEnd):
            return s.loc.line
    return None


def _always_blocks(unit: SourceUnit):
    for mod in unit.main.modules:
        for item in mod.items:
            if isinstance(item, AlwaysBlock):
                yield mod, item


# --- add breakpoint ----------------------------------------------------------

class _InsertedBreakpointResolver(Resolver):
    def __init__(self, action: AddBreakpoint):
        self.action = action
        self.event: BreakpointSet | None = None

    def reset(self):
        self.event = None

    def observe(self, action, events):
        if action is self.action:
            for evt in events:
                if isinstance(evt, BreakpointSet):
                    self.event = evt

    def finalize(self):
        if self.event is None:
            raise UnresolvedExpectation("inserted breakpoint was never confirmed")
        exclusions = [ExcludeBreakpointSet(frozenset({self.event.requested}))]
        if self.event.actual is not None:
            exclusions.append(ExcludePausesAt(frozenset({self.event.actual})))
        return exclusions, []


def xf_add_breakpoint(policy: ActionPolicy, unit: SourceUnit,
                      rng: random.Random) -> tuple[ActionPolicy, tuple]:
    """Insert one extra breakpoint at a random line; its pause exclusion is
    resolved from the live confirmation event (the landing line is only
    known after sliding)."""
    out = policy.clone()
    exec_lines = unit.main.executable_lines()
    if exec_lines and rng.random() < 0.7:
        line = rng.choice(exec_lines)
    else:
        line = rng.randint(1, unit.main.line_count)
    action = AddBreakpoint(line)
    slot = rng.choice(out.unbracketed_slots()[1:] or [len(out.planned)])
    out.planned.insert(slot, action)
    resolver = _InsertedBreakpointResolver(action)
    out.resolvers.append(resolver)
    out.records.append(ActionRecord("add-breakpoint", {"line": line, "slot": slot}))
    return out, ()


# --- breakpoint sliding ------------------------------------------------------

def _slide_candidates(policy: ActionPolicy, unit: SourceUnit):
    """(plan index, non-executable line p, executable target l) triples."""
    main = unit.main
    out = []
    for idx in policy.breakpoint_indices():
        if policy.fold_depth_at(idx) != 0:
            continue  # line is in view coordinates there
        line = policy.planned[idx].line
        if not (1 <= line <= main.line_count):
            continue
        if main.line_class(line) is not LineClass.EXECUTABLE:
            continue
        span = main.module_span(line)
        if span is None:
            continue
        p = line - 1
        while p > span[0]:
            cls = main.line_class(p)
            if cls in (LineClass.COMMENT, LineClass.BLANK):
                out.append((idx, p, line))
                p -= 1
            else:
                break
    return out


def xf_breakpoint_slide(policy: ActionPolicy, unit: SourceUnit,
                        rng: random.Random) -> tuple[ActionPolicy, tuple]:
    """Replace a breakpoint on an executable line l with one on a
    comment/blank line p just above it; the debugger must slide it back
    to l and behave identically there."""
    candidates = _slide_candidates(policy, unit)
    if not candidates:
        raise NoSlideSite("no planned breakpoint has a slide site above it")
    idx, p, line = rng.choice(candidates)
    out = policy.clone()
    out.planned[idx] = AddBreakpoint(p)
    out.static_exclusions.append(ExcludeBreakpointSet(frozenset({p, line})))
    out.static_checks.append(ExpectSlideEquivalence(p, line))
    out.records.append(ActionRecord("breakpoint-slide",
                                    {"index": idx, "from": p, "to": line}))
    return out, (ExpectSlideEquivalence(p, line),)


# --- if/else probe -----------------------------------------------------------

class _BranchProbeResolver(Resolver):
    def __init__(self, then_line: int, else_line: int):
        self.lines = (then_line, else_line)
        self.seen: set[int] = set()

    def reset(self):
        self.seen = set()

    def observe(self, action, events):
        for evt in events:
            if isinstance(evt, Paused) and evt.line in self.lines:
                self.seen.add(evt.line)

    def finalize(self):
        untaken = frozenset(self.lines) - frozenset(self.seen)
        return [], [ExpectNoPauseAt(untaken)]


def xf_if_else_probe(policy: ActionPolicy, unit: SourceUnit,
                     rng: random.Random) -> tuple[ActionPolicy, tuple]:
    """Breakpoint both branches of an if/else; only lines observed pausing
    may pause, so a branch the live trace never visited must stay silent."""
    candidates = []
    for _, block in _always_blocks(unit):
        for stmt in walk_statements(block.body):
            if isinstance(stmt, If) and stmt.else_branch is not None:
                then_line = _first_pausable_line(stmt.then_branch)
                else_line = _first_pausable_line(stmt.else_branch)
                if then_line is not None and else_line is not None:
                    candidates.append((then_line, else_line))
    if not candidates:
        raise NoBranchSite("no if/else with two populated branches")
    then_line, else_line = rng.choice(candidates)
    out = policy.clone()
    slot = out.unbracketed_slots()[-1]
    out.planned[slot:slot] = [AddBreakpoint(then_line), AddBreakpoint(else_line)]
    out.static_exclusions.append(ExcludePausesAt(frozenset({then_line, else_line})))
    out.static_exclusions.append(ExcludeBreakpointSet(frozenset({then_line, else_line})))
    out.resolvers.append(_BranchProbeResolver(then_line, else_line))
    out.records.append(ActionRecord("if-else-probe",
                                    {"then": then_line, "else": else_line}))
    return out, ()


# --- step-for-loop counting --------------------------------------------------

def loop_probe_sites(unit: SourceUnit) -> list[tuple[int, int]]:
    """(body line, constant trip count) for every statically counted loop."""
    sites = []
    for _, block in _always_blocks(unit):
        for stmt in walk_statements(block.body):
            if isinstance(stmt, For):
                trips = loop_trip_count(stmt)
                body_line = _first_pausable_line(stmt.body)
                if trips is not None and body_line is not None:
                    sites.append((body_line, trips))
    return sites


def xf_step_for_loop(policy: ActionPolicy, unit: SourceUnit,
                     rng: random.Random) -> tuple[ActionPolicy, tuple]:
    """Breakpoint a loop body and demand exactly trip-count pauses per
    fully-run clock edge."""
    sites = loop_probe_sites(unit)
    if not sites:
        raise NoLoopSite("no loop with a constant trip count")
    body_line, trips = rng.choice(sites)
    out = policy.clone()
    slot = out.unbracketed_slots()[-1]
    out.planned.insert(slot, AddBreakpoint(body_line))
    out.static_exclusions.append(ExcludePausesAt(frozenset({body_line})))
    out.static_exclusions.append(ExcludeBreakpointSet(frozenset({body_line})))
    out.static_checks.append(ExpectPauseCount(body_line, trips))
    out.records.append(ActionRecord("step-for-loop",
                                    {"line": body_line, "trips": trips}))
    return out, (ExpectPauseCount(body_line, trips),)


# --- code folding ------------------------------------------------------------

def fold_regions(unit: SourceUnit) -> list[tuple[int, int]]:
    """Foldable (start, end) regions: module bodies and begin/end blocks
    spanning at least three lines. Folding hides start+1..end."""
    regions = []
    for mod in unit.main.modules:
        if mod.end_line - mod.loc.line >= 3:
            regions.append((mod.loc.line, mod.end_line))
        for item in mod.items:
            if isinstance(item, AlwaysBlock):
                for stmt in walk_statements(item.body):
                    if isinstance(stmt, BeginEnd) and stmt.end_line - stmt.loc.line >= 3:
                        regions.append((stmt.loc.line, stmt.end_line))
    return regions


def view_line_under_fold(line: int, region: tuple[int, int]) -> int:
    start, end = region
    if line <= start:
        return line
    if line > end:
        return line - (end - start)
    raise ValueError(f"line {line} is hidden by fold {region}")


def xf_code_fold(policy: ActionPolicy, unit: SourceUnit,
                 rng: random.Random) -> tuple[ActionPolicy, tuple]:
    """Bracket a planned breakpoint with fold/unfold of an unrelated
    region, re-expressing its line in view coordinates; the confirmation
    must match the unfolded run's."""
    main = unit.main
    regions = fold_regions(unit)
    candidates = []
    for idx in policy.breakpoint_indices():
        if idx == 0 or policy.fold_depth_at(idx) != 0:
            continue  # the first action must stay a plain breakpoint
        line = policy.planned[idx].line
        if not (1 <= line <= main.line_count):
            continue
        if main.line_class(line) is not LineClass.EXECUTABLE:
            continue
        for region in regions:
            if line <= region[0] or line > region[1]:
                candidates.append((idx, line, region))
    if not candidates:
        raise NoFoldSite("no (breakpoint, disjoint region) pair available")
    # regions above the breakpoint shift its view line and are the
    # interesting case; fall back to any disjoint region
    shifting = [c for c in candidates if c[2][1] < c[1]]
    idx, line, region = rng.choice(shifting or candidates)
    out = policy.clone()
    view_line = view_line_under_fold(line, region)
    out.planned[idx:idx + 1] = [Fold(region[0], region[1]),
                                AddBreakpoint(view_line),
                                Unfold(region[0])]
    expected_actual = slide_breakpoint(unit, line)
    out.static_checks.append(ExpectSlideEquivalence(line, expected_actual))
    out.records.append(ActionRecord(
        "code-fold", {"index": idx, "line": line,
                      "start": region[0], "end": region[1]}))
    return out, (ExpectSlideEquivalence(line, expected_actual),)


# --- pipeline ----------------------------------------------------------------

ACTION_TRANSFORMS = {
    "add-breakpoint": xf_add_breakpoint,
    "breakpoint-slide": xf_breakpoint_slide,
    "if-else-probe": xf_if_else_probe,
    "step-for-loop": xf_step_for_loop,
    "code-fold": xf_code_fold,
}


def act_pipeline(policy: ActionPolicy, unit: SourceUnit, iterations: int,
                 rng: random.Random,
                 weights: dict[str, float] | None = None) -> tuple[ActionPolicy, tuple]:
    """Apply up to `iterations` randomly chosen applicable transformations
    in sequence; inapplicable draws are redrawn among the remaining kinds
    and the pipeline stops early when nothing applies."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    current = policy
    for _ in range(iterations):
        names = list(ACTION_TRANSFORMS)
        applied = False
        while names:
            if weights:
                pool = [max(weights.get(n, 1.0), 0.0) for n in names]
                if sum(pool) <= 0:
                    pool = [1.0] * len(names)
                name = rng.choices(names, weights=pool, k=1)[0]
            else:
                name = rng.choice(names)
            names.remove(name)
            try:
                current, _ = ACTION_TRANSFORMS[name](current, unit, rng)
                applied = True
                break
            except TransformNotApplicable:
                continue
        if not applied:
            break  # early stop: recorded by the shorter records list
    return current, ()
