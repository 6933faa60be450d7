"""Interactive debug-action policies.

A policy is a staged plan plus live observers: a breakpoint phase
(AddBreakpoint and fold brackets), a step phase, then run-all actions
until the session finishes or the action cap is reached. Steps run
before the first run-all on purpose: a step's outcome depends only on
the cursor, so the step-phase pauses are identical no matter which
breakpoints a transformed sibling policy added.

Observers ("resolvers") watch the live trace and resolve interactive
expectation entries, e.g. the post-sliding location of an inserted
breakpoint, which is only known at run time.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .debugger import (AddBreakpoint, DebugAction, Fold, FsmState, RunAll,
                       Step, Trace, TraceEvent, Unfold)
from .expectations import ExpectationEntry
from .source import SourceUnit

DEFAULT_ACTION_CAP = 256
MAX_STEP_PHASE = 8
STEP_PROBABILITY = 0.3  # per-slot draw; run-all keeps the remaining 70%


class NoExecutableLines(Exception):
    pass


class UnresolvedExpectation(Exception):
    pass


class Resolver:
    """Observes (action, events) pairs during a run; yields entries at the end."""

    def reset(self):
        pass

    def observe(self, action: DebugAction, events: list[TraceEvent]):
        pass

    def finalize(self) -> tuple[list[ExpectationEntry], list[ExpectationEntry]]:
        """(exclusion entries, check entries); raises UnresolvedExpectation."""
        return [], []


@dataclass
class ActionRecord:
    """A replayable description of one applied action transformation."""
    kind: str
    params: dict

    def to_text(self) -> str:
        fields = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind} {fields}".strip()


class ActionPolicy:
    def __init__(self, planned: list[DebugAction], step_count: int,
                 cap: int = DEFAULT_ACTION_CAP, seed: int | None = None):
        if not planned or not isinstance(planned[0], AddBreakpoint):
            raise ValueError("a policy must begin by adding a breakpoint")
        self.planned = list(planned)
        self.step_count = step_count
        self.cap = cap
        self.seed = seed
        self.resolvers: list[Resolver] = []
        self.static_exclusions: list[ExpectationEntry] = []
        self.static_checks: list[ExpectationEntry] = []
        self.records: list[ActionRecord] = []
        self._plan_idx = 0
        self._steps_done = 0

    def clone(self) -> "ActionPolicy":
        twin = ActionPolicy(list(self.planned), self.step_count, self.cap, self.seed)
        twin.static_exclusions = list(self.static_exclusions)
        twin.static_checks = list(self.static_checks)
        twin.records = list(self.records)
        twin.resolvers = list(self.resolvers)
        return twin

    def reset(self):
        self._plan_idx = 0
        self._steps_done = 0
        for resolver in self.resolvers:
            resolver.reset()

    # -- interactive protocol --

    def next_action(self, view) -> DebugAction | None:
        if view.fsm is FsmState.FINISHED:
            return None
        if self._plan_idx < len(self.planned):
            action = self.planned[self._plan_idx]
            self._plan_idx += 1
            return action
        if self._steps_done < self.step_count:
            self._steps_done += 1
            return Step()
        return RunAll()

    def observe(self, action: DebugAction, events: list[TraceEvent]):
        for resolver in self.resolvers:
            resolver.observe(action, events)

    def resolve_expectations(self) -> tuple[tuple[ExpectationEntry, ...],
                                            tuple[ExpectationEntry, ...]]:
        exclusions = list(self.static_exclusions)
        checks = list(self.static_checks)
        for resolver in self.resolvers:
            more_excl, more_checks = resolver.finalize()
            exclusions.extend(more_excl)
            checks.extend(more_checks)
        return tuple(exclusions), tuple(checks)

    # -- plan structure helpers --

    def breakpoint_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.planned) if isinstance(a, AddBreakpoint)]

    def fold_depth_at(self, index: int) -> int:
        """Number of folds active just before plan position `index`."""
        depth = 0
        for a in self.planned[:index]:
            if isinstance(a, Fold):
                depth += 1
            elif isinstance(a, Unfold):
                depth -= 1
        return depth

    def unbracketed_slots(self) -> list[int]:
        """Insertion positions where no fold is active."""
        return [i for i in range(len(self.planned) + 1) if self.fold_depth_at(i) == 0]

    # -- serialization --

    def to_script(self) -> str:
        lines = [f"cap {self.cap}", f"steps {self.step_count}"]
        for action in self.planned:
            if isinstance(action, AddBreakpoint):
                lines.append(f"add_bp {action.line}")
            elif isinstance(action, Fold):
                lines.append(f"fold {action.start} {action.end}")
            elif isinstance(action, Unfold):
                lines.append(f"unfold {action.start}")
            else:
                raise ValueError(f"unexpected planned action {action!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_script(text: str) -> "ActionPolicy":
        cap = DEFAULT_ACTION_CAP
        steps = 0
        planned: list[DebugAction] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "cap":
                cap = int(parts[1])
            elif parts[0] == "steps":
                steps = int(parts[1])
            elif parts[0] == "add_bp":
                planned.append(AddBreakpoint(int(parts[1])))
            elif parts[0] == "fold":
                planned.append(Fold(int(parts[1]), int(parts[2])))
            elif parts[0] == "unfold":
                planned.append(Unfold(int(parts[1])))
            else:
                raise ValueError(f"unknown script line {raw!r}")
        return ActionPolicy(planned, steps, cap)


def base_policy(unit: SourceUnit, rng: random.Random,
                cap: int = DEFAULT_ACTION_CAP) -> ActionPolicy:
    """1-4 breakpoints on random executable lines, a short step phase,
    then run-alls until the session finishes."""
    exec_lines = unit.main.executable_lines()
    if not exec_lines:
        raise NoExecutableLines("design has no executable lines")
    planned: list[DebugAction] = [
        AddBreakpoint(rng.choice(exec_lines)) for _ in range(rng.randint(1, 4))
    ]
    steps = 0
    while steps < MAX_STEP_PHASE and rng.random() < STEP_PROBABILITY:
        steps += 1
    return ActionPolicy(planned, steps, cap)


def run_to_completion(driver, policy: ActionPolicy) -> Trace:
    """Drive a session with the policy until it finishes, the policy is
    done, or the action cap cuts the run short (truncated trace)."""
    policy.reset()
    events: list[TraceEvent] = []
    wave: list = []
    actions = 0
    truncated = False
    while True:
        view = driver.view()
        if view.fsm is FsmState.FINISHED:
            break
        action = policy.next_action(view)
        if action is None:
            break
        if actions >= policy.cap:
            truncated = True
            break
        new_events, rows = driver.apply(action)
        events.extend(new_events)
        wave.extend(rows)
        policy.observe(action, new_events)
        actions += 1
    return Trace(tuple(events), tuple(wave), truncated)
