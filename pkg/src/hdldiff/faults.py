"""Switchable reference-debugger faults.

The harness ships known-buggy debugger variants so the differential
oracle has detectable targets. Each fault models a realistic debugger
bug shape; the campaign acceptance run must flag every one of them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FaultConfig:
    # F1: breakpoints requested on non-executable lines are refused
    # instead of sliding to the next executable line
    sliding_disabled: bool = False
    # F2: non-blocking assignments commit immediately and leak into the
    # pre-edge snapshot read by later-scheduled blocks
    nba_as_blocking: bool = False
    # F3: run-all overshoots breakpoints by one statement and reports
    # the overshot statement's line
    pause_overshoot: bool = False
    # F4: breakpoint requests made while code is folded are resolved in
    # pre-fold (view) coordinates instead of source coordinates
    fold_pre_fold_coords: bool = False
    # F5: a breakpoint inside a for-loop body does not fire on the first
    # iteration of each loop entry
    loop_skip_first: bool = False

    @property
    def name(self) -> str:
        for fid, cfg in FAULTS.items():
            if cfg == self:
                return fid
        return "custom"


FAULTS: dict[str, FaultConfig] = {
    "F1": FaultConfig(sliding_disabled=True),
    "F2": FaultConfig(nba_as_blocking=True),
    "F3": FaultConfig(pause_overshoot=True),
    "F4": FaultConfig(fold_pre_fold_coords=True),
    "F5": FaultConfig(loop_skip_first=True),
}

NO_FAULT = FaultConfig()


def fault_by_id(fault_id: str) -> FaultConfig:
    try:
        return FAULTS[fault_id.upper()]
    except KeyError:
        raise KeyError(f"unknown fault id {fault_id!r}; known: {', '.join(FAULTS)}")
