import pytest

from hdldiff.debugger import (
    ActionRejected, AddBreakpoint, BreakpointSet, Finished, Fold, FsmState,
    Paused, RunAll, Session, Step, Unfold, WaveOutput, slide_breakpoint,
    start_session,
)
from hdldiff.faults import FAULTS
from hdldiff.parser import parse
from hdldiff.sim import ElaborationError, SimConfig
from hdldiff.values import Bits

import fixtures

CFG = SimConfig()


def wave_value(events, name):
    for evt in events:
        if isinstance(evt, WaveOutput):
            return dict(evt.signals)[name]
    raise AssertionError("no wave output in events")


def run_all_to_end(session):
    events = []
    while session.fsm is not FsmState.FINISHED:
        events.extend(session.apply(RunAll()))
    return events


def test_session_starts_paused_with_x_regs():
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT), CFG)
    assert session.fsm is FsmState.PAUSED_NOT_STARTED
    assert session.sim_time == 0
    vals = session.sim.stable_top_values()
    assert vals["reg4"] == "1'bx"
    assert vals["reg5"] == "1'bx"
    assert vals["reg6"] == "1'bx"


def test_ambiguous_top_module_rejected():
    text = ("module a(input wire clk);\n  reg x;\n  always @(posedge clk)\n"
            "    x <= 1'b0;\nendmodule\n"
            "module b(input wire clk);\n  reg y;\n  always @(posedge clk)\n"
            "    y <= 1'b1;\nendmodule\n")
    with pytest.raises(ElaborationError):
        start_session(parse(text), CFG)


def test_empty_module_finishes_immediately():
    session = start_session(parse("module m(input wire clk);\nendmodule\n"), CFG)
    events = session.apply(RunAll())
    assert isinstance(events[0], Finished)
    assert events[0].time == CFG.total_sim_time


def test_nonblocking_scheduler_law():
    # reg6 commits reg5's pre-edge value: x after edge 1, 1 afterwards
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT), CFG)
    run_all_to_end(session)
    wave = dict(session.sim.wave_log)
    assert wave[5]["reg5"] == "1'b1"
    assert wave[5]["reg6"] == "1'bx"
    assert wave[15]["reg6"] == "1'b1"
    assert all(vals["reg6"] == "1'b1" for t, vals in wave.items() if t >= 15)


def test_blocking_scheduler_law():
    # with the chain rewritten to blocking, reg6 sees the just-written reg5
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT_BLOCKING), CFG)
    run_all_to_end(session)
    wave = dict(session.sim.wave_log)
    assert wave[5]["reg5"] == "1'b1"
    assert wave[5]["reg6"] == "1'b1"


def test_cross_block_reader_sees_pre_edge_value():
    session = start_session(fixtures.unit(fixtures.CROSS_BLOCK_READ), CFG)
    run_all_to_end(session)
    wave = dict(session.sim.wave_log)
    assert wave[5]["xfer"] == "1'b1"
    assert wave[5]["sink"] == "1'bx"  # read the pre-edge xfer
    assert wave[15]["sink"] == "1'b1"


def test_breakpoint_pauses_before_statement():
    unit = fixtures.unit(fixtures.THREE_REG_SHIFT)
    session = start_session(unit, CFG)
    evt = session.apply(AddBreakpoint(7))  # reg5 assignment
    assert evt == [BreakpointSet(7, 7)]
    events = session.apply(RunAll())
    assert events[0] == Paused(7, "Breakpoint", 5)
    # paused before reg5 executes; snapshot shows pre-edge state
    assert wave_value(events, "reg5") == "1'bx"
    assert session.fsm is FsmState.PAUSED_AT_BREAKPOINT


def test_breakpoint_slides_from_comment_line():
    unit = fixtures.unit(fixtures.COMMENT_SLIDE)
    session = start_session(unit, CFG)
    events = session.apply(AddBreakpoint(3))  # comment line
    assert events == [BreakpointSet(3, 5)]


def test_breakpoint_past_last_executable_is_unset():
    unit = fixtures.unit(fixtures.COMMENT_SLIDE)
    assert slide_breakpoint(unit, 7) is None  # endmodule region
    session = start_session(unit, CFG)
    events = session.apply(AddBreakpoint(7))
    assert events == [BreakpointSet(7, None)]


def test_run_all_without_breakpoints_finishes():
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT), CFG)
    events = session.apply(RunAll())
    assert events[0] == Finished(400)
    with pytest.raises(ActionRejected):
        session.apply(RunAll())


def test_step_advances_one_statement():
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT), CFG)
    assert session.view().cursor_line == 6
    events = session.apply(Step())
    assert events[0] == Paused(7, "StepDone", 5)
    events = session.apply(Step())
    assert events[0] == Paused(8, "StepDone", 5)
    events = session.apply(Step())
    # wraps to the next edge's first statement
    assert events[0] == Paused(6, "StepDone", 15)


def test_step_skips_untaken_branch():
    unit = fixtures.unit(fixtures.BRANCH_PAIR)
    session = start_session(unit, CFG)
    # first edge: lit is x so the condition is x -> else branch
    events = session.apply(Step())  # executes lit assign, arrive at if
    assert events[0].line == 7
    events = session.apply(Step())  # executes if, descends into else branch
    assert events[0].line == 10
    # second edge: lit == 2 -> then branch at line 8
    events = session.apply(Step())
    assert events[0].line == 6
    events = session.apply(Step())
    assert events[0].line == 7
    events = session.apply(Step())
    assert events[0].line == 8


def test_loop_breakpoint_fires_once_per_iteration():
    unit = fixtures.unit(fixtures.EIGHT_LOOP)
    cfg = SimConfig(total_sim_time=10, reset_window=0)  # single rising edge
    session = start_session(unit, cfg)
    session.apply(AddBreakpoint(7))  # loop body
    pauses = 0
    while session.fsm is not FsmState.FINISHED:
        events = session.apply(RunAll())
        pauses += sum(1 for e in events if isinstance(e, Paused))
    assert pauses == 8


def test_unreachable_loop_body_never_pauses():
    unit = fixtures.unit(fixtures.UNREACHABLE_LOOP)
    session = start_session(unit, CFG)
    session.apply(AddBreakpoint(7))  # unreachable body
    events = run_all_to_end(session)
    assert not any(isinstance(e, Paused) for e in events)


def test_breakpoint_independence():
    unit = fixtures.unit(fixtures.THREE_REG_SHIFT)
    session = start_session(unit, CFG)
    session.apply(AddBreakpoint(6))
    before = session.view().breakpoints
    session.apply(AddBreakpoint(2))  # slides elsewhere
    after = session.view().breakpoints[: len(before)]
    assert before == after


def test_fold_translation_transparent():
    unit = fixtures.unit(fixtures.FOLD_TWO_BLOCKS)
    plain = start_session(unit, CFG)
    direct = plain.apply(AddBreakpoint(14))[0]

    folded = start_session(unit, CFG)
    folded.apply(Fold(5, 10))  # hide the first always body
    view_line = folded.source_to_view(14)
    assert view_line == 14 - 5  # fold hides lines 6..10
    via_fold = folded.apply(AddBreakpoint(view_line))[0]
    folded.apply(Unfold(5))
    assert via_fold.actual == direct.actual
    assert via_fold.requested == direct.requested


def test_fold_rejects_partial_overlap():
    session = start_session(fixtures.unit(fixtures.FOLD_TWO_BLOCKS), CFG)
    session.apply(Fold(5, 10))
    with pytest.raises(ActionRejected):
        session.apply(Fold(8, 12))
    with pytest.raises(ActionRejected):
        session.apply(Unfold(9))


def test_fault_f1_disables_sliding():
    unit = fixtures.unit(fixtures.COMMENT_SLIDE)
    session = start_session(unit, CFG, FAULTS["F1"])
    assert session.apply(AddBreakpoint(3)) == [BreakpointSet(3, None)]
    assert session.apply(AddBreakpoint(5)) == [BreakpointSet(5, 5)]


def test_fault_f2_leaks_nba_to_later_block():
    unit = fixtures.unit(fixtures.CROSS_BLOCK_READ)
    session = start_session(unit, CFG, FAULTS["F2"])
    run_all_to_end(session)
    wave = dict(session.sim.wave_log)
    assert wave[5]["sink"] == "1'b1"  # leaked this-edge value


def test_fault_f3_overshoots_pause_line():
    unit = fixtures.unit(fixtures.THREE_REG_SHIFT)
    session = start_session(unit, CFG, FAULTS["F3"])
    session.apply(AddBreakpoint(7))
    events = session.apply(RunAll())
    assert events[0] == Paused(8, "Breakpoint", 5)


def test_fault_f4_resolves_in_view_coordinates():
    unit = fixtures.unit(fixtures.FOLD_TWO_BLOCKS)
    session = start_session(unit, CFG, FAULTS["F4"])
    session.apply(Fold(5, 10))
    view_line = 14 - 5
    evt = session.apply(AddBreakpoint(view_line))[0]
    assert evt.requested == view_line  # untranslated echo
    assert evt.actual != 14


def test_fault_f5_skips_first_iteration():
    unit = fixtures.unit(fixtures.EIGHT_LOOP)
    cfg = SimConfig(total_sim_time=10, reset_window=0)
    session = start_session(unit, cfg, FAULTS["F5"])
    session.apply(AddBreakpoint(7))
    pauses = 0
    while session.fsm is not FsmState.FINISHED:
        events = session.apply(RunAll())
        pauses += sum(1 for e in events if isinstance(e, Paused))
    assert pauses == 7


def test_determinism_identical_traces():
    unit = fixtures.unit(fixtures.BRANCH_PAIR)

    def collect():
        session = start_session(unit, CFG)
        events = list(session.apply(AddBreakpoint(8)))
        events += session.apply(Step())
        while session.fsm is not FsmState.FINISHED:
            events.extend(session.apply(RunAll()))
        return events, session.sim.wave_log

    first = collect()
    second = collect()
    assert first == second


def test_fsm_no_double_pause_without_action():
    session = start_session(fixtures.unit(fixtures.THREE_REG_SHIFT), CFG)
    session.apply(AddBreakpoint(6))
    events = session.apply(RunAll())
    assert sum(1 for e in events if isinstance(e, Paused)) == 1


def test_reset_window_default_sim_config():
    cfg = SimConfig()
    assert cfg.clock_period == 10
    assert cfg.total_sim_time == 400
    assert cfg.reset_window == 100
    with pytest.raises(ValueError):
        SimConfig(total_sim_time=50, reset_window=100)
