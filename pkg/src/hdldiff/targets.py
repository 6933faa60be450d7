"""Debugger targets: anything that can host a debug session.

A target opens sessions; a session accepts one action at a time and
returns the trace events it produced plus any per-edge waveform rows the
simulation crossed. The in-process reference (optionally fault-injected)
and the out-of-process adapter client both implement this contract.
"""

from __future__ import annotations

from dataclasses import dataclass

from .debugger import DebugAction, Session, SessionView, TraceEvent, WaveRow
from .faults import NO_FAULT, FaultConfig, fault_by_id
from .sim import SimConfig
from .source import SourceUnit


class ReferenceSession:
    def __init__(self, unit: SourceUnit, cfg: SimConfig, fault: FaultConfig):
        self._session = Session(unit, cfg, fault)

    def view(self) -> SessionView:
        return self._session.view()

    def apply(self, action: DebugAction) -> tuple[list[TraceEvent], list[WaveRow]]:
        events = self._session.apply(action)
        return events, self._session.drain_wave_rows()

    def close(self):
        pass


@dataclass(frozen=True)
class ReferenceTarget:
    fault: FaultConfig = NO_FAULT

    @property
    def name(self) -> str:
        return "reference" if self.fault == NO_FAULT else f"fault:{self.fault.name}"

    def open(self, unit: SourceUnit, cfg: SimConfig) -> ReferenceSession:
        return ReferenceSession(unit, cfg, self.fault)


def parse_target_spec(spec: str):
    """reference | fault:<id> | adapter:<command line>"""
    if spec == "reference":
        return ReferenceTarget()
    if spec.startswith("fault:"):
        return ReferenceTarget(fault_by_id(spec.split(":", 1)[1]))
    if spec.startswith("adapter:"):
        from .adapter import AdapterTarget
        return AdapterTarget(spec.split(":", 1)[1])
    raise ValueError(f"unknown target spec {spec!r}")
