"""Execution traces: the ordered, machine-readable record of one run.

Events carry a strictly increasing sequence number and the collaboration
round they happened in. Serialization is JSON-lines with sorted data keys,
so identical runs produce byte-identical trace files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedTraceError


class EventType(str, Enum):
    MESSAGE_SENT = "MessageSent"
    MESSAGE_BLOCKED = "MessageBlocked"
    VALIDATION_VIOLATION = "ValidationViolation"
    PRECONDITION_MISS = "PreconditionMiss"
    POSTCONDITION_MISS = "PostconditionMiss"
    VERIFIER_OUTCOME = "VerifierOutcome"
    TRANSITION = "Transition"
    FORCED_EXHAUSTION = "ForcedExhaustion"
    WARNING = "Warning"


@dataclass(frozen=True)
class Event:
    seq: int
    round: int
    type: EventType
    data: dict

    def to_json_dict(self) -> dict:
        return {
            "seq": self.seq,
            "round": self.round,
            "type": self.type.value,
            "data": {k: self.data[k] for k in sorted(self.data)},
        }


@dataclass
class ExecutionTrace:
    workflow_id: str
    events: list[Event] = field(default_factory=list)
    _next_seq: int = 0

    def record(self, type: EventType, round: int, **data) -> Event:
        event = Event(seq=self._next_seq, round=round, type=type, data=data)
        self._next_seq += 1
        self.events.append(event)
        return event

    def check_well_formed(self) -> None:
        """Raise MalformedTraceError on any violated trace invariant."""
        last_seq = -1
        last_round = 0
        terminal_seqs = []
        for event in self.events:
            if event.seq <= last_seq:
                raise MalformedTraceError(f"seq {event.seq} not strictly increasing")
            if event.round < last_round:
                raise MalformedTraceError(f"round decreases at seq {event.seq}")
            last_seq = event.seq
            last_round = event.round
            if event.type is EventType.TRANSITION and event.data.get("terminal"):
                terminal_seqs.append(event.seq)
        if len(terminal_seqs) != 1:
            raise MalformedTraceError(
                f"expected exactly one terminal transition, found {len(terminal_seqs)}"
            )
        transitions = [e for e in self.events if e.type is EventType.TRANSITION]
        if transitions[-1].seq != terminal_seqs[0]:
            raise MalformedTraceError("terminal transition is not the final transition")

    def to_jsonl(self) -> bytes:
        lines = [json.dumps({"workflow_id": self.workflow_id}, separators=(",", ":"))]
        lines.extend(
            json.dumps(e.to_json_dict(), separators=(",", ":"), ensure_ascii=False)
            for e in self.events
        )
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def from_jsonl(cls, data: bytes | str) -> "ExecutionTrace":
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        lines = [line for line in data.split("\n") if line.strip()]
        if not lines:
            raise MalformedTraceError("empty trace document")
        try:
            header = json.loads(lines[0])
            trace = cls(workflow_id=header["workflow_id"])
            for line in lines[1:]:
                doc = json.loads(line)
                trace.events.append(
                    Event(
                        seq=int(doc["seq"]),
                        round=int(doc["round"]),
                        type=EventType(doc["type"]),
                        data=dict(doc["data"]),
                    )
                )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise MalformedTraceError(f"unparseable trace: {exc}") from exc
        trace._next_seq = (trace.events[-1].seq + 1) if trace.events else 0
        return trace
