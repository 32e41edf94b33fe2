"""Deterministic scripted agents with per-round fault injection.

A scripted agent replays a fixed list of per-round outputs; its fault plan
corrupts specific rounds in a declared way. Output is a pure function of
(script, fault_plan, round) — inputs are accepted but ignored, which keeps
replays seed-stable. All contract checking is the engine's job: agents are
untrusted and happily emit whatever their script plus faults says.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, runtime_checkable

from .contracts import CONTROL_KIND, AgentCard, Artifact
from .errors import ScriptExhaustedError


class FaultKind(str, Enum):
    OMIT_OUTPUT = "omit_output"
    DROP_REQUIRED_FIELD = "drop_required_field"
    WRONG_KIND = "wrong_kind"
    WRONG_VERDICT = "wrong_verdict"
    EXTRA_KIND = "extra_kind"


# kind used by EXTRA_KIND injections; deliberately absent from every registry
UNSOLICITED_KIND = "unsolicited_note"

_VERDICT_FLIP = {"vulnerable": "safe", "safe": "vulnerable"}


@dataclass(frozen=True)
class FaultInjection:
    round: int
    fault: FaultKind


@dataclass(frozen=True)
class AgentInvocation:
    inputs: tuple[Artifact, ...]
    round: int
    instruction: str | None = None


@runtime_checkable
class Agent(Protocol):
    card: AgentCard

    def invoke(self, invocation: AgentInvocation) -> list[Artifact]: ...


def apply_fault(card: AgentCard, fault: FaultKind, artifacts: list[Artifact]) -> list[Artifact]:
    """Apply exactly one declared defect to a produced artifact list.

    Each fault is self-contained and deterministic:
    - omit_output drops every artifact of the contract's first output kind;
    - drop_required_field removes the first field (by name) of the first
      artifact that has any;
    - wrong_kind relabels the first artifact to the contract's first input
      kind outside its outputs (control kind if there is none);
    - wrong_verdict flips every verdict label to its opposite valid value;
    - extra_kind appends an artifact of a kind no registry defines.
    """
    if fault is FaultKind.OMIT_OUTPUT:
        victim = card.contract.outputs[0]
        return [a for a in artifacts if a.kind != victim]

    if fault is FaultKind.DROP_REQUIRED_FIELD:
        out = []
        dropped = False
        for artifact in artifacts:
            if not dropped and artifact.fields:
                fields = dict(artifact.fields)
                del fields[sorted(fields)[0]]
                out.append(Artifact(kind=artifact.kind, fields=fields))
                dropped = True
            else:
                out.append(artifact)
        return out

    if fault is FaultKind.WRONG_KIND:
        target = CONTROL_KIND
        for spec in card.contract.inputs:
            if spec.kind_name not in card.contract.outputs:
                target = spec.kind_name
                break
        if not artifacts:
            return artifacts
        first = artifacts[0]
        return [Artifact(kind=target, fields=dict(first.fields)), *artifacts[1:]]

    if fault is FaultKind.WRONG_VERDICT:
        out = []
        for artifact in artifacts:
            label = artifact.fields.get("label")
            if artifact.kind == "verdict" and label in _VERDICT_FLIP:
                fields = dict(artifact.fields)
                fields["label"] = _VERDICT_FLIP[label]
                out.append(Artifact(kind=artifact.kind, fields=fields))
            else:
                out.append(artifact)
        return out

    if fault is FaultKind.EXTRA_KIND:
        return [*artifacts, Artifact(kind=UNSOLICITED_KIND, fields={"content": "unsolicited"})]

    raise ValueError(f"unknown fault {fault!r}")


@dataclass
class ScriptedAgent:
    """Replays scripted per-round outputs with declared faults applied."""

    card: AgentCard
    script: tuple[tuple[Artifact, ...], ...]
    fault_plan: tuple[FaultInjection, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.script:
            raise ValueError(f"agent {self.card.agent_id!r}: script must be nonempty")
        for injection in self.fault_plan:
            if injection.round < 1:
                raise ValueError(f"agent {self.card.agent_id!r}: fault round must be >= 1")

    def invoke(self, invocation: AgentInvocation) -> list[Artifact]:
        if invocation.round > len(self.script):
            raise ScriptExhaustedError(
                f"agent {self.card.agent_id!r}: round {invocation.round} beyond "
                f"{len(self.script)}-step script"
            )
        artifacts = list(self.script[invocation.round - 1])
        for injection in self.fault_plan:
            if injection.round == invocation.round:
                artifacts = apply_fault(self.card, injection.fault, artifacts)
        return artifacts
