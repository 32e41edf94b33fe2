"""Workflow engine: binds agents to contracts, routes messages through a
topology, consults verifiers, and advances the lifecycle.

Enforcement happens at three checkpoints around every hop: the request
message to an agent (schema, routing, and the agent's preconditions), the
agent's produced outputs (postconditions), and the response message back.
In strict mode any failing checkpoint blocks delivery — one MessageBlocked
event, a ``fail`` outcome for the stage — so defects never propagate. In
permissive mode everything is delivered and the findings are merely logged
as classifiable events.

Postcondition findings are split by shape: a promised kind absent with
nothing in its place is an omission (PreconditionMiss/PostconditionMiss
family); a promised kind replaced by an unexpected one is a mislabeling,
logged as a validation violation with code UnexpectedKind; over-delivery
alone is a warning. This keeps each injected fault kind attributable to
exactly one failure category downstream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from .agents import Agent, AgentInvocation
from .contracts import (
    AgentCard,
    Artifact,
    ContractRegistry,
    IN_PROCESS,
    extra_outputs,
    missing_outputs,
    missing_required_inputs,
)
from .errors import ConfigError, DuplicateVoterError, EvenPanelError, ScriptExhaustedError
from .lifecycle import (
    LifecycleInstance,
    LifecycleSpec,
    run_verifier,
    validate_spec,
)
from .messaging import (
    HUB_BYPASS,
    TypedMessage,
    UNEXPECTED_KIND,
    Violation,
    validate_message,
)
from .trace import EventType, ExecutionTrace
from .transport import AgentServer, remote_invoke, serve_agent
from .verifiers import FAIL, PANEL_VERIFIER, PASS, make_verifier
from .voting import LABELS, Verdict, aggregate_votes

logger = logging.getLogger(__name__)

# codes carried by MessageBlocked events, naming the failed checkpoint
BLOCK_PRECONDITION = "PreconditionMiss"
BLOCK_POSTCONDITION = "PostconditionMiss"

VERDICT_KIND = "verdict"


class Enforcement(str, Enum):
    STRICT = "strict"
    PERMISSIVE = "permissive"


class Transport(str, Enum):
    IN_PROCESS = "in_process"
    HTTP_LOOPBACK = "http_loopback"


@dataclass(frozen=True)
class Centralized:
    hub: str


@dataclass(frozen=True)
class Decentralized:
    voters: tuple[str, ...]


Topology = Centralized | Decentralized


@dataclass(frozen=True)
class StageBinding:
    actor: str
    verifier: str
    suppliers: tuple[str, ...] = ()


@dataclass
class WorkflowDefinition:
    registry: ContractRegistry
    cards: dict[str, AgentCard]
    lifecycle: LifecycleSpec
    topology: Topology
    stage_bindings: dict[str, StageBinding]
    max_rounds: int = 5
    enforcement: Enforcement = Enforcement.STRICT

    def validate(self) -> list[str]:
        """Invariant violations detectable before any dispatch."""
        problems: list[str] = []
        if not self.registry.is_closed():
            problems.append("registry is not referentially closed")
        for error in validate_spec(self.lifecycle):
            problems.append(f"lifecycle: {error.code}: {error.detail}")
        if self.max_rounds < 1:
            problems.append("max_rounds must be >= 1")

        if isinstance(self.topology, Centralized):
            if self.topology.hub not in self.cards:
                problems.append(f"hub {self.topology.hub!r} has no card")
        else:
            for voter in self.topology.voters:
                if voter not in self.cards:
                    problems.append(f"voter {voter!r} has no card")
            if len(self.topology.voters) % 2 == 0 or not self.topology.voters:
                problems.append("decentralized voter panel must have odd length")

        nonterminal = self.lifecycle.states - self.lifecycle.terminals
        for state in sorted(nonterminal):
            if state not in self.stage_bindings:
                problems.append(f"non-terminal state {state!r} is unbound")
        for state, binding in sorted(self.stage_bindings.items()):
            if state not in nonterminal:
                problems.append(f"binding for {state!r} which is not a non-terminal state")
            for agent_id in (binding.actor, *binding.suppliers):
                if agent_id not in self.cards:
                    problems.append(f"stage {state!r} binds unknown agent {agent_id!r}")
            if isinstance(self.topology, Decentralized) and binding.actor not in self.topology.voters:
                problems.append(f"stage {state!r} actor {binding.actor!r} is not a voter")
        return problems


def route_centralized(hub: str, msg: TypedMessage) -> Violation | None:
    """A message is deliverable iff the hub is its sender or receiver."""
    if msg.sender == hub or msg.receiver == hub:
        return None
    return Violation(
        HUB_BYPASS,
        f"peer-to-peer message {msg.sender!r} -> {msg.receiver!r} bypasses hub {hub!r}",
    )


@dataclass
class RunResult:
    trace: ExecutionTrace
    final_state: str
    rounds_used: int
    verdict: str | None = None


@dataclass
class _StageStatus:
    blocked: bool = False
    artifacts: list[Artifact] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)


class _Engine:
    def __init__(
        self,
        defn: WorkflowDefinition,
        agents: dict[str, Agent],
        *,
        enforcement: Enforcement,
        transport: Transport,
        verifier_overrides: dict[str, str],
        ground_truth: str | None,
        workflow_id: str,
        initial_artifacts: list[Artifact],
    ):
        self.defn = defn
        self.agents = agents
        self.strict = enforcement is Enforcement.STRICT
        self.transport = transport
        self.overrides = verifier_overrides
        self.ground_truth = ground_truth
        self.trace = ExecutionTrace(workflow_id=workflow_id)
        self.board: dict[str, Artifact] = {a.kind: a for a in initial_artifacts}
        self.next_message_id = 0
        self.servers: dict[str, AgentServer] = {}

    # transport

    def start_servers(self) -> None:
        if self.transport is not Transport.HTTP_LOOPBACK:
            return
        for agent_id, agent in sorted(self.agents.items()):
            self.servers[agent_id] = serve_agent(agent)

    def stop_servers(self) -> None:
        for server in self.servers.values():
            server.stop()
        self.servers.clear()

    def dispatch(self, msg: TypedMessage) -> list[Artifact]:
        """Deliver a request message to its receiver and return the outputs."""
        server = self.servers.get(msg.receiver)
        if server is not None:
            return remote_invoke(server.address, msg)
        return self.agents[msg.receiver].invoke(
            AgentInvocation(inputs=msg.payload, round=msg.round)
        )

    # composition helpers

    def allocate_message_id(self) -> int:
        mid = self.next_message_id
        self.next_message_id += 1
        return mid

    def curate_inputs(self, card: AgentCard) -> list[Artifact]:
        """Blackboard artifacts matching the agent's declared input kinds.

        Only schema-valid artifacts are forwarded; ``previous_*`` kinds are
        aliased from their base kind so revision rounds carry prior work.
        """
        registry = self.defn.registry
        payload = []
        for spec in card.contract.inputs:
            artifact = self.board.get(spec.kind_name)
            if artifact is None and spec.kind_name.startswith("previous_"):
                source = self.board.get(spec.kind_name[len("previous_"):])
                if source is not None:
                    artifact = Artifact(kind=spec.kind_name, fields=dict(source.fields))
            if artifact is not None and registry.artifact_is_valid(artifact):
                payload.append(artifact)
        return payload

    def merge_to_board(self, produced: list[Artifact]) -> None:
        for artifact in produced:
            self.board[artifact.kind] = artifact

    # checkpoints

    def validate_request(self, msg: TypedMessage, contract) -> tuple[list[Violation], list[str]]:
        violations = validate_message(self.defn.registry, self.defn.cards, msg)
        if isinstance(self.defn.topology, Centralized):
            routed = route_centralized(self.defn.topology.hub, msg)
            if routed is not None:
                violations.append(routed)
        missing = missing_required_inputs(contract, (a.kind for a in msg.payload))
        return violations, missing

    def postcondition_findings(self, card: AgentCard, produced: list[Artifact]):
        kinds = [a.kind for a in produced]
        missing = missing_outputs(card.contract, kinds)
        extra = extra_outputs(card.contract, kinds)
        swap = bool(missing and extra)
        return missing, extra, swap

    # performer execution

    def run_performer(self, sender: str, agent_id: str, round_no: int, status: _StageStatus) -> None:
        """One request/invoke/response hop. Marks the stage blocked on the
        first strict-mode enforcement action."""
        card = self.defn.cards[agent_id]
        if agent_id == sender:
            self.run_performer_direct(agent_id, round_no, status)
            return

        request = TypedMessage(
            sender=sender,
            receiver=agent_id,
            payload=tuple(self.curate_inputs(card)),
            message_id=self.allocate_message_id(),
            round=round_no,
        )
        violations, missing = self.validate_request(request, card.contract)
        kinds = [a.kind for a in request.payload]
        if violations:
            self.trace.record(
                EventType.VALIDATION_VIOLATION, round_no,
                codes=sorted({v.code for v in violations}), context="message",
                message_id=request.message_id,
            )
        if missing:
            self.trace.record(
                EventType.PRECONDITION_MISS, round_no, agent=agent_id, missing=missing,
            )
        if self.strict and (violations or missing):
            codes = sorted({v.code for v in violations} | ({BLOCK_PRECONDITION} if missing else set()))
            self.trace.record(
                EventType.MESSAGE_BLOCKED, round_no,
                message_id=request.message_id, sender=request.sender,
                receiver=request.receiver, kinds=kinds, codes=codes, missing=missing,
            )
            status.blocked = True
            return
        self.trace.record(
            EventType.MESSAGE_SENT, round_no,
            message_id=request.message_id, sender=request.sender,
            receiver=request.receiver, kinds=kinds,
        )

        try:
            produced = self.dispatch(request)
        except ScriptExhaustedError:
            self.trace.record(
                EventType.WARNING, round_no, code="ScriptExhausted", agent=agent_id,
            )
            produced = []
        self.deliver_response(agent_id, sender, produced, round_no, status)

    def run_performer_direct(self, agent_id: str, round_no: int, status: _StageStatus) -> None:
        """Invoke the stage's own actor without a message hop (the hub, or a
        decentralized stage coordinator, acts in place)."""
        card = self.defn.cards[agent_id]
        inputs = self.curate_inputs(card)
        missing = missing_required_inputs(card.contract, (a.kind for a in inputs))
        if missing:
            self.trace.record(
                EventType.PRECONDITION_MISS, round_no, agent=agent_id, missing=missing,
            )
            if self.strict:
                self.trace.record(
                    EventType.WARNING, round_no,
                    code="InvocationBlocked", agent=agent_id, missing=missing,
                )
                status.blocked = True
                return
        try:
            produced = self.agents[agent_id].invoke(
                AgentInvocation(inputs=tuple(inputs), round=round_no)
            )
        except ScriptExhaustedError:
            self.trace.record(
                EventType.WARNING, round_no, code="ScriptExhausted", agent=agent_id,
            )
            produced = []

        missing_out, extra, swap = self.postcondition_findings(card, produced)
        self.log_postconditions(agent_id, missing_out, extra, swap, round_no)
        if self.strict and (missing_out or swap):
            self.trace.record(
                EventType.WARNING, round_no,
                code="OutputDiscarded", agent=agent_id,
                missing=missing_out, extra=extra,
            )
            status.blocked = True
            return
        self.accept_outputs(agent_id, produced, round_no, status)

    def deliver_response(
        self, agent_id: str, receiver: str, produced: list[Artifact],
        round_no: int, status: _StageStatus,
    ) -> None:
        card = self.defn.cards[agent_id]
        missing_out, extra, swap = self.postcondition_findings(card, produced)
        self.log_postconditions(agent_id, missing_out, extra, swap, round_no)

        response = TypedMessage(
            sender=agent_id,
            receiver=receiver,
            payload=tuple(produced),
            message_id=self.allocate_message_id(),
            round=round_no,
        )
        violations = validate_message(self.defn.registry, self.defn.cards, response)
        kinds = [a.kind for a in response.payload]
        if violations:
            self.trace.record(
                EventType.VALIDATION_VIOLATION, round_no,
                codes=sorted({v.code for v in violations}), context="message",
                message_id=response.message_id,
            )

        if self.strict and (missing_out or swap or violations):
            codes = set()
            if swap:
                codes.add(UNEXPECTED_KIND)
            elif missing_out:
                codes.add(BLOCK_POSTCONDITION)
            codes |= {v.code for v in violations}
            self.trace.record(
                EventType.MESSAGE_BLOCKED, round_no,
                message_id=response.message_id, sender=response.sender,
                receiver=response.receiver, kinds=kinds,
                codes=sorted(codes), missing=missing_out,
            )
            status.blocked = True
            return

        self.trace.record(
            EventType.MESSAGE_SENT, round_no,
            message_id=response.message_id, sender=response.sender,
            receiver=response.receiver, kinds=kinds,
        )
        self.accept_outputs(agent_id, produced, round_no, status)

    def log_postconditions(
        self, agent_id: str, missing_out: list[str], extra: list[str], swap: bool,
        round_no: int,
    ) -> None:
        if swap:
            self.trace.record(
                EventType.VALIDATION_VIOLATION, round_no,
                codes=[UNEXPECTED_KIND], context="postconditions",
                agent=agent_id, missing=missing_out, extra=extra,
            )
        elif missing_out:
            self.trace.record(
                EventType.POSTCONDITION_MISS, round_no, agent=agent_id, missing=missing_out,
            )
        elif extra:
            self.trace.record(
                EventType.WARNING, round_no, code="ExtraOutput", agent=agent_id, kinds=extra,
            )

    def accept_outputs(
        self, agent_id: str, produced: list[Artifact], round_no: int, status: _StageStatus
    ) -> None:
        self.merge_to_board(produced)
        status.artifacts.extend(produced)
        for artifact in produced:
            if artifact.kind != VERDICT_KIND:
                continue
            label = artifact.fields.get("label", "")
            if label not in LABELS:
                self.trace.record(
                    EventType.WARNING, round_no,
                    code="UnparseableVerdict", agent=agent_id, detail=label,
                )
                continue
            data = {"verifier": "panel_vote", "voter": agent_id, "label": label}
            if self.ground_truth is not None:
                data["expected"] = self.ground_truth
            self.trace.record(EventType.VERIFIER_OUTCOME, round_no, **data)
            status.verdicts.append(Verdict(voter=agent_id, label=label))

    # stages

    def run_stage(self, instance: LifecycleInstance) -> tuple[str, str | None]:
        state = instance.current
        binding = self.defn.stage_bindings[state]
        round_no = instance.round
        status = _StageStatus()

        if isinstance(self.defn.topology, Decentralized):
            performers = [binding.actor] + [
                v for v in self.defn.topology.voters if v != binding.actor
            ]
            sender = binding.actor
        else:
            performers = [binding.actor, *binding.suppliers]
            sender = self.defn.topology.hub

        for agent_id in performers:
            self.run_performer(sender, agent_id, round_no, status)
            if status.blocked:
                break

        verdict: str | None = None
        verifier_name = self.overrides.get(state, binding.verifier)
        if status.blocked:
            outcome = FAIL
        elif verifier_name == PANEL_VERIFIER:
            outcome, verdict = self.panel_outcome(status, round_no, state)
        else:
            verifier = make_verifier(verifier_name, state)
            outcome = run_verifier(instance, verifier, status.artifacts)
            self.trace.record(
                EventType.VERIFIER_OUTCOME, round_no,
                verifier=verifier_name, state=state, outcome=outcome,
            )
        return outcome, verdict

    def panel_outcome(self, status: _StageStatus, round_no: int, state: str) -> tuple[str, str | None]:
        try:
            label = aggregate_votes(status.verdicts)
        except (EvenPanelError, DuplicateVoterError) as exc:
            self.trace.record(
                EventType.WARNING, round_no, code=exc.code, detail=exc.message,
            )
            self.trace.record(
                EventType.VERIFIER_OUTCOME, round_no,
                verifier=PANEL_VERIFIER, state=state, outcome=FAIL,
            )
            return FAIL, None
        outcome = PASS if self.ground_truth in (None, label) else FAIL
        self.trace.record(
            EventType.VERIFIER_OUTCOME, round_no,
            verifier=PANEL_VERIFIER, state=state, outcome=outcome,
        )
        return outcome, label

    def run(self) -> RunResult:
        instance = LifecycleInstance.start(self.defn.lifecycle, self.defn.max_rounds)
        verdict: str | None = None
        self.start_servers()
        try:
            while not instance.is_terminal():
                round_no = instance.round
                outcome, stage_verdict = self.run_stage(instance)
                if stage_verdict is not None:
                    verdict = stage_verdict
                result = instance.step(outcome)
                if result.forced_exhaustion:
                    self.trace.record(
                        EventType.FORCED_EXHAUSTION, round_no,
                        state=result.source, terminal=result.target,
                    )
                self.trace.record(
                    EventType.TRANSITION, round_no,
                    **{"from": result.source},
                    outcome=result.outcome, to=result.target,
                    terminal=result.target in self.defn.lifecycle.terminals,
                )
                logger.info(
                    "round %d: %s --%s--> %s", round_no, result.source,
                    result.outcome, result.target,
                )
        finally:
            self.stop_servers()
        return RunResult(
            trace=self.trace,
            final_state=instance.current,
            rounds_used=instance.round,
            verdict=verdict,
        )


def run_workflow(
    defn: WorkflowDefinition,
    agents: dict[str, Agent],
    seed: int = 0,
    *,
    enforcement: Enforcement | None = None,
    transport: Transport = Transport.IN_PROCESS,
    verifier_overrides: dict[str, str] | None = None,
    ground_truth: str | None = None,
    initial_artifacts: list[Artifact] | None = None,
    workflow_id: str | None = None,
) -> RunResult:
    """Drive one workflow to a terminal state; deterministic given
    (definition, agents, seed)."""
    problems = defn.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    for agent_id in sorted(defn.cards):
        if agent_id not in agents:
            raise ConfigError(f"no agent supplied for card {agent_id!r}")
    engine = _Engine(
        defn,
        agents,
        enforcement=enforcement or defn.enforcement,
        transport=transport,
        verifier_overrides=dict(verifier_overrides or {}),
        ground_truth=ground_truth,
        workflow_id=workflow_id or f"run:seed{seed}",
        initial_artifacts=list(initial_artifacts or []),
    )
    return engine.run()
