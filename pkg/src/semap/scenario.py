"""Scenario files: scripted agents, fault plans, seed artifacts, and the
optional ground-truth label for verdict workflows.

Scenarios are deliberately separate from workflow definitions so one
workflow can run many scenarios. Script artifacts are NOT schema-checked
at load time: agents are untrusted and scenarios are allowed to script
protocol-violating behavior on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .agents import FaultInjection, FaultKind, ScriptedAgent
from .contracts import Artifact, artifact_from_json, artifact_to_json
from .config import ErrorCollector, check_version, load_json_document
from .orchestration import WorkflowDefinition
from .verifiers import known_verifier
from .voting import LABELS


@dataclass
class Scenario:
    agents: dict[str, ScriptedAgent]
    initial_artifacts: list[Artifact] = field(default_factory=list)
    ground_truth: str | None = None
    verifier_overrides: dict[str, str] = field(default_factory=dict)


def load_scenario(path: str | Path, defn: WorkflowDefinition) -> Scenario:
    """Parse a scenario file and bind its scripts to the workflow's cards."""
    doc = load_json_document(path)
    errors = ErrorCollector()
    check_version(doc, errors)

    initial = []
    for i, artifact_doc in enumerate(doc.get("initial_artifacts", [])):
        try:
            initial.append(artifact_from_json(artifact_doc))
        except (KeyError, TypeError) as exc:
            errors.schema(f"initial_artifacts[{i}]", f"malformed artifact: {exc}")

    ground_truth = doc.get("ground_truth")
    if ground_truth is not None and ground_truth not in LABELS:
        errors.schema("ground_truth", f"must be one of {LABELS} or null, got {ground_truth!r}")

    overrides = doc.get("verifier_overrides", {})
    if not isinstance(overrides, dict):
        errors.schema("verifier_overrides", "not an object")
        overrides = {}
    nonterminal = defn.lifecycle.states - defn.lifecycle.terminals
    for state, name in overrides.items():
        if state not in nonterminal:
            errors.crossref(f"verifier_overrides.{state}", f"unknown non-terminal state {state!r}")
        if not known_verifier(name):
            errors.crossref(f"verifier_overrides.{state}", f"unknown verifier {name!r}")

    agents_doc = doc.get("agents")
    if not isinstance(agents_doc, dict):
        errors.schema("agents", "missing or not an object")
        agents_doc = {}

    agents: dict[str, ScriptedAgent] = {}
    for agent_id, agent_doc in agents_doc.items():
        path_prefix = f"agents.{agent_id}"
        card = defn.cards.get(agent_id)
        if card is None:
            errors.crossref(path_prefix, f"no card for agent {agent_id!r}")
            continue
        script_doc = agent_doc.get("script") if isinstance(agent_doc, dict) else None
        if not isinstance(script_doc, list) or not script_doc:
            errors.schema(f"{path_prefix}.script", "script must be a nonempty list of rounds")
            continue
        script = []
        for round_index, step_doc in enumerate(script_doc):
            try:
                script.append(tuple(artifact_from_json(a) for a in step_doc))
            except (KeyError, TypeError) as exc:
                errors.schema(f"{path_prefix}.script[{round_index}]", f"malformed step: {exc}")
        plan = []
        for i, fault_doc in enumerate(agent_doc.get("fault_plan", [])):
            fault_path = f"{path_prefix}.fault_plan[{i}]"
            try:
                round_no = int(fault_doc["round"])
                fault = FaultKind(fault_doc["fault"])
            except (KeyError, TypeError, ValueError) as exc:
                errors.schema(fault_path, f"malformed fault: {exc}")
                continue
            if not 1 <= round_no <= defn.max_rounds:
                errors.schema(fault_path, f"fault round {round_no} outside 1..{defn.max_rounds}")
                continue
            plan.append(FaultInjection(round=round_no, fault=fault))
        if not any(e.json_path.startswith(path_prefix) for e in errors.errors):
            agents[agent_id] = ScriptedAgent(
                card=card, script=tuple(script), fault_plan=tuple(plan)
            )

    for agent_id in sorted(defn.cards):
        if agent_id not in agents_doc:
            errors.crossref(f"agents.{agent_id}", "card has no scripted agent")

    errors.raise_if_any()
    return Scenario(
        agents=agents,
        initial_artifacts=initial,
        ground_truth=ground_truth,
        verifier_overrides=dict(overrides),
    )


def emit_scenario(scenario: Scenario, version: str = "1.0.0") -> dict:
    return {
        "version": version,
        "initial_artifacts": [artifact_to_json(a) for a in scenario.initial_artifacts],
        "ground_truth": scenario.ground_truth,
        "verifier_overrides": dict(sorted(scenario.verifier_overrides.items())),
        "agents": {
            agent_id: {
                "script": [
                    [artifact_to_json(a) for a in step] for step in agent.script
                ],
                "fault_plan": [
                    {"round": inj.round, "fault": inj.fault.value} for inj in agent.fault_plan
                ],
            }
            for agent_id, agent in sorted(scenario.agents.items())
        },
    }
