"""Workflow definition files: parsing, full cross-reference validation, and
the shipped default definitions.

Every defect found in a file is collected and reported with the JSON path
of the offending element; loading either returns a fully validated
definition or raises with the complete defect list.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

from .contracts import (
    AgentCard,
    ArtifactKind,
    BehavioralContract,
    ContractInput,
    ContractRegistry,
    FieldSpec,
    IN_PROCESS,
    contract_from_json,
    contract_to_json,
    kind_from_json,
    kind_to_json,
)
from .errors import (
    CrossRefError,
    MalformedCardError,
    MalformedKindError,
    EmptyOutputsError,
    ParseError,
    SchemaError,
    WorkflowFileError,
    WorkflowValidationError,
)
from .lifecycle import LifecycleSpec, spec_from_json, spec_to_json, validate_spec
from .orchestration import (
    Centralized,
    Decentralized,
    Enforcement,
    StageBinding,
    WorkflowDefinition,
)
from .verifiers import known_verifier

_VERSION_PATTERN = re.compile(r"^1\.\d+\.\d+$")

DEV_DEFAULT = "dev_default.json"
VULN_DEFAULT = "vuln_default.json"


def default_artifact_kinds() -> list[ArtifactKind]:
    """The registry seed every shipped workflow builds on.

    Each kind carries one required ``content`` field, except ``verdict``
    whose single field is ``label`` (valid values: vulnerable, safe)."""
    content = (FieldSpec("content", required=True),)
    names = (
        "task_explanation",
        "implementation_plan",
        "code",
        "previous_code",
        "reviewing_outline",
        "review_log",
        "reviewer_comment",
        "test_report",
        "control_signal",
    )
    kinds = [ArtifactKind(kind_name=name, field_specs=content) for name in names]
    kinds.insert(8, ArtifactKind("verdict", (FieldSpec("label", required=True),)))
    return kinds


def shipped_config_path(name: str) -> Path:
    return Path(str(resources.files("semap").joinpath("configs", name)))


class ErrorCollector:
    def __init__(self) -> None:
        self.errors: list[WorkflowFileError] = []

    def schema(self, path: str, message: str) -> None:
        self.errors.append(SchemaError(path, message))

    def crossref(self, path: str, message: str) -> None:
        self.errors.append(CrossRefError(path, message))

    def raise_if_any(self) -> None:
        if self.errors:
            raise WorkflowValidationError(self.errors)


def load_json_document(path: str | Path) -> dict:
    try:
        with open(path, "rb") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise WorkflowValidationError([ParseError("$", f"cannot read {path}: {exc}")]) from exc
    except json.JSONDecodeError as exc:
        raise WorkflowValidationError([ParseError("$", f"invalid JSON: {exc}")]) from exc
    if not isinstance(doc, dict):
        raise WorkflowValidationError([ParseError("$", "top level is not an object")])
    return doc


def check_version(doc: dict, errors: ErrorCollector) -> None:
    version = doc.get("version")
    if not isinstance(version, str) or not _VERSION_PATTERN.match(version):
        errors.schema("version", f"unrecognized version {version!r}")


def load_workflow(path: str | Path) -> WorkflowDefinition:
    """Parse and fully validate a workflow file."""
    return parse_workflow(load_json_document(path))


def parse_workflow(doc: dict) -> WorkflowDefinition:
    errors = ErrorCollector()
    check_version(doc, errors)

    # registry: collect raw maps first so later sections can resolve
    # references without cascading a single defect into many
    kinds: dict[str, ArtifactKind] = {}
    contracts: dict[str, BehavioralContract] = {}
    registry_doc = doc.get("registry")
    if not isinstance(registry_doc, dict):
        errors.schema("registry", "missing or not an object")
        registry_doc = {}

    for i, kind_doc in enumerate(registry_doc.get("kinds", [])):
        path = f"registry.kinds[{i}]"
        try:
            kind = kind_from_json(kind_doc)
            kind.check_well_formed()
        except (KeyError, TypeError, AttributeError, MalformedKindError) as exc:
            errors.schema(path, f"malformed kind: {exc}")
            continue
        if kind.kind_name in kinds and kinds[kind.kind_name] != kind:
            errors.schema(path, f"kind {kind.kind_name!r} redefined with different fields")
            continue
        kinds[kind.kind_name] = kind

    for i, contract_doc in enumerate(registry_doc.get("contracts", [])):
        path = f"registry.contracts[{i}]"
        try:
            contract = contract_from_json(contract_doc)
            contract.check_well_formed()
        except (KeyError, TypeError, AttributeError, MalformedKindError,
                EmptyOutputsError) as exc:
            errors.schema(path, f"malformed contract: {exc}")
            continue
        if contract.name in contracts:
            errors.schema(path, f"role {contract.name!r} redefined")
            continue
        for j, spec in enumerate(contract.inputs):
            if spec.kind_name not in kinds:
                errors.crossref(f"{path}.inputs[{j}]", f"unknown kind {spec.kind_name!r}")
        for j, kind_name in enumerate(contract.outputs):
            if kind_name not in kinds:
                errors.crossref(f"{path}.outputs[{j}]", f"unknown kind {kind_name!r}")
        contracts[contract.name] = contract

    # cards
    cards: dict[str, AgentCard] = {}
    for i, card_doc in enumerate(doc.get("cards", [])):
        path = f"cards[{i}]"
        if not isinstance(card_doc, dict) or "agent_id" not in card_doc:
            errors.schema(path, "malformed card")
            continue
        agent_id = card_doc["agent_id"]
        role = card_doc.get("role")
        contract = contracts.get(role)
        if contract is None:
            errors.crossref(f"{path}.role", f"unknown role {role!r}")
            continue
        card = AgentCard(
            contract=contract,
            agent_id=agent_id,
            endpoint=card_doc.get("endpoint", IN_PROCESS),
            modalities=tuple(card_doc.get("modalities", ["text"])),
            auth=card_doc.get("auth"),
        )
        try:
            card.check_well_formed()
        except MalformedCardError as exc:
            errors.schema(path, exc.message)
            continue
        if agent_id in cards:
            errors.schema(f"{path}.agent_id", f"agent {agent_id!r} already declared")
            continue
        cards[agent_id] = card

    # lifecycle
    lifecycle: LifecycleSpec | None = None
    lifecycle_doc = doc.get("lifecycle")
    if not isinstance(lifecycle_doc, dict):
        errors.schema("lifecycle", "missing or not an object")
    else:
        try:
            seen_keys = set()
            for i, t in enumerate(lifecycle_doc.get("transitions", [])):
                key = (t["from"], t["on"])
                if key in seen_keys:
                    errors.schema(f"lifecycle.transitions[{i}]", f"duplicate transition {key!r}")
                seen_keys.add(key)
            lifecycle = spec_from_json(lifecycle_doc)
        except (KeyError, TypeError) as exc:
            errors.schema("lifecycle", f"malformed lifecycle: {exc}")
        if lifecycle is not None:
            for spec_error in validate_spec(lifecycle):
                errors.schema("lifecycle", f"{spec_error.code}: {spec_error.detail}")

    # topology
    topology = None
    topology_doc = doc.get("topology")
    if not isinstance(topology_doc, dict) or topology_doc.get("type") not in (
        "centralized", "decentralized",
    ):
        errors.schema("topology", "type must be centralized or decentralized")
    elif topology_doc["type"] == "centralized":
        hub = topology_doc.get("hub")
        if hub not in cards:
            errors.crossref("topology.hub", f"unknown agent {hub!r}")
        topology = Centralized(hub=hub)
    else:
        voters = topology_doc.get("voters", [])
        for i, voter in enumerate(voters):
            if voter not in cards:
                errors.crossref(f"topology.voters[{i}]", f"unknown agent {voter!r}")
        if not voters or len(voters) % 2 == 0:
            errors.schema("topology.voters", "voter panel must have odd length")
        topology = Decentralized(voters=tuple(voters))

    # stage bindings
    bindings: dict[str, StageBinding] = {}
    bindings_doc = doc.get("stage_bindings")
    if not isinstance(bindings_doc, dict):
        errors.schema("stage_bindings", "missing or not an object")
        bindings_doc = {}
    states = lifecycle.states if lifecycle else frozenset()
    terminals = lifecycle.terminals if lifecycle else frozenset()
    for state, binding_doc in bindings_doc.items():
        path = f"stage_bindings.{state}"
        if state not in states or state in terminals:
            errors.crossref(path, f"{state!r} is not a non-terminal lifecycle state")
        if not isinstance(binding_doc, dict) or "actor" not in binding_doc or "verifier" not in binding_doc:
            errors.schema(path, "binding needs actor and verifier")
            continue
        actor = binding_doc["actor"]
        verifier = binding_doc["verifier"]
        suppliers = tuple(binding_doc.get("suppliers", []))
        if actor not in cards:
            errors.crossref(f"{path}.actor", f"unknown agent {actor!r}")
        for i, supplier in enumerate(suppliers):
            if supplier not in cards:
                errors.crossref(f"{path}.suppliers[{i}]", f"unknown agent {supplier!r}")
        if not known_verifier(verifier):
            errors.crossref(f"{path}.verifier", f"unknown verifier {verifier!r}")
        if isinstance(topology, Decentralized) and actor not in topology.voters:
            errors.crossref(f"{path}.actor", f"{actor!r} is not on the voter panel")
        bindings[state] = StageBinding(actor=actor, verifier=verifier, suppliers=suppliers)
    for state in sorted(states - terminals):
        if state not in bindings_doc:
            errors.crossref(f"stage_bindings.{state}", "non-terminal state is unbound")

    # scalars
    max_rounds = doc.get("max_rounds")
    if not isinstance(max_rounds, int) or isinstance(max_rounds, bool) or max_rounds < 1:
        errors.schema("max_rounds", f"must be an integer >= 1, got {max_rounds!r}")
        max_rounds = 1
    enforcement_doc = doc.get("enforcement")
    try:
        enforcement = Enforcement(enforcement_doc)
    except ValueError:
        errors.schema("enforcement", f"must be strict or permissive, got {enforcement_doc!r}")
        enforcement = Enforcement.STRICT

    errors.raise_if_any()

    registry = ContractRegistry()
    for kind in kinds.values():
        registry.register_kind(kind)
    for contract in contracts.values():
        registry.register_contract(contract)
    registry.freeze()

    return WorkflowDefinition(
        registry=registry,
        cards=cards,
        lifecycle=lifecycle,
        topology=topology,
        stage_bindings=bindings,
        max_rounds=max_rounds,
        enforcement=enforcement,
    )


def emit_workflow(defn: WorkflowDefinition, version: str = "1.0.0") -> dict:
    """JSON form of a definition; load(emit(d)) reproduces d."""
    if isinstance(defn.topology, Centralized):
        topology = {"type": "centralized", "hub": defn.topology.hub}
    else:
        topology = {"type": "decentralized", "voters": list(defn.topology.voters)}
    return {
        "version": version,
        "registry": {
            "kinds": [kind_to_json(k) for k in defn.registry.kinds.values()],
            "contracts": [contract_to_json(c) for c in defn.registry.contracts.values()],
        },
        "cards": [
            {
                "agent_id": card.agent_id,
                "role": card.contract.name,
                "endpoint": card.endpoint,
                "modalities": sorted(card.modalities),
                "auth": card.auth,
            }
            for card in defn.cards.values()
        ],
        "lifecycle": spec_to_json(defn.lifecycle),
        "topology": topology,
        "stage_bindings": {
            state: {
                "actor": binding.actor,
                "verifier": binding.verifier,
                "suppliers": list(binding.suppliers),
            }
            for state, binding in sorted(defn.stage_bindings.items())
        },
        "max_rounds": defn.max_rounds,
        "enforcement": defn.enforcement.value,
    }
