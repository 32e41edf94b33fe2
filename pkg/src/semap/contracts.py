"""Artifact kinds, behavioral contracts, agent cards, and pre/post checks.

A contract names a role, the artifact kinds it requires before acting, and
the kinds it promises to deliver. The registry holds kind schemas and
contracts and answers the two questions the engine asks at every hop: does
this agent have what it needs, and did it deliver what it promised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable
from urllib.parse import urlparse

from .errors import (
    DuplicateKindError,
    DuplicateRoleError,
    EmptyOutputsError,
    InvalidArtifactError,
    MalformedCardError,
    MalformedKindError,
    UnknownKindError,
)

IN_PROCESS = "in_process"
MODALITIES = ("text", "image", "file")
CONTROL_KIND = "control_signal"

_IDENT = re.compile(r"^[a-z][a-z0-9_]*$")


@dataclass(frozen=True)
class FieldSpec:
    field_name: str
    required: bool = True


@dataclass(frozen=True)
class ArtifactKind:
    """Schema for one artifact kind: its name and its field layout."""

    kind_name: str
    field_specs: tuple[FieldSpec, ...]

    def check_well_formed(self) -> None:
        if not self.kind_name or not _IDENT.match(self.kind_name):
            raise MalformedKindError(
                f"kind name {self.kind_name!r} is not a lowercase snake_case identifier"
            )
        names = [spec.field_name for spec in self.field_specs]
        for name in names:
            if not name or not _IDENT.match(name):
                raise MalformedKindError(
                    f"kind {self.kind_name!r}: bad field name {name!r}"
                )
        if len(names) != len(set(names)):
            raise MalformedKindError(f"kind {self.kind_name!r}: duplicate field names")

    def required_fields(self) -> list[str]:
        return [s.field_name for s in self.field_specs if s.required]

    def field_names(self) -> set[str]:
        return {s.field_name for s in self.field_specs}


@dataclass(frozen=True)
class Artifact:
    """One typed unit of work product: a kind name plus text field values."""

    kind: str
    fields: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ContractInput:
    kind_name: str
    optional: bool = False


@dataclass(frozen=True)
class BehavioralContract:
    """A role's required input kinds and promised output kinds."""

    name: str
    inputs: tuple[ContractInput, ...]
    outputs: tuple[str, ...]

    def check_well_formed(self) -> None:
        if not self.name or self.name.strip() != self.name:
            raise MalformedKindError(f"bad role name {self.name!r}")
        if not self.outputs:
            raise EmptyOutputsError(f"contract {self.name!r} promises no outputs")
        input_kinds = [i.kind_name for i in self.inputs]
        if len(input_kinds) != len(set(input_kinds)):
            raise MalformedKindError(f"contract {self.name!r}: repeated input kind")
        if len(self.outputs) != len(set(self.outputs)):
            raise MalformedKindError(f"contract {self.name!r}: repeated output kind")

    def required_input_kinds(self) -> set[str]:
        return {i.kind_name for i in self.inputs if not i.optional}

    def input_kinds(self) -> set[str]:
        return {i.kind_name for i in self.inputs}

    def referenced_kinds(self) -> set[str]:
        return self.input_kinds() | set(self.outputs)


@dataclass(frozen=True)
class AgentCard:
    """Machine-readable declaration of one agent: identity, endpoint,
    modalities, and the contract it honors."""

    contract: BehavioralContract
    agent_id: str
    endpoint: str = IN_PROCESS
    modalities: tuple[str, ...] = ("text",)
    auth: str | None = None

    def check_well_formed(self) -> None:
        if not self.agent_id or self.agent_id.strip() != self.agent_id:
            raise MalformedCardError(f"bad agent_id {self.agent_id!r}")
        if self.endpoint != IN_PROCESS:
            parsed = urlparse(self.endpoint)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise MalformedCardError(
                    f"agent {self.agent_id!r}: endpoint {self.endpoint!r} is not a valid URL"
                )
        for modality in self.modalities:
            if modality not in MODALITIES:
                raise MalformedCardError(
                    f"agent {self.agent_id!r}: unknown modality {modality!r}"
                )

    def to_json_dict(self) -> dict:
        # key order mirrors field declaration order; it is part of the
        # served card's byte-stable layout
        return {
            "contract": contract_to_json(self.contract),
            "agent_id": self.agent_id,
            "endpoint": self.endpoint,
            "modalities": sorted(self.modalities),
            "auth": self.auth,
        }


@dataclass
class CheckResult:
    """Outcome of a pre- or post-condition check.

    ``missing`` lists absent kinds sorted lexicographically; ``extra_kinds``
    lists over-delivered kinds (postconditions only), also sorted. Extras
    never make the check unsatisfied.
    """

    satisfied: bool
    missing: list[str] = field(default_factory=list)
    extra_kinds: list[str] = field(default_factory=list)


def missing_required_inputs(contract: BehavioralContract, kinds: Iterable[str]) -> list[str]:
    """Required input kinds of ``contract`` absent from ``kinds``, sorted."""
    return sorted(contract.required_input_kinds() - set(kinds))


def missing_outputs(contract: BehavioralContract, kinds: Iterable[str]) -> list[str]:
    """Promised output kinds of ``contract`` absent from ``kinds``, sorted."""
    return sorted(set(contract.outputs) - set(kinds))


def extra_outputs(contract: BehavioralContract, kinds: Iterable[str]) -> list[str]:
    """Kinds in ``kinds`` beyond the contract's outputs, sorted."""
    return sorted(set(kinds) - set(contract.outputs))


class ContractRegistry:
    """Kind schemas plus contracts, with referential closure enforced at
    registration time. Build it once, then share it read-only."""

    def __init__(self) -> None:
        self.kinds: dict[str, ArtifactKind] = {}
        self.contracts: dict[str, BehavioralContract] = {}
        self._frozen = False

    def freeze(self) -> "ContractRegistry":
        self._frozen = True
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContractRegistry):
            return NotImplemented
        return self.kinds == other.kinds and self.contracts == other.contracts

    def _writable(self) -> None:
        if self._frozen:
            raise DuplicateKindError("registry is frozen")

    def register_kind(self, kind: ArtifactKind) -> "ContractRegistry":
        self._writable()
        kind.check_well_formed()
        existing = self.kinds.get(kind.kind_name)
        if existing is not None:
            if existing == kind:
                return self  # idempotent re-registration
            raise DuplicateKindError(
                f"kind {kind.kind_name!r} already registered with different fields"
            )
        self.kinds[kind.kind_name] = kind
        return self

    def register_contract(self, contract: BehavioralContract) -> "ContractRegistry":
        self._writable()
        contract.check_well_formed()
        if contract.name in self.contracts:
            raise DuplicateRoleError(f"role {contract.name!r} already registered")
        for kind_name in sorted(contract.referenced_kinds()):
            if kind_name not in self.kinds:
                raise UnknownKindError(
                    f"contract {contract.name!r} references unregistered kind {kind_name!r}"
                )
        self.contracts[contract.name] = contract
        return self

    def is_closed(self) -> bool:
        return all(
            kind in self.kinds
            for contract in self.contracts.values()
            for kind in contract.referenced_kinds()
        )

    # artifact validation

    def artifact_problems(self, artifact: Artifact) -> list[str]:
        """Schema problems of one artifact; empty list means valid."""
        kind = self.kinds.get(artifact.kind)
        if kind is None:
            return [f"unknown kind {artifact.kind!r}"]
        problems = []
        for name in kind.required_fields():
            value = artifact.fields.get(name)
            if value is None or value == "":
                problems.append(f"{artifact.kind}: required field {name!r} missing or empty")
        known = kind.field_names()
        for name in sorted(artifact.fields):
            if name not in known:
                problems.append(f"{artifact.kind}: unexpected field {name!r}")
        return problems

    def artifact_is_valid(self, artifact: Artifact) -> bool:
        return not self.artifact_problems(artifact)

    def _require_valid(self, artifacts: Iterable[Artifact]) -> None:
        for artifact in artifacts:
            problems = self.artifact_problems(artifact)
            if problems:
                raise InvalidArtifactError("; ".join(problems))

    # contract checks

    def check_preconditions(
        self, contract: BehavioralContract, available: Iterable[Artifact]
    ) -> CheckResult:
        """Satisfied iff every non-optional input kind has an artifact.

        Raises InvalidArtifactError before the set check if any artifact
        fails its kind schema.
        """
        available = list(available)
        self._require_valid(available)
        missing = missing_required_inputs(contract, (a.kind for a in available))
        return CheckResult(satisfied=not missing, missing=missing)

    def check_postconditions(
        self, contract: BehavioralContract, produced: Iterable[Artifact]
    ) -> CheckResult:
        """Satisfied iff every promised output kind is present; extras are
        reported but permitted."""
        produced = list(produced)
        self._require_valid(produced)
        kinds = [a.kind for a in produced]
        missing = missing_outputs(contract, kinds)
        extra = extra_outputs(contract, kinds)
        return CheckResult(satisfied=not missing, missing=missing, extra_kinds=extra)


# JSON forms: {"kinds":[...],"contracts":[...]} with keys in field order

def kind_to_json(kind: ArtifactKind) -> dict:
    return {
        "kind_name": kind.kind_name,
        "field_specs": [
            {"field_name": s.field_name, "required": s.required} for s in kind.field_specs
        ],
    }


def kind_from_json(doc: dict) -> ArtifactKind:
    return ArtifactKind(
        kind_name=doc["kind_name"],
        field_specs=tuple(
            FieldSpec(field_name=s["field_name"], required=bool(s["required"]))
            for s in doc["field_specs"]
        ),
    )


def contract_to_json(contract: BehavioralContract) -> dict:
    return {
        "name": contract.name,
        "inputs": [
            {"kind_name": i.kind_name, "optional": i.optional} for i in contract.inputs
        ],
        "outputs": list(contract.outputs),
    }


def contract_from_json(doc: dict) -> BehavioralContract:
    return BehavioralContract(
        name=doc["name"],
        inputs=tuple(
            ContractInput(kind_name=i["kind_name"], optional=bool(i["optional"]))
            for i in doc["inputs"]
        ),
        outputs=tuple(doc["outputs"]),
    )


def registry_to_json(registry: ContractRegistry) -> dict:
    return {
        "kinds": [kind_to_json(k) for k in registry.kinds.values()],
        "contracts": [contract_to_json(c) for c in registry.contracts.values()],
    }


def registry_from_json(doc: dict) -> ContractRegistry:
    registry = ContractRegistry()
    for kind_doc in doc.get("kinds", []):
        registry.register_kind(kind_from_json(kind_doc))
    for contract_doc in doc.get("contracts", []):
        registry.register_contract(contract_from_json(contract_doc))
    return registry


def artifact_to_json(artifact: Artifact) -> dict:
    # artifact fields sorted lexicographically: part of the wire layout
    return {"kind": artifact.kind, "fields": {k: artifact.fields[k] for k in sorted(artifact.fields)}}


def artifact_from_json(doc: dict) -> Artifact:
    return Artifact(kind=doc["kind"], fields=dict(doc["fields"]))
