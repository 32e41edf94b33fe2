"""Typed inter-agent messages and their JSON-RPC 2.0 wire encoding.

The wire layout is bit-exact: top-level keys in the order jsonrpc, method,
id, params; params keys in the order sender, receiver, round, payload;
payload keeps list order; artifact fields sorted by name; no insignificant
whitespace. Decoding tolerates key order and whitespace but is strict on
the protocol literals and field types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .contracts import (
    CONTROL_KIND,
    AgentCard,
    Artifact,
    ContractRegistry,
    artifact_from_json,
    artifact_to_json,
)
from .errors import (
    InvalidMessageError,
    MalformedJsonError,
    MissingFieldError,
    ProtocolMismatchError,
)

JSONRPC_VERSION = "2.0"
RUN_METHOD = "run"

# validate_message violation codes
UNKNOWN_SENDER = "UnknownSender"
UNKNOWN_RECEIVER = "UnknownReceiver"
SCHEMA_VIOLATION = "SchemaViolation"
UNEXPECTED_KIND = "UnexpectedKind"
HUB_BYPASS = "HubBypass"


@dataclass(frozen=True)
class TypedMessage:
    """Sender/receiver-addressed envelope carrying a list of artifacts.

    An empty payload is a control message; otherwise every artifact must
    validate against its registered kind at the engine checkpoints.
    """

    sender: str
    receiver: str
    payload: tuple[Artifact, ...]
    message_id: int
    round: int = 1

    def check_well_formed(self) -> None:
        if not self.sender or not self.receiver:
            raise InvalidMessageError("sender and receiver must be nonempty")
        if self.sender == self.receiver:
            raise InvalidMessageError(f"sender equals receiver ({self.sender!r})")
        if self.message_id < 0:
            raise InvalidMessageError("message_id must be unsigned")
        if self.round < 1:
            raise InvalidMessageError("round starts at 1")


@dataclass(frozen=True)
class Violation:
    """One failed validation rule, with a machine-readable code."""

    code: str
    detail: str = ""


def encode(msg: TypedMessage) -> bytes:
    """Deterministic UTF-8 JSON-RPC encoding of a message."""
    msg.check_well_formed()
    envelope = {
        "jsonrpc": JSONRPC_VERSION,
        "method": RUN_METHOD,
        "id": msg.message_id,
        "params": {
            "sender": msg.sender,
            "receiver": msg.receiver,
            "round": msg.round,
            "payload": [artifact_to_json(a) for a in msg.payload],
        },
    }
    return json.dumps(envelope, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _expect(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise MissingFieldError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise MalformedJsonError(f"{where}: field {key!r} has wrong type")
    return value


def decode(data: bytes | str) -> TypedMessage:
    """Inverse of encode on encode's image; tolerant of key order and
    whitespace, strict on the jsonrpc/method literals and field types."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedJsonError(f"unparseable envelope: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedJsonError("envelope is not a JSON object")

    jsonrpc = _expect(doc, "jsonrpc", str, "envelope")
    method = _expect(doc, "method", str, "envelope")
    if jsonrpc != JSONRPC_VERSION:
        raise ProtocolMismatchError(f"jsonrpc {jsonrpc!r}, expected {JSONRPC_VERSION!r}")
    if method != RUN_METHOD:
        raise ProtocolMismatchError(f"method {method!r}, expected {RUN_METHOD!r}")

    message_id = _expect(doc, "id", int, "envelope")
    params = _expect(doc, "params", dict, "envelope")
    sender = _expect(params, "sender", str, "params")
    receiver = _expect(params, "receiver", str, "params")
    round_no = _expect(params, "round", int, "params")
    payload_doc = _expect(params, "payload", list, "params")

    payload = []
    for index, item in enumerate(payload_doc):
        if not isinstance(item, dict):
            raise MalformedJsonError(f"payload[{index}] is not an object")
        kind = _expect(item, "kind", str, f"payload[{index}]")
        fields = _expect(item, "fields", dict, f"payload[{index}]")
        for name, value in fields.items():
            if not isinstance(value, str):
                raise MalformedJsonError(
                    f"payload[{index}].fields[{name!r}] is not a string"
                )
        payload.append(artifact_from_json({"kind": kind, "fields": fields}))

    msg = TypedMessage(
        sender=sender,
        receiver=receiver,
        payload=tuple(payload),
        message_id=message_id,
        round=round_no,
    )
    msg.check_well_formed()
    return msg


def validate_message(
    registry: ContractRegistry,
    cards: dict[str, AgentCard],
    msg: TypedMessage,
) -> list[Violation]:
    """Check one message against the registry and the receiver's contract.

    Returns the empty list when the message is valid. Three rules:
    (a) sender and receiver resolve to registered agents,
    (b) every payload artifact passes its kind schema,
    (c) every payload kind is among the receiver's declared inputs, or is
        the control kind.
    """
    violations: list[Violation] = []

    if msg.sender not in cards:
        violations.append(Violation(UNKNOWN_SENDER, f"no card for sender {msg.sender!r}"))
    receiver_card = cards.get(msg.receiver)
    if receiver_card is None:
        violations.append(Violation(UNKNOWN_RECEIVER, f"no card for receiver {msg.receiver!r}"))

    for artifact in msg.payload:
        problems = registry.artifact_problems(artifact)
        if problems:
            violations.append(Violation(SCHEMA_VIOLATION, "; ".join(problems)))

    if receiver_card is not None:
        accepted = receiver_card.contract.input_kinds() | {CONTROL_KIND}
        for artifact in msg.payload:
            if artifact.kind not in accepted:
                violations.append(
                    Violation(
                        UNEXPECTED_KIND,
                        f"receiver {msg.receiver!r} does not accept kind {artifact.kind!r}",
                    )
                )
    return violations
