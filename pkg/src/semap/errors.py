"""Exception hierarchy.

Every exception carries a stable machine-readable ``code`` so traces and CLI
output can name failures without parsing prose.
"""

from __future__ import annotations


class SemapError(Exception):
    """Base class for all package errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# contract registry faults

class ContractError(SemapError):
    code = "ContractError"


class MalformedKindError(ContractError):
    code = "MalformedKind"


class DuplicateKindError(ContractError):
    code = "DuplicateKind"


class UnknownKindError(ContractError):
    code = "UnknownKind"


class DuplicateRoleError(ContractError):
    code = "DuplicateRole"


class EmptyOutputsError(ContractError):
    code = "EmptyOutputs"


class InvalidArtifactError(ContractError):
    code = "InvalidArtifact"


class MalformedCardError(ContractError):
    code = "MalformedCard"


# wire faults

class MessageError(SemapError):
    code = "MessageError"


class InvalidMessageError(MessageError):
    code = "InvalidMessage"


class MalformedJsonError(MessageError):
    """Unparseable bytes or a structurally ill-typed document."""

    code = "MalformedJson"


class ProtocolMismatchError(MessageError):
    """jsonrpc or method literal differs from the protocol constants."""

    code = "ProtocolMismatch"


class MissingFieldError(MessageError):
    code = "MissingField"


# lifecycle faults

class LifecycleError(SemapError):
    code = "LifecycleError"


class UndefinedTransitionError(LifecycleError):
    code = "UndefinedTransition"


class AlreadyTerminalError(LifecycleError):
    code = "AlreadyTerminal"


class VerifierStateMismatchError(LifecycleError):
    code = "VerifierStateMismatch"


# agent faults

class AgentError(SemapError):
    code = "AgentError"


class ScriptExhaustedError(AgentError):
    code = "ScriptExhausted"


class BindFailureError(AgentError):
    code = "BindFailure"


class TransportError(AgentError):
    code = "TransportError"


class TransportTimeoutError(TransportError):
    code = "TransportTimeout"


class RemoteError(AgentError):
    """JSON-RPC error object returned by the remote agent."""

    code = "RemoteError"

    def __init__(self, rpc_code: int, message: str = ""):
        super().__init__(f"remote error {rpc_code}: {message}")
        self.rpc_code = rpc_code


# orchestration / voting faults

class ConfigError(SemapError):
    code = "ConfigError"


class DuplicateVoterError(SemapError):
    code = "DuplicateVoter"


class EvenPanelError(SemapError):
    code = "EvenPanel"


# trace analysis faults

class MalformedTraceError(SemapError):
    code = "MalformedTrace"


# workflow/scenario file faults; each names the JSON path of the offender

class WorkflowFileError(SemapError):
    code = "WorkflowFileError"

    def __init__(self, json_path: str, message: str):
        super().__init__(f"{json_path}: {message}")
        self.json_path = json_path


class ParseError(WorkflowFileError):
    code = "ParseError"


class SchemaError(WorkflowFileError):
    code = "SchemaError"


class CrossRefError(WorkflowFileError):
    code = "CrossRefError"


class WorkflowValidationError(SemapError):
    """Aggregate of every defect found in one workflow or scenario file."""

    code = "WorkflowValidation"

    def __init__(self, errors: list[WorkflowFileError]):
        super().__init__(f"{len(errors)} error(s)")
        self.errors = errors
