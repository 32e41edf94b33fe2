"""Coordination middleware for multi-agent workflows: behavioral contracts,
schema-checked typed messaging over JSON-RPC 2.0, and a verifier-gated
lifecycle state machine, plus a scripted simulation harness with fault
injection and a rule-based failure classifier."""

from .agents import AgentInvocation, FaultInjection, FaultKind, ScriptedAgent
from .analysis import (
    FailureCategory,
    FailureRecord,
    FailureReport,
    classify,
    compare_reports,
    emit_csv,
    parse_csv,
    report,
)
from .contracts import (
    AgentCard,
    Artifact,
    ArtifactKind,
    BehavioralContract,
    CheckResult,
    ContractInput,
    ContractRegistry,
    FieldSpec,
)
from .config import default_artifact_kinds, emit_workflow, load_workflow, shipped_config_path
from .lifecycle import (
    LifecycleInstance,
    LifecycleSpec,
    Verifier,
    reachable_states,
    run_verifier,
    validate_spec,
)
from .messaging import TypedMessage, Violation, decode, encode, validate_message
from .orchestration import (
    Centralized,
    Decentralized,
    Enforcement,
    RunResult,
    StageBinding,
    Transport,
    WorkflowDefinition,
    route_centralized,
    run_workflow,
)
from .scenario import Scenario, load_scenario
from .trace import Event, EventType, ExecutionTrace
from .transport import fetch_card, remote_invoke, serve_agent
from .voting import Verdict, aggregate_votes

__version__ = "0.1.0"

__all__ = [
    "AgentCard",
    "AgentInvocation",
    "Artifact",
    "ArtifactKind",
    "BehavioralContract",
    "Centralized",
    "CheckResult",
    "ContractInput",
    "ContractRegistry",
    "Decentralized",
    "Enforcement",
    "Event",
    "EventType",
    "ExecutionTrace",
    "FailureCategory",
    "FailureRecord",
    "FailureReport",
    "FaultInjection",
    "FaultKind",
    "FieldSpec",
    "LifecycleInstance",
    "LifecycleSpec",
    "RunResult",
    "Scenario",
    "ScriptedAgent",
    "StageBinding",
    "Transport",
    "TypedMessage",
    "Verdict",
    "Verifier",
    "Violation",
    "WorkflowDefinition",
    "aggregate_votes",
    "classify",
    "compare_reports",
    "decode",
    "default_artifact_kinds",
    "emit_csv",
    "emit_workflow",
    "encode",
    "fetch_card",
    "load_scenario",
    "load_workflow",
    "parse_csv",
    "reachable_states",
    "remote_invoke",
    "report",
    "route_centralized",
    "run_verifier",
    "run_workflow",
    "serve_agent",
    "shipped_config_path",
    "validate_message",
    "validate_spec",
]
