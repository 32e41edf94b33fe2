"""Named stage verifiers.

Verifiers are deterministic, rule-based checks over the artifacts a stage
produced. Scripted scenarios steer them through artifact content (a review
comment starting with "revise" requests another round; a test report
mentioning "fail" fails the gate).
"""

from __future__ import annotations

from typing import Callable

from .contracts import Artifact
from .errors import ConfigError
from .lifecycle import Verifier

PASS = "pass"
FAIL = "fail"

# names the engine resolves itself for decentralized voting stages
PANEL_VERIFIER = "majority_matches_truth"


def _first_content(artifacts: list[Artifact], kind: str) -> str | None:
    for artifact in artifacts:
        if artifact.kind == kind:
            return artifact.fields.get("content", "")
    return None


def _always_pass(artifacts: list[Artifact]) -> str:
    return PASS


def _always_fail(artifacts: list[Artifact]) -> str:
    return FAIL


def _plan_ready(artifacts: list[Artifact]) -> str:
    explanation = _first_content(artifacts, "task_explanation")
    plan = _first_content(artifacts, "implementation_plan")
    ok = bool(explanation and explanation.strip()) and bool(plan and plan.strip())
    return PASS if ok else FAIL


def _nonempty_code(artifacts: list[Artifact]) -> str:
    code = _first_content(artifacts, "code")
    return PASS if code is not None and code.strip() else FAIL


def _review_passes(artifacts: list[Artifact]) -> str:
    log = _first_content(artifacts, "review_log")
    comment = _first_content(artifacts, "reviewer_comment")
    test_report = _first_content(artifacts, "test_report")
    if not (log and log.strip()) or comment is None or test_report is None:
        return FAIL
    if comment.strip().lower().startswith("revise"):
        return FAIL
    if "fail" in test_report.lower():
        return FAIL
    return PASS


VERIFIER_FUNCTIONS: dict[str, Callable[[list[Artifact]], str]] = {
    "always_pass": _always_pass,
    "always_fail": _always_fail,
    "plan_ready": _plan_ready,
    "nonempty_code": _nonempty_code,
    "review_passes": _review_passes,
}


def known_verifier(name: str) -> bool:
    return name in VERIFIER_FUNCTIONS or name == PANEL_VERIFIER


def make_verifier(name: str, state: str) -> Verifier:
    try:
        return Verifier(name=name, attached_state=state, evaluate=VERIFIER_FUNCTIONS[name])
    except KeyError:
        raise ConfigError(f"unknown verifier {name!r}") from None
