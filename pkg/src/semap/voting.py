"""Verdict aggregation for decentralized panels: strict majority, odd panels
only, so ties are unrepresentable."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DuplicateVoterError, EvenPanelError

VULNERABLE = "vulnerable"
SAFE = "safe"
LABELS = (VULNERABLE, SAFE)


@dataclass(frozen=True)
class Verdict:
    voter: str
    label: str


def aggregate_votes(verdicts: list[Verdict]) -> str:
    """Strict-majority label of an odd panel with one verdict per voter."""
    voters = [v.voter for v in verdicts]
    if len(set(voters)) != len(voters):
        raise DuplicateVoterError(f"repeated voter among {voters}")
    if not verdicts or len(verdicts) % 2 == 0:
        raise EvenPanelError(f"panel of {len(verdicts)} cannot produce a strict majority")
    for verdict in verdicts:
        if verdict.label not in LABELS:
            raise ValueError(f"voter {verdict.voter!r} cast unknown label {verdict.label!r}")
    vulnerable = sum(1 for v in verdicts if v.label == VULNERABLE)
    return VULNERABLE if vulnerable * 2 > len(verdicts) else SAFE
