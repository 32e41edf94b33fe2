"""Rule-based failure classification and per-round reporting.

Each classifiable trace event yields exactly one failure record; when an
event could evidence more than one category the first matching rule wins,
in the order under-specification, misalignment, verification. That keeps
category totals additive.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from .errors import MalformedTraceError
from .messaging import HUB_BYPASS, SCHEMA_VIOLATION, UNEXPECTED_KIND, UNKNOWN_RECEIVER
from .trace import EventType, ExecutionTrace


class FailureCategory(str, Enum):
    UNDER_SPECIFICATION = "under_specification"
    INTER_AGENT_MISALIGNMENT = "inter_agent_misalignment"
    TASK_VERIFICATION = "task_verification"


CATEGORIES = (
    FailureCategory.UNDER_SPECIFICATION,
    FailureCategory.INTER_AGENT_MISALIGNMENT,
    FailureCategory.TASK_VERIFICATION,
)

_MISALIGNMENT_CODES = {SCHEMA_VIOLATION, UNEXPECTED_KIND, HUB_BYPASS, UNKNOWN_RECEIVER}


@dataclass(frozen=True)
class FailureRecord:
    category: FailureCategory
    round: int
    evidence: int  # sequence number of the triggering event
    detail: str


def classify(trace: ExecutionTrace) -> list[FailureRecord]:
    """Apply the deterministic rule table to every event, in trace order.

    Rules:
    - precondition and postcondition misses are under-specification;
    - validation violations with a misalignment code are misalignment;
    - forced round exhaustion, a verdict contradicting the scenario's
      ground truth, and a transition into ``completed`` without a passing
      verifier outcome in that round are verification failures.
    """
    trace.check_well_formed()
    records: list[FailureRecord] = []
    passes_by_round: dict[int, int] = {}

    for event in trace.events:
        if event.type is EventType.VERIFIER_OUTCOME and event.data.get("outcome") == "pass":
            passes_by_round[event.round] = passes_by_round.get(event.round, 0) + 1

        if event.type is EventType.PRECONDITION_MISS:
            records.append(FailureRecord(
                FailureCategory.UNDER_SPECIFICATION, event.round, event.seq,
                f"agent {event.data.get('agent')} missing required inputs "
                f"{event.data.get('missing')}",
            ))
        elif event.type is EventType.POSTCONDITION_MISS:
            records.append(FailureRecord(
                FailureCategory.UNDER_SPECIFICATION, event.round, event.seq,
                f"agent {event.data.get('agent')} omitted promised outputs "
                f"{event.data.get('missing')}",
            ))
        elif event.type is EventType.VALIDATION_VIOLATION:
            codes = set(event.data.get("codes", []))
            if codes & _MISALIGNMENT_CODES:
                records.append(FailureRecord(
                    FailureCategory.INTER_AGENT_MISALIGNMENT, event.round, event.seq,
                    f"violations {sorted(codes)} in {event.data.get('context')}",
                ))
        elif event.type is EventType.FORCED_EXHAUSTION:
            records.append(FailureRecord(
                FailureCategory.TASK_VERIFICATION, event.round, event.seq,
                f"round budget exhausted at state {event.data.get('state')}",
            ))
        elif event.type is EventType.VERIFIER_OUTCOME:
            label = event.data.get("label")
            expected = event.data.get("expected")
            if label is not None and expected is not None and label != expected:
                records.append(FailureRecord(
                    FailureCategory.TASK_VERIFICATION, event.round, event.seq,
                    f"verdict {label!r} from {event.data.get('voter')} contradicts "
                    f"ground truth {expected!r}",
                ))
        elif event.type is EventType.TRANSITION:
            if event.data.get("to") == "completed" and not passes_by_round.get(event.round):
                records.append(FailureRecord(
                    FailureCategory.TASK_VERIFICATION, event.round, event.seq,
                    "entered completed without a passing verifier outcome this round",
                ))
    return records


@dataclass
class FailureReport:
    max_rounds: int
    per_category_totals: dict[FailureCategory, int] = field(default_factory=dict)
    per_round: dict[tuple[int, FailureCategory], int] = field(default_factory=dict)
    total: int = 0

    def count(self, round: int, category: FailureCategory) -> int:
        return self.per_round.get((round, category), 0)

    def category_total(self, category: FailureCategory) -> int:
        return self.per_category_totals.get(category, 0)


def report(records: list[FailureRecord], max_rounds: int) -> FailureReport:
    out = FailureReport(max_rounds=max_rounds)
    for record in records:
        if record.round > max_rounds:
            raise MalformedTraceError(
                f"record round {record.round} exceeds max_rounds {max_rounds}"
            )
        out.per_category_totals[record.category] = out.category_total(record.category) + 1
        key = (record.round, record.category)
        out.per_round[key] = out.per_round.get(key, 0) + 1
        out.total += 1
    return out


def emit_csv(rep: FailureReport) -> bytes:
    """One row per round 1..max_rounds, then a total row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["round", *(c.value for c in CATEGORIES)])
    for round_no in range(1, rep.max_rounds + 1):
        writer.writerow([round_no, *(rep.count(round_no, c) for c in CATEGORIES)])
    writer.writerow(["total", *(rep.category_total(c) for c in CATEGORIES)])
    return buffer.getvalue().encode("utf-8")


def parse_csv(data: bytes | str) -> FailureReport:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(data)))
    if not rows or rows[0] != ["round", *(c.value for c in CATEGORIES)]:
        raise MalformedTraceError("unrecognized failure CSV header")
    if not rows[1:] or rows[-1][0] != "total":
        raise MalformedTraceError("failure CSV lacks a total row")

    rep = FailureReport(max_rounds=len(rows) - 2)
    for row in rows[1:-1]:
        round_no = int(row[0])
        for category, cell in zip(CATEGORIES, row[1:]):
            count = int(cell)
            if count:
                rep.per_round[(round_no, category)] = count
    for category, cell in zip(CATEGORIES, rows[-1][1:]):
        count = int(cell)
        if count:
            rep.per_category_totals[category] = count
    rep.total = sum(rep.per_category_totals.values())
    expected = {c: 0 for c in CATEGORIES}
    for (_, category), count in rep.per_round.items():
        expected[category] += count
    if any(expected[c] != rep.category_total(c) for c in CATEGORIES):
        raise MalformedTraceError("failure CSV total row disagrees with round rows")
    return rep


def reduction_percent(permissive: int, strict: int) -> float:
    """100*(permissive - strict)/permissive, half-up to one decimal.

    0/0 is defined as 0.0; with no permissive-side failures there is
    nothing to reduce, so any permissive == 0 case reports 0.0.
    """
    if permissive == 0:
        return 0.0
    ratio = Decimal(100 * (permissive - strict)) / Decimal(permissive)
    return float(ratio.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def compare_reports(strict: FailureReport, permissive: FailureReport) -> dict[str, float]:
    """Per-category reduction percentages of strict relative to permissive."""
    if strict.max_rounds != permissive.max_rounds:
        raise ValueError("reports cover different round budgets")
    deltas = {
        category.value: reduction_percent(
            permissive.category_total(category), strict.category_total(category)
        )
        for category in CATEGORIES
    }
    deltas["total"] = reduction_percent(permissive.total, strict.total)
    return deltas
