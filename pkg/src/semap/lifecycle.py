"""Finite-state task lifecycle with verifier-gated, round-bounded stepping.

A spec is the immutable machine (states, outcomes, transition table,
initial state, terminals). An instance is one task's position in it. A
round increments on any retry (self-loop) or revert (transition back to an
earlier-visited state); when a retry or revert would push past the round
budget the instance is forced into the failure terminal with the synthetic
outcome ``rounds_exhausted``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .contracts import Artifact
from .errors import (
    AlreadyTerminalError,
    UndefinedTransitionError,
    VerifierStateMismatchError,
)

ROUNDS_EXHAUSTED = "rounds_exhausted"

# validate_spec error codes
INITIAL_NOT_IN_STATES = "InitialNotInStates"
TERMINAL_NOT_IN_STATES = "TerminalNotInStates"
UNKNOWN_TRANSITION_STATE = "UnknownTransitionState"
UNKNOWN_OUTCOME = "UnknownOutcome"
TRANSITION_FROM_TERMINAL = "TransitionFromTerminal"
DEAD_END_STATE = "DeadEndState"
UNREACHABLE_TERMINAL = "UnreachableTerminal"
NO_TERMINALS = "NoTerminals"


@dataclass(frozen=True)
class LifecycleSpec:
    states: frozenset[str]
    outcomes: frozenset[str]
    transitions: dict[tuple[str, str], str]
    initial: str
    terminals: frozenset[str]


@dataclass(frozen=True)
class SpecError:
    code: str
    detail: str


def validate_spec(spec: LifecycleSpec) -> list[SpecError]:
    """Enumerate every violated spec invariant; empty list means valid."""
    errors: list[SpecError] = []
    if spec.initial not in spec.states:
        errors.append(SpecError(INITIAL_NOT_IN_STATES, f"initial {spec.initial!r}"))
    for terminal in sorted(spec.terminals):
        if terminal not in spec.states:
            errors.append(SpecError(TERMINAL_NOT_IN_STATES, f"terminal {terminal!r}"))
    if not spec.terminals:
        errors.append(SpecError(NO_TERMINALS, "spec declares no terminal states"))

    outgoing: dict[str, int] = {}
    for (source, outcome), target in sorted(spec.transitions.items()):
        where = f"({source!r}, {outcome!r}) -> {target!r}"
        if source not in spec.states or target not in spec.states:
            errors.append(SpecError(UNKNOWN_TRANSITION_STATE, where))
        if outcome not in spec.outcomes:
            errors.append(SpecError(UNKNOWN_OUTCOME, where))
        if source in spec.terminals:
            errors.append(SpecError(TRANSITION_FROM_TERMINAL, where))
        outgoing[source] = outgoing.get(source, 0) + 1

    for state in sorted(spec.states - spec.terminals):
        if not outgoing.get(state):
            errors.append(SpecError(DEAD_END_STATE, f"state {state!r} has no outgoing transition"))

    if spec.initial in spec.states and spec.terminals:
        reached = reachable_states(spec)
        if not (reached & spec.terminals):
            errors.append(
                SpecError(UNREACHABLE_TERMINAL, "no terminal reachable from initial")
            )
    return errors


def reachable_states(spec: LifecycleSpec) -> set[str]:
    """Breadth-first closure of the transition graph from the initial state."""
    seen = {spec.initial}
    queue = deque([spec.initial])
    while queue:
        state = queue.popleft()
        for (source, _outcome), target in spec.transitions.items():
            if source == state and target not in seen:
                seen.add(target)
                queue.append(target)
    return seen


def exhaustion_terminal(spec: LifecycleSpec) -> str:
    """The terminal a round-exhausted instance is forced into."""
    if "failed" in spec.terminals:
        return "failed"
    if len(spec.terminals) == 1:
        return next(iter(spec.terminals))
    candidates = sorted(spec.terminals - {"completed"})
    return candidates[0] if candidates else sorted(spec.terminals)[0]


@dataclass
class StepResult:
    source: str
    outcome: str
    target: str
    round_incremented: bool = False
    forced_exhaustion: bool = False


@dataclass
class LifecycleInstance:
    """One running task's position in a lifecycle. Single-owner mutable."""

    spec: LifecycleSpec
    current: str
    round: int = 1
    max_rounds: int = 5
    history: list[tuple[str, str, str]] = field(default_factory=list)
    visited: set[str] = field(default_factory=set)

    @classmethod
    def start(cls, spec: LifecycleSpec, max_rounds: int = 5) -> "LifecycleInstance":
        return cls(spec=spec, current=spec.initial, max_rounds=max_rounds,
                   visited={spec.initial})

    def is_terminal(self) -> bool:
        return self.current in self.spec.terminals

    def step(self, outcome: str) -> StepResult:
        """Advance by one verification outcome, enforcing the round budget."""
        if self.is_terminal():
            raise AlreadyTerminalError(f"instance is terminal at {self.current!r}")
        key = (self.current, outcome)
        if key not in self.spec.transitions:
            raise UndefinedTransitionError(f"no transition for {key!r}")
        target = self.spec.transitions[key]

        is_retry = target == self.current
        is_revert = (not is_retry) and target in self.visited and target not in self.spec.terminals
        if is_retry or is_revert:
            if self.round + 1 > self.max_rounds:
                source = self.current
                terminal = exhaustion_terminal(self.spec)
                self.history.append((source, ROUNDS_EXHAUSTED, terminal))
                self.current = terminal
                self.visited.add(terminal)
                return StepResult(source, ROUNDS_EXHAUSTED, terminal,
                                  forced_exhaustion=True)
            self.round += 1

        source = self.current
        self.history.append((source, outcome, target))
        self.current = target
        self.visited.add(target)
        return StepResult(source, outcome, target, round_incremented=is_retry or is_revert)


@dataclass(frozen=True)
class Verifier:
    """A stage-attached check mapping produced artifacts to an outcome."""

    name: str
    attached_state: str
    evaluate: Callable[[list[Artifact]], str]


def run_verifier(
    instance: LifecycleInstance, verifier: Verifier, artifacts: Iterable[Artifact]
) -> str:
    if verifier.attached_state != instance.current:
        raise VerifierStateMismatchError(
            f"verifier {verifier.name!r} is attached to {verifier.attached_state!r}, "
            f"instance is at {instance.current!r}"
        )
    return verifier.evaluate(list(artifacts))


def replay(spec: LifecycleSpec, history: Iterable[tuple[str, str, str]]) -> str:
    """Fold a history back over the spec; returns the resulting state.

    Raises if any entry is inconsistent with the table (the synthetic
    exhaustion outcome is accepted as a jump to its recorded target).
    """
    current = spec.initial
    for source, outcome, target in history:
        if source != current:
            raise UndefinedTransitionError(
                f"history entry starts at {source!r}, expected {current!r}"
            )
        if outcome != ROUNDS_EXHAUSTED and spec.transitions.get((source, outcome)) != target:
            raise UndefinedTransitionError(f"history entry {(source, outcome, target)!r} not in table")
        current = target
    return current


# JSON form: states, outcomes, initial, terminals, transitions

def spec_to_json(spec: LifecycleSpec) -> dict:
    return {
        "states": sorted(spec.states),
        "outcomes": sorted(spec.outcomes),
        "initial": spec.initial,
        "terminals": sorted(spec.terminals),
        "transitions": [
            {"from": source, "on": outcome, "to": target}
            for (source, outcome), target in sorted(spec.transitions.items())
        ],
    }


def spec_from_json(doc: dict) -> LifecycleSpec:
    return LifecycleSpec(
        states=frozenset(doc["states"]),
        outcomes=frozenset(doc["outcomes"]),
        transitions={
            (t["from"], t["on"]): t["to"] for t in doc["transitions"]
        },
        initial=doc["initial"],
        terminals=frozenset(doc["terminals"]),
    )
