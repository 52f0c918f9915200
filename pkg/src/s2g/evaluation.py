"""Measure how playable a built game actually is.

Three instruments: a walkthrough validator that plays the story in order
(teleporting past unmet location checks, nothing else), summary statistics
over a compilation report, and a batch driver that tries invented verbs
against every object and tallies what came back.  All of them work on
clones, so measuring a game never changes it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import dynamic
from .compiler import BoundLocation, CompilationReport
from .errors import EngineError, GenerationError
from .llm import LlmGateway, validate_verbs
from .prompts import PromptKind
from .runtime import GameState, check_preconditions, execute_action
from .world import NodeId, NodeKind

log = logging.getLogger(__name__)

VERBS_PER_OBJECT = 3


# --- walkthrough ---------------------------------------------------------------


@dataclass
class WalkthroughStep:
    action_id: str
    sentence: str
    status: str  # "executed" | "blocked"
    forced_moves: list[str] = field(default_factory=list)
    unmet: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "action_id": self.action_id,
            "sentence": self.sentence,
            "status": self.status,
            "forced_moves": list(self.forced_moves),
            "unmet": list(self.unmet),
        }


@dataclass
class WalkthroughResult:
    steps: list[WalkthroughStep] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(step.status == "executed" for step in self.steps)

    @property
    def executed(self) -> int:
        return sum(1 for step in self.steps if step.status == "executed")

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "executed": self.executed,
            "total": len(self.steps),
            "steps": [step.to_dict() for step in self.steps],
        }


def walkthrough_validate(state: GameState) -> WalkthroughResult:
    """Fire every story action in story order on a clone of the game.

    Location checks that fail are satisfied by moving the offending node to
    where it needs to be (that is what walking there would do); anything
    else that fails is a genuine break in the story's causal chain.
    """
    trial = state.clone()
    result = WalkthroughResult()
    for action in trial.registry.story_actions():
        step = WalkthroughStep(action_id=action.id, sentence=action.sentence, status="blocked")
        unmet = check_preconditions(action, trial)
        for check, _reason in unmet:
            if isinstance(check, BoundLocation) and check.node in trial.world.nodes:
                if trial.world.kind_of(check.node) is NodeKind.ROOM:
                    continue
                trial.world.move_node(check.node, check.room)
                step.forced_moves.append(
                    f"moved {trial.world.name_of(check.node)} to "
                    f"{trial.world.name_of(check.room)}"
                )
        unmet = check_preconditions(action, trial)
        if unmet:
            step.unmet = [reason for _check, reason in unmet]
        else:
            outcome = execute_action(action, trial)
            if outcome.status == "executed":
                step.status = "executed"
            else:
                step.unmet = list(outcome.reasons)
        result.steps.append(step)
    return result


# --- compilation stats -----------------------------------------------------------


def story_stats(report: CompilationReport) -> dict:
    """Flatten a report into the numbers worth putting in a table."""
    failures: dict[str, int] = {}
    for entry in report.entries:
        if entry.status != "success":
            failures[entry.error_type or "unknown"] = (
                failures.get(entry.error_type or "unknown", 0) + 1
            )
    return {
        "total": report.total,
        "compiled": report.compiled,
        "rate": round(report.rate, 3),
        "fully_compiled": report.fully_compiled,
        "failures": dict(sorted(failures.items())),
    }


# --- dynamic suite ---------------------------------------------------------------


@dataclass
class DynamicAttempt:
    object_id: NodeId
    object_name: str
    object_kind: str
    verb: str
    sentence: str
    ok: bool
    failure: str | None = None
    failure_detail: str | None = None
    action_id: str | None = None
    categories: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "object_name": self.object_name,
            "object_kind": self.object_kind,
            "verb": self.verb,
            "sentence": self.sentence,
            "ok": self.ok,
            "failure": self.failure,
            "failure_detail": self.failure_detail,
            "action_id": self.action_id,
            "categories": dict(sorted(self.categories.items())),
        }


@dataclass
class DynamicEvalResult:
    attempts: list[DynamicAttempt] = field(default_factory=list)
    verbs_by_object: dict[str, list[str]] = field(default_factory=dict)
    logs: list[dict] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.attempts)

    @property
    def successes(self) -> int:
        return sum(1 for a in self.attempts if a.ok)

    @property
    def rate(self) -> float:
        if not self.attempts:
            return 1.0
        return self.successes / self.total

    def category_counts(self) -> dict[str, int]:
        counts = {"new_object": 0, "new_attribute": 0, "preceding_event": 0}
        for attempt in self.attempts:
            if not attempt.ok:
                continue
            for name, hit in attempt.categories.items():
                if hit:
                    counts[name] = counts.get(name, 0) + 1
        return counts

    def category_rates(self) -> dict[str, float]:
        successes = self.successes
        if successes == 0:
            return {name: 0.0 for name in self.category_counts()}
        return {
            name: round(count / successes, 3)
            for name, count in self.category_counts().items()
        }

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "successes": self.successes,
            "rate": round(self.rate, 3),
            "category_counts": self.category_counts(),
            "category_rates": self.category_rates(),
            "verbs_by_object": {
                k: list(v) for k, v in sorted(self.verbs_by_object.items())
            },
            "attempts": [a.to_dict() for a in self.attempts],
        }


def eval_objects(state: GameState) -> list[NodeId]:
    """Items, containers, and characters, in stable id order."""
    world = state.world
    ids = [
        nid
        for nid in sorted(world.nodes)
        if world.kind_of(nid)
        in (NodeKind.ITEM, NodeKind.CONTAINER, NodeKind.CHARACTER)
    ]
    return ids


def _story_verbs_for(state: GameState, object_id: NodeId) -> list[str]:
    verbs = []
    for action in state.registry.story_actions():
        if object_id in action.bound_refs.values():
            # the base form is imperative ("pick up the {items[0]} ..."),
            # so its first token is the verb
            words = action.base_form.split()
            if words:
                verbs.append(words[0].lower())
    return sorted(set(verbs))


def suggest_verbs(
    state: GameState, object_id: NodeId, llm: LlmGateway
) -> list[str]:
    """Ask for fresh verbs for an object; verbs the story already uses get
    one chance to be replaced before we give up on uniqueness."""
    node = state.world.get(object_id)
    taken = _story_verbs_for(state, object_id)

    def _ask(exclude: list[str]) -> list[str]:
        return llm.complete(
            PromptKind.VERB_SUGGEST,
            {
                "name": node.canonical_name,
                "kind": node.kind.value,
                "exclude": ", ".join(exclude) or "(none)",
            },
            validate_verbs,
        )

    suggested = _ask(taken)
    fresh = [v for v in suggested if v not in taken]
    if len(fresh) < VERBS_PER_OBJECT:
        retry = _ask(sorted(set(taken) | set(suggested)))
        for verb in retry:
            if verb not in taken and verb not in fresh:
                fresh.append(verb)
    return fresh[:VERBS_PER_OBJECT]


def dynamic_eval(state: GameState, llm: LlmGateway) -> DynamicEvalResult:
    """Try every suggested verb against every object, each on its own clone.

    Cloning per attempt keeps attempts independent, so neither the order of
    objects nor earlier failures can change any single outcome.
    """
    result = DynamicEvalResult()
    for object_id in eval_objects(state):
        node = state.world.get(object_id)
        try:
            verbs = suggest_verbs(state, object_id, llm)
        except GenerationError as exc:
            log.warning("no verbs for %s: %s", node.canonical_name, exc)
            continue
        result.verbs_by_object[node.canonical_name] = verbs
        for verb in verbs:
            trial = state.clone()
            sentence = f"{verb} the {node.canonical_name}"
            try:
                outcome = dynamic.generate_dynamic_action(verb, object_id, trial, llm)
            except EngineError as exc:
                result.attempts.append(
                    DynamicAttempt(
                        object_id=object_id,
                        object_name=node.canonical_name,
                        object_kind=node.kind.value,
                        verb=verb,
                        sentence=sentence,
                        ok=False,
                        failure=type(exc).__name__,
                        failure_detail=str(exc),
                    )
                )
                continue
            result.logs.extend(trial.dynamic_log)
            result.attempts.append(
                DynamicAttempt(
                    object_id=object_id,
                    object_name=node.canonical_name,
                    object_kind=node.kind.value,
                    verb=verb,
                    sentence=outcome.sentence,
                    ok=outcome.ok,
                    failure=outcome.failure,
                    failure_detail=outcome.failure_detail,
                    action_id=outcome.action.id if outcome.action else None,
                    categories=outcome.categories(),
                )
            )
    return result


# --- human review export -----------------------------------------------------------


def semantic_review_export(result: DynamicEvalResult) -> list[dict]:
    """Cards for a human to mark up: does the invented action make sense?

    ``pass`` starts as null; reviewers flip it to true/false.
    """
    cards: list[dict] = []
    for log_entry in result.logs:
        if log_entry["outcome"] != "compiled" or log_entry["depth"] != 0:
            continue
        action = log_entry["action"] or {}
        cards.append(
            {
                "id": len(cards),
                "sentence": log_entry["sentence"],
                "object": log_entry["object"],
                "verb": log_entry["verb"],
                "preconditions": [c.get("kind") for c in action.get("checkers", [])],
                "effects": [o.get("kind") for o in action.get("operations", [])],
                "display": action.get("display"),
                "categories": log_entry["categories"],
                "pass": None,
            }
        )
    return cards


def review_aggregate(cards: list[dict]) -> dict:
    """Roll reviewed cards up into a pass rate; unreviewed cards don't count."""
    reviewed = [c for c in cards if c.get("pass") is not None]
    passed = sum(1 for c in reviewed if c["pass"])
    return {
        "total_cards": len(cards),
        "reviewed": len(reviewed),
        "passed": passed,
        "rate": round(passed / len(reviewed), 3) if reviewed else None,
    }
