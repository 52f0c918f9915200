"""Invent new actions at play time for verbs the story never covered.

A player-typed verb plus an existing object becomes a prompt; the returned
spec is grounded in the current world (missing items/characters are created
in uniformly random rooms), missing attribute slots get model-chosen
defaults, and unmet preceding events are generated recursively exactly one
level deep.  New attribute slots introduced by an action's effects are
retrofitted onto older actions that mention the same object.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from . import ir
from .compiler import (
    DYNAMIC,
    ActionRegistry,
    BoundAttribute,
    CompileFailure,
    CompiledAction,
    compile_action,
    resolve_surface,
)
from .errors import (
    AmbiguousReference,
    EngineError,
    FixtureMiss,
    GenerationError,
    SemanticUnrepresentable,
    UnknownObject,
)
from .ir import ActionSpec
from .llm import LlmGateway, spec_validator, validate_attr_default, validate_relevance
from .prompts import PromptKind
from .world import (
    ATTR_MAX,
    ATTR_MIN,
    AttributeValue,
    NodeId,
    NodeKind,
    WorldGraph,
)

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .runtime import GameState

log = logging.getLogger(__name__)

MAX_PRECEDING_DEPTH = 1

#: Compile-failure error types that mean "the idea cannot be modelled" rather
#: than "the spec was malformed".
_UNREPRESENTABLE = {"RoomAttributeForbidden", "InvalidOperation", "ContainmentViolation"}

INT_DEFAULT = (ATTR_MIN + ATTR_MAX) // 2  # midpoint fallback for bad int defaults
BOOL_DEFAULT = False


@dataclass
class CreatedAttribute:
    node: NodeId
    key: str
    default: AttributeValue
    from_effect: bool

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "key": self.key,
            "default": self.default,
            "from_effect": self.from_effect,
        }


@dataclass
class DynamicOutcome:
    sentence: str
    depth: int
    object_id: NodeId | None = None
    verb: str | None = None
    action: CompiledAction | None = None
    failure: str | None = None
    failure_detail: str | None = None
    spec: ActionSpec | None = None
    preceding_requested: bool = False
    created_objects: list[NodeId] = field(default_factory=list)
    created_attributes: list[CreatedAttribute] = field(default_factory=list)
    preceding_ids: list[str] = field(default_factory=list)
    child_ids: list[str] = field(default_factory=list)
    retrofitted_ids: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.action is not None

    def categories(self) -> dict[str, bool]:
        return {
            "new_object": bool(self.created_objects),
            "new_attribute": bool(self.created_attributes),
            "preceding_event": self.preceding_requested,
        }

    def log_record(self, world: WorldGraph) -> dict:
        return {
            "sentence": self.sentence,
            "depth": self.depth,
            "verb": self.verb,
            "object": world.name_of(self.object_id)
            if self.object_id and self.object_id in world.nodes
            else None,
            "object_kind": world.kind_of(self.object_id).value
            if self.object_id and self.object_id in world.nodes
            else None,
            "outcome": "compiled" if self.ok else "failed",
            "failure": self.failure,
            "failure_detail": self.failure_detail,
            "action_id": self.action.id if self.action else None,
            "action": self.action.to_dict() if self.action else None,
            "spec": self.spec.to_json_dict() if self.spec else None,
            "categories": self.categories(),
            "created_objects": [
                world.name_of(nid) for nid in self.created_objects if nid in world.nodes
            ],
            "created_attributes": [attr.to_dict() for attr in self.created_attributes],
            "preceding_ids": list(self.preceding_ids),
            "child_ids": list(self.child_ids),
            "retrofitted_ids": list(self.retrofitted_ids),
            "warnings": list(self.warnings),
        }


# --- public entry point -------------------------------------------------------


def generate_dynamic_action(
    verb: str,
    object_id: NodeId,
    state: "GameState",
    llm: LlmGateway,
) -> DynamicOutcome:
    """Invent, ground, and compile an action for ``verb`` on an existing object.

    The object must already exist and be an item, container, or character:
    the model never gets to invent the thing being acted on.  On failure the
    world and registry are restored to their pre-call state.
    """
    verb = verb.strip().lower()
    sentence = f"{verb} the %s"
    try:
        node = state.world.get(object_id)
    except UnknownObject as exc:
        outcome = DynamicOutcome(
            sentence=verb,
            depth=0,
            verb=verb,
            failure="UnknownObject",
            failure_detail=str(exc),
        )
        state.dynamic_log.append(outcome.log_record(state.world))
        return outcome
    sentence = f"{verb} the {node.canonical_name}"

    if node.kind in (NodeKind.ROOM, NodeKind.PLAYER):
        outcome = DynamicOutcome(
            sentence=sentence,
            depth=0,
            object_id=object_id,
            verb=verb,
            failure="SemanticUnrepresentable",
            failure_detail=f"new actions only operate on existing items and characters, "
            f"not {node.kind.value}s",
        )
        state.dynamic_log.append(outcome.log_record(state.world))
        return outcome

    room_id = state.world.room_of(object_id)
    if room_id is None:
        room_id = state.world.room_of(state.world.require_player())
    room_name = state.world.name_of(room_id) if room_id else "nowhere"

    world_before = state.world.clone()
    registry_before = len(state.registry)
    outcome = _generate(sentence, room_name, state, llm, depth=0)
    outcome.verb = verb
    outcome.object_id = object_id
    if not outcome.ok:
        # all-or-nothing: discard every node/slot/action the attempt created
        state.world = world_before
        _trim_registry(state.registry, registry_before)
    state.dynamic_log.append(outcome.log_record(state.world))
    return outcome


def _trim_registry(registry: ActionRegistry, keep: int) -> None:
    extra = list(registry.actions)[keep:]
    for action_id in extra:
        action = registry.actions.pop(action_id)
        stale = [k for k, v in registry._by_sentence.items() if v == action.id]
        for key in stale:
            del registry._by_sentence[key]


# --- generation core ------------------------------------------------------------


def _generate(
    sentence: str,
    room_name: str,
    state: "GameState",
    llm: LlmGateway,
    depth: int,
) -> DynamicOutcome:
    outcome = DynamicOutcome(sentence=sentence, depth=depth)
    variables = {
        "sentence": sentence,
        "room": room_name,
        "preceding": "true" if depth == 0 else "false",
    }
    try:
        spec = llm.complete(
            PromptKind.DYNAMIC_ACTION,
            variables,
            spec_validator(strict=llm.config.strict_specs),
        )
    except FixtureMiss:
        raise
    except GenerationError as exc:
        outcome.failure = "CompilationError"
        outcome.failure_detail = str(exc)
        return outcome

    spec = spec.copy()
    if not spec.input.strip():
        spec.input = sentence
    outcome.spec = spec
    outcome.preceding_requested = bool(spec.preceding_events)

    try:
        outcome.created_objects = ensure_essential_objects(spec, state.world, state.rng)
        outcome.created_attributes = ensure_attributes(spec, state.world, llm)
    except SemanticUnrepresentable as exc:
        outcome.failure = "SemanticUnrepresentable"
        outcome.failure_detail = str(exc)
        return outcome
    except EngineError as exc:
        outcome.failure = "CompilationError"
        outcome.failure_detail = f"{type(exc).__name__}: {exc}"
        return outcome

    if depth >= MAX_PRECEDING_DEPTH:
        if spec.preceding_events:
            outcome.warnings.append(
                f"dropped nested preceding events at depth {depth}: "
                + "; ".join(spec.preceding_events)
            )
            spec.preceding_events = []
    else:
        kept: list[str] = []
        for event in spec.preceding_events:
            matched = state.registry.find_sentence(event)
            if matched is not None:
                outcome.preceding_ids.append(matched)
                kept.append(event)
                continue
            child = _generate(event, room_name, state, llm, depth=depth + 1)
            child.verb = event.split()[0].lower() if event.split() else None
            state.dynamic_log.append(child.log_record(state.world))
            if child.ok:
                outcome.child_ids.append(child.action.id)
                outcome.preceding_ids.append(child.action.id)
                kept.append(event)
            else:
                outcome.warnings.append(
                    f"dropped preceding event that failed to generate: {event!r}"
                )
        spec.preceding_events = kept

    room_hint = None
    try:
        room_hint = resolve_surface(
            state.world, room_name, kinds=(NodeKind.ROOM,), learn_alias=False
        )
    except EngineError:
        pass

    result = compile_action(
        spec,
        state.world,
        state.registry,
        rng=state.rng,
        room_hint=room_hint,
        origin=DYNAMIC,
    )
    if isinstance(result, CompileFailure):
        if result.error_type in _UNREPRESENTABLE:
            outcome.failure = "SemanticUnrepresentable"
        else:
            outcome.failure = "CompilationError"
        outcome.failure_detail = f"{result.error_type}: {result.reason}"
        return outcome

    outcome.action = result
    for created in outcome.created_attributes:
        if created.from_effect:
            outcome.retrofitted_ids.extend(
                retrofit_attribute(
                    (created.node, created.key),
                    state.registry,
                    llm,
                    state.world,
                    exclude=result.id,
                )
            )
    return outcome


# --- grounding helpers ------------------------------------------------------------


def ensure_essential_objects(
    spec: ActionSpec, world: WorldGraph, rng: random.Random
) -> list[NodeId]:
    """Create any item/character the spec mentions that the world lacks.

    New nodes land in a uniformly random already-placed room.
    """
    created: list[NodeId] = []
    for list_name, kinds, kind in (
        ("items", (NodeKind.ITEM, NodeKind.CONTAINER), NodeKind.ITEM),
        ("characters", (NodeKind.CHARACTER,), NodeKind.CHARACTER),
    ):
        for name in getattr(spec, list_name):
            try:
                resolve_surface(world, name, kinds=kinds)
                continue
            except UnknownObject:
                pass
            except AmbiguousReference:
                continue  # binding will report the misidentification
            if not world.placement_order:
                raise SemanticUnrepresentable("no rooms exist to hold new objects")
            room = rng.choice(world.placement_order)
            created.append(world.add_node(name, kind, parent=room))
    return created


def _iter_attribute_requirements(spec: ActionSpec):
    """Yield (ref, key, sample_value, from_effect) for every attribute the spec touches."""
    for text in spec.additional_preconditions:
        try:
            check = ir.parse_precondition(text, spec)
        except EngineError:
            continue
        if isinstance(check, ir.AttributeCheck):
            yield check.node, check.key, check.value, False
    for text in spec.attribute_effects:
        try:
            check = ir.parse_precondition(text, spec)
        except EngineError:
            continue
        if isinstance(check, ir.AttributeCheck):
            yield check.node, check.key, check.value, True
    for text in spec.effects:
        try:
            effect = ir.parse_effect(text, spec)
        except EngineError:
            continue
        if isinstance(effect, ir.SetAttributeEffect):
            yield effect.node, effect.key, effect.value, True


def _resolve_ref_node(ref: ir.NodeRef, spec: ActionSpec, world: WorldGraph) -> NodeId | None:
    if ref.kind == "rooms":
        raise SemanticUnrepresentable("rooms cannot carry attributes")
    if ref.kind == "player":
        return world.player
    if ref.kind == "inventory":
        return None
    name = ref.name if ref.kind == "name" else getattr(spec, ref.kind)[ref.index]
    try:
        node_id = resolve_surface(world, name, learn_alias=False)
    except EngineError:
        return None
    if world.kind_of(node_id) is NodeKind.ROOM:
        raise SemanticUnrepresentable(
            f"rooms cannot carry attributes ({world.name_of(node_id)})"
        )
    return node_id


def coerce_default(raw, want_bool: bool) -> tuple[AttributeValue, bool]:
    """Clamp a model-suggested default into the attribute domain.

    Returns ``(value, coerced)`` where ``coerced`` says the raw value was
    unusable and a fallback was substituted (False for booleans, the domain
    midpoint for integers).
    """
    if want_bool:
        if isinstance(raw, bool):
            return raw, False
        return BOOL_DEFAULT, True
    if isinstance(raw, int) and not isinstance(raw, bool) and ATTR_MIN <= raw <= ATTR_MAX:
        return raw, False
    return INT_DEFAULT, True


def ensure_attributes(
    spec: ActionSpec, world: WorldGraph, llm: LlmGateway
) -> list[CreatedAttribute]:
    """Give every attribute the spec relies on a slot with a sensible default."""
    created: list[CreatedAttribute] = []
    seen: set[tuple[NodeId, str]] = set()
    for ref, key, sample, from_effect in _iter_attribute_requirements(spec):
        node_id = _resolve_ref_node(ref, spec, world)
        if node_id is None:
            continue
        if (node_id, key) in seen:
            # already handled for this spec; upgrade the effect flag if needed
            if from_effect:
                for attr in created:
                    if attr.node == node_id and attr.key == key:
                        attr.from_effect = True
            continue
        seen.add((node_id, key))
        if world.get_attribute(node_id, key) is not None:
            continue  # slot already exists; leave it alone
        want_bool = isinstance(sample, bool)
        node = world.get(node_id)
        raw = llm.complete(
            PromptKind.ATTR_DEFAULT,
            {
                "node": node.canonical_name,
                "kind": node.kind.value,
                "key": key,
                "value_type": "boolean" if want_bool else "integer (0-10)",
            },
            validate_attr_default,
        )
        value, coerced = coerce_default(raw, want_bool)
        if coerced:
            log.warning(
                "coerced malformed default %r for %s.%s to %r",
                raw,
                node.canonical_name,
                key,
                value,
            )
        world.set_attribute(node_id, key, value)
        created.append(
            CreatedAttribute(node=node_id, key=key, default=value, from_effect=from_effect)
        )
    return created


def retrofit_attribute(
    attr: tuple[NodeId, str],
    registry: ActionRegistry,
    llm: LlmGateway,
    world: WorldGraph,
    exclude: str | None = None,
) -> list[str]:
    """Ask, for each older action touching the node, whether a brand-new
    attribute should gate it; append an equality check when it should.

    Only ever adds preconditions, and never the same check twice.
    """
    node_id, key = attr
    if node_id not in world.nodes:
        return []
    slot_value = world.get_attribute(node_id, key)
    want_bool = isinstance(slot_value, bool)
    node = world.get(node_id)
    modified: list[str] = []

    for action in list(registry):
        if action.id == exclude:
            continue
        if node_id not in action.bound_refs.values():
            continue
        if any(
            isinstance(c, BoundAttribute) and c.node == node_id and c.key == key
            for c in action.checkers
        ):
            continue  # idempotent: this attribute already gates the action
        try:
            verdict = llm.complete(
                PromptKind.ATTR_RELEVANCE,
                {
                    "node": node.canonical_name,
                    "key": key,
                    "action": action.sentence,
                    "preconditions": "; ".join(
                        c.describe(world) for c in action.checkers
                    )
                    or "(none)",
                    "effects": "; ".join(o.describe(world) for o in action.operations)
                    or "(none)",
                },
                validate_relevance,
            )
        except GenerationError:
            continue  # the model refused; leave the action untouched
        if not verdict["relevant"]:
            continue
        required, _ = coerce_default(verdict.get("required_value"), want_bool)
        action.checkers.append(
            BoundAttribute(node=node_id, key=key, op="==", value=required)
        )
        modified.append(action.id)
    return modified
