"""Compile action specs against a world graph into executable actions.

Binding resolves every placeholder to a concrete node (creating missing
items/characters in the action's room and missing rooms on the grid),
preconditions become bound checks, effects become bound operations, and
preceding events are linked to previously-compiled actions by normalized
sentence match.  A sentence that fails stays a :class:`CompileFailure` in the
report; compilation always moves on to the next sentence.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from . import ir
from .errors import (
    AmbiguousReference,
    CompileError,
    EngineError,
    InvalidOperation,
    MatchMiss,
    ObjectMisidentification,
    PreconditionGrammarError,
    RoomAttributeForbidden,
    UnknownObject,
)
from .ir import ActionSpec, NodeRef
from .textnorm import normalize_name, normalize_sentence
from .world import AttributeValue, NodeId, NodeKind, WorldGraph

log = logging.getLogger(__name__)

STORY = "story"
DYNAMIC = "dynamic"

INVENTORY = "inventory"


# --- bound checks -------------------------------------------------------------


@dataclass(frozen=True)
class BoundLocation:
    node: NodeId
    room: NodeId

    def to_dict(self) -> dict:
        return {"kind": "location", "node": self.node, "room": self.room}

    def describe(self, world: WorldGraph) -> str:
        return f"{world.name_of(self.node)} at {world.name_of(self.room)}"


@dataclass(frozen=True)
class BoundInventory:
    holder: NodeId
    item: NodeId

    def to_dict(self) -> dict:
        return {"kind": "inventory", "holder": self.holder, "item": self.item}

    def describe(self, world: WorldGraph) -> str:
        return f"{world.name_of(self.holder)} has {world.name_of(self.item)}"


@dataclass(frozen=True)
class BoundAttribute:
    node: NodeId
    key: str
    op: str
    value: AttributeValue

    def to_dict(self) -> dict:
        return {
            "kind": "attribute",
            "node": self.node,
            "key": self.key,
            "op": self.op,
            "value": self.value,
        }

    def describe(self, world: WorldGraph) -> str:
        return f"{world.name_of(self.node)}.{self.key} {self.op} {ir.format_value(self.value)}"


@dataclass(frozen=True)
class BoundPreceding:
    action_id: str
    sentence: str

    def to_dict(self) -> dict:
        return {"kind": "preceding", "action": self.action_id, "sentence": self.sentence}

    def describe(self, world: WorldGraph) -> str:
        return f"after: {self.sentence}"


BoundCheck = Union[BoundLocation, BoundInventory, BoundAttribute, BoundPreceding]


def check_from_dict(data: dict) -> BoundCheck:
    kind = data["kind"]
    if kind == "location":
        return BoundLocation(node=data["node"], room=data["room"])
    if kind == "inventory":
        return BoundInventory(holder=data["holder"], item=data["item"])
    if kind == "attribute":
        return BoundAttribute(
            node=data["node"], key=data["key"], op=data["op"], value=data["value"]
        )
    if kind == "preceding":
        return BoundPreceding(action_id=data["action"], sentence=data["sentence"])
    raise ValueError(f"unknown check kind {kind!r}")


# --- bound operations -----------------------------------------------------------


@dataclass(frozen=True)
class OpMove:
    node: NodeId
    dest: str  # node id or "inventory"

    def to_dict(self) -> dict:
        return {"kind": "move", "node": self.node, "dest": self.dest}

    def describe(self, world: WorldGraph) -> str:
        dest = self.dest if self.dest == INVENTORY else world.name_of(self.dest)
        return f"move {world.name_of(self.node)} to {dest}"


@dataclass(frozen=True)
class OpSet:
    node: NodeId
    key: str
    value: AttributeValue

    def to_dict(self) -> dict:
        return {"kind": "set", "node": self.node, "key": self.key, "value": self.value}

    def describe(self, world: WorldGraph) -> str:
        return f"set {world.name_of(self.node)}.{self.key} to {ir.format_value(self.value)}"


@dataclass(frozen=True)
class OpAdd:
    name: str
    node_kind: str
    dest: str  # node id or "inventory"

    def to_dict(self) -> dict:
        return {"kind": "add", "name": self.name, "node_kind": self.node_kind, "dest": self.dest}

    def describe(self, world: WorldGraph) -> str:
        dest = self.dest if self.dest == INVENTORY else world.name_of(self.dest)
        return f"add {self.name} ({self.node_kind}) to {dest}"


@dataclass(frozen=True)
class OpDelete:
    node: NodeId

    def to_dict(self) -> dict:
        return {"kind": "delete", "node": self.node}

    def describe(self, world: WorldGraph) -> str:
        return f"delete {world.name_of(self.node)}"


@dataclass(frozen=True)
class OpDisplay:
    text: str

    def to_dict(self) -> dict:
        return {"kind": "display", "text": self.text}

    def describe(self, world: WorldGraph) -> str:
        return f"display {self.text}"


BoundOp = Union[OpMove, OpSet, OpAdd, OpDelete, OpDisplay]


def op_from_dict(data: dict) -> BoundOp:
    kind = data["kind"]
    if kind == "move":
        return OpMove(node=data["node"], dest=data["dest"])
    if kind == "set":
        return OpSet(node=data["node"], key=data["key"], value=data["value"])
    if kind == "add":
        return OpAdd(name=data["name"], node_kind=data["node_kind"], dest=data["dest"])
    if kind == "delete":
        return OpDelete(node=data["node"])
    if kind == "display":
        return OpDisplay(text=data["text"])
    raise ValueError(f"unknown operation kind {kind!r}")


# --- compiled actions ------------------------------------------------------------


@dataclass
class CompiledAction:
    id: str
    sentence: str
    sentence_index: int | None
    origin: str  # "story" or "dynamic"
    base_form: str
    display: str
    room: NodeId | None
    bound_refs: dict[str, NodeId]
    checkers: list[BoundCheck]
    operations: list[BoundOp]
    preceding_ids: list[str]
    alias_sentences: list[str] = field(default_factory=list)
    completed: bool = False

    def name_map(self, world: WorldGraph) -> dict[str, str]:
        out: dict[str, str] = {}
        for placeholder, node_id in self.bound_refs.items():
            if node_id in world.nodes:
                out[placeholder] = world.name_of(node_id)
        return out

    def surface_forms(self, world: WorldGraph) -> list[str]:
        """Normalized command strings that should trigger this action."""
        mapping = self.name_map(world)
        rendered = ir.render_template(self.base_form, mapping)
        candidates = [rendered]
        trimmed = _strip_at_suffix(self.base_form)
        if trimmed != self.base_form:
            candidates.append(ir.render_template(trimmed, mapping))
        candidates.append(self.sentence)
        out: list[str] = []
        for cand in candidates:
            norm = normalize_sentence(cand)
            if norm and norm not in out:
                out.append(norm)
        return out

    def render_display(self, world: WorldGraph) -> str:
        return ir.render_template(self.display, self.name_map(world))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sentence": self.sentence,
            "sentence_index": self.sentence_index,
            "origin": self.origin,
            "base_form": self.base_form,
            "display": self.display,
            "room": self.room,
            "bound_refs": dict(sorted(self.bound_refs.items())),
            "checkers": [c.to_dict() for c in self.checkers],
            "operations": [o.to_dict() for o in self.operations],
            "preceding_ids": list(self.preceding_ids),
            "alias_sentences": list(self.alias_sentences),
            "completed": self.completed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompiledAction":
        return cls(
            id=data["id"],
            sentence=data["sentence"],
            sentence_index=data.get("sentence_index"),
            origin=data["origin"],
            base_form=data["base_form"],
            display=data["display"],
            room=data.get("room"),
            bound_refs=dict(data["bound_refs"]),
            checkers=[check_from_dict(c) for c in data["checkers"]],
            operations=[op_from_dict(o) for o in data["operations"]],
            preceding_ids=list(data["preceding_ids"]),
            alias_sentences=list(data.get("alias_sentences", [])),
            completed=bool(data["completed"]),
        )


_AT_SUFFIX_RE = re.compile(r"\s+(?:at|in)\s+(?:the\s+)?\{rooms\[\d+\]\}\s*$")


def _strip_at_suffix(base_form: str) -> str:
    return _AT_SUFFIX_RE.sub("", base_form)


@dataclass
class CompileFailure:
    sentence: str
    sentence_index: int | None
    error_type: str
    reason: str


@dataclass
class SentenceEntry:
    index: int
    sentence: str
    status: str  # "success" | "failure"
    action_id: str | None = None
    error_type: str | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "sentence": self.sentence,
            "status": self.status,
            "action_id": self.action_id,
            "error_type": self.error_type,
            "reason": self.reason,
        }


@dataclass
class CompilationReport:
    entries: list[SentenceEntry] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.entries)

    @property
    def compiled(self) -> int:
        return sum(1 for e in self.entries if e.status == "success")

    @property
    def rate(self) -> float:
        if not self.entries:
            return 1.0
        return self.compiled / self.total

    @property
    def fully_compiled(self) -> bool:
        return self.compiled == self.total

    def to_dict(self) -> dict:
        return {
            "sentences": self.total,
            "compiled": self.compiled,
            "sentence_compilation_rate": round(self.rate, 6),
            "fully_compiled": self.fully_compiled,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_table(self) -> str:
        lines = [f"{'#':>3}  {'status':<8} sentence"]
        for e in self.entries:
            note = f"  [{e.error_type}: {e.reason}]" if e.status == "failure" else ""
            lines.append(f"{e.index:>3}  {e.status:<8} {e.sentence}{note}")
        lines.append(
            f"compiled {self.compiled}/{self.total} "
            f"({self.rate:.3f}); fully compiled: {self.fully_compiled}"
        )
        return "\n".join(lines)


class ActionRegistry:
    """Ordered store of compiled actions, addressable by id and by sentence."""

    def __init__(self) -> None:
        self.actions: dict[str, CompiledAction] = {}
        self._by_sentence: dict[str, str] = {}
        self._seq = 0

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions.values())

    def new_id(self) -> str:
        self._seq += 1
        return f"a{self._seq:04d}"

    def add(self, action: CompiledAction) -> None:
        if action.id in self.actions:
            raise InvalidOperation(f"duplicate action id {action.id}")
        self.actions[action.id] = action
        self._index_sentence(action.sentence, action.id)

    def _index_sentence(self, sentence: str, action_id: str) -> None:
        norm = normalize_sentence(sentence)
        if norm and norm not in self._by_sentence:
            self._by_sentence[norm] = action_id

    def index_alias_sentence(self, sentence: str, action_id: str) -> None:
        action = self.get(action_id)
        if sentence not in action.alias_sentences:
            action.alias_sentences.append(sentence)
        self._index_sentence(sentence, action_id)

    def get(self, action_id: str) -> CompiledAction:
        try:
            return self.actions[action_id]
        except KeyError:
            raise UnknownObject(f"no action with id {action_id!r}") from None

    def find_sentence(self, sentence: str) -> str | None:
        return self._by_sentence.get(normalize_sentence(sentence))

    def story_actions(self) -> list[CompiledAction]:
        return [a for a in self.actions.values() if a.origin == STORY]

    def referencing(self, node_id: NodeId) -> list[CompiledAction]:
        return [a for a in self.actions.values() if node_id in a.bound_refs.values()]

    def to_list(self) -> list[dict]:
        return [a.to_dict() for a in self.actions.values()]

    @classmethod
    def from_list(cls, rows: list[dict]) -> "ActionRegistry":
        registry = cls()
        for row in rows:
            action = CompiledAction.from_dict(row)
            registry.actions[action.id] = action
            registry._index_sentence(action.sentence, action.id)
            for alias in action.alias_sentences:
                registry._index_sentence(alias, action.id)
            suffix = action.id.lstrip("a")
            if suffix.isdigit():
                registry._seq = max(registry._seq, int(suffix))
        return registry


# --- surface resolution -----------------------------------------------------------


def resolve_surface(
    world: WorldGraph,
    surface: str,
    kinds: Iterable[NodeKind] | None = None,
    scope: NodeId | None = None,
    learn_alias: bool = True,
) -> NodeId:
    """Resolve a surface form with adjective-alias fallbacks.

    Exact/alias match first.  Then, if the surface extends an existing name
    with leading adjectives ("metallic key" -> "key"), bind to it and learn
    the alias; if the surface is the bare head of exactly one longer name
    ("key" -> "iron key"), bind without learning.  Anything still unresolved
    is an :class:`UnknownObject`; several candidates is an
    :class:`ObjectMisidentification`.
    """
    try:
        return world.resolve_reference(surface, scope=scope, kinds=kinds)
    except UnknownObject:
        pass
    except AmbiguousReference as exc:
        raise ObjectMisidentification(surface, exc.candidates) from None

    norm = normalize_name(surface)
    wanted = set(kinds) if kinds is not None else None

    def pool() -> list[NodeId]:
        return [
            nid
            for nid, node in world.nodes.items()
            if wanted is None or node.kind in wanted
        ]

    extensions = [
        nid for nid in pool() if norm.endswith(" " + world.nodes[nid].canonical_name)
    ]
    if len(extensions) == 1:
        node = world.nodes[extensions[0]]
        if learn_alias and norm not in node.aliases:
            node.aliases.add(norm)
            log.debug("learned alias %r for %s", norm, node.canonical_name)
        return extensions[0]
    if len(extensions) > 1:
        names = [world.nodes[n].canonical_name for n in extensions]
        raise ObjectMisidentification(surface, names)

    heads = [
        nid for nid in pool() if world.nodes[nid].canonical_name.endswith(" " + norm)
    ]
    if len(heads) == 1:
        return heads[0]
    if len(heads) > 1:
        names = [world.nodes[n].canonical_name for n in heads]
        raise ObjectMisidentification(surface, names)

    raise UnknownObject(f"nothing in the world answers to {surface!r}")


# --- binding -------------------------------------------------------------------


@dataclass
class Binding:
    refs: dict[str, NodeId] = field(default_factory=dict)
    created: list[NodeId] = field(default_factory=list)
    room: NodeId | None = None


def bind_references(
    spec: ActionSpec,
    world: WorldGraph,
    rng: random.Random | None = None,
    room_hint: NodeId | None = None,
    create_missing: bool = True,
) -> Binding:
    """Resolve a spec's placeholder lists to world nodes.

    Missing rooms are created and placed on the grid; missing items and
    characters are created in the action's associated room (``rooms[0]``,
    falling back to ``room_hint``).
    """
    binding = Binding()
    if world.player is not None:
        binding.refs["player"] = world.player

    last_anchor = world.placement_order[-1] if world.placement_order else None
    for idx, name in enumerate(spec.rooms):
        try:
            room_id = resolve_surface(world, name, kinds=(NodeKind.ROOM,))
        except UnknownObject:
            if not create_missing:
                raise
            room_id = world.add_node(name, NodeKind.ROOM)
            world.place_room(room_id, anchor=last_anchor, rng=rng)
            binding.created.append(room_id)
            last_anchor = room_id
        binding.refs[f"rooms[{idx}]"] = room_id

    binding.room = binding.refs.get("rooms[0]", room_hint)

    for list_name, kinds, kind in (
        ("items", (NodeKind.ITEM, NodeKind.CONTAINER), NodeKind.ITEM),
        ("characters", (NodeKind.CHARACTER,), NodeKind.CHARACTER),
    ):
        for idx, name in enumerate(getattr(spec, list_name)):
            try:
                node_id = resolve_surface(world, name, kinds=kinds)
            except UnknownObject:
                if not create_missing:
                    raise
                if binding.room is None:
                    raise UnknownObject(
                        f"no room to create {name!r} in (the spec references no rooms)"
                    ) from None
                node_id = world.add_node(name, kind, parent=binding.room)
                binding.created.append(node_id)
            binding.refs[f"{list_name}[{idx}]"] = node_id

    _apply_initial_attributes(spec, world, binding)
    return binding


def _apply_initial_attributes(spec: ActionSpec, world: WorldGraph, binding: Binding) -> None:
    """Seed initial attribute values, but only on nodes this binding created."""
    created = set(binding.created)
    for dotted, value in spec.attributes.items():
        if "." not in dotted:
            log.warning("ignoring non-dotted initial attribute %r", dotted)
            continue
        target, key = dotted.rsplit(".", 1)
        try:
            node_id = resolve_surface(world, target, learn_alias=False)
        except EngineError:
            log.warning("initial attribute %r targets nothing known", dotted)
            continue
        if node_id in created and world.kind_of(node_id) is not NodeKind.ROOM:
            world.set_attribute(node_id, key, value)


def _bind_ref(ref: NodeRef, binding: Binding, world: WorldGraph) -> str:
    if ref.kind == "inventory":
        return INVENTORY
    if ref.kind == "player":
        player = binding.refs.get("player")
        if player is None:
            raise UnknownObject("the world has no player to bind")
        return player
    if ref.kind == "name":
        name = ref.name or ""
        if name in binding.refs:
            return binding.refs[name]
        node_id = resolve_surface(world, name)
        binding.refs[name] = node_id
        return node_id
    key = f"{ref.kind}[{ref.index}]"
    try:
        return binding.refs[key]
    except KeyError:
        raise UnknownObject(f"{key} was never bound") from None


# --- compilation -----------------------------------------------------------------


def compile_action(
    spec: ActionSpec,
    world: WorldGraph,
    registry: ActionRegistry,
    rng: random.Random | None = None,
    room_hint: NodeId | None = None,
    origin: str = STORY,
    sentence_index: int | None = None,
) -> CompiledAction | CompileFailure:
    """Compile one spec; on success the action is added to the registry.

    Failure leaves the world exactly as it was: nodes created while binding
    a doomed spec are rolled back.
    """
    snapshot = world.clone()
    try:
        spec.validate_placeholders()
        binding = bind_references(spec, world, rng=rng, room_hint=room_hint)

        checkers: list[BoundCheck] = []
        for text in spec.fundamental_preconditions:
            check = ir.parse_precondition(text, spec)
            if not isinstance(check, (ir.LocationCheck, ir.InventoryCheck)):
                raise PreconditionGrammarError(
                    f"fundamental preconditions are location or inventory checks, got {text!r}"
                )
            checkers.append(_bind_check(check, binding, world))

        for text in spec.additional_preconditions:
            check = ir.parse_precondition(text, spec)
            if isinstance(check, ir.PrecedingEvent):
                raise PreconditionGrammarError(
                    f"preceding events belong in preceding_events, not preconditions ({text!r})"
                )
            checkers.append(_bind_check(check, binding, world))

        preceding_ids: list[str] = []
        for sentence in spec.preceding_events:
            matched = registry.find_sentence(sentence)
            if matched is None:
                raise MatchMiss(f"preceding event matches no known sentence: {sentence!r}")
            if matched not in preceding_ids:
                preceding_ids.append(matched)
            checkers.append(BoundPreceding(action_id=matched, sentence=sentence))

        operations: list[BoundOp] = []
        for text in spec.effects:
            operations.append(_bind_effect(ir.parse_effect(text, spec), binding, world))

        action = CompiledAction(
            id=registry.new_id(),
            sentence=spec.input,
            sentence_index=sentence_index,
            origin=origin,
            base_form=spec.base_form or spec.input,
            display=spec.display,
            room=binding.room,
            bound_refs=dict(binding.refs),
            checkers=checkers,
            operations=operations,
            preceding_ids=preceding_ids,
        )
        registry.add(action)
        if spec.complete_sentence:
            registry.index_alias_sentence(spec.complete_sentence, action.id)
        return action
    except EngineError as exc:
        world.restore(snapshot)
        return CompileFailure(
            sentence=spec.input,
            sentence_index=sentence_index,
            error_type=type(exc).__name__,
            reason=str(exc),
        )


def _bind_check(check: ir.Precondition, binding: Binding, world: WorldGraph) -> BoundCheck:
    if isinstance(check, ir.LocationCheck):
        node = _bind_ref(check.node, binding, world)
        room = _bind_ref(check.room, binding, world)
        return BoundLocation(node=node, room=room)
    if isinstance(check, ir.InventoryCheck):
        return BoundInventory(
            holder=_bind_ref(check.holder, binding, world),
            item=_bind_ref(check.item, binding, world),
        )
    assert isinstance(check, ir.AttributeCheck)
    node = _bind_ref(check.node, binding, world)
    if world.kind_of(node) is NodeKind.ROOM:
        raise RoomAttributeForbidden(
            f"rooms carry no attributes ({world.name_of(node)}.{check.key})"
        )
    return BoundAttribute(node=node, key=check.key, op=check.op, value=check.value)


def _bind_effect(effect: ir.EffectSpec, binding: Binding, world: WorldGraph) -> BoundOp:
    if isinstance(effect, ir.MoveEffect):
        node = _bind_ref(effect.node, binding, world)
        if world.kind_of(node) is NodeKind.ROOM:
            raise InvalidOperation("rooms cannot be moved by an effect")
        dest = _bind_ref(effect.dest, binding, world)
        return OpMove(node=node, dest=dest)
    if isinstance(effect, ir.SetAttributeEffect):
        node = _bind_ref(effect.node, binding, world)
        if world.kind_of(node) is NodeKind.ROOM:
            raise RoomAttributeForbidden(
                f"rooms carry no attributes ({world.name_of(node)}.{effect.key})"
            )
        return OpSet(node=node, key=effect.key, value=effect.value)
    if isinstance(effect, ir.AddNodeEffect):
        dest = _bind_ref(effect.dest, binding, world)
        return OpAdd(name=effect.name, node_kind=effect.node_kind, dest=dest)
    if isinstance(effect, ir.DeleteNodeEffect):
        node = _bind_ref(effect.node, binding, world)
        if world.kind_of(node) in (NodeKind.ROOM, NodeKind.PLAYER):
            raise InvalidOperation(f"{world.kind_of(node).value}s cannot be deleted")
        return OpDelete(node=node)
    assert isinstance(effect, ir.DisplayEffect)
    return OpDisplay(text=effect.text)


def compile_story(
    specs: Sequence[ActionSpec | None],
    world: WorldGraph,
    rng: random.Random | None = None,
    sentences: Sequence[str] | None = None,
) -> tuple[ActionRegistry, CompilationReport]:
    """Compile a whole story in order; failures are recorded, never fatal."""
    registry = ActionRegistry()
    report = CompilationReport()
    room_hint: NodeId | None = None

    for index, spec in enumerate(specs):
        sentence = (
            sentences[index]
            if sentences is not None and index < len(sentences)
            else (spec.input if spec is not None else "")
        )
        if spec is None:
            report.entries.append(
                SentenceEntry(
                    index=index,
                    sentence=sentence,
                    status="failure",
                    error_type="SchemaError",
                    reason="sentence could not be annotated",
                )
            )
            continue
        result = compile_action(
            spec,
            world,
            registry,
            rng=rng,
            room_hint=room_hint,
            origin=STORY,
            sentence_index=index,
        )
        if isinstance(result, CompiledAction):
            room_hint = result.room or room_hint
            report.entries.append(
                SentenceEntry(
                    index=index,
                    sentence=sentence,
                    status="success",
                    action_id=result.id,
                )
            )
        else:
            report.entries.append(
                SentenceEntry(
                    index=index,
                    sentence=sentence,
                    status="failure",
                    error_type=result.error_type,
                    reason=result.reason,
                )
            )
    return registry, report
