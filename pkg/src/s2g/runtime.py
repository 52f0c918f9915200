"""Play a compiled game: parse commands, check preconditions, apply effects.

Effects apply all-or-nothing: the world is snapshotted before the first
operation and restored wholesale if any operation fails.  Completed flags
only ever flip from False to True; completed actions may be executed again
as long as their preconditions still hold.
"""

from __future__ import annotations

import copy
import random
import re
from dataclasses import dataclass, field

from . import jsonio
from .compiler import (
    INVENTORY,
    ActionRegistry,
    BoundAttribute,
    BoundCheck,
    BoundInventory,
    BoundLocation,
    BoundPreceding,
    CompiledAction,
    OpAdd,
    OpDelete,
    OpDisplay,
    OpMove,
    OpSet,
    resolve_surface,
)
from .errors import AmbiguousReference, EngineError, UnknownObject
from .ir import format_value
from .textnorm import normalize_sentence
from .world import DIRECTIONS, NodeId, NodeKind, WorldGraph

_DIRECTION_ALIASES = {"n": "north", "s": "south", "e": "east", "w": "west"}
_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")

EXECUTED = "executed"
BLOCKED = "blocked"
UNKNOWN = "unknown"
ENGINE = "engine"


@dataclass
class StoryRecord:
    """One story sentence and what compilation made of it."""

    index: int
    sentence: str
    action_id: str | None = None
    error_type: str | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "sentence": self.sentence,
            "action_id": self.action_id,
            "error_type": self.error_type,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StoryRecord":
        return cls(
            index=data["index"],
            sentence=data["sentence"],
            action_id=data.get("action_id"),
            error_type=data.get("error_type"),
            reason=data.get("reason"),
        )


class GameState:
    """Everything a running game needs, minus the model gateway."""

    def __init__(
        self,
        world: WorldGraph,
        registry: ActionRegistry,
        seed: int = 0,
        story: list[StoryRecord] | None = None,
        rng: random.Random | None = None,
    ):
        self.world = world
        self.registry = registry
        self.seed = seed
        self.rng = rng if rng is not None else random.Random(seed)
        self.story = story or []
        self.turn = 0
        self.history: list[dict] = []
        self.dynamic_log: list[dict] = []

    def clone(self) -> "GameState":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "turn": self.turn,
            "world": self.world.snapshot(),
            "registry": self.registry.to_list(),
            "story": [rec.to_dict() for rec in self.story],
            "history": list(self.history),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameState":
        state = cls(
            world=WorldGraph.from_snapshot(data["world"]),
            registry=ActionRegistry.from_list(data["registry"]),
            seed=data.get("seed", 0),
            story=[StoryRecord.from_dict(row) for row in data.get("story", [])],
        )
        state.turn = data.get("turn", 0)
        state.history = list(data.get("history", []))
        return state

    def save(self, path) -> None:
        jsonio.dump_path(self.to_dict(), path)

    @classmethod
    def load(cls, path) -> "GameState":
        return cls.from_dict(jsonio.load_path(path))


@dataclass
class CommandResult:
    status: str
    display: str
    reasons: list[str] = field(default_factory=list)
    state_delta: list[str] = field(default_factory=list)
    turn: int = 0
    action_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "display": self.display,
            "reasons": list(self.reasons),
            "state_delta": list(self.state_delta),
            "turn": self.turn,
            "action_id": self.action_id,
        }


@dataclass
class Intent:
    kind: str  # look | inventory | go | story | dynamic | unknown | ambiguous
    action_id: str | None = None
    direction: str | None = None
    room_surface: str | None = None
    verb: str | None = None
    object_id: NodeId | None = None
    object_surface: str | None = None
    message: str | None = None


# --- command parsing -------------------------------------------------------------


def _surface_map(state: GameState) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for action in state.registry:
        for surface in action.surface_forms(state.world):
            mapping.setdefault(surface, action.id)
    return mapping


def parse_command(text: str, state: GameState) -> Intent:
    """Map raw input to an intent against the current game state."""
    norm = normalize_sentence(text)
    if not norm:
        return Intent(kind="unknown", message="Say something.")
    tokens = norm.split()

    if norm in ("look", "look around", "l"):
        return Intent(kind="look")
    if norm in ("inventory", "i", "open inventory"):
        return Intent(kind="inventory")

    if tokens[0] == "go" or (len(tokens) == 1 and _as_direction(tokens[0])):
        rest = tokens[1:] if tokens[0] == "go" else tokens
        if rest and rest[0] == "to":
            rest = rest[1:]
        if len(rest) == 1 and _as_direction(rest[0]):
            return Intent(kind="go", direction=_as_direction(rest[0]))
        if rest:
            return Intent(kind="go", room_surface=" ".join(rest))
        return Intent(kind="unknown", verb="go", message="Go where?")

    action_id = _surface_map(state).get(norm)
    if action_id is not None:
        return Intent(kind="story", action_id=action_id)

    verb = tokens[0]
    rest = tokens[1:]
    if "with" in rest:
        rest = rest[: rest.index("with")]
    object_surface = " ".join(rest)
    if not object_surface:
        return Intent(kind="unknown", verb=verb, object_surface="")

    player_room = state.world.room_of(state.world.require_player())
    try:
        object_id = state.world.resolve_reference(object_surface, scope=player_room)
    except AmbiguousReference as exc:
        return Intent(kind="ambiguous", message=str(exc))
    except UnknownObject:
        try:
            object_id = resolve_surface(state.world, object_surface, learn_alias=False)
        except AmbiguousReference as exc:
            return Intent(kind="ambiguous", message=str(exc))
        except EngineError:
            return Intent(kind="unknown", verb=verb, object_surface=object_surface)
    return Intent(kind="dynamic", verb=verb, object_id=object_id, object_surface=object_surface)


def _as_direction(token: str) -> str | None:
    if token in DIRECTIONS:
        return token
    return _DIRECTION_ALIASES.get(token)


# --- precondition checking ----------------------------------------------------------


def check_preconditions(
    action: CompiledAction, state: GameState
) -> list[tuple[BoundCheck, str]]:
    """Evaluate every checker; returns the failures with human-readable reasons."""
    world = state.world
    failures: list[tuple[BoundCheck, str]] = []
    for check in action.checkers:
        reason = _check_one(check, state)
        if reason is not None:
            failures.append((check, reason))
    return failures


def _name(world: WorldGraph, node_id: NodeId) -> str:
    return world.name_of(node_id) if node_id in world.nodes else "missing thing"


def _check_one(check: BoundCheck, state: GameState) -> str | None:
    world = state.world
    if isinstance(check, BoundLocation):
        if check.node not in world.nodes or check.room not in world.nodes:
            return "something this needs is gone"
        if check.node == check.room or world.room_of(check.node) == check.room:
            return None
        room_name = _name(world, check.room)
        if check.node == world.player:
            return f"you must be at the {room_name}"
        return f"the {_name(world, check.node)} must be at the {room_name}"
    if isinstance(check, BoundInventory):
        if check.holder not in world.nodes or check.item not in world.nodes:
            return "something this needs is gone"
        if world.contains(check.holder, check.item):
            return None
        item_name = _name(world, check.item)
        if check.holder == world.player:
            return f"you need the {item_name}"
        return f"the {_name(world, check.holder)} must have the {item_name}"
    if isinstance(check, BoundAttribute):
        if check.node not in world.nodes:
            return "something this needs is gone"
        current = world.get_attribute(check.node, check.key)
        if _attribute_satisfied(current, check.op, check.value):
            return None
        now = "unset" if current is None else format_value(current)
        return (
            f"the {_name(world, check.node)} needs {check.key} {check.op} "
            f"{format_value(check.value)} (now {now})"
        )
    assert isinstance(check, BoundPreceding)
    try:
        done = state.registry.get(check.action_id).completed
    except UnknownObject:
        done = False
    if done:
        return None
    return f"this must happen first: {check.sentence}"


def _attribute_satisfied(current, op: str, expected) -> bool:
    if current is None:
        return False
    if op == "==":
        if isinstance(expected, bool) != isinstance(current, bool):
            return False
        return current == expected
    # ">=" compares integers only
    if isinstance(current, bool) or not isinstance(current, int):
        return False
    return current >= int(expected)


# --- execution ------------------------------------------------------------------


def render_display_text(action: CompiledAction, world: WorldGraph, text: str) -> str:
    """Fill name and ``{ref.attribute}`` placeholders in display text."""
    mapping = action.name_map(world)

    def sub(match: re.Match) -> str:
        token = match.group(1).split(":", 1)[0].strip()
        if token in mapping:
            return mapping[token]
        if "." in token:
            ref, key = token.rsplit(".", 1)
            node_id = action.bound_refs.get(ref.strip())
            if node_id and node_id in world.nodes:
                value = world.get_attribute(node_id, key.strip())
                if value is not None:
                    return format_value(value)
        return match.group(0)

    return _PLACEHOLDER_RE.sub(sub, text)


def execute_action(action: CompiledAction, state: GameState, turn: int | None = None) -> CommandResult:
    """Apply an action's operations atomically; rolls back on any error."""
    world = state.world
    snapshot = world.clone()
    applied: list[str] = []
    extra_lines: list[str] = []
    try:
        for op in action.operations:
            if isinstance(op, OpMove):
                dest = world.require_player() if op.dest == INVENTORY else op.dest
                world.move_node(op.node, dest)
                applied.append(op.describe(world))
            elif isinstance(op, OpSet):
                world.set_attribute(op.node, op.key, op.value)
                applied.append(op.describe(world))
            elif isinstance(op, OpAdd):
                dest = world.require_player() if op.dest == INVENTORY else op.dest
                world.add_node(op.name, NodeKind(op.node_kind), parent=dest)
                applied.append(op.describe(world))
            elif isinstance(op, OpDelete):
                described = op.describe(world)
                world.remove_node(op.node)
                applied.append(described)
            else:
                assert isinstance(op, OpDisplay)
                extra_lines.append(render_display_text(action, world, op.text))
    except EngineError as exc:
        state.world = snapshot
        return CommandResult(
            status=ENGINE,
            display="Nothing happens.",
            reasons=[f"{type(exc).__name__}: {exc}"],
            turn=turn if turn is not None else state.turn,
            action_id=action.id,
        )

    action.completed = True
    use_turn = turn if turn is not None else state.turn
    state.history.append({"turn": use_turn, "action": action.id})
    display = render_display_text(action, state.world, action.display) if action.display else ""
    lines = [line for line in [display, *extra_lines] if line]
    if not lines:
        lines = ["Done."]
    return CommandResult(
        status=EXECUTED,
        display="\n".join(lines),
        state_delta=applied,
        turn=use_turn,
        action_id=action.id,
    )


# --- default observations ----------------------------------------------------------


def describe_room(state: GameState) -> str:
    world = state.world
    player = world.require_player()
    room_id = world.room_of(player)
    if room_id is None:
        return "You are nowhere in particular."
    room = world.get(room_id)
    parts = [f"You are at the {room.canonical_name}."]
    if room.description:
        parts.append(room.description)
    contents = [
        world.name_of(child)
        for child in room.children
        if child != player
    ]
    if contents:
        parts.append("You see: " + ", ".join(contents) + ".")
    exits = [
        f"{direction} to the {world.name_of(neighbour)}"
        for direction, neighbour in world.adjacency(room_id)
    ] if room_id in world.positions else []
    if exits:
        parts.append("Exits: " + "; ".join(exits) + ".")
    return "\n".join(parts)


def describe_inventory(state: GameState) -> str:
    world = state.world
    player = world.get(world.require_player())
    names = [world.name_of(child) for child in player.children]
    if not names:
        return "You are carrying nothing."
    return "You are carrying: " + ", ".join(names) + "."


# --- the dispatcher -----------------------------------------------------------------


def step(text: str, state: GameState, llm=None) -> CommandResult:
    """Advance the game by one command."""
    state.turn += 1
    turn = state.turn
    intent = parse_command(text, state)

    if intent.kind == "look":
        return CommandResult(status=EXECUTED, display=describe_room(state), turn=turn)
    if intent.kind == "inventory":
        return CommandResult(status=EXECUTED, display=describe_inventory(state), turn=turn)
    if intent.kind == "go":
        return _step_go(intent, state, turn)
    if intent.kind == "story":
        action = state.registry.get(intent.action_id)
        return _fire(action, state, turn)
    if intent.kind == "dynamic":
        return _step_dynamic(intent, state, turn, llm)
    if intent.kind == "ambiguous":
        return CommandResult(status=ENGINE, display=intent.message or "Which one?", turn=turn)

    if intent.verb and intent.object_surface:
        display = f"You see no {intent.object_surface} to {intent.verb}."
    elif intent.verb:
        display = f"You don't know how to just {intent.verb}."
    else:
        display = intent.message or "I don't understand that."
    return CommandResult(status=UNKNOWN, display=display, turn=turn)


def _step_go(intent: Intent, state: GameState, turn: int) -> CommandResult:
    world = state.world
    player = world.require_player()
    current = world.room_of(player)

    if intent.direction is not None:
        neighbours = dict(world.adjacency(current)) if current in world.positions else {}
        dest = neighbours.get(intent.direction)
        if dest is None:
            return CommandResult(
                status=BLOCKED,
                display=f"You can't go {intent.direction} from here.",
                reasons=[f"there is no room to the {intent.direction}"],
                turn=turn,
            )
    else:
        try:
            dest = resolve_surface(
                world, intent.room_surface, kinds=(NodeKind.ROOM,), learn_alias=False
            )
        except EngineError:
            return CommandResult(
                status=BLOCKED,
                display=f"You know of no place called '{intent.room_surface}'.",
                reasons=[f"unknown destination {intent.room_surface!r}"],
                turn=turn,
            )
    if dest == current:
        return CommandResult(
            status=EXECUTED,
            display=f"You are already at the {world.name_of(dest)}.",
            turn=turn,
        )
    world.move_node(player, dest)
    arrival = f"You go to the {world.name_of(dest)}."
    return CommandResult(
        status=EXECUTED,
        display=arrival + "\n" + describe_room(state),
        state_delta=[f"move {world.name_of(player)} to {world.name_of(dest)}"],
        turn=turn,
    )


def _fire(action: CompiledAction, state: GameState, turn: int) -> CommandResult:
    failures = check_preconditions(action, state)
    if failures:
        return CommandResult(
            status=BLOCKED,
            display="You can't do that yet.",
            reasons=[reason for _, reason in failures],
            turn=turn,
            action_id=action.id,
        )
    return execute_action(action, state, turn=turn)


def _step_dynamic(intent: Intent, state: GameState, turn: int, llm) -> CommandResult:
    from . import dynamic  # deferred: dynamic imports this module's types

    if llm is None:
        return CommandResult(
            status=ENGINE,
            display="You can't improvise that right now (no storyteller available).",
            turn=turn,
        )
    try:
        outcome = dynamic.generate_dynamic_action(intent.verb, intent.object_id, state, llm)
    except EngineError as exc:
        return CommandResult(
            status=ENGINE,
            display="You can't improvise that right now.",
            reasons=[f"{type(exc).__name__}: {exc}"],
            turn=turn,
        )
    if outcome.action is None:
        name = state.world.name_of(intent.object_id) if intent.object_id in state.world.nodes else intent.object_surface
        return CommandResult(
            status=ENGINE,
            display=f"You can't {intent.verb} the {name}.",
            reasons=[outcome.failure] if outcome.failure else [],
            turn=turn,
        )
    # Retry dispatch once now that the action exists.
    retry = parse_command(intent.verb + " " + (intent.object_surface or ""), state)
    if retry.kind == "story" and retry.action_id is not None:
        return _fire(state.registry.get(retry.action_id), state, turn)
    return _fire(outcome.action, state, turn)
