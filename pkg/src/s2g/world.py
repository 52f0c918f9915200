"""Ground-truth game state: a containment forest of typed nodes plus a room grid.

Rooms are the roots of the containment forest and live on an unbounded 2-D
grid; items, characters, and containers hang underneath them (or underneath
the player's inventory).  Attributes are either booleans or small integers,
except for the reserved ``money`` slot which is an unbounded non-negative
balance kept in a separate ledger.
"""

from __future__ import annotations

import copy
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import (
    AmbiguousName,
    AmbiguousReference,
    ContainmentViolation,
    InvalidOperation,
    RoomAttributeForbidden,
    UnknownObject,
    ValueOutOfRange,
)
from .textnorm import normalize_name

NodeId = str
AttributeValue = bool | int

ATTR_MIN = 0
ATTR_MAX = 10
MONEY_KEY = "money"

_KEY_RE = re.compile(r"^[a-z_][a-z0-9_]*$")
_ID_SUFFIX_RE = re.compile(r"(\d+)$")


class NodeKind(str, Enum):
    PLAYER = "player"
    CHARACTER = "character"
    ITEM = "item"
    ROOM = "room"
    CONTAINER = "container"


class GridPos(NamedTuple):
    x: int
    y: int


#: Direction name -> grid delta.  North is +y, east is +x.
DIRECTIONS: dict[str, tuple[int, int]] = {
    "north": (0, 1),
    "south": (0, -1),
    "east": (1, 0),
    "west": (-1, 0),
}

# Which parent kinds may hold a child of a given kind.
_ALLOWED_PARENTS: dict[NodeKind, set[NodeKind]] = {
    NodeKind.PLAYER: {NodeKind.ROOM},
    NodeKind.CHARACTER: {NodeKind.ROOM, NodeKind.PLAYER, NodeKind.CONTAINER},
    NodeKind.ITEM: {NodeKind.ROOM, NodeKind.PLAYER, NodeKind.CONTAINER},
    NodeKind.CONTAINER: {NodeKind.ROOM, NodeKind.PLAYER, NodeKind.CONTAINER},
    NodeKind.ROOM: {NodeKind.ROOM},
}


@dataclass
class Node:
    id: NodeId
    canonical_name: str
    kind: NodeKind
    description: str = ""
    aliases: set[str] = field(default_factory=set)
    attributes: dict[str, AttributeValue] = field(default_factory=dict)
    parent: NodeId | None = None
    children: list[NodeId] = field(default_factory=list)

    def matches(self, normalized_surface: str) -> bool:
        return normalized_surface == self.canonical_name or normalized_surface in self.aliases

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.canonical_name,
            "kind": self.kind.value,
            "description": self.description,
            "aliases": sorted(self.aliases),
            "attributes": dict(sorted(self.attributes.items())),
            "parent": self.parent,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Node":
        return cls(
            id=data["id"],
            canonical_name=data["name"],
            kind=NodeKind(data["kind"]),
            description=data.get("description", ""),
            aliases=set(data.get("aliases", [])),
            attributes=dict(data.get("attributes", {})),
            parent=data.get("parent"),
        )


def _validate_attribute_value(key: str, value: AttributeValue) -> AttributeValue:
    # bool is a subclass of int, so check it first.
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if key == MONEY_KEY:
            if value < 0:
                raise ValueOutOfRange(f"{MONEY_KEY} cannot be negative (got {value})")
            return value
        if not ATTR_MIN <= value <= ATTR_MAX:
            raise ValueOutOfRange(
                f"attribute {key!r} must be between {ATTR_MIN} and {ATTR_MAX} (got {value})"
            )
        return value
    raise ValueOutOfRange(f"attribute {key!r} must be a boolean or integer (got {value!r})")


class WorldGraph:
    """The containment forest, the room grid, and the money ledger."""

    def __init__(self) -> None:
        self.nodes: dict[NodeId, Node] = {}
        self.grid: dict[GridPos, NodeId] = {}
        self.positions: dict[NodeId, GridPos] = {}
        self.placement_order: list[NodeId] = []
        self.player: NodeId | None = None
        self.currency: dict[NodeId, int] = {}
        self._seq = 0

    # -- construction --------------------------------------------------

    def _new_id(self, kind: NodeKind) -> NodeId:
        self._seq += 1
        return f"{kind.value}-{self._seq:04d}"

    def add_node(
        self,
        name: str,
        kind: NodeKind,
        description: str = "",
        parent: NodeId | None = None,
        aliases: Iterable[str] = (),
    ) -> NodeId:
        """Create a node and attach it to the forest.

        Rooms may be roots (``parent=None``); every other kind needs an
        existing parent that is allowed to contain it.
        """
        canonical = normalize_name(name)
        if not canonical:
            raise InvalidOperation("node name cannot be empty")
        if kind is NodeKind.PLAYER and self.player is not None:
            raise InvalidOperation("the world already has a player")

        if parent is None:
            if kind is not NodeKind.ROOM:
                raise ContainmentViolation(f"{kind.value} nodes need a parent")
        else:
            parent_node = self.get(parent)
            if parent_node.kind not in _ALLOWED_PARENTS[kind]:
                raise ContainmentViolation(
                    f"a {parent_node.kind.value} cannot contain a {kind.value}"
                )

        if kind is NodeKind.ROOM:
            for node in self.nodes.values():
                if node.kind is NodeKind.ROOM and node.canonical_name == canonical:
                    raise AmbiguousName(f"a room named {canonical!r} already exists")
        elif parent is not None:
            for sibling_id in self.nodes[parent].children:
                if self.nodes[sibling_id].canonical_name == canonical:
                    raise AmbiguousName(
                        f"{self.nodes[parent].canonical_name!r} already contains "
                        f"a node named {canonical!r}"
                    )

        node_id = self._new_id(kind)
        node = Node(
            id=node_id,
            canonical_name=canonical,
            kind=kind,
            description=description,
            aliases={normalize_name(a) for a in aliases if normalize_name(a)},
        )
        self.nodes[node_id] = node
        if parent is not None:
            node.parent = parent
            self.nodes[parent].children.append(node_id)
        if kind is NodeKind.PLAYER:
            self.player = node_id
        if kind in (NodeKind.PLAYER, NodeKind.CHARACTER):
            self.currency[node_id] = 0
        self._check_invariants()
        return node_id

    # -- lookups ---------------------------------------------------------

    def get(self, node_id: NodeId) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownObject(f"no node with id {node_id!r}") from None

    def require_player(self) -> NodeId:
        if self.player is None:
            raise InvalidOperation("the world has no player")
        return self.player

    def kind_of(self, node_id: NodeId) -> NodeKind:
        return self.get(node_id).kind

    def name_of(self, node_id: NodeId) -> str:
        return self.get(node_id).canonical_name

    def by_kind(self, *kinds: NodeKind) -> list[NodeId]:
        wanted = set(kinds)
        return [nid for nid, node in self.nodes.items() if node.kind in wanted]

    def rooms(self) -> list[NodeId]:
        return self.by_kind(NodeKind.ROOM)

    def room_of(self, node_id: NodeId) -> NodeId | None:
        """The nearest room at or above ``node_id``."""
        current: NodeId | None = node_id
        seen = 0
        while current is not None:
            node = self.get(current)
            if node.kind is NodeKind.ROOM:
                return current
            current = node.parent
            seen += 1
            if seen > len(self.nodes):  # pragma: no cover - guarded by invariants
                raise ContainmentViolation("containment cycle detected")
        return None

    def subtree_ids(self, root_id: NodeId) -> list[NodeId]:
        """``root_id`` plus everything beneath it, in DFS order."""
        self.get(root_id)
        out: list[NodeId] = []
        stack = [root_id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    def contains(self, holder_id: NodeId, node_id: NodeId) -> bool:
        """Is ``node_id`` strictly inside ``holder_id``'s subtree?"""
        current = self.get(node_id).parent
        while current is not None:
            if current == holder_id:
                return True
            current = self.nodes[current].parent
        return False

    def resolve_reference(
        self,
        surface: str,
        scope: NodeId | None = None,
        kinds: Iterable[NodeKind] | None = None,
    ) -> NodeId:
        """Resolve a surface form to exactly one node.

        ``scope`` limits the search to a room's subtree plus the player's
        inventory; ``kinds`` limits the node kinds considered.  Raises
        :class:`UnknownObject` on zero matches and :class:`AmbiguousReference`
        when several nodes answer to the name.
        """
        norm = normalize_name(surface)
        if not norm:
            raise UnknownObject("empty reference")
        wanted = set(kinds) if kinds is not None else None

        pool: list[NodeId]
        if scope is None:
            pool = list(self.nodes)
        else:
            in_scope = set(self.subtree_ids(scope))
            if self.player is not None:
                in_scope.update(self.subtree_ids(self.player))
            pool = [nid for nid in self.nodes if nid in in_scope]

        matches = [
            nid
            for nid in pool
            if self.nodes[nid].matches(norm)
            and (wanted is None or self.nodes[nid].kind in wanted)
        ]
        if not matches:
            raise UnknownObject(f"nothing here answers to {surface!r}")
        if len(matches) > 1:
            names = [f"{self.nodes[m].canonical_name} ({m})" for m in matches]
            raise AmbiguousReference(surface, names)
        return matches[0]

    # -- mutation ---------------------------------------------------------

    def move_node(self, node_id: NodeId, dest_id: NodeId) -> None:
        node = self.get(node_id)
        dest = self.get(dest_id)
        if node.kind is NodeKind.ROOM:
            raise InvalidOperation("rooms are placed on the grid, not moved")
        if dest.kind not in _ALLOWED_PARENTS[node.kind]:
            raise ContainmentViolation(
                f"a {dest.kind.value} cannot contain a {node.kind.value}"
            )
        if dest_id == node_id or self.contains(node_id, dest_id):
            raise ContainmentViolation("cannot move a node into its own subtree")
        if node.parent is not None:
            self.nodes[node.parent].children.remove(node_id)
        node.parent = dest_id
        dest.children.append(node_id)
        self._check_invariants()

    def set_attribute(self, node_id: NodeId, key: str, value: AttributeValue) -> None:
        node = self.get(node_id)
        key = key.strip().lower().replace(" ", "_")
        if not _KEY_RE.match(key):
            raise InvalidOperation(f"bad attribute key {key!r}")
        if node.kind is NodeKind.ROOM:
            raise RoomAttributeForbidden(
                f"rooms carry no attributes ({node.canonical_name}.{key})"
            )
        value = _validate_attribute_value(key, value)
        if key == MONEY_KEY:
            if node.kind not in (NodeKind.PLAYER, NodeKind.CHARACTER):
                raise InvalidOperation("only players and characters carry money")
            self.currency[node_id] = int(value)
        else:
            node.attributes[key] = value
        self._check_invariants()

    def get_attribute(
        self, node_id: NodeId, key: str, default: AttributeValue | None = None
    ) -> AttributeValue | None:
        node = self.get(node_id)
        key = key.strip().lower().replace(" ", "_")
        if key == MONEY_KEY and node.kind in (NodeKind.PLAYER, NodeKind.CHARACTER):
            return self.currency.get(node_id, 0)
        return node.attributes.get(key, default)

    def remove_node(self, node_id: NodeId) -> list[NodeId]:
        """Delete a node and its whole subtree; returns the removed ids."""
        node = self.get(node_id)
        if node.kind is NodeKind.ROOM:
            raise InvalidOperation("rooms cannot be removed")
        if node.kind is NodeKind.PLAYER:
            raise InvalidOperation("the player cannot be removed")
        doomed = self.subtree_ids(node_id)
        if self.player in doomed:
            raise InvalidOperation("the player cannot be removed with its container")
        if node.parent is not None:
            self.nodes[node.parent].children.remove(node_id)
        for nid in doomed:
            self.nodes.pop(nid)
            self.currency.pop(nid, None)
        self._check_invariants()
        return doomed

    # -- the grid ---------------------------------------------------------

    def place_room(
        self,
        room_id: NodeId,
        anchor: NodeId | None = None,
        rng: random.Random | None = None,
    ) -> GridPos:
        """Place a room at the origin, or adjacent to ``anchor``.

        When all four cells around the anchor are taken, earlier-placed rooms
        are retried in reverse placement order until a free neighbouring cell
        turns up.
        """
        room = self.get(room_id)
        if room.kind is not NodeKind.ROOM:
            raise InvalidOperation(f"only rooms go on the grid, not {room.kind.value}s")
        if room_id in self.positions:
            raise InvalidOperation(f"room {room.canonical_name!r} is already placed")

        if anchor is None:
            if self.grid:
                raise InvalidOperation("an anchor room is required once the grid is non-empty")
            pos = GridPos(0, 0)
            self._occupy(room_id, pos)
            return pos

        if anchor not in self.positions:
            raise InvalidOperation("anchor room is not on the grid")
        if rng is None:
            raise InvalidOperation("random placement needs an rng")

        anchors = [anchor] + [r for r in reversed(self.placement_order) if r != anchor]
        for candidate in anchors:
            base = self.positions[candidate]
            deltas = rng.sample(list(DIRECTIONS.values()), len(DIRECTIONS))
            for dx, dy in deltas:
                pos = GridPos(base.x + dx, base.y + dy)
                if pos not in self.grid:
                    self._occupy(room_id, pos)
                    return pos
        raise InvalidOperation("no free cell found")  # pragma: no cover - unreachable

    def _occupy(self, room_id: NodeId, pos: GridPos) -> None:
        self.grid[pos] = room_id
        self.positions[room_id] = pos
        self.placement_order.append(room_id)
        self._check_invariants()

    def adjacency(self, room_id: NodeId) -> list[tuple[str, NodeId]]:
        """Grid neighbours of a placed room as ``(direction, room_id)`` pairs."""
        if room_id not in self.positions:
            raise InvalidOperation("room is not on the grid")
        pos = self.positions[room_id]
        out: list[tuple[str, NodeId]] = []
        for direction, (dx, dy) in DIRECTIONS.items():
            neighbour = self.grid.get(GridPos(pos.x + dx, pos.y + dy))
            if neighbour is not None:
                out.append((direction, neighbour))
        return out

    # -- serialization ------------------------------------------------------

    def snapshot(self) -> dict:
        """A JSON-ready view of the graph with stable ordering."""
        return {
            "nodes": [self.nodes[nid].to_dict() for nid in sorted(self.nodes)],
            "grid": [
                {"x": pos.x, "y": pos.y, "room": rid}
                for pos, rid in sorted(self.grid.items())
            ],
            "placement_order": list(self.placement_order),
            "player": self.player,
            "currency": [
                {"id": nid, "amount": amount}
                for nid, amount in sorted(self.currency.items())
            ],
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "WorldGraph":
        world = cls()
        for entry in data["nodes"]:
            node = Node.from_dict(entry)
            world.nodes[node.id] = node
        # Children lists are derived from parents, in id order.
        for nid in sorted(world.nodes):
            parent = world.nodes[nid].parent
            if parent is not None:
                world.nodes[parent].children.append(nid)
        for cell in data["grid"]:
            pos = GridPos(cell["x"], cell["y"])
            world.grid[pos] = cell["room"]
            world.positions[cell["room"]] = pos
        world.placement_order = list(data.get("placement_order", []))
        if not world.placement_order:
            world.placement_order = [cell["room"] for cell in data["grid"]]
        world.player = data.get("player")
        world.currency = {row["id"]: row["amount"] for row in data.get("currency", [])}
        suffixes = [0]
        for nid in world.nodes:
            m = _ID_SUFFIX_RE.search(nid)
            if m:
                suffixes.append(int(m.group(1)))
        world._seq = max(suffixes)
        world._check_invariants()
        return world

    def clone(self) -> "WorldGraph":
        return copy.deepcopy(self)

    def restore(self, snapshot: "WorldGraph") -> None:
        """Adopt a snapshot's state in place (rollback after a failed mutation).

        The snapshot is consumed: its containers become this graph's.
        """
        self.nodes = snapshot.nodes
        self.grid = snapshot.grid
        self.positions = snapshot.positions
        self.placement_order = snapshot.placement_order
        self.player = snapshot.player
        self.currency = snapshot.currency
        self._seq = snapshot._seq

    # -- invariants ----------------------------------------------------------

    def _check_invariants(self) -> None:
        players = [n for n in self.nodes.values() if n.kind is NodeKind.PLAYER]
        assert len(players) <= 1, "more than one player"
        assert self.player == (players[0].id if players else None), "player id out of sync"

        seen_positions = set(self.grid)
        assert len(seen_positions) == len(self.positions), "grid/position mismatch"
        for pos, rid in self.grid.items():
            assert self.positions.get(rid) == pos, "grid/position disagreement"

        for node in self.nodes.values():
            if node.kind is NodeKind.ROOM:
                assert not node.attributes, "rooms carry no attributes"
            for key, value in node.attributes.items():
                if isinstance(value, bool):
                    continue
                assert ATTR_MIN <= value <= ATTR_MAX, f"{key} out of range"
            if node.parent is not None:
                parent = self.nodes.get(node.parent)
                assert parent is not None, "dangling parent"
                assert node.id in parent.children, "parent does not list child"
            for child in node.children:
                assert self.nodes[child].parent == node.id, "child does not list parent"

        for amount in self.currency.values():
            assert amount >= 0, "negative money"

        # Parent chains terminate at a root room (no cycles).
        for node in self.nodes.values():
            current = node
            hops = 0
            while current.parent is not None:
                current = self.nodes[current.parent]
                hops += 1
                assert hops <= len(self.nodes), "containment cycle"
            assert current.kind is NodeKind.ROOM, (
                f"{node.canonical_name} is not rooted in a room"
            )

    def validate(self) -> None:
        """Strict whole-world check: invariants plus grid-rooted chains."""
        self._check_invariants()
        assert self.player is not None, "the world has no player"
        for node in self.nodes.values():
            if node.kind is NodeKind.ROOM:
                continue
            room = self.room_of(node.id)
            assert room is not None, f"{node.canonical_name} has no room above it"
            top: Node = self.nodes[room]
            while top.parent is not None:
                top = self.nodes[top.parent]
            assert top.id in self.positions, f"{top.canonical_name} is not on the grid"
