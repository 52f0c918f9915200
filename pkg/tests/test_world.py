"""Containment forest, room grid, and attribute rules."""

from __future__ import annotations

import random

import pytest

from s2g.errors import (
    AmbiguousName,
    AmbiguousReference,
    ContainmentViolation,
    InvalidOperation,
    RoomAttributeForbidden,
    UnknownObject,
    ValueOutOfRange,
)
from s2g.world import DIRECTIONS, GridPos, NodeKind, WorldGraph


def simple_world():
    world = WorldGraph()
    camp = world.add_node("camp", NodeKind.ROOM)
    world.place_room(camp)
    player = world.add_node("adventurer", NodeKind.PLAYER, parent=camp)
    torch = world.add_node("torch", NodeKind.ITEM, parent=camp)
    chest = world.add_node("iron chest", NodeKind.CONTAINER, parent=camp)
    scout = world.add_node("old scout", NodeKind.CHARACTER, parent=camp)
    return world, camp, player, torch, chest, scout


# --- construction ------------------------------------------------------------------


def test_ids_are_stable_and_kind_prefixed():
    world, camp, player, torch, chest, scout = simple_world()
    assert camp == "room-0001"
    assert player == "player-0002"
    assert torch == "item-0003"
    assert world.kind_of(chest) is NodeKind.CONTAINER


def test_names_normalize_on_entry():
    world = WorldGraph()
    room = world.add_node("  The  Great   Hall ", NodeKind.ROOM)
    assert world.name_of(room) == "great hall"


def test_add_node_rejects_empty_names_and_orphans():
    world = WorldGraph()
    with pytest.raises(InvalidOperation):
        world.add_node("   ", NodeKind.ROOM)
    with pytest.raises(ContainmentViolation):
        world.add_node("torch", NodeKind.ITEM)  # items need a parent


def test_single_player():
    world, camp, *_ = simple_world()
    with pytest.raises(InvalidOperation):
        world.add_node("impostor", NodeKind.PLAYER, parent=camp)


def test_containment_kind_rules():
    world, camp, player, torch, chest, scout = simple_world()
    with pytest.raises(ContainmentViolation):
        world.add_node("stowaway", NodeKind.CHARACTER, parent=torch)
    with pytest.raises(ContainmentViolation):
        world.add_node("coin", NodeKind.ITEM, parent=scout)  # characters don't hold
    # players and containers do
    world.add_node("map", NodeKind.ITEM, parent=chest)
    world.add_node("knife", NodeKind.ITEM, parent=player)


def test_duplicate_room_names_rejected_globally():
    world, *_ = simple_world()
    with pytest.raises(AmbiguousName):
        world.add_node("camp", NodeKind.ROOM)


def test_duplicate_sibling_names_rejected():
    world, camp, *_ = simple_world()
    with pytest.raises(AmbiguousName):
        world.add_node("Torch", NodeKind.ITEM, parent=camp)
    # the same name under a different parent is fine
    other = world.add_node("cellar", NodeKind.ROOM)
    world.add_node("torch", NodeKind.ITEM, parent=other)


# --- moving and removing -----------------------------------------------------------


def test_move_node_reparents():
    world, camp, player, torch, *_ = simple_world()
    world.move_node(torch, player)
    assert world.get(torch).parent == player
    assert torch in world.get(player).children
    assert torch not in world.get(camp).children
    assert world.contains(player, torch)
    assert world.room_of(torch) == camp


def test_rooms_do_not_move():
    world, camp, player, *_ = simple_world()
    with pytest.raises(InvalidOperation):
        world.move_node(camp, player)


def test_move_rejects_own_subtree():
    world, camp, player, torch, chest, _ = simple_world()
    sack = world.add_node("sack", NodeKind.CONTAINER, parent=chest)
    with pytest.raises(ContainmentViolation):
        world.move_node(chest, sack)
    with pytest.raises(ContainmentViolation):
        world.move_node(chest, chest)


def test_remove_node_takes_subtree():
    world, camp, player, torch, chest, scout = simple_world()
    coin = world.add_node("coin", NodeKind.ITEM, parent=chest)
    gone = world.remove_node(chest)
    assert set(gone) == {chest, coin}
    with pytest.raises(UnknownObject):
        world.get(coin)
    assert chest not in world.get(camp).children


def test_player_and_rooms_cannot_be_removed():
    world, camp, player, torch, chest, scout = simple_world()
    with pytest.raises(InvalidOperation):
        world.remove_node(player)
    with pytest.raises(InvalidOperation):
        world.remove_node(camp)
    # and nothing can ever swallow the player in the first place
    cart = world.add_node("cart", NodeKind.CONTAINER, parent=camp)
    with pytest.raises(ContainmentViolation):
        world.move_node(player, cart)


def test_removed_characters_drop_their_money():
    world, camp, *_ = simple_world()
    rival = world.add_node("rival", NodeKind.CHARACTER, parent=camp)
    world.set_attribute(rival, "money", 5)
    world.remove_node(rival)
    assert rival not in world.currency


# --- attributes ---------------------------------------------------------------------


def test_attribute_values_are_bool_or_small_int():
    world, _, _, torch, *_ = simple_world()
    world.set_attribute(torch, "burning", True)
    world.set_attribute(torch, "heat", 10)
    assert world.get_attribute(torch, "burning") is True
    assert world.get_attribute(torch, "heat") == 10
    with pytest.raises(ValueOutOfRange):
        world.set_attribute(torch, "heat", 11)
    with pytest.raises(ValueOutOfRange):
        world.set_attribute(torch, "heat", -1)
    with pytest.raises(ValueOutOfRange):
        world.set_attribute(torch, "label", "hot")


def test_attribute_keys_normalize_and_validate():
    world, _, _, torch, *_ = simple_world()
    world.set_attribute(torch, " Fuel Level ", 3)
    assert world.get_attribute(torch, "fuel_level") == 3
    with pytest.raises(InvalidOperation):
        world.set_attribute(torch, "no/slash", 1)


def test_rooms_carry_no_attributes():
    world, camp, *_ = simple_world()
    with pytest.raises(RoomAttributeForbidden):
        world.set_attribute(camp, "haunted", True)


def test_money_is_a_ledger_not_an_attribute():
    world, _, player, torch, _, scout = simple_world()
    assert world.get_attribute(player, "money") == 0  # everyone starts broke
    world.set_attribute(player, "money", 99)  # unbounded above
    assert world.get_attribute(player, "money") == 99
    assert world.currency[player] == 99
    assert "money" not in world.get(player).attributes
    with pytest.raises(ValueOutOfRange):
        world.set_attribute(scout, "money", -1)
    with pytest.raises(InvalidOperation):
        world.set_attribute(torch, "money", 3)


def test_get_attribute_default():
    world, _, _, torch, *_ = simple_world()
    assert world.get_attribute(torch, "burning") is None
    assert world.get_attribute(torch, "burning", default=False) is False


# --- reference resolution -------------------------------------------------------------


def test_resolve_reference_by_name_and_alias():
    world, camp, player, torch, chest, scout = simple_world()
    assert world.resolve_reference("the torch") == torch
    world.get(torch).aliases.add("brand")
    assert world.resolve_reference("Brand") == torch


def test_resolve_reference_scope_and_kinds():
    world, camp, player, torch, chest, scout = simple_world()
    cellar = world.add_node("cellar", NodeKind.ROOM)
    candle = world.add_node("candle", NodeKind.ITEM, parent=cellar)
    with pytest.raises(UnknownObject):
        world.resolve_reference("candle", scope=camp)
    assert world.resolve_reference("candle", scope=cellar) == candle
    with pytest.raises(UnknownObject):
        world.resolve_reference("torch", kinds=(NodeKind.CHARACTER,))
    # carried items stay in scope wherever the player is
    world.move_node(torch, player)
    assert world.resolve_reference("torch", scope=cellar) == torch


def test_resolve_reference_ambiguity():
    world, camp, *_ = simple_world()
    cellar = world.add_node("cellar", NodeKind.ROOM)
    world.add_node("rat", NodeKind.CHARACTER, parent=camp)
    world.add_node("rat", NodeKind.CHARACTER, parent=cellar)
    with pytest.raises(AmbiguousReference):
        world.resolve_reference("rat")


# --- the grid -----------------------------------------------------------------------


def test_first_room_lands_at_origin_and_needs_no_anchor():
    world = WorldGraph()
    first = world.add_node("start", NodeKind.ROOM)
    assert world.place_room(first) == GridPos(0, 0)
    second = world.add_node("annex", NodeKind.ROOM)
    with pytest.raises(InvalidOperation):
        world.place_room(second)  # anchor required once the grid is non-empty
    with pytest.raises(InvalidOperation):
        world.place_room(second, anchor=first)  # and so is an rng


def test_placement_is_adjacent_and_injective():
    rng = random.Random(7)
    world = WorldGraph()
    rooms = []
    for i in range(30):
        rid = world.add_node(f"room {i}", NodeKind.ROOM)
        if not rooms:
            world.place_room(rid)
        else:
            world.place_room(rid, anchor=rng.choice(rooms), rng=rng)
        rooms.append(rid)
    assert len(world.grid) == len(rooms)
    assert len(set(world.positions.values())) == len(rooms)
    placed: list[GridPos] = []
    for rid in world.placement_order:
        pos = world.positions[rid]
        if placed:
            assert min(abs(pos.x - p.x) + abs(pos.y - p.y) for p in placed) == 1
        placed.append(pos)


def test_placement_falls_back_when_anchor_is_surrounded():
    rng = random.Random(3)
    world = WorldGraph()
    hub = world.add_node("hub", NodeKind.ROOM)
    world.place_room(hub)
    for i in range(4):
        arm = world.add_node(f"arm {i}", NodeKind.ROOM)
        world.place_room(arm, anchor=hub, rng=rng)
    assert len(world.adjacency(hub)) == 4
    extra = world.add_node("outpost", NodeKind.ROOM)
    pos = world.place_room(extra, anchor=hub, rng=rng)
    others = [p for rid, p in world.positions.items() if rid != extra]
    assert min(abs(pos.x - p.x) + abs(pos.y - p.y) for p in others) == 1


def test_adjacency_reports_direction_pairs():
    world = WorldGraph()
    west = world.add_node("west wing", NodeKind.ROOM)
    world.place_room(west)
    east = world.add_node("east wing", NodeKind.ROOM)
    pos = world.place_room(east, anchor=west, rng=random.Random(1))
    (direction, neighbour), = world.adjacency(west)
    assert neighbour == east
    dx, dy = DIRECTIONS[direction]
    assert (pos.x, pos.y) == (dx, dy)


def test_rooms_only_on_grid():
    world, camp, player, *_ = simple_world()
    with pytest.raises(InvalidOperation):
        world.place_room(player)
    with pytest.raises(InvalidOperation):
        world.place_room(camp)  # already placed


# --- snapshots ----------------------------------------------------------------------


def test_snapshot_round_trip():
    world, camp, player, torch, chest, scout = simple_world()
    world.set_attribute(torch, "burning", True)
    world.set_attribute(scout, "money", 4)
    world.move_node(torch, player)
    rebuilt = WorldGraph.from_snapshot(world.snapshot())
    assert rebuilt.snapshot() == world.snapshot()
    assert rebuilt.player == player
    assert rebuilt.get_attribute(scout, "money") == 4
    # id sequence continues after the highest existing suffix
    new_id = rebuilt.add_node("lamp", NodeKind.ITEM, parent=camp)
    assert new_id not in world.nodes


def test_clone_is_independent():
    world, camp, player, torch, *_ = simple_world()
    double = world.clone()
    double.move_node(torch, player)
    assert world.get(torch).parent == camp


def test_restore_rolls_back_in_place():
    world, camp, player, torch, *_ = simple_world()
    before = world.clone()
    world.move_node(torch, player)
    world.set_attribute(torch, "burning", True)
    world.restore(before)
    assert world.get(torch).parent == camp
    assert world.get_attribute(torch, "burning") is None
    world.validate()


def test_validate_catches_unplaced_room():
    world = WorldGraph()
    room = world.add_node("void", NodeKind.ROOM)
    world.add_node("ghost", NodeKind.PLAYER, parent=room)
    with pytest.raises(AssertionError):
        world.validate()


# --- randomized sanity (the long-haul version runs in the acceptance suite) ----------


def random_ops(world: WorldGraph, rng: random.Random, steps: int) -> None:
    rooms = [n for n in world.nodes if world.kind_of(n) is NodeKind.ROOM]
    counter = 0
    for _ in range(steps):
        op = rng.randrange(5)
        movable = [
            n
            for n in world.nodes
            if world.kind_of(n) in (NodeKind.ITEM, NodeKind.CONTAINER, NodeKind.CHARACTER)
        ]
        try:
            if op == 0:
                counter += 1
                parent = rng.choice(movable + rooms) if movable else rng.choice(rooms)
                kind = rng.choice((NodeKind.ITEM, NodeKind.CONTAINER, NodeKind.CHARACTER))
                world.add_node(f"thing {counter}", kind, parent=parent)
            elif op == 1 and movable:
                world.move_node(rng.choice(movable), rng.choice(movable + rooms))
            elif op == 2 and movable:
                world.set_attribute(rng.choice(movable), "charge", rng.randint(-2, 12))
            elif op == 3 and movable:
                world.remove_node(rng.choice(movable))
            elif op == 4:
                counter += 1
                rid = world.add_node(f"room {counter}", NodeKind.ROOM)
                world.place_room(rid, anchor=rng.choice(rooms), rng=rng)
                rooms.append(rid)
        except (ContainmentViolation, InvalidOperation, ValueOutOfRange, AmbiguousName):
            pass  # rejected ops must leave the world untouched; validate() below proves it


@pytest.mark.parametrize("seed", range(25))
def test_random_operations_preserve_invariants(seed):
    world, *_ = simple_world()
    random_ops(world, random.Random(seed), steps=120)
    world.validate()
    assert len(set(world.positions.values())) == len(world.positions)
