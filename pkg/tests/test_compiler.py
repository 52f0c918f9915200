"""Binding specs to the world: reference resolution, compilation, rollbacks."""

from __future__ import annotations

import random

import pytest

from s2g.compiler import (
    ActionRegistry,
    BoundAttribute,
    BoundInventory,
    BoundLocation,
    BoundPreceding,
    CompiledAction,
    CompileFailure,
    OpMove,
    OpSet,
    bind_references,
    compile_action,
    compile_story,
    resolve_surface,
)
from s2g.errors import MatchMiss, ObjectMisidentification, UnknownObject
from s2g.ir import ActionSpec
from s2g.world import NodeKind, WorldGraph


def spec_for(**overrides) -> ActionSpec:
    base = dict(
        input="The adventurer picks up the torch at the camp.",
        player="adventurer",
        rooms=["camp"],
        items=["torch"],
        base_form="pick up the {items[0]} at the {rooms[0]}",
        display="You take the {items[0]}.",
        fundamental_preconditions=[
            "{{player} at {rooms[0]}}",
            "{{items[0]} at {rooms[0]}}",
        ],
        effects=["{Move {items[0]} to {inventory}}"],
        complete_sentence="pick up the torch at the camp",
    )
    base.update(overrides)
    return ActionSpec(**base)


def seeded_world():
    world = WorldGraph()
    camp = world.add_node("camp", NodeKind.ROOM)
    world.place_room(camp)
    world.add_node("adventurer", NodeKind.PLAYER, parent=camp)
    return world, camp


# --- resolve_surface -----------------------------------------------------------------


def test_resolve_surface_learns_adjective_aliases():
    world, camp = seeded_world()
    key = world.add_node("key", NodeKind.ITEM, parent=camp)
    assert resolve_surface(world, "the metallic key") == key
    assert "metallic key" in world.get(key).aliases
    # next time it's a plain alias hit
    assert world.resolve_reference("metallic key") == key


def test_resolve_surface_bare_head_binds_without_learning():
    world, camp = seeded_world()
    iron = world.add_node("iron key", NodeKind.ITEM, parent=camp)
    assert resolve_surface(world, "key") == iron
    assert world.get(iron).aliases == set()


def test_resolve_surface_ambiguous_heads_misidentify():
    world, camp = seeded_world()
    world.add_node("iron key", NodeKind.ITEM, parent=camp)
    world.add_node("brass key", NodeKind.ITEM, parent=camp)
    with pytest.raises(ObjectMisidentification):
        resolve_surface(world, "key")
    with pytest.raises(UnknownObject):
        resolve_surface(world, "silver crown")


# --- binding -------------------------------------------------------------------------


def test_bind_references_creates_missing_nodes_in_the_action_room():
    world, camp = seeded_world()
    rng = random.Random(5)
    spec = spec_for(rooms=["camp", "forest"], items=["torch"], characters=["guard"])
    binding = bind_references(spec, world, rng=rng)
    assert binding.refs["rooms[0]"] == camp
    forest = binding.refs["rooms[1]"]
    assert world.name_of(forest) == "forest"
    assert forest in world.positions  # new rooms land on the grid
    torch = binding.refs["items[0]"]
    assert world.get(torch).parent == camp
    assert world.get(binding.refs["characters[0]"]).parent == camp
    assert binding.room == camp


def test_bind_references_applies_initial_attributes_to_created_nodes_only():
    world, camp = seeded_world()
    existing = world.add_node("bush", NodeKind.ITEM, parent=camp)
    world.set_attribute(existing, "burning", True)
    spec = spec_for(
        items=["bush", "tinder"],
        attributes={"bush.burning": False, "tinder.dry": True},
        effects=[],
        fundamental_preconditions=[],
    )
    binding = bind_references(spec, world, rng=random.Random(0))
    # the pre-existing bush keeps its state; the fresh tinder gets seeded
    assert world.get_attribute(existing, "burning") is True
    assert world.get_attribute(binding.refs["items[1]"], "dry") is True


# --- compile_action --------------------------------------------------------------------


def test_compile_action_success_shape():
    world, camp = seeded_world()
    registry = ActionRegistry()
    action = compile_action(
        spec_for(), world, registry, rng=random.Random(1), sentence_index=0
    )
    assert isinstance(action, CompiledAction)
    assert action.id == "a0001"
    assert action.origin == "story"
    assert [type(c) for c in action.checkers] == [BoundLocation, BoundLocation]
    assert [type(o) for o in action.operations] == [OpMove]
    assert registry.get(action.id) is action
    # surfaces come back normalized (articles and punctuation removed)
    surfaces = action.surface_forms(world)
    assert "pick up torch at camp" in surfaces
    assert "adventurer picks up torch at camp" in surfaces


def test_surface_forms_include_stripped_room_suffix():
    world, camp = seeded_world()
    registry = ActionRegistry()
    action = compile_action(spec_for(), world, registry, rng=random.Random(1))
    got = action.surface_forms(world)
    assert "pick up torch" in got  # "at the {rooms[0]}" trimmed, then normalized


def test_inventory_and_attribute_checks_bind():
    world, camp = seeded_world()
    registry = ActionRegistry()
    spec = spec_for(
        input="The adventurer sets the bush on fire at the forest.",
        rooms=["forest"],
        items=["bush", "torch"],
        base_form="set the {items[0]} on fire at the {rooms[0]}",
        fundamental_preconditions=[
            "{{player} at {rooms[0]}}",
            "{{items[1]} in {inventory}}",
        ],
        additional_preconditions=["{{items[1]}.burning == True}"],
        attributes={"bush.burning": False},
        effects=["{Set {items[0]}.burning to True}"],
        complete_sentence="",
    )
    action = compile_action(spec, world, registry, rng=random.Random(2))
    assert isinstance(action, CompiledAction)
    inv = [c for c in action.checkers if isinstance(c, BoundInventory)]
    assert len(inv) == 1 and inv[0].holder == world.player
    gates = [c for c in action.checkers if isinstance(c, BoundAttribute)]
    assert len(gates) == 1 and gates[0].op == "==" and gates[0].value is True
    sets = [o for o in action.operations if isinstance(o, OpSet)]
    assert sets and sets[0].key == "burning"


def test_preceding_events_must_match_a_compiled_sentence():
    world, camp = seeded_world()
    registry = ActionRegistry()
    first = compile_action(spec_for(), world, registry, rng=random.Random(3))
    follow = spec_for(
        input="The adventurer waves the torch.",
        base_form="wave the {items[0]}",
        fundamental_preconditions=[],
        effects=[],
        preceding_events=["The adventurer picks up the torch at the camp."],
        complete_sentence="",
    )
    action = compile_action(follow, world, registry, rng=random.Random(3))
    assert isinstance(action, CompiledAction)
    assert action.preceding_ids == [first.id]
    (pre,) = [c for c in action.checkers if isinstance(c, BoundPreceding)]
    assert pre.action_id == first.id

    miss = spec_for(
        input="The adventurer hums.",
        base_form="hum a tune",
        fundamental_preconditions=[],
        effects=[],
        preceding_events=["The adventurer dances a jig."],
        complete_sentence="",
    )
    failure = compile_action(miss, world, registry, rng=random.Random(3))
    assert isinstance(failure, CompileFailure)
    assert failure.error_type == "MatchMiss"


def test_sentence_matching_ignores_articles_and_punctuation():
    world, camp = seeded_world()
    registry = ActionRegistry()
    first = compile_action(spec_for(), world, registry, rng=random.Random(4))
    follow = spec_for(
        input="The adventurer shields the flame.",
        base_form="shield the flame",
        fundamental_preconditions=[],
        effects=[],
        preceding_events=["adventurer picks up torch at camp"],
        complete_sentence="",
    )
    action = compile_action(follow, world, registry, rng=random.Random(4))
    assert isinstance(action, CompiledAction)
    assert action.preceding_ids == [first.id]


def test_compile_failure_restores_the_world_exactly():
    world, camp = seeded_world()
    registry = ActionRegistry()
    before = world.snapshot()
    doomed = spec_for(
        rooms=["camp", "forest"],  # the new room must be rolled back too
        items=["torch", "flint"],
        effects=["{Teleport {player} to {rooms[1]}}"],
    )
    failure = compile_action(doomed, world, registry, rng=random.Random(6))
    assert isinstance(failure, CompileFailure)
    assert failure.error_type == "EffectGrammarError"
    assert world.snapshot() == before
    assert len(registry) == 0

    # ids minted after the rollback carry straight on: no gaps
    ok = compile_action(spec_for(), world, registry, rng=random.Random(6))
    assert isinstance(ok, CompiledAction)
    torch = ok.bound_refs["items[0]"]
    assert torch.endswith("-0003")  # room, player, then the torch


def test_room_attribute_and_forbidden_ops_fail_at_compile_time():
    world, camp = seeded_world()
    registry = ActionRegistry()
    cases = {
        "{Set {rooms[0]}.dark to True}": "RoomAttributeForbidden",
        "{Move {rooms[0]} to {inventory}}": "InvalidOperation",
        "{Delete {player}}": "InvalidOperation",
    }
    for effect, error_type in cases.items():
        failure = compile_action(
            spec_for(effects=[effect], complete_sentence=""),
            world,
            registry,
            rng=random.Random(7),
        )
        assert isinstance(failure, CompileFailure), effect
        assert failure.error_type == error_type
    assert len(registry) == 0


def test_misidentified_reference_is_reported():
    world, camp = seeded_world()
    world.add_node("iron key", NodeKind.ITEM, parent=camp)
    world.add_node("brass key", NodeKind.ITEM, parent=camp)
    registry = ActionRegistry()
    failure = compile_action(
        spec_for(items=["key"], complete_sentence=""),
        world,
        registry,
        rng=random.Random(8),
    )
    assert isinstance(failure, CompileFailure)
    assert failure.error_type == "ObjectMisidentification"


# --- compile_story ---------------------------------------------------------------------


def test_compile_story_reports_per_sentence():
    world, camp = seeded_world()
    specs = [
        spec_for(),
        None,  # annotation failed upstream
        spec_for(
            input="The adventurer hums.",
            base_form="hum a tune",
            fundamental_preconditions=[],
            effects=[],
            preceding_events=["The adventurer dances a jig."],
            complete_sentence="",
        ),
    ]
    sentences = [s.input if s else "The adventurer mumbles." for s in specs]
    registry, report = compile_story(specs, world, rng=random.Random(9), sentences=sentences)
    assert report.total == 3
    assert report.compiled == 1
    assert report.rate == pytest.approx(1 / 3)
    assert not report.fully_compiled
    statuses = [(e.status, e.error_type) for e in report.entries]
    assert statuses == [
        ("success", None),
        ("failure", "SchemaError"),
        ("failure", "MatchMiss"),
    ]
    table = report.to_table()
    assert "MatchMiss" in table and "1/3" in table


# --- the registry ----------------------------------------------------------------------


def test_registry_round_trip():
    world, camp = seeded_world()
    registry = ActionRegistry()
    compile_action(spec_for(), world, registry, rng=random.Random(10))
    follow = spec_for(
        input="The adventurer waves the torch.",
        base_form="wave the {items[0]}",
        fundamental_preconditions=[],
        effects=[],
        preceding_events=["The adventurer picks up the torch at the camp."],
        complete_sentence="",
    )
    compile_action(follow, world, registry, rng=random.Random(10))
    registry.get("a0001").completed = True

    rebuilt = ActionRegistry.from_list(registry.to_list())
    assert rebuilt.to_list() == registry.to_list()
    assert rebuilt.get("a0001").completed is True
    assert rebuilt.find_sentence("adventurer waves torch") == "a0002"
    # alias sentences survive the round trip
    assert rebuilt.find_sentence("pick up the torch at the camp") == "a0001"
    assert rebuilt.new_id() == "a0003"


def test_registry_story_actions_keep_story_order_and_skip_dynamic():
    world, camp = seeded_world()
    registry = ActionRegistry()
    a = compile_action(spec_for(), world, registry, rng=random.Random(11), sentence_index=0)
    b = compile_action(
        spec_for(
            input="The adventurer drops the torch.",
            base_form="drop the {items[0]}",
            fundamental_preconditions=[],
            effects=["{Move {items[0]} to {rooms[0]}}"],
            complete_sentence="",
        ),
        world,
        registry,
        rng=random.Random(11),
        origin="dynamic",
    )
    assert [x.id for x in registry.story_actions()] == [a.id]
    assert {x.id for x in registry} == {a.id, b.id}
    assert registry.referencing(a.bound_refs["items[0]"]) == [a, b]
