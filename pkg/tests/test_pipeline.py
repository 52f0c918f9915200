"""Request validation and the generate -> annotate -> build chain."""

from __future__ import annotations

import hashlib
import json
from types import SimpleNamespace

import pytest

from s2g import jsonio

from s2g.errors import GenerationError, SchemaError
from s2g.pipeline import (
    FALLBACK_PLAYER,
    FALLBACK_ROOM,
    StoryRequest,
    annotate_events,
    build_world,
    generate_story,
    initialize_game,
)
from s2g.prompts import PromptKind

from conftest import FIXTURES, build_fixture_game, load_json, story_seed


# --- requests -----------------------------------------------------------------------


def test_request_strips_and_keeps_fields():
    req = StoryRequest(title="  The Dig  ", quest=[" find shovel ", "", "dig "])
    assert req.title == "The Dig"
    assert req.quest == ["find shovel", "dig"]
    assert req.to_dict() == {
        "title": "The Dig",
        "quest": ["find shovel", "dig"],
        "description": "",
        "note": "",
    }


@pytest.mark.parametrize(
    "title,quest,field",
    [
        ("", ["a b", "c d"], "title"),
        ("x", ["only one"], "quest"),
        ("x", [f"step {i}" for i in range(7)], "quest"),
    ],
)
def test_request_bounds(title, quest, field):
    with pytest.raises(SchemaError) as err:
        StoryRequest(title=title, quest=quest)
    assert err.value.field == field


def test_request_from_dict_rejects_unknowns():
    with pytest.raises(SchemaError, match="seed"):
        StoryRequest.from_dict({"title": "x", "quest": ["a", "b"], "seed": 3})
    with pytest.raises(SchemaError):
        StoryRequest.from_dict({"title": "x", "quest": "not a list"})
    with pytest.raises(SchemaError):
        StoryRequest.from_dict(["not", "an", "object"])


def test_request_from_path_json_and_toml(tmp_path):
    as_json = tmp_path / "req.json"
    as_json.write_text('{"title": "Dig", "quest": ["find", "dig deep"]}')
    as_toml = tmp_path / "req.toml"
    as_toml.write_text('title = "Dig"\nquest = ["find", "dig deep"]\n')
    assert StoryRequest.from_path(as_json) == StoryRequest.from_path(as_toml)


def test_fixture_requests_all_load():
    for slug_dir in sorted(FIXTURES.iterdir()):
        req_path = slug_dir / "request.json"
        if req_path.exists():
            StoryRequest.from_path(req_path)


# --- story generation ------------------------------------------------------------------


def test_generate_story_retries_a_short_story_once(gateway):
    request = StoryRequest(
        title="The Fogbound Bell",
        quest=["find the bell", "ring it before the fleet sails"],
        description="A harbor town swallowed by fog.",
    )
    sentences = generate_story(request, gateway)
    assert len(sentences) == 6
    assert sentences[0] == "The pilot arrives at the quay."
    assert sentences[-1] == "The pilot signals the fleet."


class StubGateway:
    """Hands back canned validator inputs, one per call."""

    def __init__(self, docs):
        self.docs = list(docs)
        self.calls = []
        self.config = SimpleNamespace(strict_specs=False)

    def complete(self, kind, variables, validator):
        self.calls.append((kind, dict(variables)))
        return validator(json.dumps(self.docs.pop(0)))


def sentences_doc(n):
    return {"sentences": [f"The scout walks step {i}." for i in range(n)]}


def test_generate_story_gives_up_after_two_tries():
    gw = StubGateway([sentences_doc(2), sentences_doc(25)])
    request = StoryRequest(title="Loop", quest=["go", "return"])
    with pytest.raises(GenerationError, match="25 events twice"):
        generate_story(request, gw)
    assert [kind for kind, _ in gw.calls] == [PromptKind.STORY_GEN] * 2
    assert "previous attempt had 2 events" in gw.calls[1][1]["note"]


def test_generate_story_accepts_first_good_answer():
    gw = StubGateway([sentences_doc(5)])
    assert len(generate_story(StoryRequest(title="x", quest=["a", "b"]), gw)) == 5
    assert gw.calls[0][1]["note"] == "(none)"


# --- annotation --------------------------------------------------------------------------


def spec_doc(sentence, preceding=(), **overrides):
    doc = {
        "input": sentence,
        "output": {
            "player": "scout",
            "subject": "trail",
            "rooms": ["trail"],
            "items": [],
            "characters": [],
            "attributes": {},
            "preceding_events": list(preceding),
            "annotated_form": "{player} walks the {rooms[0]}",
            "base_form": "walk the {rooms[0]}",
            "fundamental_preconditions": ["{{player} at {rooms[0]}}"],
            "additional_preconditions": [],
            "attribute_effects": [],
            "effects": [],
            "display": "You walk.",
            "complete_sentence": "walk the trail",
        },
    }
    doc["output"].update(overrides)
    return doc


def test_annotate_drops_self_and_duplicate_preceding_events():
    first = "The scout walks the trail."
    second = "The scout camps by the river."
    gw = StubGateway(
        [
            spec_doc(first),
            spec_doc(
                second,
                preceding=[
                    "The scout camps by the river.",  # itself, punctuation aside
                    "The scout walks the trail.",
                    "the scout walks the trail",  # duplicate modulo normalization
                ],
            ),
        ]
    )
    specs, warnings = annotate_events([first, second], gw)
    assert specs[1].preceding_events == ["The scout walks the trail."]
    assert warnings == ["sentence 1: dropped self-referential preceding event"]
    # the prompt for sentence 1 lists sentence 0 as prior context
    assert gw.calls[1][1]["previous"] == f"1. {first}"
    assert gw.calls[0][1]["previous"] == "(none)"


def test_annotate_backfills_blank_input():
    # a spec that somehow arrives with a blank input inherits the sentence
    class BlankingGateway(StubGateway):
        def complete(self, kind, variables, validator):
            spec = super().complete(kind, variables, validator)
            spec.input = "   "
            return spec

    sentence = "The scout walks the trail."
    gw = BlankingGateway([spec_doc(sentence)])
    specs, warnings = annotate_events([sentence], gw)
    assert specs[0].input == sentence
    assert not warnings
    assert gw.calls[0][0] == PromptKind.ANNOTATE


def test_annotate_survives_a_hopeless_sentence():
    class FailingGateway(StubGateway):
        def complete(self, kind, variables, validator):
            raise GenerationError("model stayed invalid")

    specs, warnings = annotate_events(["The scout shrugs."], FailingGateway([]))
    assert specs == [None]
    assert warnings == ["sentence 0: annotation failed: model stayed invalid"]


# --- world build ------------------------------------------------------------------------


def test_build_world_fallbacks_when_nothing_compiled():
    world, registry, report = build_world([None], ["The scout shrugs."], seed=1)
    names = {world.name_of(nid) for nid in world.nodes}
    assert {FALLBACK_ROOM, FALLBACK_PLAYER} <= names
    assert len(registry.actions) == 0
    assert report.total == 1 and report.compiled == 0


def test_build_world_anchors_first_spec_room():
    from s2g.ir import ActionSpec

    spec = ActionSpec(
        input="The scout walks the trail.",
        player="scout",
        rooms=["trail"],
        base_form="walk the {rooms[0]}",
        display="ok",
        fundamental_preconditions=["{{player} at {rooms[0]}}"],
    )
    world, registry, report = build_world([spec], [spec.input], seed=2)
    trail = world.resolve_reference("trail")
    assert world.positions[trail] == (0, 0)
    assert world.room_of(world.player) == trail
    assert report.fully_compiled


# --- full build -------------------------------------------------------------------------


def test_initialize_game_is_deterministic(manifest, gateway):
    slug = "guardians-heirloom"
    seed = story_seed(manifest, slug)
    fresh = build_fixture_game(slug, seed, gateway)
    again = build_fixture_game(slug, seed)
    assert fresh.warnings == []
    assert fresh.state.to_dict() == again.state.to_dict()
    assert fresh.report.to_dict() == again.report.to_dict()
    assert [r.sentence for r in fresh.state.story] == fresh.sentences
    digest = hashlib.sha256(jsonio.dumps(fresh.state.to_dict()).encode()).hexdigest()
    assert digest == load_json(FIXTURES / "expected" / "hashes.json")[f"{slug}/game.json"]
