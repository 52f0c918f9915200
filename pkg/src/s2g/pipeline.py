"""End-to-end build: story text -> annotated events -> world -> playable game.

Each stage is usable on its own (the eval harness and tests call them
separately); :func:`initialize_game` chains them for the CLI.
"""

from __future__ import annotations

import json
import logging
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .compiler import ActionRegistry, CompilationReport, compile_story
from .errors import GenerationError, SchemaError
from .ir import ActionSpec
from .llm import LlmGateway, spec_validator, validate_sentences
from .prompts import PromptKind
from .runtime import GameState, StoryRecord
from .textnorm import normalize_sentence
from .world import NodeKind, WorldGraph

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

log = logging.getLogger(__name__)

MIN_EVENTS = 5
MAX_EVENTS = 18
MIN_QUEST_STEPS = 2
MAX_QUEST_STEPS = 6

FALLBACK_ROOM = "start"
FALLBACK_PLAYER = "player"


@dataclass
class StoryRequest:
    """What the user wants a game about."""

    title: str
    quest: list[str]
    description: str = ""
    note: str = ""

    def __post_init__(self) -> None:
        self.title = self.title.strip()
        self.quest = [step.strip() for step in self.quest if step.strip()]
        if not self.title:
            raise SchemaError("request needs a title", field="title")
        if not MIN_QUEST_STEPS <= len(self.quest) <= MAX_QUEST_STEPS:
            raise SchemaError(
                f"quest needs {MIN_QUEST_STEPS}-{MAX_QUEST_STEPS} steps, "
                f"got {len(self.quest)}",
                field="quest",
            )

    @classmethod
    def from_dict(cls, doc: dict) -> "StoryRequest":
        if not isinstance(doc, dict):
            raise SchemaError("request must be a JSON object")
        unknown = set(doc) - {"title", "quest", "description", "note"}
        if unknown:
            raise SchemaError(f"unknown request fields: {sorted(unknown)}")
        quest = doc.get("quest")
        if not isinstance(quest, list) or not all(isinstance(s, str) for s in quest):
            raise SchemaError("quest must be a list of strings", field="quest")
        return cls(
            title=str(doc.get("title", "")),
            quest=quest,
            description=str(doc.get("description", "")),
            note=str(doc.get("note", "")),
        )

    @classmethod
    def from_path(cls, path: str | Path) -> "StoryRequest":
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix.lower() == ".toml":
            doc = tomllib.loads(raw.decode("utf-8"))
        else:
            doc = json.loads(raw.decode("utf-8"))
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "quest": list(self.quest),
            "description": self.description,
            "note": self.note,
        }


def generate_story(request: StoryRequest, llm: LlmGateway) -> list[str]:
    """Produce the ordered event sentences for a request.

    A response with the wrong number of events earns exactly one follow-up
    attempt with the problem spelled out; a second miss is an error.
    """
    variables = {
        "title": request.title,
        "quest": "; ".join(request.quest),
        "description": request.description or "(none)",
        "note": request.note or "(none)",
    }
    sentences = llm.complete(PromptKind.STORY_GEN, variables, validate_sentences)
    if MIN_EVENTS <= len(sentences) <= MAX_EVENTS:
        return sentences

    log.warning("story came back with %d events; asking again", len(sentences))
    retry_vars = dict(variables)
    retry_vars["note"] = (
        f"{variables['note']} IMPORTANT: your previous attempt had "
        f"{len(sentences)} events; respond with between {MIN_EVENTS} and "
        f"{MAX_EVENTS} events."
    ).strip()
    sentences = llm.complete(PromptKind.STORY_GEN, retry_vars, validate_sentences)
    if MIN_EVENTS <= len(sentences) <= MAX_EVENTS:
        return sentences
    raise GenerationError(
        f"story generation produced {len(sentences)} events twice; "
        f"expected {MIN_EVENTS}-{MAX_EVENTS}"
    )


def annotate_events(
    sentences: list[str], llm: LlmGateway
) -> tuple[list[ActionSpec | None], list[str]]:
    """Annotate each sentence independently; a hopeless sentence yields None.

    Preceding events that point at the sentence itself (or repeat an earlier
    entry) are dropped here; events that match nothing surface later as
    compile failures.
    """
    specs: list[ActionSpec | None] = []
    warnings: list[str] = []
    for index, sentence in enumerate(sentences):
        previous = (
            "\n".join(f"{j + 1}. {s}" for j, s in enumerate(sentences[:index]))
            or "(none)"
        )
        try:
            spec = llm.complete(
                PromptKind.ANNOTATE,
                {"previous": previous, "sentence": sentence},
                spec_validator(strict=llm.config.strict_specs),
            )
        except GenerationError as exc:
            warnings.append(f"sentence {index}: annotation failed: {exc}")
            specs.append(None)
            continue

        spec = spec.copy()
        if not spec.input.strip():
            spec.input = sentence
        self_key = normalize_sentence(sentence)
        kept: list[str] = []
        seen: set[str] = set()
        for event in spec.preceding_events:
            key = normalize_sentence(event)
            if key == self_key:
                warnings.append(
                    f"sentence {index}: dropped self-referential preceding event"
                )
                continue
            if key in seen:
                continue
            seen.add(key)
            kept.append(event)
        spec.preceding_events = kept
        specs.append(spec)
    return specs, warnings


def build_world(
    specs: list[ActionSpec | None],
    sentences: list[str],
    seed: int,
) -> tuple[WorldGraph, ActionRegistry, CompilationReport]:
    """Stand up the world and compile the story into it.

    The first room any spec mentions anchors the map at the origin and holds
    the player; everything else is created while compiling, in story order.
    """
    rng = random.Random(seed)
    world = WorldGraph()

    first_room = next(
        (spec.rooms[0] for spec in specs if spec is not None and spec.rooms),
        FALLBACK_ROOM,
    )
    room_id = world.add_node(first_room, NodeKind.ROOM)
    world.place_room(room_id, rng=rng)

    player_name = next(
        (spec.player for spec in specs if spec is not None and spec.player.strip()),
        FALLBACK_PLAYER,
    )
    world.add_node(player_name, NodeKind.PLAYER, parent=room_id)

    registry, report = compile_story(specs, world, rng=rng, sentences=sentences)
    world.validate()
    return world, registry, report


@dataclass
class BuildResult:
    state: GameState
    report: CompilationReport
    sentences: list[str]
    request: StoryRequest
    warnings: list[str] = field(default_factory=list)


def initialize_game(
    request: StoryRequest, llm: LlmGateway, seed: int = 0
) -> BuildResult:
    """Run the whole build: generate, annotate, compile, wire up a game."""
    sentences = generate_story(request, llm)
    specs, warnings = annotate_events(sentences, llm)
    world, registry, report = build_world(specs, sentences, seed)

    story = [
        StoryRecord(
            index=entry.index,
            sentence=entry.sentence,
            action_id=entry.action_id,
            error_type=entry.error_type,
            reason=entry.reason,
        )
        for entry in report.entries
    ]
    state = GameState(world=world, registry=registry, seed=seed, story=story)
    return BuildResult(
        state=state,
        report=report,
        sentences=sentences,
        request=request,
        warnings=warnings,
    )
