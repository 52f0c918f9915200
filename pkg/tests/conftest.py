"""Shared fixtures: repository paths, replay gateways, canned games."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from s2g.compiler import ActionRegistry
from s2g.llm import MODE_REPLAY, GatewayConfig, LlmGateway
from s2g.pipeline import StoryRequest, initialize_game
from s2g.runtime import GameState
from s2g.world import NodeKind, WorldGraph

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"
LLM_FIXTURES = FIXTURES / "llm"
EXPECTED = FIXTURES / "expected"


def load_json(path: Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def replay_gateway() -> LlmGateway:
    return LlmGateway(GatewayConfig(mode=MODE_REPLAY, fixtures=LLM_FIXTURES))


@pytest.fixture(name="gateway")
def gateway_fixture() -> LlmGateway:
    return replay_gateway()


@pytest.fixture(scope="session")
def manifest() -> dict:
    return load_json(FIXTURES / "manifest.json")


def story_seed(manifest: dict, slug: str) -> int:
    for story in manifest["stories"]:
        if story["slug"] == slug:
            return story["seed"]
    if manifest["arena"]["slug"] == slug:
        return manifest["arena"]["seed"]
    raise KeyError(slug)


def build_fixture_game(slug: str, seed: int, gateway: LlmGateway | None = None):
    request = StoryRequest.from_path(FIXTURES / slug / "request.json")
    return initialize_game(request, gateway or replay_gateway(), seed=seed)


@pytest.fixture(scope="session")
def guardians_build(manifest):
    slug = "guardians-heirloom"
    return build_fixture_game(slug, story_seed(manifest, slug))


@pytest.fixture
def guardians(guardians_build) -> GameState:
    return guardians_build.state.clone()


@pytest.fixture(scope="session")
def arena_build(manifest):
    slug = manifest["arena"]["slug"]
    return build_fixture_game(slug, story_seed(manifest, slug))


@pytest.fixture
def arena(arena_build) -> GameState:
    return arena_build.state.clone()


def mini_state(player: str, room: str, seed: int, items=(), chars=()) -> GameState:
    """A one-room world; mirrors how the replay fixtures were recorded."""
    world = WorldGraph()
    rng = random.Random(seed)
    room_id = world.add_node(room, NodeKind.ROOM)
    world.place_room(room_id, rng=rng)
    world.add_node(player, NodeKind.PLAYER, parent=room_id)
    for name in items:
        world.add_node(name, NodeKind.ITEM, parent=room_id)
    for name in chars:
        world.add_node(name, NodeKind.CHARACTER, parent=room_id)
    return GameState(world=world, registry=ActionRegistry(), seed=seed)
