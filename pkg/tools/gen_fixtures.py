#!/usr/bin/env python3
"""Build the replay fixture corpus.

Runs the real pipeline in record mode against the scripted responses in
``corpus.py``, asserts every outcome matches the authored plan exactly, then
re-runs everything in replay mode and proves the rebuilt artifacts are
byte-identical.  Run from the repository root:

    python3 tools/gen_fixtures.py
"""

from __future__ import annotations

import hashlib
import json
import random
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tools"))

import corpus

from s2g import jsonio
from s2g.compiler import ActionRegistry, BoundAttribute
from s2g.dynamic import generate_dynamic_action
from s2g.evaluation import dynamic_eval, story_stats, suggest_verbs, walkthrough_validate
from s2g.llm import (
    MODE_RECORD,
    MODE_REPLAY,
    GatewayConfig,
    LlmGateway,
    validate_attr_default,
)
from s2g.pipeline import StoryRequest, annotate_events, build_world, generate_story, initialize_game
from s2g.prompts import PromptKind
from s2g.runtime import GameState, check_preconditions, execute_action
from s2g.world import NodeKind, WorldGraph

FIXTURES = ROOT / "fixtures"
LLM_DIR = FIXTURES / "llm"
EXPECTED = FIXTURES / "expected"


def make_gateway(mode: str, script=None) -> LlmGateway:
    gw = LlmGateway(
        GatewayConfig(mode=mode, fixtures=LLM_DIR, strict_specs=(mode == MODE_REPLAY))
    )
    if script is not None:
        gw._call_endpoint = script
    return gw


def sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def game_text(state: GameState) -> str:
    return jsonio.dumps(state.to_dict())


def log_text(logs: list[dict]) -> str:
    return "".join(
        json.dumps(rec, sort_keys=True, ensure_ascii=True) + "\n" for rec in logs
    )


# --- stories -------------------------------------------------------------------


def build_story(story: corpus.Story, gw: LlmGateway):
    request = StoryRequest.from_dict(story.request())
    return initialize_game(request, gw, seed=story.seed)


def check_story_plan(story: corpus.Story, build) -> dict:
    report = build.report
    assert report.total == len(story.sentences), story.slug
    got = {e.index: e.error_type for e in report.entries if e.status == "failure"}
    assert got == story.failures, (
        f"{story.slug}: failures {got} != planned {story.failures}"
    )
    walk = walkthrough_validate(build.state)
    broken = [s.to_dict() for s in walk.steps if s.status != "executed"]
    assert walk.ok, f"{story.slug} walkthrough broke: {broken}"
    return {"ok": walk.ok, "executed": walk.executed, "total": len(walk.steps)}


# --- arena ---------------------------------------------------------------------


def check_arena(result) -> None:
    plan = corpus.expected_dynamic_plan()
    assert result.total == plan["total"], (result.total, plan["total"])
    assert result.successes == plan["successes"], (
        result.successes,
        plan["successes"],
    )
    counts = result.category_counts()
    assert counts == {
        "new_object": plan["new_object"],
        "new_attribute": plan["new_attribute"],
        "preceding_event": plan["preceding_event"],
    }, counts

    failure_types: dict[str, int] = {}
    for attempt in result.attempts:
        if not attempt.ok:
            failure_types[attempt.failure] = failure_types.get(attempt.failure, 0) + 1
    assert failure_types == plan["failure_types"], failure_types

    rows = {(r["obj"], r["verb"]): r for r in corpus.DYN_ROWS}
    assert len(rows) == len(corpus.DYN_ROWS), "duplicate (object, verb) rows"
    seen = set()
    for attempt in result.attempts:
        key = (attempt.object_name, attempt.verb)
        row = rows[key]
        seen.add(key)
        expect_ok = row["plan"] not in corpus.FAIL_PLANS
        assert attempt.ok == expect_ok, (key, attempt.failure, attempt.failure_detail)
        if attempt.ok:
            assert attempt.categories["new_object"] == (row["plan"] == "attr2"), key
            assert attempt.categories["preceding_event"] == (
                row["plan"] in ("pre_story", "pre_child")
            ), key
            no_attr = row["plan"] in ("take", "display", "delete") or (
                row["plan"] == "money" and not row.get("key")
            )
            assert attempt.categories["new_attribute"] == (not no_attr), (
                key,
                attempt.categories,
            )
        else:
            assert attempt.failure == corpus.PLAN_FAILURE[row["plan"]], (
                key,
                attempt.failure,
            )
    assert seen == set(rows), sorted(set(rows) - seen)

    for name in corpus.OBJECT_ROOM:
        expected = [r["verb"] for r in corpus.DYN_ROWS if r["obj"] == name]
        assert result.verbs_by_object[name] == expected, (
            name,
            result.verbs_by_object[name],
        )


# --- special flows (exercised identically in record and replay) ------------------


def mini_state(player: str, room: str, seed: int, items=(), chars=()) -> GameState:
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


def run_specials(gw: LlmGateway) -> None:
    # a story that comes back too short earns exactly one retry
    sentences = generate_story(StoryRequest.from_dict(corpus.FOGBOUND_REQUEST), gw)
    assert len(sentences) == 6, sentences

    # a fresh attribute is retrofitted onto the story action it should gate
    specs, _ = annotate_events([corpus.BUCKET_FILL_SENTENCE], gw)
    world, registry, report = build_world(specs, [corpus.BUCKET_FILL_SENTENCE], seed=7)
    assert report.fully_compiled, report.to_dict()
    state = GameState(world=world, registry=registry, seed=7)
    bucket = state.world.resolve_reference("bucket")
    fill_id = next(iter(registry.actions))
    outcome = generate_dynamic_action("break", bucket, state, gw)
    assert outcome.ok, outcome.failure_detail
    assert outcome.retrofitted_ids == [fill_id], outcome.retrofitted_ids
    fill = state.registry.actions[fill_id]
    gates = [
        c
        for c in fill.checkers
        if isinstance(c, BoundAttribute) and c.node == bucket and c.key == "broken"
    ]
    assert len(gates) == 1 and gates[0].value is False, gates
    broke = execute_action(outcome.action, state)
    assert broke.status == "executed", broke.reasons
    unmet = [reason for _c, reason in check_preconditions(fill, state)]
    assert any("broken" in reason for reason in unmet), unmet

    # recursion stops at depth one: the grandchild request is dropped
    state = mini_state("squire", "courtyard", seed=13, items=["torch"], chars=["guard"])
    guard = state.world.resolve_reference("guard")
    outcome = generate_dynamic_action("startle", guard, state, gw)
    assert outcome.ok, outcome.failure_detail
    assert len(outcome.child_ids) == 1, outcome.child_ids
    child = state.registry.actions[outcome.child_ids[0]]
    assert child.preceding_ids == []
    child_record = state.dynamic_log[0]
    assert child_record["depth"] == 1
    assert any("dropped nested preceding" in w for w in child_record["warnings"])

    # two unmet preceding events mean two generated children
    state = mini_state("courier", "garage", seed=17, items=["car"])
    car = state.world.resolve_reference("car")
    outcome = generate_dynamic_action("drive", car, state, gw)
    assert outcome.ok, outcome.failure_detail
    assert len(outcome.child_ids) == 2, outcome.child_ids
    assert outcome.preceding_ids == outcome.child_ids
    state.world.resolve_reference("fuel can")  # created for the fuel child
    for key in ("fueled", "running", "driven"):
        assert state.world.get_attribute(car, key) is False, key

    # verb suggestions for an object no story action touches
    state = mini_state("scholar", "study", seed=19, items=["map"])
    verbs = suggest_verbs(state, state.world.resolve_reference("map"), gw)
    assert verbs == ["read", "fold", "tear"], verbs

    # authored attribute defaults, including two that need coercion downstream
    for (node, kind, key, value_type), response in corpus.SPECIAL_DEFAULTS.items():
        raw = gw.complete(
            PromptKind.ATTR_DEFAULT,
            {"node": node, "kind": kind, "key": key, "value_type": value_type},
            validate_attr_default,
        )
        assert raw == json.loads(response)["default"], (node, key, raw)

    # moving a held item back into the room
    state = mini_state("porter", "storeroom", seed=21)
    room_id = state.world.room_of(state.world.require_player())
    bag = state.world.add_node("bag", NodeKind.ITEM, parent=state.world.player)
    outcome = generate_dynamic_action("drop", bag, state, gw)
    assert outcome.ok, outcome.failure_detail
    dropped = execute_action(outcome.action, state)
    assert dropped.status == "executed", dropped.reasons
    assert state.world.get(bag).parent == room_id


# --- main ----------------------------------------------------------------------


def record_pass() -> dict:
    script = corpus.build_script()
    gw = make_gateway(MODE_RECORD, script)

    suite_rows = []
    walkthroughs = {}
    hashes = {}
    for story in corpus.stories():
        build = build_story(story, gw)
        walkthroughs[story.slug] = check_story_plan(story, build)
        suite_rows.append(
            {"slug": story.slug, "title": story.title, "seed": story.seed}
            | story_stats(build.report)
        )
        hashes[f"{story.slug}/game.json"] = sha(game_text(build.state))
        hashes[f"{story.slug}/report.json"] = sha(jsonio.dumps(build.report.to_dict()))

    total = sum(row["total"] for row in suite_rows)
    compiled = sum(row["compiled"] for row in suite_rows)
    aggregate = {"total": total, "compiled": compiled, "rate": round(compiled / total, 3)}
    assert aggregate == {"total": 83, "compiled": 79, "rate": 0.952}, aggregate

    arena_build = build_story(corpus.ARENA, gw)
    assert arena_build.report.fully_compiled, arena_build.report.to_dict()
    walkthroughs[corpus.ARENA.slug] = check_story_plan(corpus.ARENA, arena_build)
    result = dynamic_eval(arena_build.state, gw)
    check_arena(result)
    hashes[f"{corpus.ARENA.slug}/game.json"] = sha(game_text(arena_build.state))
    hashes["arena/dynamic_eval.json"] = sha(jsonio.dumps(result.to_dict()))
    hashes["arena/dynamic_log.jsonl"] = sha(log_text(result.logs))

    run_specials(gw)
    assert script.unmatched == [], script.unmatched

    # persist everything the tests will replay against
    for story in corpus.stories() + [corpus.ARENA]:
        slug_dir = FIXTURES / story.slug
        slug_dir.mkdir(parents=True, exist_ok=True)
        jsonio.dump_path(story.request(), slug_dir / "request.json")

    manifest = {
        "stories": [
            {
                "slug": story.slug,
                "seed": story.seed,
                "title": story.title,
                "sentences": len(story.sentences),
                "compiled": story.compiled,
                "failures": {str(i): t for i, t in sorted(story.failures.items())},
            }
            for story in corpus.stories()
        ],
        "arena": {
            "slug": corpus.ARENA.slug,
            "seed": corpus.ARENA.seed,
            "title": corpus.ARENA.title,
            "sentences": len(corpus.ARENA.sentences),
            "objects": len(corpus.OBJECT_ROOM),
            "attempts": result.total,
        },
    }
    jsonio.dump_path(manifest, FIXTURES / "manifest.json")
    jsonio.dump_path(
        {"stories": suite_rows, "aggregate": aggregate}, EXPECTED / "suite_table.json"
    )
    jsonio.dump_path(walkthroughs, EXPECTED / "walkthroughs.json")
    jsonio.dump_path(result.to_dict(), EXPECTED / "dynamic_eval.json")
    jsonio.dump_path(hashes, EXPECTED / "hashes.json")
    return hashes


def replay_pass(hashes: dict) -> None:
    for story in corpus.stories():
        build = build_story(story, make_gateway(MODE_REPLAY))
        check_story_plan(story, build)
        assert sha(game_text(build.state)) == hashes[f"{story.slug}/game.json"], story.slug
        assert (
            sha(jsonio.dumps(build.report.to_dict()))
            == hashes[f"{story.slug}/report.json"]
        ), story.slug

    gw = make_gateway(MODE_REPLAY)
    arena_build = build_story(corpus.ARENA, gw)
    result = dynamic_eval(arena_build.state, gw)
    check_arena(result)
    assert sha(game_text(arena_build.state)) == hashes[f"{corpus.ARENA.slug}/game.json"]
    assert sha(jsonio.dumps(result.to_dict())) == hashes["arena/dynamic_eval.json"]
    assert sha(log_text(result.logs)) == hashes["arena/dynamic_log.jsonl"]

    run_specials(make_gateway(MODE_REPLAY))


def main() -> None:
    for stale in [LLM_DIR, EXPECTED, *(FIXTURES / s.slug for s in corpus.stories())]:
        if stale.exists():
            shutil.rmtree(stale)
    arena_dir = FIXTURES / corpus.ARENA.slug
    if arena_dir.exists():
        shutil.rmtree(arena_dir)
    LLM_DIR.mkdir(parents=True)
    EXPECTED.mkdir(parents=True)

    hashes = record_pass()
    replay_pass(hashes)

    count = len(list(LLM_DIR.glob("*.json")))
    print(f"ok: {count} model fixtures recorded and replay-verified")
    print(f"    suite: 79/83 sentences compiled across {len(corpus.stories())} stories")
    plan = corpus.expected_dynamic_plan()
    print(f"    arena: {plan['successes']}/{plan['total']} dynamic attempts compiled")


if __name__ == "__main__":
    main()
