"""The build/validate/eval/play commands, run end to end on replay fixtures."""

from __future__ import annotations

import pytest
from click.testing import CliRunner

from s2g import jsonio
from s2g.cli import main

from conftest import FIXTURES, LLM_FIXTURES, REPO, load_json, story_seed


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def built_dir(tmp_path_factory, runner):
    """One CLI build of the guardians story, shared by the read-only tests."""
    manifest = load_json(FIXTURES / "manifest.json")
    out = tmp_path_factory.mktemp("build")
    result = runner.invoke(
        main,
        [
            "build",
            str(FIXTURES / "guardians-heirloom" / "request.json"),
            "-o",
            str(out),
            "--seed",
            str(story_seed(manifest, "guardians-heirloom")),
            "--fixtures",
            str(LLM_FIXTURES),
            "--mode",
            "replay",
        ],
    )
    assert result.exit_code == 0, result.output
    return out


def test_build_writes_the_three_artifacts(built_dir):
    for name in ("game.json", "report.json", "story.json"):
        assert (built_dir / name).exists()
    report = load_json(built_dir / "report.json")
    assert report["stats"]["fully_compiled"] is True
    assert report["request"]["title"]
    story = load_json(built_dir / "story.json")
    assert len(story["sentences"]) == report["stats"]["total"]


def test_build_output_names_every_sentence(built_dir, runner):
    # the compilation table lands on stdout, one row per sentence
    manifest = load_json(FIXTURES / "manifest.json")
    result = runner.invoke(
        main,
        [
            "build",
            str(FIXTURES / "guardians-heirloom" / "request.json"),
            "-o",
            str(built_dir),
            "--seed",
            str(story_seed(manifest, "guardians-heirloom")),
            "--fixtures",
            str(LLM_FIXTURES),
            "--mode",
            "replay",
        ],
    )
    assert result.exit_code == 0
    assert "wrote" in result.output
    story = load_json(built_dir / "story.json")
    assert all(sentence in result.output for sentence in story["sentences"])


def test_build_rejects_missing_fixture_dir(runner, tmp_path):
    result = runner.invoke(
        main,
        [
            "build",
            str(FIXTURES / "guardians-heirloom" / "request.json"),
            "-o",
            str(tmp_path),
            "--fixtures",
            str(tmp_path / "nope"),
            "--mode",
            "replay",
        ],
    )
    assert result.exit_code != 0


def test_validate_single_game(built_dir, runner):
    result = runner.invoke(main, ["validate", str(built_dir / "game.json")])
    assert result.exit_code == 0, result.output
    assert "[executed]" in result.output
    assert "walkthrough:" in result.output


def test_validate_all_reports_every_story(runner):
    result = runner.invoke(
        main, ["validate", "--all", "--fixtures-root", str(FIXTURES)]
    )
    assert result.exit_code == 0, result.output
    lines = [line for line in result.output.splitlines() if line.strip()]
    manifest = load_json(FIXTURES / "manifest.json")
    assert len(lines) == len(manifest["stories"])
    assert all(" ok " in line for line in lines)


def test_validate_without_arguments_is_a_usage_error(runner):
    result = runner.invoke(main, ["validate"])
    assert result.exit_code == 2
    assert "pass a game.json or use --all" in result.output


def test_eval_writes_artifacts_and_summary(runner, tmp_path, arena):
    game_path = tmp_path / "arena.json"
    arena.save(game_path)
    result = runner.invoke(
        main,
        [
            "eval",
            str(game_path),
            "-o",
            str(tmp_path),
            "--fixtures",
            str(LLM_FIXTURES),
            "--mode",
            "replay",
        ],
    )
    assert result.exit_code == 0, result.output
    summary = load_json(tmp_path / "dynamic_eval.json")
    assert summary == load_json(FIXTURES / "expected" / "dynamic_eval.json")
    logs = jsonio.load_jsonl(tmp_path / "dynamic_log.jsonl")
    assert len([rec for rec in logs if rec["depth"] == 0]) == summary["total"]
    cards = load_json(tmp_path / "review_cards.json")
    assert len(cards) == summary["successes"]
    assert "dynamic actions:" in result.output


def test_play_scripted_session(built_dir, runner, tmp_path):
    save_path = tmp_path / "played.json"
    result = runner.invoke(
        main,
        [
            "play",
            str(built_dir / "game.json"),
            "--fixtures",
            str(LLM_FIXTURES),
            "--mode",
            "replay",
            "--save",
            str(save_path),
        ],
        input="look\npick up the torch\ninventory\nquit\n",
    )
    assert result.exit_code == 0, result.output
    assert "You are at the" in result.output
    assert "torch" in result.output
    assert f"saved to {save_path}" in result.output
    from s2g.runtime import GameState

    assert GameState.load(save_path).turn == 3


def test_play_with_misconfigured_gateway_warns_and_plays(built_dir, runner):
    result = runner.invoke(
        main,
        ["play", str(built_dir / "game.json")],
        input="look\nquit\n",
        env={"S2G_LLM_MODE": "offline"},
    )
    assert result.exit_code == 0, result.output
    assert "(no model access" in result.output
    assert "You are at the" in result.output


def test_play_degrades_when_fixture_store_is_empty(built_dir, runner, tmp_path):
    missing = tmp_path / "missing"
    missing.mkdir()
    result = runner.invoke(
        main,
        [
            "play",
            str(built_dir / "game.json"),
            "--fixtures",
            str(missing),
            "--mode",
            "replay",
        ],
        input="polish the torch\nquit\n",
    )
    assert result.exit_code == 0, result.output
    assert "You can't improvise that right now." in result.output
    assert "FixtureMiss" in result.output
