"""Command-line entry points: build, validate, eval, play, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import jsonio, runtime
from .errors import EngineError, GatewayError
from .evaluation import (
    dynamic_eval,
    semantic_review_export,
    story_stats,
    walkthrough_validate,
)
from .llm import GatewayConfig, LlmGateway
from .pipeline import StoryRequest, initialize_game
from .runtime import GameState


def _gateway(mode: str | None, fixtures: str | None) -> LlmGateway:
    config = GatewayConfig.from_env(mode=mode, fixtures=fixtures)
    return LlmGateway(config)


@click.group()
def main() -> None:
    """Compile stories into playable games and poke at the results."""


@main.command()
@click.argument("request_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_dir", default="build", show_default=True,
              type=click.Path(file_okay=False), help="Where game artifacts land.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--fixtures", default="fixtures/llm", show_default=True,
              help="Fixture directory for record/replay modes.")
@click.option("--mode", default=None, type=click.Choice(["live", "record", "replay"]),
              help="Override S2G_LLM_MODE.")
def build(request_path: str, out_dir: str, seed: int, fixtures: str, mode: str | None) -> None:
    """Generate, annotate, and compile a game from a story request."""
    request = StoryRequest.from_path(request_path)
    try:
        result = initialize_game(request, _gateway(mode, fixtures), seed=seed)
    except (EngineError, GatewayError) as exc:
        raise click.ClickException(str(exc)) from exc

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.state.save(out / "game.json")
    jsonio.dump_path(
        {"request": request.to_dict(), "stats": story_stats(result.report),
         "report": result.report.to_dict()},
        out / "report.json",
    )
    jsonio.dump_path({"sentences": result.sentences}, out / "story.json")

    click.echo(result.report.to_table())
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {out / 'game.json'}")


@main.command()
@click.argument("game_path", required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--all", "do_all", is_flag=True,
              help="Rebuild and validate every story in the fixture manifest.")
@click.option("--fixtures-root", default="fixtures", show_default=True,
              type=click.Path(file_okay=False))
def validate(game_path: str | None, do_all: bool, fixtures_root: str) -> None:
    """Walk a built game's story start to finish and report breaks."""
    if do_all:
        root = Path(fixtures_root)
        manifest = jsonio.load_path(root / "manifest.json")
        failed = []
        for story in manifest["stories"]:
            slug = story["slug"]
            request = StoryRequest.from_path(root / slug / "request.json")
            gateway = _gateway("replay", str(root / "llm"))
            result = initialize_game(request, gateway, seed=story.get("seed", 0))
            outcome = walkthrough_validate(result.state)
            status = "ok" if outcome.ok else "BROKEN"
            click.echo(
                f"{slug:<24} {status:<8} "
                f"{outcome.executed}/{len(outcome.steps)} steps, "
                f"compiled {result.report.compiled}/{result.report.total}"
            )
            if not outcome.ok:
                failed.append(slug)
        if failed:
            raise click.ClickException(f"broken walkthroughs: {', '.join(failed)}")
        return

    if game_path is None:
        raise click.UsageError("pass a game.json or use --all")
    state = GameState.load(game_path)
    outcome = walkthrough_validate(state)
    for step in outcome.steps:
        click.echo(f"[{step.status}] {step.sentence}")
        for move in step.forced_moves:
            click.echo(f"    (walkthrough: {move})")
        for reason in step.unmet:
            click.echo(f"    unmet: {reason}")
    click.echo(f"walkthrough: {outcome.executed}/{len(outcome.steps)} executed")
    if not outcome.ok:
        sys.exit(1)


@main.command("eval")
@click.argument("game_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_dir", default="build", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--fixtures", default="fixtures/llm", show_default=True)
@click.option("--mode", default=None, type=click.Choice(["live", "record", "replay"]))
def eval_cmd(game_path: str, out_dir: str, fixtures: str, mode: str | None) -> None:
    """Throw invented verbs at every object and measure what sticks."""
    state = GameState.load(game_path)
    result = dynamic_eval(state, _gateway(mode, fixtures))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonio.dump_path(result.to_dict(), out / "dynamic_eval.json")
    jsonio.dump_jsonl(result.logs, out / "dynamic_log.jsonl")
    jsonio.dump_path(semantic_review_export(result), out / "review_cards.json")

    summary = result.to_dict()
    click.echo(
        f"dynamic actions: {summary['successes']}/{summary['total']} compiled "
        f"(rate {summary['rate']})"
    )
    for name, count in summary["category_counts"].items():
        click.echo(f"  {name}: {count} ({summary['category_rates'][name]})")
    click.echo(f"wrote {out / 'dynamic_eval.json'}")


@main.command()
@click.argument("game_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--fixtures", default="fixtures/llm", show_default=True)
@click.option("--mode", default=None, type=click.Choice(["live", "record", "replay"]))
@click.option("--save", "save_path", default=None, type=click.Path(dir_okay=False),
              help="Write the game back here on quit.")
def play(game_path: str, fixtures: str, mode: str | None, save_path: str | None) -> None:
    """Play a built game in the terminal. Type 'quit' to leave."""
    state = GameState.load(game_path)
    try:
        llm = _gateway(mode, fixtures)
    except GatewayError:
        llm = None
        click.echo("(no model access: unknown verbs will not invent new actions)")

    click.echo(runtime.describe_room(state))
    while True:
        try:
            text = click.prompt("> ", prompt_suffix="")
        except (EOFError, KeyboardInterrupt, click.Abort):
            break
        if text.strip().lower() in ("q", "quit", "exit"):
            break
        result = runtime.step(text, state, llm=llm)
        click.echo(result.display)
        for reason in result.reasons:
            click.echo(f"  - {reason}")
    if save_path:
        state.save(save_path)
        click.echo(f"saved to {save_path}")


@main.command()
@click.option("--game", "game_path", default=None, type=click.Path(dir_okay=False),
              help="Game file new sessions start from by default.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--fixtures", default="fixtures/llm", show_default=True)
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False),
              help="Serve a static web client from this directory.")
def serve(game_path: str | None, host: str, port: int, fixtures: str,
          ui_dir: str | None) -> None:
    """Run the HTTP API (and optionally the web client)."""
    import uvicorn

    from .server import create_app

    app = create_app(default_game=game_path, fixtures=fixtures, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
