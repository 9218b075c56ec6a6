"""Command line interface: index, route, find, guide, hide, eval, serve,
record. Machine output goes to stdout with --json; diagnostics to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import find as find_engine
from . import guide as guide_engine
from . import hide as hide_engine
from . import serialize
from .config import Config, load_config
from .errors import PageGuideError
from .evalharness import (
    eval_find,
    eval_guide,
    eval_hide,
    eval_router,
    load_dataset,
)
from .gateway import Gateway, TranscriptStore
from .indexing import build_index, serialize_index
from .router import classify, context_for
from .snapshots import load_sequence, load_snapshot, save_snapshot


def _shared_options(fn):
    fn = click.option("--config", "config_file", type=click.Path(path_type=Path),
                      default=None, help="Config file (default: pageguide.toml)")(fn)
    fn = click.option("--model", default=None, help="Model identifier")(fn)
    fn = click.option("--base-url", default=None, help="Chat-completions base URL")(fn)
    fn = click.option("--replay", type=click.Path(path_type=Path), default=None,
                      help="Transcript file; switches to replay mode")(fn)
    fn = click.option("--mode", default=None,
                      type=click.Choice(["record", "replay", "passthrough"]))(fn)
    return fn


def _configure(config_file, model, base_url, replay, mode, **extra) -> Config:
    flags = {"model": model, "base_url": base_url, "replay": replay,
             "mode": mode, **extra}
    if flags.get("mode") is None and replay is not None:
        flags["mode"] = "replay"
    return load_config(flags=flags, config_file=config_file)


def make_gateway(config: Config) -> Gateway:
    store = TranscriptStore(config.replay) if config.replay else None
    return Gateway(
        mode=config.mode, store=store, model=config.model,
        base_url=config.base_url, api_key=config.api_key,
        timeout=config.timeout,
    )


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))


@click.group()
def cli() -> None:
    """Ground model answers in a page's element structure."""


@cli.command()
@click.option("--snapshot", "snapshot_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--prompt", is_flag=True, help="Emit the prompt-facing text")
@click.option("--budget", default=10**6, show_default=True)
@click.option("--clip", default=None, type=int,
              help="Per-element text clip length (default 120)")
def index(snapshot_dir: Path, prompt: bool, budget: int,
          clip: Optional[int]) -> None:
    """Build the element index for a snapshot bundle."""
    snapshot = load_snapshot(snapshot_dir)
    idx = build_index(snapshot)
    if prompt:
        if clip is None:
            click.echo(serialize_index(idx, budget))
        else:
            click.echo(serialize_index(idx, budget, elem_clip=clip))
        return
    for el in idx.elements:
        click.echo(json.dumps(serialize.indexed_element(el),
                              ensure_ascii=False, sort_keys=True))


@cli.command()
@click.option("--snapshot", "snapshot_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--query", required=True)
@_shared_options
def route(snapshot_dir: Path, query: str, **options) -> None:
    """Classify a query into find/guide/hide (plus the two stub handlers)."""
    config = _configure(**options)
    snapshot = load_snapshot(snapshot_dir)
    decision = classify(query, context_for(snapshot), make_gateway(config))
    _emit(serialize.route_decision(decision))


@cli.command()
@click.option("--snapshot", "snapshot_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--query", required=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output")
@_shared_options
def find(snapshot_dir: Path, query: str, as_json: bool, **options) -> None:
    """Answer a question from page content with resolved citations."""
    config = _configure(**options)
    snapshot = load_snapshot(snapshot_dir)
    idx = build_index(snapshot)
    answer = find_engine.answer(query, idx, [], make_gateway(config))
    if as_json:
        _emit(serialize.grounded_answer(answer))
        return
    click.echo(answer.display_text)
    if answer.external_links:
        click.echo("\nExternal links:")
        for label, url in answer.external_links:
            click.echo(f"  {label}: {url}")
    if answer.plan.entries:
        click.echo("\nHighlights:")
        click.echo(f"{'#':>3} {'element':>8} {'tier':<22} span")
        for i, entry in enumerate(answer.plan.entries, start=1):
            if entry.span is None:
                tier, span_text = "whole-element", "-"
            else:
                tier = entry.span.tier
                span_text = f"{entry.span.start}..{entry.span.end}"
            click.echo(f"{i:>3} {entry.element_id:>8} {tier:<22} {span_text}")
        click.echo(f"Scroll to element {answer.plan.scroll_target}")
    if answer.unresolved:
        ids = sorted({c.element_id for c in answer.unresolved})
        click.echo(f"\nUnverifiable citations (element ids): {ids}", err=True)


@cli.command()
@click.option("--sequence", "sequence_path", required=True,
              type=click.Path(path_type=Path),
              help="sequence.json manifest or its directory")
@click.option("--query", required=True)
@click.option("--script", "script_file", type=click.Path(path_type=Path),
              default=None, help="Confirmation script: n/s characters")
@click.option("--json", "as_json", is_flag=True)
@_shared_options
def guide(sequence_path: Path, query: str, script_file: Optional[Path],
          as_json: bool, **options) -> None:
    """Run a step-by-step guide session (interactive, or scripted with
    --script for deterministic runs)."""
    config = _configure(**options)
    gateway = make_gateway(config)
    snapshots = load_sequence(sequence_path)
    session = guide_engine.start_session(query, snapshots,
                                         max_steps=config.max_steps)
    script = None
    if script_file is not None:
        script = [c for c in Path(script_file).read_text() if c in "ns"]

    transcript: list[dict] = []
    while session.state in (guide_engine.AWAITING_STEP, guide_engine.REPLANNING):
        step = guide_engine.next_step(session, gateway)
        card = guide_engine.step_card(session)
        entry: dict = {"step": serialize.guide_step(step)}
        if not as_json:
            click.echo(f"\nStep {card['step_no']}: {card['instruction']}")
            if card["highlight"]:
                click.echo(f"  target: element {card['highlight']['element_id']}"
                           f" ({card['highlight']['text']})")
            if card["hint"]:
                click.echo(f"  hint: {card['hint']}")
        if script is not None:
            choice = script.pop(0) if script else "s"
        else:
            label = card["controls"][0].lower()
            choice = click.prompt(f"[n]{label[1:]} / [s]top", default="n",
                                  show_default=False, err=True)
            choice = (choice or "n").strip().lower()[:1]
        if choice == "s":
            guide_engine.stop(session)
            entry["action"] = "stop"
            transcript.append(entry)
            break
        report = guide_engine.confirm_step(session)
        entry["action"] = "next"
        entry["divergence"] = serialize.divergence_report(report)
        transcript.append(entry)
        if not as_json and session.state != guide_engine.COMPLETED:
            click.echo(f"  page check: {report.verdict}")

    if as_json:
        _emit({"query": query, "final_state": session.state,
               "steps": transcript})
    else:
        click.echo(f"\nSession {session.state}.")


@cli.command()
@click.option("--snapshot", "snapshot_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--request", "request_text", required=True)
@click.option("--uncheck", default="", help="Comma-separated element ids to exclude")
@click.option("--confirm", is_flag=True, help="Apply the (checked) proposal")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Directory for the mutated bundle and mutation record")
@click.option("--json", "as_json", is_flag=True)
@_shared_options
def hide(snapshot_dir: Path, request_text: str, uncheck: str, confirm: bool,
         out_dir: Optional[Path], as_json: bool, **options) -> None:
    """Propose hide candidates; with --confirm, apply display:none and write
    the mutated bundle plus its mutation record."""
    config = _configure(**options)
    snapshot = load_snapshot(snapshot_dir)
    idx = build_index(snapshot)
    proposal = hide_engine.propose(request_text, idx, make_gateway(config))
    payload: dict = {"proposal": serialize.hide_proposal(proposal)}

    if not as_json:
        click.echo(proposal.message)
        if proposal.candidates:
            click.echo(f"{'rank':>4} {'id':>4}  reason / snippet")
            for c in proposal.candidates:
                click.echo(f"{c.rank:>4} {c.element_id:>4}  {c.reason}")
                click.echo(f"{'':>10}{c.snippet}")

    if confirm:
        unchecked = {int(x) for x in uncheck.split(",") if x.strip()}
        decision = hide_engine.review(proposal, unchecked)
        mutated, record = hide_engine.apply(decision, snapshot, idx)
        payload["confirmed_ids"] = sorted(decision.confirmed_ids)
        if out_dir is not None:
            save_snapshot(mutated, out_dir)
            record_json = {
                str(eid): {"node_path": path, "prior_style": prior}
                for eid, (path, prior) in record.entries.items()
            }
            (out_dir / "mutation_record.json").write_text(
                json.dumps(record_json, ensure_ascii=False, sort_keys=True,
                           indent=2) + "\n",
                encoding="utf-8")
            payload["out"] = str(out_dir)
            if not as_json:
                click.echo(f"Mutated bundle written to {out_dir}")
        elif not as_json:
            click.echo(f"Applied to {len(decision.confirmed_ids)} element(s) "
                       "(no --out directory given; bundle not persisted)")

    if as_json:
        _emit(payload)


_EVAL_FNS = {"router": eval_router, "find": eval_find, "hide": eval_hide,
             "guide": eval_guide}


@cli.command(name="eval")
@click.option("--kind", required=True,
              type=click.Choice(["router", "find", "hide", "guide"]))
@click.option("--data", "data_file", required=True,
              type=click.Path(path_type=Path))
@click.option("--live", is_flag=True,
              help="Call the live model instead of requiring a replay file")
@click.option("--report", "report_file", type=click.Path(path_type=Path),
              default=None)
@_shared_options
def eval_cmd(kind: str, data_file: Path, live: bool,
             report_file: Optional[Path], **options) -> None:
    """Compute the metric report for a dataset, normally in replay mode."""
    if live and options.get("mode") is None:
        options["mode"] = "passthrough"
    config = _configure(**options)
    if not live and config.mode == "passthrough":
        raise click.UsageError("eval needs --replay FILE (or explicit --live)")
    cases = load_dataset(kind, data_file)
    report = _EVAL_FNS[kind](cases, make_gateway(config))
    text = report.to_json()
    click.echo(text)
    if report_file is not None:
        Path(report_file).write_text(text + "\n", encoding="utf-8")


@cli.command()
@click.option("--port", default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--handshake", "handshake_file", required=True,
              type=click.Path(path_type=Path))
@_shared_options
def serve(port: int, host: str, handshake_file: Path, **options) -> None:
    """Run the local HTTP service for the companion UI."""
    import secrets as secrets_mod

    import uvicorn

    from .service import create_app, write_handshake

    config = _configure(**options)
    secret = secrets_mod.token_hex(16)
    app = create_app(make_gateway(config), config=config, secret=secret)
    write_handshake(handshake_file, port, secret)
    click.echo(f"handshake written to {handshake_file}", err=True)
    click.echo(f"secret: {secret}", err=True)  # printed once, per design
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command()
@click.option("--kind", required=True,
              type=click.Choice(["route", "find", "hide",
                                 "router", "hide-data", "find-data", "guide-data"]))
@click.option("--transcript", "transcript_file", required=True,
              type=click.Path(path_type=Path))
@click.option("--snapshot", "snapshot_dir", type=click.Path(path_type=Path),
              default=None)
@click.option("--query", default=None)
@click.option("--data", "data_file", type=click.Path(path_type=Path),
              default=None, help="Dataset to record end to end")
@_shared_options
def record(kind: str, transcript_file: Path, snapshot_dir: Optional[Path],
           query: Optional[str], data_file: Optional[Path], **options) -> None:
    """Run pipelines in record mode, appending fixtures to the transcript.

    Ad-hoc kinds (route/find/hide) need --snapshot and --query; dataset kinds
    (router/find-data/hide-data/guide-data) need --data.
    """
    options["replay"] = transcript_file
    options["mode"] = "record"
    config = _configure(**options)
    gateway = make_gateway(config)
    assert gateway.store is not None
    before = set(gateway.store.entries)

    if kind in ("route", "find", "hide"):
        if snapshot_dir is None or query is None:
            raise click.UsageError(f"record --kind {kind} needs --snapshot and --query")
        snapshot = load_snapshot(snapshot_dir)
        if kind == "route":
            classify(query, context_for(snapshot), gateway)
        elif kind == "find":
            find_engine.answer(query, build_index(snapshot), [], gateway)
        else:
            hide_engine.propose(query, build_index(snapshot), gateway)
    else:
        if data_file is None:
            raise click.UsageError(f"record --kind {kind} needs --data")
        dataset_kind = {"router": "router", "find-data": "find",
                        "hide-data": "hide", "guide-data": "guide"}[kind]
        cases = load_dataset(dataset_kind, data_file)
        _EVAL_FNS[dataset_kind](cases, gateway)

    new_keys = [k for k in gateway.store.entries if k not in before]
    for key in new_keys:
        click.echo(key)
    click.echo(f"{len(new_keys)} new transcript line(s)", err=True)


def main(argv: Optional[list[str]] = None) -> None:
    try:
        cli.main(args=argv, standalone_mode=True)
    except PageGuideError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
