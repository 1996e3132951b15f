"""Command-line front end: ``actr-confluence check|translate|simulate|validate FILE``.

Exit status: 0 confluent or ok, 1 not confluent, 2 unknown, 3 input error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass

import click

from .actr import ActrModel, ActrState, ModelError, actr_step
from .chr import format_rule
from .confluence import CheckOptions, check_confluence, format_report, report_to_json
from .parser import load_model
from .translation import translate_model

EXIT_OK, EXIT_NOT_CONFLUENT, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
VERDICT_EXIT = {"confluent": EXIT_OK, "not_confluent": EXIT_NOT_CONFLUENT, "unknown": EXIT_UNKNOWN}


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    command: str
    max_steps: int = 1000
    universe_padding: int = 2
    output_format: str = "text"
    clear_to_dm: bool = False
    show_all_overlaps: bool = False

    def __post_init__(self):
        if self.command not in ("check", "translate", "simulate", "validate"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.universe_padding < 0:
            raise ValueError("universe_padding must be non-negative")
        if self.output_format not in ("text", "json"):
            raise ValueError("output_format must be text or json")


def _emit(data, fmt: str, text: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=False))
    else:
        click.echo(text, nl=not text.endswith("\n"))


def describe_state(state: ActrState) -> str:
    parts = []
    for b, cid, delay in state.gamma:
        c = state.store[cid]
        slots = ", ".join(f"{s}: {v}" for s, v in c.values)
        parts.append(f"{b}={cid}:{c.ctype}" + (f"({slots})" if slots else "") + (f" delay {delay}" if delay else ""))
    return "; ".join(parts) + f" | {len(state.store)} chunks"


def simulate(model: ActrModel, max_steps: int, clear_to_dm: bool = False) -> dict:
    """Derivation tree of the reference interpreter from the initial state."""
    seen: set = set()

    def node(state: ActrState, depth: int) -> dict:
        out = {"state": describe_state(state), "children": []}
        if state in seen:
            out["seen"] = True
            return out
        seen.add(state)
        succ = sorted(actr_step(state, model, clear_to_dm=clear_to_dm), key=lambda rs: (rs[0], describe_state(rs[1])))
        if succ and depth >= max_steps:
            out["truncated"] = True
            return out
        for rule, nxt in succ:
            child = node(nxt, depth + 1)
            child["rule"] = rule
            out["children"].append(child)
        return out

    return node(model.initial, 0)


def _tree_text(n: dict, indent: int = 0) -> list[str]:
    label = f"{n['rule']} -> " if "rule" in n else ""
    flags = " (seen)" if n.get("seen") else " (bound reached)" if n.get("truncated") else ""
    lines = ["  " * indent + label + n["state"] + flags]
    for c in n["children"]:
        lines.extend(_tree_text(c, indent + 1))
    return lines


def run(config: RunConfig) -> int:
    """Execute one command; writes the report to standard output and returns the exit status."""
    try:
        model = load_model(config.input_path)
    except ModelError as e:
        click.echo(f"{config.input_path}:{e}", err=True)
        return EXIT_INPUT
    except (OSError, UnicodeDecodeError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_INPUT
    fmt = config.output_format
    if config.command == "validate":
        data = {"ok": True, "buffers": list(model.buffers), "types": len(model.types),
                "chunks": len(model.initial.store), "rules": [r.name for r in model.rules]}
        _emit(data, fmt, f"ok: {len(model.types)} types, {len(model.initial.store)} chunks,"
                         f" {len(model.rules)} rules, buffers {', '.join(model.buffers) or '(none)'}")
        return EXIT_OK
    if config.command == "translate":
        rules = [format_rule(r) for r in translate_model(model)]
        _emit({"rules": rules}, fmt, "\n".join(rules))
        return EXIT_OK
    if config.command == "simulate":
        tree = simulate(model, config.max_steps, config.clear_to_dm)
        _emit(tree, fmt, "\n".join(_tree_text(tree)))
        return EXIT_OK
    opts = CheckOptions(max_steps=config.max_steps, universe_padding=config.universe_padding,
                        clear_to_dm=config.clear_to_dm, show_all=config.show_all_overlaps)
    report = check_confluence(model, opts)
    data = report_to_json(report)
    data["config"] = {**data["config"], **{k: v for k, v in asdict(config).items() if k in ("input_path", "output_format")}}
    _emit(data, fmt, format_report(report))
    return VERDICT_EXIT[report.verdict]


def _options(f):
    f = click.option("--all-overlaps", "show_all_overlaps", is_flag=True, help="Report every overlap, without deduplication.")(f)
    f = click.option("--clear-to-dm", is_flag=True, help="Copy cleared chunks back into declarative memory.")(f)
    f = click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)(f)
    f = click.option("--universe-padding", type=click.IntRange(min=0), default=2, show_default=True,
                     help="Fresh constants added to the grounding universe.")(f)
    f = click.option("--max-steps", type=click.IntRange(min=1), default=1000, show_default=True,
                     help="Search bound per side (check) or derivation depth (simulate).")(f)
    f = click.argument("file", type=click.Path(dir_okay=False))(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Static confluence analysis for ACT-R models."""


def _command(name: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @_options
    def cmd(file, max_steps, universe_padding, output_format, clear_to_dm, show_all_overlaps):
        cfg = RunConfig(file, name, max_steps, universe_padding, output_format, clear_to_dm, show_all_overlaps)
        sys.exit(run(cfg))
    return cmd


_command("check", "Decide confluence via critical pairs of the CHR translation.")
_command("translate", "Print the CHR translation of every rule.")
_command("simulate", "Print the derivation tree of the reference interpreter.")
_command("validate", "Parse and validate a model file.")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT
    except click.Abort:
        return EXIT_INPUT
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
