"""Command line entry point: ``spinlattice <experiment> ...`` or ``spinlattice run CONFIG``.

Exit codes: 0 success, 2 config rejected, 3 numeric guard tripped,
4 invariant failed.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, List, Optional

import jsonschema

from . import __version__
from .errors import GuardError, InvariantError
from .experiments import EXPERIMENTS, Outcome, default_config, run_experiment, validate_config

log = logging.getLogger("spinlattice")

EXIT_OK, EXIT_SCHEMA, EXIT_GUARD, EXIT_INVARIANT = 0, 2, 3, 4


# serialization ---------------------------------------------------------------


def format_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    buf.write(",".join(outcome.columns) + "\n")
    for row in outcome.rows:
        buf.write(",".join(format_number(_plain(v)) for v in row) + "\n")
    return buf.getvalue()


def _plain(v):
    # numpy scalars to builtins
    return v.item() if hasattr(v, "item") else v


def _json_value(v) -> str:
    v = _plain(v)
    if v is None or isinstance(v, bool):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            return json.dumps(str(v))
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(payload: dict) -> str:
    """Stable key order (insertion order of the payload), 17-digit floats."""
    return _json_value(payload) + "\n"


def render(outcome: Outcome, fmt: Optional[str] = None) -> str:
    """CSV for tables by default; a table asked for as JSON becomes summary plus rows."""
    fmt = fmt or outcome.kind
    if outcome.kind == "json":
        if fmt != "json":
            raise ValueError("this experiment only produces JSON")
        return to_json(outcome.payload)
    if fmt == "csv":
        return to_csv(outcome)
    rows = [dict(zip(outcome.columns, row)) for row in outcome.rows]
    return to_json({**outcome.summary, "columns": outcome.columns, "rows": rows})


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# running ---------------------------------------------------------------------


def default_jobs() -> int:
    env = os.environ.get("SPINLATTICE_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def execute(config: dict, out_dir: Optional[Path], jobs: int, stdout=None) -> int:
    """Validate, run and write one experiment; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        validate_config(config)
    except jsonschema.ValidationError as exc:
        print(f"config rejected: {exc.message}", file=sys.stderr)
        return EXIT_SCHEMA
    start = time.perf_counter()
    try:
        outcome = run_experiment(config, jobs)
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InvariantError as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        # malformed values the schema cannot see, e.g. a bad Pauli token
        print(f"config rejected: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    wall = time.perf_counter() - start
    status = EXIT_OK if outcome.ok else EXIT_INVARIANT
    output = config.get("output")
    try:
        text = render(outcome, output.get("format") if output else None)
    except ValueError as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if output is None:
        stdout.write(text)
    else:
        target = Path(output["path"])
        if not target.is_absolute():
            target = (out_dir or Path.cwd()) / target
        write_atomic(target, text)
        manifest = {
            "experiment": config["experiment"],
            "config_sha256": config_hash(config),
            "library_version": __version__,
            "output": target.name,
            "output_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
            "seed": config.get("seed", 0),
            "jobs": jobs,
            "status": "ok" if outcome.ok else "invariant-failed",
            "message": outcome.message,
            "wall_time_s": wall,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        write_atomic(target.parent / "manifest.json", to_json(manifest))
        log.info("wrote %s", target)
    if not outcome.ok:
        print(f"invariant failed: {outcome.message}", file=sys.stderr)
    return status


def _load_config(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=None, help="worker threads (default: SPINLATTICE_JOBS or all cores)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="spinlattice", description="Finite-volume quantum spin system experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run the experiment described by a JSON config")
    run.add_argument("config")
    run.add_argument("--out-dir", type=Path, default=None, help="base directory for relative output paths")

    for name in EXPERIMENTS:
        p = sub.add_parser(name, parents=[common], help=f"{name} experiment")
        p.add_argument("--config", default=None, help="JSON config (experiment field must match)")
        p.add_argument("--L", type=int, default=None, help="chain length or torus size")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output file; stdout when omitted")
        if name == "toric":
            p.add_argument("--query", action="append", default=[], help="Pauli string, e.g. 'X@(h,0,1)*Z@(v,1,1)'")
            p.add_argument("--degeneracy", action="store_true")
    return parser


def _config_from_args(args) -> dict:
    if args.config:
        config = _load_config(args.config)
    else:
        config = default_config(args.command)
    if not isinstance(config, dict):
        return config
    if config.get("experiment", args.command) != args.command:
        raise ValueError(f"config describes {config.get('experiment')!r}, not {args.command!r}")
    if args.L is not None:
        config.setdefault("model", {})["L"] = args.L
    if args.seed is not None:
        config["seed"] = args.seed
    if args.command == "toric" and (args.query or args.degeneracy):
        opts = config.setdefault("options", {})
        if args.query:
            opts["queries"] = list(args.query)
        opts["degeneracy"] = bool(args.degeneracy)
    if args.out:
        suffix = Path(args.out).suffix.lstrip(".")
        config["output"] = {"path": args.out, **({"format": suffix} if suffix in ("csv", "json") else {})}
    elif not args.config:
        config.pop("output", None)
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    out_dir = None
    try:
        if args.command == "run":
            config = _load_config(args.config)
            out_dir = args.out_dir
        else:
            config = _config_from_args(args)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return execute(config, out_dir, max(1, jobs))


if __name__ == "__main__":
    sys.exit(main())
