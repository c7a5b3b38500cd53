"""Command-line client.

    medea run <config.yaml> [--output PATH] [--threads N]
                            [--tol-profile {fast,golden}] [--server URL]
    medea validate <config.yaml> [--server URL]
    medea list-scenarios [--server URL]
    medea serve [--host HOST] [--port PORT]

Configs are YAML files matching the scenario schemas.  By default the CLI
runs the computation in-process through the same code path the HTTP service
exposes; --server sends the identical request to a running instance instead.

Exit codes: 0 ok, 2 config error, 3 numerical failure.

CSV output: first column is the sweep variable, headers carry unit
annotations, values are written with 17 significant digits so reruns are
byte-identical.  Provenance goes to <output>.meta.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml
from pydantic import TypeAdapter, ValidationError

from . import __version__
from .errors import MedeaError
from .schemas import RunRequest, ScenarioConfig, SweepResult

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_ADAPTER = TypeAdapter(ScenarioConfig)


def _load_config(path: str):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(p, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"config root must be a mapping, got {type(raw).__name__}")
    return _ADAPTER.validate_python(raw)


def write_csv(result: SweepResult, path: Path) -> None:
    names = list(result.columns.keys())
    series = [result.columns[n] for n in names]
    lines = [",".join(names)]
    for row in zip(*series):
        lines.append(",".join(f"{v:.16e}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    meta = path.with_name(path.name + ".meta.json")
    meta.write_text(json.dumps(result.provenance, indent=2, sort_keys=True,
                               default=str) + "\n", encoding="utf-8")


def _remote(server: str, method: str, route: str, payload=None):
    import httpx

    url = server.rstrip("/") + route
    with httpx.Client(timeout=3600.0) as client:
        resp = (client.get(url) if method == "GET"
                else client.post(url, json=payload))
    if resp.status_code == 422 and route == "/run":
        raise MedeaError(resp.json().get("detail", "numerical failure"))
    resp.raise_for_status()
    return resp.json()


def _cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
    except (FileNotFoundError, ValueError, ValidationError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    req = RunRequest(config=cfg, threads=args.threads,
                     tol_profile=args.tol_profile)
    try:
        if args.server:
            data = _remote(args.server, "POST", "/run",
                           req.model_dump(mode="json"))
            result = SweepResult.model_validate(data)
        else:
            from .scenarios import run_request

            result = run_request(req)
    except MedeaError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = Path(args.output) if args.output else Path(args.config).with_suffix(".csv")
    write_csv(result, out)
    npts = len(next(iter(result.columns.values())))
    print(f"wrote {out} ({npts} rows, {len(result.columns)} columns)")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
    except (FileNotFoundError, ValueError, ValidationError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.server:
        report = _remote(args.server, "POST", "/validate",
                         {"config": cfg.model_dump(mode="json")})
        warnings = report.get("warnings", [])
    else:
        from .scenarios import validate_config

        warnings = validate_config(cfg).warnings
    print(f"ok: scenario {cfg.scenario}")
    for w in warnings:
        print(f"warning: {w}")
    return EXIT_OK


def _cmd_list(args) -> int:
    if args.server:
        names = _remote(args.server, "GET", "/scenarios")["scenarios"]
    else:
        from .schemas import SCENARIO_NAMES

        names = SCENARIO_NAMES
    for n in names:
        print(n)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("medea.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="medea",
                                 description=__doc__.split("\n\n")[1])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep config, write CSV")
    run_p.add_argument("config")
    run_p.add_argument("--output", help="CSV path (default: config name .csv)")
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--tol-profile", choices=("fast", "golden"),
                       default="golden")
    run_p.add_argument("--server", help="base URL of a running service")
    run_p.set_defaults(fn=_cmd_run)

    val_p = sub.add_parser("validate", help="validate a config, no compute")
    val_p.add_argument("config")
    val_p.add_argument("--server")
    val_p.set_defaults(fn=_cmd_validate)

    ls_p = sub.add_parser("list-scenarios", help="list scenario names")
    ls_p.add_argument("--server")
    ls_p.set_defaults(fn=_cmd_list)

    sv_p = sub.add_parser("serve", help="start the HTTP service")
    sv_p.add_argument("--host", default="127.0.0.1")
    sv_p.add_argument("--port", type=int, default=8000)
    sv_p.set_defaults(fn=_cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
