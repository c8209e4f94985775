"""Thin-client CLI: every command talks to the service API over HTTP.

Without ``--server`` the client mounts the FastAPI app in-process through an
ASGI transport, so no running server is required; with ``--server URL`` the
same requests go to a remote instance. Exit codes: 0 success, 2 configuration
error (invalid scenario file, unknown preset, bad flags).
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

CONFIG_ERROR = 2


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    # no server: mount the app in-process behind the same HTTP interface
    import warnings

    with warnings.catch_warnings():
        # starlette's transitional httpx deprecation; its replacement is not
        # published yet, and the sync-over-ASGI bridge still works
        warnings.filterwarnings("ignore", message="Using `httpx`")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app, base_url="http://mmwavepp.local")


def _load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        raise SystemExit(CONFIG_ERROR)
    except json.JSONDecodeError as exc:
        print(f"error: scenario file is not valid JSON: {exc}", file=sys.stderr)
        raise SystemExit(CONFIG_ERROR)


def _print_validation_errors(response: httpx.Response) -> None:
    try:
        detail = response.json().get("detail", [])
    except Exception:
        detail = []
    print("error: invalid scenario", file=sys.stderr)
    for item in detail if isinstance(detail, list) else [detail]:
        loc = ".".join(str(p) for p in item.get("loc", [])[1:]) if isinstance(item, dict) else ""
        msg = item.get("msg", str(item)) if isinstance(item, dict) else str(item)
        print(f"  {loc}: {msg}", file=sys.stderr)


def _run_one(client: httpx.Client, scenario: dict, args) -> tuple[list[str], list[dict]]:
    """POST one run; returns (csv data lines, summary entries)."""
    payload = {
        "scenario": scenario,
        "trials": args.trials,
        "threads": args.threads,
        "base_seed": args.seed,
        "timing": not args.no_timing,
        "include_rows": False,
        "include_csv": True,
    }
    response = client.post("/runs", json=payload)
    if response.status_code == 422:
        _print_validation_errors(response)
        raise SystemExit(CONFIG_ERROR)
    response.raise_for_status()
    body = response.json()
    lines = body["csv"].splitlines()
    return lines[1:], body["summary"]


def _print_summary(summary: list[dict]) -> None:
    def num(value, spec):
        # JSON has no NaN: covariance-only algorithms report nmse_h as null
        if isinstance(value, (int, float)):
            return format(value, spec)
        return "-".rjust(int(spec.split(".")[0]))

    header = f"{'scenario':14s} {'algorithm':16s} {'T':>4s} {'snr':>6s} {'m*n':>5s} {'nmse_h':>10s} {'nmse_c':>10s} {'eta':>8s}"
    print(header)
    for row in summary:
        print(
            f"{row['scenario_id']:14s} {row['algorithm']:16s} {row['T']:4d} {row['snr_db']:6.1f} "
            f"{row['mrf_nrf']:5d} {num(row['nmse_h_mean'], '10.4g')} {num(row['nmse_c_mean'], '10.4g')} "
            f"{num(row['eta_mean'], '8.4f')}"
        )


def _write_csv(path: str, data_lines: list[str]) -> None:
    from .runner import CSV_HEADER

    with open(path, "w", newline="") as fh:
        fh.write("\n".join([CSV_HEADER] + data_lines) + "\n")


def cmd_validate(args) -> int:
    scenario = _load_scenario(args.scenario)
    with _client(args.server) as client:
        response = client.post("/scenarios/validate", json=scenario)
        if response.status_code == 422:
            _print_validation_errors(response)
            return CONFIG_ERROR
        response.raise_for_status()
        print(f"ok: scenario '{response.json()['scenario']['scenario_id']}' is valid")
        return 0


def cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario)
    with _client(args.server) as client:
        data_lines, summary = _run_one(client, scenario, args)
    if args.out:
        _write_csv(args.out, data_lines)
        print(f"wrote {len(data_lines)} rows to {args.out}")
    _print_summary(summary)
    return 0


def cmd_sweep(args) -> int:
    with _client(args.server) as client:
        response = client.get(f"/presets/{args.figure}")
        if response.status_code == 404:
            print(f"error: {response.json()['detail']}", file=sys.stderr)
            return CONFIG_ERROR
        response.raise_for_status()
        scenarios = response.json()
        all_lines: list[str] = []
        all_summary: list[dict] = []
        for scenario in scenarios:
            lines, summary = _run_one(client, scenario, args)
            all_lines.extend(lines)
            all_summary.extend(summary)
    if args.out:
        _write_csv(args.out, all_lines)
        print(f"wrote {len(all_lines)} rows to {args.out}")
    _print_summary(all_summary)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("mmwavepp.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwavepp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--server", help="base URL of a running service (default: in-process)")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--threads", type=int, default=1, help="trial-level worker threads")
        p.add_argument("--seed", type=int, help="override base seed")
        p.add_argument("--no-timing", action="store_true", help="zero wall_ms for byte-stable output")

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a bundled figure preset")
    p_sweep.add_argument("--figure", type=int, required=True, choices=range(2, 9), help="figure number")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario", help="path to a scenario JSON file")
    p_val.add_argument("--server", help="base URL of a running service (default: in-process)")
    p_val.set_defaults(func=cmd_validate)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
