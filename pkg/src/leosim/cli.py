"""Command line front end.

Each subcommand loads a scenario file, applies flag overrides, sends the
request to the HTTP service (in-process by default, remote with --server),
and writes the returned artifacts under --out-dir.  Diagnostics go to
stderr; the only data outputs are the files in the run directory.

Exit codes: 0 success, 1 scenario config problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import httpx

from .config import ConfigError, ScenarioConfig, csv_text, load_config, parse_config
from .runner import cdf_comparison_rows, write_artifacts

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

POLICIES = ("shortest-path", "q-routing", "ma-drl")


def _make_client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process: spin the ASGI app up behind the same client interface
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _load_scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    doc = cfg.model_dump(mode="json")
    if getattr(args, "seed", None) is not None:
        # one master seed fans out to the four independent streams
        doc["seeds"].update(
            topology=args.seed,
            traffic=args.seed + 1,
            learning=args.seed + 2,
            probes=args.seed + 3,
        )
    if getattr(args, "duration", None) is not None:
        doc["horizon_s"] = args.duration
    if getattr(args, "gateways", None) is not None:
        doc["gateway_count"] = args.gateways
    if getattr(args, "load", None) is not None:
        doc["traffic"]["load_fraction"] = args.load
    for flag, key in (
        ("anticipation", "anticipation_enabled"),
        ("cluster", "cluster_enabled"),
        ("global_fl", "global_enabled"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            doc["schedule"][key] = value == "on"
    return parse_config(doc)


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _post(args, path: str, payload: dict) -> dict:
    client = _make_client(args.server)
    try:
        resp = client.post(path, json=payload)
    finally:
        client.close()
    if resp.status_code != 200:
        raise RuntimeError(f"{path} failed ({resp.status_code}): {resp.text}")
    return resp.json()


def _deliver(args, body: dict) -> int:
    write_artifacts(args.out_dir, body["files"])
    print(json.dumps(body["summary"], sort_keys=True), file=sys.stderr)
    return EXIT_OK


def _latencies_from_csv(text: str) -> list[float]:
    lines = text.rstrip("\n").split("\n")[1:]
    return [float(line.split(",")[5]) for line in lines if line]


def _cmd_offline(args) -> int:
    cfg = _load_scenario(args)
    body = _post(args, "/runs/offline", {"config": cfg.model_dump(mode="json")})
    return _deliver(args, body)


def _cmd_online(args) -> int:
    cfg = _load_scenario(args)
    payload: dict = {"config": cfg.model_dump(mode="json")}
    if args.model is not None:
        payload["model"] = _read_json(args.model)
    body = _post(args, "/runs/online", payload)
    code = _deliver(args, body)
    if args.compare is not None:
        ours = _latencies_from_csv(body["files"]["latency.csv"])
        ref_path = pathlib.Path(args.compare) / "latency.csv"
        theirs = _latencies_from_csv(ref_path.read_text(encoding="utf-8"))
        rows = cdf_comparison_rows(ours, theirs)
        write_artifacts(args.out_dir, {"cdf_comparison.csv": csv_text("cdf_comparison.csv", rows)})
    return code


def _cmd_baseline(args) -> int:
    cfg = _load_scenario(args)
    payload: dict = {"config": cfg.model_dump(mode="json"), "policy": args.policy}
    if args.model is not None:
        payload["model"] = _read_json(args.model)
    body = _post(args, "/runs/baseline", payload)
    return _deliver(args, body)


def _cmd_cka(args) -> int:
    cfg = _load_scenario(args)
    payload: dict = {"archive": _read_json(args.models), "probe_seed": cfg.seeds.probes}
    if args.models_b is not None:
        payload["archive_b"] = _read_json(args.models_b)
    body = _post(args, "/analysis/cka", payload)
    return _deliver(args, body)


def _cmd_topology(args) -> int:
    cfg = _load_scenario(args)
    body = _post(args, "/topology/snapshot", {"config": cfg.model_dump(mode="json"), "t": args.time})
    return _deliver(args, body)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="scenario YAML file")
    p.add_argument("--out-dir", default=None, help="artifact directory (default: runs/<command>)")
    p.add_argument("--server", default=None, help="remote service URL; in-process if omitted")
    p.add_argument("--seed", type=int, default=None, help="master seed for all four RNG streams")
    p.add_argument("--duration", type=float, default=None, help="override horizon_s")
    p.add_argument("--gateways", type=int, default=None, help="override gateway_count")
    p.add_argument("--load", type=float, default=None, help="override traffic.load_fraction")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leosim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("offline", help="centralized training run; saves the model")
    _add_common(p)
    p.set_defaults(handler=_cmd_offline)

    p = sub.add_parser("online", help="distributed run with per-satellite agents")
    _add_common(p)
    p.add_argument("--model", default=None, help="starting network JSON from an offline run")
    p.add_argument("--anticipation", choices=("on", "off"), default=None)
    p.add_argument("--cluster", choices=("on", "off"), default=None)
    p.add_argument("--global-fl", dest="global_fl", choices=("on", "off"), default=None)
    p.add_argument("--compare", default=None, help="run directory to compare latency CDFs against")
    p.set_defaults(handler=_cmd_online)

    p = sub.add_parser("baseline", help="reference policy run on the same scenario")
    _add_common(p)
    p.add_argument("--policy", required=True, choices=POLICIES)
    p.add_argument("--model", default=None, help="network JSON for the frozen ma-drl policy")
    p.set_defaults(handler=_cmd_baseline)

    p = sub.add_parser("cka", help="pairwise model similarity from saved archives")
    _add_common(p)
    p.add_argument("--models", required=True, help="model archive JSON")
    p.add_argument("--models-b", default=None, help="second archive for cross comparison")
    p.set_defaults(handler=_cmd_cka)

    p = sub.add_parser("topology", help="dump the link topology at one instant")
    _add_common(p)
    p.add_argument("-t", "--time", type=float, default=0.0)
    p.set_defaults(handler=_cmd_topology)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_dir", None) is None and args.command != "serve":
        args.out_dir = str(pathlib.Path("runs") / args.command)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
