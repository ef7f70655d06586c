"""Operator command line: seed, serve, query, inspect.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from jarvis_kg.demo import build_demo_fleet
from jarvis_kg.errors import JarvisError, SchemaError
from jarvis_kg.fleet import fleet_from_dict
from jarvis_kg.nlu import parse_training_file
from jarvis_kg.service import (
    JarvisService,
    ServerConfig,
    load_templates,
    packaged_data_path,
    serve,
)
from jarvis_kg.sparql import parse_query, placeholders

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fleet", type=Path, default=None, help="fleet JSON file")
    parser.add_argument("--intents", type=Path, default=None, help="intent training file")
    parser.add_argument("--templates", type=Path, default=None, help="query template directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jarvis", description="Fleet-analytics knowledge-graph service."
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("serve", help="run the JSON-RPC HTTP server")
    _add_data_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="listen port (overrides JARVIS_PORT)")
    p.add_argument("--log", type=Path, default=None, help="request log file (JSON lines)")

    p = sub.add_parser("ask-once", help="answer one command in-process")
    p.add_argument("text", help="the command to answer")
    _add_data_flags(p)

    p = sub.add_parser("repl", help="interactive ask loop")
    _add_data_flags(p)

    p = sub.add_parser("seed-demo", help="write the demo fleet and training file")
    p.add_argument("out", type=Path, help="output directory")

    p = sub.add_parser("export-graph", help="dump the knowledge graph as N-Triples")
    p.add_argument("out", type=Path, help="output file, or - for stdout")
    _add_data_flags(p)

    p = sub.add_parser("validate", help="check fleet / training / template files")
    _add_data_flags(p)

    return parser


def _service(args) -> JarvisService:
    return JarvisService.from_paths(args.fleet, args.intents, args.templates)


def _cmd_serve(args) -> int:
    config = ServerConfig(
        host=args.host,
        port=args.port if args.port is not None else 8377,
        fleet_path=args.fleet,
        intents_path=args.intents,
        templates_dir=args.templates,
        log_path=args.log,
        extra={"port_from_flag": args.port is not None},
    )
    server = serve(config)
    print(f"listening on http://{config.host}:{server.port}/rpc", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return EXIT_OK


def _cmd_ask_once(args) -> int:
    service = _service(args)
    response = service.ask(args.text)
    print(json.dumps(response.to_wire()))
    return EXIT_OK


def _cmd_repl(args) -> int:
    service = _service(args)
    try:
        while True:
            try:
                line = input("jarvis> ")
            except EOFError:
                break
            if line.strip() in ("", "exit", "quit"):
                if line.strip():
                    break
                continue
            print(json.dumps(service.ask(line).to_wire()))
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_seed_demo(args) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    fleet_path = out / "demo_fleet.json"
    intents_path = out / "intents.md"
    fleet_path.write_text(
        json.dumps(build_demo_fleet(), indent=2) + "\n", encoding="utf-8"
    )
    intents_path.write_text(
        packaged_data_path("intents.md").read_text(encoding="utf-8"), encoding="utf-8"
    )
    print(f"wrote {fleet_path}")
    print(f"wrote {intents_path}")
    return EXIT_OK


def _cmd_export_graph(args) -> int:
    service = _service(args)
    dump = service.graph.export_ntriples()
    if str(args.out) == "-":
        sys.stdout.write(dump)
    else:
        args.out.write_text(dump, encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    fleet_path = Path(args.fleet or packaged_data_path("demo_fleet.json"))
    intents_path = Path(args.intents or packaged_data_path("intents.md"))
    templates_dir = Path(args.templates or packaged_data_path("templates"))

    try:
        payload = json.loads(fleet_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"{fleet_path}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        fleet_from_dict(payload)
    except SchemaError as exc:
        print(f"{fleet_path}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{fleet_path}: ok")

    try:
        specs = parse_training_file(intents_path.read_text(encoding="utf-8"))
    except (OSError, JarvisError) as exc:
        print(f"{intents_path}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{intents_path}: ok ({len(specs)} intents)")

    templates = load_templates(templates_dir)
    if not templates:
        print(f"{templates_dir}: no .rq templates found", file=sys.stderr)
        return EXIT_VALIDATION
    for name in sorted(templates):
        # a template must parse once its placeholders are checked for shape
        try:
            slots = placeholders(templates[name])
        except JarvisError as exc:
            print(f"{templates_dir / (name + '.rq')}: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        probe = templates[name]
        for slot in slots:
            probe = probe.replace(f"[{slot}]", '"probe"')
        try:
            parse_query(probe)
        except JarvisError as exc:
            print(f"{templates_dir / (name + '.rq')}: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    print(f"{templates_dir}: ok ({len(templates)} templates)")
    return EXIT_OK


_COMMANDS = {
    "serve": _cmd_serve,
    "ask-once": _cmd_ask_once,
    "repl": _cmd_repl,
    "seed-demo": _cmd_seed_demo,
    "export-graph": _cmd_export_graph,
    "validate": _cmd_validate,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except JarvisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
