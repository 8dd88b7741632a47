"""Command-line client for the benchmark service.

Every subcommand except ``serve`` talks to the service over HTTP.  By
default the app is mounted in-process (no socket, no separate server), so
the CLI works standalone; pass ``--server http://host:port`` to address a
running ``embedprobe serve`` instead.  Note that paths in requests are
interpreted by the server, so with a remote server they must exist there.

Exit codes: 0 full success, 2 run completed with some failed cells,
1 fatal error (bad input, unreachable server, load failure).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://embedprobe.internal",
                                     timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _fail(response: httpx.Response) -> int:
    try:
        detail = response.json().get("detail", response.text)
    except json.JSONDecodeError:
        detail = response.text
    print(f"error: {detail}", file=sys.stderr)
    return EXIT_FATAL


def cmd_run(args: argparse.Namespace) -> int:
    payload: dict = {
        "config_path": str(Path(args.config).resolve()),
        "workers": args.workers,
    }
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.out is not None:
        payload["output_dir"] = str(Path(args.out).resolve())
    response = _post(args.server, "/run", payload)
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    for cell in body["cells"]:
        print(f"{cell['embedding']}  {cell['task']}  {cell['classifier']}  "
              f"{cell['reduction']}  acc={cell['mean_accuracy']:.4f}  "
              f"macro_f1={cell['macro_f1']:.4f}")
    for err in body["errors"]:
        print(f"FAILED {err['cell']}: {err['message']}", file=sys.stderr)
    for row in body["aggregates"]["across_tasks"]:
        print(f"geomean {row['embedding']}  {row['reduction']}  "
              f"over {len(row['tasks'])} task(s): {row['geo_mean_accuracy']:.4f}")
    print(f"wrote {len(body['files'])} file(s) to {body['output_dir']}")
    if body["status"] != "ok":
        print(f"{body['error_count']} cell(s) failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    response = _post(args.server, "/reduce", {
        "embeddings_path": str(Path(args.embeddings).resolve()),
        "spec": args.spec,
        "out_path": str(Path(args.out).resolve()),
        "collapse": args.collapse,
    })
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    print(f"{body['name']}: {body['words']} words, "
          f"dim {body['input_dim']} -> {body['output_dim']}, "
          f"wrote {body['out_path']}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    response = _post(args.server, "/inspect", {
        "embeddings_path": str(Path(args.embeddings).resolve()),
        "collapse": args.collapse,
    })
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    print(f"name: {body['name']}")
    print(f"words: {body['words']}")
    print(f"dim: {body['dim']}")
    print(f"value range: [{body['min_value']:.6g}, {body['max_value']:.6g}]")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedprobe",
        description="Probing benchmark for word embeddings: balanced "
                    "term/pair classification under information reduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment matrix from a config")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--workers", type=int, default=1,
                       help="parallel cell workers (default 1)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the output directory")
    p_run.add_argument("--server", default=None,
                       help="service URL (default: run in-process)")
    p_run.set_defaults(func=cmd_run)

    p_red = sub.add_parser("reduce", help="apply a reduction pipeline to an "
                                          "embedding file")
    p_red.add_argument("--embeddings", required=True, help="embedding text file")
    p_red.add_argument("--spec", required=True,
                       help="pipeline, e.g. 'truncate:16' or 'standardize,pca:50'")
    p_red.add_argument("--out", required=True, help="output embedding file")
    p_red.add_argument("--collapse", action="store_true",
                       help="average duplicate words instead of failing")
    p_red.add_argument("--server", default=None,
                       help="service URL (default: run in-process)")
    p_red.set_defaults(func=cmd_reduce)

    p_ins = sub.add_parser("inspect", help="show dimensions, vocabulary size "
                                           "and value range")
    p_ins.add_argument("--embeddings", required=True, help="embedding text file")
    p_ins.add_argument("--collapse", action="store_true",
                       help="average duplicate words instead of failing")
    p_ins.add_argument("--server", default=None,
                       help="service URL (default: run in-process)")
    p_ins.set_defaults(func=cmd_inspect)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except httpx.HTTPError as exc:
        print(f"error: could not reach the service: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
