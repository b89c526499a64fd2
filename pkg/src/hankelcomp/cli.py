"""Thin command-line client for the completion service.

By default requests are served by the in-process ASGI app (no network, no
separate server); --server targets a running instance instead.  Floating
point output is printed with 17 significant digits so identical runs are
byte-identical.

Exit codes: 0 success, 1 errors, 2 mathematically negative answers
(infeasible instances, non-completable patterns, witness found).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


def _fmt(obj, indent=0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_fmt(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {_fmt(v, indent + 2)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return "null"
        return format(obj, ".17g")
    return json.dumps(obj)


def dumps17(obj) -> str:
    """JSON with floats at 17 significant digits."""
    return _fmt(obj)


def _read_sequence(path: str) -> dict:
    raw = sys.stdin.read() if path == "-" else open(path).read()
    return json.loads(raw)


def _tolerances(args) -> dict:
    out = {}
    if getattr(args, "psd_tol", None) is not None:
        out["psd_tol"] = args.psd_tol
    if getattr(args, "pd_margin", None) is not None:
        out["pd_margin"] = args.pd_margin
    if getattr(args, "gamma", None) is not None:
        out["growth"] = args.gamma
    return out


def _parse_indices(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(" ", "").split(",") if tok != ""]


async def _post(server: str | None, path: str, payload: dict):
    if server is None:
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://hankelcomp.local", timeout=None
        ) as client:
            resp = await client.post(path, json=payload)
    else:
        async with httpx.AsyncClient(base_url=server, timeout=None) as client:
            resp = await client.post(path, json=payload)
    return resp.status_code, resp.json()


def _call(args, path: str, payload: dict):
    return asyncio.run(_post(args.server, path, payload))


def _emit(data: dict) -> None:
    print(dumps17(data))


def _finish(status_code: int, data: dict, negative: bool) -> int:
    _emit(data)
    if status_code >= 500:
        return EXIT_ERROR
    if status_code >= 400:
        return EXIT_ERROR
    return EXIT_NEGATIVE if negative else EXIT_OK


def cmd_check(args) -> int:
    payload = {"sequence": _read_sequence(args.input)}
    if args.order is not None:
        payload["order"] = args.order
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/check", payload)
    negative = code < 400 and not data.get("partial_positive_definite", False)
    return _finish(code, data, negative)


def cmd_classify(args) -> int:
    payload = {"indices": _parse_indices(args.pattern)}
    if args.horizon is not None:
        payload["horizon"] = args.horizon
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/classify-pattern", payload)
    negative = code < 400 and str(data.get("status", "")).startswith("NOT_")
    return _finish(code, data, negative)


def cmd_complete(args) -> int:
    payload = {
        "sequence": _read_sequence(args.input),
        "horizon": args.horizon,
        "strategy": args.strategy,
    }
    if args.d is not None:
        payload["d"] = args.d
    if args.l0 is not None:
        payload["l0"] = args.l0
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/complete", payload)
    if code == 400 and data.get("error", {}).get("kind") == "NotCompletable":
        _emit(data)
        return EXIT_NEGATIVE
    return _finish(code, data, False)


def cmd_measure_extract(args) -> int:
    data_in = _read_sequence(args.input)
    payload: dict = {}
    if isinstance(data_in, list):
        payload["values"] = data_in
    else:
        payload["sequence"] = data_in
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/measure/extract", payload)
    return _finish(code, data, False)


def cmd_oracle(args) -> int:
    payload = {
        "sequence": _read_sequence(args.input),
        "order": args.order,
        "mode": args.mode,
        "budget": args.budget,
        "seed": args.seed,
    }
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/oracle", payload)
    negative = code < 400 and not data.get("feasible", False)
    return _finish(code, data, negative)


def cmd_witness(args) -> int:
    payload = {
        "indices": _parse_indices(args.pattern),
        "order": args.order,
        "mode": args.mode,
        "budget": args.budget,
        "seed": args.seed,
    }
    tol = _tolerances(args)
    if tol:
        payload["tolerances"] = tol
    code, data = _call(args, "/witness", payload)
    negative = code < 400 and data.get("witness") is not None
    return _finish(code, data, negative)


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--server", default=None, help="base URL of a running service; default runs in process")
    p.add_argument("--psd-tol", type=float, default=None)
    p.add_argument("--pd-margin", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None, help="relative slack for free even entries")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hankelcomp",
        description="Positive (semi)definite completion of partial Hankel moment sequences.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="partial positive (semi)definiteness of a sequence")
    p.add_argument("input", help="sequence JSON file, or - for stdin")
    p.add_argument("--order", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify-pattern", help="completability verdict for a pattern")
    p.add_argument("pattern", help="comma-separated indices, e.g. 0,1,4")
    p.add_argument("--horizon", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("complete", help="construct a positive completion")
    p.add_argument("input", help="sequence JSON file, or - for stdin")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--strategy", choices=["auto", "schur", "measure", "geometric", "lift"], default="auto")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--l0", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("measure", help="measure subcommands")
    msub = p.add_subparsers(dest="measure_command", required=True)
    pe = msub.add_parser("extract", help="atomic measure of a positive sequence")
    pe.add_argument("input", help="JSON array of moments or sequence JSON; - for stdin")
    _add_common(pe)
    pe.set_defaults(func=cmd_measure_extract)

    p = sub.add_parser("oracle", help="search-based completion feasibility")
    p.add_argument("input", help="sequence JSON file, or - for stdin")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--mode", choices=["pd", "psd"], default="pd")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("witness", help="search for a non-completable instance on a pattern")
    p.add_argument("pattern", help="comma-separated indices")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--mode", choices=["pd", "psd"], default="pd")
    p.add_argument("--budget", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except httpx.HTTPError as exc:
        _emit({"error": {"kind": "TransportError", "detail": str(exc)}})
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        _emit({"error": {"kind": type(exc).__name__, "detail": str(exc)}})
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
