"""Command-line client for the pipeline.

Every subcommand builds the same request model the HTTP API accepts and by
default executes it in-process; `--server URL` sends it to a running
service instead.  Results are echoed as JSON on stdout, domain errors as
JSON {code, message, context} on stderr with exit code 1, usage errors exit
with code 2.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import StereoforgeError
from .service import ops
from .service.schemas import (
    ConvertRequest,
    DegradeRequest,
    GenRequest,
    HistmatchRequest,
    MetricsRequest,
    PackRequest,
    WarpRequest,
)

_HANDLERS = {
    "gen": ops.run_gen,
    "warp": ops.run_warp,
    "degrade": ops.run_degrade,
    "convert": ops.run_convert,
    "histmatch": ops.run_histmatch,
    "pack": ops.run_pack,
    "metrics": ops.run_metrics,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereoforge",
        description="Deterministic stereo video generation and restoration.",
    )
    parser.add_argument("--server", metavar="URL", default=None,
                        help="send the request to a running service instead "
                             "of executing in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="render a synthetic stereo clip")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--frames", type=int, default=21)
    p.add_argument("--drop", type=int, default=5,
                   help="discard this many leading frames")
    p.add_argument("--size", default="1024x512", metavar="WxH")
    p.add_argument("--objects", type=int, default=6)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("warp", help="forward-warp a clip along its depth")
    p.add_argument("input_dir")
    p.add_argument("depth_dir")
    p.add_argument("out_dir")
    p.add_argument("--mode", choices=("scaled", "metric"), default="scaled")
    p.add_argument("--scale", type=float, default=0.03)
    p.add_argument("--focal", type=float, default=None)
    p.add_argument("--baseline", type=float, default=None)
    p.add_argument("--fill", type=int, default=2)
    p.add_argument("--dilate", type=int, default=1)
    p.add_argument("--dilate-iterations", type=int, default=1)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("degrade", help="apply a seeded degradation recipe")
    p.add_argument("input_dir")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--target", default=None, metavar="WxH")
    p.add_argument("--stages", default=None,
                   help="comma list from blur,down,noise,jpeg")
    p.add_argument("--second-order", action="store_true")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("convert", help="full left-view to stereo conversion")
    p.add_argument("left_dir")
    p.add_argument("depth_dir")
    p.add_argument("out_dir")
    p.add_argument("--mode", choices=("scaled", "metric"), default="scaled")
    p.add_argument("--scale", type=float, default=0.03)
    p.add_argument("--focal", type=float, default=None)
    p.add_argument("--baseline", type=float, default=None)
    p.add_argument("--backend", default="baseline",
                   help='baseline, identity, or exec:"CMD {job}"')
    p.add_argument("--hist-match", action="store_true")
    p.add_argument("--hist-ref", choices=("input", "output-left"),
                   default="input")
    p.add_argument("--fill", type=int, default=2)
    p.add_argument("--dilate", type=int, default=1)
    p.add_argument("--dilate-iterations", type=int, default=1)
    p.add_argument("--timeout", type=float, default=600.0)
    p.add_argument("--workdir", default=None)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("histmatch", help="match histograms to a reference")
    p.add_argument("src_dir")
    p.add_argument("ref_dir")
    p.add_argument("out_dir")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("pack", help="combine the two views for display")
    p.add_argument("left_dir")
    p.add_argument("right_dir")
    p.add_argument("out_dir")
    p.add_argument("--mode", choices=("sbs", "tb", "anaglyph"), default="sbs")

    p = sub.add_parser("metrics", help="score one or two clips")
    p.add_argument("a_dir")
    p.add_argument("b_dir", nargs="?", default=None)
    p.add_argument("--kind", choices=("view", "temporal", "psnr", "ssim"),
                   required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--temporal-metric",
                   choices=("ssim", "psnr", "patch_cosine"),
                   default="patch_cosine")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return parser


def _build_request(parser: argparse.ArgumentParser, args: argparse.Namespace):
    cmd = args.command
    if cmd == "gen":
        w, h = _split_size(parser, args.size)
        return GenRequest(seed=args.seed, out=args.out, frames=args.frames,
                          drop=args.drop, width=w, height=h,
                          objects=args.objects, threads=args.threads)
    if cmd == "warp":
        if args.mode == "metric" and (args.focal is None or args.baseline is None):
            parser.error("--mode metric requires --focal and --baseline")
        return WarpRequest(input_dir=args.input_dir, depth_dir=args.depth_dir,
                           out=args.out_dir, mode=args.mode, scale=args.scale,
                           focal_px=args.focal, baseline_m=args.baseline,
                           fill=args.fill, dilate=args.dilate,
                           dilate_iterations=args.dilate_iterations,
                           threads=args.threads)
    if cmd == "degrade":
        return DegradeRequest(input_dir=args.input_dir, out=args.out_dir,
                              seed=args.seed, target=args.target,
                              stages=args.stages,
                              second_order=args.second_order,
                              threads=args.threads)
    if cmd == "convert":
        if args.mode == "metric" and (args.focal is None or args.baseline is None):
            parser.error("--mode metric requires --focal and --baseline")
        return ConvertRequest(left_dir=args.left_dir, depth_dir=args.depth_dir,
                              out=args.out_dir, scale_mode=args.mode,
                              scale=args.scale, focal_px=args.focal,
                              baseline_m=args.baseline, backend=args.backend,
                              hist_match=args.hist_match,
                              hist_ref=args.hist_ref, fill=args.fill,
                              dilate=args.dilate,
                              dilate_iterations=args.dilate_iterations,
                              timeout_s=args.timeout, workdir=args.workdir,
                              threads=args.threads)
    if cmd == "histmatch":
        return HistmatchRequest(src_dir=args.src_dir, ref_dir=args.ref_dir,
                                out=args.out_dir, threads=args.threads)
    if cmd == "pack":
        return PackRequest(left_dir=args.left_dir, right_dir=args.right_dir,
                           out=args.out_dir, mode=args.mode)
    if cmd == "metrics":
        if args.kind in ("view", "psnr", "ssim") and args.b_dir is None:
            parser.error(f"--kind {args.kind} requires B_DIR")
        return MetricsRequest(kind=args.kind, a_dir=args.a_dir,
                              b_dir=args.b_dir, mask_dir=args.mask,
                              temporal_metric=args.temporal_metric)
    raise AssertionError(f"unhandled command {cmd}")


def _split_size(parser: argparse.ArgumentParser, spec: str) -> tuple[int, int]:
    try:
        w, h = spec.lower().split("x")
        return int(w), int(h)
    except ValueError:
        parser.error(f"--size must look like 1024x512, got {spec!r}")


def _dispatch_http(server: str, command: str, request) -> int:
    import httpx

    url = f"{server.rstrip('/')}/v1/{command}"
    reply = httpx.post(url, json=request.model_dump(), timeout=None)
    if reply.status_code == 200:
        print(json.dumps(reply.json(), indent=2, sort_keys=True))
        return 0
    try:
        body = reply.json()
    except ValueError:
        body = {"code": "HttpError", "message": reply.text,
                "context": {"status": reply.status_code}}
    print(json.dumps(body, sort_keys=True), file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        request = _build_request(parser, args)
    except SystemExit as exc:  # parser.error inside _build_request
        return int(exc.code or 0)

    try:
        if args.server:
            return _dispatch_http(args.server, args.command, request)
        response = _HANDLERS[args.command](request)
    except StereoforgeError as exc:
        print(json.dumps(exc.as_dict(), sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps(response.model_dump(), indent=2, sort_keys=True))
    return 0


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
