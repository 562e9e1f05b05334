"""Command-line interface.

Subcommands:
  guess <path>           rank countries for one panorama
  profiles build         build color/caption/object/language profiles
  eval run               evaluate a labelled manifest
  eval ablate            cumulative module-removal study
  weights optimize       fit fusion weights on a development manifest
  serve                  run the HTTP service

``guess`` is a thin client: it assembles the same service the UI talks to
and posts the image through the in-process HTTP layer, so CLI and browser
exercise one code path. Batch tooling (profiles, eval, weights) drives the
core directly; those operations are not part of the HTTP surface.

Exit codes: 0 success, 1 unexpected error, 2 usage, 3 image decode,
4 provider, 5 remote service, 6 configuration, 7 data validation.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .engine import (
    EngineBundle,
    build_color_profiles_from_manifest,
    build_frequency_profiles_from_manifest,
    build_language_profiles_from_dir,
    load_engine,
)
from .errors import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_DECODE,
    EXIT_OK,
    EXIT_PROVIDER,
    EXIT_REMOTE,
    EXIT_UNEXPECTED,
    ConfigError,
    CountryRankError,
    exit_code_for,
)
from .evalkit import AblationRow, DatasetManifest, collect_samples, evaluate_samples, load_manifest, run_ablation
from .evidence.freqlist import KIND_CAPTION, KIND_OBJECT
from .fusion import WeightVector, mean_rank_objective, optimize_weights
from .profiles_io import (
    save_color_profiles,
    save_frequency_profiles,
    save_language_profiles,
    save_weights,
)

_ERROR_CODE_EXITS = {
    "decode": EXIT_DECODE,
    "provider": EXIT_PROVIDER,
    "remote": EXIT_REMOTE,
    "validation": EXIT_DATA,
    "not_found": EXIT_DATA,
    "state": EXIT_DATA,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="countryrank", description="Country ranking for street-level panoramas")
    parser.add_argument("--config", type=Path, default=None, help="engine configuration file (JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_guess = sub.add_parser("guess", help="rank countries for one panorama image")
    p_guess.add_argument("path", type=Path, help="panorama image file (2:1 equirectangular)")
    p_guess.add_argument("--north-offset", type=float, default=None, metavar="DEG", help="azimuth of image column 0")
    p_guess.add_argument("--weights", type=Path, default=None, metavar="FILE", help="fusion weight file")
    p_guess.add_argument("--explain", action="store_true", help="show per-module evidence")
    p_guess.add_argument("--top", type=int, default=10, help="ranking rows to print (default 10)")

    p_profiles = sub.add_parser("profiles", help="offline profile building")
    profiles_sub = p_profiles.add_subparsers(dest="profiles_command", required=True)
    p_build = profiles_sub.add_parser("build", help="build a profile file")
    p_build.add_argument("--kind", required=True, choices=["color", "caption", "object", "language"])
    p_build.add_argument("--manifest", type=Path, default=None, help="labelled dataset manifest (JSONL)")
    p_build.add_argument("--corpus", type=Path, default=None, help="directory of <language>.txt corpora")
    p_build.add_argument("--out", type=Path, required=True, help="output profile file")

    p_eval = sub.add_parser("eval", help="evaluation harness")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)
    p_run = eval_sub.add_parser("run", help="evaluate a manifest")
    p_run.add_argument("--manifest", type=Path, required=True)
    p_run.add_argument("--weights", type=Path, default=None)
    p_run.add_argument("--json", action="store_true", help="machine-readable report")
    p_ablate = eval_sub.add_parser("ablate", help="cumulative module removal study")
    p_ablate.add_argument("--manifest", type=Path, required=True)
    p_ablate.add_argument("--order", required=True, help="comma-separated module removal order")
    p_ablate.add_argument("--weights", type=Path, default=None)
    p_ablate.add_argument("--json", action="store_true", help="machine-readable report")

    p_weights = sub.add_parser("weights", help="fusion weight tooling")
    weights_sub = p_weights.add_subparsers(dest="weights_command", required=True)
    p_opt = weights_sub.add_parser("optimize", help="fit weights on a development manifest")
    p_opt.add_argument("--manifest", type=Path, required=True)
    p_opt.add_argument("--out", type=Path, required=True, help="output weight file")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--fixtures", type=Path, default=None, metavar="DIR", help="fixture provider directory")
    p_serve.add_argument("--static", type=Path, default=None, metavar="DIR", help="built web UI directory")

    return parser


def _post_guess(app, data: bytes, north_offset: float | None) -> httpx.Response:
    async def call() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        params = {}
        if north_offset is not None:
            params["north_offset_deg"] = str(north_offset)
        async with httpx.AsyncClient(transport=transport, base_url="http://engine.local") as client:
            return await client.post(
                "/api/guess",
                content=data,
                params=params,
                headers={"content-type": "application/octet-stream"},
            )

    return asyncio.run(call())


def _print_guess(doc: dict, top: int, explain: bool) -> None:
    for i, row in enumerate(doc["ranking"][:top], start=1):
        print(f"{i:3d}. {row['code']}  {row['score']:.6f}")
    if not explain:
        return
    print()
    print("weights used:")
    for module_id, weight in doc["weights_used"].items():
        print(f"  {module_id}: {weight:.4f}")
    if doc["abstentions"]:
        print(f"abstained: {', '.join(doc['abstentions'])}")
    for module_id, module in doc["per_module"].items():
        print()
        print(f"[{module_id}]" + (" (abstained)" if module["abstained"] else ""))
        for note in module["notes"]:
            print(f"  note: {note}")
        ordered = sorted(module["scores"].items(), key=lambda kv: (-kv[1], kv[0]))
        for code, score in ordered[:3]:
            print(f"  {code}  {score:.6f}")


def cmd_guess(args: argparse.Namespace) -> int:
    from .server import create_app

    bundle = load_engine(args.config, weights_path=args.weights)
    try:
        data = args.path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_DECODE
    app = create_app(bundle)
    try:
        response = _post_guess(app, data, args.north_offset)
    finally:
        bundle.engine.close()
    doc = response.json()
    if response.status_code != 200:
        print(f"error: {doc.get('message', response.text)}", file=sys.stderr)
        return _ERROR_CODE_EXITS.get(doc.get("code"), EXIT_UNEXPECTED)
    _print_guess(doc, args.top, args.explain)
    return EXIT_OK


def cmd_profiles_build(args: argparse.Namespace) -> int:
    bundle = load_engine(args.config)
    try:
        if args.kind == "language":
            if args.corpus is None:
                raise ConfigError("profiles build --kind language needs --corpus DIR")
            profiles = build_language_profiles_from_dir(args.corpus)
            save_language_profiles(profiles, args.out)
            print(f"wrote {len(profiles.profiles)} language profiles to {args.out}")
            return EXIT_OK
        if args.manifest is None:
            raise ConfigError(f"profiles build --kind {args.kind} needs --manifest FILE")
        manifest = load_manifest(args.manifest, bundle.engine.registry)
        if args.kind == "color":
            color = build_color_profiles_from_manifest(manifest, bundle.engine.registry)
            save_color_profiles(color, args.out)
            print(f"wrote {len(color)} color profiles to {args.out}")
            return EXIT_OK
        kind = KIND_CAPTION if args.kind == "caption" else KIND_OBJECT
        freq = build_frequency_profiles_from_manifest(manifest, kind, bundle.engine)
        save_frequency_profiles(freq, args.out)
        print(f"wrote {len(freq)} {args.kind} profiles to {args.out}")
        return EXIT_OK
    finally:
        bundle.engine.close()


def _load_eval_inputs(args: argparse.Namespace) -> tuple[EngineBundle, DatasetManifest, WeightVector]:
    weights_path = getattr(args, "weights", None)
    bundle = load_engine(args.config, weights_path=weights_path)
    manifest = load_manifest(args.manifest, bundle.engine.registry)
    return bundle, manifest, bundle.engine.weights


def _metrics_lines(label: str, metrics) -> list[str]:
    return [
        f"{label}",
        f"  items: {metrics.sample_count}",
        f"  mean rank: {metrics.mean:.4f}",
        f"  std rank: {metrics.std:.4f}",
        f"  median rank: {metrics.median:.4f}",
        f"  top-1: {metrics.top1_count}/{metrics.sample_count}",
    ]


def cmd_eval_run(args: argparse.Namespace) -> int:
    bundle, manifest, weights = _load_eval_inputs(args)
    try:
        collected = collect_samples(manifest, bundle.engine.evidence_fn())
        result = evaluate_samples(collected.samples, weights, bundle.engine.registry, collected.failures)
    finally:
        bundle.engine.close()
    if args.json:
        doc = {
            "metrics": result.metrics.to_dict(),
            "items": [
                {"truth": t, "rank": r, "report_digest": d}
                for t, r, d in zip(result.truths, result.ranks, result.digests)
            ],
            "failures": [{"path": f.path, "message": f.message} for f in result.failures],
        }
        print(json.dumps(doc, indent=1, sort_keys=True))
        return EXIT_OK
    for line in _metrics_lines("evaluation", result.metrics):
        print(line)
    if result.failures:
        print(f"  failed items: {len(result.failures)}")
        for failure in result.failures:
            print(f"    {failure.path}: {failure.message}")
    return EXIT_OK


def _ablation_doc(rows: list[AblationRow]) -> list[dict]:
    out = []
    for row in rows:
        out.append(
            {
                "label": row.label,
                "removed": list(row.removed),
                "active": list(row.active),
                "metrics": row.metrics.to_dict() if row.metrics is not None else None,
            }
        )
    return out


def cmd_eval_ablate(args: argparse.Namespace) -> int:
    order = [m.strip() for m in args.order.split(",") if m.strip()]
    bundle, manifest, weights = _load_eval_inputs(args)
    try:
        collected = collect_samples(manifest, bundle.engine.evidence_fn())
        rows = run_ablation(collected.samples, weights, bundle.engine.registry, order)
    finally:
        bundle.engine.close()
    if args.json:
        print(json.dumps({"rows": _ablation_doc(rows)}, indent=1, sort_keys=True))
        return EXIT_OK
    for row in rows:
        if row.metrics is None:
            print(f"{row.label}: no modules left, ranking is uniform")
            continue
        m = row.metrics
        print(
            f"{row.label}: mean {m.mean:.4f}  std {m.std:.4f}  "
            f"median {m.median:.4f}  top-1 {m.top1_count}/{m.sample_count}"
        )
    return EXIT_OK


def cmd_weights_optimize(args: argparse.Namespace) -> int:
    bundle = load_engine(args.config)
    try:
        manifest = load_manifest(args.manifest, bundle.engine.registry)
        collected = collect_samples(manifest, bundle.engine.evidence_fn())
        modules = bundle.engine.modules
        best = optimize_weights(collected.samples, bundle.engine.registry, modules)
        objective = mean_rank_objective(collected.samples, best, bundle.engine.registry)
    finally:
        bundle.engine.close()
    save_weights(best, args.out)
    print(f"wrote weights to {args.out}")
    for module_id in modules:
        print(f"  {module_id}: {best.weights[module_id]:.4f}")
    print(f"mean rank on development set: {objective:.4f}")
    if collected.failures:
        print(f"failed items skipped: {len(collected.failures)}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    bundle = load_engine(args.config, fixtures_dir=args.fixtures)
    static_dir = args.static
    if static_dir is None:
        default_static = Path("frontend") / "dist"
        if default_static.is_dir():
            static_dir = default_static
    app = create_app(bundle, static_dir=static_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        bundle.engine.close()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "guess":
            return cmd_guess(args)
        if args.command == "profiles":
            return cmd_profiles_build(args)
        if args.command == "eval":
            if args.eval_command == "run":
                return cmd_eval_run(args)
            return cmd_eval_ablate(args)
        if args.command == "weights":
            return cmd_weights_optimize(args)
        if args.command == "serve":
            return cmd_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except CountryRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_UNEXPECTED


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
