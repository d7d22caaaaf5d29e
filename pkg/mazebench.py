#!/usr/bin/env python3
"""
Maze benchmark command line.

  generate     build the benchmark manifest (and images)
  render       re-render images for an existing manifest
  verify       re-check a manifest's ground truth
  eval         run providers over a manifest
  report       print tables from a run report
  serve-mock   run the offline mock provider server
  init-config  write a providers.yaml from the template
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

from maze.errors import MazeBenchError

logger = logging.getLogger("mazebench")


def cmd_generate(args) -> int:
    from maze.dataset import DEFAULT_GROUPS, assemble_benchmark, summarize, write_manifest

    out_dir = Path(args.out)
    groups = DEFAULT_GROUPS
    if args.groups:
        wanted = {g.strip().upper() for g in args.groups.split(",")}
        groups = tuple(g for g in DEFAULT_GROUPS if g.group_id in wanted)
    manifest = assemble_benchmark(
        groups,
        master_seed=args.seed,
        out_dir=None if args.no_images else out_dir,
        render_workers=args.workers,
    )
    write_manifest(manifest, out_dir / "manifest.json")
    logger.info(f"✅ Manifest written to {out_dir / 'manifest.json'}")
    print(json.dumps(summarize(manifest), indent=2))
    return 0


def cmd_render(args) -> int:
    from maze.dataset import load_manifest, rerender_images, write_manifest

    path = Path(args.manifest)
    manifest = rerender_images(load_manifest(path), path.parent, workers=args.workers)
    write_manifest(manifest, path)
    logger.info(f"✅ Rendered {len(manifest.entries)} images under {path.parent / 'images'}")
    return 0


def cmd_verify(args) -> int:
    from maze.dataset import load_manifest, verify_manifest

    problems = verify_manifest(load_manifest(Path(args.manifest)), oracle_max_cells=args.oracle_max_cells)
    for problem in problems:
        logger.error(f"❌ {problem}")
    if not problems:
        logger.info("✅ Manifest verified")
    return 1 if problems else 0


def cmd_eval(args) -> int:
    from prometheus_client import start_http_server

    from config_loader import ConfigLoader
    from maze.dataset import load_manifest
    from maze.harness import RunOptions, run_eval, save_report
    from maze.prompts import InputMode, PromptVariant, load_template

    loader = ConfigLoader(args.providers)
    config = loader.load()
    providers = loader.providers(config)
    settings = loader.run_settings(config)

    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)

    metrics_port = args.metrics_port or os.getenv("MAZEBENCH_METRICS_PORT")
    if metrics_port:
        start_http_server(int(metrics_port))
        logger.info(f"📊 Prometheus metrics endpoint started on :{metrics_port}/metrics")

    options = RunOptions(
        concurrency=args.concurrency or int(settings.get("concurrency", 4)),
        input_mode=InputMode(args.input_mode or settings.get("input_mode", InputMode.IMAGE.value)),
        prompt_variant=PromptVariant(args.prompt_variant or settings.get("prompt_variant", PromptVariant.STANDARD.value)),
        groups=[g.strip().upper() for g in args.groups.split(",")] if args.groups else None,
        image_root=manifest_path.parent,
        prompt_template=load_template(args.prompt_file or settings.get("prompt_file")),
        manifest_path=str(manifest_path),
        timestamp=args.timestamp,
    )
    report = run_eval(manifest, providers, options)
    save_report(report, Path(args.out))
    return 0


def cmd_report(args) -> int:
    from maze.dataset import load_manifest
    from maze.harness import load_report
    from maze.reporter import render_report

    report = load_report(Path(args.run))
    manifest_path = args.manifest or report.manifest_path
    if not manifest_path:
        raise MazeBenchError("run report does not record its manifest; pass --manifest")
    text = render_report(report, load_manifest(Path(manifest_path)), args.kind, args.format)
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        logger.info(f"✅ {args.kind} table written to {args.out}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def cmd_serve_mock(args) -> int:
    from mock_provider_server import MockProviderServer

    MockProviderServer(host=args.host, port=args.port).run()
    return 0


def cmd_init_config(args) -> int:
    from config_loader import ConfigLoader

    ConfigLoader().write_template(args.path, overwrite=args.force)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mazebench", description="Maze benchmark toolkit")
    parser.add_argument("--log-level", default=os.getenv("MAZEBENCH_LOG_LEVEL", "INFO"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="Assemble the benchmark")
    p.add_argument("--out", default="benchmark")
    p.add_argument("--seed", type=int, default=110)
    p.add_argument("--groups", help="Comma-separated group ids (default: all)")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--no-images", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("render", help="Re-render manifest images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="Re-check manifest annotations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--oracle-max-cells", type=int, default=49)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="Evaluate providers")
    p.add_argument("--manifest", required=True)
    p.add_argument("--providers", default=None, help="Providers file path or URL")
    p.add_argument("--input-mode", choices=["image", "text-grid"])
    p.add_argument("--prompt-variant", choices=["standard", "visual-intuition"])
    p.add_argument("--concurrency", type=int)
    p.add_argument("--groups")
    p.add_argument("--prompt-file")
    p.add_argument("--timestamp", help="Fixed report timestamp (reproducible reports)")
    p.add_argument("--metrics-port", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="Render tables from a run report")
    p.add_argument("--run", required=True)
    p.add_argument("--manifest")
    p.add_argument("--kind", default="leaderboard",
                   choices=["leaderboard", "per_group", "efficiency", "ultra_hard", "ablation", "summary"])
    p.add_argument("--format", default="markdown", choices=["markdown", "csv", "json"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve-mock", help="Run the mock provider server")
    p.add_argument("--host", default=os.getenv("MAZEBENCH_MOCK_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.getenv("MAZEBENCH_MOCK_PORT", "8790")))
    p.set_defaults(func=cmd_serve_mock)

    p = sub.add_parser("init-config", help="Write providers.yaml from the template")
    p.add_argument("--path", default="providers.yaml")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    logger.info(f"🚀 mazebench {args.command}")
    return args.func(args)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
    except MazeBenchError as e:
        logger.error(f"❌ {e}")
        exit(1)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        exit(1)
