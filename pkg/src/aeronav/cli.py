"""Command-line entry points: generate, run, evaluate, stats, qc, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .agents import LandmarkPilot, OracleAgent, RandomAgent, run_episode
from .datastore import (
    Corpus,
    generate_corpus,
    load_corpus,
    qc_filter,
    save_corpus,
    write_logs,
    read_logs,
)
from .errors import AeronavError
from .metrics import dataset_stats, evaluate
from .plots import write_stats_artifacts
from .simcore import DEFAULT_FOV_DEG, DEFAULT_MAX_STEPS, FloodSpec, NoiseSpec, apply_flood
from .worldmodel import GeneratorParams

EXIT_VALIDATION = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-clip", type=float, default=100.0)
    p.add_argument("--flood-level", type=float, default=0.0)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--fov-deg", type=float, default=DEFAULT_FOV_DEG)


def _noise(args) -> NoiseSpec:
    if args.noise_sigma > 0:
        return NoiseSpec(enabled=True, sigma=args.noise_sigma, clip=args.noise_clip)
    return NoiseSpec()


def cmd_generate(args) -> int:
    params = GeneratorParams(extent=args.extent, n_objects=args.objects)
    corpus = generate_corpus(args.seed, n_scenes=args.scenes,
                             episodes_per_scene=args.episodes_per_scene, params=params)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus.scenes)} scenes, {len(corpus.episodes)} episodes to {args.out}")
    return 0


def _make_agent(name: str, seed: int, fov_deg: float):
    if name == "oracle":
        return OracleAgent()
    if name == "landmark-pilot":
        return LandmarkPilot(fov_deg=fov_deg)
    if name == "random":
        return RandomAgent(np.random.default_rng(seed))
    raise AeronavError(f"unknown agent {name!r}")


def cmd_run(args) -> int:
    corpus = load_corpus(args.corpus)
    agent = _make_agent(args.agent, args.seed, args.fov_deg)
    noise = _noise(args)
    logs = []
    for i, ep in enumerate(corpus.episodes):
        scene = corpus.scenes[ep.scene_id]
        if args.flood_level > 0:
            scene = apply_flood(scene, FloodSpec(args.flood_level),
                                protected_ids=(ep.goal_object_id,))
        log = run_episode(scene, ep, agent, noise=noise, max_steps=args.max_steps,
                          fov_deg=args.fov_deg, seed=args.seed + i)
        logs.append(log)
    out = Path(args.corpus) / "logs" / f"{agent.tag}.jsonl"
    write_logs(logs, out)
    _register_log_tag(Path(args.corpus), agent.tag)
    n_ok = sum(1 for l in logs if l.final_distance <= 20.0)
    print(f"ran {len(logs)} episodes with {agent.tag}; {n_ok} reached the goal; wrote {out}")
    return 0


def _register_log_tag(corpus_dir: Path, tag: str) -> None:
    mpath = corpus_dir / "manifest.json"
    manifest = json.loads(mpath.read_text())
    tags = set(manifest.get("log_tags", []))
    tags.add(tag)
    manifest["log_tags"] = sorted(tags)
    mpath.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")


def _load_logs(corpus_dir: str, tag_or_path: str):
    p = Path(tag_or_path)
    if p.suffix != ".jsonl" or not p.exists():
        p = Path(corpus_dir) / "logs" / f"{tag_or_path}.jsonl"
    if not p.exists():
        raise AeronavError(f"no trajectory logs at {p}")
    return read_logs(p)


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    logs = _load_logs(args.corpus, args.logs)
    if not logs:
        raise AeronavError("no trajectory logs to evaluate")
    report = evaluate(logs, corpus.episode_index())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_json(), sort_keys=True, indent=1) + "\n")
    m = report.overall
    print(f"NE {m.ne_mean:.2f} m  SR {m.sr:.1f}%  OSR {m.osr:.1f}%  SPL {m.spl:.1f}%  "
          f"({m.n} episodes) -> {out}")
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    logs = _load_logs(args.corpus, args.logs)
    if not logs:
        raise AeronavError("no trajectory logs for statistics")
    stats = dataset_stats(logs, corpus.episode_index(), corpus.scenes)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "stats.json").write_text(json.dumps(stats.to_json(), sort_keys=True, indent=1) + "\n")
    written = write_stats_artifacts(stats, outdir)
    print(f"wrote stats.json and {len(written)} artifacts to {outdir}")
    return 0


def cmd_qc(args) -> int:
    corpus = load_corpus(args.corpus)
    logs = _load_logs(args.corpus, args.logs)
    accepted, rejected = qc_filter(logs, corpus.episode_index())
    base = Path(args.corpus) / "logs"
    write_logs(accepted, base / f"{args.logs}.accepted.jsonl")
    write_logs(rejected, base / f"{args.logs}.rejected.jsonl")
    print(f"accepted {len(accepted)}, rejected {len(rejected)}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway import GatewayConfig, make_app

    corpus_dir = args.corpus_dir or os.environ.get("CORPUS_DIR")
    if not corpus_dir:
        raise AeronavError("serve needs --corpus-dir or CORPUS_DIR")
    port = args.port or int(os.environ.get("PORT", "8000"))
    cfg = GatewayConfig(noise=_noise(args), max_steps=args.max_steps, fov_deg=args.fov_deg)
    static = args.static_dir or os.environ.get("STATIC_DIR")
    app = make_app(corpus_dir=corpus_dir, config=cfg, static_dir=static)
    uvicorn.run(app, host="0.0.0.0", port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aeronav")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate scenes and episodes from a seed")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--scenes", type=int, default=4)
    p.add_argument("--episodes-per-scene", type=int, default=25)
    p.add_argument("--extent", type=float, default=1000.0)
    p.add_argument("--objects", type=int, default=300)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="fly an agent over every episode in a corpus")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--agent", required=True,
                   choices=["oracle", "landmark-pilot", "random"])
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate", help="compute NE/SR/OSR/SPL for a log set")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--logs", required=True, help="agent tag or a .jsonl path")
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="corpus statistics: CSV tables and figures")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--logs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("qc", help="quality-control filter pass over a log set")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--logs", required=True)
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("serve", help="start the demonstration-collection gateway")
    _add_common(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--corpus-dir", default=None)
    p.add_argument("--scene-dir", default=None, help="unused alias; scenes live in the corpus")
    p.add_argument("--static-dir", default=None, help="directory with the pilot UI build")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_VALIDATION if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except AeronavError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
