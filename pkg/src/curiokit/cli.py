"""Command-line entry points: train, eval, compare, plot, normalize."""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from .agents import AGENT_KINDS
from .config import load_config, with_overrides
from .evaluate import evaluate_checkpoint
from .metrics import ScoreTable, format_score_table
from .plots import emit_plot
from .training import train


def _cmd_train(args):
    config = load_config(args.config)
    config = with_overrides(config, seed=args.seed, out_dir=args.out)
    if config.out_dir is None:
        config = replace(
            config, out_dir=f"runs/{config.env.label()}_{config.agent}_s{config.seed}"
        )
    artifacts = train(config)
    s = artifacts.summary
    print(f"run dir: {artifacts.run_dir}")
    print(
        f"{s['agent']} on {s['env']} seed {s['seed']}: "
        f"{s['rollouts_run']} rollouts, {s['episodes_completed']} episodes"
    )
    if s["best_windowed_reward"] is not None:
        print(f"best windowed reward: {s['best_windowed_reward']:.4f}")
    if s["first_sustained_rollout"] is not None:
        print(f"first sustained success at rollout {s['first_sustained_rollout']}")
    return 0


def _cmd_eval(args):
    report, agent = evaluate_checkpoint(
        args.checkpoint, args.episodes, seed=args.seed, mode=args.mode
    )
    print(f"agent: {agent.kind}, episodes: {report.episodes} ({args.mode})")
    print(f"mean return: {report.mean_return:.4f} (std {report.std_return:.4f})")
    print(f"success rate: {report.success_rate:.3f}")
    print(f"mean episode length: {report.mean_length:.1f}")
    print(f"trap time fraction: {report.trap_time_fraction:.4f}")
    return 0


def _cmd_compare(args):
    seeds = [int(s) for s in args.seeds.split(",") if s != ""]
    if not seeds:
        raise SystemExit("no seeds given")
    agents = args.agents.split(",") if args.agents else list(AGENT_KINDS)
    for kind in agents:
        if kind not in AGENT_KINDS:
            raise SystemExit(f"unknown agent kind {kind!r}; known: {AGENT_KINDS}")
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    table = ScoreTable()
    all_summaries = []
    for config_path in args.configs:
        base = load_config(config_path)
        env_label = base.env.label()
        run_dirs = []
        for kind in agents:
            per_seed_scores = []
            for seed in seeds:
                run_dir = out_root / env_label / f"{kind}_s{seed}"
                config = replace(base, agent=kind, seed=seed, out_dir=str(run_dir))
                print(f"training {kind} on {env_label}, seed {seed} ...", flush=True)
                artifacts = train(config)
                run_dirs.append(str(run_dir))
                per_seed_scores.append(artifacts.summary["score"])
                all_summaries.append(artifacts.summary)
            table.add(env_label, kind, sum(per_seed_scores) / len(per_seed_scores))
        for metric in ("reward", "feature_std"):
            emit_plot(run_dirs, metric, out_root / f"{env_label}_{metric}.png")
    with open(out_root / "compare_summary.json", "w", encoding="utf-8") as fh:
        json.dump({"runs": all_summaries, "scores": table.scores}, fh, indent=2)
        fh.write("\n")
    text = format_score_table(table)
    print(text)
    with open(out_root / "normalized_scores.txt", "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return 0


def _cmd_plot(args):
    out = emit_plot(args.runs, args.metric, args.out)
    print(f"wrote {out}")
    return 0


def _cmd_normalize(args):
    cells = {}
    for run_dir in args.runs:
        summary_path = Path(run_dir) / "summary.json"
        if not summary_path.exists():
            raise SystemExit(f"{run_dir} has no summary.json")
        with open(summary_path, "r", encoding="utf-8") as fh:
            s = json.load(fh)
        cells.setdefault((s["env"], s["agent"]), []).append(s["score"])
    table = ScoreTable()
    for (env, agent), scores in cells.items():
        table.add(env, agent, sum(scores) / len(scores))
    print(format_score_table(table))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curiokit",
        description="Train and compare curiosity-driven agents on grid worlds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run one seeded training process")
    p.add_argument("--config", required=True, help="YAML config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--mode", choices=("greedy", "stochastic"), default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("compare", help="run the agent matrix over configs and seeds")
    p.add_argument("--configs", nargs="+", required=True)
    p.add_argument("--seeds", required=True, help="comma-separated seed list")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--agents",
        default=None,
        help=f"comma-separated agent kinds (default: all of {','.join(AGENT_KINDS)})",
    )
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("plot", help="plot a metric across runs with 1-sigma bands")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--metric", choices=("reward", "feature_std"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_plot)

    p = sub.add_parser("normalize", help="print the normalized score table")
    p.add_argument("--runs", nargs="+", required=True)
    p.set_defaults(fn=_cmd_normalize)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
