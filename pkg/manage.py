#!/usr/bin/env python3
"""
manage.py - Management script for the job clustering pipeline.

Usage:
    python manage.py synth --out data/              # Write the synthetic workload
    python manage.py extract --config run.cfg       # Phase 1: features.csv
    python manage.py select --mode variance --p 0.85
    python manage.py cluster --kmin 2 --kmax 30     # K sweep per group
    python manage.py rank                           # Centroid-distance ranking
    python manage.py plot                           # plot_frame.csv, plot2d.svg, plot3d.svg
    python manage.py pipeline --config run.cfg      # All stages plus report.json
"""

import argparse
import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import load_config
from loader.errors import JobClustError
from loader.logging_config import setup_logging
from pipeline.stages import (cmd_cluster, cmd_extract, cmd_pipeline, cmd_plot, cmd_rank,
                             cmd_select, cmd_synth)

MODE_ALIASES = {"variance": "variance", "variance_threshold": "variance",
                "preset": "preset", "literature_preset": "preset", "auto": "auto"}


def run_synth(cfg, args) -> bool:
    samples, truth = cmd_synth(cfg, n_jobs=args.jobs, n_nodes=args.nodes)
    print(f"🧪 Synthetic workload: {samples}")
    print(f"🏷️  Ground truth: {truth}")
    return True


def run_extract(cfg, args) -> bool:
    m = cmd_extract(cfg)
    print(f"📊 Feature matrix {m.shape[0]} jobs x {m.shape[1]} columns "
          f"({len(m.imputations)} imputed cells) -> {cfg.out_dir}")
    return True


def run_select(cfg, args) -> bool:
    for group, report in cmd_select(cfg).items():
        threshold = f" threshold {report.threshold:.4f}" if report.threshold is not None else ""
        print(f"🔎 {group}: {len(report.selected)}/{len(report.column_variances)} columns kept"
              f" ({report.mode}{threshold})")
    return True


def run_cluster(cfg, args) -> bool:
    for group, sweep in cmd_cluster(cfg).items():
        print(f"🧩 {group}: best K={sweep['best_k']} silhouette {sweep['best_score']:.4f} ({sweep['band']})")
    return True


def run_rank(cfg, args) -> bool:
    for group, ranked in cmd_rank(cfg).items():
        top = ", ".join(f"{r.label} ({r.distance:.4f})" for r in ranked if r.top)
        print(f"🏆 {group}: {top}")
    return True


def run_plot(cfg, args) -> bool:
    for path in cmd_plot(cfg):
        print(f"🖼️  {path}")
    return True


def run_pipeline(cfg, args) -> bool:
    report = cmd_pipeline(cfg)
    print(f"✅ Best K={report['best_k']} for {report['best_group']}: "
          f"silhouette {report['best_score']:.4f} ({report['band']})")
    if report.get("adjusted_rand_index") is not None:
        print(f"🎯 Adjusted Rand index vs ground truth: {report['adjusted_rand_index']:.4f}")
    print(f"📄 Report: {cfg.out_dir / 'report.json'}")
    return True


COMMANDS = {
    'synth': (run_synth, 'Generate a seeded synthetic workload'),
    'extract': (run_extract, 'Extract the per-node feature matrix'),
    'select': (run_select, 'Scale features and select columns'),
    'cluster': (run_cluster, 'K-means sweep with silhouette model selection'),
    'rank': (run_rank, 'Rank features by centroid distance'),
    'plot': (run_plot, 'PCA plot frame and 2D/3D SVG scatters'),
    'pipeline': (run_pipeline, 'Run every stage and write report.json'),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='key=value configuration file')
    common.add_argument('--seed', type=int, help='Random seed')
    common.add_argument('--mode', choices=sorted(MODE_ALIASES), help='Selection mode')
    common.add_argument('--p', type=float, help='Variance threshold parameter in (0, 1)')
    common.add_argument('--kmin', type=int, help='Smallest K of the sweep')
    common.add_argument('--kmax', type=int, help='Largest K of the sweep')
    common.add_argument('--out', type=Path, help='Output directory')
    common.add_argument('--experiment', choices=['per_kpi', 'all_kpi'], help='Clustering experiment')
    common.add_argument('--inputs', nargs='+', help='KPI input files')

    parser = argparse.ArgumentParser(
        description="HPC Job Clustering Tool",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python manage.py synth --out data/ --seed 7
  python manage.py pipeline --inputs data/kpi_samples.csv --out runs/exp2 --p 0.85
  python manage.py cluster --config run.cfg --experiment per_kpi
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    for name, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, parents=[common])
        if name == 'synth':
            sub.add_argument('--jobs', type=int, default=200, help='Number of jobs')
            sub.add_argument('--nodes', type=int, default=5, help='Nodes per job')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(1)

    try:
        overrides = {
            'seed': args.seed,
            'selection_mode': MODE_ALIASES[args.mode] if args.mode else None,
            'p': args.p,
            'kmin': args.kmin,
            'kmax': args.kmax,
            'out_dir': args.out,
            'experiment': args.experiment,
            'inputs': args.inputs,
        }
        cfg = load_config(args.config, overrides)
        setup_logging(cfg.log_dir, cfg.log_level)
        handler, _ = COMMANDS[args.command]
        success = handler(cfg, args)
        sys.exit(0 if success else 1)

    except JobClustError as e:
        print(f"❌ {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\n🛑 Operation cancelled by user.")
        sys.exit(1)
    except Exception as e:
        logging.getLogger('jobclust.pipeline').exception("Unexpected failure")
        print(f"\n💥 Unexpected error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
