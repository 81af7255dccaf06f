"""Command-line entry point.

Subcommands: gen-data (write teaching/aux/eval dataset files), experiment
(run one of the three variable-selection experiments), verify (brute-force
certificates), meta (online meta-learner teaching curves), serve (live
session service). Exit codes: 0 success, 1 usage, 2 config, 3 runtime,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="teachlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seeds_flag=True):
        sp.add_argument("--config", type=Path, default=None, help="JSON config file")
        sp.add_argument("--out", type=Path, required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="base seed override")
        if seeds_flag:
            sp.add_argument("--seeds", type=int, default=None, help="number of replicate seeds")

    sp = sub.add_parser("gen-data", help="write teaching, aux and eval dataset CSVs")
    common(sp, seeds_flag=False)

    sp = sub.add_parser("experiment", help="run experiment 1, 2 or 3")
    sp.add_argument("id", type=int, help="experiment id (1, 2 or 3)")
    common(sp)
    sp.add_argument("--eta", type=float, default=None, help="switch probability override")
    sp.add_argument("--horizon", type=int, default=None, help="episode horizon override")

    sp = sub.add_parser("verify", help="brute-force certificates on the tiny instance")
    common(sp, seeds_flag=False)
    sp.add_argument("--eta", type=float, default=1.0, help="switch probability for the education check")

    sp = sub.add_parser("meta", help="online meta-learner teaching curves")
    common(sp)

    sp = sub.add_parser("serve", help="run the live session service")
    sp.add_argument("--config", type=Path, default=None)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8123)
    return p


def cmd_gen_data(cfg, out: Path) -> int:
    from .datagen import generate_dataset, save_dataset_csv
    from .experiments import ExperimentSetup

    setup = ExperimentSetup(dataset=cfg.dataset, base_seed=cfg.base_seed,
                            n_aux=cfg.n_aux, n_eval=cfg.n_eval)
    out.mkdir(parents=True, exist_ok=True)
    ds = generate_dataset(setup.teaching_spec(0))
    save_dataset_csv(ds, out / "teaching.csv")
    for i, d in enumerate(setup.aux_datasets()):
        save_dataset_csv(d, out / f"aux_{i:02d}.csv")
    for i, d in enumerate(setup.eval_datasets()):
        save_dataset_csv(d, out / f"eval_{i:02d}.csv")
    n = 1 + cfg.n_aux + cfg.n_eval
    print(f"wrote {n} dataset files to {out}")
    return EXIT_OK


def cmd_experiment(exp_id: int, cfg, out: Path) -> int:
    from .experiments import ExperimentSetup, run_experiment

    if exp_id not in (1, 2, 3):
        print(f"experiment id must be 1, 2 or 3 (got {exp_id})", file=sys.stderr)
        return EXIT_USAGE
    setup = ExperimentSetup(
        dataset=cfg.dataset,
        teacher=cfg.teacher.build(),
        learner_w1=cfg.learner.w1,
        learner_w0=cfg.learner.w0,
        learner_w2=cfg.learner.w2_enlightened,
        n_seeds=cfg.n_seeds,
        base_seed=cfg.base_seed,
        n_aux=cfg.n_aux,
        n_eval=cfg.n_eval,
    )
    summary = run_experiment(exp_id, setup)
    out.mkdir(parents=True, exist_ok=True)
    report = summary.to_report()
    if exp_id == 2:
        summary.write_eval_csv(out / "exp2_unassisted.csv")
    else:
        summary.write_curves_csv(out / f"exp{exp_id}_curves.csv")
        summary.write_means_csv(out / f"exp{exp_id}_means.csv")
        ep_dir = out / "episodes"
        ep_dir.mkdir(exist_ok=True)
        for name, arm in sorted(summary.arms.items()):
            for s, log in enumerate(arm.logs):
                log.write_csv(ep_dir / f"exp{exp_id}_{name}_seed{s}.csv")
    (out / f"exp{exp_id}_summary.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    lines = [f"experiment {exp_id}"]
    for key, val in sorted(report.items()):
        lines.append(f"  {key}: {val}")
    (out / f"exp{exp_id}_summary.txt").write_text("\n".join(lines) + "\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify(out: Path, eta: float) -> int:
    from .propositions import verify_propositions

    report = verify_propositions(eta=eta)
    out.mkdir(parents=True, exist_ok=True)
    d = report.to_dict()
    (out / "verify_report.json").write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    print(json.dumps(d, indent=2, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_meta(cfg, out: Path) -> int:
    from .metateach import run_meta_experiment

    out.mkdir(parents=True, exist_ok=True)
    curves = run_meta_experiment(
        cfg.meta, n_seeds=cfg.meta_seeds, base_seed=cfg.base_seed, cache_dir=out
    )
    curves.write_csv(out / "meta_curves.csv")
    report = curves.to_report()
    (out / "meta_summary.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_serve(cfg, out: Path, host: str, port: int) -> int:
    import uvicorn

    from .server import create_app

    out.mkdir(parents=True, exist_ok=True)
    app = create_app(cfg, log_dir=out)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:  # e.g. port already bound
        print(f"cannot serve on {host}:{port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SystemExit:  # uvicorn startup failures exit internally
        print(f"server failed to start on {host}:{port}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    from .config import ConfigError, apply_overrides, load_config

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = load_config(getattr(args, "config", None))
        cfg = apply_overrides(
            cfg,
            base_seed=getattr(args, "seed", None),
            n_seeds=getattr(args, "seeds", None) if args.command != "meta" else None,
            meta_seeds=getattr(args, "seeds", None) if args.command == "meta" else None,
            horizon=getattr(args, "horizon", None),
            eta=getattr(args, "eta", None) if args.command == "experiment" else None,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "gen-data":
            return cmd_gen_data(cfg, args.out)
        if args.command == "experiment":
            return cmd_experiment(args.id, cfg, args.out)
        if args.command == "verify":
            return cmd_verify(args.out, args.eta)
        if args.command == "meta":
            return cmd_meta(cfg, args.out)
        if args.command == "serve":
            return cmd_serve(cfg, args.out, args.host, args.port)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
