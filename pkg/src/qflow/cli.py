"""``qflow`` command line: verify, run, sweep, report.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 numerical blow-up.
"""

import argparse
import json
import sys
from pathlib import Path

from .errors import BlowUpError, ConfigError, ManifestMismatchError, QFlowError, UnknownSuiteError
from .experiment.config import load_run_config, load_sweep_spec
from .experiment.report import merge
from .experiment.runner import execute, with_seed
from .experiment.sweep import SweepMemberError, write_sweep
from .experiment.verify import SUITES, run_suites

OK, FAILED, USAGE, BLOWUP = 0, 1, 2, 3


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_verify(args):
    report = run_suites(args.suite, seed=args.seed if args.seed is not None else 0)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verify_report.json").write_text(text + "\n")
    print(text)
    return OK if all(s["passed"] for s in report.values()) else FAILED


def cmd_run(args):
    cfg = load_run_config(with_seed(_read(args.config), args.seed), source=args.config)
    run, out = execute(cfg, args.out)
    print(f"{len(run)} snapshots to t={run.times[-1]:.6g}; wrote {out}")
    return OK


def cmd_sweep(args):
    spec = load_sweep_spec(with_seed(_read(args.spec), args.seed), source=args.spec)
    out = args.out or spec.base.output_dir
    rows, path = write_sweep(spec, out, threads=args.threads)
    for r in rows:
        print(f"eps={r.eps:.4g} sup_dist={r.sup_distN:.4g} gap={r.director_gap:.4g}")
    print(f"wrote {path / 'sweep_report.csv'}")
    return OK


def cmd_report(args):
    path, plots = merge(args.dirs, args.out or "report")
    print(f"wrote {path} and {len(plots)} plot data file(s)")
    return OK


def build_parser():
    ap = argparse.ArgumentParser(prog="qflow", description="Relaxed Q-tensor flow experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="concurrent sweep members (results do not depend on it)")
    common.add_argument("--out", help="output directory, overriding the configuration")
    common.add_argument("--seed", type=int, help="random seed, overriding the configuration")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run property suites")
    v.add_argument("suite", nargs="?", default="all", help=f"one of {', '.join(SUITES)} or all")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", parents=[common], help="simulate one configuration")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", parents=[common], help="run an epsilon ladder")
    s.add_argument("spec")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("report", parents=[common], help="merge run directories")
    m.add_argument("dirs", nargs="+")
    m.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads < 1:
        ap.error("--threads must be at least 1")
    try:
        return args.func(args)
    except SweepMemberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BLOWUP if isinstance(exc.cause, BlowUpError) else USAGE
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return BLOWUP
    except (ConfigError, UnknownSuiteError, ManifestMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except QFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
