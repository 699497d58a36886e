"""Command line entry point: ``dproc run | oracle | predict``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import json
import sys

from . import analytics, harness, oracle


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = Parser(prog="dproc", description="Simulate and check the random graph d-process.")
    sub = p.add_subparsers(dest="command", parser_class=Parser)
    sub.required = True

    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    r.add_argument("--kind", choices=harness.KINDS)
    r.add_argument("--n", type=int)
    r.add_argument("--d", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int, dest="base_seed")
    r.add_argument("--process", choices=("graph", "bin"))
    r.add_argument("--mode", choices=("faithful", "accelerated"))
    r.add_argument("--checkpoints-s", type=_int_list)
    r.add_argument("--checkpoints-t", type=_int_list)
    r.add_argument("--checkpoints-m", type=_int_list)
    r.add_argument("--output", help="JSONL trial records (plus <stem>.csv), or the CSV report with --format csv")
    r.add_argument("--format", choices=harness.FORMATS)
    r.add_argument("--workers", type=int, help="default: $DPROC_WORKERS or 1")
    r.add_argument("--epsilon", type=float)
    r.add_argument("--window", type=float)
    r.add_argument("--check", action="store_true", default=None, help="check invariants at every step")
    r.add_argument("--chunk-size", type=int)

    o = sub.add_parser("oracle", help="exact laws for tiny instances")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--d", type=int, required=True)
    o.add_argument("--query", choices=("nonsat", "outcome", "degrees"), default="nonsat")
    o.add_argument("--s", type=int, help="edge count for --query degrees")
    o.add_argument("--budget", type=int, default=oracle.DEFAULT_STATE_BUDGET)

    q = sub.add_parser("predict", help="print analytic predictions")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--s", type=float, help="edge count: prints ell^-1(s) and beta_i there")
    q.add_argument("--x", type=float, help="ball count: prints beta_i, ell, tau there")
    q.add_argument("--t", type=int, help="deficit: prints f_j")
    return p


def _config(args):
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    names = ["kind", "n", "d", "trials", "base_seed", "process", "mode", "checkpoints_s",
             "checkpoints_t", "checkpoints_m", "output", "format", "workers", "epsilon",
             "window", "check", "chunk_size"]
    for name in names:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    missing = [k for k in ("kind", "n", "d", "trials") if k not in data]
    if missing:
        raise UsageError(f"dproc run: error: missing required settings: {', '.join('--' + m for m in missing)}")
    try:
        return harness.ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"dproc run: error: {exc}") from None


def cmd_run(args, out):
    cfg = _config(args)
    report = harness.run_experiment(cfg)
    out.write(report.to_json() + "\n")


def _frac(p):
    return f"{p.numerator}/{p.denominator}"


def _checked_size(args):
    try:
        analytics.AnalyticModel(args.n, args.d)
        harness.validate_size(args.n, args.d)
    except ValueError as exc:
        raise UsageError(f"dproc {args.command}: error: {exc}") from None


def cmd_oracle(args, out):
    _checked_size(args)
    if args.query == "nonsat":
        p = oracle.exact_nonsaturation_probability(args.n, args.d, args.budget)
        out.write(json.dumps({"n": args.n, "d": args.d, "nonsat": _frac(p), "decimal": float(p)}) + "\n")
    elif args.query == "outcome":
        out.write(oracle.exact_outcome_distribution(args.n, args.d, args.budget).to_json() + "\n")
    else:
        if args.s is None:
            raise UsageError("dproc oracle: error: --query degrees needs --s")
        dist = oracle.exact_degree_count_distribution(args.n, args.d, args.s, args.budget)
        out.write(dist.to_json() + "\n")


def cmd_predict(args, out):
    _checked_size(args)
    model = analytics.AnalyticModel(args.n, args.d)
    res = {"n": args.n, "d": args.d}
    if args.s is not None:
        x = model.ell_inverse(args.s)
        res.update({"s": args.s, "ell_inverse": x, "beta": model.betas(x), "lambda": x / args.n})
    if args.x is not None:
        res.update({"x": args.x, "beta_at_x": model.betas(args.x), "ell": model.ell(args.x),
                    "tau": model.tau(args.x)})
    if args.t is not None:
        res.update({"t": args.t, "f": [model.f(args.t, j) for j in range(args.d - 1)]})
    out.write(json.dumps(res) + "\n")


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "predict": cmd_predict}


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"dproc {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
