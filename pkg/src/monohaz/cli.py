"""Command-line interface: ``monohaz {fit,test,ci,quantiles,simulate}``.

Exit status: 0 on success, 2 for invalid input, 3 for numerical failure,
64 for usage errors. Every JSON report carries a ``manifest`` with the
subcommand, flags, input digest, seed and tool version; the timestamp lives
only there.
"""

import argparse
import datetime
import hashlib
import json
import math
import secrets
import sys

import numpy as np

from . import __version__
from .constrained import fit_constrained
from .data import IngestConfig, load_csv
from .errors import InputError, NumericalError, ValidationError
from .inference import (DEFAULT_QUANTILES, ci_asymptotic, ci_lr_inversion,
                        lrt)
from .isotonic import fit_unconstrained
from .limit_process import estimate_quantiles, simulate_D
from .partial_likelihood import fit_beta
from .simulation import SimConfig, run_study

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return "sha256:" + h.hexdigest()


def _manifest(args, digest=None, seed=None):
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in ("func",)}
    return {"subcommand": args.command, "flags": flags,
            "input_digest": digest, "seed": seed, "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc)
            .isoformat(timespec="seconds")}


def _clean(obj):
    # JSON has no inf/nan; encode them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _emit(args, payload):
    text = json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed(args):
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _load(args):
    try:
        sample = load_csv(args.data, IngestConfig(args.tie_breaking))
    except FileNotFoundError as exc:
        raise ValidationError(f"cannot read {args.data}: {exc}") from exc
    return sample, _digest(args.data)


def _beta(args, sample):
    if args.beta is not None:
        beta = np.asarray(args.beta, dtype=float)
        if beta.size != sample.p:
            raise ValidationError(
                f"--beta needs {sample.p} values, got {beta.size}")
        return beta, None
    est = fit_beta(sample)
    return est.beta_hat, {"converged": est.converged,
                          "iterations": est.iterations,
                          "gradient_norm": est.final_gradient_norm}


def cmd_fit(args):
    sample, digest = _load(args)
    beta, info = _beta(args, sample)
    fit = fit_unconstrained(sample, beta, args.direction)
    hz = fit.hazard.to_dict()
    out = {"schema": "monohaz/1", "direction": args.direction,
           "beta": beta.tolist(), "beta_fit": info,
           "breakpoints": hz["breakpoints"], "values": hz["values"],
           "tail": hz["tail"], "unbounded_tail": hz["tail"] == "unbounded",
           "levels": fit.levels.tolist(),
           "blocks": [list(b) for b in fit.blocks.blocks],
           "manifest": _manifest(args, digest)}
    if args.plot:
        from .plotting import plot_hazard
        plot_hazard(args.plot, fit.hazard, float(sample.time[-1]))
    _emit(args, out)


def cmd_test(args):
    sample, digest = _load(args)
    beta, info = _beta(args, sample)
    res = lrt(sample, beta, args.x0, args.theta0, args.direction)
    out = {"schema": "monohaz/1", "result": res.to_dict(), "beta_fit": info}
    seed = None
    if args.pvalue == "mc":
        seed = _seed(args)
        draws, _ = simulate_D(args.paths, seed=seed)
        out["p_value"] = float(np.mean(draws >= res.statistic))
        out["p_value_method"] = f"monte-carlo ({args.paths} paths)"
    else:
        q = DEFAULT_QUANTILES.d(0.95)
        out["p_value"] = None
        out["p_value_bound"] = "<0.05" if res.statistic > q else ">=0.05"
        out["p_value_method"] = f"quantile lookup q(D,0.95)={q}"
    out["reject_at_0.05"] = bool(res.statistic > DEFAULT_QUANTILES.d(0.95))
    out["manifest"] = _manifest(args, digest, seed)
    if args.plot:
        from .plotting import plot_hazard
        fu = fit_unconstrained(sample, beta, args.direction)
        fc = fit_constrained(sample, beta, args.x0, args.theta0,
                             args.direction)
        plot_hazard(args.plot, fu.hazard, float(sample.time[-1]),
                    constrained=fc.hazard)
    _emit(args, out)


def cmd_ci(args):
    sample, digest = _load(args)
    beta, info = _beta(args, sample)
    if args.method == "lr":
        rep = ci_lr_inversion(sample, beta, args.x0, args.level,
                              args.direction, quantile=args.quantile,
                              method=args.inversion)
    else:
        rep = ci_asymptotic(sample, beta, args.x0, args.level,
                            args.direction, quantile=args.quantile)
    out = {"schema": "monohaz/1", "report": rep.to_dict(), "beta_fit": info,
           "manifest": _manifest(args, digest)}
    if args.plot:
        from .plotting import plot_hazard
        fu = fit_unconstrained(sample, beta, args.direction)
        plot_hazard(args.plot, fu.hazard, float(sample.time[-1]),
                    interval=(rep.lower, rep.upper), x0=args.x0)
    _emit(args, out)


def cmd_quantiles(args):
    seed = _seed(args)
    c, h = args.grid if args.grid else (None, None)
    est = estimate_quantiles(args.target, args.paths, args.prob, c, h, seed,
                             args.threads)
    out = est.to_dict()
    out["manifest"] = _manifest(args, None, seed)
    _emit(args, out)


def cmd_simulate(args):
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") \
            from exc
    if args.seed is not None or "seed" not in raw:
        raw["seed"] = _seed(args)
    config = SimConfig.from_dict(raw)
    report = run_study(config, workers=args.threads)
    out = report.to_dict()
    if not args.records:
        out.pop("records")
    out["table"] = report.table_csv()
    out["manifest"] = _manifest(args, _digest(args.config), config.seed)
    if args.table:
        with open(args.table, "w") as fh:
            fh.write(report.table_csv())
    if args.records_csv:
        _write_records(args.records_csv, report.records)
    _emit(args, out)


def _write_records(path, records):
    import csv
    keys = ["replicate", "method", "lower", "upper", "length", "covered",
            "error"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, keys, extrasaction="ignore")
        w.writeheader()
        for rec in records:
            w.writerow(rec)


def _grid(text):
    try:
        c, h = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected C,H") from exc
    return c, h


def build_parser():
    p = _Parser(prog="monohaz", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("data", help="CSV with header time,status,z1..zp")
        s.add_argument("--direction", default="nondecreasing",
                       choices=["nondecreasing", "nonincreasing"])
        s.add_argument("--beta", type=float, nargs="+",
                       help="fixed regression coefficients (default: fit)")
        s.add_argument("--tie-breaking", default="error",
                       choices=["error", "deterministic-jitter"])
        s.add_argument("--plot", help="write an SVG step plot here")
        s.add_argument("--output", "-o", help="JSON output file")
        return s

    s = data_cmd("fit", "monotone NPMLE of the baseline hazard")
    s.set_defaults(func=cmd_fit)

    s = data_cmd("test", "likelihood ratio test of lambda0(x0) = theta0")
    s.add_argument("--x0", type=float, required=True)
    s.add_argument("--theta0", type=float, required=True)
    s.add_argument("--pvalue", choices=["lookup", "mc"], default="lookup")
    s.add_argument("--paths", type=int, default=10000)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_test)

    s = data_cmd("ci", "pointwise confidence interval at x0")
    s.add_argument("--x0", type=float, required=True)
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--method", choices=["lr", "ad"], default="lr")
    s.add_argument("--inversion", choices=["bisection", "grid"],
                   default="bisection")
    s.add_argument("--quantile", type=float,
                   help="override the limit-distribution quantile")
    s.set_defaults(func=cmd_ci)

    s = sub.add_parser("quantiles", help="Monte Carlo quantiles of D or Z")
    s.add_argument("--target", choices=["D", "Z"], required=True)
    s.add_argument("--paths", type=int, default=100000)
    s.add_argument("--grid", type=_grid, help="half-width and step, C,H")
    s.add_argument("--prob", type=float, action="append")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_quantiles)

    s = sub.add_parser("simulate", help="coverage/length study")
    s.add_argument("--config", required=True, help="SimConfig JSON file")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--records", action="store_true",
                   help="include per-replicate records in the JSON")
    s.add_argument("--table", help="write the summary CSV here")
    s.add_argument("--records-csv", help="write per-replicate CSV here")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
