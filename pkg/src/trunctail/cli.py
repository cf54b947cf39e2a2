"""Command-line entry point: ``trunctail <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 when every requested
fit failed to converge.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import dataio, study, sweep, tpot

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 1, 2, 3
SEED_ENV = "TRUNCTAIL_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _k_range(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: standard output)")


def _add_data(p, k_required=False):
    p.add_argument("data", help="delimited text file with the observations")
    p.add_argument("--column", help="column name or 0-based index (default: first numeric column)")
    p.add_argument("--delimiter", default=",")
    g = p.add_mutually_exclusive_group(required=k_required)
    g.add_argument("--k", type=int, help="number of top order statistics")
    g.add_argument("--k-range", type=_k_range, metavar="A:B", help="inclusive range of k")
    p.add_argument("--method", choices=(*sweep.METHODS, "all"), default="tpot")
    _add_output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trunctail", description="Tail estimation under possible upper truncation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="truncated GPD fit for one k or a sweep over k")
    _add_data(p)
    p.add_argument("--p", type=_floats, default=[], help="exceedance probabilities for quantiles")
    p.add_argument("--c", type=_floats, default=[], help="levels for tail probabilities")
    p.add_argument("--clip", action="store_true", help="floor negative tail probabilities at 0")

    p = sub.add_parser("test", help="test for rough truncation")
    _add_data(p)
    p.add_argument("--level", type=float, default=0.05)

    p = sub.add_parser("quantile", help="extreme quantiles of the truncated and parent distributions")
    _add_data(p)
    p.add_argument("--p", type=_floats, required=True)

    p = sub.add_parser("endpoint", help="truncation point estimate")
    _add_data(p)

    p = sub.add_parser("tailprob", help="exceedance probabilities P(X > c)")
    _add_data(p)
    p.add_argument("--c", type=_floats, required=True)
    p.add_argument("--clip", action="store_true")

    p = sub.add_parser("qq", help="QQ-plot data, optionally with the fitted model")
    p.add_argument("data")
    p.add_argument("--column")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--kind", choices=[k.value for k in dataio.QQKind], default="exponential")
    p.add_argument("--k", type=int, help="overlay the model fitted at this k")
    _add_output(p)

    p = sub.add_parser("simulate", help="run a simulation study from a config file")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help=f"base seed (default: ${SEED_ENV}, then the config)")
    p.add_argument("--workers", type=int)
    _add_output(p)

    p = sub.add_parser("convert", help="earthquake magnitude <-> energy (MJ)")
    p.add_argument("values", type=float, nargs="+")
    p.add_argument("--to", choices=("energy", "magnitude"), required=True)
    _add_output(p)
    return parser


# ---- commands ----


def _load(args) -> dataio.Dataset:
    return dataio.load_csv(args.data, column=args.column, delimiter=args.delimiter)


def _methods(args) -> tuple:
    return sweep.METHODS if args.method == "all" else (args.method,)


def _sweep(args, p_list=(), c_list=(), clip=False):
    x = _load(args).sorted()
    if args.k is not None:
        k_min = k_max = args.k
    elif args.k_range is not None:
        k_min, k_max = args.k_range
    else:
        k_min = k_max = None
    return sweep.k_sweep(x, k_min, k_max, p_list, c_list, methods=_methods(args), clip=clip)


def _any_converged(rows, methods) -> bool:
    flags = {
        "tpot": lambda r: bool(r.get("converged", False)),
        "mle": lambda r: bool(r.get("converged_mle", False)),
        "trpareto": lambda r: math.isfinite(r.get("xi_trpareto", math.nan)),
        "moment": lambda r: math.isfinite(r.get("xi_moment", math.nan)),
    }
    return any(flags[m](r) for r in rows for m in methods)


def _select(rows, keep):
    return [{key: v for key, v in r.items() if keep(key)} for r in rows]


def _cmd_fit(args):
    rows = _sweep(args, args.p, args.c, args.clip)
    return rows, _methods(args)


def _cmd_test(args):
    if not 0.0 < args.level < 1.0:
        raise UsageError("--level must lie in (0, 1)")
    methods = ("tpot",)
    rows = _sweep(argparse.Namespace(**{**vars(args), "method": "tpot"}))
    crit = -math.log(args.level)
    out = []
    for r in rows:
        t = r.get("statistic", math.nan)
        out.append(
            {
                "k": r["k"],
                "n": r["n"],
                "xi": r.get("xi", math.nan),
                "converged": r.get("converged", False),
                "statistic": t,
                "p_value": r.get("p_value", math.nan),
                "level": args.level,
                "reject": bool(t > crit),
            }
        )
    return out, methods


def _cmd_quantile(args):
    rows = _sweep(args, p_list=args.p)
    keep = ("k", "n", "threshold", "xi", "odds", "converged", "xi_", "odds_", "sigma_", "converged_", "q")
    return _select(rows, lambda key: key.startswith(keep)), _methods(args)


def _cmd_endpoint(args):
    rows = _sweep(args)
    keep = ("k", "n", "threshold", "xi", "odds", "statistic", "converged", "endpoint")
    return _select(rows, lambda key: key in keep or key.startswith(("xi_", "odds_", "endpoint_", "converged_"))), _methods(args)


def _cmd_tailprob(args):
    rows = _sweep(argparse.Namespace(**{**vars(args), "method": "tpot"}), c_list=args.c, clip=args.clip)
    keep = ("k", "n", "threshold", "xi", "sigma", "odds", "converged")
    return _select(rows, lambda key: key in keep or key.startswith("prob@")), ("tpot",)


def _emit(payload, args, columns=None):
    if args.format == "json":
        text = dataio.dumps(payload) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    if args.out:
        with open(args.out, "w", newline="") as fh:
            dataio.write_csv(payload, fh, columns)
    else:
        dataio.write_csv(payload, sys.stdout, columns)


def _cmd_qq(args):
    ds = _load(args)
    fit = tpot.fit_sample(ds.values, args.k) if args.k is not None else None
    qq = dataio.qq_data(ds, args.kind, fit)
    if args.format == "json":
        _emit(qq.to_dict(), args)
    else:
        rows = [{"series": "data", "x": x, "y": y} for x, y in qq.points]
        if qq.model is not None:
            rows += [{"series": "model", "x": x, "y": y} for x, y in qq.model]
        _emit(rows, args, ["series", "x", "y"])
    return EXIT_NOCONV if fit is not None and not fit.converged else EXIT_OK


def _cmd_simulate(args):
    config = study.load_config(args.config)
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if args.workers is not None:
        changes["workers"] = args.workers
    if changes:
        config = study.StudyConfig.from_dict({**config.to_dict(), **changes})
    result = study.run_study(config)
    if args.format == "json":
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(result.to_json())
        else:
            sys.stdout.write(result.to_json() + "\n")
    else:
        _emit(result.records(), args, ["family", "level", "k", "statistic", "value"])
    return EXIT_OK


def _cmd_convert(args):
    fn = dataio.magnitude_to_energy if args.to == "energy" else dataio.energy_to_magnitude
    rows = [{"input": v, args.to: fn(v)} for v in args.values]
    _emit(rows, args)
    return EXIT_OK


_TABLE_COMMANDS = {
    "fit": _cmd_fit,
    "test": _cmd_test,
    "quantile": _cmd_quantile,
    "endpoint": _cmd_endpoint,
    "tailprob": _cmd_tailprob,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in _TABLE_COMMANDS:
            rows, methods = _TABLE_COMMANDS[args.command](args)
            _emit(rows, args)
            return EXIT_OK if _any_converged(rows, methods) else EXIT_NOCONV
        if args.command == "qq":
            return _cmd_qq(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_convert(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"trunctail: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
