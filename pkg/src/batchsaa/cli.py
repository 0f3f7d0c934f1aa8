"""Command line entry point: ``batchsaa <experiment> [options]``.

Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys are option names without the leading dashes); explicit flags win.
Exit status is 0 on success, 2 for invalid configuration and 1 for any
other failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .errors import ConfigError
from .experiments import (
    ExperimentConfig,
    _jsonable,
    run_asymptotic_experiment,
    run_ball_experiment,
    run_figure_curve,
    run_l1_experiment,
    run_portfolio_experiment,
    run_table1,
    verify_proposition2,
    write_report,
)
from .problems import DEBIAS_MODES

DEFAULTS = {
    "portfolio": dict(n=10, nu=500, k=10, gamma=1.0, reps=200, box="0,1", mu=0.02, sigma=0.05, bins=50),
    "asymptotic": dict(n=10, nu=500, k=10, gamma=1.0, reps=200, box="0,1", mu=0.02, sigma=0.05, bins=50),
    "ball": dict(n=10, nu=20, k=4, gamma=1.0, reps=10000),
    "l1": dict(n=10, nu=10, k=2, gamma=1.0, reps=10000),
    "prop2": dict(n=1, nu=50, k=10, gamma=0.2, reps=10000, a="1,2,4"),
}
FULL_SCALE_REPS = 1000


def _box(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"box must be 'lo,hi', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _nu_range(text: str) -> list[int]:
    """``lo:hi`` (inclusive), ``lo:hi:step`` or a comma list."""
    if ":" in text:
        parts = [int(t) for t in text.split(":")]
        step = parts[2] if len(parts) == 3 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return _int_list(text)


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="root seed (default 7)")
    p.add_argument("--out", default=None, help="directory for CSV/JSON output")
    p.add_argument("--config", default=None, help="file of 'key = value' lines")


def _add_mc(p, name):
    d = DEFAULTS[name]
    p.add_argument("--reps", type=int, default=None, help=f"replications (default {d['reps']})")
    p.add_argument("--n", type=int, default=None, help=f"dimension (default {d['n']})")
    p.add_argument("--nu", type=int, default=None, help=f"sample size (default {d['nu']})")
    p.add_argument("--k", type=int, default=None, help=f"number of batches (default {d['k']})")
    p.add_argument("--gamma", type=float, default=None, help=f"risk/penalty weight (default {d['gamma']})")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")


def _add_portfolio(p):
    p.add_argument("--box", type=_box, default=None, help="bounds 'lo,hi' (default 0,1)")
    p.add_argument("--mu", type=float, default=None, help="mean return per asset (default 0.02)")
    p.add_argument("--sigma", type=float, default=None, help="return variance per asset (default 0.05)")
    p.add_argument("--debias", choices=DEBIAS_MODES, default=None, help="covariance correction mode")
    p.add_argument("--bins", type=int, default=None, help="histogram bins (default 50)")
    p.add_argument("--tol", type=float, default=None, help="QP KKT tolerance (default 1e-10)")
    p.add_argument("--full-scale", action="store_true", default=None, help=f"use {FULL_SCALE_REPS} replications")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchsaa", description="Batch-mean SAA experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="exact two-sample enumeration of the squared-distance example")
    _add_common(p)

    for name, desc in (
        ("fig1", "log error probability of the full-sample L1/box solution"),
        ("fig2", "log error probability, one batch versus K batches"),
        ("fig3", "finite-sample minus asymptotic error probability, ball example"),
    ):
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        p.add_argument("--n", type=_int_list, default=None, help="comma list of dimensions")
        p.add_argument("--nu", type=_nu_range, default=None, help="'lo:hi[:step]' or comma list")
        p.add_argument("--gamma", type=float, default=None, help="default 1.0")
        p.add_argument("--k", type=int, default=None, help="batches for fig2 (default 10)")
        p.add_argument("--log-base", choices=("10", "e"), default=None, help="default 10")
        p.add_argument("--delta", type=float, default=None, help="fig3 gap threshold (default 1e-3)")

    p = sub.add_parser("portfolio", help="full-sample versus batch portfolio estimates")
    _add_common(p)
    _add_mc(p, "portfolio")
    _add_portfolio(p)

    p = sub.add_parser("asymptotic", help="limiting-QP draws next to scaled estimator errors")
    _add_common(p)
    _add_mc(p, "asymptotic")
    _add_portfolio(p)

    p = sub.add_parser("ball", help="ball-constrained example exceedance frequencies")
    _add_common(p)
    _add_mc(p, "ball")

    p = sub.add_parser("l1", help="L1/box example exceedance frequencies")
    _add_common(p)
    _add_mc(p, "l1")

    p = sub.add_parser("prop2", help="Chebyshev tail bound for the batch mean")
    _add_common(p)
    _add_mc(p, "prop2")
    p.add_argument("--a", type=_float_list, default=None, help="comma list of a values (default 1,2,4)")
    return parser


def _config_tokens(path: str, subparser: argparse.ArgumentParser) -> list[str]:
    """Turn a ``key = value`` file into argv tokens for ``subparser``."""
    known = {s for a in subparser._actions for s in a.option_strings}
    flags = {
        s for a in subparser._actions for s in a.option_strings if isinstance(a, argparse._StoreTrueAction)
    }
    tokens = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        if key == "command":
            if value != subparser.prog.split()[-1]:
                raise ConfigError(f"{path}:{lineno}: config is for command {value!r}")
            continue
        opt = "--" + key.replace("_", "-")
        if opt not in known or opt == "--config":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if opt in flags:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(opt)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise ConfigError(f"{path}:{lineno}: {key} expects true/false")
        else:
            tokens.append(f"{opt}={value}")
    return tokens


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _join_negative_values(argv):
    """Let ``--box -1,2`` through: argparse would read ``-1,2`` as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--box", "--a", "--n", "--nu"):
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse(argv) -> argparse.Namespace:
    argv = _join_negative_values(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        tokens = _config_tokens(args.config, _subparser(parser, args.command))
        explicit = vars(args)
        merged = parser.parse_args([args.command] + tokens)
        for key, value in explicit.items():
            if value is not None:
                setattr(merged, key, value)
        args = merged
    return args


def resolve(args: argparse.Namespace) -> dict:
    """Fill unset options with the command's defaults."""
    out = {k: v for k, v in vars(args).items() if k != "config"}
    cmd = args.command
    out["seed"] = 7 if out.get("seed") is None else out["seed"]
    if cmd in DEFAULTS:
        d = dict(DEFAULTS[cmd])
        d["box"] = _box(d["box"]) if "box" in d else None
        d["a"] = _float_list(d["a"]) if "a" in d else None
        for key, value in d.items():
            if value is not None and out.get(key) is None:
                out[key] = value
        out["threads"] = out.get("threads") or 1
        if cmd in ("portfolio", "asymptotic"):
            out["debias"] = out.get("debias") or "scale-solution"
            out["tol"] = 1e-10 if out.get("tol") is None else out["tol"]
            if out.get("full_scale") and args.reps is None:
                out["reps"] = FULL_SCALE_REPS
            out["full_scale"] = bool(out.get("full_scale"))
    elif cmd in ("fig1", "fig2", "fig3"):
        out["gamma"] = 1.0 if out.get("gamma") is None else out["gamma"]
        out["k"] = 10 if out.get("k") is None else out["k"]
        out["log_base"] = out.get("log_base") or "10"
        out["delta"] = 1e-3 if out.get("delta") is None else out["delta"]
    return out


def _experiment_config(cmd: str, r: dict) -> ExperimentConfig:
    family = {"portfolio": "portfolio", "asymptotic": "portfolio", "ball": "ball"}.get(cmd, "l1")
    kw = dict(
        family=family,
        n=r["n"],
        nu=r["nu"],
        K=r["k"],
        gamma=r["gamma"],
        replications=r["reps"],
        root_seed=r["seed"],
        threads=r["threads"],
        out=r.get("out"),
    )
    if family == "portfolio":
        kw.update(box=tuple(r["box"]), mu=r["mu"], sigma=r["sigma"], bins=r["bins"], debias=r["debias"], tol=r["tol"])
    return ExperimentConfig(**kw)


def _fmt_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def run(resolved: dict):
    cmd = resolved["command"]
    if cmd == "table1":
        return run_table1()
    if cmd in ("fig1", "fig2", "fig3"):
        return run_figure_curve(
            cmd,
            n_values=resolved.get("n"),
            gamma=resolved["gamma"],
            nu_values=resolved.get("nu"),
            K=resolved["k"],
            log_base=resolved["log_base"],
            delta=resolved["delta"],
        )
    cfg = _experiment_config(cmd, resolved).validate()
    if cmd == "portfolio":
        return run_portfolio_experiment(cfg)
    if cmd == "asymptotic":
        return run_asymptotic_experiment(cfg)
    if cmd == "ball":
        return run_ball_experiment(cfg)
    if cmd == "l1":
        return run_l1_experiment(cfg)
    return verify_proposition2(cfg, resolved["a"])


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        resolved = resolve(args)
        echo = [f"{k} = {_fmt_value(v)}" for k, v in sorted(resolved.items()) if v is not None]
        print("\n".join(echo))
        report = run(resolved)
        if resolved.get("out"):
            written = write_report(report, resolved["out"])
            (Path(resolved["out"]) / "config.txt").write_text("\n".join(echo) + "\n")
            for path in written:
                print(f"wrote {path}")
        summary = {k: v for k, v in report.summary.items() if k != "config"}
        print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
        for name, (header, rows) in report.tables.items():
            if not resolved.get("out") and len(rows) <= 100:
                print(f"# {name}")
                print(",".join(header))
                for row in rows:
                    print(",".join(_fmt_value(x) if not isinstance(x, float) else f"{x:.6g}" for x in row))
        return 0
    except ConfigError as exc:
        print(f"batchsaa: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("batchsaa: interrupted", file=sys.stderr)
        return 1
    except Exception as exc:  # one-line diagnostic for any other failure
        print(f"batchsaa: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
