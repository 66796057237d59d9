"""Command line entry point: ``fteprod <density|gap|kpoint|stability|verify> ...``.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ..analytic import CorrelatorQuery, EnsembleKind, EnsembleParams, kpoint
from ..errors import BudgetError, ConvergenceError, DomainError, ParameterError
from .experiments import RunConfig, run_density_experiment, run_gap_experiment, run_stability_experiment
from .verify import SUITES, run_verify

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

KIND_CHOICES = ("ginibre-fte", "normal-fte", "induced", "product", "mixed")

# (M, m) used when neither flags nor the config file give them
_DEFAULT_SHAPE = {
    EnsembleKind.GINIBRE_FTE: (1, 1),
    EnsembleKind.NORMAL_FTE: (1, 1),
    EnsembleKind.INDUCED_GINIBRE: (1, 0),
    EnsembleKind.PRODUCT_GINIBRE: (2, 0),
    EnsembleKind.MIXED_PRODUCT: (2, 1),
}


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}") from exc


def parse_points(text: str) -> list[complex]:
    """``"0.1,0.2;0.5,0"`` or ``"0.1,0.2,0.5,0"`` -> [0.1+0.2j, 0.5+0j]."""
    try:
        vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse --points {text!r}") from exc
    if not vals or len(vals) % 2:
        raise ParameterError("--points needs an even number of values (re,im pairs)")
    return [complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]


def _ensemble_flags(p: argparse.ArgumentParser, kind: bool = True) -> None:
    if kind:
        p.add_argument("--kind", choices=KIND_CHOICES)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--nu", type=_csv_floats, help="comma separated, one per factor (a single value is broadcast)")
    p.add_argument("--s", type=_csv_floats, help="trace constraints of the first m factors")
    p.add_argument("--t", type=_csv_floats, help="inverse variances of the remaining factors")
    p.add_argument("--config", help="JSON file mirroring RunConfig; flags take precedence")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV path; the report goes to <out>.json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fteprod", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", help="radial density histogram vs analytic and limiting densities")
    _ensemble_flags(d)
    _run_flags(d)
    d.add_argument("--xmax", type=float, help="histogram range in the rescaled variable")

    g = sub.add_parser("gap", help="hole probability of the disc |z| < x")
    _ensemble_flags(g)
    _run_flags(g)
    g.add_argument("--xmax", type=float)
    g.add_argument("--grid", type=int)

    k = sub.add_parser("kpoint", help="print the analytic k-point correlation function")
    _ensemble_flags(k)
    k.add_argument("--k", type=int, help="number of points (checked against --points)")
    k.add_argument("--points", required=True, help="re,im pairs, e.g. '0.1,0;0,0.2'")

    st = sub.add_parser("stability", help="stability exponents of long products")
    _ensemble_flags(st, kind=False)
    _run_flags(st)

    v = sub.add_parser("verify", help="run the verification battery")
    v.add_argument("--suite", default="all", choices=SUITES)
    v.add_argument("--json", dest="json_path", help="write the report here")
    return ap


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("config file must hold a JSON object")
    return data


def _broadcast(vals, n: int, default: float, name: str) -> list[float]:
    if vals is None or len(vals) == 0:
        return [default] * n
    vals = list(vals)
    if len(vals) == 1:
        return vals * n
    if len(vals) != n:
        raise ParameterError(f"--{name} needs {n} values, got {len(vals)}")
    return vals


def _stability_kind(M: int, m: int) -> EnsembleKind:
    if m == 0:
        return EnsembleKind.PRODUCT_GINIBRE
    if M == 1:
        return EnsembleKind.GINIBRE_FTE
    return EnsembleKind.MIXED_PRODUCT


def resolve(args: argparse.Namespace, experiment: str) -> RunConfig:
    """Merge config file and flags into a validated RunConfig."""
    base = _load_config(getattr(args, "config", None))
    pd = dict(base.pop("params", None) or base.pop("ensemble", None) or {})
    file_kind = base.pop("kind", base.pop("ensemble_kind", None))
    for key in ("N", "M", "m", "nu", "s", "t"):
        val = getattr(args, key, None)
        if val is not None:
            pd[key] = val
    if "N" not in pd:
        raise ParameterError("--N is required")

    if experiment == "stability":
        M, m = int(pd.get("M", 50)), int(pd.get("m", 0))
        kind = _stability_kind(M, m)
    else:
        kind = EnsembleKind.parse(getattr(args, "kind", None) or file_kind or "ginibre-fte")
        M0, m0 = _DEFAULT_SHAPE[kind]
        M, m = int(pd.get("M", M0)), int(pd.get("m", m0))
    params = EnsembleParams(
        N=pd["N"], M=M, m=m,
        nu=_broadcast(pd.get("nu"), M, 0.0, "nu"),
        s=_broadcast(pd.get("s"), m, 1.0, "s"),
        t=_broadcast(pd.get("t"), M - m, 1.0, "t"),
    )

    run = dict(base)
    run["experiment"] = experiment
    for flag, key in (("samples", "samples"), ("bins", "bins"), ("seed", "seed"), ("workers", "workers"),
                      ("out", "output_path"), ("xmax", "xmax"), ("grid", "grid")):
        val = getattr(args, flag, None)
        if val is not None:
            run[key] = val
    env = os.environ.get("RMT_THREADS")
    if env:
        try:
            run["workers"] = int(env)
        except ValueError as exc:
            raise ParameterError(f"RMT_THREADS must be an integer, got {env!r}") from exc
    return RunConfig.from_dict({"kind": kind, "params": params.to_dict(), **run})


def _summary(report: dict) -> dict:
    """Report without the bulky per-point arrays, for the terminal."""
    return {k: v for k, v in report.items() if k not in ("x", "empirical", "analytic", "metadata")}


def _cmd_kpoint(args) -> int:
    cfg = resolve(args, "kpoint")
    pts = parse_points(args.points)
    if args.k is not None and args.k != len(pts):
        raise ParameterError(f"--k {args.k} does not match {len(pts)} points")
    val = kpoint(cfg.kind, cfg.params, CorrelatorQuery(tuple(pts)))
    print(repr(float(val)))
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = run_verify(args.suite)
    for c in report["checks"]:
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"{flag}  [{c['suite']}] {c['name']}: {c['value']:.3g} (threshold {c['threshold']:.3g})")
    print(f"{report['n_checks'] - report['n_failed']}/{report['n_checks']} checks passed in {report['seconds']:.1f} s")
    if args.json_path:
        with open(args.json_path, "w") as fh:
            json.dump(report, fh, indent=2, default=float)
    return EXIT_OK if report["passed"] else EXIT_INVARIANT


_RUNNERS = {"density": run_density_experiment, "gap": run_gap_experiment, "stability": run_stability_experiment}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "kpoint":
            return _cmd_kpoint(args)
        cfg = resolve(args, args.command)
        report = _RUNNERS[args.command](cfg)
        print(json.dumps(_summary(report), indent=2, default=float))
        return EXIT_OK
    except (ParameterError, DomainError, BudgetError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
