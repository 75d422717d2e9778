"""Command line front door for every analysis backend.

One subcommand per model runs an analysis from flags; ``run`` executes the
same thing from a versioned JSON spec; ``figure`` regenerates the CSV tables
behind the bundled example figures.  Results are written as a record (the
probability, the continuity weight and the Monte Carlo diagnostics) plus CSV
density tables, all atomically and in a deterministic byte layout, so
repeated invocations with the same seed produce identical files.

Exit codes: 0 on success, 2 on validation problems (bad flags, malformed or
invalid JSON specs, impossible parameter values), 3 on numerical failure
(no admissible continuity weight, no sample mass where some is required).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import binomial, figures, normal_direct, normal_gibbs, normal_known, relative_risk
from .binomial import BinomialCount
from .core import (
    FLAT,
    BetaOnInterval,
    IntervalHypothesis,
    LogScaleBetaOnRatio,
    SmoothedGpd,
)
from .errors import NumericalError, ValidationError
from .figures import FigureTable
from .normal_direct import NormalSummary
from .normal_gibbs import MU_THEN_SIGMA, SIGMA_THEN_MU, UniformRandomScan
from .normal_known import NormalKnownSummary
from .numerics import RngStream, freedman_diaconis_edges
from .relative_risk import RatioHypothesis, TwoArmCounts

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

SCHEMA_VERSION = 1
MODELS = ("normal-known", "binomial", "normal-gibbs", "normal-direct", "relative-risk")

_SCANS = {
    "fixed:musigma": MU_THEN_SIGMA,
    "fixed:μσ": MU_THEN_SIGMA,
    "fixed:sigmamu": SIGMA_THEN_MU,
    "fixed:σμ": SIGMA_THEN_MU,
    "random": UniformRandomScan(),
}

# JSON spec fields that map one-to-one onto command line flags.
_SPEC_KEYS = {
    "xbar", "sd", "sigma", "se", "n", "x", "e_t", "n_t", "e_c", "n_c",
    "eps", "lo", "hi", "prior", "gpd", "bump", "method",
    "samples", "burn_in", "seed", "scan", "out", "format",
}


# ---------------------------------------------------------------------------
# Output plumbing.


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".", suffix=".tmp")
    try:
        with open(fd, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)  # CRLF row endings per RFC 4180
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, record: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".", suffix=".tmp")
    try:
        with open(fd, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2, default=float)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flatten_record(record: dict):
    """One-row CSV view: nested dicts become dotted columns, lists JSON."""
    header, row = [], []
    for key, value in record.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                header.append(f"{key}.{sub}")
                row.append(v)
        elif isinstance(value, (list, tuple)):
            header.append(key)
            row.append(json.dumps(value, default=float))
        else:
            header.append(key)
            row.append(value)
    return header, [row]


def _write_table(out_dir: Path, table: FigureTable) -> None:
    _write_csv(out_dir / table.filename, table.header, table.rows())


def _emit(args, record: dict, tables) -> int:
    if args.out is None:
        json.dump(record, sys.stdout, indent=2, default=float)
        sys.stdout.write("\n")
        return EXIT_OK
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        _write_json(out_dir / "record.json", record)
    else:
        _write_csv(out_dir / "record.csv", *_flatten_record(record))
    for table in tables:
        _write_table(out_dir, table)
    print(f"wrote record and {len(tables)} tables to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Shared argument interpretation.


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("SHARPFID_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ValidationError(f"SHARPFID_SEED must be an integer, got {env!r}") from exc


def _hypothesis(args, center: float = 0.0) -> IntervalHypothesis:
    if (args.lo is None) != (args.hi is None):
        raise ValidationError("give both --lo and --hi, or neither")
    if args.lo is not None:
        return IntervalHypothesis(args.lo, args.hi, args.prior)
    return IntervalHypothesis.symmetric(args.eps, args.prior, center=center)


def _gpd(args, ratio: bool = False):
    if args.gpd == "flat":
        return FLAT
    a, b = args.bump
    bump = LogScaleBetaOnRatio(a, b) if ratio else BetaOnInterval(a, b)
    return SmoothedGpd(bump)


def _result_record(model: str, inputs: dict, res, mixture) -> dict:
    record = {
        "schema": SCHEMA_VERSION,
        "model": model,
        "inputs": inputs,
        "p_in": res.p_in,
        "p_out": res.p_out,
        "tau": res.tau_used,
        "mc_stderr": res.mc_stderr,
        "ess": res.ess,
    }
    if mixture.atoms:
        record["atoms"] = [
            {"location": x, "mass": m} for x, m in mixture.atoms
        ]
    return record


def _grid_table(mixture, lo: float, hi: float, x_name: str, filename: str) -> FigureTable:
    grid = np.linspace(lo, hi, 1201)
    return FigureTable(
        filename,
        (x_name, "density", "label"),
        (grid, mixture.pdf(grid)),
        "post-data mixture",
    )


def _bin_table(mixture, edges, x_name: str, filename: str) -> FigureTable:
    edges = np.asarray(edges, float)
    heights = np.diff(mixture.cdf(edges)) / np.diff(edges)
    return FigureTable(
        filename,
        (f"{x_name}_left", f"{x_name}_right", "density", "label"),
        (edges[:-1], edges[1:], heights),
        "post-data mixture",
    )


# ---------------------------------------------------------------------------
# Model subcommands.


def _cmd_normal_known(args) -> int:
    if args.se is not None and args.sd is not None:
        raise ValidationError("give either --se or --sd, not both")
    if args.se is not None:
        summary = NormalKnownSummary.from_se(args.xbar, args.se)
    else:
        summary = NormalKnownSummary(args.n, args.xbar, args.sd if args.sd is not None else 1.0)
    hyp = _hypothesis(args)
    res = normal_known.analyze(summary, hyp, _gpd(args))
    mixture = res.mixture()
    inputs = {
        "xbar": summary.xbar, "sigma": summary.sigma, "n": summary.n,
        "lo": hyp.lo, "hi": hyp.hi, "prior": hyp.prior_prob, "gpd": args.gpd,
    }
    se = summary.std_error
    table = _grid_table(
        mixture,
        min(hyp.lo, summary.xbar - 8.0 * se),
        max(hyp.hi, summary.xbar + 8.0 * se),
        "mu",
        "density_mu.csv",
    )
    return _emit(args, _result_record("normal-known", inputs, res, mixture), [table])


def _cmd_normal_direct(args) -> int:
    summary = NormalSummary(args.n, args.xbar, args.sd)
    hyp = _hypothesis(args)
    res = normal_direct.analyze(summary, hyp, _gpd(args))
    mixture = res.mixture()
    inputs = {
        "xbar": summary.xbar, "sd": summary.s, "n": summary.n,
        "lo": hyp.lo, "hi": hyp.hi, "prior": hyp.prior_prob, "gpd": args.gpd,
    }
    se = summary.std_error
    table = _grid_table(
        mixture,
        min(hyp.lo, summary.xbar - 10.0 * se),
        max(hyp.hi, summary.xbar + 10.0 * se),
        "mu",
        "density_mu.csv",
    )
    return _emit(args, _result_record("normal-direct", inputs, res, mixture), [table])


def _cmd_binomial(args) -> int:
    count = BinomialCount(args.x, args.n)
    hyp = _hypothesis(args, center=0.5)
    seed = _resolve_seed(args)
    n_samples = args.samples if args.samples is not None else binomial.DEFAULT_SAMPLES
    res = binomial.analyze(count, hyp, _gpd(args), n_samples=n_samples, rng=RngStream(seed))
    mixture = res.mixture()
    inputs = {
        "x": count.x, "n": count.n,
        "lo": hyp.lo, "hi": hyp.hi, "prior": hyp.prior_prob, "gpd": args.gpd,
        "samples": n_samples, "seed": seed,
    }
    table = _bin_table(mixture, np.linspace(0.0, 1.0, 401), "pi", "density_pi.csv")
    return _emit(args, _result_record("binomial", inputs, res, mixture), [table])


def _cmd_relative_risk(args) -> int:
    counts = TwoArmCounts(args.e_t, args.n_t, args.e_c, args.n_c)
    if args.lo is not None or args.hi is not None:
        raise ValidationError("the ratio hypothesis is set through --eps only")
    hyp = RatioHypothesis(args.eps, args.prior)
    seed = _resolve_seed(args)
    n_samples = args.samples if args.samples is not None else relative_risk.DEFAULT_SAMPLES
    run = relative_risk.jeffreys_approx if args.method == "jeffreys" else relative_risk.analyze
    res = run(counts, hyp, _gpd(args, ratio=True), n_samples=n_samples, rng=RngStream(seed))
    mixture = res.ratio_mixture()
    inputs = {
        "e_t": counts.e_t, "n_t": counts.n_t, "e_c": counts.e_c, "n_c": counts.n_c,
        "eps": args.eps, "prior": hyp.prior_prob, "gpd": args.gpd,
        "method": args.method, "samples": n_samples, "seed": seed,
    }
    top = res.post.density_out.support[-1][1]
    rho_edges = np.linspace(0.0, min(max(top, 2.0), 5.0), 401)
    tables = [
        _bin_table(mixture, rho_edges, "rho", "density_rho.csv"),
        _bin_table(res.treatment, np.linspace(0.0, 1.0, 401), "pi_t", "density_pi_t.csv"),
        _bin_table(res.control, np.linspace(0.0, 1.0, 401), "pi_c", "density_pi_c.csv"),
    ]
    return _emit(args, _result_record("relative-risk", inputs, res.post, mixture), tables)


def _cmd_normal_gibbs(args) -> int:
    summary = NormalSummary(args.n, args.xbar, args.sd)
    hyp = _hypothesis(args)
    seed = _resolve_seed(args)
    n_samples = args.samples if args.samples is not None else normal_gibbs.DEFAULT_SAMPLES
    burn_in = args.burn_in if args.burn_in is not None else normal_gibbs.DEFAULT_BURN_IN
    chain = normal_gibbs.gibbs_run(
        summary,
        hyp,
        _gpd(args),
        scan=_SCANS[args.scan],
        n_samples=n_samples,
        burn_in=burn_in,
        rng=RngStream(seed),
    )
    record = {
        "schema": SCHEMA_VERSION,
        "model": "normal-gibbs",
        "inputs": {
            "xbar": summary.xbar, "sd": summary.s, "n": summary.n,
            "lo": hyp.lo, "hi": hyp.hi, "prior": hyp.prior_prob, "gpd": args.gpd,
            "scan": args.scan, "samples": n_samples, "burn_in": burn_in, "seed": seed,
        },
        "p_in": chain.interval_mass(hyp.lo, hyp.hi),
        "p_out": 1.0 - chain.interval_mass(hyp.lo, hyp.hi),
        "mu_mean": float(np.mean(chain.mu)),
        "sigma_mean": float(np.mean(chain.sigma)),
    }
    tables = []
    for name, draws in (("mu", chain.mu), ("sigma", chain.sigma)):
        edges = freedman_diaconis_edges(draws, max_bins=512)
        heights, _ = np.histogram(draws, bins=edges)
        tables.append(
            FigureTable(
                f"density_{name}.csv",
                (f"{name}_left", f"{name}_right", "density", "label"),
                (edges[:-1], edges[1:], heights / (draws.size * np.diff(edges))),
                "post-data sample",
            )
        )
    return _emit(args, record, tables)


# ---------------------------------------------------------------------------
# Spec files and figures.


def _argv_from_spec(spec) -> list[str]:
    if not isinstance(spec, dict):
        raise ValidationError("the spec must be a JSON object")
    if spec.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported spec schema {spec.get('schema')!r}")
    model = spec.get("model")
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}")
    argv = [model]
    for key, value in spec.items():
        if key in ("schema", "model"):
            continue
        if key not in _SPEC_KEYS:
            raise ValidationError(f"unknown spec field {key!r}")
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif key == "bump":
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ValidationError("bump must be a two-element list")
            argv += [flag, f"{value[0]},{value[1]}"]
        else:
            argv += [flag, str(value)]
    return argv


def _cmd_run(args) -> int:
    try:
        if args.spec == "-":
            text = sys.stdin.read()
        else:
            text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read spec file: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON spec: {exc}") from exc
    parser = build_parser()
    try:
        ns = parser.parse_args(_argv_from_spec(spec))
    except SystemExit as exc:
        raise ValidationError("spec fields failed flag validation") from exc
    return ns.func(ns)


def _cmd_figure(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    kwargs = {"n_samples": args.samples, "seed": _resolve_seed(args), "full_scale": args.full_scale}
    if args.burn_in is not None:
        kwargs["burn_in"] = args.burn_in
    tables = figures.figure_tables(args.id, **kwargs)
    for table in tables:
        _write_table(out_dir, table)
    print(f"wrote {len(tables)} files to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly.


def _bump_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected A,B with two numbers, got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected A,B with two numbers, got {text!r}") from exc


def _add_hypothesis_flags(p, default_gpd: str) -> None:
    p.add_argument("--eps", type=float, default=0.0, help="half width of the hypothesis interval")
    p.add_argument("--lo", type=float, default=None, help="explicit interval lower endpoint")
    p.add_argument("--hi", type=float, default=None, help="explicit interval upper endpoint")
    p.add_argument("--prior", type=float, default=0.5, help="prior probability of the hypothesis")
    p.add_argument("--gpd", choices=("flat", "smoothed"), default=default_gpd,
                   help="inside-component weighting")
    p.add_argument("--bump", type=_bump_pair, default=(4.0, 4.0), metavar="A,B",
                   help="bump exponents for smoothed weighting")


def _add_output_flags(p) -> None:
    p.add_argument("--out", default=None, help="output directory (default: record to stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="record file format when --out is given")


def _add_mc_flags(p) -> None:
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (falls back to SHARPFID_SEED, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharpfid",
        description="Post-data probabilities for sharp and almost-sharp hypotheses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normal-known", help="normal mean with a known noise scale")
    p.add_argument("--xbar", type=float, required=True, help="observed sample mean")
    p.add_argument("--sd", "--sigma", dest="sd", type=float, default=None,
                   help="known population deviation (default 1)")
    p.add_argument("--se", type=float, default=None,
                   help="standard error of the mean, shorthand for n=1 with --sd")
    p.add_argument("--n", type=int, default=1, help="sample size")
    _add_hypothesis_flags(p, "flat")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_normal_known)

    p = sub.add_parser("binomial", help="binomial proportion near one half")
    p.add_argument("--x", type=int, required=True, help="observed success count")
    p.add_argument("--n", type=int, required=True, help="number of trials")
    _add_hypothesis_flags(p, "flat")
    _add_mc_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_binomial)

    p = sub.add_parser("normal-gibbs", help="normal mean and deviation by Gibbs sampling")
    p.add_argument("--xbar", type=float, required=True, help="observed sample mean")
    p.add_argument("--sd", "--sigma", dest="sd", type=float, required=True,
                   help="sample standard deviation")
    p.add_argument("--n", type=int, required=True, help="sample size")
    _add_hypothesis_flags(p, "flat")
    _add_mc_flags(p)
    p.add_argument("--burn-in", type=int, default=None, help="discarded warm-up sweeps")
    p.add_argument("--scan", choices=sorted(_SCANS), default="fixed:musigma",
                   help="conditional update order")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_normal_gibbs)

    p = sub.add_parser("normal-direct", help="normal mean with the deviation marginalized")
    p.add_argument("--xbar", type=float, required=True, help="observed sample mean")
    p.add_argument("--sd", "--sigma", dest="sd", type=float, required=True,
                   help="sample standard deviation")
    p.add_argument("--n", type=int, required=True, help="sample size")
    _add_hypothesis_flags(p, "flat")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_normal_direct)

    p = sub.add_parser("relative-risk", help="ratio of two binomial proportions near one")
    p.add_argument("--e-t", dest="e_t", type=int, required=True, help="treatment events")
    p.add_argument("--n-t", dest="n_t", type=int, required=True, help="treatment size")
    p.add_argument("--e-c", dest="e_c", type=int, required=True, help="control events")
    p.add_argument("--n-c", dest="n_c", type=int, required=True, help="control size")
    p.add_argument("--method", choices=("fiducial", "jeffreys"), default="fiducial",
                   help="sampling law for the two arms")
    _add_hypothesis_flags(p, "smoothed")
    _add_mc_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_relative_risk)

    p = sub.add_parser("run", help="run an analysis described by a JSON spec")
    p.add_argument("spec", help="path to the JSON spec, or - for stdin")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("figure", help="write the CSV tables behind one example figure")
    p.add_argument("id", type=int, choices=figures.FIGURE_IDS, help="figure number")
    p.add_argument("--out", required=True, help="output directory")
    _add_mc_flags(p)
    p.add_argument("--burn-in", type=int, default=None, help="discarded warm-up sweeps")
    p.add_argument("--full-scale", action="store_true",
                   help="full published sample counts instead of the quick defaults")
    p.set_defaults(func=_cmd_figure)

    return parser


def _promote_model_flag(argv: list[str]) -> list[str]:
    """Allow ``--model NAME`` in place of the subcommand form."""
    if not argv or not argv[0].startswith("-"):
        return argv
    out, model = [], None
    it = iter(argv)
    for token in it:
        if token == "--model":
            model = next(it, None)
        elif token.startswith("--model="):
            model = token.split("=", 1)[1]
        else:
            out.append(token)
    if model is None:
        return argv
    return [model, *out]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_promote_model_flag(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
