"""Command-line interface: ``bnnprior <command> [options]``.

Options can also come from a plain ``key = value`` file given with
``--config``; keys are the long option names without leading dashes
(``trunc-mode`` or ``trunc_mode``).  Flags on the command line win over
the file.  Exit codes: 0 success, 1 validation failure, 2 bad
configuration, 3 numerical accuracy failure.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import WidthScaledSpec, edgeworth_density, gaussian_limit_density
from .errors import AccuracyError, ConfigurationError, DivergenceError, PriorError
from .linear_prior import (
    charfun_linear,
    density_linear,
    diverges_at_origin,
    moment_norm_linear,
    radius_grid,
)
from .mc_oracle import empirical_density, empirical_moment, sample_outputs
from .network import NetworkSpec
from .relu_prior import (
    DEFAULT_THRESHOLD,
    TRUNCATION_MODES,
    atom_mass,
    charfun_relu,
    density_relu,
    enumerate_terms,
    moment_norm_relu,
)
from .specfun import ContourConfig
from .tails import root_moment_curve, estimate_tail_parameter
from .validation import FAULTS, run_validation

CSV_SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_ACCURACY = 0, 1, 2, 3
FIGURES = ("fig1", "fig2", "fig3", "fig4")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _int_list(text):
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text):
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _grid(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be min:max:points")
    try:
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
    if num < 1 or not lo <= hi or lo < 0:
        raise argparse.ArgumentTypeError(f"empty or invalid grid {text!r}")
    return np.linspace(lo, hi, num)


def _threshold(text):
    text = str(text).strip()
    if text.startswith("2^"):
        return 2.0 ** float(text[2:])
    return float(text)


def _add_spec_options(p):
    g = p.add_argument_group("network")
    g.add_argument("--depth", type=int, help="number of weight layers d")
    g.add_argument("--widths", type=_int_list, help="hidden widths n_1..n_{d-1}; one value repeats")
    g.add_argument("--out-width", type=int, default=1)
    g.add_argument("--in-width", type=int, default=1)
    g.add_argument("--activation", choices=("linear", "relu"), default="linear")
    g.add_argument(
        "--kappa-mode",
        choices=("paper-linear", "paper-relu", "explicit"),
        help="equal-variance scaling for the activation (default) or explicit --sigma",
    )
    g.add_argument("--sigma", type=_float_list, help="weight stds sigma_1..sigma_d; one value repeats")
    g.add_argument("--input-norm", type=float, default=1.0)
    g.add_argument("--trunc-mode", choices=TRUNCATION_MODES, default="product")
    g.add_argument("--trunc-threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    g.add_argument("--tol", type=float, default=1e-12, help="contour target relative tolerance")


def _add_output_options(p, formats=("csv",)):
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser():
    parser = _Parser(prog="bnnprior", description="Exact priors of deep linear and ReLU networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file with option defaults")
        return p

    p = command("density", "radial density on a radius grid")
    _add_spec_options(p)
    p.add_argument("--grid", type=_grid, help="min:max:points (default: geometric from moments)")
    p.add_argument("--edgeworth", action="store_true", help="add the Edgeworth column")
    _add_output_options(p)

    p = command("charfun", "radial characteristic function")
    _add_spec_options(p)
    p.add_argument("--grid", type=_grid, default=None, help="min:max:points of |q|")
    _add_output_options(p)

    p = command("moments", "exact moments of the output norm")
    _add_spec_options(p)
    p.add_argument("--orders", type=_float_list, default=[2.0, 4.0, 6.0])
    _add_output_options(p, ("csv", "json"))

    p = command("sample", "Monte Carlo histogram and summary")
    _add_spec_options(p)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--component", type=int, default=0)
    p.add_argument("--summary", help="path of the JSON summary (default: <out>.json)")
    p.add_argument("--workers", type=int, default=1)
    _add_output_options(p, ("csv", "json"))

    p = command("tail", "root-moment curve and tail parameter")
    _add_spec_options(p)
    p.add_argument("--m-max", type=int, default=400)
    p.add_argument("--summary", help="path of the JSON fit summary (default: <out>.json)")
    _add_output_options(p, ("csv", "json"))

    p = command("validate", "run the self-check suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--inject-fault", choices=FAULTS)
    p.add_argument("--out", help="JSON report path (default: standard output)")

    p = command("figure", "write figure data files")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--widths", type=_int_list, help="hidden widths to plot (bottleneck widths for fig2)")
    p.add_argument("--depths", type=_int_list, default=[2, 3, 4])
    p.add_argument("--outer-width", type=int, default=100, help="fig2: width of layers 1 and 3")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--trunc-mode", choices=TRUNCATION_MODES, default="product")
    p.add_argument("--trunc-threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=False, help="output directory")
    return parser


# -- configuration ---------------------------------------------------------


def read_config(path):
    """Parse ``key = value`` lines; '#' starts a comment."""
    items = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        items.append((key.replace("_", "-"), value))
    return items


def _config_tokens(subparser, items):
    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                actions[opt[2:]] = action
    tokens = []
    for key, value in items:
        if key == "config" or key not in actions:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise ConfigurationError(f"{key} expects true/false, got {value!r}")
        else:
            tokens += [f"--{key}", value]
    return tokens


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        tokens = _config_tokens(subparser, read_config(args.config))
        # positional arguments stay first; config values before command-line flags
        positional = [argv[0]] + [a for a in argv[1:2] if args.command == "figure"]
        args = parser.parse_args(positional + tokens + argv[len(positional):])
    return args


def spec_from_args(a) -> NetworkSpec:
    hidden = list(a.widths or [])
    depth = a.depth if a.depth is not None else len(hidden) + 1
    if depth < 1:
        raise ConfigurationError("depth must be >= 1")
    if len(hidden) == 1 and depth > 2:
        hidden = hidden * (depth - 1)
    if len(hidden) != depth - 1:
        raise ConfigurationError(f"depth {depth} needs {depth - 1} hidden widths, got {len(hidden)}")
    widths = (a.in_width,) + tuple(hidden) + (a.out_width,)
    mode = a.kappa_mode or ("paper-relu" if a.activation == "relu" else "paper-linear")
    if mode == "explicit":
        sigma = list(a.sigma or [])
        if len(sigma) == 1:
            sigma = sigma * depth
        if len(sigma) != depth:
            raise ConfigurationError("explicit kappa mode needs --sigma with one value per layer")
        return NetworkSpec(widths, tuple(sigma), a.input_norm, a.activation)
    if a.sigma:
        raise ConfigurationError("--sigma is only used with --kappa-mode explicit")
    base = NetworkSpec.equal_variance(widths, "relu" if mode == "paper-relu" else "linear")
    return NetworkSpec(widths, base.weight_std, 1.0, a.activation)


# -- output helpers ----------------------------------------------------------


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.15e" % v


def write_csv(path, meta, columns, rows):
    lines = [f"# schema_version: {CSV_SCHEMA_VERSION}"]
    lines += [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _spec_meta(spec):
    return {
        "widths": ",".join(map(str, spec.widths)),
        "weight_std": ",".join("%.15e" % s for s in spec.weight_std),
        "input_norm": "%.15e" % spec.input_norm,
        "activation": spec.activation,
        "kappa": "%.15e" % spec.kappa,
    }


def _evaluate_rows(fn, grid):
    """Evaluate fn on the grid, falling back to point-wise evaluation on failure."""
    try:
        return list(np.atleast_1d(fn(grid))), [""] * len(grid)
    except PriorError:
        vals, errs = [], []
        for x in grid:
            try:
                vals.append(float(fn(np.array([x]))[0]))
                errs.append("")
            except DivergenceError:
                vals.append(None)
                errs.append("divergent")
            except PriorError as exc:
                vals.append(None)
                errs.append(type(exc).__name__)
        return vals, errs


# -- commands ------------------------------------------------------------------


def _mixture(spec, a):
    return enumerate_terms(spec, mode=a.trunc_mode, threshold=a.trunc_threshold)


def cmd_density(a):
    spec = spec_from_args(a)
    cfg = ContourConfig(target_rel_tol=a.tol)
    relu = spec.activation == "relu"
    moment_fn = moment_norm_relu if relu else moment_norm_linear
    grid = a.grid if a.grid is not None else radius_grid(spec, moment_fn=moment_fn)
    meta = _spec_meta(spec)
    if relu:
        mix = _mixture(spec, a)
        meta.update(
            atom_mass="%.15e" % mix.atom_mass,
            truncation_mode=mix.truncation_mode,
            mixture_terms=len(mix),
            discarded_mass="%.15e" % mix.discarded_mass,
        )

        def exact(r):
            out = np.full(r.shape, np.nan)
            pos = r > 0
            out[pos] = density_relu(spec, r[pos], mix, cfg)
            return out
    else:
        def exact(r):
            if np.any(r == 0) and diverges_at_origin(spec):
                out = np.full(r.shape, np.nan)
                pos = r > 0
                out[pos] = density_linear(spec, r[pos], cfg)
                return out
            return density_linear(spec, r, cfg)

    values, errors = _evaluate_rows(exact, grid)
    at_origin = "atom" if relu else ("divergent" if diverges_at_origin(spec) else "")
    errors = [at_origin if r == 0 and (v is None or not math.isfinite(v)) else e for e, v, r in zip(errors, values, grid)]
    ws = WidthScaledSpec.from_spec(spec)
    gauss = gaussian_limit_density(ws, grid)
    columns = ["radius", "exact_density", "gaussian_limit"]
    extra = [gauss]
    if a.edgeworth:
        columns.append("edgeworth")
        extra.append(edgeworth_density(ws, grid))
    columns.append("error")
    rows = []
    for i, r in enumerate(grid):
        v = values[i]
        if v is not None and not math.isfinite(v):
            v = None
        rows.append([r, v] + [col[i] for col in extra] + [errors[i]])
    write_csv(a.out, meta, columns, rows)
    failed = any(e not in ("", "atom", "divergent") for e in errors)
    return EXIT_ACCURACY if failed else EXIT_OK


def cmd_charfun(a):
    spec = spec_from_args(a)
    cfg = ContourConfig(target_rel_tol=a.tol)
    grid = a.grid if a.grid is not None else np.linspace(0, 10 / spec.kappa, 101)
    meta = _spec_meta(spec)
    if spec.activation == "relu":
        mix = _mixture(spec, a)
        fn = lambda q: charfun_relu(spec, q, mix, cfg)
    else:
        fn = lambda q: charfun_linear(spec, q, cfg)
    values, errors = _evaluate_rows(fn, grid)
    write_csv(a.out, meta, ["q", "charfun", "error"], zip(grid, values, errors))
    return EXIT_OK if not any(errors) else EXIT_ACCURACY


def cmd_moments(a):
    spec = spec_from_args(a)
    fn = moment_norm_relu if spec.activation == "relu" else moment_norm_linear
    rows = []
    for m in a.orders:
        val = fn(spec, m)
        rows.append([m, val, math.log(val) if val > 0 else -math.inf])
    if a.format == "json":
        write_json(a.out, {"schema_version": CSV_SCHEMA_VERSION, "spec": _spec_meta(spec),
                           "moments": [{"order": m, "value": v} for m, v, _ in rows]})
    else:
        write_csv(a.out, _spec_meta(spec), ["order", "moment", "log_moment"], rows)
    return EXIT_OK


def _summary_path(a):
    if a.summary:
        return a.summary
    if a.out:
        return str(Path(a.out).with_suffix(".json"))
    return None


def cmd_sample(a):
    spec = spec_from_args(a)
    start = time.perf_counter()
    batch = sample_outputs(spec, a.seed, a.samples, workers=a.workers)
    hist = empirical_density(batch, component=a.component, bins=a.bins)
    p = batch.zero_fraction
    summary = {
        "schema_version": CSV_SCHEMA_VERSION,
        "spec": _spec_meta(spec),
        "seed": a.seed,
        "count": batch.count,
        "chunk_size": batch.chunk_size,
        "zero_count": batch.zero_count,
        "zero_fraction": p,
        "zero_fraction_se": math.sqrt(p * (1 - p) / batch.count),
        "moments": {},
        "histogram": {"bins": int(hist.counts.size), "excluded": hist.excluded,
                      "out_of_range": hist.out_of_range},
    }
    for m in (2, 4):
        est, se = empirical_moment(batch, m)
        summary["moments"][str(m)] = {"estimate": est, "standard_error": se}
    summary["elapsed_seconds"] = round(time.perf_counter() - start, 3)
    if a.format == "json":
        write_json(a.out, summary)
        return EXIT_OK
    meta = _spec_meta(spec)
    meta.update(seed=a.seed, samples=a.samples, component=a.component)
    rows = [
        [lo, hi, 0.5 * (lo + hi), dens, cnt]
        for lo, hi, dens, cnt in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities, hist.counts)
    ]
    write_csv(a.out, meta, ["bin_left", "bin_right", "center", "density", "count"], rows)
    path = _summary_path(a)
    if path:
        write_json(path, summary)
    else:
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_tail(a):
    spec = spec_from_args(a)
    est = estimate_tail_parameter(spec, a.m_max)
    fit = {
        "schema_version": CSV_SCHEMA_VERSION,
        "spec": _spec_meta(spec),
        "theta_hat": est.theta_hat,
        "theta_expected": spec.depth / 2,
        "fit_range": list(est.fit_range),
        "residual": est.residual,
        "n_points": est.n_points,
    }
    if a.format == "json":
        write_json(a.out, fit)
        return EXIT_OK
    curve = root_moment_curve(spec, np.arange(1, a.m_max + 1))
    write_csv(a.out, _spec_meta(spec), ["order", "root_moment"], curve.tolist())
    path = _summary_path(a)
    if path:
        write_json(path, fit)
    else:
        sys.stderr.write(json.dumps(fit, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_validate(a):
    report = run_validation(a.level, a.inject_fault)
    write_json(a.out, report)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _figure_curve(spec, points, relu_mix=None, edgeworth=False):
    moment_fn = moment_norm_relu if relu_mix is not None else moment_norm_linear
    grid = radius_grid(spec, points, moment_fn=moment_fn)
    ws = WidthScaledSpec.from_spec(spec)
    if relu_mix is not None:
        exact = density_relu(spec, grid, relu_mix)
    else:
        exact = density_linear(spec, grid)
    cols = {"h": grid, "exact_density": exact}
    if edgeworth:
        cols["edgeworth"] = edgeworth_density(ws, grid)
    else:
        cols["gaussian_limit"] = gaussian_limit_density(ws, grid)
    return cols


def cmd_figure(a):
    if not a.widths:
        raise ConfigurationError("figure commands need an explicit --widths list")
    if not a.out:
        raise ConfigurationError("figure commands need --out DIRECTORY")
    outdir = Path(a.out)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = []
    if a.name == "fig2":
        for n2 in a.widths:
            widths = (1, a.outer_width, n2, a.outer_width, 1)
            jobs.append((f"fig2_n2_{n2}.csv", NetworkSpec.equal_variance(widths), None))
    else:
        act = "relu" if a.name == "fig3" else "linear"
        for d in a.depths:
            for n in a.widths:
                widths = (1,) + (n,) * (d - 1) + (1,)
                jobs.append((f"{a.name}_d{d}_n{n}.csv", NetworkSpec.equal_variance(widths, act), act))
    for fname, spec, act in jobs:
        meta = _spec_meta(spec)
        mix = None
        if act == "relu":
            mix = enumerate_terms(spec, mode=a.trunc_mode, threshold=a.trunc_threshold)
            meta["atom_mass"] = "%.15e" % mix.atom_mass
        cols = _figure_curve(spec, a.points, mix, edgeworth=a.name == "fig4")
        write_csv(outdir / fname, meta, list(cols), zip(*cols.values()))
    return EXIT_OK


COMMANDS = {
    "density": cmd_density,
    "charfun": cmd_charfun,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "tail": cmd_tail,
    "validate": cmd_validate,
    "figure": cmd_figure,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except AccuracyError as exc:
        sys.stderr.write(f"accuracy failure: {exc}\n")
        return EXIT_ACCURACY
    except (PriorError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
