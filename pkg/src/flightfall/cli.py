"""Command-line interface.

    flightfall table          radial density table (CSV)
    flightfall plot           density curve (SVG, plus the sampled points as CSV)
    flightfall simulate       Monte Carlo landings vs. the analytic density (CSV)
    flightfall concentration  share of settled mass inside a disk (CSV)

Parameters can also come from a flat ``key=value`` config file given with
``--config``; command-line flags win over file values.

Exit codes: 0 success, 2 usage, 3 numerical non-convergence, 4 I/O error,
5 statistical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, FlightfallError
from .flight import FlightParams, Uniform, VonMises
from .lifetime import Exponential, Gamma, parse_lifetime
from .mc_oracle import (
    COUNT_FLOOR,
    compare_to_analytic,
    planar_density_grid,
    radial_histogram,
    simulate_landings,
)
from .stationary import (
    METHODS,
    StationaryModel,
    concentration_in_disk,
    density_table,
    evaluate,
    total_mass,
)

logger = logging.getLogger("flightfall")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO, EXIT_STAT = 0, 2, 3, 4, 5
DEFAULT_SEED = 12345

# Fallbacks applied after flags and config file; per-command values first.
_DEFAULTS = {
    "table": {"r_min": 0.2, "r_max": 4.0, "r_step": 0.2, "method": "quadrature"},
    "plot": {"r_min": 0.02, "r_max": 5.0, "points": 250, "out": "density.svg"},
    "simulate": {"n": 1_000_000, "bin_width": 0.1, "r_max": 4.0, "sectors": 36},
    "concentration": {"mass": 1.0},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--config", help="key=value parameter file")
    g.add_argument("--model", choices=("heavy", "light"), help="heavy: exponential lifetime, light: gamma lifetime")
    g.add_argument("--lifetime", help="lifetime law, e.g. 'exp(mu=2)' or 'gamma(mu=2, alpha=5)'")
    g.add_argument("--lambda", dest="lambda", type=float, help="direction switching rate")
    g.add_argument("--mu", type=float, help="lifetime rate")
    g.add_argument("--c", type=float, help="speed")
    g.add_argument("--alpha", type=float, help="gamma lifetime shape (> 2)")
    g.add_argument("--vonmises-k", dest="vonmises_k", type=float, help="von Mises concentration")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output file (default: stdout for CSV)")
    g.add_argument("--precision", type=int, help="decimals for density values (default 6)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flightfall", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"flightfall {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table", help="tabulate the stationary density")
    _common(p)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--r-step", dest="r_step", type=float)
    p.add_argument("--method", choices=METHODS)

    p = sub.add_parser("plot", help="plot the stationary density")
    _common(p)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--csv", help="where to write the sampled curve (default: next to --out)")

    p = sub.add_parser("simulate", help="Monte Carlo check against the analytic density")
    _common(p)
    p.add_argument("--n", type=int, help="number of particles")
    p.add_argument("--bin-width", dest="bin_width", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--sectors", type=int, help="angular sectors of the planar grid")
    p.add_argument("--workers", type=int, help="thread count (default: FLIGHTFALL_THREADS or CPUs)")

    p = sub.add_parser("concentration", help="mass share inside a disk")
    _common(p)
    p.add_argument("--radius", type=float)
    p.add_argument("--mass", type=float, help="emitted mass M")
    return parser


def read_config(path: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _merge(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    opts = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        types = {a.dest: a.type for a in sub._actions}  # noqa: SLF001
        for key, value in cfg.items():
            if key not in types:
                raise UsageError(f"unknown config key {key!r}")
            if key not in opts:
                conv = types[key] or str
                try:
                    opts[key] = conv(value)
                except ValueError as exc:
                    raise UsageError(f"bad value for {key}: {value!r}") from exc
    for key, value in _DEFAULTS[args.command].items():
        opts.setdefault(key, value)
    for key in ("lambda", "c"):
        if key not in opts:
            raise UsageError(f"--{key} is required")
    return opts


def _lifetime(opts: dict):
    if "lifetime" in opts:
        try:
            return parse_lifetime(opts["lifetime"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    model = opts.get("model") or ("light" if "alpha" in opts else "heavy")
    if "mu" not in opts:
        raise UsageError("--mu (or --lifetime) is required")
    if model == "heavy":
        return Exponential(opts["mu"])
    if "alpha" not in opts:
        raise UsageError("--alpha is required for the light model")
    return Gamma(opts["mu"], opts["alpha"])


def _flight(opts: dict, with_direction: bool = False) -> FlightParams:
    law = Uniform()
    if with_direction and "vonmises_k" in opts:
        law = VonMises(opts["vonmises_k"])
    return FlightParams(c=opts["c"], lam=opts["lambda"], direction_law=law)


def _model(opts: dict) -> StationaryModel:
    return StationaryModel(_flight(opts), _lifetime(opts))


def _header(command: str, opts: dict, model_desc: dict) -> str:
    skip = {"command", "config", "out", "verbose", "csv", "workers"}
    fields = dict(model_desc)
    for key in sorted(opts):
        if key not in skip and key not in fields and key not in ("lambda", "mu", "alpha", "c", "lifetime"):
            fields[key] = opts[key]
    body = " ".join(f"{k}={_plain(v)}" for k, v in fields.items())
    return f"# flightfall {__version__} {command} {body}\n"


def _plain(v) -> str:
    return f"{v:g}" if isinstance(v, float) else str(v)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8", newline="\n")


def cmd_table(opts: dict) -> int:
    model = _model(opts)
    if opts["method"] == "heavy_series" and not model.is_heavy:
        raise UsageError("heavy_series needs the heavy (exponential) model")
    table = density_table(model, opts["r_min"], opts["r_max"], opts["r_step"], opts["method"])
    prec = opts.get("precision", 6)
    buf = io.StringIO()
    buf.write(_header("table", opts, model.describe()))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("r", "density"))
    for r, d in table.rows:
        w.writerow((f"{r:.6g}", f"{d:.{prec}f}"))
    _emit(buf.getvalue(), opts.get("out"))
    return EXIT_OK


def cmd_plot(opts: dict) -> int:
    from .plotting import density_figure, save_figure

    model = _model(opts)
    r_min, r_max, points = opts["r_min"], opts["r_max"], opts["points"]
    if model.is_heavy and r_min <= 0:
        raise UsageError("heavy-model density diverges at r = 0; use --r-min > 0")
    if not 0 <= r_min < r_max or points < 2:
        raise UsageError("need 0 <= r-min < r-max and points >= 2")
    method = opts.get("method", "quadrature")
    radii = np.round(np.linspace(r_min, r_max, points), 12)
    dens = np.array([evaluate(model, float(r), method) for r in radii])
    desc = model.describe()
    title = ", ".join(f"{k}={_plain(v)}" for k, v in desc.items() if k != "lifetime")
    out = Path(opts["out"])
    csv_path = Path(opts["csv"]) if "csv" in opts else out.with_suffix(".csv")
    prec = opts.get("precision", 6)
    buf = io.StringIO()
    buf.write(_header("plot", opts, desc))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("r", "density"))
    for r, d in zip(radii, dens):
        w.writerow((f"{r:.6g}", f"{d:.{prec}f}"))
    fig = density_figure(radii, dens, title=f"{desc['lifetime']}: {title}")
    save_figure(fig, out)
    _emit(buf.getvalue(), str(csv_path))
    print(f"wrote {out} and {csv_path}")
    return EXIT_OK


def cmd_simulate(opts: dict) -> int:
    if "seed" not in opts:
        opts["seed"] = DEFAULT_SEED
        print(f"# no --seed given, using default seed={DEFAULT_SEED}", file=sys.stderr)
    n = opts["n"]
    if n < 1:
        raise UsageError("--n must be >= 1")
    if opts["bin_width"] <= 0 or opts["r_max"] <= 0:
        raise UsageError("--bin-width and --r-max must be positive")
    lifetime = _lifetime(opts)
    flight = _flight(opts, with_direction=True)
    samples = simulate_landings(flight, lifetime, n, opts["seed"], workers=opts.get("workers"))
    nbins = max(1, int(round(opts["r_max"] / opts["bin_width"])))
    edges = np.round(np.linspace(0.0, nbins * opts["bin_width"], nbins + 1), 12)
    p0, se0 = samples.zero_switch_fraction()
    desc = {"lambda": flight.lam, "c": flight.c, "mu": lifetime.mu}
    if isinstance(lifetime, Gamma):
        desc["alpha"] = lifetime.alpha
    desc["lifetime"] = lifetime.describe()
    header = _header("simulate", opts, desc)
    expected_p0 = lifetime.laplace(flight.lam)
    stats = (
        f"# zero_switch_fraction={p0:.6f} std_err={se0:.6f} "
        f"expected={expected_p0:.6f}\n"
    )

    if "vonmises_k" in opts:
        grid = planar_density_grid(samples, edges, opts["sectors"])
        _emit(header + stats + grid.to_csv(), opts.get("out"))
        return EXIT_OK

    model = StationaryModel(flight, lifetime)
    hist = radial_histogram(samples, edges, "switched_only")
    report = compare_to_analytic(hist, model, samples)
    status = f"# status={report.status} max_z={report.max_z:.4f} bins_compared={int(report.compared.sum())}\n"
    _emit(header + stats + status + report.to_csv(), opts.get("out"))
    if report.inconclusive:
        print(
            f"warning: no bin expects {COUNT_FLOOR} or more landings; result inconclusive",
            file=sys.stderr,
        )
        return EXIT_OK
    print(f"{report.status}: max |z| = {report.max_z:.3f}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_STAT


def cmd_concentration(opts: dict) -> int:
    if "radius" not in opts:
        raise UsageError("--radius is required")
    if opts["radius"] <= 0:
        raise UsageError("--radius must be positive")
    if opts["mass"] < 0:
        raise UsageError("--mass must be non-negative")
    model = _model(opts)
    k_r, conc = concentration_in_disk(model, opts["radius"], opts["mass"])
    tm = total_mass(model)
    prec = opts.get("precision", 10)
    buf = io.StringIO()
    buf.write(_header("concentration", opts, model.describe()))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("radius", "k_r", "total_mass", "emitted_mass", "concentration"))
    w.writerow(
        (f"{opts['radius']:g}", f"{k_r:.{prec}f}", f"{tm:.{prec}f}", f"{opts['mass']:g}", f"{conc:.{prec}f}")
    )
    _emit(buf.getvalue(), opts.get("out"))
    return EXIT_OK


COMMANDS = {
    "table": cmd_table,
    "plot": cmd_plot,
    "simulate": cmd_simulate,
    "concentration": cmd_concentration,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        opts = _merge(args, parser)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"flightfall: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"flightfall: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"flightfall: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        return EXIT_OK
    except OSError as exc:
        print(f"flightfall: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FlightfallError as exc:
        print(f"flightfall: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
