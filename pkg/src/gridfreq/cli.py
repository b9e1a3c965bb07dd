"""``gridfreq`` command line entry point.

Every verb reads one or more ``timestamp,frequency`` CSV files (``-`` for
stdin) and writes JSON or CSV to stdout, or into ``--output DIR``. Settings
can also come from ``--config FILE``, a flat ``key = value`` file whose keys
are the long flag names; flags given on the command line win.

Exit status: 0 on success, 1 when a report had to skip analyses, 2 on error.
"""
import argparse
import csv
import io
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import n_threads, parallel_map
from .bimodality import dip_statistic
from .correlation import acf, default_windows, dfa, fit_exp_decay
from .errors import GridFreqError
from .increments import increment_report
from .linearity import lt_rmse
from .moments import kde, moments
from .report import AnalysisConfig, characterize, compare
from .series import IngestConfig, ingest_csv
from .synth import ModelConfig, ModelKind, generate

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2


class UsageError(Exception):
    pass


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float_list(text):
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def read_config(path):
    """Parse ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split(sep, 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- parser

def _global_flags():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--config", help="flat key = value file mirroring the flags")
    g.add_argument("--output", help="write results into this directory instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), help="output format")
    return p


def _input_flags():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("input options")
    g.add_argument("--dt", type=float, help="sampling interval in seconds (default 1)")
    g.add_argument("--max-gap", type=float, help="largest time step still treated as contiguous")
    g.add_argument("--region", help="label for the dataset (default: file name)")
    return p


def _analysis_flag(parser, f):
    flag = "--" + f.name.replace("_", "-")
    if f.name == "seed":
        return
    if isinstance(f.default, bool):
        parser.add_argument(flag, type=_bool, nargs="?", const=True)
    elif f.name == "analyses":
        parser.add_argument(flag, help="comma-separated subset of the battery")
    elif isinstance(f.default, int) or f.name.startswith(("dfa_max", "dfa_fit")):
        parser.add_argument(flag, type=int)
    else:
        parser.add_argument(flag, type=float)


def build_parser():
    common = [_global_flags()]
    data = common + [_input_flags()]
    parser = argparse.ArgumentParser(
        prog="gridfreq",
        description="Statistics of power-grid frequency recordings.",
        parents=common,
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"gridfreq {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, help_text, parents=data, files=True):
        p = sub.add_parser(name, help=help_text, parents=parents, argument_default=argparse.SUPPRESS)
        if files:
            p.add_argument("input", help="CSV file, or - for stdin")
        return p

    verb("ingest", "validate and segment a recording")
    verb("stats", "moments of the frequency distribution")

    p = verb("density", "kernel density estimate (grid, density)")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--n-grid", type=int)

    p = verb("dip", "Hartigan dip statistic")
    p.add_argument("--p-value", type=_bool, nargs="?", const=True)
    p.add_argument("--n-boot", type=int)

    p = verb("increments", "increment distribution at lag tau")
    p.add_argument("--tau", type=float)
    p.add_argument("--bandwidth", type=float)

    p = verb("linearity", "LT statistic against phase surrogates")
    p.add_argument("--surrogates", type=int)
    p.add_argument("--max-lag", type=float)

    p = verb("acf", "autocorrelation and exponential decay fit")
    p.add_argument("--max-lag", type=float)
    p.add_argument("--fit-window", type=float)

    p = verb("dfa", "detrended fluctuation analysis")
    p.add_argument("--min-scale", type=int)
    p.add_argument("--max-scale", type=int)
    p.add_argument("--n-scales", type=int)
    p.add_argument("--order", type=int)

    p = verb("synth", "simulate a model and write it as CSV", parents=common, files=False)
    p.add_argument("--kind", choices=[k.value for k in ModelKind])
    p.add_argument("--theta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--hurst", type=float)
    p.add_argument("--deadband", type=float)
    p.add_argument("--centers", type=_float_list)
    p.add_argument("--weights", type=_float_list)
    p.add_argument("--widths", type=_float_list)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--start", type=float, help="epoch of the first sample (default 0)")

    p = sub.add_parser(
        "characterize",
        help="run the whole battery on one or more recordings",
        parents=data,
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("input", nargs="+", help="CSV files, or - for stdin")
    for f in fields(AnalysisConfig):
        _analysis_flag(p, f)

    p = sub.add_parser(
        "compare",
        help="rank regions from characterize reports",
        parents=common,
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("input", nargs="+", help="report JSON files")
    return parser


DEFAULTS = {
    "seed": 0,
    "format": None,
    "output": None,
    "dt": 1.0,
    "max_gap": None,
    "region": None,
    "bandwidth": None,
    "n_grid": None,
    "p_value": False,
    "n_boot": 2000,
    "tau": 1.0,
    "surrogates": 19,
    "max_lag": None,
    "fit_window": 3600.0,
    "min_scale": 5,
    "max_scale": None,
    "n_scales": 24,
    "order": 1,
    "kind": "ou",
    "theta": 0.01,
    "mu": 50.0,
    "sigma": 0.002,
    "hurst": 0.5,
    "deadband": 0.0,
    "centers": (),
    "weights": (),
    "widths": (),
    "n": 86_400,
    "start": 0.0,
}


def _subparser(parser, verb):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[verb]
    raise KeyError(verb)


def _all_dests(parser):
    out = set()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                out.update(a.dest for a in sub._actions)
    return out - {"help", "input"}


def resolve(parser, args):
    """Merge defaults, the config file and explicit flags, in that order."""
    given = vars(args)
    verb = given["verb"]
    sub = _subparser(parser, verb)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "input")}
    settings = {k: DEFAULTS.get(k) for k in actions}
    if verb == "characterize":
        for f in fields(AnalysisConfig):
            if f.name != "seed":
                settings[f.name] = None
    if "config" in given:
        known = _all_dests(parser)
        for key, text in read_config(given["config"]).items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            # keys meant for other verbs are fine in a shared file
            if key not in actions or key == "config":
                continue
            action = actions[key]
            try:
                if action.const is True:
                    settings[key] = _bool(text)
                elif action.type is not None:
                    settings[key] = action.type(text)
                else:
                    settings[key] = text
            except ValueError as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
            if action.choices is not None and settings[key] not in action.choices:
                raise UsageError(f"config key {key}: {text!r} is not one of {list(action.choices)}")
    for key, value in given.items():
        if key in ("verb", "config"):
            continue
        settings[key] = value
    settings["verb"] = verb
    return settings


# ---------------------------------------------------------------- output

class Sink:
    """Routes the primary result to stdout and side tables into ``--output``."""

    def __init__(self, output, stdout):
        self.dir = Path(output) if output else None
        self.stdout = stdout
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def primary(self, name, text):
        if self.dir is None:
            self.stdout.write(text)
        else:
            (self.dir / name).write_text(text, encoding="utf-8")

    def side(self, name, text):
        if self.dir is not None:
            (self.dir / name).write_text(text, encoding="utf-8")


def _json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _table(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _flat_rows(mapping, prefix=""):
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flat_rows(value, name + ".")
        elif isinstance(value, (list, tuple)):
            yield name, " ".join(str(v) for v in value)
        else:
            yield name, value


def _emit(sink, verb, payload, fmt, tables=None):
    """Primary JSON (or flattened key,value CSV) plus any side tables."""
    tables = tables or {}
    if fmt == "csv":
        sink.primary(f"{verb}.csv", _table(["key", "value"], _flat_rows(_plain(payload))))
    else:
        sink.primary(f"{verb}.json", _json(payload))
    for name, (header, rows) in tables.items():
        sink.side(name, _table(header, rows))


# ---------------------------------------------------------------- verbs

def _load(path, s):
    region = s.get("region") or ("stdin" if path == "-" else Path(path).stem)
    config = IngestConfig(dt=s["dt"], max_gap=s["max_gap"], region=region)
    source = sys.stdin.buffer if path == "-" else path
    return ingest_csv(source, config)


def cmd_ingest(s, sink):
    data = _load(s["input"], s)
    segments = [[seg.start_epoch, seg.end_epoch, len(seg)] for seg in data]
    if s["format"] == "csv":
        sink.primary("ingest.csv", _table(["start", "end", "n_samples"], segments))
        return EXIT_OK
    payload = {
        "source": data.source,
        "region": data.region,
        "n_samples": data.n_samples,
        "n_segments": len(data),
        "dropped_samples": data.dropped_samples,
        "malformed_rows": [list(e) for e in data.row_errors],
        "span": list(data.span),
        "segments": segments,
    }
    sink.primary("ingest.json", _json(payload))
    return EXIT_OK


def cmd_stats(s, sink):
    data = _load(s["input"], s)
    _emit(sink, "stats", moments(data).to_dict(), s["format"])
    return EXIT_OK


def cmd_density(s, sink):
    data = _load(s["input"], s)
    est = kde(data.pooled_values(), s["bandwidth"], s["n_grid"])
    rows = zip(est.grid, est.density)
    if s["format"] == "json":
        payload = {"bandwidth": est.bandwidth, "grid": est.grid, "density": est.density}
        sink.primary("density.json", _json(payload))
    else:
        sink.primary("density.csv", _table(["frequency", "density"], rows))
    return EXIT_OK


def cmd_dip(s, sink):
    data = _load(s["input"], s)
    res = dip_statistic(data, s["p_value"], s["n_boot"], s["seed"])
    _emit(sink, "dip", res.to_dict(), s["format"])
    return EXIT_OK


def cmd_increments(s, sink):
    data = _load(s["input"], s)
    rep = increment_report(data, s["tau"], s["bandwidth"])
    dens = rep.density
    tables = {"increments_density.csv": (["increment", "density"], zip(dens.grid, dens.density))}
    _emit(sink, "increments", rep.to_dict(), s["format"], tables)
    return EXIT_OK


def cmd_linearity(s, sink):
    data = _load(s["input"], s)
    max_lag = 60.0 if s["max_lag"] is None else s["max_lag"]
    res = lt_rmse(data, s["surrogates"], max_lag, s["seed"])
    tables = {"lt_curves.csv": (["lag", "lt_data", "lt_surrogate_mean"], res.curves())}
    _emit(sink, "linearity", res.to_dict(), s["format"], tables)
    return EXIT_OK


def cmd_acf(s, sink):
    data = _load(s["input"], s)
    max_lag = 6 * 3600.0 if s["max_lag"] is None else s["max_lag"]
    res = acf(data, max_lag)
    fit = fit_exp_decay(res, s["fit_window"])
    payload = {**fit.to_dict(), "max_lag": max_lag}
    _emit(sink, "acf", payload, s["format"], {"acf.csv": (["lag", "acf"], res.table())})
    return EXIT_OK


def cmd_dfa(s, sink):
    data = _load(s["input"], s)
    windows = default_windows(len(data.longest()), s["min_scale"], s["max_scale"], s["n_scales"])
    res = dfa(data, windows, s["order"])
    tables = {"dfa.csv": (["window", "fluctuation"], res.table())}
    _emit(sink, "dfa", res.to_dict(), s["format"], tables)
    return EXIT_OK


def cmd_synth(s, sink):
    config = ModelConfig(
        kind=s["kind"],
        theta=s["theta"],
        mu=s["mu"],
        sigma=s["sigma"],
        hurst_h=s["hurst"],
        deadband_halfwidth=s["deadband"],
        centers=s["centers"],
        weights=s["weights"],
        widths=s["widths"],
        n=s["n"],
        dt=s["dt"],
        seed=s["seed"],
    )
    out = generate(config)
    values = getattr(out, "values", out)
    stamps = s["start"] + config.dt * np.arange(values.size)
    text = "timestamp,frequency\n" + "".join(f"{t!r},{f!r}\n" for t, f in zip(stamps.tolist(), values.tolist()))
    sink.primary("synth.csv", text)
    return EXIT_OK


def _analysis_config(s):
    mapping = {f.name: s[f.name] for f in fields(AnalysisConfig) if s.get(f.name) is not None}
    mapping["seed"] = s["seed"]
    return AnalysisConfig.from_mapping(mapping)


def cmd_characterize(s, sink):
    config = _analysis_config(s)
    paths = s["input"]
    if len(paths) > 1 and s.get("region"):
        raise UsageError("--region only applies to a single input")

    def run(path):
        # datasets run side by side; each keeps a serial inner pipeline
        data = _load(path, s)
        return characterize(data, config, n_jobs=1 if len(paths) > 1 else None)

    reports = parallel_map(run, paths, n_threads())
    labels = [r.region for r in reports]
    if len(set(labels)) != len(labels):
        raise UsageError("duplicate region labels; rename the input files or use --region")
    for rep in reports:
        one = len(reports) == 1
        if s["format"] == "csv":
            rows = [[rep.region, *r] for r in _flat_rows(rep.to_dict())]
            text = _table(["region", "key", "value"], rows)
            sink.primary("report.csv" if one else f"{rep.region}.report.csv", text)
        elif one or sink.dir is not None:
            sink.primary("report.json" if one else f"{rep.region}.report.json", rep.to_json())
        _write_artifacts(sink, rep)
    if len(reports) > 1 and sink.dir is None and s["format"] != "csv":
        sink.stdout.write(_json([r.to_dict() for r in reports]))
    return EXIT_PARTIAL if any(r.partial for r in reports) else EXIT_OK


def _write_artifacts(sink, rep):
    prefix = f"{rep.region}."
    art = rep.artifacts
    if "density" in art:
        d = art["density"]
        sink.side(prefix + "density.csv", _table(["frequency", "density"], zip(d.grid, d.density)))
    if "increment_density" in art:
        d = art["increment_density"]
        sink.side(prefix + "increments_density.csv", _table(["increment", "density"], zip(d.grid, d.density)))
    if "lt_curves" in art:
        sink.side(prefix + "lt_curves.csv", _table(["lag", "lt_data", "lt_surrogate_mean"], art["lt_curves"].curves()))
    if "acf" in art:
        sink.side(prefix + "acf.csv", _table(["lag", "acf"], art["acf"].table()))
    if "dfa" in art:
        sink.side(prefix + "dfa.csv", _table(["window", "fluctuation"], art["dfa"].table()))


def cmd_compare(s, sink):
    reports = []
    for path in s["input"]:
        with open(path, encoding="utf-8") as fh:
            reports.append(json.load(fh))
    table = compare(reports)
    if s["format"] == "csv":
        sink.primary("compare.csv", table.to_csv())
    else:
        sink.primary("compare.json", table.to_json())
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "density": cmd_density,
    "dip": cmd_dip,
    "increments": cmd_increments,
    "linearity": cmd_linearity,
    "acf": cmd_acf,
    "dfa": cmd_dfa,
    "synth": cmd_synth,
    "characterize": cmd_characterize,
    "compare": cmd_compare,
}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_FATAL
    try:
        settings = resolve(parser, args)
        sink = Sink(settings["output"], stdout)
        return COMMANDS[settings["verb"]](settings, sink)
    except (GridFreqError, UsageError, ValueError, KeyError, OSError) as exc:
        stderr.write(f"gridfreq {args.verb}: {type(exc).__name__}: {exc}\n")
        return EXIT_FATAL


def run():
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    run()
