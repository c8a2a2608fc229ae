"""Command-line front end.

    bosonic-qubits rate        --config run.yaml
    bosonic-qubits probability --config run.yaml --out results/
    bosonic-qubits sample      --config run.yaml --seed 7 --out results/
    bosonic-qubits sweep-delay --config run.yaml --out results/
    bosonic-qubits permanent   --matrix m.json [--kernel glynn]

Exit codes: 0 success, 2 config error, 3 guard violation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import platform
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from . import correlation as corr
from . import sampler
from .config import RunConfig, load_matrix_file, load_tree, parse_config
from .errors import ConfigError, InvalidParameterError, NumericalError, SizeLimitError
from .interferometer import port_warning
from .permanent import BATCH_KERNELS, permanent

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_NUMERICAL = 0, 2, 3, 4


def _c(z) -> list:
    return [float(z.real), float(z.imag)]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def header(cfg: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "bosonic-qubits",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "mode": cfg.mode,
        "seed": cfg.seed,
        "config": cfg.raw,
    }


def _measurement_json(meas):
    if meas is None:
        return None
    if isinstance(meas, corr.Trace):
        return "trace"
    if isinstance(meas, corr.QubitOutcome):
        return {"qubits": list(meas.bits)}
    return {"analyzers": list(meas.angles)}


def run_rate(cfg: RunConfig) -> dict:
    m = corr.effective_matrix(cfg.u_sub(), cfg.sources, cfg.times, cfg.measurement)
    kernel = cfg.quadrature.kernel
    per = permanent(m, kernel)
    return {
        "rate": abs(per) ** 2,
        "permanent": _c(per),
        "kernel": kernel,
        "times": list(cfg.times),
        "output_ports": list(cfg.output_ports),
        "measurement": _measurement_json(cfg.measurement),
        "effective_matrix": [[_c(z) for z in row] for row in m],
    }


def run_probability(cfg: RunConfig) -> dict:
    u = cfg.u_sub()
    coarse = corr.integrate_rate(u, cfg.sources, cfg.measurement, cfg.windows, cfg.quadrature)
    refined_quad = cfg.quadrature.refined()
    fine = corr.integrate_rate(u, cfg.sources, cfg.measurement, cfg.windows, refined_quad)
    return {
        "probability": coarse.value,
        "probability_refined": fine.value,
        "convergence_delta": abs(fine.value - coarse.value),
        "standard_error": coarse.error,
        "method": coarse.method,
        "evaluations": coarse.evaluations,
        "nodes_per_dim": [cfg.quadrature.nodes_per_dim, refined_quad.nodes_per_dim],
        "output_ports": list(cfg.output_ports),
        "measurement": _measurement_json(cfg.measurement),
        "windows": {"centers": list(cfg.windows.centers), "widths": list(cfg.windows.widths)},
    }


def _sample(cfg: RunConfig):
    table = sampler.enumerate_outcomes(
        cfg.interferometer, cfg.sources, cfg.grid, cfg.input_ports, cfg.qubit_mode, cfg.quadrature
    )
    draws = sampler.normalize_and_sample(table, cfg.seed, cfg.count)
    return table, draws


def run_sample(cfg: RunConfig):
    table, draws = _sample(cfg)
    hits = Counter(int(i) for i in draws)
    report = {
        "outcomes": len(table),
        "total_weight": table.total_weight,
        "count": int(cfg.count),
        "qubit_mode": cfg.qubit_mode,
        "grid": {"start": cfg.grid.start, "end": cfg.grid.end, "bins": cfg.grid.bins},
        "distinct_outcomes_drawn": len(hits),
        "chi2_pvalue": sampler.goodness_of_fit(table.weights, draws),
    }
    return report, table, draws


def outcome_lines(table) -> str:
    buf = io.StringIO()
    for rec in table:
        buf.write(json.dumps({
            "ports": list(rec.output_ports),
            "bin_indices": list(rec.time_bin_index),
            "bits": None if rec.qubit_bits is None else list(rec.qubit_bits),
            "weight": rec.weight,
        }))
        buf.write("\n")
    return buf.getvalue()


def summary_csv(table, draws) -> str:
    """Weight and draw count per (ports, bits), aggregated over time bins."""
    counts = np.bincount(draws, minlength=len(table))
    totals: dict = {}
    for i in range(len(table)):
        ports = " ".join(str(int(p)) for p in table.ports[i])
        bits = "" if table.bits is None else "".join(str(int(b)) for b in table.bits[i])
        w, c = totals.get((ports, bits), (0.0, 0))
        totals[(ports, bits)] = (w + float(table.weights[i]), c + int(counts[i]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["ports", "bits", "weight", "draws"])
    for (ports, bits), (w, c) in totals.items():
        writer.writerow([ports, bits, _fmt(w), c])
    return buf.getvalue()


def draws_csv(draws) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["draw", "outcome_index"])
    for k, i in enumerate(draws):
        writer.writerow([k, int(i)])
    return buf.getvalue()


def sweep_points(cfg: RunConfig) -> list:
    sweep = cfg.sweep
    taus = np.linspace(sweep.tau_min, sweep.tau_max, sweep.steps) if sweep.steps > 1 else np.array([sweep.tau_min])
    full = cfg.raw.get("windows", "full") in (None, "full")
    u = cfg.u_sub()
    rows = []
    for tau in taus:
        sources = list(cfg.sources)
        k = sweep.source - 1
        base = sources[k]
        sources[k] = corr.PolarizedSource(base.profile.delayed(base.profile.t_offset + float(tau)), base.theta)
        windows = corr.TimeWindows.full_domain(sources) if full else cfg.windows
        rows.append((float(tau), corr.integrated_probability(u, sources, cfg.measurement, windows, cfg.quadrature)))
    return rows


def run_sweep_delay(cfg: RunConfig):
    rows = sweep_points(cfg)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "probability"])
    for tau, p in rows:
        writer.writerow([_fmt(tau), _fmt(p)])
    report = {
        "source": cfg.sweep.source,
        "points": len(rows),
        "output_ports": list(cfg.output_ports),
        "min_probability": min(p for _, p in rows),
        "max_probability": max(p for _, p in rows),
    }
    return report, buf.getvalue()


def run_permanent(matrix, kernel: str) -> dict:
    value = permanent(matrix, kernel)
    return {"permanent": _c(value), "abs_squared": abs(value) ** 2, "kernel": kernel, "order": int(matrix.shape[0])}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonic-qubits", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("rate", "probability", "sample", "sweep-delay"):
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="YAML/JSON experiment file")
        p.add_argument("--seed", type=int, help="override the sampling seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("permanent")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="JSON file with a row-major matrix of [re, im] pairs")
    src.add_argument("--config", help="YAML/JSON file with a 'matrix' field")
    p.add_argument("--kernel", choices=sorted(BATCH_KERNELS), default=None)
    p.add_argument("--out", help="output directory")
    p.add_argument("--quiet", action="store_true")
    return parser


def _load(args) -> RunConfig:
    if args.mode == "permanent" and args.matrix:
        tree = {"mode": "permanent", "matrix": [[_c(z) for z in row] for row in load_matrix_file(args.matrix)]}
        cfg = parse_config(tree, "permanent")
    else:
        tree = load_tree(args.config)
        if isinstance(tree, dict):
            tree = {**tree, "mode": args.mode}
            if getattr(args, "seed", None) is not None:
                tree["seed"] = args.seed
                if isinstance(tree.get("sample"), dict):
                    tree["sample"] = {**tree["sample"], "seed": args.seed}
        cfg = parse_config(tree, args.mode)
    if args.mode == "permanent" and args.kernel:
        cfg.kernel = args.kernel
        cfg.raw = {**cfg.raw, "kernel": args.kernel}
    if args.out:
        cfg.output = args.out
    return cfg


def execute(cfg: RunConfig, quiet: bool = False) -> dict:
    out = Path(cfg.output) if cfg.output else None
    files = {}
    if cfg.mode == "permanent":
        result = run_permanent(cfg.matrix, cfg.kernel)
    elif cfg.mode == "rate":
        result = run_rate(cfg)
    elif cfg.mode == "probability":
        result = run_probability(cfg)
    elif cfg.mode == "sample":
        result, table, draws = run_sample(cfg)
        files = {
            "outcomes.jsonl": outcome_lines(table),
            "summary.csv": summary_csv(table, draws),
            "draws.csv": draws_csv(draws),
        }
    else:
        result, csv_text = run_sweep_delay(cfg)
        files = {"sweep.csv": csv_text}
    if cfg.mode != "permanent":
        warning = port_warning(cfg.interferometer.dimension, cfg.n)
        if warning:
            result["warning"] = warning
    report = {**header(cfg), "result": result}
    if out is not None:
        _write(out, "report.json", _dump(report))
        for name, text in files.items():
            _write(out, name, text)
    if not quiet:
        sys.stdout.write(_dump(report))
    return report


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        execute(cfg, quiet=args.quiet)
    except (ConfigError, InvalidParameterError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeLimitError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (NumericalError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
