"""Run configuration: parsing and validation of experiment files.

Configs are YAML (JSON is accepted as a subset). Every validation failure is
raised as :class:`ConfigError` naming the offending field path, e.g.
``sources[1].delta_omega: must be positive``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import correlation as corr
from . import interferometer as ifm
from .errors import BosonicQubitsError, ConfigError
from .permanent import BATCH_KERNELS, DEFAULT_KERNEL
from .sampler import TimeGrid
from .spectra import DEFAULT_NARROWBAND_RATIO, SpectralProfile

MODES = ("rate", "probability", "sample", "sweep-delay", "permanent")


@dataclass
class SweepSpec:
    source: int
    tau_min: float
    tau_max: float
    steps: int


@dataclass
class RunConfig:
    mode: str
    raw: dict
    interferometer: Optional[ifm.Interferometer] = None
    sources: list = field(default_factory=list)
    input_ports: tuple = ()
    output_ports: tuple = ()
    measurement: Any = None
    times: Optional[tuple] = None
    windows: Optional[corr.TimeWindows] = None
    quadrature: corr.QuadratureSpec = field(default_factory=corr.QuadratureSpec)
    grid: Optional[TimeGrid] = None
    seed: int = 0
    count: int = 1000
    qubit_mode: bool = True
    sweep: Optional[SweepSpec] = None
    matrix: Optional[np.ndarray] = None
    kernel: str = DEFAULT_KERNEL
    output: Optional[str] = None

    @property
    def n(self) -> int:
        return len(self.sources)

    def selection(self) -> ifm.PortSelection:
        return ifm.PortSelection(self.input_ports, self.output_ports)

    def u_sub(self) -> np.ndarray:
        return ifm.submatrix(self.interferometer, self.selection())


def _get(tree: dict, key: str, path: str, default=...):
    if not isinstance(tree, dict):
        raise ConfigError(path, f"expected a mapping, got {type(tree).__name__}")
    if key not in tree:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "required field is missing")
        return default
    return tree[key]


def _number(value, path: str, positive: bool = False, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _number_list(value, path: str, length: Optional[int] = None, **kw) -> tuple:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(path, f"expected a list, got {value!r}")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(value)}")
    return tuple(_number(v, f"{path}[{i}]", **kw) for i, v in enumerate(value))


def parse_complex_matrix(value, path: str = "matrix") -> np.ndarray:
    """Row-major matrix whose entries are ``[re, im]`` pairs (bare reals allowed)."""
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(path, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if len(row) != len(value[0]):
            raise ConfigError(f"{path}[{i}]", f"row has {len(row)} entries, expected {len(value[0])}")
        out = []
        for j, entry in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if isinstance(entry, (list, tuple)):
                re, im = _number_list(entry, p, length=2)
                out.append(complex(re, im))
            else:
                out.append(complex(_number(entry, p)))
        rows.append(out)
    return np.array(rows, dtype=complex)


def _interferometer(tree, path: str) -> ifm.Interferometer:
    if not isinstance(tree, dict) or len(tree) != 1:
        raise ConfigError(path, "expected exactly one of haar, beam_splitter, matrix")
    (kind, body), = tree.items()
    p = f"{path}.{kind}"
    try:
        if kind == "haar":
            m = _number(_get(body, "M", p), f"{p}.M", positive=True, integer=True)
            seed = _number(_get(body, "seed", p), f"{p}.seed", integer=True)
            return ifm.haar_random_unitary(m, seed)
        if kind == "beam_splitter":
            return ifm.beam_splitter(_number(_get(body, "tau", p), f"{p}.tau"))
        if kind == "matrix":
            return ifm.from_matrix(parse_complex_matrix(body, p))
    except ConfigError:
        raise
    except BosonicQubitsError as exc:
        raise ConfigError(p, str(exc)) from exc
    raise ConfigError(path, f"unknown interferometer kind {kind!r}")


def _sources(value, ratio: float) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError("sources", "expected a non-empty list")
    out = []
    for i, item in enumerate(value):
        p = f"sources[{i}]"
        try:
            profile = SpectralProfile(
                _number(_get(item, "omega0", p), f"{p}.omega0"),
                _number(_get(item, "delta_omega", p), f"{p}.delta_omega", positive=True),
                _number(_get(item, "t_offset", p, 0.0), f"{p}.t_offset"),
                ratio,
            )
            out.append(corr.PolarizedSource(profile, _number(_get(item, "theta", p, 0.0), f"{p}.theta")))
        except ConfigError:
            raise
        except BosonicQubitsError as exc:
            raise ConfigError(p, str(exc)) from exc
    return out


def _ports(value, path: str, n: int, m: int) -> tuple:
    ports = _number_list(value, path, length=n, integer=True)
    if len(set(ports)) != len(ports):
        raise ConfigError(path, f"ports must be distinct, got {list(ports)}")
    bad = [q for q in ports if not 1 <= q <= m]
    if bad:
        raise ConfigError(path, f"ports {bad} outside [1, {m}]")
    return ports


def _measurement(value, n: int):
    if value is None or value == "none":
        return None
    if value == "trace":
        return corr.Trace()
    if isinstance(value, dict) and len(value) == 1:
        (kind, body), = value.items()
        if kind == "analyzers":
            return corr.Analyzers(_number_list(body, "measurement.analyzers", length=n))
        if kind == "qubits":
            bits = _number_list(body, "measurement.qubits", length=n, integer=True)
            if any(b not in (0, 1) for b in bits):
                raise ConfigError("measurement.qubits", f"bits must be 0 or 1, got {list(bits)}")
            return corr.QubitOutcome(bits)
    raise ConfigError("measurement", "expected 'trace', 'none', {analyzers: [...]} or {qubits: [...]}")


def _windows(value, sources, n: int) -> corr.TimeWindows:
    if value is None or value == "full":
        return corr.TimeWindows.full_domain(sources, n)
    if not isinstance(value, dict):
        raise ConfigError("windows", "expected 'full' or {centers: [...], widths: [...]}")
    centers = _number_list(_get(value, "centers", "windows"), "windows.centers", length=n)
    widths = _number_list(_get(value, "widths", "windows"), "windows.widths", length=n, positive=True)
    return corr.TimeWindows(centers, widths)


def _quadrature(value) -> corr.QuadratureSpec:
    if value is None:
        return corr.QuadratureSpec()
    if not isinstance(value, dict):
        raise ConfigError("quadrature", "expected a mapping")
    allowed = {"method", "nodes_per_dim", "panels", "samples", "seed", "kernel", "workers"}
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(f"quadrature.{sorted(unknown)[0]}", "unknown field")
    kwargs = dict(value)
    for key in ("nodes_per_dim", "panels", "samples", "seed", "workers"):
        if kwargs.get(key) is not None:
            kwargs[key] = _number(kwargs[key], f"quadrature.{key}", integer=True)
    if kwargs.get("kernel", DEFAULT_KERNEL) not in BATCH_KERNELS:
        raise ConfigError("quadrature.kernel", f"unknown kernel {kwargs['kernel']!r}")
    try:
        return corr.QuadratureSpec(**kwargs)
    except BosonicQubitsError as exc:
        raise ConfigError("quadrature", str(exc)) from exc


def _grid(value, sources) -> TimeGrid:
    if value is None or value == "full":
        return TimeGrid.full_domain(sources, 1)
    if not isinstance(value, dict):
        raise ConfigError("grid", "expected 'full' or {start, end, bins}")
    bins = value.get("bins")
    if bins is not None:
        bins = _number(bins, "grid.bins", positive=True, integer=True)
    if "start" not in value and "end" not in value:
        return TimeGrid.full_domain(sources, bins)
    start = _number(_get(value, "start", "grid"), "grid.start")
    end = _number(_get(value, "end", "grid"), "grid.end")
    if end <= start:
        raise ConfigError("grid.end", f"must exceed grid.start ({start})")
    return TimeGrid(start, end, bins or 1)


def parse_config(tree: dict, mode: Optional[str] = None) -> RunConfig:
    """Validate a config tree into a :class:`RunConfig`."""
    if not isinstance(tree, dict):
        raise ConfigError("", "config root must be a mapping")
    mode = mode or tree.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")
    cfg = RunConfig(mode=mode, raw=tree)
    cfg.output = tree.get("output")
    cfg.seed = _number(tree.get("seed", 0), "seed", integer=True)

    if mode == "permanent":
        cfg.matrix = parse_complex_matrix(_get(tree, "matrix", ""))
        if cfg.matrix.shape[0] != cfg.matrix.shape[1]:
            raise ConfigError("matrix", f"expected a square matrix, got shape {cfg.matrix.shape}")
        cfg.kernel = tree.get("kernel", DEFAULT_KERNEL)
        if cfg.kernel not in BATCH_KERNELS:
            raise ConfigError("kernel", f"unknown kernel {cfg.kernel!r}")
        return cfg

    ratio = _number(tree.get("narrowband_ratio", DEFAULT_NARROWBAND_RATIO), "narrowband_ratio", positive=True)
    cfg.interferometer = _interferometer(_get(tree, "interferometer", ""), "interferometer")
    cfg.sources = _sources(_get(tree, "sources", ""), ratio)
    m, n = cfg.interferometer.dimension, cfg.n
    if n > m:
        raise ConfigError("sources", f"{n} sources exceed M = {m} ports")
    cfg.input_ports = _ports(tree.get("input_ports", list(range(1, n + 1))), "input_ports", n, m)
    cfg.quadrature = _quadrature(tree.get("quadrature"))

    if mode in ("rate", "probability", "sweep-delay"):
        cfg.output_ports = _ports(_get(tree, "output_ports", ""), "output_ports", n, m)
        cfg.measurement = _measurement(tree.get("measurement"), n)
    if mode == "rate":
        if isinstance(cfg.measurement, corr.Trace):
            raise ConfigError("measurement", "rate mode needs analyzers, qubits or none")
        cfg.times = _number_list(_get(tree, "times", ""), "times", length=n)
    if mode in ("probability", "sweep-delay"):
        cfg.windows = _windows(tree.get("windows"), cfg.sources, n)
    if mode == "sample":
        body = tree.get("sample", {}) or {}
        cfg.grid = _grid(tree.get("grid"), cfg.sources)
        cfg.count = _number(body.get("count", 1000), "sample.count", positive=True, integer=True)
        qubit_mode = body.get("qubit_mode", True)
        if not isinstance(qubit_mode, bool):
            raise ConfigError("sample.qubit_mode", f"expected true/false, got {qubit_mode!r}")
        cfg.qubit_mode = qubit_mode
        if "seed" in body:
            cfg.seed = _number(body["seed"], "sample.seed", integer=True)
    if mode == "sweep-delay":
        body = _get(tree, "sweep", "")
        src = _number(body.get("source", n), "sweep.source", integer=True)
        if not 1 <= src <= n:
            raise ConfigError("sweep.source", f"must lie in [1, {n}], got {src}")
        tau_min = _number(_get(body, "tau_min", "sweep"), "sweep.tau_min")
        tau_max = _number(_get(body, "tau_max", "sweep"), "sweep.tau_max")
        steps = _number(_get(body, "steps", "sweep"), "sweep.steps", positive=True, integer=True)
        if tau_max < tau_min:
            raise ConfigError("sweep.tau_max", "must not be smaller than sweep.tau_min")
        cfg.sweep = SweepSpec(src, tau_min, tau_max, steps)
    return cfg


def load_tree(path) -> dict:
    text = Path(path).read_text()
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else str(path)
        raise ConfigError(where, f"cannot parse config: {getattr(exc, 'problem', exc)}") from exc
    return tree if tree is not None else {}


def load_config(path, mode: Optional[str] = None) -> RunConfig:
    return parse_config(load_tree(path), mode)


def load_matrix_file(path) -> np.ndarray:
    """Matrix JSON file: either a bare row-major list or ``{"matrix": [...]}``."""
    try:
        tree = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}", f"invalid JSON: {exc.msg}") from exc
    if isinstance(tree, dict):
        tree = _get(tree, "matrix", "")
    m = parse_complex_matrix(tree)
    if m.shape[0] != m.shape[1]:
        raise ConfigError("matrix", f"expected a square matrix, got shape {m.shape}")
    return m
