"""Effective matrices, joint detection rates and window-integrated probabilities.

For N photons from sources ``s`` detected at output ports ``d`` at times
``t_d``, the effective matrix is the entrywise product

    M[d, s] = P[d, s] * u_sub[d, s] * chi_s(t_d)

where ``u_sub`` is the interferometer block (rows = detectors, columns =
sources), ``chi_s`` the temporal amplitude of source ``s`` and ``P`` the
polarization overlap ``cos(phi_d - theta_s)``. A polarization-resolving
measurement in the H/V basis uses ``phi_d = (pi/2) j_d`` for bit ``j_d``.
The instantaneous rate is ``|per M|^2`` with unit prefactor, and the
probability of a joint detection inside time windows is its integral over
the window box.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import spectra
from .errors import InvalidDimensionError, InvalidParameterError, NumericalError, SizeLimitError
from .permanent import DEFAULT_KERNEL, FAST_MAX_N, permanent, permanent_batch

FULL_DOMAIN_HALF_WIDTH = 8.0
PANEL_SPAN = 6.0
MAX_NODES_PER_DIM = 64
MIN_MC_SAMPLES = 1000
TRACE_MAX_N = 12
FACTORIZED_MAX_N = 6
GRID_FALLBACK_N = 6
_MC_CHUNK = 1 << 15


@dataclass(frozen=True)
class PolarizedSource:
    """Single-photon source with a linear polarization qubit cos(theta)|H> + sin(theta)|V>.

    ``theta`` is reduced to [0, pi); the dropped multiple of pi is a global
    sign of the photon state and does not affect any probability.
    """

    profile: spectra.SpectralProfile
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise InvalidParameterError(f"theta must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", float(self.theta) % math.pi)


@dataclass(frozen=True)
class Analyzers:
    """Linear polarization analyzers at angles ``phi_d`` in front of each detector."""

    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))

    def __len__(self):
        return len(self.angles)


@dataclass(frozen=True)
class QubitOutcome:
    """H/V measurement result ``j_d`` in {0, 1} at each detector."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidParameterError(f"qubit bits must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    def as_analyzers(self) -> Analyzers:
        return Analyzers(tuple(0.5 * math.pi * b for b in self.bits))


@dataclass(frozen=True)
class Trace:
    """Polarization-blind detection: sum over all 2^N qubit outcomes."""


PolarizationMeasurement = Union[Analyzers, QubitOutcome, Trace]


@dataclass(frozen=True)
class TimeWindows:
    centers: tuple
    widths: tuple

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        if len(self.centers) != len(self.widths):
            raise InvalidDimensionError(f"{len(self.centers)} window centers but {len(self.widths)} widths")
        if not all(math.isfinite(c) for c in self.centers):
            raise InvalidParameterError("window centers must be finite")
        if not all(w > 0 and math.isfinite(w) for w in self.widths):
            raise InvalidParameterError(f"window widths must be positive, got {self.widths}")

    def __len__(self):
        return len(self.centers)

    @property
    def bounds(self) -> list:
        return [(c - 0.5 * w, c + 0.5 * w) for c, w in zip(self.centers, self.widths)]

    @classmethod
    def from_bounds(cls, bounds) -> "TimeWindows":
        return cls(tuple(0.5 * (lo + hi) for lo, hi in bounds), tuple(hi - lo for lo, hi in bounds))

    @classmethod
    def full_domain(cls, sources: Sequence, n: Optional[int] = None) -> "TimeWindows":
        """Identical windows covering every pulse with 8 coherence times of margin."""
        lo, hi = full_domain_bounds(sources)
        n = len(sources) if n is None else n
        return cls((0.5 * (lo + hi),) * n, (hi - lo,) * n)


def full_domain_bounds(sources: Sequence) -> tuple:
    profiles = [_profile(s) for s in sources]
    margin = FULL_DOMAIN_HALF_WIDTH / min(p.delta_omega for p in profiles)
    return (min(p.t_offset for p in profiles) - margin, max(p.t_offset for p in profiles) + margin)


@dataclass(frozen=True)
class QuadratureSpec:
    """How the N-dimensional window integral is evaluated.

    method
        ``"gauss-legendre"``: composite Gauss-Legendre tensor grid, the rate is
        evaluated at every grid node.
        ``"factorized"``: the same tensor rule, summed through per-detector
        overlap matrices instead of node-by-node (identical up to rounding,
        far cheaper for N <= 4).
        ``"monte-carlo"``: uniform sampling of the window box.
        ``"auto"``: gauss-legendre for N < 6, monte-carlo otherwise.
    nodes_per_dim
        Gauss-Legendre order per panel.
    panels
        Panels per dimension; ``None`` picks enough panels that each spans at
        most ``PANEL_SPAN`` coherence times and a few beat periods.
    """

    method: str = "gauss-legendre"
    nodes_per_dim: int = 24
    panels: Optional[int] = None
    samples: int = 200_000
    seed: int = 0
    kernel: str = DEFAULT_KERNEL
    workers: int = 1

    def __post_init__(self):
        if self.method not in ("gauss-legendre", "factorized", "monte-carlo", "auto"):
            raise InvalidParameterError(f"unknown quadrature method {self.method!r}")
        if not 2 <= self.nodes_per_dim <= MAX_NODES_PER_DIM:
            raise InvalidParameterError(f"nodes_per_dim must lie in [2, {MAX_NODES_PER_DIM}], got {self.nodes_per_dim}")
        if self.panels is not None and self.panels < 1:
            raise InvalidParameterError(f"panels must be >= 1, got {self.panels}")
        if self.samples < MIN_MC_SAMPLES:
            raise InvalidParameterError(f"Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {self.samples}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {self.workers}")

    def refined(self) -> "QuadratureSpec":
        """Same rule with twice the nodes per panel (convergence check)."""
        if self.method == "monte-carlo":
            return QuadratureSpec(**{**self.__dict__, "samples": 4 * self.samples, "seed": self.seed + 1})
        return QuadratureSpec(**{**self.__dict__, "nodes_per_dim": min(2 * self.nodes_per_dim, MAX_NODES_PER_DIM)})


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error: float = 0.0
    evaluations: int = 0
    method: str = "gauss-legendre"


def _profile(source) -> spectra.SpectralProfile:
    return source.profile if isinstance(source, PolarizedSource) else source


def polarization_factor(phi, theta):
    """Amplitude for a photon polarized at ``theta`` to pass an analyzer at ``phi``."""
    return np.cos(np.subtract(phi, theta))


def input_state_amplitude(thetas: Sequence[float], bits: Sequence[int]) -> float:
    """Amplitude of |i_1 ... i_N> in the product of polarization qubits."""
    if len(thetas) != len(bits):
        raise InvalidDimensionError(f"{len(thetas)} angles but {len(bits)} bits")
    if any(b not in (0, 1) for b in bits):
        raise InvalidParameterError(f"bits must be 0 or 1, got {list(bits)}")
    return float(np.prod([math.cos(t - 0.5 * math.pi * b) for t, b in zip(thetas, bits)]))


def polarization_matrix(sources: Sequence, meas: Optional[PolarizationMeasurement], n: int) -> np.ndarray:
    """Real N x N matrix of analyzer/source overlaps; all ones when ``meas`` is None."""
    if meas is None:
        return np.ones((n, n))
    if isinstance(meas, Trace):
        raise InvalidParameterError("Trace must be expanded over qubit outcomes before building a matrix")
    if isinstance(meas, QubitOutcome):
        meas = meas.as_analyzers()
    if len(meas) != n:
        raise InvalidDimensionError(f"measurement has {len(meas)} entries, expected {n}")
    thetas = np.array([s.theta if isinstance(s, PolarizedSource) else 0.0 for s in sources])
    return polarization_factor(np.array(meas.angles)[:, None], thetas[None, :])


def _check_dims(u_sub, sources, n_meas=None) -> np.ndarray:
    u = np.asarray(u_sub, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidDimensionError(f"u_sub must be square, got shape {u.shape}")
    if len(sources) != u.shape[1]:
        raise InvalidDimensionError(f"{len(sources)} sources for a {u.shape[0]} x {u.shape[1]} block")
    if n_meas is not None and n_meas != u.shape[0]:
        raise InvalidDimensionError(f"{n_meas} detector entries for {u.shape[0]} detectors")
    return u


def amplitude_matrix(u_sub, sources, meas) -> np.ndarray:
    """Time-independent part P * u_sub of the effective matrix."""
    u = _check_dims(u_sub, sources)
    return polarization_matrix(sources, meas, u.shape[0]) * u


def temporal_matrix(sources, times) -> np.ndarray:
    """[chi_s(t_d)] with rows over detection times and columns over sources."""
    times = np.asarray(times, dtype=float)
    return np.stack([spectra.temporal_amplitude(_profile(s), times) for s in sources], axis=-1)


def effective_matrix(u_sub, sources, times, meas: Optional[PolarizationMeasurement]) -> np.ndarray:
    u = _check_dims(u_sub, sources, len(times))
    return amplitude_matrix(u, sources, meas) * temporal_matrix(sources, times)


def correlation_rate(m, kernel: str = DEFAULT_KERNEL) -> float:
    """|per m|^2."""
    return abs(permanent(m, kernel)) ** 2


# -- quadrature rules ------------------------------------------------------

def panel_count(bounds: tuple, sources: Sequence, nodes: int) -> int:
    profiles = [_profile(s) for s in sources]
    width = bounds[1] - bounds[0]
    dw_max = max(p.delta_omega for p in profiles)
    w0 = [p.omega0 for p in profiles]
    beat = max(w0) - min(w0)
    by_envelope = width * dw_max / PANEL_SPAN
    by_beat = width * beat / (2.0 * math.pi) / max(1.0, nodes / 12.0)
    return max(1, math.ceil(by_envelope - 1e-12), math.ceil(by_beat - 1e-12))


def composite_gauss_legendre(lo: float, hi: float, nodes: int, panels: int) -> tuple:
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def _rule(bounds, sources, quad: QuadratureSpec):
    panels = quad.panels or panel_count(bounds, sources, quad.nodes_per_dim)
    return composite_gauss_legendre(bounds[0], bounds[1], quad.nodes_per_dim, panels)


def _resolve_method(quad: QuadratureSpec, n: int) -> str:
    if quad.method == "auto":
        return "gauss-legendre" if n < GRID_FALLBACK_N else "monte-carlo"
    return quad.method


def _map(fn, items, workers: int):
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _integrate_grid(amp, sources, bounds, quad: QuadratureSpec) -> IntegrationResult:
    n = amp.shape[0]
    rules = [_rule(b, sources, quad) for b in bounds]
    # chi tables per detector: [node, source]
    chis = [temporal_matrix(sources, t) for t, _ in rules]
    weights = [w for _, w in rules]
    rest_shape = tuple(len(w) for w in weights[1:])
    rest_index = np.indices(rest_shape).reshape(n - 1, -1) if n > 1 else np.zeros((0, 1), dtype=int)
    rest_weight = np.ones(rest_index.shape[1])
    rest_rows = []
    for d in range(1, n):
        rest_weight = rest_weight * weights[d][rest_index[d - 1]]
        rest_rows.append(chis[d][rest_index[d - 1]])

    def chunk(k0: int) -> float:
        rows = [np.broadcast_to(chis[0][k0], (rest_index.shape[1], n))] + rest_rows
        mats = amp[None, :, :] * np.stack(rows, axis=1)
        rates = np.abs(permanent_batch(mats, quad.kernel)) ** 2
        return float(weights[0][k0] * np.dot(rates, rest_weight))

    partials = _map(chunk, range(len(weights[0])), quad.workers)
    total = 0.0
    for p in partials:
        total += p
    count = len(weights[0]) * rest_index.shape[1]
    return IntegrationResult(total, 0.0, count, "gauss-legendre")


def _integrate_mc(amp, sources, bounds, quad: QuadratureSpec) -> IntegrationResult:
    n = amp.shape[0]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    volume = float(np.prod(hi - lo))
    rng = np.random.default_rng(quad.seed)
    points = lo + (hi - lo) * rng.random((quad.samples, n))
    starts = range(0, quad.samples, _MC_CHUNK)

    def chunk(start: int):
        pts = points[start:start + _MC_CHUNK]
        chi = temporal_matrix(sources, pts)  # (B, N detectors, N sources)
        rates = np.abs(permanent_batch(amp[None] * chi, quad.kernel)) ** 2
        return float(rates.sum()), float((rates ** 2).sum())

    s1 = s2 = 0.0
    for a, b in _map(chunk, starts, quad.workers):
        s1 += a
        s2 += b
    mean = s1 / quad.samples
    var = max(s2 / quad.samples - mean * mean, 0.0)
    return IntegrationResult(volume * mean, volume * math.sqrt(var / quad.samples), quad.samples, "monte-carlo")


def window_gram(sources, bounds: tuple, quad: QuadratureSpec) -> np.ndarray:
    """G[a, b] = int_window chi_a(t)^* chi_b(t) dt by composite Gauss-Legendre."""
    t, w = _rule(bounds, sources, quad)
    chi = temporal_matrix(sources, t)
    return (chi.conj().T * w) @ chi


def factorized_sum(amp: np.ndarray, grams: Sequence[np.ndarray]) -> np.ndarray:
    """Window integrals of |per(amp * chi)|^2 from per-detector overlap matrices.

    ``grams[d]`` has shape (K_d, N, N): one overlap matrix per candidate window
    of detector d. Returns an array of shape (K_0, ..., K_{N-1}) with

        sum_{sigma, tau} prod_d amp[d, sigma_d] conj(amp[d, tau_d]) G_d[tau_d, sigma_d].
    """
    n = amp.shape[0]
    if n > FACTORIZED_MAX_N:
        raise SizeLimitError(f"factorized integration is capped at N = {FACTORIZED_MAX_N}, got N = {n}")
    shape = tuple(g.shape[0] for g in grams)
    total = np.zeros(shape, dtype=complex)
    perms = list(itertools.permutations(range(n)))
    rows = np.arange(n)
    for sigma in perms:
        a_sigma = amp[rows, sigma]
        for tau in perms:
            coef = a_sigma * amp[rows, tau].conj()
            term = None
            for d in range(n):
                vec = coef[d] * grams[d][:, tau[d], sigma[d]]
                term = vec if term is None else np.multiply.outer(term, vec)
            total += term
    return np.clip(total.real, 0.0, None)


def _integrate_factorized(amp, sources, bounds, quad: QuadratureSpec) -> IntegrationResult:
    grams = [window_gram(sources, b, quad)[None] for b in bounds]
    value = float(factorized_sum(amp, grams).reshape(-1)[0])
    return IntegrationResult(value, 0.0, 0, "factorized")


_INTEGRATORS = {
    "gauss-legendre": _integrate_grid,
    "monte-carlo": _integrate_mc,
    "factorized": _integrate_factorized,
}


def integrate_rate(u_sub, sources, meas, windows: TimeWindows, quad: Optional[QuadratureSpec] = None) -> IntegrationResult:
    """Integral of the joint detection rate over the window box, with diagnostics."""
    quad = quad or QuadratureSpec()
    u = _check_dims(u_sub, sources, len(windows))
    n = u.shape[0]
    if n > FAST_MAX_N:
        raise SizeLimitError(f"N = {n} exceeds the permanent cap {FAST_MAX_N}")
    if isinstance(meas, Trace):
        value = trace_over_polarization(u, sources, windows, quad)
        return IntegrationResult(value, 0.0, 0, _resolve_method(quad, n) + "+trace")
    amp = amplitude_matrix(u, sources, meas)
    result = _INTEGRATORS[_resolve_method(quad, n)](amp, sources, windows.bounds, quad)
    if not math.isfinite(result.value):
        raise NumericalError(f"integration produced {result.value!r}")
    return result


def integrated_probability(u_sub, sources, meas, windows: TimeWindows, quad: Optional[QuadratureSpec] = None) -> float:
    """Probability of an N-fold joint detection with detector d firing inside window d."""
    return integrate_rate(u_sub, sources, meas, windows, quad).value


def qubit_outcome_probability(u_sub, sources, bits, windows: TimeWindows, quad: Optional[QuadratureSpec] = None) -> float:
    return integrated_probability(u_sub, sources, QubitOutcome(tuple(bits)), windows, quad)


def trace_over_polarization(u_sub, sources, windows: TimeWindows, quad: Optional[QuadratureSpec] = None) -> float:
    """Sum of the qubit-outcome probabilities over all 2^N bit strings."""
    n = len(sources)
    if n > TRACE_MAX_N:
        raise SizeLimitError(f"tracing over 2^N outcomes is capped at N = {TRACE_MAX_N}, got N = {n}")
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        total += qubit_outcome_probability(u_sub, sources, bits, windows, quad)
    return total
