"""Exact enumeration and seeded sampling of joint detection outcomes.

An outcome is a collision-free set of N output ports (stored ascending, the
detector labels follow that order), one time bin per detector on a uniform
grid, and optionally the H/V bit registered at each detector. Every outcome
weight is the window-integrated detection probability over its bins, so the
table is an exact discrete version of the continuous joint distribution.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import correlation as corr
from .errors import InvalidParameterError, NumericalError, OutcomeSpaceOverflowError
from .interferometer import Interferometer, PortSelection, port_warning, submatrix
from .permanent import DEFAULT_KERNEL, permanent

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10 ** 7


@dataclass(frozen=True)
class TimeGrid:
    """Uniform bins tiling [start, end] for every detector."""

    start: float
    end: float
    bins: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)) or self.end <= self.start:
            raise InvalidParameterError(f"time grid needs start < end, got [{self.start}, {self.end}]")
        if int(self.bins) != self.bins or self.bins < 1:
            raise InvalidParameterError(f"bins must be a positive integer, got {self.bins!r}")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.bins + 1)

    @property
    def bin_bounds(self) -> list:
        e = self.edges
        return list(zip(e[:-1], e[1:]))

    @classmethod
    def full_domain(cls, sources: Sequence, bins: Optional[int] = None) -> "TimeGrid":
        """Grid over the default full detection domain.

        Without ``bins`` the bin width is a quarter of the longest coherence time.
        """
        lo, hi = corr.full_domain_bounds(sources)
        if bins is None:
            width = 0.25 / min(corr._profile(s).delta_omega for s in sources)
            bins = max(1, math.ceil((hi - lo) / width - 1e-9))
        return cls(lo, hi, bins)


@dataclass(frozen=True)
class OutcomeRecord:
    output_ports: tuple
    time_bin_index: tuple
    qubit_bits: Optional[tuple]
    weight: float


class OutcomeTable:
    """Column-oriented storage for an enumerated outcome space.

    Behaves as a read-only sequence of :class:`OutcomeRecord`.
    """

    def __init__(self, ports: np.ndarray, bins: np.ndarray, bits: Optional[np.ndarray], weights: np.ndarray, grid: TimeGrid):
        self.ports = ports
        self.bins = bins
        self.bits = bits
        self.weights = weights
        self.grid = grid

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i) -> OutcomeRecord:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        bits = None if self.bits is None else tuple(int(b) for b in self.bits[i])
        return OutcomeRecord(
            tuple(int(p) for p in self.ports[i]),
            tuple(int(b) for b in self.bins[i]),
            bits,
            float(self.weights[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def outcome_count(m: int, n: int, bins: int, qubit_mode: bool) -> int:
    return math.comb(m, n) * bins ** n * (2 ** n if qubit_mode else 1)


def enumerate_outcomes(
    interf: Interferometer,
    sources: Sequence,
    grid: TimeGrid,
    input_ports: Optional[Sequence[int]] = None,
    qubit_mode: bool = False,
    quad: Optional[corr.QuadratureSpec] = None,
) -> OutcomeTable:
    """Every collision-free outcome with its integrated probability.

    Ordering is fixed: port combinations ascending, within each the qubit
    strings in binary order, within each of those the bin tuples in
    row-major order. Without ``qubit_mode`` each weight is traced over
    polarization.
    """
    quad = quad or corr.QuadratureSpec()
    m, n = interf.dimension, len(sources)
    input_ports = tuple(range(1, n + 1)) if input_ports is None else tuple(input_ports)
    PortSelection(input_ports, input_ports).validate(m)
    count = outcome_count(m, n, grid.bins, qubit_mode)
    if count > ENUMERATION_LIMIT:
        raise OutcomeSpaceOverflowError(
            f"{count} outcomes exceed the enumeration limit {ENUMERATION_LIMIT}; "
            "use a coarser time grid or fewer photons"
        )
    warning = port_warning(m, n)
    if warning:
        logger.warning(warning)

    grams = np.stack([corr.window_gram(sources, b, quad) for b in grid.bin_bounds])
    bit_strings = list(itertools.product((0, 1), repeat=n))
    bin_tuples = np.indices((grid.bins,) * n).reshape(n, -1).T

    ports_out, weights_out, bits_out = [], [], []
    for ports in itertools.combinations(range(1, m + 1), n):
        u = submatrix(interf, PortSelection(input_ports, ports))
        per_bits = []
        for bits in bit_strings:
            amp = corr.amplitude_matrix(u, sources, corr.QubitOutcome(bits))
            per_bits.append(corr.factorized_sum(amp, [grams] * n).reshape(-1))
        if qubit_mode:
            for bits, w in zip(bit_strings, per_bits):
                weights_out.append(w)
                bits_out.append(np.broadcast_to(np.array(bits), (len(w), n)))
                ports_out.append(ports)
        else:
            traced = np.zeros_like(per_bits[0])
            for w in per_bits:
                traced += w
            weights_out.append(traced)
            ports_out.append(ports)

    per_block = len(bin_tuples)
    weights = np.concatenate(weights_out)
    ports_arr = np.repeat(np.array(ports_out, dtype=int), per_block, axis=0)
    bins_arr = np.tile(bin_tuples, (len(ports_out), 1))
    bits_arr = np.concatenate(bits_out) if qubit_mode else None
    return OutcomeTable(ports_arr, bins_arr, bits_arr, weights, grid)


def _weights(records) -> np.ndarray:
    if isinstance(records, OutcomeTable):
        return np.asarray(records.weights, dtype=float)
    return np.array([r.weight for r in records], dtype=float)


def normalize_and_sample(records, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` record indices by inverse-CDF sampling of the weights."""
    if int(count) != count or count < 1:
        raise InvalidParameterError(f"count must be a positive integer, got {count!r}")
    w = _weights(records)
    if len(w) == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise NumericalError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise NumericalError("all outcome weights are zero; nothing to sample")
    cdf = np.cumsum(w) / total
    rng = np.random.default_rng(seed)
    u = rng.random(int(count))
    idx = np.searchsorted(cdf, u, side="right")
    # guard against cdf[-1] rounding below 1 and zero-weight tail records
    last_positive = int(np.flatnonzero(w > 0)[-1])
    return np.minimum(idx, last_positive)


def distinguishable_probability(u_sub, sources, meas=None, kernel: str = DEFAULT_KERNEL) -> float:
    """Detection probability for fully distinguishable photons.

    Without temporal overlap only the diagonal of the interference sum
    survives, leaving the permanent of the squared-modulus effective matrix.
    """
    amp = corr.amplitude_matrix(u_sub, sources, meas)
    return float(permanent(np.abs(amp) ** 2, kernel).real)


def goodness_of_fit(weights: np.ndarray, draws: np.ndarray, min_expected: float = 5.0) -> float:
    """Chi-square p-value of draw counts against weights, pooling sparse cells."""
    counts = np.bincount(draws, minlength=len(weights)).astype(float)
    expected = weights / weights.sum() * len(draws)
    order = np.argsort(expected, kind="stable")
    obs_cells, exp_cells = [], []
    acc_o = acc_e = 0.0
    for i in order:
        acc_o += counts[i]
        acc_e += expected[i]
        if acc_e >= min_expected:
            obs_cells.append(acc_o)
            exp_cells.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp_cells:
        obs_cells[-1] += acc_o
        exp_cells[-1] += acc_e
    if len(exp_cells) < 2:
        return 1.0
    return float(stats.chisquare(obs_cells, exp_cells).pvalue)
