"""Unitary descriptions of the linear optical network.

Matrices are stored with ``matrix[s, d]`` equal to the amplitude for a photon
entering input port ``s`` to leave through output port ``d`` (zero-based
internally, one-based at the API surface). :func:`submatrix` transposes into
the detector-by-source layout used by the effective matrices, where rows run
over detectors and columns over sources.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError, InvalidSelectionError

UNITARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Interferometer:
    """An M x M unitary with optional seed provenance.

    The matrix is copied and made read-only on construction.
    """

    matrix: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidDimensionError(f"interferometer matrix must be square with M >= 1, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameterError("interferometer matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"Interferometer(M={self.dimension}, seed={self.seed})"


@dataclass(frozen=True)
class PortSelection:
    """Occupied input ports and detecting output ports, both one-based."""

    input_ports: tuple
    output_ports: tuple

    def __post_init__(self):
        object.__setattr__(self, "input_ports", tuple(int(p) for p in self.input_ports))
        object.__setattr__(self, "output_ports", tuple(int(p) for p in self.output_ports))
        if len(self.input_ports) != len(self.output_ports):
            raise InvalidSelectionError(
                f"{len(self.input_ports)} input ports but {len(self.output_ports)} output ports"
            )
        if not self.input_ports:
            raise InvalidSelectionError("port selection is empty")
        for name, ports in (("input", self.input_ports), ("output", self.output_ports)):
            if len(set(ports)) != len(ports):
                raise InvalidSelectionError(f"duplicate {name} ports {ports}")

    @property
    def n(self) -> int:
        return len(self.input_ports)

    def validate(self, m: int) -> None:
        if self.n > m:
            raise InvalidSelectionError(f"N = {self.n} photons exceed M = {m} ports")
        for name, ports in (("input", self.input_ports), ("output", self.output_ports)):
            bad = [p for p in ports if not 1 <= p <= m]
            if bad:
                raise InvalidSelectionError(f"{name} ports {bad} outside [1, {m}]")


def haar_random_unitary(m: int, seed: int) -> Interferometer:
    """Haar-distributed M x M unitary from a seeded complex Ginibre matrix.

    The QR factor is phase-corrected so that R has a positive real diagonal;
    without that step the result is not Haar distributed.
    """
    if int(m) != m or m < 1:
        raise InvalidDimensionError(f"M must be a positive integer, got {m!r}")
    m = int(m)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return Interferometer(q, seed=seed)


def beam_splitter(tau: float) -> Interferometer:
    """Real 2 x 2 splitter with transmissivity ``tau``."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidParameterError(f"transmissivity must lie in [0, 1], got {tau!r}")
    t, r = np.sqrt(tau), np.sqrt(1.0 - tau)
    return Interferometer(np.array([[t, r], [r, -t]], dtype=complex))


def identity(m: int) -> Interferometer:
    if m < 1:
        raise InvalidDimensionError(f"M must be positive, got {m}")
    return Interferometer(np.eye(m, dtype=complex))


def submatrix(interf: Interferometer, sel: PortSelection) -> np.ndarray:
    """N x N block with entry ``[d, s]`` = amplitude input_ports[s] -> output_ports[d]."""
    sel.validate(interf.dimension)
    rows = np.array(sel.input_ports) - 1
    cols = np.array(sel.output_ports) - 1
    return interf.matrix[np.ix_(rows, cols)].T.copy()


def unitarity_residual(matrix) -> float:
    m = np.asarray(matrix, dtype=complex)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def verify_unitary(interf, tol: float = UNITARITY_TOL) -> bool:
    if tol <= 0:
        raise InvalidParameterError(f"tolerance must be positive, got {tol}")
    matrix = interf.matrix if isinstance(interf, Interferometer) else interf
    return unitarity_residual(matrix) <= tol


def from_matrix(matrix: Sequence, tol: float = 1e-10) -> Interferometer:
    """Validated interferometer from an explicit matrix (rejects non-unitary input)."""
    interf = Interferometer(np.asarray(matrix, dtype=complex))
    residual = unitarity_residual(interf.matrix)
    if residual > tol:
        raise InvalidParameterError(f"matrix is not unitary: max |U U^dag - I| = {residual:.3g}")
    return interf


def port_warning(m: int, n: int) -> Optional[str]:
    """Advisory message when the network is not in the dilute regime M >= N^2."""
    if m < n * n:
        return f"M = {m} < N^2 = {n * n}: bunched events are not negligible"
    return None
