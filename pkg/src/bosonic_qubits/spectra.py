"""Gaussian single-photon wave packets in frequency and time.

A photon emitted at time ``t_s`` with carrier ``omega0`` and spectral
width ``delta_omega`` has the L2-normalized frequency amplitude

    xi(w)  = (1/(pi dw^2))^(1/4) exp(-(w - w0)^2 / (2 dw^2)) exp(i w t_s)

and, with the transform convention chi(t) = (2 pi)^(-1/2) int xi(w) e^{-i w t} dw,
the temporal amplitude

    chi(t) = (dw^2/pi)^(1/4) exp(-dw^2 (t - t_s)^2 / 2) exp(-i w0 (t - t_s)).

Both are normalized to one, so a single photon that is certainly detected
contributes unit probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

DEFAULT_NARROWBAND_RATIO = 10.0


@dataclass(frozen=True)
class SpectralProfile:
    """Gaussian spectral profile of one single-photon source.

    Parameters
    ----------
    omega0 : float
        Carrier (center) angular frequency, must be positive.
    delta_omega : float
        Spectral standard deviation of the amplitude, must be positive.
    t_offset : float
        Emission time of the pulse; sets the delay of the wave packet.
    narrowband_ratio : float
        Minimum accepted ``omega0 / delta_omega``.
    """

    omega0: float
    delta_omega: float
    t_offset: float = 0.0
    narrowband_ratio: float = field(default=DEFAULT_NARROWBAND_RATIO, compare=False)

    def __post_init__(self):
        for name in ("omega0", "delta_omega", "t_offset", "narrowband_ratio"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.delta_omega <= 0:
            raise InvalidParameterError(f"delta_omega must be positive, got {self.delta_omega}")
        if self.omega0 <= 0:
            raise InvalidParameterError(f"omega0 must be positive, got {self.omega0}")
        if self.omega0 / self.delta_omega < self.narrowband_ratio:
            raise InvalidParameterError(
                f"omega0/delta_omega = {self.omega0 / self.delta_omega:.6g} is below the "
                f"narrowband threshold {self.narrowband_ratio:g}"
            )

    def delayed(self, t_offset: float) -> "SpectralProfile":
        """Copy of this profile emitted at ``t_offset``."""
        return SpectralProfile(self.omega0, self.delta_omega, t_offset, self.narrowband_ratio)


def spectral_amplitude(profile: SpectralProfile, omega):
    """Frequency amplitude xi(omega); accepts scalars or arrays."""
    omega = np.asarray(omega, dtype=float)
    dw = profile.delta_omega
    norm = (1.0 / (math.pi * dw * dw)) ** 0.25
    envelope = np.exp(-((omega - profile.omega0) ** 2) / (2.0 * dw * dw))
    out = norm * envelope * np.exp(1j * omega * profile.t_offset)
    return out[()] if out.ndim == 0 else out


def temporal_amplitude(profile: SpectralProfile, t):
    """Temporal amplitude chi(t), the closed-form Fourier transform of xi."""
    u = np.asarray(t, dtype=float) - profile.t_offset
    dw = profile.delta_omega
    norm = (dw * dw / math.pi) ** 0.25
    out = norm * np.exp(-0.5 * (dw * u) ** 2) * np.exp(-1j * profile.omega0 * u)
    return out[()] if out.ndim == 0 else out


def coherence_time(profile: SpectralProfile) -> float:
    return 1.0 / profile.delta_omega


def overlap(first: SpectralProfile, second: SpectralProfile) -> complex:
    """Closed-form inner product int chi_1*(t) chi_2(t) dt over the real line."""
    a1, a2 = first.delta_omega ** 2, second.delta_omega ** 2
    t1, t2 = first.t_offset, second.t_offset
    w1, w2 = first.omega0, second.omega0
    # exponent of chi_1^* chi_2 is -A t^2 + B t + C (complex B, C)
    a = 0.5 * (a1 + a2)
    b = a1 * t1 + a2 * t2 + 1j * (w1 - w2)
    c = -0.5 * (a1 * t1 * t1 + a2 * t2 * t2) + 1j * (w2 * t2 - w1 * t1)
    prefactor = (a1 * a2 / math.pi ** 2) ** 0.25
    return complex(prefactor * np.sqrt(math.pi / a) * np.exp(b * b / (4 * a) + c))
