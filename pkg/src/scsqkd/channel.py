"""Linear-optics expected-value model of Charlie's measurement station.

Pulses travel symmetric fiber arms to a 50:50 beam splitter at the midpoint,
followed by two threshold detectors (left/right) with dark-count probability
``p_d``.  Misalignment enters through the interference visibility
``V = 1 - 2*e_d``.  Two heralding strategies are modeled:

* ``improved``: Charlie compensates the phase in every window so that
  both-coherent (B) windows steer their energy to the left port; a window
  is effective when the right detector clicks and the left one does not.
* ``baseline``: no phase compensation; the phase difference in B windows is
  uniformly random and a B window is effective when exactly one detector
  clicks.  One-side (Z) and both-vacuum (O) windows are insensitive to the
  phase, so their heralding probabilities match the improved mode.

The baseline mode is a documented approximation of the original protocol,
used only for rate comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MODES = ("improved", "baseline")

# Window kinds: both-vacuum, both-coherent, and the two one-sided kinds.
# Z_A = Alice vacuum / Bob coherent, Z_B = Alice coherent / Bob vacuum.
KINDS = ("O", "B", "Z_A", "Z_B")

_PHASE_GRID_POINTS = 256


class ChannelModelError(ValueError):
    """Raised for invalid channel/protocol parameters or window kinds."""


@dataclass(frozen=True)
class ChannelParams:
    """Fiber and detector parameters (Table-1 style quantities)."""

    distance_km: float
    alpha_f: float  # fiber loss, dB/km
    eta_d: float    # detector efficiency
    p_d: float      # dark-count probability per pulse per detector
    e_d: float      # misalignment-error probability

    def __post_init__(self) -> None:
        if self.distance_km < 0.0:
            raise ChannelModelError(f"distance_km must be >= 0, got {self.distance_km!r}")
        if self.alpha_f < 0.0:
            raise ChannelModelError(f"alpha_f must be >= 0, got {self.alpha_f!r}")
        for name in ("eta_d", "p_d", "e_d"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ChannelModelError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ProtocolParams:
    """Source-choice probabilities, nominal intensities and block size."""

    p0: float
    px: float
    mu_xA: float
    mu_xB: float
    N: float
    mode: str = "improved"

    def __post_init__(self) -> None:
        if abs(self.p0 + self.px - 1.0) > 1e-12:
            raise ChannelModelError(f"p0 + px must equal 1, got {self.p0 + self.px!r}")
        if not (0.0 < self.px < 1.0):
            raise ChannelModelError(f"px must lie in (0, 1), got {self.px!r}")
        if self.mu_xA < 0.0 or self.mu_xB < 0.0:
            raise ChannelModelError("intensities must be nonnegative")
        if self.N < 1:
            raise ChannelModelError(f"N must be >= 1, got {self.N!r}")
        if self.mode not in MODES:
            raise ChannelModelError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class WindowTally:
    """Effective-window counts (or expected values) per window kind."""

    n_O: float
    n_B: float
    n_Z: float

    def __post_init__(self) -> None:
        for name in ("n_O", "n_B", "n_Z"):
            if getattr(self, name) < 0.0:
                raise ChannelModelError(f"{name} must be nonnegative")

    @property
    def M_s(self) -> float:
        """Raw-key length: total number of effective windows."""
        return self.n_O + self.n_B + self.n_Z

    @property
    def E_Z(self) -> float:
        """Bit-flip error rate of the raw keys.

        Effective O and B windows always produce opposite bits after Bob's
        flip, effective Z windows always agree, so the raw-key error rate is
        exactly (n_O + n_B) / M_s.  Returns 0 for an empty tally.
        """
        total = self.M_s
        if total <= 0.0:
            return 0.0
        return (self.n_O + self.n_B) / total


def arm_transmittance(params: ChannelParams) -> float:
    """One-arm transmittance with Charlie at the midpoint of the link."""
    return params.eta_d * 10.0 ** (-params.alpha_f * (params.distance_km / 2.0) / 10.0)


def visibility(e_d: float) -> float:
    """Interference visibility implied by the misalignment probability."""
    return 1.0 - 2.0 * e_d


def detector_means(kind: str, mu_A: float, mu_B: float, eta: float, e_d: float,
                   cos_delta: float = 1.0) -> tuple[float, float]:
    """Mean photon numbers (nu_L, nu_R) at the two detectors for one window.

    ``cos_delta`` is the cosine of the phase difference between the two
    incoming pulses; 1.0 corresponds to Charlie's compensated (improved)
    setting, where B-window energy is steered to the left port.  It only
    affects B windows.
    """
    if mu_A < 0.0 or mu_B < 0.0 or eta < 0.0:
        raise ChannelModelError("intensities and transmittance must be nonnegative")
    if kind == "O":
        return 0.0, 0.0
    if kind == "Z_A":
        nu = eta * mu_B / 2.0
        return nu, nu
    if kind == "Z_B":
        nu = eta * mu_A / 2.0
        return nu, nu
    if kind == "B":
        avg = eta * (mu_A + mu_B) / 2.0
        cross = visibility(e_d) * eta * math.sqrt(mu_A * mu_B) * cos_delta
        return avg + cross, avg - cross
    raise ChannelModelError(f"unknown window kind {kind!r}")


def effective_prob(nu_L: float, nu_R: float, p_d: float, mode: str = "improved") -> float:
    """Heralding probability for given detector means.

    improved: right detector clicks and the left one does not.
    baseline: exactly one of the two detectors clicks.
    """
    if nu_L < 0.0 or nu_R < 0.0:
        raise ChannelModelError("detector means must be nonnegative")
    if not (0.0 <= p_d <= 1.0):
        raise ChannelModelError(f"p_d must lie in [0, 1], got {p_d!r}")
    no_click_r = (1.0 - p_d) * math.exp(-nu_R)
    no_click_l = (1.0 - p_d) * math.exp(-nu_L)
    right_only = (1.0 - no_click_r) * no_click_l
    if mode == "improved":
        return right_only
    if mode == "baseline":
        left_only = (1.0 - no_click_l) * no_click_r
        return right_only + left_only
    raise ChannelModelError(f"unknown mode {mode!r}")


def b_window_prob(mu_A: float, mu_B: float, eta: float, e_d: float, p_d: float,
                  mode: str = "improved") -> float:
    """Heralding probability of a both-coherent window.

    In baseline mode the phase difference is uniform in [0, 2pi); the
    exactly-one-click probability is averaged over a periodic midpoint grid
    (spectrally accurate for this smooth integrand).
    """
    if mode == "improved":
        nu_l, nu_r = detector_means("B", mu_A, mu_B, eta, e_d, cos_delta=1.0)
        return effective_prob(nu_l, nu_r, p_d, "improved")
    if mode != "baseline":
        raise ChannelModelError(f"unknown mode {mode!r}")
    delta = (np.arange(_PHASE_GRID_POINTS) + 0.5) * (2.0 * np.pi / _PHASE_GRID_POINTS)
    avg = eta * (mu_A + mu_B) / 2.0
    cross = visibility(e_d) * eta * math.sqrt(mu_A * mu_B) * np.cos(delta)
    nu_l = avg + cross
    nu_r = avg - cross
    no_l = (1.0 - p_d) * np.exp(-nu_l)
    no_r = (1.0 - p_d) * np.exp(-nu_r)
    one_click = (1.0 - no_r) * no_l + (1.0 - no_l) * no_r
    return float(np.mean(one_click))


def window_probs(protocol: ProtocolParams, channel: ChannelParams,
                 intensities: tuple[float, float] | None = None) -> dict[str, float]:
    """Heralding probability per window kind for the protocol's mode.

    O and Z windows are insensitive to Charlie's phase compensation, so both
    modes use the single-detector heralding probability there; only B
    windows depend on the mode.
    """
    mu_A, mu_B = intensities if intensities is not None else (protocol.mu_xA, protocol.mu_xB)
    eta = arm_transmittance(channel)
    probs: dict[str, float] = {}
    for kind in ("O", "Z_A", "Z_B"):
        nu_l, nu_r = detector_means(kind, mu_A, mu_B, eta, channel.e_d)
        probs[kind] = effective_prob(nu_l, nu_r, channel.p_d, "improved")
    probs["B"] = b_window_prob(mu_A, mu_B, eta, channel.e_d, channel.p_d, protocol.mode)
    return probs


def expected_tallies(protocol: ProtocolParams, channel: ChannelParams,
                     intensities: tuple[float, float] | None = None) -> WindowTally:
    """Expected effective-window counts over N windows.

    ``intensities`` optionally overrides the nominal source intensities;
    by default the channel model uses the nominal values (the security
    analysis separately uses worst-case bounds).
    """
    probs = window_probs(protocol, channel, intensities)
    p0, px, n = protocol.p0, protocol.px, protocol.N
    return WindowTally(
        n_O=n * p0 * p0 * probs["O"],
        n_B=n * px * px * probs["B"],
        n_Z=n * p0 * px * (probs["Z_A"] + probs["Z_B"]),
    )
