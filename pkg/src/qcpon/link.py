"""Scenario description and the per-channel link model.

``channel_budget`` condenses a scenario + channel plan into what a quantum
channel sees (transmittance, background yield, error model);
``asymptotic_observables`` turns that into the no-eavesdropper detection
statistics that seed the finite-key analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import units
from ._kernels import asymptotic_rate, error_gain, gain
from .grid import ChannelPlan, WavelengthGrid
from .raman import NoiseBreakdown, RamanSpectrum, channel_background

INTENSITY_LABELS = ("signal", "weak", "vacuum")
BASIS_LABELS = ("Z", "X")


@dataclass(frozen=True)
class DeviceParams:
    """Receiver/transmitter device table (nominal values as defaults)."""

    detector_efficiency: float = 0.3
    dark_count_rate_per_ns: float = 1e-6
    error_correction_inefficiency: float = 1.22
    misalignment_probability: float = 0.033
    gate_ns: float = 0.1
    fiber_attenuation_db_per_km: float = 0.2
    awg_insertion_loss_db: float = 2.0
    awg_passes: int = 1
    pulse_rate_ghz: float = 1.0
    nbf_bandwidth_ghz: float = 25.0
    failure_probability: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ValueError(f"detector_efficiency {self.detector_efficiency} outside (0, 1]")
        if not 0.0 < self.failure_probability < 1.0:
            raise ValueError(f"failure_probability {self.failure_probability} outside (0, 1)")
        for name in ("dark_count_rate_per_ns", "gate_ns", "fiber_attenuation_db_per_km",
                     "awg_insertion_loss_db", "pulse_rate_ghz", "nbf_bandwidth_ghz"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.awg_passes < 0:
            raise ValueError("awg_passes must be >= 0")
        if self.error_correction_inefficiency < 1.0:
            raise ValueError("error_correction_inefficiency must be >= 1")
        if not 0.0 <= self.misalignment_probability < 0.5:
            raise ValueError("misalignment_probability must be in [0, 0.5)")


@dataclass(frozen=True)
class Scenario:
    """One operating point of the access network.

    Loss-like fields keep their configured units (dB, dBm); conversion to
    linear quantities happens once, inside the budget/noise builders.  The
    ambient photon rate is the per-gate count referred to the detector and
    only applies to the wireless setup, as does the coupling loss.
    """

    grid: WavelengthGrid
    spectrum: RamanSpectrum
    users: int
    feeder_km: float = 5.0
    drop_km: float = 0.5
    setup: str = "fiber"
    coupling_loss_db: float = 16.0
    ambient_photons_per_gate: float = 0.0
    launch_power_dbm: float = -30.0
    block_size: float = 1e11
    devices: DeviceParams = field(default_factory=DeviceParams)

    def __post_init__(self):
        if self.setup not in ("fiber", "wireless"):
            raise ValueError(f"setup must be 'fiber' or 'wireless', got {self.setup!r}")
        if self.users < 1:
            raise ValueError(f"users must be >= 1, got {self.users}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        for name in ("feeder_km", "drop_km", "coupling_loss_db", "ambient_photons_per_gate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def is_wireless(self) -> bool:
        return self.setup == "wireless"

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelBudget:
    """Everything one quantum channel sees: end-to-end transmittance
    (detector efficiency included), background noise, the misalignment
    error and the error-correction inefficiency applied to its key."""

    eta: float
    noise: NoiseBreakdown
    misalignment: float = 0.033
    error_correction_inefficiency: float = 1.22

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta = {self.eta} outside [0, 1]")

    @property
    def y0(self) -> float:
        return self.noise.y0


def channel_budget(scenario: Scenario, plan: ChannelPlan, user: int) -> ChannelBudget:
    """Budget of user ``user``'s quantum channel.

    eta = detector efficiency x 10^-(fiber + AWG [+ coupling]) / 10, fiber
    covering feeder plus the user's drop span.
    """
    if not 0 <= user < len(plan.q):
        raise IndexError(f"user {user} outside plan with {len(plan.q)} quantum channels")
    dev = scenario.devices
    loss_db = dev.fiber_attenuation_db_per_km * (scenario.feeder_km + scenario.drop_km)
    loss_db += dev.awg_insertion_loss_db * dev.awg_passes
    if scenario.is_wireless:
        loss_db += scenario.coupling_loss_db
    eta = dev.detector_efficiency * units.db_to_linear(loss_db)
    noise = channel_background(plan, plan.q[user], scenario)
    return ChannelBudget(eta, noise, dev.misalignment_probability,
                         dev.error_correction_inefficiency)


@dataclass(frozen=True)
class ObservableSet:
    """Counts of one QKD block: pulses sent, detections, error detections.

    Arrays are (3, 2): rows signal/weak/vacuum, columns Z/X basis.  The
    chain 0 <= error_detections <= detections <= pulses holds entrywise and
    the per-basis pulse totals equal P_zeta^2 N.
    """

    pulses: np.ndarray
    detections: np.ndarray
    error_detections: np.ndarray
    intensities: tuple[float, float, float]
    basis_probs: tuple[float, float]

    def __post_init__(self):
        for name in ("pulses", "detections", "error_detections"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.shape != (3, 2):
                raise ValueError(f"{name} must have shape (3, 2), got {arr.shape}")
        if np.any(self.error_detections < -1e-9) or np.any(
            self.error_detections > self.detections + 1e-9
        ) or np.any(self.detections > self.pulses + 1e-9):
            raise ValueError("observable chain 0 <= EM <= M <= N violated")

    def n_basis(self, basis: int) -> float:
        """Total pulses sent in basis column ``basis`` (0 = Z, 1 = X)."""
        return float(self.pulses[:, basis].sum())


def asymptotic_observables(budget: ChannelBudget, params, n_pulses: float) -> ObservableSet:
    """Exact asymptotic-mean observables (no sampling noise).

    Gains Q_a = 1 - (1-y0) e^(-eta a); error weights e0 y0 + ed (1 - e^(-eta a))
    with e0 = 1/2 (background clicks are random).
    """
    eta, y0, ed = budget.eta, budget.y0, budget.misalignment
    intensities = (params.mu, params.nu, 0.0)
    basis_probs = (params.pz, params.px)
    fractions = (params.qs, params.qw, params.qv)
    pulses = np.zeros((3, 2))
    dets = np.zeros((3, 2))
    errs = np.zeros((3, 2))
    for zi, pzeta in enumerate(basis_probs):
        n_zeta = pzeta * pzeta * n_pulses
        for ai, a in enumerate(intensities):
            n_a = fractions[ai] * n_zeta
            pulses[ai, zi] = n_a
            dets[ai, zi] = n_a * gain(y0, eta, a)
            errs[ai, zi] = n_a * error_gain(y0, eta, ed, a)
    return ObservableSet(pulses, dets, errs, intensities, basis_probs)


def sample_observables(budget: ChannelBudget, params, n_pulses: float,
                       rng: np.random.Generator) -> ObservableSet:
    """Poisson/binomial-sampled observables for Monte-Carlo validation.

    Detections are Poisson around the asymptotic means (clamped to the
    pulse count); errors are binomial within the detections, so the
    observable chain holds by construction.
    """
    mean = asymptotic_observables(budget, params, n_pulses)
    dets = np.zeros((3, 2))
    errs = np.zeros((3, 2))
    for ai in range(3):
        for zi in range(2):
            m = float(mean.detections[ai, zi])
            n_a = float(mean.pulses[ai, zi])
            e_rate = mean.error_detections[ai, zi] / m if m > 0 else 0.0
            det = min(float(rng.poisson(m)), n_a)
            dets[ai, zi] = det
            errs[ai, zi] = float(rng.binomial(int(det), min(1.0, e_rate)))
    return ObservableSet(mean.pulses, dets, errs, mean.intensities, mean.basis_probs)


def asymptotic_key_rate(budget: ChannelBudget, params) -> float:
    """N -> infinity per-pulse rate envelope at the given parameters."""
    return float(
        asymptotic_rate(
            budget.eta,
            budget.y0,
            budget.misalignment,
            budget.error_correction_inefficiency,
            params.mu,
            params.qs,
            params.pz,
        )
    )
