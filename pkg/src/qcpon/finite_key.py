"""Finite-key bounding chain for vacuum+weak decoy-state BB84.

Given the six observables per basis (signal/weak/vacuum detections and
error detections), the chain runs: Chernoff confidence bounds on each
observable mean -> decoy-state single-photon yield and bit-error bounds ->
a symmetric Chernoff lower bound on the signal-state single-photon count ->
a random-sampling phase-error estimate across bases -> the key-length
formula.  Every bounding step spends the same failure probability eps; the
number of such invocations is reported so the implied union-bound total
stays visible.

All bound inversions go through the two real branches of the Lambert W
function; see :mod:`qcpon._kernels` for the numerically stable forms.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels as k
from .errors import ParameterOrderError
from .link import ObservableSet

# the yield-bound prefactor mu/(mu*nu - nu^2) blows up as nu -> mu
MIN_INTENSITY_GAP = 1e-6

_SIG, _WEAK, _VAC = 0, 1, 2


def binary_entropy(p: float) -> float:
    """Shannon binary entropy in bits; h(0) = h(1) = 0 by continuity."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"entropy argument {p} outside [0, 1]")
    return float(k.entropy_bits(p))


def lambert_w0(x: float) -> float:
    """Principal branch W0(x) for x >= -1/e (Halley iteration)."""
    if x < -k.INV_E * (1.0 + 1e-12) - 1e-300:
        raise ValueError(f"lambert_w0 domain is x >= -1/e, got {x}")
    return float(k.lambert_w0_raw(x))


def lambert_wm1(x: float) -> float:
    """Lower branch W-1(x) for -1/e <= x < 0 (Halley iteration)."""
    if x >= 0.0 or x < -k.INV_E * (1.0 + 1e-12) - 1e-300:
        raise ValueError(f"lambert_wm1 domain is -1/e <= x < 0, got {x}")
    return float(k.lambert_wm1_raw(x))


@dataclass(frozen=True)
class MeanBounds:
    """Two-sided Chernoff confidence interval on the mean of a count."""

    chi: float
    lower: float
    upper: float
    eps: float

    @property
    def delta_lower(self) -> float:
        """delta^L with E^L = chi / (1 + delta^L); needs chi > 0."""
        if self.chi <= 0.0:
            raise ValueError("delta_lower undefined for chi = 0")
        return self.chi / self.lower - 1.0

    @property
    def delta_upper(self) -> float:
        """delta^U with E^U = chi / (1 - delta^U); needs chi > 0."""
        if self.chi <= 0.0:
            raise ValueError("delta_upper undefined for chi = 0")
        return 1.0 - self.chi / self.upper


def chernoff_mean_bounds(chi: float, eps: float) -> MeanBounds:
    """Bounds E^L, E^U with Pr[E outside] <= eps for an observed count chi.

    chi > 0 inverts the two Chernoff tail equations through W0 / W-1;
    chi = 0 degenerates to (0, -ln(eps/2)).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if chi < 0.0:
        raise ValueError(f"observed count must be >= 0, got {chi}")
    return MeanBounds(chi, float(k.chernoff_lower(chi, eps)),
                      float(k.chernoff_upper(chi, eps)), eps)


def chernoff_observed_lower(mean: float, eps: float) -> float:
    """Largest m <= mean such that Pr[X < m] <= eps given E[X] = mean."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if mean < 0.0:
        raise ValueError(f"mean must be >= 0, got {mean}")
    return float(k.observed_lower(mean, eps))


def _check_intensities(params) -> None:
    if params.mu - params.nu < MIN_INTENSITY_GAP:
        raise ParameterOrderError(
            f"mu - nu = {params.mu - params.nu:.3g} below {MIN_INTENSITY_GAP}; "
            "the yield bound prefactor diverges"
        )
    if params.nu <= 0.0:
        raise ParameterOrderError("weak decoy intensity nu must be > 0")


def single_photon_yield_lower(obs: ObservableSet, params, basis: int, eps: float) -> float:
    """Lower bound on the single-photon yield Y1 in the given basis."""
    _check_intensities(params)
    n_s, n_w, n_v = (float(obs.pulses[a, basis]) for a in (_SIG, _WEAK, _VAC))
    el_mw = chernoff_mean_bounds(float(obs.detections[_WEAK, basis]), eps).lower
    eu_ms = chernoff_mean_bounds(float(obs.detections[_SIG, basis]), eps).upper
    eu_mv = chernoff_mean_bounds(float(obs.detections[_VAC, basis]), eps).upper
    return float(k.yield_lower_from_bounds(el_mw, eu_ms, eu_mv, n_s, n_w, n_v,
                                           params.mu, params.nu))


def single_photon_counts(obs: ObservableSet, params, y1_lower: float,
                         basis: int, eps: float) -> tuple[float, float]:
    """(M1 lower bound, signal-state M1 lower bound) in the given basis."""
    if y1_lower < 0.0:
        raise ValueError(f"y1_lower must be >= 0, got {y1_lower}")
    n_zeta = obs.n_basis(basis)
    m1 = float(k.m1_lower_from_yield(y1_lower, n_zeta, params.mu, params.nu,
                                     params.qs, params.qw))
    if params.qw == 0.0:
        p1s = 1.0
    else:
        p1s = float(k.p1_signal(params.mu, params.nu, params.qs, params.qw))
    m1s = chernoff_observed_lower(p1s * m1, eps)
    return m1, m1s


def single_photon_bit_error_upper(obs: ObservableSet, params, y1_lower: float,
                                  basis: int, eps: float) -> float:
    """Upper bound on the single-photon bit-error rate, clamped to [0, 1/2]."""
    _check_intensities(params)
    if y1_lower <= 0.0:
        raise ValueError("bit error undefined at Y1 = 0; the key must be zeroed")
    n_w = float(obs.pulses[_WEAK, basis])
    n_v = float(obs.pulses[_VAC, basis])
    eu_emw = chernoff_mean_bounds(float(obs.error_detections[_WEAK, basis]), eps).upper
    el_emv = chernoff_mean_bounds(float(obs.error_detections[_VAC, basis]), eps).lower
    return float(k.bit_error_upper_from_bounds(eu_emw, el_emv, y1_lower, n_w, n_v, params.nu))


def phase_error_upper(e1b_other: float, m1s_this: float, m1s_other: float,
                      eps: float) -> float:
    """Phase-error bound in one basis from the other basis's bit error.

    e1ps = e1b + gamma(eps, e1b, m_other, m_this) with the random-sampling
    deviation gamma; clamped to [0, 1/2].
    """
    if m1s_this <= 0.0 or m1s_other <= 0.0:
        raise ValueError("phase error needs positive single-photon counts in both bases")
    if not 0.0 <= e1b_other <= 0.5:
        raise ValueError(f"bit error {e1b_other} outside [0, 1/2]")
    g = float(k.sampling_gamma(eps, e1b_other, m1s_other, m1s_this))
    return min(0.5, e1b_other + g)


def key_length(m1s_lower: float, e1ps_upper: float, m_signal: float,
               qber_signal: float, f_ec: float) -> float:
    """Per-basis key length: privacy-amplified single-photon bits minus the
    error-correction cost, clamped at zero."""
    kz = m1s_lower * (1.0 - binary_entropy(min(0.5, e1ps_upper)))
    kz -= f_ec * m_signal * binary_entropy(qber_signal)
    return max(0.0, kz)


def total_key(k_z: float, k_x: float) -> float:
    return k_z + k_x


@dataclass(frozen=True)
class SinglePhotonBounds:
    """Decoy-state bounds of one basis."""

    y1_lower: float
    m1_lower: float
    m1s_lower: float
    bit_error_upper: float | None
    phase_error_upper: float | None


@dataclass(frozen=True)
class KeyResult:
    """Outcome of one finite-key evaluation."""

    key_total: float
    key_z: float
    key_x: float
    bounds_z: SinglePhotonBounds
    bounds_x: SinglePhotonBounds
    eps: float
    eps_invocations: int

    def rate_per_pulse(self, n_pulses: float) -> float:
        return self.key_total / n_pulses


def secret_key_length(obs: ObservableSet, params, eps: float, f_ec: float) -> KeyResult:
    """Run the whole bounding chain on a set of observables.

    Works on exact-mean and on Monte-Carlo-sampled observables alike.  A
    basis whose phase-error chain is undefined (zero single-photon count on
    either side, or undefined bit error) contributes zero key.
    """
    _check_intensities(params)
    per_basis = []
    uses = 0
    for basis in (0, 1):
        y1 = single_photon_yield_lower(obs, params, basis, eps)
        m1, m1s = single_photon_counts(obs, params, y1, basis, eps)
        uses += 6
        e1b = None
        if y1 > 0.0:
            e1b = single_photon_bit_error_upper(obs, params, y1, basis, eps)
        per_basis.append({"y1": y1, "m1": m1, "m1s": m1s, "e1b": e1b})

    keys = [0.0, 0.0]
    e1ps = [None, None]
    for basis, other in ((0, 1), (1, 0)):
        b = per_basis[basis]
        o = per_basis[other]
        if b["m1s"] > 0.0 and o["m1s"] > 0.0 and o["e1b"] is not None:
            e1ps[basis] = phase_error_upper(o["e1b"], b["m1s"], o["m1s"], eps)
            uses += 1
            m_sig = float(obs.detections[_SIG, basis])
            qber = float(obs.error_detections[_SIG, basis]) / m_sig if m_sig > 0 else 0.0
            keys[basis] = key_length(b["m1s"], e1ps[basis], m_sig, qber, f_ec)

    bounds = tuple(
        SinglePhotonBounds(per_basis[z]["y1"], per_basis[z]["m1"], per_basis[z]["m1s"],
                           per_basis[z]["e1b"], e1ps[z])
        for z in (0, 1)
    )
    return KeyResult(total_key(keys[0], keys[1]), keys[0], keys[1],
                     bounds[0], bounds[1], eps, uses)


def finite_key_rate_point(eta: float, y0: float, misalignment: float, f_ec: float,
                          eps: float, n_pulses: float, params) -> float:
    """Per-pulse rate from raw channel numbers (fused kernel path)."""
    _check_intensities(params)
    return float(
        k.finite_key_rate(eta, y0, misalignment, f_ec, eps, n_pulses,
                          params.mu, params.nu, params.qs, params.qw, params.pz)
    )
