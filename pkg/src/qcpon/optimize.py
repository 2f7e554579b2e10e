"""Protocol-parameter optimization and network-level rate aggregation.

The five free decoy-state parameters (mu, nu, q^s, q^w, P_Z) are tuned per
channel by coordinate descent: each coordinate in turn runs a deterministic
grid-refinement line search inside its feasible interval, rounds repeat
until the rate converges, and a fixed set of starting points guards against
bad local basins.  Everything is deterministic so repeated runs reproduce
identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import finite_key_chain, rate_on_grid
from .errors import InfeasibleError, UndefinedGainError
from .grid import ChannelPlan
from .link import ChannelBudget, Scenario, channel_budget

PROB_FLOOR = 1e-3          # lower bound on nu, q^s, q^w and the q^v remainder
INTENSITY_GAP = 1e-3       # enforced mu - nu separation during optimization
PZ_RANGE = (0.5, 0.99)
CONVERGENCE_REL = 1e-3
MAX_ROUNDS = 20
LINE_POINTS = 13           # points per line-search level
LINE_LEVELS = 3

# deterministic multi-starts: two operating points near the reported optima
# of high/medium-noise channels plus one low-noise corner
DEFAULT_SEEDS = (
    (0.407, 0.090, 0.835, 0.112, 0.68),
    (0.394, 0.096, 0.778, 0.139, 0.50),
    (0.480, 0.050, 0.900, 0.070, 0.90),
)


@dataclass(frozen=True)
class ProtocolParams:
    """Decoy-state free parameters: intensities, state and basis probabilities."""

    mu: float
    nu: float
    qs: float
    qw: float
    qv: float
    pz: float
    px: float

    def __post_init__(self):
        if not self.mu > self.nu >= 0.0:
            raise ValueError(f"need mu > nu >= 0, got mu={self.mu} nu={self.nu}")
        for name in ("qs", "qw", "qv"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if abs(self.qs + self.qw + self.qv - 1.0) > 1e-9:
            raise ValueError(f"state probabilities sum to {self.qs + self.qw + self.qv}, not 1")
        if not (0.0 < self.pz < 1.0 and 0.0 < self.px < 1.0):
            raise ValueError("basis probabilities must be in (0, 1)")
        if abs(self.pz + self.px - 1.0) > 1e-9:
            raise ValueError(f"basis probabilities sum to {self.pz + self.px}, not 1")

    @classmethod
    def make(cls, mu: float, nu: float, qs: float, qw: float, pz: float) -> "ProtocolParams":
        return cls(mu, nu, qs, qw, 1.0 - qs - qw, pz, 1.0 - pz)

    def as_vector(self) -> tuple[float, float, float, float, float]:
        return (self.mu, self.nu, self.qs, self.qw, self.pz)


@dataclass(frozen=True)
class OptimizeResult:
    params: ProtocolParams
    rate: float
    key_length: float
    feasible: bool
    evaluations: int
    eps_invocations: int
    eps_invocations_final: int


def _coordinate_interval(vec: list[float], coord: int) -> tuple[float, float]:
    mu, nu, qs, qw, _ = vec
    if coord == 0:
        return (nu + INTENSITY_GAP, 1.0)
    if coord == 1:
        return (PROB_FLOOR, mu - INTENSITY_GAP)
    if coord == 2:
        return (PROB_FLOOR, 1.0 - qw - PROB_FLOOR)
    if coord == 3:
        return (PROB_FLOOR, 1.0 - qs - PROB_FLOOR)
    return PZ_RANGE


def _clamp_seed(seed) -> list[float]:
    mu, nu, qs, qw, pz = seed
    nu = min(max(nu, PROB_FLOOR), 1.0 - INTENSITY_GAP)
    mu = min(max(mu, nu + INTENSITY_GAP), 1.0)
    qs = min(max(qs, PROB_FLOOR), 1.0 - 2 * PROB_FLOOR)
    qw = min(max(qw, PROB_FLOOR), 1.0 - qs - PROB_FLOOR)
    pz = min(max(pz, PZ_RANGE[0]), PZ_RANGE[1])
    return [mu, nu, qs, qw, pz]


def _line_search(eta, y0, ed, f_ec, eps, n_pulses, vec, coord):
    """Deterministic grid-refinement search along one coordinate.

    Returns (best value, best rate, evaluations, eps uses).  The interval
    endpoints are always probed, so P_Z = 0.5 exactly is reachable.
    """
    lo, hi = _coordinate_interval(vec, coord)
    if hi <= lo:
        v = lo
        out = np.empty(1)
        uses = rate_on_grid(eta, y0, ed, f_ec, eps, n_pulses, vec[0], vec[1], vec[2],
                            vec[3], vec[4], coord, np.array([v]), out)
        return v, float(out[0]), 1, int(uses)
    evals = 0
    uses = 0.0
    best_v = vec[coord]
    best_r = -1.0
    for _level in range(LINE_LEVELS):
        values = np.linspace(lo, hi, LINE_POINTS)
        out = np.empty(LINE_POINTS)
        uses += rate_on_grid(eta, y0, ed, f_ec, eps, n_pulses, vec[0], vec[1], vec[2],
                             vec[3], vec[4], coord, values, out)
        evals += LINE_POINTS
        i = int(np.argmax(out))
        if out[i] > best_r:
            best_r = float(out[i])
            best_v = float(values[i])
        span = values[1] - values[0]
        lo = max(lo, values[i] - span)
        hi = min(hi, values[i] + span)
    return best_v, best_r, evals, int(uses)


def optimize_params(budget: ChannelBudget, n_pulses: float, eps: float,
                    extra_seeds: tuple = (),
                    stop_at_first_positive: bool = False) -> OptimizeResult:
    """Coordinate descent over (mu, nu, q^s, q^w, P_Z) for one channel.

    Runs every start to convergence and keeps the best.  With
    ``stop_at_first_positive`` the search returns as soon as any probe
    yields a positive rate (feasibility checks only; the returned rate is
    then not the optimum but its sign is identical to the full run's).
    Infeasible channels come back with rate 0 and the last probed params.
    """
    eta, y0 = budget.eta, budget.y0
    ed, f_ec = budget.misalignment, budget.error_correction_inefficiency
    best_vec = None
    best_rate = -1.0
    evals = 0
    uses = 0

    for seed in tuple(DEFAULT_SEEDS) + tuple(extra_seeds):
        vec = _clamp_seed(seed)
        res = finite_key_chain(eta, y0, ed, f_ec, eps, n_pulses, *vec)
        rate = float(res[0])
        evals += 1
        uses += int(res[12])
        if stop_at_first_positive and rate > 0.0:
            return _finalize(budget, n_pulses, eps, vec, evals, uses)
        for _round in range(MAX_ROUNDS):
            prev = rate
            for coord in range(5):
                v, r, n, u = _line_search(eta, y0, ed, f_ec, eps, n_pulses, vec, coord)
                evals += n
                uses += u
                if r >= rate:
                    vec[coord] = v
                    rate = r
            if stop_at_first_positive and rate > 0.0:
                return _finalize(budget, n_pulses, eps, vec, evals, uses)
            if rate <= 0.0 or (rate - prev) <= CONVERGENCE_REL * rate:
                break
        if rate > best_rate:
            best_rate = rate
            best_vec = list(vec)

    return _finalize(budget, n_pulses, eps, best_vec, evals, uses)


def _finalize(budget, n_pulses, eps, vec, evals, uses) -> OptimizeResult:
    out = finite_key_chain(budget.eta, budget.y0, budget.misalignment,
                           budget.error_correction_inefficiency, eps, n_pulses, *vec)
    rate, key = float(out[0]), float(out[1])
    uses_final = int(out[12])
    return OptimizeResult(
        params=ProtocolParams.make(*vec),
        rate=rate,
        key_length=key,
        feasible=rate > 0.0,
        evaluations=evals + 1,
        eps_invocations=uses + uses_final,
        eps_invocations_final=uses_final,
    )


def optimize_params_asymptotic(budget: ChannelBudget) -> OptimizeResult:
    """Best asymptotic-limit rate over the same parameter box.

    The asymptotic objective factorizes: the decoy intensities drop out,
    the basis and state probabilities push to their corners, and only the
    signal intensity needs a line search.
    """
    from ._kernels import asymptotic_rate

    nu = PROB_FLOOR
    qw = PROB_FLOOR
    qs = 1.0 - qw - PROB_FLOOR
    pz = PZ_RANGE[1]
    eta, y0 = budget.eta, budget.y0
    ed, f_ec = budget.misalignment, budget.error_correction_inefficiency

    lo, hi = nu + INTENSITY_GAP, 1.0
    best_mu, best_r = lo, -1.0
    evals = 0
    for _level in range(LINE_LEVELS):
        values = np.linspace(lo, hi, LINE_POINTS)
        rates = [float(asymptotic_rate(eta, y0, ed, f_ec, m, qs, pz)) for m in values]
        evals += LINE_POINTS
        i = int(np.argmax(rates))
        if rates[i] > best_r:
            best_r = rates[i]
            best_mu = float(values[i])
        span = values[1] - values[0]
        lo = max(nu + INTENSITY_GAP, values[i] - span)
        hi = min(1.0, values[i] + span)

    return OptimizeResult(
        params=ProtocolParams.make(best_mu, nu, qs, qw, pz),
        rate=max(0.0, best_r),
        key_length=math.inf if best_r > 0.0 else 0.0,
        feasible=best_r > 0.0,
        evaluations=evals,
        eps_invocations=0,
        eps_invocations_final=0,
    )


@dataclass(frozen=True)
class NetworkRates:
    """Per-user optimized rates of a plan plus the two headline aggregates."""

    per_user: tuple[OptimizeResult, ...]
    r_avg: float
    r_min: float
    all_positive: bool

    @property
    def rates(self) -> tuple[float, ...]:
        return tuple(r.rate for r in self.per_user)

    @property
    def eps_invocations_final(self) -> int:
        return sum(r.eps_invocations_final for r in self.per_user)

    @property
    def eps_invocations(self) -> int:
        return sum(r.eps_invocations for r in self.per_user)


def network_rates(plan: ChannelPlan, scenario: Scenario, n_pulses: float,
                  extra_seeds: tuple = (),
                  per_user_extra_seeds: list | None = None) -> NetworkRates:
    """Optimize every user's channel independently and aggregate.

    ``per_user_extra_seeds[i]`` adds starting points for user i alone
    (sweeps seed each block size with the previous one's optimum, which
    makes the reported rates monotone in N by construction).
    """
    results = []
    for user in range(scenario.users):
        budget = channel_budget(scenario, plan, user)
        seeds = tuple(extra_seeds)
        if per_user_extra_seeds is not None and per_user_extra_seeds[user]:
            seeds = seeds + tuple(per_user_extra_seeds[user])
        results.append(optimize_params(budget, n_pulses,
                                       scenario.devices.failure_probability,
                                       extra_seeds=seeds))
    rates = [r.rate for r in results]
    r_min = min(rates)
    return NetworkRates(tuple(results), sum(rates) / len(rates), r_min, r_min > 0.0)


def _all_positive(plan: ChannelPlan, scenario: Scenario, n_pulses: float) -> bool:
    """Feasibility of a plan: every user can distill a positive key.

    Users are probed worst-first (largest summed Raman weight on their
    quantum channel) and each probe stops at the first positive rate, so an
    infeasible plan fails fast; the predicate matches network_rates'
    all_positive exactly.
    """
    weights = []
    for user in range(scenario.users):
        lam_q = plan.grid.wavelength_nm(plan.q[user])
        w = sum(float(scenario.spectrum.rho(lam_q - plan.grid.wavelength_nm(ci)))
                for ci in plan.c)
        weights.append((w, user))
    for _, user in sorted(weights, reverse=True):
        budget = channel_budget(scenario, plan, user)
        res = optimize_params(budget, n_pulses, scenario.devices.failure_probability,
                              stop_at_first_positive=True)
        if not res.feasible:
            return False
    return True


def rate_gain(r_opt: float, r_conv: float) -> float:
    """Relative rate gain of the optimized plan over the conventional one."""
    if r_conv <= 0.0:
        raise UndefinedGainError(f"reference rate must be > 0, got {r_conv}")
    return (r_opt - r_conv) / r_conv


def min_block_size(scenario: Scenario, plan: ChannelPlan, n_grid,
                   refine_rel: float = 0.05) -> float:
    """Smallest block size on the grid with all users feasible.

    Scans the (increasing) grid for the first feasible point, then bisects
    geometrically against the last infeasible one until the bracket is
    within ``refine_rel``.  Returns inf when no grid point is feasible.
    """
    n_grid = list(n_grid)
    if n_grid != sorted(n_grid):
        raise ValueError("block-size grid must be increasing")
    feasible_at = None
    infeasible_at = None
    for n in n_grid:
        if _all_positive(plan, scenario, float(n)):
            feasible_at = float(n)
            break
        infeasible_at = float(n)
    if feasible_at is None:
        return math.inf
    if infeasible_at is None:
        return feasible_at  # feasible at the bottom of the grid
    lo, hi = infeasible_at, feasible_at
    while hi / lo > 1.0 + refine_rel:
        mid = math.sqrt(lo * hi)
        if _all_positive(plan, scenario, mid):
            hi = mid
        else:
            lo = mid
    return hi


def cutoff_launch_power(scenario: Scenario, plan: ChannelPlan, n_pulses: float,
                        dbm_range: tuple[float, float] = (-45.0, -10.0),
                        resolution_db: float = 0.1) -> float:
    """Maximum classical launch power (dBm) keeping all users feasible.

    Bisects over dBm; noise grows monotonically with launch power, so
    feasibility is one-sided.  Raises when even the bottom of the probe
    range fails.
    """
    lo, hi = dbm_range
    scen_n = scenario.with_(block_size=n_pulses)
    if not _all_positive(plan, scen_n.with_(launch_power_dbm=lo), n_pulses):
        raise InfeasibleError(f"no positive key even at {lo} dBm launch power")
    if _all_positive(plan, scen_n.with_(launch_power_dbm=hi), n_pulses):
        return hi
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if _all_positive(plan, scen_n.with_(launch_power_dbm=mid), n_pulses):
            lo = mid
        else:
            hi = mid
    return lo
