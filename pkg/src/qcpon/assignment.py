"""Wavelength assignment: conventional baseline, the seven-band search,
an exhaustive oracle, optional user pairing, and case counters.

The seven-band search restricts candidate plans to three quantum bands
Q1..Q3 and three classical bands C1..C3 laid out left to right as
Q1 C1 Q2 C2 Q3 C3, with the single unused block sitting after band j for
gap position j in 1..5.  All (X1, X2, V1, V2, gap) splits are enumerated
(X3, V3 follow from the totals) and the plan minimizing the summed Raman
weight is kept, ties broken by the lexicographically smallest tuple.

Band sums are read from a summed-area table of the weight matrix (diagonal
zeroed; a quantum and a classical band can never overlap, so the diagonal
is never inside a summed block).  The reported objective is always a direct
recomputation over the chosen plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._accel import USE_NUMBA
from ._kernels import seven_band_search
from .errors import CapacityError, SearchTooLargeError
from .grid import ChannelPlan, WavelengthGrid
from .raman import CrosstalkMatrix

DEFAULT_CASE_CAP = int(1e8)


@dataclass(frozen=True)
class BandSplit:
    """Band sizes (X quantum, V classical) and the unused-block position."""

    x1: int
    x2: int
    x3: int
    v1: int
    v2: int
    v3: int
    gap: int

    def __post_init__(self):
        if min(self.x1, self.x2, self.x3, self.v1, self.v2, self.v3) < 0:
            raise ValueError("band sizes must be >= 0")
        if not 1 <= self.gap <= 5:
            raise ValueError(f"gap position must be in 1..5, got {self.gap}")

    @property
    def n_quantum(self) -> int:
        return self.x1 + self.x2 + self.x3

    @property
    def n_classical(self) -> int:
        return self.v1 + self.v2 + self.v3


@dataclass(frozen=True)
class AssignmentResult:
    plan: ChannelPlan
    objective: float
    split: BandSplit | None
    cases_examined: int


def conventional_assignment(grid: WavelengthGrid, users: int) -> ChannelPlan:
    """Lowest wavelengths to quantum channels, highest to classical ones."""
    d = grid.count
    if 2 * users > d:
        raise CapacityError(f"{users} users need {2 * users} channels, grid has {d}")
    return ChannelPlan(grid, tuple(range(users)), tuple(range(d - users, d)))


def band_layout(split: BandSplit, d: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Channel indices (q, c) of a band split on a grid of d channels.

    Zero-size bands collapse; the unused block has whatever size the grid
    leaves over.
    """
    total = split.n_quantum + split.n_classical
    if total > d:
        raise CapacityError(f"bands hold {total} channels, grid has {d}")
    gap_len = d - total
    sizes = (split.x1, split.v1, split.x2, split.v2, split.x3, split.v3)
    q: list[int] = []
    c: list[int] = []
    pos = 0
    for band, size in enumerate(sizes, start=1):
        target = q if band % 2 == 1 else c
        target.extend(range(pos, pos + size))
        pos += size
        if band == split.gap:
            pos += gap_len
    return tuple(q), tuple(c)


def raman_objective(matrix: CrosstalkMatrix, plan: ChannelPlan) -> float:
    """Summed Raman weight of a plan: sum of U[c, q] over the selection."""
    if plan.grid.count != matrix.grid.count:
        raise ValueError("plan and matrix grids differ")
    if not plan.q or not plan.c:
        return 0.0
    return float(matrix.u[np.ix_(list(plan.c), list(plan.q))].sum())


def _summed_area_table(u: np.ndarray) -> np.ndarray:
    """Prefix sums of U with the +inf diagonal zeroed, flattened row-major."""
    d = u.shape[0]
    u0 = u.copy()
    np.fill_diagonal(u0, 0.0)
    sat = np.zeros((d + 1, d + 1))
    sat[1:, 1:] = u0.cumsum(axis=0).cumsum(axis=1)
    return sat.ravel()


def _seven_band_search_numpy(sat: np.ndarray, d: int, n_qkd: int, n_data: int):
    """Vectorized enumeration, float-identical to the compiled loop.

    Candidates are laid out in lexicographic (X1, X2, V1, V2, gap) order so
    the first argmin is the same tie-break winner.
    """
    gap_len = d - n_qkd - n_data
    x1g, x2g = np.meshgrid(np.arange(n_qkd + 1), np.arange(n_qkd + 1), indexing="ij")
    xm = (x1g + x2g) <= n_qkd
    x1, x2 = x1g[xm], x2g[xm]
    v1g, v2g = np.meshgrid(np.arange(n_data + 1), np.arange(n_data + 1), indexing="ij")
    vm = (v1g + v2g) <= n_data
    v1, v2 = v1g[vm], v2g[vm]

    nx, nv = x1.size, v1.size
    x1 = np.repeat(x1, nv)
    x2 = np.repeat(x2, nv)
    v1 = np.tile(v1, nx)
    v2 = np.tile(v2, nx)
    x3 = n_qkd - x1 - x2
    v3 = n_data - v1 - v2

    d1 = d + 1
    objs = np.empty((x1.size, 5))
    for g in range(1, 6):
        sq1 = np.zeros_like(x1)
        eq1 = sq1 + x1
        p = eq1 + (gap_len if g == 1 else 0)
        sc1, ec1 = p, p + v1
        p = ec1 + (gap_len if g == 2 else 0)
        sq2, eq2 = p, p + x2
        p = eq2 + (gap_len if g == 3 else 0)
        sc2, ec2 = p, p + v2
        p = ec2 + (gap_len if g == 4 else 0)
        sq3, eq3 = p, p + x3
        p = eq3 + (gap_len if g == 5 else 0)
        sc3, ec3 = p, p + v3

        def rect(r0, r1, c0, c1):
            return (sat[r1 * d1 + c1] - sat[r0 * d1 + c1]
                    - sat[r1 * d1 + c0] + sat[r0 * d1 + c0])

        obj = rect(sc1, ec1, sq1, eq1)
        obj = obj + rect(sc1, ec1, sq2, eq2)
        obj = obj + rect(sc1, ec1, sq3, eq3)
        obj = obj + rect(sc2, ec2, sq1, eq1)
        obj = obj + rect(sc2, ec2, sq2, eq2)
        obj = obj + rect(sc2, ec2, sq3, eq3)
        obj = obj + rect(sc3, ec3, sq1, eq1)
        obj = obj + rect(sc3, ec3, sq2, eq2)
        obj = obj + rect(sc3, ec3, sq3, eq3)
        objs[:, g - 1] = obj

    flat = objs.ravel()
    best = int(np.argmin(flat))
    comb, g = divmod(best, 5)
    return (int(x1[comb]), int(x2[comb]), int(v1[comb]), int(v2[comb]), g + 1,
            float(flat[best]), flat.size)


def seven_band_assignment(matrix: CrosstalkMatrix, n_qkd: int, n_data: int) -> AssignmentResult:
    """Near-optimal plan over the seven-band family (global enumeration)."""
    d = matrix.grid.count
    if n_qkd < 0 or n_data < 0:
        raise ValueError("channel counts must be >= 0")
    if n_qkd + n_data > d:
        raise CapacityError(f"{n_qkd}+{n_data} channels exceed grid capacity {d}")
    sat = _summed_area_table(matrix.u)
    if USE_NUMBA:
        x1, x2, v1, v2, gap, _, cases = seven_band_search(sat, d, n_qkd, n_data)
    else:
        x1, x2, v1, v2, gap, _, cases = _seven_band_search_numpy(sat, d, n_qkd, n_data)
    split = BandSplit(x1, x2, n_qkd - x1 - x2, v1, v2, n_data - v1 - v2, gap)
    q, c = band_layout(split, d)
    plan = ChannelPlan(matrix.grid, q, c)
    return AssignmentResult(plan, raman_objective(matrix, plan), split, int(cases))


def exhaustive_assignment(matrix: CrosstalkMatrix, n_qkd: int, n_data: int,
                          case_cap: int = DEFAULT_CASE_CAP) -> AssignmentResult:
    """Global optimum over every disjoint (q, c) index pair.

    Intended as the small-instance oracle: refuses outright (never truncates)
    when the (q, c) pair count exceeds ``case_cap``.  For each quantum set
    the per-row sums make the best classical set the n_data smallest rows
    outside it, which prunes the inner enumeration without approximation.
    """
    from itertools import combinations

    d = matrix.grid.count
    if n_qkd < 0 or n_data < 0:
        raise ValueError("channel counts must be >= 0")
    if n_qkd + n_data > d:
        raise CapacityError(f"{n_qkd}+{n_data} channels exceed grid capacity {d}")
    cases = math.comb(d, n_qkd) * math.comb(d - n_qkd, n_data)
    if cases > case_cap:
        raise SearchTooLargeError(
            f"exhaustive search over {cases:.3e} channel-set pairs exceeds the cap {case_cap:.3e}"
        )

    u = matrix.u
    best_obj = math.inf
    best_q: tuple[int, ...] = ()
    best_c: tuple[int, ...] = ()
    all_rows = np.arange(d)
    for q in combinations(range(d), n_qkd):
        if n_qkd == 0:
            row_sums = np.zeros(d)
        else:
            row_sums = u[:, list(q)].sum(axis=1)
        mask = np.ones(d, dtype=bool)
        mask[list(q)] = False
        rows = all_rows[mask]
        if n_data > 0:
            order = np.argsort(row_sums[rows], kind="stable")[:n_data]
            c = tuple(sorted(int(rows[i]) for i in order))
            obj = float(row_sums[rows][order].sum())
        else:
            c = ()
            obj = 0.0
        if obj < best_obj:
            best_obj = obj
            best_q = tuple(q)
            best_c = c
    plan = ChannelPlan(matrix.grid, best_q, best_c)
    return AssignmentResult(plan, raman_objective(matrix, plan), None, cases)


def hungarian_match(cost: np.ndarray) -> tuple[int, ...]:
    """Minimum-cost perfect matching: permutation p with row i paired to p[i]."""
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost table must be square, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise ValueError("cost table must be finite and non-negative")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return tuple(int(j) for j in perm)


def pair_users(matrix: CrosstalkMatrix, plan: ChannelPlan) -> ChannelPlan:
    """Reorder the classical vector by the optimal quantum/classical pairing.

    cost[i][j] is the Raman weight classical channel c[j] puts on quantum
    channel q[i]; the plan's channel sets are unchanged, only the per-user
    correspondence moves.
    """
    if len(plan.q) != len(plan.c):
        raise ValueError("pairing needs equally many quantum and classical channels")
    if not plan.q:
        return plan
    cost = matrix.u[np.ix_(list(plan.c), list(plan.q))].T
    perm = hungarian_match(cost)
    return ChannelPlan(plan.grid, plan.q, tuple(plan.c[j] for j in perm))


def count_cases(mode: str, d: int, users: int) -> int:
    """Search-space sizes: seven-band layouts, exhaustive channel-set count
    as conventionally reported (binomial(D, P)), and the honest disjoint
    pair count."""
    if users < 0 or d < users:
        raise ValueError(f"need 0 <= users <= d, got users={users} d={d}")
    if mode == "seven_band":
        return 5 * (users + 1) ** 2 * (users + 2) ** 2 // 4
    if mode == "exhaustive":
        return math.comb(d, users)
    if mode == "exhaustive_pairs":
        return math.comb(d, users) * math.comb(d - users, users)
    raise ValueError(f"unknown mode {mode!r}")
