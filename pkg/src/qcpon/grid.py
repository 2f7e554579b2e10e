"""DWDM wavelength grid and channel-plan bookkeeping.

Channel indices are 0-based everywhere inside the package; anything shown
to a user is converted to physical nm values.  Wavelengths are always
computed as ``start + k*delta`` (never accumulated) so a 44-channel grid
carries no floating drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError

# Tolerance (nm) when counting how many grid points fit inside a span.
SNAP_NM = 1e-6


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform comb lambda_k = lambda_start + k*delta, k = 0..count-1 (nm)."""

    lambda_start_nm: float
    delta_nm: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise GridMismatchError(f"grid needs at least 1 channel, got {self.count}")
        if self.delta_nm <= 0.0:
            raise GridMismatchError(f"channel spacing must be positive, got {self.delta_nm}")

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return self.lambda_start_nm + np.arange(self.count) * self.delta_nm

    def wavelength_nm(self, k: int) -> float:
        if not 0 <= k < self.count:
            raise IndexError(f"channel index {k} outside grid of {self.count} channels")
        return self.lambda_start_nm + k * self.delta_nm


def build_grid(lambda_start_nm: float, lambda_end_nm: float, delta_nm: float) -> WavelengthGrid:
    """Largest uniform grid with spacing ``delta_nm`` inside [start, end].

    The end wavelength is an upper bound, not necessarily a grid point:
    1530-1564.4 nm holds 44 channels at 0.8 nm spacing (exact fit) but 22
    at 1.6 nm spacing (last channel 1563.6 nm).  Spans are snapped to the
    grid within ``SNAP_NM`` so float fuzz cannot drop the last channel.
    """
    if delta_nm <= 0.0:
        raise GridMismatchError(f"channel spacing must be positive, got {delta_nm}")
    if lambda_end_nm < lambda_start_nm - SNAP_NM:
        raise GridMismatchError(
            f"grid end {lambda_end_nm} nm below start {lambda_start_nm} nm"
        )
    span = max(0.0, lambda_end_nm - lambda_start_nm)
    count = int(math.floor((span + SNAP_NM) / delta_nm)) + 1
    return WavelengthGrid(lambda_start_nm, delta_nm, count)


@dataclass(frozen=True)
class ChannelPlan:
    """Quantum/classical partition of a grid: index vectors q and c.

    User i talks on quantum wavelength q[i] and classical wavelength c[i];
    the two sets are disjoint and fit inside the grid.  Instances are
    immutable and safe to share across parallel evaluations.
    """

    grid: WavelengthGrid
    q: tuple[int, ...]
    c: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(i) for i in self.q))
        object.__setattr__(self, "c", tuple(int(i) for i in self.c))
        d = self.grid.count
        for name, idx in (("q", self.q), ("c", self.c)):
            for k in idx:
                if not 0 <= k < d:
                    raise ValueError(f"{name} index {k} outside grid of {d} channels")
            if len(set(idx)) != len(idx):
                raise ValueError(f"duplicate indices in {name}: {idx}")
        if set(self.q) & set(self.c):
            raise ValueError(
                f"quantum and classical channels overlap: {sorted(set(self.q) & set(self.c))}"
            )
        if len(self.q) + len(self.c) > d:
            raise ValueError(
                f"{len(self.q)}+{len(self.c)} channels exceed grid capacity {d}"
            )

    @property
    def n_quantum(self) -> int:
        return len(self.q)

    @property
    def n_classical(self) -> int:
        return len(self.c)

    def quantum_wavelengths_nm(self) -> np.ndarray:
        return self.grid.wavelengths_nm[list(self.q)]

    def classical_wavelengths_nm(self) -> np.ndarray:
        return self.grid.wavelengths_nm[list(self.c)]


def plan_wavelengths(plan: ChannelPlan, i: int) -> tuple[float, float]:
    """(quantum, classical) wavelength pair of user i, in nm."""
    if not 0 <= i < len(plan.q) or i >= len(plan.c):
        raise IndexError(
            f"user {i} outside plan with {len(plan.q)} quantum / {len(plan.c)} classical channels"
        )
    return plan.grid.wavelength_nm(plan.q[i]), plan.grid.wavelength_nm(plan.c[i])
