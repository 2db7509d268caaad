"""Guided minimal-subset sampling with multiplicative probability updates.

Each data point carries an unnormalized sampling mass. Subsets are drawn
without replacement proportionally to the masses; after a hypothesis is
processed, masses of its significant points shrink and all other masses
grow, steering later draws toward unexplained structures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import SubsetTooLarge

MASS_MIN = 1e-6
MASS_MAX = 1e6

DEFAULT_UPDATE_FACTOR = 5.0  # within the 2-10x update range


@dataclass
class SamplingState:
    """Per-point sampling masses plus the RNG stream that consumes them.

    Single-owner mutable: draws and updates are sequential by contract.
    """

    probabilities: np.ndarray
    rng_seed: int
    update_factor: float = DEFAULT_UPDATE_FACTOR
    rng: np.random.Generator = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.rng_seed)


def init_state(n: int, seed: int, update_factor: float = DEFAULT_UPDATE_FACTOR) -> SamplingState:
    """All masses start at 1; the RNG stream is fully determined by ``seed``."""
    if n < 1:
        raise ValueError("need at least one data point")
    if update_factor <= 1.0:
        raise ValueError("update factor must exceed 1")
    return SamplingState(np.ones(n), int(seed), float(update_factor))


def draw_subset(state: SamplingState, size: int) -> np.ndarray:
    """Draw ``size`` distinct indices proportional to the current masses.

    Sequential draws with renormalization: each pick removes the chosen
    index and rescales the rest. Advances the state's RNG stream.
    """
    masses = state.probabilities
    n = masses.size
    if size > n:
        raise SubsetTooLarge(f"cannot draw {size} of {n} points")
    remaining = masses.astype(np.float64, copy=True)
    chosen = np.empty(size, dtype=np.intp)
    for k in range(size):
        cdf = np.cumsum(remaining)
        u = state.rng.random() * cdf[-1]
        idx = min(int(np.searchsorted(cdf, u, side="right")), n - 1)
        chosen[k] = idx
        remaining[idx] = 0.0
    return chosen


def update_probabilities(state: SamplingState, significant: np.ndarray) -> SamplingState:
    """Divide significant masses by the update factor, multiply the rest.

    Masses stay clamped to [1e-6, 1e6], so no point is ever frozen out.
    """
    significant = np.asarray(significant, dtype=bool)
    if significant.size != state.probabilities.size:
        raise ValueError("mask length must match the number of points")
    factor = state.update_factor
    masses = state.probabilities
    masses[significant] /= factor
    masses[~significant] *= factor
    np.clip(masses, MASS_MIN, MASS_MAX, out=masses)
    return state
