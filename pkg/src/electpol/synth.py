"""Seeded synthetic elections.

Every unit receives the same number of votes. Candidate shares are drawn
from clamped Gaussians: the two-candidate sampler floors the first share to
a 0.01 grid; the three-candidate sampler caps the second share at whatever
the first leaves; the N-candidate sampler applies that cap sequentially.

Draws come from ``numpy.random.default_rng(seed)`` (PCG64) as one standard
normal per Gaussian variable, unit by unit and candidate by candidate within
a unit, so a given seed yields the same stream whatever the parameters.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from electpol.errors import InvalidSpec
from electpol.metrics import dispersion_all, esteban_ray, polarization_report
from electpol.model import ElectionMatrix

MU_GRID = (0.5, 0.66, 0.75, 0.8333, 1.0)
SIGMA_GRID = (0.0025, 0.05, 0.10, 0.25)
SIGMA_MAX = 0.25
GRID_STEP = 100  # shares floored to multiples of 1/GRID_STEP
_GRID_EPS = 1e-9


@dataclass(frozen=True)
class SyntheticSpec:
    means: tuple[float, ...]
    sigmas: tuple[float, ...]
    n_units: int = 100
    votes_per_unit: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(x) for x in self.means))
        object.__setattr__(self, "sigmas", tuple(float(x) for x in self.sigmas))
        if len(self.means) == 0 or len(self.means) != len(self.sigmas):
            raise InvalidSpec(
                f"need matching non-empty means/sigmas, got {len(self.means)}/{len(self.sigmas)}"
            )
        for mu in self.means:
            if not 0.0 <= mu <= 1.0:
                raise InvalidSpec(f"mean {mu} outside [0, 1]")
        for sd in self.sigmas:
            if not 0.0 <= sd <= SIGMA_MAX:
                raise InvalidSpec(f"sigma {sd} outside [0, {SIGMA_MAX}]")
        if self.n_units <= 0:
            raise InvalidSpec(f"n_units must be > 0, got {self.n_units}")
        if self.votes_per_unit <= 0:
            raise InvalidSpec(f"votes_per_unit must be > 0, got {self.votes_per_unit}")


def candidate_labels(n: int) -> list[str]:
    if n <= len(string.ascii_uppercase):
        return list(string.ascii_uppercase[:n])
    return [f"c{i:0{len(str(n - 1))}d}" for i in range(n)]


def unit_labels(m: int) -> list[str]:
    width = len(str(m - 1))
    return [f"u{k:0{width}d}" for k in range(m)]


def _draw(spec: SyntheticSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((spec.n_units, len(spec.means)))
    return np.asarray(spec.means) + np.asarray(spec.sigmas) * z


def _to_matrix(shares: np.ndarray, spec: SyntheticSpec) -> ElectionMatrix:
    n = shares.shape[1]
    return ElectionMatrix(unit_labels(spec.n_units), candidate_labels(n),
                          spec.votes_per_unit * shares)


def floor_to_grid(r: np.ndarray) -> np.ndarray:
    """Floor shares in [0, 1] to the 0.01 grid.

    Done on integer cell indices: the literal ``r - r % 0.01`` in binary
    floating point drops exact grid values such as 0.75 or 1.0 one cell.
    """
    return np.floor(np.asarray(r) * GRID_STEP + _GRID_EPS) / GRID_STEP


def sample_two_candidate(spec: SyntheticSpec, grid: bool = True) -> ElectionMatrix:
    if len(spec.means) != 1:
        raise InvalidSpec(f"two-candidate sampler takes 1 mean, got {len(spec.means)}")
    r0 = np.clip(_draw(spec)[:, 0], 0.0, 1.0)
    if not grid:
        return _to_matrix(np.column_stack([r0, 1.0 - r0]), spec)
    # work in grid cells so counts stay exact when votes_per_unit is a multiple of 100
    cells = np.floor(r0 * GRID_STEP + _GRID_EPS)
    a = spec.votes_per_unit * cells / GRID_STEP
    votes = np.column_stack([a, spec.votes_per_unit - a])
    return ElectionMatrix(unit_labels(spec.n_units), candidate_labels(2), votes)


def sample_three_candidate(spec: SyntheticSpec) -> ElectionMatrix:
    if len(spec.means) != 2:
        raise InvalidSpec(f"three-candidate sampler takes 2 means, got {len(spec.means)}")
    r = np.clip(_draw(spec), 0.0, 1.0)
    r0, r1 = r[:, 0], r[:, 1]
    over = r0 + r1 > 1
    r1 = np.where(over, 1.0 - r0, r1)
    r2 = np.maximum(1.0 - (r0 + r1), 0.0)
    return _to_matrix(np.column_stack([r0, r1, r2]), spec)


def sample_n_candidate(n: int, spec: SyntheticSpec) -> ElectionMatrix:
    """Sequential generalisation: candidates 0..n-2 drawn and capped in order,
    the last one takes the remainder."""
    if n < 2:
        raise InvalidSpec(f"need n >= 2 candidates, got {n}")
    if len(spec.means) != n - 1:
        raise InvalidSpec(f"{n}-candidate sampler takes {n - 1} means, got {len(spec.means)}")
    r = np.clip(_draw(spec), 0.0, 1.0)
    cols = [r[:, 0]]
    cum = r[:, 0].copy()
    for j in range(1, n - 1):
        rj = np.where(cum + r[:, j] > 1, 1.0 - cum, r[:, j])
        cols.append(rj)
        cum = cum + rj
    cols.append(np.maximum(1.0 - cum, 0.0))
    return _to_matrix(np.column_stack(cols), spec)


def sample(spec: SyntheticSpec) -> ElectionMatrix:
    """Dispatch on the number of means: 1 -> two candidates, 2 -> three, else N."""
    k = len(spec.means)
    if k == 1:
        return sample_two_candidate(spec)
    if k == 2:
        return sample_three_candidate(spec)
    return sample_n_candidate(k + 1, spec)


def integerize(m: ElectionMatrix) -> ElectionMatrix:
    """Round real-valued votes to integers unit by unit (largest remainder).

    Each unit keeps its rounded total; leftover seats go to the largest
    fractional parts, ties to the lower candidate index.
    """
    v = m.votes
    out = np.floor(v + _GRID_EPS)
    for k in range(v.shape[0]):
        target = int(round(v[k].sum()))
        short = target - int(out[k].sum())
        if short > 0:
            frac = v[k] - out[k]
            order = sorted(range(v.shape[1]), key=lambda j: (-frac[j], j))
            for j in order[:short]:
                out[k, j] += 1
    return ElectionMatrix(m.units, m.candidates, out)


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    sigma: float
    ep: float
    ec: float
    dispersion: float
    er: dict
    n_seeds: int


def grid_sweep(
    mus: Sequence[float] = MU_GRID,
    sigmas: Sequence[float] = SIGMA_GRID,
    n_seeds: int = 50,
    n_units: int = 100,
    alphas: Sequence[float] = (0.25, 1.0),
    base_seed: int = 0,
) -> list[SweepPoint]:
    """Seed-averaged two-candidate metrics over a (mu, sigma) grid.

    Seed ``base_seed + s`` is reused across grid points (common random
    numbers), which keeps comparisons between neighbouring points tight.
    """
    points = []
    for mu, sd in product(mus, sigmas):
        eps, ecs, disp = [], [], []
        ers = {a: [] for a in alphas}
        for s in range(n_seeds):
            m = sample_two_candidate(SyntheticSpec((mu,), (sd,), n_units, 100, base_seed + s))
            rep = polarization_report(m)
            eps.append(rep.ep)
            ecs.append(rep.ec)
            disp.append(float(dispersion_all(m).sum()))
            for a in alphas:
                ers[a].append(esteban_ray(m, a).aggregate)
        points.append(SweepPoint(
            mu=mu, sigma=sd,
            ep=math.fsum(eps) / n_seeds,
            ec=math.fsum(ecs) / n_seeds,
            dispersion=math.fsum(disp) / n_seeds,
            er={a: math.fsum(v) / n_seeds for a, v in ers.items()},
            n_seeds=n_seeds,
        ))
    return points
