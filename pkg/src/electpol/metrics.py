"""Antagonism decomposition (EP, EC) and classical comparison measures.

Notation: ``votes[k, i]`` and ``shares[k, i]`` are candidate ``i``'s count
and fraction in unit ``k``; ``overall_share[i]`` is ``i``'s national share.

Within-antagonism of candidate ``i`` is the vote-weighted mean absolute
deviation of its unit shares from its national share, divided by ``N - 1``.
Between-antagonism is the vote-weighted mean closeness
``1 - |share_i - share_j|`` to every *other* candidate ``j``, divided by
``N (N - 1)``. EP and EC sum these over candidates.

Candidates with no votes anywhere get zero for every antagonism (the 0/0
case) and are listed in ``zero_vote_candidates``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from electpol.errors import SingleUnit
from electpol.model import ElectionMatrix

DEFAULT_ALPHAS = (0.25, 1.0)


@dataclass(frozen=True)
class CandidateAntagonism:
    candidate: str
    within_a: float
    between_a: float

    @property
    def total_a(self) -> float:
        return self.within_a + self.between_a


@dataclass(frozen=True)
class AntagonismReport:
    per_candidate: tuple[CandidateAntagonism, ...]
    ep: float
    ec: float
    n_candidates: int
    n_units: int
    zero_vote_candidates: tuple[str, ...] = ()
    zero_vote_units: int = 0

    def candidate(self, label: str) -> CandidateAntagonism:
        for c in self.per_candidate:
            if c.candidate == label:
                return c
        raise KeyError(label)


@dataclass(frozen=True)
class EstebanRayParams:
    """``alpha`` is the identification sensitivity. The normalising constant
    is not a parameter: it is fixed per candidate to ``1 / total_i**(2+alpha)``
    which makes the measure invariant to the scale of the vote counts."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class EstebanRayResult:
    alpha: float
    per_candidate: tuple[float, ...]
    zero_vote_candidates: tuple[str, ...] = ()

    @property
    def aggregate(self) -> float:
        return float(sum(self.per_candidate))


@dataclass(frozen=True)
class ComparisonReport:
    candidates: tuple[str, ...]
    esteban_ray: tuple[EstebanRayResult, ...]
    dispersion: tuple[float, ...] | None
    margin_of_victory: float
    reynal_querol: float
    enp: float

    @property
    def dispersion_aggregate(self) -> float | None:
        return None if self.dispersion is None else float(sum(self.dispersion))

    def er(self, alpha: float) -> EstebanRayResult:
        for r in self.esteban_ray:
            if r.alpha == alpha:
                return r
        raise KeyError(alpha)


def _zero_vote(m: ElectionMatrix) -> np.ndarray:
    return m.candidate_totals == 0


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def within_antagonism_all(m: ElectionMatrix) -> np.ndarray:
    n = m.n_candidates
    dev = np.abs(m.shares - m.overall_share[None, :])
    num = (m.votes * dev).sum(axis=0)
    return _safe_ratio(num, (n - 1) * m.candidate_totals)


def between_antagonism_all(m: ElectionMatrix) -> np.ndarray:
    n = m.n_candidates
    s = m.shares
    closeness = 1.0 - np.abs(s[:, :, None] - s[:, None, :])   # [k, i, j]
    idx = np.arange(n)
    closeness[:, idx, idx] = 0.0
    num = (m.votes * closeness.sum(axis=2)).sum(axis=0)
    return _safe_ratio(num, n * (n - 1) * m.candidate_totals)


def within_antagonism(m: ElectionMatrix, i: int) -> float:
    return float(within_antagonism_all(m)[i])


def between_antagonism(m: ElectionMatrix, i: int) -> float:
    return float(between_antagonism_all(m)[i])


def polarization_report(m: ElectionMatrix) -> AntagonismReport:
    """Per-candidate antagonisms plus EP (sum of within) and EC (sum of between)."""
    w = within_antagonism_all(m)
    b = between_antagonism_all(m)
    zero = _zero_vote(m)
    per = tuple(
        CandidateAntagonism(c, float(w[i]), float(b[i])) for i, c in enumerate(m.candidates)
    )
    return AntagonismReport(
        per_candidate=per,
        ep=float(w.sum()),
        ec=float(b.sum()),
        n_candidates=m.n_candidates,
        n_units=m.n_units,
        zero_vote_candidates=tuple(c for c, z in zip(m.candidates, zero) if z),
        zero_vote_units=int(m.zero_units.sum()),
    )


def esteban_ray(m: ElectionMatrix, params: EstebanRayParams | float = EstebanRayParams()) -> EstebanRayResult:
    """Per-candidate Esteban-Ray polarization over units.

    ``ER_i = K_i * sum_k sum_j v_ik**(1+a) * v_jk * |r_ik - r_jk|`` with
    ``K_i = 1 / (sum_k v_ik)**(2+a)``. The ``j == i`` term vanishes.
    """
    if not isinstance(params, EstebanRayParams):
        params = EstebanRayParams(float(params))
    a = params.alpha
    v, s = m.votes, m.shares
    dist = np.abs(s[:, :, None] - s[:, None, :])                 # [k, i, j]
    inner = (dist * v[:, None, :]).sum(axis=2)                    # sum_j v_jk |r_ik - r_jk|
    num = (v ** (1 + a) * inner).sum(axis=0)
    totals = m.candidate_totals
    with np.errstate(divide="ignore", invalid="ignore"):
        er = np.where(totals > 0, num / np.where(totals > 0, totals, 1.0) ** (2 + a), 0.0)
    zero = _zero_vote(m)
    return EstebanRayResult(
        alpha=a,
        per_candidate=tuple(float(x) for x in er),
        zero_vote_candidates=tuple(c for c, z in zip(m.candidates, zero) if z),
    )


def dispersion_all(m: ElectionMatrix) -> np.ndarray:
    """Sample standard deviation of unit shares around the national share.

    Units without votes are skipped, so they do not count towards M.
    """
    keep = ~m.zero_units
    k = int(keep.sum())
    if k < 2:
        raise SingleUnit(f"dispersion needs >= 2 units with votes, got {k}")
    s = m.shares[keep]
    return np.sqrt(((s - m.overall_share[None, :]) ** 2).sum(axis=0) / (k - 1))


def dispersion(m: ElectionMatrix, i: int) -> float:
    return float(dispersion_all(m)[i])


def margin_of_victory(m: ElectionMatrix) -> float:
    s = np.sort(m.overall_share)[::-1]
    return float(s[0] - s[1])


def reynal_querol(m: ElectionMatrix) -> float:
    """Reynal-Querol discrete polarization ``1 - sum ((1/2 - p)/(1/2))**2 p``."""
    p = m.overall_share
    return float(1.0 - (((0.5 - p) / 0.5) ** 2 * p).sum())


def effective_number_of_candidates(m: ElectionMatrix) -> float:
    """Laakso-Taagepera inverse Herfindahl of national shares."""
    return float(1.0 / (m.overall_share ** 2).sum())


def comparison_report(m: ElectionMatrix, alphas: Iterable[float] = DEFAULT_ALPHAS) -> ComparisonReport:
    """All classical measures. Dispersion is ``None`` for single-unit elections."""
    try:
        disp = tuple(float(x) for x in dispersion_all(m))
    except SingleUnit:
        disp = None
    return ComparisonReport(
        candidates=m.candidates,
        esteban_ray=tuple(esteban_ray(m, EstebanRayParams(float(a))) for a in alphas),
        dispersion=disp,
        margin_of_victory=margin_of_victory(m),
        reynal_querol=reynal_querol(m),
        enp=effective_number_of_candidates(m),
    )


def warn_if_incomparable(reports: Sequence[AntagonismReport]) -> bool:
    """Warn when EP/EC of elections with different candidate counts are mixed.

    Returns True when all reports share one N. Never raises.
    """
    counts = sorted({r.n_candidates for r in reports})
    if len(counts) > 1:
        warnings.warn(
            f"EP/EC compared across elections with different candidate counts {counts}; "
            "values are only comparable at equal N",
            stacklevel=2,
        )
        return False
    return True
