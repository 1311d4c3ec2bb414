"""Robustness protocols and downstream analysis helpers.

Includes Pearson correlation and z-scores, swing-state labels, the
survey-based mass-polarization score, and the standardized region-year table
that feeds panel regressions (fitting those is left to other tools).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from electpol.errors import (
    AllWeightsZero,
    ConstantSeries,
    LengthMismatch,
    MissingParty,
    RegionMismatch,
    TooFewPoints,
    WrongWinnerCount,
)
from electpol.metrics import (
    effective_number_of_candidates,
    polarization_report,
    warn_if_incomparable,
)
from electpol.model import DEFAULT_SEPARATOR, VoteRecord, build_matrix
from electpol.pipeline import (
    AbstentionMode,
    CurationConfig,
    curate_records,
    national_ranking,
    split_regions,
)


# --- statistics ----------------------------------------------------------------

def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson product-moment correlation, clipped to [-1, 1]."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"series lengths differ: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise TooFewPoints(f"need >= 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ConstantSeries("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def standardize(xs: Sequence[float]) -> np.ndarray:
    """z-scores using the sample (n - 1) standard deviation."""
    x = np.asarray(xs, dtype=np.float64)
    if x.size < 2:
        raise TooFewPoints(f"need >= 2 points, got {x.size}")
    sd = x.std(ddof=1)
    if sd == 0:
        raise ConstantSeries("cannot standardize a constant series")
    return (x - x.mean()) / sd


# --- robustness ----------------------------------------------------------------

class Protocol(enum.Enum):
    AGGREGATION = "aggregation"
    ABSTENTIONS = "abstentions"
    ELECTION_TYPE = "election-type"
    ROUNDS = "rounds"
    TOP_N = "top-n"
    ENP_SUBSET = "enp-subset"


@dataclass(frozen=True)
class RegionMetrics:
    ep: float
    ec: float
    n_candidates: int = 0


@dataclass(frozen=True)
class RobustnessResult:
    protocol: Protocol
    pairs: tuple[tuple[str, RegionMetrics, RegionMetrics], ...]
    rho_ep: float
    rho_ec: float
    n: int


@dataclass(frozen=True)
class TopNRow:
    n: int
    coverage: float
    rho_ep: float
    rho_ec: float


def regional_metrics(
    records: Iterable[VoteRecord],
    region_level: int,
    unit_level: int | None = None,
    sep: str = DEFAULT_SEPARATOR,
) -> dict[str, RegionMetrics]:
    """EP and EC of each region, using units at ``unit_level`` inside it.

    Every region uses the election-wide candidate list, so N is the same
    across regions even where some candidate got no votes.
    """
    records = list(records)
    labels = sorted({r.candidate for r in records})
    out = {}
    for region, recs in split_regions(records, region_level, sep).items():
        m = build_matrix(recs, level=unit_level, candidates=labels, sep=sep)
        rep = polarization_report(m)
        out[region] = RegionMetrics(rep.ep, rep.ec, rep.n_candidates)
    return out


def robustness_pairs(
    variant_a: Mapping[str, RegionMetrics],
    variant_b: Mapping[str, RegionMetrics],
    protocol: Protocol | str,
) -> RobustnessResult:
    """Correlate two per-region variants of EP and EC."""
    protocol = Protocol(protocol) if isinstance(protocol, str) else protocol
    if set(variant_a) != set(variant_b):
        only_a = sorted(set(variant_a) - set(variant_b))
        only_b = sorted(set(variant_b) - set(variant_a))
        raise RegionMismatch(f"regions only in a: {only_a}; only in b: {only_b}")
    regions = sorted(variant_a)
    if len(regions) < 3:
        raise TooFewPoints(f"need >= 3 regions, got {len(regions)}")
    a = [variant_a[r] for r in regions]
    b = [variant_b[r] for r in regions]
    if all(x.n_candidates for x in a + b):
        warn_if_incomparable(a + b)
    return RobustnessResult(
        protocol=protocol,
        pairs=tuple(zip(regions, a, b)),
        rho_ep=pearson([x.ep for x in a], [x.ep for x in b]),
        rho_ec=pearson([x.ec for x in a], [x.ec for x in b]),
        n=len(regions),
    )


def robustness_top_n(
    records: Iterable[VoteRecord],
    max_n: int | None = None,
    region_level: int = 1,
    unit_level: int | None = None,
    sep: str = DEFAULT_SEPARATOR,
    other_label: str = "other",
) -> list[TopNRow]:
    """Top-n convergence curve.

    For each ``n`` in ``2..max_n`` (default: all candidates), regional EP/EC
    under top-n curation are correlated with the all-candidate values.
    ``coverage`` is the national vote fraction held by the top n.
    """
    records = [r for r in records if r.is_real_candidate]
    ranking = national_ranking(records)
    n_all = len(ranking)
    if n_all < 3:
        raise TooFewPoints(f"top-n robustness needs >= 3 candidates, got {n_all}")
    max_n = n_all if max_n is None else min(max_n, n_all)
    grand = sum(v for _, v in ranking)

    base = regional_metrics(records, region_level, unit_level, sep)
    rows = []
    for n in range(2, max_n + 1):
        cfg = CurationConfig(top_n=n, other_label=other_label, separator=sep)
        variant = regional_metrics(curate_records(records, cfg), region_level, unit_level, sep)
        res = robustness_pairs(base, _strip_n(variant), Protocol.TOP_N)
        coverage = sum(v for _, v in ranking[:n]) / grand
        rows.append(TopNRow(n, coverage, res.rho_ep, res.rho_ec))
    return rows


def _strip_n(metrics: Mapping[str, RegionMetrics]) -> dict[str, RegionMetrics]:
    # top-n variants differ in N by construction; skip the comparability warning
    return {k: RegionMetrics(v.ep, v.ec) for k, v in metrics.items()}


def robustness_enp(
    records: Iterable[VoteRecord],
    region_level: int = 1,
    unit_level: int | None = None,
    sep: str = DEFAULT_SEPARATOR,
) -> RobustnessResult:
    """All candidates vs. the top round(ENP) candidates (at least 2)."""
    records = [r for r in records if r.is_real_candidate]
    enp = effective_number_of_candidates(build_matrix(records, level=0, sep=sep))
    n = max(2, int(round(enp)))
    base = regional_metrics(records, region_level, unit_level, sep)
    if n >= len(national_ranking(records)):
        variant = base
    else:
        variant = regional_metrics(curate_records(records, CurationConfig(top_n=n, separator=sep)),
                                   region_level, unit_level, sep)
    return robustness_pairs(_strip_n(base), _strip_n(variant), Protocol.ENP_SUBSET)


def robustness_abstentions(
    records: Iterable[VoteRecord],
    region_level: int = 1,
    unit_level: int | None = None,
    sep: str = DEFAULT_SEPARATOR,
) -> RobustnessResult:
    """Real candidates only vs. abstention/blank/null rows added as antagonists."""
    records = list(records)
    a = regional_metrics(curate_records(records, CurationConfig(separator=sep)),
                         region_level, unit_level, sep)
    b = regional_metrics(
        curate_records(records, CurationConfig(abstention_mode=AbstentionMode.AS_CANDIDATES,
                                               separator=sep)),
        region_level, unit_level, sep)
    return robustness_pairs(_strip_n(a), _strip_n(b), Protocol.ABSTENTIONS)


def robustness_aggregation(
    records: Iterable[VoteRecord],
    region_level: int,
    fine_level: int | None,
    coarse_level: int,
    sep: str = DEFAULT_SEPARATOR,
) -> RobustnessResult:
    """Regional metrics from fine units (e.g. precincts) vs. coarse (e.g. counties)."""
    records = list(records)
    a = regional_metrics(records, region_level, fine_level, sep)
    b = regional_metrics(records, region_level, coarse_level, sep)
    return robustness_pairs(a, b, Protocol.AGGREGATION)


# --- swing states ----------------------------------------------------------------

SWING = "SWING"
REFERENCE_YEARS = (2008, 2012, 2016, 2020)


@dataclass(frozen=True)
class SwingLabel:
    state: str
    winners: tuple[str, ...]
    label: str            # "SWING" or "PARTISAN"
    party: str | None = None

    def __str__(self) -> str:
        return SWING if self.label == SWING else f"PARTISAN({self.party})"


def classify_swing(winners_by_state: Mapping[str, Sequence[str]]) -> list[SwingLabel]:
    """Swing if more than one party won across the four reference elections."""
    out = []
    for state in sorted(winners_by_state):
        winners = tuple(w.strip() for w in winners_by_state[state])
        if len(winners) != len(REFERENCE_YEARS):
            raise WrongWinnerCount(
                f"{state}: expected {len(REFERENCE_YEARS)} winners, got {len(winners)}"
            )
        parties = set(winners)
        if len(parties) > 1:
            out.append(SwingLabel(state, winners, SWING))
        else:
            out.append(SwingLabel(state, winners, "PARTISAN", winners[0]))
    return out


def read_winners(path=None) -> dict[str, tuple[str, ...]]:
    """Load ``state,<year>,...`` winners; default is the bundled 2008-2020 table."""
    if path is None:
        text = resources.files("electpol").joinpath(
            "data/us_presidential_winners_2008_2020.csv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rows = list(csv.reader(text.splitlines()))
    return {r[0].strip(): tuple(c.strip() for c in r[1:]) for r in rows[1:] if r}


# --- mass polarization -------------------------------------------------------------

DEM, REP = 1, 2

PID7 = {
    "Strong Democrat": -3,
    "Not Very Strong Democrat": -2,
    "Lean Democrat": -1,
    "Independent": 0,
    "Lean Republican": 1,
    "Not Very Strong Republican": 2,
    "Strong Republican": 3,
}
_PID7_LOWER = {k.lower(): v for k, v in PID7.items()}


def pid7_score(answer: str) -> int | None:
    """Signed 7-point party identity; "Not sure" and unknown answers map to None."""
    return _PID7_LOWER.get(answer.strip().lower())


def pid7_party_strength(score: int | None) -> tuple[int, int] | None:
    """(party, strength) from a signed score; independents and missing give None."""
    if score is None or score == 0:
        return None
    return (DEM if score < 0 else REP), abs(score)


@dataclass(frozen=True)
class Response:
    region: str
    year: int
    party: int
    strength: int
    weight: float = 1.0

    def __post_init__(self):
        if self.party not in (DEM, REP):
            raise ValueError(f"party must be {DEM} or {REP}, got {self.party}")
        if self.strength not in (1, 2, 3):
            raise ValueError(f"strength must be 1, 2 or 3, got {self.strength}")
        if not self.weight >= 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")


@dataclass
class MassPolarizationInput:
    responses: list[Response] = field(default_factory=list)

    @classmethod
    def from_pid7(cls, rows: Iterable[tuple[str, int, str, float]]) -> "MassPolarizationInput":
        """Build from (region, year, pid7 answer, weight); independents and
        "Not sure" answers are dropped."""
        out = []
        for region, year, answer, weight in rows:
            ps = pid7_party_strength(pid7_score(answer))
            if ps is not None:
                out.append(Response(region, int(year), ps[0], ps[1], float(weight)))
        return cls(out)


@dataclass(frozen=True)
class MassPolarization:
    region: str
    year: int
    ideology_dem: float
    ideology_rep: float

    @property
    def pp(self) -> float:
        return abs(self.ideology_dem - self.ideology_rep)


def mass_polarization(data: MassPolarizationInput, region: str, year: int) -> MassPolarization:
    """Weighted mean strength per party in one region-year and their distance.

    Weights are normalised to sum to one within each party cell.
    """
    acc = {DEM: [0.0, 0.0, 0], REP: [0.0, 0.0, 0]}
    for r in data.responses:
        if r.region == region and r.year == year:
            cell = acc[r.party]
            cell[0] += r.strength * r.weight
            cell[1] += r.weight
            cell[2] += 1
    ideology = {}
    for party, (sw, w, count) in acc.items():
        if count == 0:
            raise MissingParty(f"no responses for party {party} in ({region}, {year})")
        if w == 0:
            raise AllWeightsZero(f"all weights zero for party {party} in ({region}, {year})")
        ideology[party] = sw / w
    return MassPolarization(region, year, ideology[DEM], ideology[REP])


def mass_polarization_all(data: MassPolarizationInput) -> list[MassPolarization]:
    cells = sorted({(r.region, r.year) for r in data.responses})
    return [mass_polarization(data, g, t) for g, t in cells]


# --- regression export ---------------------------------------------------------------

@dataclass(frozen=True)
class KeyMismatch:
    region: str
    year: int
    reason: str


@dataclass(frozen=True)
class RegressionTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]
    mismatches: tuple[KeyMismatch, ...]

    def write(self, path, precision: int | None = None) -> None:
        fmt = (lambda x: repr(float(x))) if precision is None else (lambda x: f"{x:.{precision}g}")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header)
            for row in self.rows:
                w.writerow([row[0], row[1], *(fmt(x) for x in row[2:])])


def export_regression_table(
    metrics: Mapping[tuple[str, int], RegionMetrics],
    covariates: Mapping[tuple[str, int], Mapping[str, float]],
) -> RegressionTable:
    """Join metrics and covariates on (region, year) and z-score every column.

    Keys present on one side only are reported in ``mismatches`` and
    omitted. Columns: region, year, ep_z, ec_z, then ``<covariate>_z`` in
    alphabetical order; rows sorted by (region, year).
    """
    names = sorted({name for cov in covariates.values() for name in cov})
    mismatches = []
    keys = []
    for key in sorted(set(metrics) | set(covariates)):
        if key not in covariates:
            mismatches.append(KeyMismatch(key[0], key[1], "missing covariates"))
        elif key not in metrics:
            mismatches.append(KeyMismatch(key[0], key[1], "missing metrics"))
        elif any(n not in covariates[key] for n in names):
            missing = [n for n in names if n not in covariates[key]]
            mismatches.append(KeyMismatch(key[0], key[1], f"missing covariate(s) {missing}"))
        else:
            keys.append(key)

    cols = [standardize([metrics[k].ep for k in keys]), standardize([metrics[k].ec for k in keys])]
    cols += [standardize([covariates[k][n] for k in keys]) for n in names]
    rows = tuple((k[0], k[1], *(float(c[i]) for c in cols)) for i, k in enumerate(keys))
    header = ("region", "year", "ep_z", "ec_z", *(f"{n}_z" for n in names))
    return RegressionTable(header, rows, tuple(mismatches))
