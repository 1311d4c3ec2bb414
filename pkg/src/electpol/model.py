"""Election data in the unified results schema.

A results file has one row per (voting unit, candidate). Voting units are
identified by a hierarchical ``polling_id`` whose components are joined by a
separator (``|`` by default), e.g. ``"R01|PROV|COMM|ST7"`` for a Chilean
polling station. Aggregation "level" ``L`` keeps the first ``L`` components;
level 0 collapses everything into one national unit and ``None`` keeps the
full identifier.
"""

from __future__ import annotations

import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from electpol.errors import (
    EmptyInput,
    MalformedPollingId,
    NegativeVotes,
    TooFewCandidates,
)

DEFAULT_SEPARATOR = "|"
NATIONAL = "national"
RATE_TOLERANCE = 1e-6


def normalize_label(label: str) -> str:
    return unicodedata.normalize("NFC", label.strip())


@dataclass(frozen=True)
class VoteRecord:
    """One candidate's result in one voting unit."""

    polling_id: str
    candidate: str
    value: int
    rank: int = 1
    is_real_candidate: bool = True
    rate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "candidate", normalize_label(self.candidate))


@dataclass(frozen=True)
class LocationRecord:
    """Territorial breakdown of a ``polling_id``.

    ``extra`` keeps the location file's remaining columns (``value``,
    ``rate``) as raw strings; their meaning at this level is not defined.
    """

    polling_id: str
    levels: tuple[str, ...]
    extra: dict = field(default_factory=dict, compare=False)

    def joined(self, sep: str = DEFAULT_SEPARATOR) -> str:
        return sep.join(self.levels)

    def is_consistent(self, sep: str = DEFAULT_SEPARATOR) -> bool:
        return self.joined(sep) == self.polling_id


def split_polling_id(polling_id: str, sep: str = DEFAULT_SEPARATOR) -> list[str]:
    if not polling_id:
        raise MalformedPollingId("empty polling_id")
    parts = polling_id.split(sep)
    if any(p == "" for p in parts):
        raise MalformedPollingId(f"empty component in polling_id {polling_id!r}")
    return parts


def unit_at_level(polling_id: str, level: int | None, sep: str = DEFAULT_SEPARATOR) -> str:
    """Identifier of the unit containing ``polling_id`` at ``level``."""
    if level is None:
        split_polling_id(polling_id, sep)
        return polling_id
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    if level == 0:
        return NATIONAL
    parts = split_polling_id(polling_id, sep)
    if len(parts) < level:
        raise MalformedPollingId(
            f"polling_id {polling_id!r} has {len(parts)} level(s), {level} requested"
        )
    return sep.join(parts[:level])


class ElectionMatrix:
    """Vote counts for M units (rows) by N candidates (columns).

    Votes are stored as float64 so that real-valued weights (e.g. synthetic
    shares times 100) are allowed; integer counts stay exact below 2**53.
    Units with zero total votes are kept with all-zero shares and flagged in
    ``zero_units``. Instances are immutable.
    """

    def __init__(self, units: Sequence[str], candidates: Sequence[str], votes):
        units = tuple(str(u) for u in units)
        candidates = tuple(candidates)
        votes = np.array(votes, dtype=np.float64, copy=True)
        if votes.ndim != 2 or votes.shape != (len(units), len(candidates)):
            raise ValueError(
                f"votes shape {votes.shape} does not match "
                f"{len(units)} units x {len(candidates)} candidates"
            )
        if len(units) < 1:
            raise EmptyInput("an election needs at least one unit")
        if len(candidates) < 2:
            raise TooFewCandidates(f"an election needs N >= 2 candidates, got {len(candidates)}")
        if len(set(units)) != len(units):
            raise ValueError("duplicate unit identifiers")
        if len(set(candidates)) != len(candidates):
            raise ValueError("duplicate candidate labels")
        if not np.all(np.isfinite(votes)):
            raise ValueError("votes must be finite")
        if np.any(votes < 0):
            raise NegativeVotes("votes must be non-negative")

        unit_totals = votes.sum(axis=1)
        zero = unit_totals == 0
        shares = np.zeros_like(votes)
        np.divide(votes, unit_totals[:, None], out=shares, where=~zero[:, None])
        grand = unit_totals.sum()
        if grand <= 0:
            raise EmptyInput("election has no votes")
        overall = votes.sum(axis=0) / grand

        for arr in (votes, shares, overall, unit_totals, zero):
            arr.setflags(write=False)
        self._units = units
        self._candidates = candidates
        self._votes = votes
        self._shares = shares
        self._overall = overall
        self._unit_totals = unit_totals
        self._zero = zero

    units = property(lambda self: self._units)
    candidates = property(lambda self: self._candidates)
    votes = property(lambda self: self._votes)
    shares = property(lambda self: self._shares)
    overall_share = property(lambda self: self._overall)
    unit_totals = property(lambda self: self._unit_totals)
    zero_units = property(lambda self: self._zero)

    @property
    def n_units(self) -> int:
        return len(self._units)

    @property
    def n_candidates(self) -> int:
        return len(self._candidates)

    @property
    def candidate_totals(self) -> np.ndarray:
        return self._votes.sum(axis=0)

    @property
    def total_votes(self) -> float:
        return float(self._unit_totals.sum())

    def candidate_index(self, candidate: str) -> int:
        return self._candidates.index(candidate)

    def reorder(self, units: Sequence[str] | None = None,
                candidates: Sequence[str] | None = None) -> "ElectionMatrix":
        """Same election with rows and/or columns permuted."""
        ui = [self._units.index(u) for u in units] if units is not None else slice(None)
        ci = [self._candidates.index(c) for c in candidates] if candidates is not None else slice(None)
        v = self._votes[ui][:, ci]
        return ElectionMatrix(units if units is not None else self._units,
                              candidates if candidates is not None else self._candidates, v)

    def scaled(self, factor: float) -> "ElectionMatrix":
        return ElectionMatrix(self._units, self._candidates, self._votes * factor)

    def equals(self, other: "ElectionMatrix", atol: float = 0.0) -> bool:
        return (
            self._units == other._units
            and self._candidates == other._candidates
            and np.allclose(self._votes, other._votes, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        return (f"ElectionMatrix(units={self.n_units}, candidates={list(self._candidates)}, "
                f"total_votes={self.total_votes:g})")


def build_matrix(
    records: Iterable[VoteRecord],
    level: int | None = None,
    candidates: Sequence[str] | None = None,
    sep: str = DEFAULT_SEPARATOR,
) -> ElectionMatrix:
    """Sum record votes per (unit at ``level``, candidate).

    Units and candidates are sorted lexicographically so the result does not
    depend on record order. If ``candidates`` is given, those labels come
    first in that order (absent ones get zero votes everywhere) and any other
    candidate found in the records is appended in sorted order.
    """
    totals: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    seen: set[str] = set()
    n = 0
    for rec in records:
        n += 1
        if rec.value < 0:
            raise NegativeVotes(
                f"negative votes ({rec.value}) for {rec.candidate!r} in {rec.polling_id!r}"
            )
        unit = unit_at_level(rec.polling_id, level, sep)
        totals[unit][rec.candidate] += rec.value
        seen.add(rec.candidate)
    if n == 0:
        raise EmptyInput("no records")

    if candidates is not None:
        labels = [normalize_label(c) for c in candidates]
        labels += sorted(seen - set(labels))
    else:
        labels = sorted(seen)
    units = sorted(totals)
    col = {c: j for j, c in enumerate(labels)}
    votes = np.zeros((len(units), len(labels)))
    for i, u in enumerate(units):
        for c, v in totals[u].items():
            votes[i, col[c]] = v
    return ElectionMatrix(units, labels, votes)


def rank_candidates(labels: Sequence[str], values: Sequence[float]) -> list[int]:
    """1-based ranks, descending by value; ties broken by label."""
    order = sorted(range(len(labels)), key=lambda j: (-values[j], labels[j]))
    ranks = [0] * len(labels)
    for r, j in enumerate(order, start=1):
        ranks[j] = r
    return ranks


def to_records(m: ElectionMatrix, include_zero: bool = True) -> list[VoteRecord]:
    """Expand a matrix back into unified-schema rows.

    Votes must be integral; real-valued synthetic weights have to be
    apportioned first (see ``electpol.synth.integerize``).
    """
    votes = m.votes
    if not np.all(votes == np.floor(votes)):
        raise ValueError("matrix has non-integral votes; integerize before exporting")
    out = []
    for i, unit in enumerate(m.units):
        row = votes[i]
        ranks = rank_candidates(m.candidates, row)
        for j, cand in enumerate(m.candidates):
            if row[j] == 0 and not include_zero:
                continue
            out.append(VoteRecord(
                polling_id=unit,
                candidate=cand,
                value=int(row[j]),
                rank=ranks[j],
                is_real_candidate=True,
                rate=float(m.shares[i, j]),
            ))
    return out


@dataclass(frozen=True)
class Finding:
    kind: str
    polling_id: str
    message: str
    candidate: str | None = None


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def by_kind(self, kind: str) -> list[Finding]:
        return [f for f in self.findings if f.kind == kind]

    def __len__(self) -> int:
        return len(self.findings)


def validate(records: Iterable[VoteRecord], tolerance: float = RATE_TOLERANCE) -> ValidationReport:
    """Check record invariants without modifying anything.

    A unit's stored rates pass if they sum to one over all rows or over the
    real-candidate rows only, since source files differ on whether
    abstentions are part of the denominator.
    """
    by_unit: dict[str, list[VoteRecord]] = defaultdict(list)
    for rec in records:
        by_unit[rec.polling_id].append(rec)

    report = ValidationReport()
    add = report.findings.append
    for pid in sorted(by_unit):
        rows = by_unit[pid]
        for r in rows:
            if r.value < 0:
                add(Finding("NegativeVotes", pid, f"value {r.value} < 0", r.candidate))
            if r.rate is not None and not (0.0 <= r.rate <= 1.0):
                add(Finding("RateOutOfRange", pid, f"rate {r.rate} outside [0, 1]", r.candidate))

        labels = [r.candidate for r in rows]
        dupes = sorted({c for c in labels if labels.count(c) > 1})
        for c in dupes:
            add(Finding("DuplicateCandidate", pid, f"candidate {c!r} appears more than once", c))

        if sorted(r.rank for r in rows) != list(range(1, len(rows) + 1)):
            add(Finding("RankViolation", pid, "ranks are not a permutation of 1..n"))

        if all(r.rate is not None for r in rows):
            total = sum(r.rate for r in rows)
            real = sum(r.rate for r in rows if r.is_real_candidate)
            unit_votes = sum(r.value for r in rows)
            if unit_votes > 0 and abs(total - 1) > tolerance and abs(real - 1) > tolerance:
                add(Finding("RateSumViolation", pid, f"rates sum to {total:.6g}"))
    return report
