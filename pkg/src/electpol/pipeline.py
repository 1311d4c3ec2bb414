"""File ingestion and curation.

Results files are comma-separated UTF-8 text, optionally gzip-compressed,
with header ``polling_id,candidate,value,rank,flag_candidates,rate``.
Location files carry ``polling_id,value,rate`` plus one column per
territorial level. Filenames follow ``{country}_{year}_{round}.csv.gz`` and
``{country}_{year}_{round}_location.csv.gz``.

Curation runs in a fixed order: handle abstention/blank/null rows, rank
candidates by national total, keep the top N and pool the rest per unit into
an ``other`` candidate, then build the matrix at the requested level.
"""

from __future__ import annotations

import csv
import enum
import gzip
import io
import re
import warnings
import zlib
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from electpol.errors import (
    BadBoolean,
    BadFilename,
    BadFloat,
    BadInteger,
    EmptyAfterFilter,
    EmptyField,
    GzipCorrupt,
    IngestError,
    MalformedFile,
    MissingColumn,
    NotAnAncestor,
    TopNExceedsCandidates,
    WrongFieldCount,
)
from electpol.model import (
    DEFAULT_SEPARATOR,
    NATIONAL,
    ElectionMatrix,
    LocationRecord,
    VoteRecord,
    build_matrix,
    normalize_label,
    rank_candidates,
    split_polling_id,
    unit_at_level,
)

RESULT_COLUMNS = ("polling_id", "candidate", "value", "rank", "flag_candidates", "rate")
LOCATION_COLUMNS = ("polling_id", "value", "rate")
ROUNDS = ("first_round", "runoff", "general", "senate", "house")
GZIP_MAGIC = b"\x1f\x8b"

_TRUE = {"true", "1", "yes", "t", "y"}
_FALSE = {"false", "0", "no", "f", "n"}
_INT_RE = re.compile(r"^\+?\d+$")
_FILENAME_RE = re.compile(
    r"^(?P<country>.+?)_(?P<year>\d{4})_(?P<round>[a-z_]+?)(?P<location>_location)?\.csv(?:\.gz)?$"
)


# --- filenames -----------------------------------------------------------------

@dataclass(frozen=True)
class ElectionFileName:
    country: str
    year: int
    round: str
    is_location: bool = False

    def filename(self, location: bool | None = None) -> str:
        loc = self.is_location if location is None else location
        return f"{self.country}_{self.year}_{self.round}{'_location' if loc else ''}.csv.gz"


def parse_election_filename(name: str | Path) -> ElectionFileName:
    base = Path(name).name
    m = _FILENAME_RE.match(base)
    if not m:
        raise BadFilename(f"{base!r} does not match {{country}}_{{year}}_{{round}}.csv.gz")
    if m["round"] not in ROUNDS:
        raise BadFilename(f"round {m['round']!r} not in {ROUNDS}")
    return ElectionFileName(m["country"], int(m["year"]), m["round"], bool(m["location"]))


# --- reading ---------------------------------------------------------------------

def _open_text(path: Path) -> io.TextIOBase:
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == GZIP_MAGIC:
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def _rows(path: Path, required: tuple[str, ...]) -> Iterator[tuple[int, list[str], dict[str, str]]]:
    """Yield (line number, header, row dict). Header is line 1."""
    try:
        with _open_text(path) as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise MissingColumn(f"{path}: empty file, no header", line=1)
            header = [h.strip().lstrip("﻿") for h in header]
            missing = [c for c in required if c not in header]
            if missing:
                raise MissingColumn(f"missing column(s) {missing} in header {header}", line=1)
            for fields in reader:
                if not fields:
                    continue
                yield reader.line_num, header, fields
    except (gzip.BadGzipFile, EOFError, zlib.error) as exc:
        raise GzipCorrupt(f"{path}: corrupt gzip stream ({exc})") from exc
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: not valid UTF-8 ({exc})") from exc


def _int(raw: str, line: int, column: str, minimum: int) -> int:
    s = raw.strip()
    if not _INT_RE.match(s) or int(s) < minimum:
        raise BadInteger(f"{column}={raw!r} is not an integer >= {minimum}", line, column)
    return int(s)


def _float(raw: str, line: int, column: str) -> float | None:
    s = raw.strip()
    if s == "":
        return None
    try:
        x = float(s)
    except ValueError:
        raise BadFloat(f"{column}={raw!r} is not a number", line, column) from None
    if not np.isfinite(x):
        raise BadFloat(f"{column}={raw!r} is not finite", line, column)
    return x


def _bool(raw: str, line: int, column: str) -> bool:
    s = raw.strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise BadBoolean(f"{column}={raw!r} is not a boolean", line, column)


def _parse_result_row(line: int, row: dict[str, str]) -> VoteRecord:
    pid = row["polling_id"].strip()
    if not pid:
        raise EmptyField("empty polling_id", line, "polling_id")
    cand = row["candidate"]
    if not cand.strip():
        raise EmptyField("empty candidate", line, "candidate")
    return VoteRecord(
        polling_id=pid,
        candidate=cand,
        value=_int(row["value"], line, "value", 0),
        rank=_int(row["rank"], line, "rank", 1),
        is_real_candidate=_bool(row["flag_candidates"], line, "flag_candidates"),
        rate=_float(row["rate"], line, "rate"),
    )


def read_results(path: str | Path) -> list[VoteRecord]:
    path = Path(path)
    out, errors = [], []
    for line, header, fields in _rows(path, RESULT_COLUMNS):
        if len(fields) != len(header):
            errors.append(WrongFieldCount(f"{len(fields)} fields, header has {len(header)}", line))
            continue
        try:
            out.append(_parse_result_row(line, dict(zip(header, fields))))
        except IngestError as exc:
            errors.append(exc)
    if errors:
        raise MalformedFile(path, errors)
    return out


def read_locations(path: str | Path, sep: str = DEFAULT_SEPARATOR) -> list[LocationRecord]:
    path = Path(path)
    out, errors = [], []
    for line, header, fields in _rows(path, ("polling_id",)):
        if len(fields) != len(header):
            errors.append(WrongFieldCount(f"{len(fields)} fields, header has {len(header)}", line))
            continue
        row = dict(zip(header, fields))
        pid = row["polling_id"].strip()
        if not pid:
            errors.append(EmptyField("empty polling_id", line, "polling_id"))
            continue
        level_cols = [h for h in header if h not in LOCATION_COLUMNS]
        levels = tuple(row[c].strip() for c in level_cols) if level_cols else tuple(split_polling_id(pid, sep))
        extra = {c: row[c] for c in ("value", "rate") if c in row}
        out.append(LocationRecord(pid, levels, extra))
    if errors:
        raise MalformedFile(path, errors)
    return out


def read_election_file(path: str | Path, schema: str = "result", sep: str = DEFAULT_SEPARATOR):
    """Parse a results (``schema="result"``) or location file.

    Gzip is detected from the magic bytes, not the extension. Every bad row
    is collected and raised together as ``MalformedFile`` whose ``errors``
    carry line numbers (header = line 1).
    """
    if schema == "result":
        return read_results(path)
    if schema == "location":
        return read_locations(path, sep)
    raise ValueError(f"schema must be 'result' or 'location', got {schema!r}")


# --- writing ---------------------------------------------------------------------

def _open_write(path: Path) -> io.TextIOBase:
    if path.suffix == ".gz":
        raw = open(path, "wb")
        # mtime=0 and no embedded name keep gzip output byte-identical across runs
        gz = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
        return _ClosingWrapper(io.TextIOWrapper(gz, encoding="utf-8", newline=""), raw)
    return open(path, "w", encoding="utf-8", newline="")


class _ClosingWrapper:
    def __init__(self, text, raw):
        self._text, self._raw = text, raw

    def write(self, s):
        return self._text.write(s)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self._text.close()
        self._raw.close()


def format_rate(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_election_file(path: str | Path, records: Iterable[VoteRecord]) -> Path:
    path = Path(path)
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in records:
            w.writerow([r.polling_id, r.candidate, r.value, r.rank,
                        "true" if r.is_real_candidate else "false", format_rate(r.rate)])
    return path


def write_location_file(path: str | Path, records: Iterable[LocationRecord],
                        level_names: Iterable[str]) -> Path:
    path = Path(path)
    level_names = list(level_names)
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(LOCATION_COLUMNS) + level_names)
        for r in records:
            w.writerow([r.polling_id, r.extra.get("value", ""), r.extra.get("rate", ""), *r.levels])
    return path


def apply_locations(records: Iterable[VoteRecord], locations: Iterable[LocationRecord],
                    sep: str = DEFAULT_SEPARATOR) -> list[VoteRecord]:
    """Replace each record's polling_id by its location hierarchy joined with ``sep``."""
    lookup = {loc.polling_id: sep.join(loc.levels) for loc in locations}
    out = []
    for r in records:
        if r.polling_id not in lookup:
            raise KeyError(f"polling_id {r.polling_id!r} missing from location file")
        out.append(VoteRecord(lookup[r.polling_id], r.candidate, r.value, r.rank,
                              r.is_real_candidate, r.rate))
    return out


# --- curation --------------------------------------------------------------------

class AbstentionMode(enum.Enum):
    EXCLUDE = "exclude"
    AS_CANDIDATES = "as-candidates"


@dataclass(frozen=True)
class CurationConfig:
    """``top_n=None`` keeps every candidate. ``aggregation_level=None`` keeps
    the full polling_id as the unit."""

    top_n: int | None = None
    abstention_mode: AbstentionMode = AbstentionMode.EXCLUDE
    aggregation_level: int | None = None
    other_label: str = "other"
    separator: str = DEFAULT_SEPARATOR

    def __post_init__(self):
        if self.top_n is not None and self.top_n < 2:
            raise ValueError(f"top_n must be >= 2 or None, got {self.top_n}")
        if isinstance(self.abstention_mode, str):
            object.__setattr__(self, "abstention_mode", AbstentionMode(self.abstention_mode))


# Retention used for each country's curated series.
PRESETS = {
    "united_states": CurationConfig(top_n=2),
    "chile": CurationConfig(top_n=4),
    "france": CurationConfig(top_n=8),
}


def national_ranking(records: Iterable[VoteRecord]) -> list[tuple[str, int]]:
    """(candidate, national total) sorted by total descending, label ascending."""
    totals: dict[str, int] = defaultdict(int)
    for r in records:
        totals[r.candidate] += r.value
    return sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))


def curate_records(records: Iterable[VoteRecord], config: CurationConfig) -> list[VoteRecord]:
    """Apply abstention handling and top-N pooling, keeping original units.

    Under ``AS_CANDIDATES`` the pseudo-rows are kept as candidates in their
    own right and never pooled; ``top_n`` counts real candidates only.
    Returned rows are sorted by (polling_id, candidate) and carry
    recomputed ranks and rates.
    """
    records = list(records)
    real = [r for r in records if r.is_real_candidate]
    pseudo = [r for r in records if not r.is_real_candidate]
    if config.abstention_mode is AbstentionMode.EXCLUDE:
        pseudo = []
    if not real and not pseudo:
        raise EmptyAfterFilter("no rows left after abstention filtering")

    ranking = national_ranking(real)
    keep = {c for c, _ in ranking}
    if config.top_n is not None:
        if config.top_n > len(ranking):
            warnings.warn(
                f"top_n={config.top_n} exceeds {len(ranking)} candidates; keeping all",
                TopNExceedsCandidates,
                stacklevel=2,
            )
        keep = {c for c, _ in ranking[: config.top_n]}
    pooled = len(keep) < len(ranking)
    if pooled and any(r.candidate == config.other_label for r in records):
        raise ValueError(f"other_label {config.other_label!r} collides with a candidate label")

    units: dict[str, dict[str, tuple[int, bool]]] = defaultdict(dict)
    for r in real:
        label = r.candidate if r.candidate in keep else config.other_label
        v, _ = units[r.polling_id].get(label, (0, True))
        units[r.polling_id][label] = (v + r.value, True)
    for r in pseudo:
        v, _ = units[r.polling_id].get(r.candidate, (0, False))
        units[r.polling_id][r.candidate] = (v + r.value, False)

    out = []
    for pid in sorted(units):
        labels = sorted(units[pid])
        values = [units[pid][c][0] for c in labels]
        total = sum(values)
        ranks = rank_candidates(labels, values)
        for c, v, rk in zip(labels, values, ranks):
            out.append(VoteRecord(pid, c, v, rk, units[pid][c][1], v / total if total else 0.0))
    if not out:
        raise EmptyAfterFilter("no rows left after curation")
    return out


def curate(records: Iterable[VoteRecord], config: CurationConfig = CurationConfig()) -> ElectionMatrix:
    curated = curate_records(records, config)
    return build_matrix(curated, level=config.aggregation_level, sep=config.separator)


def unit_depth(unit: str, sep: str = DEFAULT_SEPARATOR) -> int:
    return 0 if unit == NATIONAL else len(split_polling_id(unit, sep))


def reaggregate(m: ElectionMatrix, to_level: int, from_level: int | None = None,
                sep: str = DEFAULT_SEPARATOR) -> ElectionMatrix:
    """Sum units into their ancestors at ``to_level`` (0 = one national unit).

    ``from_level`` defaults to the depth of the matrix's units, which must be
    uniform.
    """
    depths = {unit_depth(u, sep) for u in m.units}
    if from_level is None:
        if len(depths) != 1:
            raise NotAnAncestor(f"units have mixed depths {sorted(depths)}; pass from_level")
        from_level = depths.pop()
    elif depths != {from_level}:
        raise NotAnAncestor(f"units are at depth(s) {sorted(depths)}, not {from_level}")
    if not 0 <= to_level <= from_level:
        raise NotAnAncestor(f"level {to_level} is not an ancestor of level {from_level}")
    if to_level == from_level:
        return m

    parents = [unit_at_level(u, to_level, sep) for u in m.units]
    targets = sorted(set(parents))
    row = {p: i for i, p in enumerate(targets)}
    votes = np.zeros((len(targets), m.n_candidates))
    for k, p in enumerate(parents):
        votes[row[p]] += m.votes[k]
    return ElectionMatrix(targets, m.candidates, votes)


def split_regions(records: Iterable[VoteRecord], region_level: int,
                  sep: str = DEFAULT_SEPARATOR) -> dict[str, list[VoteRecord]]:
    """Group records by their ancestor at ``region_level``, regions sorted."""
    groups: dict[str, list[VoteRecord]] = defaultdict(list)
    for r in records:
        groups[unit_at_level(r.polling_id, region_level, sep)].append(r)
    return {k: groups[k] for k in sorted(groups)}
