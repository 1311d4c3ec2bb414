"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ElectpolError(Exception):
    """Base class; ``kind`` is the machine-readable name used by the CLI."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class EmptyInput(ElectpolError):
    pass


class NegativeVotes(ElectpolError):
    pass


class MalformedPollingId(ElectpolError):
    pass


class SingleUnit(ElectpolError):
    """Dispersion needs at least two units with votes."""


class InvalidSpec(ElectpolError):
    pass


class EmptyAfterFilter(ElectpolError):
    pass


class NotAnAncestor(ElectpolError):
    pass


class ConstantSeries(ElectpolError):
    pass


class LengthMismatch(ElectpolError):
    pass


class TooFewPoints(ElectpolError):
    pass


class WrongWinnerCount(ElectpolError):
    pass


class MissingParty(ElectpolError):
    pass


class AllWeightsZero(ElectpolError):
    pass


class RegionMismatch(ElectpolError):
    pass


class BadFilename(ElectpolError):
    pass


# --- ingestion ---------------------------------------------------------------

class IngestError(ElectpolError):
    """A problem located in an input file. ``line`` is 1-based, header = 1."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MissingColumn(IngestError):
    pass


class BadInteger(IngestError):
    pass


class BadFloat(IngestError):
    pass


class BadBoolean(IngestError):
    pass


class GzipCorrupt(IngestError):
    pass


class MalformedFile(IngestError):
    """Collects every row-level error found in one pass over a file."""

    def __init__(self, path, errors: list[IngestError]):
        self.path = str(path)
        self.errors = list(errors)
        shown = "; ".join(str(e) for e in self.errors[:10])
        more = f" (+{len(self.errors) - 10} more)" if len(self.errors) > 10 else ""
        super().__init__(f"{self.path}: {len(self.errors)} malformed row(s): {shown}{more}")
        self.line = self.errors[0].line if self.errors else None


class TooFewCandidates(ElectpolError):
    pass


class EmptyField(IngestError):
    pass


class WrongFieldCount(IngestError):
    pass


class TopNExceedsCandidates(UserWarning):
    """top_n asks for more candidates than the election has; all are kept."""
