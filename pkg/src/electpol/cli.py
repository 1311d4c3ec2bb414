"""Batch command-line interface.

Every command writes into ``<out>/<command>/<label>/`` together with a
``manifest.json`` (argv, resolved options, input digests, version, seed).
Existing non-empty output directories are only reused with ``--force``.
Failures exit with status 1 and a one-line JSON error on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from electpol import __version__
from electpol.analysis import (
    DEM,
    REP,
    MassPolarizationInput,
    Protocol,
    RegionMetrics,
    Response,
    classify_swing,
    export_regression_table,
    mass_polarization_all,
    pid7_party_strength,
    pid7_score,
    read_winners,
    robustness_abstentions,
    robustness_aggregation,
    robustness_enp,
    robustness_pairs,
    robustness_top_n,
)
from electpol.errors import ElectpolError, IngestError, MalformedFile
from electpol.metrics import comparison_report, polarization_report
from electpol.model import DEFAULT_SEPARATOR, build_matrix, to_records
from electpol.pipeline import (
    PRESETS,
    AbstentionMode,
    CurationConfig,
    apply_locations,
    curate_records,
    read_election_file,
    split_regions,
    write_election_file,
)
from electpol.synth import SyntheticSpec, integerize, sample


class OutputExists(ElectpolError):
    pass


class BadInput(ElectpolError):
    pass


# --- helpers ---------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _top_n(text: str) -> int | str:
    if text.lower() == "all":
        return "all"
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--top-n takes an integer >= 2 or 'all', got {text!r}")
    if n < 2:
        raise argparse.ArgumentTypeError("--top-n must be >= 2")
    return n


def _precision(text: str) -> int | None:
    if text == "full":
        return None
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--precision takes an integer or 'full', got {text!r}")
    if p < 1:
        raise argparse.ArgumentTypeError("--precision must be >= 1")
    return p


def formatter(precision: int | None) -> Callable[[float], str]:
    if precision is None:
        return lambda x: "" if x is None else repr(float(x))
    return lambda x: "" if x is None else f"{float(x):.{precision}g}"


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Output directory plus manifest for one command invocation."""

    def __init__(self, args: argparse.Namespace, argv: Sequence[str], inputs: Sequence[Path]):
        label = args.label or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        self.dir = Path(args.out) / args.command / label
        if self.dir.exists() and any(self.dir.iterdir()) and not args.force:
            raise OutputExists(f"{self.dir} exists and is not empty; pass --force to overwrite")
        self.dir.mkdir(parents=True, exist_ok=True)
        self.fmt = formatter(args.precision)
        config = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k != "func"}
        self.manifest = {
            "command": list(argv),
            "config": config,
            "inputs": {str(p): sha256(p) for p in inputs},
            "version": __version__,
            "seed": getattr(args, "seed", None),
        }

    def path(self, name: str) -> Path:
        return self.dir / name

    def write_csv(self, name: str, header: Sequence[str], rows) -> Path:
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([self.fmt(x) if isinstance(x, float) else x for x in row])
        return p

    def finish(self) -> Path:
        p = self.path("manifest.json")
        p.write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(self.dir)
        return p


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _load_records(args):
    records = read_election_file(args.input)
    if getattr(args, "location", None):
        records = apply_locations(records, read_election_file(args.location, "location", args.sep),
                                  args.sep)
    return records


def _inputs(args, *names) -> list[Path]:
    return [Path(getattr(args, n)) for n in names if getattr(args, n, None)]


# --- commands ----------------------------------------------------------------------

def cmd_compute(args, argv) -> int:
    base = PRESETS[args.preset] if args.preset else CurationConfig()
    if args.top_n is None:
        top_n = base.top_n
    else:
        top_n = None if args.top_n == "all" else args.top_n
    config = CurationConfig(
        top_n=top_n,
        abstention_mode=AbstentionMode(args.abstentions),
        aggregation_level=args.unit_level,
        separator=args.sep,
    )
    records = curate_records(_load_records(args), config)
    run = Run(args, argv, _inputs(args, "input", "location"))

    m = build_matrix(records, level=args.unit_level, sep=args.sep)
    rep = polarization_report(m)
    comp = comparison_report(m, args.alpha)
    disp = comp.dispersion or [None] * m.n_candidates
    er_cols = [f"er_{a:g}" for a in args.alpha]
    run.write_csv(
        "candidates.csv",
        ["candidate", "within_a", "between_a", "total_a", "dispersion", *er_cols],
        [[c.candidate, c.within_a, c.between_a, c.total_a, disp[i],
          *(er.per_candidate[i] for er in comp.esteban_ray)]
         for i, c in enumerate(rep.per_candidate)],
    )
    run.write_csv(
        "national.csv",
        ["n_units", "n_candidates", "ep", "ec", "margin_of_victory", "reynal_querol", "enp",
         "dispersion", *er_cols, "zero_vote_candidates"],
        [[m.n_units, m.n_candidates, rep.ep, rep.ec, comp.margin_of_victory, comp.reynal_querol,
          comp.enp, comp.dispersion_aggregate, *(er.aggregate for er in comp.esteban_ray),
          ";".join(rep.zero_vote_candidates)]],
    )
    if args.level is not None:
        labels = list(m.candidates)
        rows = []
        for region, recs in split_regions(records, args.level, args.sep).items():
            rm = build_matrix(recs, level=args.unit_level, candidates=labels, sep=args.sep)
            rr = polarization_report(rm)
            rows.append([region, rm.n_units, rm.n_candidates, rr.ep, rr.ec])
        run.write_csv("regions.csv", ["region", "n_units", "n_candidates", "ep", "ec"], rows)
    run.finish()
    return 0


def cmd_synth(args, argv) -> int:
    k = args.candidates - 1
    mu, sigma = list(args.mu), list(args.sigma)
    if len(sigma) == 1 and k > 1:
        sigma = sigma * k
    if len(mu) == 1 and k > 1:
        mu = mu * k
    if len(mu) != k or len(sigma) != k:
        raise BadInput(f"{args.candidates} candidates need {k} --mu and --sigma values")
    spec = SyntheticSpec(tuple(mu), tuple(sigma), args.units, args.votes_per_unit, args.seed)
    m = integerize(sample(spec))
    run = Run(args, argv, [])
    write_election_file(run.path("synth.csv.gz"), to_records(m))
    run.finish()
    return 0


ROBUSTNESS_HEADER = ["protocol", "n", "coverage", "rho_ep", "rho_ec"]


def _write_pairs(run: Run, res) -> None:
    run.write_csv("pairs.csv", ["region", "ep_a", "ec_a", "ep_b", "ec_b"],
                  [[r, a.ep, a.ec, b.ep, b.ec] for r, a, b in res.pairs])


def cmd_robustness(args, argv) -> int:
    inputs = _inputs(args, "input", "location", "a", "b")
    if args.protocol == "top-n":
        rows = robustness_top_n(_load_records(args), args.max_n, args.level, args.unit_level, args.sep)
        run = Run(args, argv, inputs)
        run.write_csv("robustness.csv", ROBUSTNESS_HEADER,
                      [["top-n", r.n, r.coverage, r.rho_ep, r.rho_ec] for r in rows])
        run.finish()
        return 0

    if args.protocol == "pairs":
        if not (args.a and args.b and args.kind):
            raise BadInput("robustness pairs needs --a, --b and --kind")
        res = robustness_pairs(read_region_metrics(args.a), read_region_metrics(args.b), args.kind)
    elif args.protocol == "aggregation":
        if args.coarse_level is None:
            raise BadInput("robustness aggregation needs --coarse-level")
        res = robustness_aggregation(_load_records(args), args.level, args.unit_level,
                                     args.coarse_level, args.sep)
    elif args.protocol == "abstentions":
        res = robustness_abstentions(_load_records(args), args.level, args.unit_level, args.sep)
    else:
        res = robustness_enp(_load_records(args), args.level, args.unit_level, args.sep)
    run = Run(args, argv, inputs)
    run.write_csv("robustness.csv", ROBUSTNESS_HEADER,
                  [[res.protocol.value, res.n, "", res.rho_ep, res.rho_ec]])
    _write_pairs(run, res)
    run.finish()
    return 0


def read_region_metrics(path) -> dict[str, RegionMetrics]:
    """``region,ep,ec`` CSV (extra columns ignored)."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for line, row in enumerate(reader, start=2):
            try:
                out[row["region"]] = RegionMetrics(float(row["ep"]), float(row["ec"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"{path}: bad region metrics row ({exc})", line) from None
    return out


def cmd_classify_swing(args, argv) -> int:
    labels = classify_swing(read_winners(args.winners))
    run = Run(args, argv, _inputs(args, "winners"))
    run.write_csv("swing.csv", ["state", "winners", "label"],
                  [[s.state, ";".join(s.winners), str(s)] for s in labels])
    run.finish()
    return 0


def read_responses(path) -> MassPolarizationInput:
    """Survey rows: ``region,year,weight`` plus either ``pid7`` (label or
    signed score) or ``party,strength``."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        cols = set(reader.fieldnames or [])
        for line, row in enumerate(reader, start=2):
            try:
                weight = float(row.get("weight") or 1.0)
                if "pid7" in cols:
                    raw = row["pid7"].strip()
                    score = int(raw) if raw.lstrip("+-").isdigit() else pid7_score(raw)
                    ps = pid7_party_strength(score)
                    if ps is None:
                        continue
                    party, strength = ps
                else:
                    party, strength = int(row["party"]), int(row["strength"])
                out.append(Response(row["region"], int(row["year"]), party, strength, weight))
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"{path}: bad response row ({exc})", line) from None
    return MassPolarizationInput(out)


def cmd_mass_polarization(args, argv) -> int:
    results = mass_polarization_all(read_responses(args.input))
    run = Run(args, argv, _inputs(args, "input"))
    run.write_csv("mass_polarization.csv",
                  ["region", "year", f"ideology_{DEM}", f"ideology_{REP}", "pp"],
                  [[r.region, r.year, r.ideology_dem, r.ideology_rep, r.pp] for r in results])
    run.finish()
    return 0


def _read_keyed(path, value_cols: Sequence[str] | None = None):
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        names = [c for c in (reader.fieldnames or []) if c not in ("region", "year")]
        for line, row in enumerate(reader, start=2):
            try:
                key = (row["region"], int(row["year"]))
                out[key] = {c: float(row[c]) for c in (value_cols or names) if row.get(c, "") != ""}
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"{path}: bad row ({exc})", line) from None
    return out


def cmd_export(args, argv) -> int:
    raw = _read_keyed(args.metrics, ["ep", "ec"])
    metrics = {k: RegionMetrics(v["ep"], v["ec"]) for k, v in raw.items()}
    table = export_regression_table(metrics, _read_keyed(args.covariates))
    run = Run(args, argv, _inputs(args, "metrics", "covariates"))
    run.write_csv("regression_table.csv", table.header, [list(r) for r in table.rows])
    run.write_csv("key_mismatches.csv", ["region", "year", "reason"],
                  [[k.region, k.year, k.reason] for k in table.mismatches])
    run.finish()
    return 0


# --- parser ------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output root directory (default: out)")
    p.add_argument("--label", default=None,
                   help="output sub-directory name (default: UTC timestamp)")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.add_argument("--precision", type=_precision, default=6,
                   help="significant digits for numeric output, or 'full' (default: 6)")
    p.add_argument("--format", choices=["csv"], default="csv", help="output format")


def _input_opts(p: argparse.ArgumentParser, level_default: int | None = 1) -> None:
    p.add_argument("--input", required=True, help="results file (.csv or .csv.gz)")
    p.add_argument("--location", default=None,
                   help="location file; its level columns replace each polling_id")
    p.add_argument("--level", type=int, default=level_default,
                   help="polling_id level defining regions")
    p.add_argument("--unit-level", type=int, default=None,
                   help="polling_id level of voting units (default: full polling_id)")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR, help="polling_id separator (default: '|')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="electpol",
        description="Election polarization (EP) and competitiveness (EC) from disaggregated results.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="EP/EC and comparison measures for one results file")
    _input_opts(p, level_default=None)
    p.add_argument("--top-n", type=_top_n, default=None,
                   help="keep the N strongest candidates, pool the rest as 'other'; 'all' keeps every one")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="country curation preset (sets --top-n unless given)")
    p.add_argument("--abstentions", choices=[m.value for m in AbstentionMode], default="exclude",
                   help="drop abstention/blank/null rows or treat them as candidates")
    p.add_argument("--alpha", type=_floats, default=[0.25, 1.0],
                   help="Esteban-Ray alpha values, comma-separated (default: 0.25,1)")
    _common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("synth", help="generate a synthetic election in the results schema")
    p.add_argument("--candidates", type=int, default=2, help="number of candidates (>= 2)")
    p.add_argument("--mu", type=_floats, required=True, help="Gaussian means, comma-separated")
    p.add_argument("--sigma", type=_floats, required=True,
                   help="Gaussian standard deviations in [0, 0.25], comma-separated")
    p.add_argument("--units", type=int, default=100, help="number of voting units")
    p.add_argument("--votes-per-unit", type=int, default=100, help="votes per unit")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("robustness", help="robustness protocols")
    p.add_argument("protocol", choices=["top-n", "aggregation", "abstentions", "enp", "pairs"])
    p.add_argument("--input", default=None, help="results file (all protocols except pairs)")
    p.add_argument("--location", default=None, help="location file")
    p.add_argument("--level", type=int, default=1, help="polling_id level defining regions")
    p.add_argument("--unit-level", type=int, default=None,
                   help="level of voting units (fine level for aggregation)")
    p.add_argument("--coarse-level", type=int, default=None,
                   help="coarse unit level for the aggregation protocol")
    p.add_argument("--max-n", type=int, default=None, help="largest top-n to evaluate")
    p.add_argument("--a", default=None, help="pairs: region,ep,ec CSV for variant a")
    p.add_argument("--b", default=None, help="pairs: region,ep,ec CSV for variant b")
    p.add_argument("--kind", choices=[x.value for x in Protocol], default=None,
                   help="pairs: protocol label to record")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR, help="polling_id separator")
    _common(p)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("classify-swing", help="label states SWING or PARTISAN")
    p.add_argument("--winners", default=None,
                   help="CSV state,<4 years> of winning parties (default: bundled 2008-2020 table)")
    _common(p)
    p.set_defaults(func=cmd_classify_swing)

    p = sub.add_parser("mass-polarization", help="survey-based mass polarization per region-year")
    p.add_argument("--input", required=True,
                   help="CSV region,year,weight and pid7 (or party,strength)")
    _common(p)
    p.set_defaults(func=cmd_mass_polarization)

    p = sub.add_parser("export", help="standardized region-year table for panel regressions")
    p.add_argument("--metrics", required=True, help="CSV region,year,ep,ec")
    p.add_argument("--covariates", required=True, help="CSV region,year,<covariates...>")
    _common(p)
    p.set_defaults(func=cmd_export)
    return parser


def _error_payload(exc: Exception) -> dict:
    kind = exc.kind if isinstance(exc, ElectpolError) else type(exc).__name__
    out = {"error": kind, "message": str(exc)}
    if isinstance(exc, IngestError) and exc.line is not None:
        out["line"] = exc.line
    if isinstance(exc, MalformedFile):
        out["rows"] = [{"line": e.line, "error": e.kind, "message": str(e)} for e in exc.errors]
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, ["electpol", *argv])
    except (ElectpolError, OSError, ValueError, KeyError) as exc:
        print(json.dumps(_error_payload(exc), sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
