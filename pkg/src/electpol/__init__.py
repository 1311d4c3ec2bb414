"""Election polarization (EP) and election competitiveness (EC).

Typical use::

    from electpol import read_election_file, curate, CurationConfig, polarization_report

    records = read_election_file("chile_2021_first_round.csv.gz")
    m = curate(records, CurationConfig(top_n=4, aggregation_level=3))
    report = polarization_report(m)
    print(report.ep, report.ec)
"""

__version__ = "0.1.0"

from electpol.model import (  # noqa: E402
    ElectionMatrix,
    LocationRecord,
    VoteRecord,
    build_matrix,
    to_records,
    validate,
)
from electpol.metrics import (  # noqa: E402
    AntagonismReport,
    ComparisonReport,
    EstebanRayParams,
    between_antagonism,
    comparison_report,
    dispersion,
    effective_number_of_candidates,
    esteban_ray,
    margin_of_victory,
    polarization_report,
    reynal_querol,
    within_antagonism,
)
from electpol.pipeline import (  # noqa: E402
    AbstentionMode,
    CurationConfig,
    curate,
    read_election_file,
    reaggregate,
    write_election_file,
)
from electpol.synth import (  # noqa: E402
    SyntheticSpec,
    sample_n_candidate,
    sample_three_candidate,
    sample_two_candidate,
)

__all__ = [
    "AbstentionMode", "AntagonismReport", "ComparisonReport", "CurationConfig",
    "ElectionMatrix", "EstebanRayParams", "LocationRecord", "SyntheticSpec", "VoteRecord",
    "between_antagonism", "build_matrix", "comparison_report", "curate", "dispersion",
    "effective_number_of_candidates", "esteban_ray", "margin_of_victory",
    "polarization_report", "read_election_file", "reaggregate", "reynal_querol",
    "sample_n_candidate", "sample_three_candidate", "sample_two_candidate", "to_records",
    "validate", "within_antagonism", "write_election_file",
]
