"""Top-n convergence curve for a results file, or a synthetic multi-candidate one.

    python scripts/run_topn_convergence.py --input chile_2021_first_round.csv.gz --level 1
    python scripts/run_topn_convergence.py --candidates 8 --regions 30
"""

import argparse

import numpy as np

from electpol.analysis import robustness_top_n
from electpol.model import VoteRecord
from electpol.pipeline import read_election_file


def synthetic_records(n_cand, n_regions, units_per_region, seed):
    # candidate strength decays geometrically, regional tilt via a Dirichlet draw
    rng = np.random.default_rng(seed)
    base = 0.6 ** np.arange(n_cand)
    recs = []
    for g in range(n_regions):
        tilt = rng.dirichlet(np.full(n_cand, 5.0))
        for u in range(units_per_region):
            p = base * tilt * rng.dirichlet(np.full(n_cand, 20.0))
            votes = rng.multinomial(int(rng.integers(200, 2000)), p / p.sum())
            recs += [VoteRecord(f"G{g:02d}|u{u:03d}", f"c{i}", int(v)) for i, v in enumerate(votes)]
    return recs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input")
    ap.add_argument("--level", type=int, default=1)
    ap.add_argument("--unit-level", type=int, default=None)
    ap.add_argument("--candidates", type=int, default=8)
    ap.add_argument("--regions", type=int, default=30)
    ap.add_argument("--units", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if args.input:
        recs = read_election_file(args.input)
    else:
        recs = synthetic_records(args.candidates, args.regions, args.units, args.seed)
    print("n,coverage,rho_ep,rho_ec")
    for row in robustness_top_n(recs, region_level=args.level, unit_level=args.unit_level):
        print(f"{row.n},{row.coverage:.4f},{row.rho_ep:.4f},{row.rho_ec:.4f}")


if __name__ == "__main__":
    main()
