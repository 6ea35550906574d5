#!/usr/bin/env python3
"""Round-trip demo: simulate coincidence counts, analyze them, print a report.

Samples multinomial counts for a down-conversion source at the canonical
analyzer angles, writes them to CSV, re-ingests the file, and runs the full
analysis, printing the text report to stdout.
"""

import argparse
import tempfile
from pathlib import Path

from bellkit.experiments import PdcConfig, two_channel_rates
from bellkit.harness import (
    CANONICAL_PHI,
    AnalysisConfig,
    TwoChannelCounts,
    ingest_counts,
    render_report,
    run_analysis,
)
from bellkit.search import sample_counts


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--visibility", type=float, default=0.95)
    parser.add_argument("--efficiency", type=float, default=0.1)
    parser.add_argument("--pairs", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=20260826)
    args = parser.parse_args()

    cfg = PdcConfig(v=args.visibility, eta=args.efficiency, r0=1.0)
    stats = {
        pair: TwoChannelCounts(*two_channel_rates(cfg, phi))
        for pair, phi in CANONICAL_PHI.items()
    }
    dataset = sample_counts(stats, args.pairs, seed=args.seed)

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "counts.csv"
        dataset.save(path)
        report = run_analysis(ingest_counts(path), AnalysisConfig())

    print(render_report(report, "text"))


if __name__ == "__main__":
    main()
