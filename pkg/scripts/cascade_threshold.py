#!/usr/bin/env python3
"""Tabulate why atomic-cascade photon pairs cannot produce a genuine violation.

Prints the aperture-optimized left side of the single-channel coincidence
inequality for a range of detector efficiencies, plus the minimum efficiency
required for a violation as a function of visibility.
"""

import math

import numpy as np

from bellkit.experiments import (
    NoViolationPossibleError,
    bi1_min_efficiency,
    cascade_bi_maximum,
)


def main() -> None:
    print("cascade maximum of the coincidence statistic (bound: 2)")
    print(f"{'zeta':>6} {'single':>10} {'both':>10}")
    for zeta in (0.2, 0.4, 0.6, 0.8, 1.0):
        single, _ = cascade_bi_maximum(zeta, both_detectors=False)
        both, _ = cascade_bi_maximum(zeta, both_detectors=True)
        print(f"{zeta:6.2f} {single:10.4f} {both:10.4f}")

    print()
    print("minimum efficiency for a genuine violation vs visibility")
    print(f"{'V':>6} {'eta_min':>10}")
    for v in np.linspace(0.65, 1.0, 8):
        try:
            eta_min = f"{bi1_min_efficiency(float(v)):10.6f}"
        except NoViolationPossibleError:
            eta_min = f"{'none':>10}"
        print(f"{v:6.3f} {eta_min}")
    print()
    print(f"threshold at V = 1: 2(sqrt 2 - 1) = {2 * (math.sqrt(2) - 1):.6f}")


if __name__ == "__main__":
    main()
