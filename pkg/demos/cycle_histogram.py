"""Settled-cycle statistics from |S,0>_x compared with 2 d^2.

    python demos/cycle_histogram.py [S] [n_trajectories]
"""

import sys

from spincats.spin import Spin
from spincats.trajectory import TrajectoryConfig, cycle_probabilities, run_histogram


def main(S=10, n=5000):
    spin = Spin.of(S)
    hist = run_histogram(TrajectoryConfig(spin, upsilon=1.0, t_max=20.0, seed=1), n)
    predicted = cycle_probabilities(spin)
    print(f"S = {S}, {n} trajectories, {hist.unsettled} unsettled")
    print(f"{'m':>3} {'observed':>9} {'predicted':>9}")
    for m, f in hist.frequencies().items():
        print(f"{m:>3} {f:9.4f} {predicted[m]:9.4f}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
