"""Interference fringes of Kitten states on the circle perpendicular to y.

    python demos/wigner_fringes.py [S]
"""

import sys

import numpy as np

from spincats.spin import KittenSpec, Spin, kitten_state
from spincats.wigner import fringe_count, great_circle_values, wigner_function


def main(S=10):
    spin = Spin.of(S)
    for m in range(1, S + 1):
        state = kitten_state(KittenSpec(spin, m))
        w = great_circle_values(state, samples=72)
        strip = "".join("+" if v > 0 else "-" for v in w)
        norm = wigner_function(state).normalization()
        print(f"m = {m:2d}  fringes {fringe_count(state):2d}  norm {norm:.12f}  {strip}")
    print(f"\nmin W over the circle for m = S: {np.min(great_circle_values(kitten_state(KittenSpec(spin, S)))):.3f}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
