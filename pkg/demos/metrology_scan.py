"""QFI of every Kitten state and the probability of beating the initial state.

    python demos/metrology_scan.py [S]
"""

import sys

from spincats.metrology import m_crit, p_crit, p_crit_piecewise, qfi_scan
from spincats.spin import KittenSpec, Spin, kitten_state


def main(S=30):
    spin = Spin.of(S)
    baseline = 2 * S * (S + 1)
    print(f"S = {S}: initial QFI {baseline}, m_crit = {m_crit(spin):.3f}")
    print(f"{'m':>3} {'QFI_y':>8} {'QFI_opt':>9} {'theta':>6} {'phi':>6}")
    for m in range(S + 1):
        scan = qfi_scan(kitten_state(KittenSpec(spin, m)))
        direction, best = scan.spectral
        mark = "*" if best > baseline else " "
        print(f"{m:>3} {scan.axis_values()['y']:8.1f} {best:9.1f} {direction.theta:6.3f} {direction.phi:6.3f} {mark}")
    print("\n  S  p_crit  piecewise")
    for s in (10, 20, 50, 100, 200):
        print(f"{s:>3} {p_crit(Spin.of(s)):7.4f} {p_crit_piecewise(Spin.of(s)):9.4f}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
