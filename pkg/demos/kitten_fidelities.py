"""Kitten-state fidelities of an N = 10 ensemble under collective and local noise.

    python demos/kitten_fidelities.py
"""

import numpy as np

from spincats.ensemble import EnsembleConfig, assign_fits, build_liouvillian, evolve, fidelity_fits, kitten_fidelity
from spincats.spin import KittenSpec, Spin


def main(n=10, upsilon=1.0, gamma=0.001):
    spin = Spin(n)
    times = np.linspace(0.0, 5 / (gamma * n), 11)
    cfg = EnsembleConfig(n, upsilon, gamma, times)
    snaps = evolve(cfg.initial_state(), build_liouvillian(cfg), times)
    for m in range(1, spin.int_s + 1):
        curves = {p: np.array([kitten_fidelity(s, KittenSpec(spin, m, p)) for s in snaps]) for p in ("plus", "minus")}
        fits = fidelity_fits(spin, m, upsilon, gamma, n, times)
        a = assign_fits(m, curves["plus"], curves["minus"], fits)
        print(f"m = {m}: growth <- {a.growth}, decay <- {a.decay}, max |fidelity - fit| = {a.max_deviation:.4f}")
        for t, fp, fm in zip(times[::2], curves["plus"][::2], curves["minus"][::2]):
            print(f"    t = {t:6.1f}   plus {fp:.4f}   minus {fm:.4f}")


if __name__ == "__main__":
    main()
