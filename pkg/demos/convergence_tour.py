"""Limits, Cauchy checks and the composition identity on small examples.

Run with ``python demos/convergence_tour.py``.
"""

import warnings

import numpy as np

from filterlab.converge import COMPOSITION_SUITE, ball, composition_pair, extract_cauchy_from_base, f_cauchy_check, f_limit_check, parse_sequence
from filterlab.filters import Frechet, Statistical, TrivialFilterWarning
from filterlab.spaces import Vector

H = 10**6


def main():
    x = parse_sequence("perturbed(scalar(1/n), squares, 1)")
    stat = Statistical(tolerance=1e-2)
    print("x_n = 1/n with spikes of height 1 on the squares")
    print("  Fréchet limit 0:    ", f_limit_check(x, Vector([0.0]), Frechet(), None, H).outcome)
    print("  statistical limit 0:", f_limit_check(x, Vector([0.0]), stat, None, H).outcome)
    print("  statistically Cauchy:", f_cauchy_check(x, stat, None, H).outcome)

    print()
    print("x∘g along F against x along g[F]")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrivialFilterWarning)
        for seq, space, g, F in COMPOSITION_SUITE:
            a, b = composition_pair(seq, space, g, F)
            print(f"  {seq:<28} g={g:<12} F={F:<13} {a.outcome:<12} {b.outcome}")

    print()
    c = np.array([0.3, -0.7])
    ex = extract_cauchy_from_base([ball(c, 2.0**-k) for k in range(1, 21)])
    err = np.linalg.norm(ex.points - c, axis=1)
    print("points picked from nested balls B(c, 2^-k)")
    for n in (1, 5, 10, 20):
        print(f"  n={n:<3} |x_n - c| = {err[n - 1]:.2e}  bound {2.0**-n:.2e}")
    print("  audit:", ex.audit.outcome)


if __name__ == "__main__":
    main()
