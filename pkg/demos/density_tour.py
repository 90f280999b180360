"""Walk through f-densities of a few index sets.

Run with ``python demos/density_tour.py [--horizon 1e8]``.
"""

import argparse

from filterlab.modulus import builtin_modulus
from filterlab.natset import f_density, parse_set

SETS = ("evens", "squares", "cubes", "primes", "blocks(pow2)")
MODULI = ("identity", "log1p", "sqrt")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=1e7)
    args = ap.parse_args()
    h = int(args.horizon)

    print(f"{'set':<14}" + "".join(f"{m:>30}" for m in MODULI))
    for text in SETS:
        A = parse_set(text)
        cells = []
        for m in MODULI:
            est = f_density(A, builtin_modulus(m), h)
            if est.status == "converged":
                cells.append(f"{est.value:.4f}")
            else:
                cells.append(f"  {est.status} [{est.tail_inf:.3f}, {est.tail_sup:.3f}]")
        print(f"{text:<14}" + "".join(f"{c:>30}" for c in cells))

    # a slowly growing modulus sees thin sets as large: squares have
    # identity density 0 but log1p density 1/2
    print()
    print("squares are negligible for the statistical filter but not for the log1p one.")


if __name__ == "__main__":
    main()
