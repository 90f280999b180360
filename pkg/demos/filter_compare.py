"""Compare Fréchet, statistical and f-statistical filters on one testbed.

Run with ``python demos/filter_compare.py``.
"""

import argparse

from filterlab.filters import includes, member, parse_filter, standard_testbed

FILTERS = ("frechet", "stat", "fstat(log1p)", "fstat(sqrt)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=1e6)
    args = ap.parse_args()
    h = int(args.horizon)
    filters = [parse_filter(t) for t in FILTERS]

    print("membership, one row per set")
    print(f"{'set':<24}" + "".join(f"{t:>14}" for t in FILTERS))
    for A in standard_testbed():
        row = [member(F, A, h).outcome for F in filters]
        print(f"{str(A):<24}" + "".join(f"{o:>14}" for o in row))

    print()
    print("inclusions over the testbed")
    for F1 in filters:
        for F2 in filters:
            if F1 is F2:
                continue
            v = includes(F1, F2, standard_testbed(), h)
            note = f"  witness {v.diagnostics['witnesses'][0]}" if v.fails else ""
            print(f"  {str(F1):>14} inside {str(F2):<14} {v.outcome}{note}")


if __name__ == "__main__":
    main()
