"""Print the attractor of every built-in fixture and its scaling function on a decade ladder."""
import argparse

from levyzoom.attraction import BracketingFailure, ScalingFunction, classify
from levyzoom.fixtures import FIXTURES, fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--decades", type=int, default=8, help="smallest eps is 10^-decades")
    args = ap.parse_args()
    ladder = [10.0 ** -j for j in range(2, args.decades + 1)]
    print(f"{'fixture':<22}{'attractor':<16}" + "".join(f"{f'a({e:.0e})':>11}" for e in ladder))
    for name in FIXTURES:
        m = fixture(name)
        att = classify(m)
        cells = []
        if att.is_limit:
            sf = ScalingFunction(m, att)
            for e in ladder:
                try:
                    cells.append(f"{sf(e):11.3e}")
                except BracketingFailure:
                    cells.append(f"{'out':>11}")
        print(f"{name:<22}{att.variant:<16}" + "".join(cells))


if __name__ == "__main__":
    main()
