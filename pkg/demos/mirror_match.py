"""Compare each bundled Laurent polynomial with the family it is meant to mirror,
then show what a mismatch looks like."""

from __future__ import annotations

from fanoperiods.laurent import load_mirror, matches_family, period_series, shipped_mirrors


def main() -> None:
    for name, fid, f in shipped_mirrors():
        print(f"{name:<22} {len(f.terms)} terms  {matches_family(f, fid, 12)}")
    p3 = load_mirror("p3_mirror.json")
    print("period of x+y+z+1/(xyz):", ", ".join(period_series(p3, 12).to_strings()))
    print(matches_family(p3, "2", 12))


if __name__ == "__main__":
    main()
