"""Fit annihilating operators for a few families and test the integer-root condition.

Usage: python demos/picard_fuchs.py [ID ...]   (default: 1 2-12 2-35 3-27 P2)
"""

from __future__ import annotations

import sys

from fanoperiods.catalog import load_catalog
from fanoperiods.pfops import is_manifold_type, search_with_growth


def main(ids) -> None:
    cat = load_catalog()
    for fid in ids:
        grown = search_with_growth(lambda n: cat.regularized_period(fid, n))
        res = grown.result
        if res.operator is None:
            print(f"{fid}: {res.status} with {grown.length} coefficients")
            continue
        verdict = "manifold type" if is_manifold_type(res.operator) else "not manifold type"
        print(f"{fid}: order {res.order}, degree {res.degree} ({verdict}, "
              f"checked through t^{grown.checked_to})")
        print("   ", res.operator.to_text())


if __name__ == "__main__":
    main(sys.argv[1:] or ["1", "2-12", "2-35", "3-27", "P2"])
