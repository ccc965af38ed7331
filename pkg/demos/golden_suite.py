"""Verify every catalog family against its stored expansion and print a table."""

from __future__ import annotations

from fanoperiods.catalog import load_catalog


def main() -> None:
    cat = load_catalog()
    summary = cat.verify_all()
    for rep in summary.reports:
        rec = cat.get(rep.id)
        print(f"{rep.id:>6}  {rec.name:<12} {rec.construction.kind:<11} {rep}")
    print(summary)


if __name__ == "__main__":
    main()
