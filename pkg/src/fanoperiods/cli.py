"""Command-line front end.

    fanoperiods period ID [--order N] [--regularized] [--json]
    fanoperiods verify (--all | ID...) [--filter k=v,...] [--order N] [--jobs K]
    fanoperiods compare ID FILE [--order N]
    fanoperiods pf ID [--order N] [--max-ord R] [--max-deg S]
    fanoperiods export [--format json|csv] [--out PATH] [--order N]

Exit status is 0 on success, 1 when a check fails (verification, mirror
comparison, operator search) and 2 on usage errors such as an unknown id.
``FANO_CATALOG`` points every command at another catalog file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import pfops
from .catalog import Catalog, CatalogError, UnknownFamilyError, load_catalog
from .laurent import compare_series, load_mirror
from .series import format_rational, series_from_strings

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class OutputRecord:
    id: str
    coefficients: list[str]
    minkowski_id: Optional[int] = None
    operator: Optional[str] = None
    verdict: Optional[str] = None
    seconds: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        out = {"id": self.id, "minkowski_id": self.minkowski_id, "coefficients": self.coefficients}
        if self.operator is not None:
            out["operator"] = self.operator
        if self.verdict is not None:
            out["verdict"] = self.verdict
        out.update(self.extra)
        if timing and self.seconds is not None:
            out["seconds"] = round(self.seconds, 3)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "OutputRecord":
        known = {"id", "minkowski_id", "coefficients", "operator", "verdict", "seconds"}
        return cls(data["id"], list(data["coefficients"]), data.get("minkowski_id"),
                   data.get("operator"), data.get("verdict"), data.get("seconds"),
                   {k: v for k, v in data.items() if k not in known})


def _catalog() -> Catalog:
    try:
        return load_catalog()
    except (OSError, CatalogError) as exc:
        raise UsageError(f"cannot load catalog: {exc}") from exc


def _record(cat: Catalog, family_id: str):
    try:
        return cat.get(family_id)
    except UnknownFamilyError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


# commands ------------------------------------------------------------------

def cmd_period(args, out) -> int:
    cat = _catalog()
    rec = _record(cat, args.id)
    start = time.perf_counter()
    series = (cat.regularized_period if args.regularized else cat.quantum_period)(rec.id, args.order)
    seconds = time.perf_counter() - start
    values = series.to_strings()
    if args.json:
        record = OutputRecord(rec.id, values, rec.minkowski_id, seconds=seconds,
                              extra={"regularized": args.regularized})
        _emit(json.dumps(record.to_dict(not args.no_timing)), out)
    else:
        _emit("\n".join(values), out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    cat = _catalog()
    if args.all or args.filter:
        criteria = args.filter
        if args.ids:
            raise UsageError("give either ids or --all/--filter, not both")
        summary = cat.verify_all(criteria, args.order, args.jobs)
        reports = summary.reports
        seconds = summary.seconds
    elif args.ids:
        for i in args.ids:
            _record(cat, i)
        start = time.perf_counter()
        reports = [cat.verify_family(i, args.order) for i in args.ids]
        seconds = time.perf_counter() - start
    else:
        raise UsageError("verify needs an id or --all")
    passed = sum(1 for r in reports if r.passed)
    if args.json:
        rows = []
        for r in reports:
            row = {"id": r.id, "passed": r.passed, "order": r.order}
            if not r.passed:
                row.update(degree=r.degree, error=r.error or None,
                           expected=None if r.expected is None else format_rational(r.expected),
                           computed=None if r.found is None else format_rational(r.found))
            if not args.no_timing:
                row["seconds"] = round(r.seconds, 3)
            rows.append(row)
        _emit(json.dumps({"passed": passed, "total": len(reports), "reports": rows}), out)
    else:
        for r in reports:
            line = str(r)
            if not args.no_timing:
                line += f"  [{r.seconds:.3f}s]"
            _emit(line, out)
        total = f"{passed}/{len(reports)} pass"
        if not args.no_timing:
            total += f" in {seconds:.1f}s"
        _emit(total, out)
    return EXIT_OK if passed == len(reports) else EXIT_FAIL


def cmd_compare(args, out) -> int:
    cat = _catalog()
    rec = _record(cat, args.id)
    try:
        poly = load_mirror(args.file)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read Laurent polynomial {args.file}: {exc}") from exc
    report = compare_series(poly, cat.regularized_period(rec.id, args.order), rec.id)
    if args.json:
        body = {"id": rec.id, "order": args.order, "match": report.matches}
        if not report.matches:
            body.update(degree=report.first_mismatch, expected=format_rational(report.expected),
                        found=format_rational(report.found))
        _emit(json.dumps(body), out)
    else:
        _emit(str(report), out)
    return EXIT_OK if report.matches else EXIT_FAIL


def cmd_pf(args, out) -> int:
    cat = _catalog()
    rec = _record(cat, args.id)
    start = time.perf_counter()
    if args.order is None:
        grown = pfops.search_with_growth(lambda n: cat.regularized_period(rec.id, n),
                                         args.max_ord, args.max_deg)
        res = grown.result
        series = cat.regularized_period(rec.id, grown.checked_to)
        used = grown.length
    else:
        series = cat.regularized_period(rec.id, args.order)
        res = pfops.search_annihilator(series, args.max_ord, args.max_deg)
        used = len(series)
    seconds = time.perf_counter() - start
    body = {"id": rec.id, "coefficients_used": used, "status": res.status}
    if res.operator is not None:
        manifold = pfops.is_manifold_type(res.operator)
        body.update(order=res.order, degree=res.degree, nullity=res.nullity, minimal=res.minimal,
                    operator=res.operator.to_text(), annihilates=pfops.annihilates(res.operator, series),
                    manifold_type=manifold)
    if args.json:
        if not args.no_timing:
            body["seconds"] = round(seconds, 3)
        _emit(json.dumps(body), out)
    elif res.operator is None:
        detail = {"none": "none found", "exceeds_cap": "none found within the caps",
                  "insufficient_coefficients": f"need more coefficients for shape "
                                               f"({res.order}, {res.degree})"}[res.status]
        _emit(f"{rec.id}: {detail}", out)
    else:
        _emit(f"{rec.id}: order {res.order}, degree {res.degree}, nullity {res.nullity}"
              + ("" if res.minimal else " (lower order not ruled out)"), out)
        _emit(body["operator"], out)
        _emit("manifold type" if body["manifold_type"] else "not manifold type", out)
    return EXIT_OK if res.operator is not None else EXIT_FAIL


def _export_one(args) -> OutputRecord:
    cat, family_id, order = args
    start = time.perf_counter()
    series = cat.regularized_period(family_id, order)
    rec = cat.get(family_id)
    return OutputRecord(rec.id, series.to_strings(), rec.minkowski_id,
                        seconds=time.perf_counter() - start)


def export_records(cat: Catalog, order: int, jobs: int = 1) -> list[OutputRecord]:
    work = [(cat, i, order) for i in cat.ids]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_export_one, work))
    return [_export_one(w) for w in work]


def render_export(records: Sequence[OutputRecord], fmt: str, timing: bool = True) -> str:
    if fmt == "json":
        return json.dumps([r.to_dict(timing) for r in records], indent=1) + "\n"
    width = max(len(r.coefficients) for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "minkowski_id"] + [f"c{d}" for d in range(width)])
    for r in records:
        mink = "" if r.minkowski_id is None else str(r.minkowski_id)
        writer.writerow([r.id, mink] + r.coefficients)
    return buf.getvalue()


def read_export(text: str, fmt: str) -> list[OutputRecord]:
    """Parse the output of ``export`` back into records."""
    if fmt == "json":
        return [OutputRecord.from_dict(d) for d in json.loads(text)]
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for row in rows[1:]:
        mink = int(row[1]) if row[1] else None
        values = series_from_strings(row[2:]).to_strings()
        out.append(OutputRecord(row[0], values, mink))
    return out


def cmd_export(args, out) -> int:
    cat = _catalog()
    records = export_records(cat, args.order, args.jobs)
    text = render_export(records, args.format, not args.no_timing)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit(f"wrote {len(records)} records to {args.out}", out)
    else:
        out.write(text)
    return EXIT_OK


# parser --------------------------------------------------------------------

def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanoperiods",
                                     description="Exact quantum periods of Fano threefolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, json_flag=True):
        if json_flag:
            p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--no-timing", action="store_true", help="omit timings for reproducible output")

    p = sub.add_parser("period", help="print a period series")
    p.add_argument("id")
    p.add_argument("--order", type=_nonneg, default=10)
    p.add_argument("--regularized", action="store_true", help="print the regularized period")
    common(p)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("verify", help="check computed periods against the stored expansions")
    p.add_argument("ids", nargs="*")
    p.add_argument("--all", action="store_true")
    p.add_argument("--filter", help="e.g. rank=2,very_ample=true")
    p.add_argument("--order", type=_nonneg, default=None,
                   help="check only through this degree (default: the whole stored expansion)")
    p.add_argument("--jobs", type=_positive, default=1)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="compare a Laurent polynomial's period with a family")
    p.add_argument("id")
    p.add_argument("file", help="Laurent polynomial JSON file (bundled mirror names also work)")
    p.add_argument("--order", type=_nonneg, default=12)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pf", help="fit an annihilating differential operator")
    p.add_argument("id")
    p.add_argument("--order", type=_nonneg, default=None,
                   help="fit against the series through t^N (default: grow the series in stages)")
    p.add_argument("--max-ord", type=_nonneg, default=pfops.ORDER_CAP)
    p.add_argument("--max-deg", type=_nonneg, default=pfops.DEGREE_CAP)
    common(p)
    p.set_defaults(func=cmd_pf)

    p = sub.add_parser("export", help="write every family's regularized period")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.add_argument("--order", type=_nonneg, default=10)
    p.add_argument("--jobs", type=_positive, default=1)
    common(p, json_flag=False)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
