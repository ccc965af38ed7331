"""The family catalog: one record per Fano family, loaded from JSON.

Each record names the engine that produces its quantum period, the
parameters for that engine and the printed regularized expansion used as
golden data.  Records may also carry extra constructions (``cross_checks``)
that must produce the same period.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

from .engines import (
    WeightData, WpsSpec, product_period, toric_ci_period, toric_period, wps_ci_period,
)
from .grassmann import GrassmannBundleSpec, grassmann_period, grassmann_raw
from .series import PowerSeries, as_fraction, format_rational, normalize_prefactor, regularize
from .sumdsl import SumSpec, evaluate, evaluate_raw, parse

DEFAULT_PATH = Path(__file__).with_name("data") / "catalog.json"
ENV_VAR = "FANO_CATALOG"


class CatalogError(ValueError):
    pass


class UnknownFamilyError(CatalogError, KeyError):
    def __str__(self) -> str:
        return f"unknown family id {self.args[0]!r}"


# constructions ------------------------------------------------------------

@dataclass(frozen=True)
class Toric:
    weights: WeightData
    kind = "toric"

    def sum_spec(self) -> SumSpec:
        return toric_period(self.weights)

    def to_dict(self) -> dict:
        return {"type": self.kind, "weights": [list(r) for r in self.weights.matrix]}


@dataclass(frozen=True)
class ToricCI:
    weights: WeightData
    kind = "toric_ci"

    def sum_spec(self) -> SumSpec:
        return toric_ci_period(self.weights)

    def to_dict(self) -> dict:
        return {"type": self.kind, "weights": [list(r) for r in self.weights.matrix],
                "bundles": [list(b) for b in self.weights.bundle_rows]}


@dataclass(frozen=True)
class WpsCI:
    spec: WpsSpec
    kind = "wps_ci"

    def sum_spec(self) -> SumSpec:
        return wps_ci_period(self.spec)

    def to_dict(self) -> dict:
        return {"type": self.kind, "weights": list(self.spec.weights),
                "degrees": list(self.spec.degrees)}


@dataclass(frozen=True)
class Grassmann:
    spec: GrassmannBundleSpec
    kind = "grassmann"

    def sum_spec(self) -> None:
        return None

    def to_dict(self) -> dict:
        out = {"type": self.kind, "r": self.spec.r, "n": self.spec.n}
        for name in "abcde":
            value = getattr(self.spec, name)
            if value:
                out[name] = value
        return out


@dataclass(frozen=True)
class ClosedForm:
    spec: SumSpec
    text: str
    kind = "closed_form"

    def sum_spec(self) -> SumSpec:
        return self.spec

    def to_dict(self) -> dict:
        return {"type": self.kind, "spec": self.text}


@dataclass(frozen=True)
class Product:
    factors: tuple[str, str]
    kind = "product"

    def sum_spec(self) -> None:
        return None

    def to_dict(self) -> dict:
        return {"type": self.kind, "factors": list(self.factors)}


Construction = Union[Toric, ToricCI, WpsCI, Grassmann, ClosedForm, Product]


def construction_from_dict(data: dict) -> Construction:
    kind = data.get("type")
    if kind == "toric":
        return Toric(WeightData.of(data["weights"]))
    if kind == "toric_ci":
        return ToricCI(WeightData.of(data["weights"], data["bundles"]))
    if kind == "wps_ci":
        return WpsCI(WpsSpec.of(data["weights"], data["degrees"]))
    if kind == "grassmann":
        params = {k: int(data[k]) for k in ("r", "n", "a", "b", "c", "d", "e") if k in data}
        return Grassmann(GrassmannBundleSpec(**params))
    if kind == "closed_form":
        return ClosedForm(parse(data["spec"]), data["spec"])
    if kind == "product":
        a, b = data["factors"]
        return Product((str(a), str(b)))
    raise CatalogError(f"unknown construction type {kind!r}")


# records --------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyRecord:
    id: str
    name: str
    dimension: int
    rank: int
    construction: Construction
    expected_regularized: tuple[Fraction, ...]
    minkowski_id: Optional[int] = None
    very_ample: Optional[bool] = None
    prefactor: Optional[int] = None
    cross_checks: tuple[Construction, ...] = ()
    expected_unregularized: Optional[tuple[Fraction, ...]] = None
    notes: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "FamilyRecord":
        try:
            unreg = data.get("expected_unregularized")
            return cls(
                id=str(data["id"]),
                name=str(data.get("name", data["id"])),
                dimension=int(data.get("dimension", 3)),
                rank=int(data.get("rank", 1)),
                construction=construction_from_dict(data["construction"]),
                expected_regularized=tuple(as_fraction(v) for v in data["expected_regularized"]),
                minkowski_id=data.get("minkowski_id"),
                very_ample=data.get("very_ample"),
                prefactor=data.get("prefactor"),
                cross_checks=tuple(construction_from_dict(c) for c in data.get("cross_checks", ())),
                expected_unregularized=tuple(as_fraction(v) for v in unreg) if unreg else None,
                notes=data.get("notes", ""),
            )
        except CatalogError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CatalogError(f"bad record {data.get('id', '?')!r}: {exc}") from exc

    def to_dict(self) -> dict:
        out = {
            "id": self.id, "name": self.name, "dimension": self.dimension, "rank": self.rank,
            "construction": self.construction.to_dict(),
            "expected_regularized": [format_rational(v) for v in self.expected_regularized],
        }
        if self.expected_unregularized is not None:
            out["expected_unregularized"] = [format_rational(v) for v in self.expected_unregularized]
        out["minkowski_id"] = self.minkowski_id
        out["very_ample"] = self.very_ample
        out["prefactor"] = self.prefactor
        if self.cross_checks:
            out["cross_checks"] = [c.to_dict() for c in self.cross_checks]
        if self.notes:
            out["notes"] = self.notes
        return out

    @property
    def is_threefold(self) -> bool:
        return self.dimension == 3


@dataclass
class VerificationReport:
    id: str
    passed: bool
    order: int
    degree: Optional[int] = None
    expected: Optional[Fraction] = None
    found: Optional[Fraction] = None
    seconds: float = 0.0
    error: str = ""

    def __str__(self) -> str:
        if self.passed:
            return f"PASS {self.id} (to t^{self.order})"
        if self.error:
            return f"FAIL {self.id}: {self.error}"
        return (f"FAIL {self.id} at degree {self.degree}: expected "
                f"{format_rational(self.expected)}, computed {format_rational(self.found)}")


@dataclass
class VerificationSummary:
    reports: list[VerificationReport] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> int:
        return sum(1 for r in self.reports if r.passed)

    @property
    def failed(self) -> int:
        return len(self.reports) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def __str__(self) -> str:
        return f"{self.passed}/{len(self.reports)} pass in {self.seconds:.1f}s"


def compare(expected: Iterable[Fraction], computed: PowerSeries) -> Optional[tuple[int, Fraction, Fraction]]:
    """First ``(degree, expected, computed)`` disagreement, or None."""
    for d, want in enumerate(expected):
        got = computed[d]
        if got != want:
            return d, want, got
    return None


# the catalog ---------------------------------------------------------------

class Catalog:
    """Immutable collection of family records, keyed by id in file order."""

    def __init__(self, records: Iterable[FamilyRecord], source: Optional[str] = None):
        self._records: dict[str, FamilyRecord] = {}
        for rec in records:
            if rec.id in self._records:
                raise CatalogError(f"duplicate family id {rec.id!r}")
            self._records[rec.id] = rec
        self.source = source
        self._periods: dict[str, PowerSeries] = {}
        self._check()

    def _check(self) -> None:
        seen_minkowski: dict[int, str] = {}
        for rec in self._records.values():
            exp = rec.expected_regularized
            if len(exp) < 2 or exp[0] != 1 or exp[1] != 0:
                raise CatalogError(f"{rec.id}: expected expansion must start 1 + 0 t")
            for con in (rec.construction,) + rec.cross_checks:
                if isinstance(con, Product):
                    for ref in con.factors:
                        if ref not in self._records:
                            raise CatalogError(f"{rec.id}: product factor {ref!r} is not in the catalog")
            if rec.very_ample is None:
                if rec.minkowski_id is not None:
                    raise CatalogError(f"{rec.id}: minkowski_id without a very_ample flag")
                continue
            if rec.very_ample != (rec.minkowski_id is not None):
                raise CatalogError(f"{rec.id}: minkowski_id must be present exactly when very_ample")
            if rec.minkowski_id is not None:
                other = seen_minkowski.setdefault(rec.minkowski_id, rec.id)
                if other != rec.id:
                    raise CatalogError(f"{rec.id} and {other} share minkowski_id {rec.minkowski_id}")

    # access
    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records.values())

    def __contains__(self, family_id: str) -> bool:
        return family_id in self._records

    @property
    def ids(self) -> list[str]:
        return list(self._records)

    def get(self, family_id: str) -> FamilyRecord:
        try:
            return self._records[family_id]
        except KeyError:
            raise UnknownFamilyError(family_id) from None

    def select(self, criteria: Union[str, dict, None] = None) -> list[FamilyRecord]:
        """Records matching ``key=value`` filters on rank, dimension,
        very_ample or id, e.g. ``"rank=2,very_ample=true"``."""
        wanted = parse_filter(criteria)
        out = []
        for rec in self:
            if all(_field_matches(rec, k, v) for k, v in wanted.items()):
                out.append(rec)
        return out

    # periods
    def construction_period(self, con: Construction, order: int) -> PowerSeries:
        if isinstance(con, Grassmann):
            return grassmann_period(con.spec, order)
        if isinstance(con, Product):
            a, b = (self.quantum_period(f, order) for f in con.factors)
            return product_period(a, b)
        return evaluate(con.sum_spec(), order)

    def construction_prefactor(self, con: Construction) -> Optional[Fraction]:
        """The ``c`` that normalization strips from the raw sum, or None for
        products, which are built from already normalized factors."""
        if isinstance(con, Product):
            return None
        if isinstance(con, Grassmann):
            raw = grassmann_raw(con.spec, 1)
        else:
            raw = evaluate_raw(con.sum_spec(), 1)
        return normalize_prefactor(raw)[0]

    def quantum_period(self, family_id: str, order: int) -> PowerSeries:
        """Normalized, unregularized quantum period to ``t^order``."""
        rec = self.get(family_id)
        cached = self._periods.get(family_id)
        if cached is not None and cached.order >= order:
            return cached.truncate(order)
        series = self.construction_period(rec.construction, order)
        self._periods[family_id] = series
        return series

    def regularized_period(self, family_id: str, order: int) -> PowerSeries:
        return regularize(self.quantum_period(family_id, order))

    # verification
    def verify_family(self, family_id: str, order: Optional[int] = None) -> VerificationReport:
        """Compare the computed regularized period with the printed one.

        ``order`` defaults to the length of the printed expansion and may
        not exceed it.
        """
        rec = self.get(family_id)
        top = len(rec.expected_regularized) - 1
        n = top if order is None else min(order, top)
        start = time.perf_counter()
        try:
            got = self.regularized_period(family_id, n)
        except Exception as exc:  # engine failures are report payload
            return VerificationReport(rec.id, False, n, error=f"{type(exc).__name__}: {exc}",
                                      seconds=time.perf_counter() - start)
        bad = compare(rec.expected_regularized[:n + 1], got)
        if bad is None and rec.expected_unregularized is not None:
            plain = rec.expected_unregularized
            bad = compare(plain[:n + 1], self.quantum_period(family_id, min(n, len(plain) - 1)))
        seconds = time.perf_counter() - start
        if bad is None:
            return VerificationReport(rec.id, True, n, seconds=seconds)
        d, want, found = bad
        return VerificationReport(rec.id, False, n, d, want, found, seconds)

    def verify_all(self, criteria: Union[str, dict, None] = None, order: Optional[int] = None,
                   jobs: int = 1) -> VerificationSummary:
        ids = [r.id for r in self.select(criteria)]
        start = time.perf_counter()
        if jobs > 1 and len(ids) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(_verify_worker, [(self, i, order) for i in ids]))
        else:
            reports = [self.verify_family(i, order) for i in ids]
        return VerificationSummary(reports, time.perf_counter() - start)

    # serialization
    def to_json(self) -> str:
        body = ",\n".join(json.dumps(r.to_dict(), ensure_ascii=False) for r in self)
        return '{"families": [\n' + body + "\n]}\n"

    @classmethod
    def from_json(cls, text: str, source: Optional[str] = None) -> "Catalog":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
        if not isinstance(data, dict) or not isinstance(data.get("families"), list):
            raise CatalogError('catalog must be an object with a "families" list')
        return cls((FamilyRecord.from_dict(r) for r in data["families"]), source)

    def __getstate__(self):
        return {"records": list(self._records.values()), "source": self.source}

    def __setstate__(self, state):
        self.__init__(state["records"], state["source"])


def _verify_worker(args) -> VerificationReport:
    catalog, family_id, order = args
    return catalog.verify_family(family_id, order)


_FILTER_FIELDS = ("rank", "dimension", "very_ample", "id")


def parse_filter(criteria: Union[str, dict, None]) -> dict:
    if not criteria:
        return {}
    if isinstance(criteria, dict):
        items = criteria.items()
    else:
        items = []
        for part in str(criteria).split(","):
            if "=" not in part:
                raise CatalogError(f"filter {part!r} is not of the form key=value")
            key, value = part.split("=", 1)
            items.append((key.strip(), value.strip()))
    out = {}
    for key, value in items:
        if key not in _FILTER_FIELDS:
            raise CatalogError(f"cannot filter on {key!r}; use one of {', '.join(_FILTER_FIELDS)}")
        out[key] = value
    return out


def _field_matches(rec: FamilyRecord, key: str, value) -> bool:
    actual = getattr(rec, key)
    if isinstance(value, str):
        text = value.lower()
        if key == "very_ample":
            if text in ("true", "false"):
                return actual is (text == "true")
            raise CatalogError(f"very_ample filter takes true or false, not {value!r}")
        if key in ("rank", "dimension"):
            try:
                return actual == int(value)
            except ValueError:
                raise CatalogError(f"{key} filter takes an integer, not {value!r}") from None
        return actual == value
    return actual == value


_DEFAULT: dict[str, Catalog] = {}


def catalog_path() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else DEFAULT_PATH


def load_catalog(path: Union[str, Path, None] = None) -> Catalog:
    """Load the catalog from ``path``, ``$FANO_CATALOG`` or the bundled file.

    The bundled file is loaded once per process and shared.
    """
    target = Path(path) if path is not None else catalog_path()
    key = str(target.resolve())
    if path is None and key in _DEFAULT:
        return _DEFAULT[key]
    try:
        text = target.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {target}: {exc}") from exc
    cat = Catalog.from_json(text, str(target))
    if path is None:
        _DEFAULT[key] = cat
    return cat


def quantum_period(family_id: str, order: int) -> PowerSeries:
    return load_catalog().quantum_period(family_id, order)


def regularized_period(family_id: str, order: int) -> PowerSeries:
    return load_catalog().regularized_period(family_id, order)


def verify_family(family_id: str, order: Optional[int] = None) -> VerificationReport:
    return load_catalog().verify_family(family_id, order)


def verify_all(criteria: Union[str, dict, None] = None, order: Optional[int] = None,
               jobs: int = 1) -> VerificationSummary:
    return load_catalog().verify_all(criteria, order, jobs)


__all__ = [
    "Catalog", "CatalogError", "ClosedForm", "Construction", "FamilyRecord", "Grassmann",
    "Product", "Toric", "ToricCI", "UnknownFamilyError", "VerificationReport",
    "VerificationSummary", "WpsCI", "catalog_path", "compare", "construction_from_dict",
    "load_catalog", "parse_filter", "quantum_period", "regularized_period", "verify_all",
    "verify_family",
]
