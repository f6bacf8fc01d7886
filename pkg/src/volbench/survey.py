"""Depth-scaling taxonomy, QV-class assignment rules and survey tables.

A depth scaling ``O(n^p log^q n)`` is described by ``(p, q)``; ``q = 0`` is a
pure power and ``q > 0`` means a (poly)logarithmic factor is present.
"""

from __future__ import annotations

import csv
import io
import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources

from .errors import ClassificationError, DatasetError

MAX_CLASS = 5


class EstimateType(str, Enum):
    GATE_DEPTH = "GateDepth"
    GATE_COUNT = "GateCountOrOperations"
    RUNTIME = "RuntimeOrTimeComplexity"


class Era(str, Enum):
    NISQ = "NISQ"
    FT = "FT"


class Area(str, Enum):
    MACHINE_LEARNING = "MachineLearning"
    OPTIMIZATION = "Optimization"
    MANY_BODY = "ManyBodyPhysicsChemistry"
    DATA_HIDING = "QuantumDataHiding"
    NUMERICAL_SOLVERS = "NumericalSolvers"
    OTHER = "Other"


ESTIMATE_ALIASES = {
    "gate-depth": EstimateType.GATE_DEPTH,
    "gate-count": EstimateType.GATE_COUNT,
    "runtime": EstimateType.RUNTIME,
}


@dataclass(frozen=True)
class ScalingDescriptor:
    poly_degree: Fraction
    polylog_degree: int = 0

    def __post_init__(self):
        p = Fraction(self.poly_degree)
        q = int(self.polylog_degree)
        if p < 0 or q < 0:
            raise ClassificationError(f"degrees must be non-negative, got p={p}, q={q}")
        object.__setattr__(self, "poly_degree", p)
        object.__setattr__(self, "polylog_degree", q)

    @property
    def form(self) -> str | None:
        """Name of the matching surveyed depth form, or None if non-conformant."""
        p, q = self.poly_degree, self.polylog_degree
        if p == 0:
            return ("O(1)", "O(log(n))", "O(log^x(n))")[min(q, 2)]
        if p == Fraction(1, 2) and q > 0:
            return "O(sqrt(n) polylog(n))"
        if p in (1, 2) and q > 0:
            return "O(n polylog(n))" if p == 1 else "O(n^2 polylog(n))"
        if q == 0 and p in (1, 2, 3, 5):
            return "O(n)" if p == 1 else f"O(n^{p})"
        if p == 3 and q == 1:
            return "O(n^3 log(n))"
        return None

    @property
    def conformant(self) -> bool:
        return self.form is not None

    def label(self) -> str:
        if self.form:
            return self.form
        p, q = self.poly_degree, self.polylog_degree
        return f"O(n^{p} log^{q}(n))" if q else f"O(n^{p})"

    def is_boundary(self) -> bool:
        """Pure n, n^2 or n^3: the depth sits exactly on a class shape."""
        return self.polylog_degree == 0 and self.poly_degree in (1, 2, 3)


# Row order used when printing tables.
FORM_ORDER = (
    "O(n)",
    "O(log(n))",
    "O(log^x(n))",
    "O(1)",
    "O(sqrt(n) polylog(n))",
    "O(n^2)",
    "O(n polylog(n))",
    "O(n^3)",
    "O(n^2 polylog(n))",
    "O(n^3 log(n))",
    "O(n^5)",
)

# One representative descriptor per surveyed form, with its initial class.
SURVEYED_FORMS = {
    "O(1)": (ScalingDescriptor(0, 0), 1),
    "O(log(n))": (ScalingDescriptor(0, 1), 1),
    "O(log^x(n))": (ScalingDescriptor(0, 2), 1),
    "O(sqrt(n) polylog(n))": (ScalingDescriptor(Fraction(1, 2), 2), 1),
    "O(n)": (ScalingDescriptor(1, 0), 1),
    "O(n polylog(n))": (ScalingDescriptor(1, 2), 2),
    "O(n^2)": (ScalingDescriptor(2, 0), 2),
    "O(n^2 polylog(n))": (ScalingDescriptor(2, 2), 3),
    "O(n^3)": (ScalingDescriptor(3, 0), 3),
    "O(n^3 log(n))": (ScalingDescriptor(3, 1), 4),
    "O(n^5)": (ScalingDescriptor(5, 0), 5),
}


@dataclass(frozen=True)
class AlgorithmRecord:
    id: str
    scaling: ScalingDescriptor
    estimate_type: EstimateType
    era: Era
    application_areas: frozenset[Area]
    note: str = ""

    def __post_init__(self):
        if not self.application_areas:
            raise DatasetError(f"record {self.id!r} has no application area")


def classify_initial(s: ScalingDescriptor) -> int:
    """Class k whose shape n x n^k first covers the depth, polylog factors dropped.

    Pure powers need k >= p; a polylog factor on top of n^p pushes to floor(p) + 1.
    """
    p, q = s.poly_degree, s.polylog_degree
    k = math.floor(p) + 1 if q > 0 else max(1, math.ceil(p))
    if k > MAX_CLASS:
        raise ClassificationError(f"{s.label()} needs class QV-{k}, beyond QV-{MAX_CLASS}")
    return k


def classify_adjusted(s: ScalingDescriptor, e: EstimateType) -> int:
    k = classify_initial(s)
    if s.is_boundary() and EstimateType(e) is not EstimateType.GATE_COUNT:
        # leave headroom for routing overhead; gate counts already overestimate depth
        k += 1
        if k > MAX_CLASS:
            raise ClassificationError(f"adjusted class QV-{k} is beyond QV-{MAX_CLASS}")
    return k


def _pct(count: int, total: int) -> int:
    return math.floor(Fraction(100 * count, total) + Fraction(1, 2))


@dataclass
class ClassTable:
    mode: str
    total: int
    cells: dict[int, dict[str, int]]

    def class_totals(self) -> dict[int, int]:
        return {k: sum(self.cells.get(k, {}).values()) for k in range(1, MAX_CLASS + 1)}

    def percent(self, count: int) -> int:
        return _pct(count, self.total)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "total": self.total,
            "classes": {
                f"QV-{k}": {
                    "count": n,
                    "percent": self.percent(n),
                    "rows": {
                        label: {"count": c, "percent": self.percent(c)}
                        for label, c in self.cells.get(k, {}).items()
                    },
                }
                for k, n in self.class_totals().items()
            },
        }

    def render(self) -> str:
        title = "Initial" if self.mode == "initial" else "Adjusted"
        lines = [f"{title} classification ({self.total} algorithms)", f"{'Class':<6} {'Circuit depth':<24} Counts"]
        for k, n in self.class_totals().items():
            rows = self.cells.get(k, {})
            if not rows:
                continue
            for i, (label, c) in enumerate(rows.items()):
                cls = f"QV-{k}" if i == 0 else ""
                lines.append(f"{cls:<6} {label:<24} {c:>3} ({self.percent(c)}%)")
            lines.append(f"{'':<6} {'total':<24} {n:>3} ({self.percent(n)}%)")
        return "\n".join(lines)


def _form_key(label: str):
    return (FORM_ORDER.index(label), "") if label in FORM_ORDER else (len(FORM_ORDER), label)


def tabulate(records, mode: str = "initial") -> ClassTable:
    records = list(records)
    if not records:
        raise DatasetError("no records to tabulate")
    if mode not in ("initial", "adjusted"):
        raise ValueError(f"mode must be 'initial' or 'adjusted', got {mode!r}")
    tally: Counter = Counter()
    for r in records:
        k = classify_initial(r.scaling) if mode == "initial" else classify_adjusted(r.scaling, r.estimate_type)
        tally[(k, r.scaling.label())] += 1
    cells: dict[int, dict[str, int]] = {}
    for (k, label), c in sorted(tally.items(), key=lambda kv: (kv[0][0], _form_key(kv[0][1]))):
        cells.setdefault(k, {})[label] = c
    return ClassTable(mode, len(records), cells)


def tabulate_adjustments(records) -> dict[str, tuple[int, int]]:
    """Per boundary scaling: (moved up a class, kept initial class)."""
    records = list(records)
    if not records:
        raise DatasetError("no records to tabulate")
    out: dict[str, list[int]] = {}
    for r in records:
        if not r.scaling.is_boundary():
            continue
        moved = classify_adjusted(r.scaling, r.estimate_type) != classify_initial(r.scaling)
        out.setdefault(r.scaling.label(), [0, 0])[0 if moved else 1] += 1
    return {label: tuple(out[label]) for label in sorted(out, key=_form_key)}


def estimate_type_counts(records) -> dict[str, int]:
    tally = Counter(r.estimate_type for r in records)
    return {e.value: tally.get(e, 0) for e in EstimateType}


def area_counts(records) -> dict[str, dict[str, int]]:
    """Application area marginals by era; records may count in several areas."""
    out = {}
    for area in Area:
        nisq = sum(1 for r in records if area in r.application_areas and r.era is Era.NISQ)
        ft = sum(1 for r in records if area in r.application_areas and r.era is Era.FT)
        out[area.value] = {"NISQ": nisq, "FT": ft, "All": nisq + ft}
    return out


def era_counts(records) -> dict[str, int]:
    tally = Counter(r.era for r in records)
    return {e.value: tally.get(e, 0) for e in Era}


# ---------------------------------------------------------------- parsing

_POLY_RE = re.compile(r"^\s*(?P<num>\d+(?:\.\d+)?)(?:\s*/\s*(?P<den>\d+))?\s*$")


def parse_degree(text: str) -> Fraction:
    m = _POLY_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse degree {text!r}")
    value = Fraction(m.group("num"))
    if m.group("den"):
        value /= int(m.group("den"))
    return value


_LOG_TERM = re.compile(r"^(?:polylog|log\^x|log(?:\^(?P<q>\d+))?)$")
_POW_TERM = re.compile(r"^n(?:\^(?P<p>\d+(?:\.\d+)?(?:/\d+)?|\((?P<pp>\d+(?:\.\d+)?(?:/\d+)?)\)))?$")


def parse_scaling(expr: str) -> ScalingDescriptor:
    """Parse depth expressions such as ``n^2``, ``n^3*log``, ``sqrt(n)*polylog``,
    ``polylog`` or ``1``.  ``log`` means one log factor; ``polylog`` and
    ``log^x`` mean a higher (unspecified) power, stored as q = 2."""
    text = expr.strip().lower().replace(" ", "")
    if text.startswith("o(") and text.endswith(")"):
        text = text[2:-1]
    if not text:
        raise ValueError("empty scaling expression")
    p, q = Fraction(0), 0
    for term in text.split("*"):
        if term == "1":
            continue
        if term == "sqrt(n)":
            p += Fraction(1, 2)
            continue
        m = _POW_TERM.match(term)
        if m:
            deg = m.group("p") or m.group("pp")
            p += parse_degree(deg) if deg else 1
            continue
        m = _LOG_TERM.match(term)
        if m:
            q += int(m.group("q")) if m.group("q") else (1 if term == "log" else 2)
            continue
        raise ValueError(f"cannot parse term {term!r} in scaling expression {expr!r}")
    return ScalingDescriptor(p, q)


# ---------------------------------------------------------------- dataset

FIELDS = ("id", "poly_degree", "polylog_degree", "estimate_type", "era", "application_areas")


def _enum(kind, value, row):
    try:
        return kind(value.strip())
    except ValueError:
        allowed = ", ".join(m.value for m in kind)
        raise DatasetError(f"unknown {kind.__name__} {value!r} (expected one of {allowed})", row) from None


def load_dataset(text: str) -> list[AlgorithmRecord]:
    """Read algorithm records from CSV text; row numbers in errors count the header as row 1."""
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(reader.fieldnames or ())
    if header[: len(FIELDS)] != FIELDS:
        raise DatasetError(f"header must start with {', '.join(FIELDS)}; got {', '.join(header)}", 1)
    records = []
    seen = set()
    for rownum, row in enumerate(reader, start=2):
        if None in row or any(row[f] is None for f in FIELDS):
            raise DatasetError("wrong number of fields", rownum)
        rid = row["id"].strip()
        if not rid or rid in seen:
            raise DatasetError(f"missing or duplicate id {rid!r}", rownum)
        seen.add(rid)
        try:
            scaling = ScalingDescriptor(parse_degree(row["poly_degree"]), int(row["polylog_degree"]))
        except (ValueError, ClassificationError) as exc:
            raise DatasetError(str(exc), rownum) from None
        if not scaling.conformant:
            warnings.warn(f"row {rownum}: {scaling.label()} is not one of the surveyed depth forms")
        areas = frozenset(_enum(Area, a, rownum) for a in row["application_areas"].split(";") if a.strip())
        if not areas:
            raise DatasetError("application_areas is empty", rownum)
        records.append(
            AlgorithmRecord(
                id=rid,
                scaling=scaling,
                estimate_type=_enum(EstimateType, row["estimate_type"], rownum),
                era=_enum(Era, row["era"], rownum),
                application_areas=areas,
                note=(row.get("note") or "").strip(),
            )
        )
    if not records:
        raise DatasetError("dataset has no records")
    return records


def bundled_dataset_text() -> str:
    return resources.files("volbench").joinpath("data/algorithms.csv").read_text(encoding="utf-8")


def load_bundled() -> list[AlgorithmRecord]:
    return load_dataset(bundled_dataset_text())


# ---------------------------------------------------------------- reference tables

PUBLISHED = {
    "initial": {
        1: {"O(n)": 16, "O(log(n))": 8, "O(log^x(n))": 6, "O(1)": 2, "O(sqrt(n) polylog(n))": 1},
        2: {"O(n^2)": 10, "O(n polylog(n))": 2},
        3: {"O(n^3)": 8, "O(n^2 polylog(n))": 1},
        4: {"O(n^3 log(n))": 2},
        5: {"O(n^5)": 2},
    },
    "adjustments": {"O(n)": (12, 4), "O(n^2)": (6, 4), "O(n^3)": (4, 4)},
    "adjusted": {
        1: {"O(n)": 4, "O(log(n))": 8, "O(log^x(n))": 6, "O(1)": 2, "O(sqrt(n) polylog(n))": 1},
        2: {"O(n)": 12, "O(n^2)": 4, "O(n polylog(n))": 2},
        3: {"O(n^2)": 6, "O(n^3)": 4, "O(n^2 polylog(n))": 1},
        4: {"O(n^3)": 4, "O(n^3 log(n))": 2},
        5: {"O(n^5)": 2},
    },
    "estimate_types": {"GateDepth": 14, "GateCountOrOperations": 19, "RuntimeOrTimeComplexity": 25},
    "areas": {
        "MachineLearning": {"NISQ": 11, "FT": 13, "All": 24},
        "Optimization": {"NISQ": 9, "FT": 5, "All": 14},
        "ManyBodyPhysicsChemistry": {"NISQ": 9, "FT": 7, "All": 16},
        "QuantumDataHiding": {"NISQ": 0, "FT": 6, "All": 6},
        "NumericalSolvers": {"NISQ": 0, "FT": 3, "All": 3},
        "Other": {"NISQ": 0, "FT": 2, "All": 2},
    },
    "eras": {"NISQ": 27, "FT": 31},
}


def survey_tables(records) -> dict:
    records = list(records)
    return {
        "initial": tabulate(records, "initial"),
        "adjustments": tabulate_adjustments(records),
        "adjusted": tabulate(records, "adjusted"),
        "estimate_types": estimate_type_counts(records),
        "areas": area_counts(records),
        "eras": era_counts(records),
    }


def compare_to_published(tables: dict) -> list[str]:
    """Cell-by-cell differences from the published counts, in table order."""
    diffs = []

    def cmp(where, got, want):
        if got != want:
            diffs.append(f"{where}: got {got}, expected {want}")

    for mode in ("initial", "adjusted"):
        cells = tables[mode].cells
        for k in range(1, MAX_CLASS + 1):
            want_rows, got_rows = PUBLISHED[mode].get(k, {}), cells.get(k, {})
            for label in list(want_rows) + [lb for lb in got_rows if lb not in want_rows]:
                cmp(f"{mode} QV-{k} {label}", got_rows.get(label, 0), want_rows.get(label, 0))
    want_adj, got_adj = PUBLISHED["adjustments"], tables["adjustments"]
    for label in list(want_adj) + [lb for lb in got_adj if lb not in want_adj]:
        cmp(f"adjustments {label}", got_adj.get(label, (0, 0)), want_adj.get(label, (0, 0)))
    for key in ("estimate_types", "eras"):
        for label, want in PUBLISHED[key].items():
            cmp(f"{key} {label}", tables[key].get(label, 0), want)
    for area, cols in PUBLISHED["areas"].items():
        for col, want in cols.items():
            cmp(f"areas {area} {col}", tables["areas"][area][col], want)
    return diffs
