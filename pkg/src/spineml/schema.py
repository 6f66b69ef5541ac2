"""Column schema for the spine-surgery outcome dataset and the built-in predictor groups.

The default schema covers the 24 columns collected per patient: socioeconomic
status, psychometric scores (MSPQ, Zung, DRAM), pre-surgical clinical
measurements, preoperative blood panel, six-month postoperative outcomes,
the four satisfaction answers, and the binary SUCCESS outcome (1 = success:
both six-month satisfaction answers ≤ 1).

Postoperative (M6_*) and satisfaction (SAT_*) columns are banned from every
predictor group: they encode the outcome and would leak it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MissingColumnError, UnknownGroupError

KIND_CONTINUOUS = "continuous"
KIND_ORDINAL = "ordinal"
KIND_BINARY = "binary"
KINDS = (KIND_CONTINUOUS, KIND_ORDINAL, KIND_BINARY)

ROLES = (
    "socioeconomic",
    "psychometric",
    "analytical",
    "presurgical",
    "postoperative",
    "satisfaction",
    "outcome",
)

OUTCOME_COLUMN = "SUCCESS"
LABEL_NAMES = {0: "no-success", 1: "success"}

# Column-name prefixes that identify outcome-leaking measurements.
LEAKAGE_PREFIXES = ("M6_", "SAT_")


@dataclass(frozen=True)
class ColumnSpec:
    """One dataset column: name, value kind, clinical role, optional inclusive bounds."""

    name: str
    kind: str
    role: str
    valid_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown column kind: {self.kind}")
        if self.role not in ROLES:
            raise ValueError(f"unknown column role: {self.role}")
        if self.valid_range is not None:
            lo, hi = self.valid_range
            if lo > hi:
                raise ValueError(f"invalid range for {self.name}: [{lo}, {hi}]")


@dataclass(frozen=True)
class Schema:
    """Ordered column list with exactly one outcome column and unique names."""

    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")
        outcomes = [c for c in self.columns if c.role == "outcome"]
        if len(outcomes) != 1:
            raise ValueError("schema must contain exactly one outcome column")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def outcome(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == "outcome")

    @property
    def feature_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role != "outcome")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.feature_columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise MissingColumnError(name)

    def feature_index(self, name: str) -> int:
        for i, c in enumerate(self.feature_columns):
            if c.name == name:
                return i
        raise MissingColumnError(name)

    def subset(self, feature_names) -> "Schema":
        """Schema restricted to the given feature columns (schema order) plus the outcome."""
        wanted = set(feature_names)
        missing = wanted - set(self.feature_names)
        if missing:
            raise MissingColumnError(sorted(missing)[0])
        cols = tuple(
            c for c in self.columns if c.name in wanted or c.role == "outcome"
        )
        return Schema(cols)


def default_schema() -> Schema:
    """The 24-column patient schema.

    Ranges for AGE/BMI/MSPQ/ZUNG/LEVELS are the instruments' real scales
    (generator defaults); the blood-panel ranges are the reference intervals
    the labs report.
    """
    c = ColumnSpec
    return Schema(
        (
            c("GEN", KIND_BINARY, "socioeconomic", (0, 1)),
            c("AGE", KIND_CONTINUOUS, "socioeconomic", (18, 90)),
            c("BMI", KIND_CONTINUOUS, "presurgical", (15, 45)),
            c("LEVELS", KIND_CONTINUOUS, "presurgical", (1, 5)),
            c("EMP_ST", KIND_ORDINAL, "socioeconomic", (1, 13)),
            c("MSPQ", KIND_CONTINUOUS, "psychometric", (0, 39)),
            c("ZUNG", KIND_CONTINUOUS, "psychometric", (20, 80)),
            c("DRAM", KIND_ORDINAL, "psychometric", (0, 3)),
            c("PRE_LUMBAR_EVA", KIND_CONTINUOUS, "presurgical", (0, 10)),
            c("PRE_LEG_EVA", KIND_CONTINUOUS, "presurgical", (0, 10)),
            c("M6_LUMBAR_EVA", KIND_CONTINUOUS, "postoperative", (0, 10)),
            c("M6_LEG_EVA", KIND_CONTINUOUS, "postoperative", (0, 10)),
            c("PRE_ODI", KIND_CONTINUOUS, "presurgical", (0, 100)),
            c("M6_POST_ODI", KIND_CONTINUOUS, "postoperative", (0, 100)),
            c("SAT_SURGICAL_PROC", KIND_ORDINAL, "satisfaction", (0, 4)),
            c("SAT_PAIN_PRE", KIND_ORDINAL, "satisfaction", (0, 4)),
            c("SAT_SURGICAL_6M", KIND_ORDINAL, "satisfaction", (0, 4)),
            c("SAT_PAIN_6M", KIND_ORDINAL, "satisfaction", (0, 4)),
            c("SUCCESS", KIND_BINARY, "outcome", (0, 1)),
            c("GLU", KIND_CONTINUOUS, "analytical", (70, 110)),
            c("UREA", KIND_CONTINUOUS, "analytical", (16, 49)),
            c("URIC_ACID", KIND_CONTINUOUS, "analytical", (2.4, 5.7)),
            c("CREAT", KIND_CONTINUOUS, "analytical", (0.5, 0.9)),
            c("CHOL", KIND_CONTINUOUS, "analytical", (200, 250)),
        )
    )


@dataclass(frozen=True)
class VariableGroup:
    """A named predictor subset; construction rejects outcome-leaking columns."""

    id: str
    name: str
    column_names: tuple[str, ...]

    def __post_init__(self):
        if not self.column_names:
            raise ValueError(f"group {self.id} has no columns")
        leaky = [
            n for n in self.column_names if n.startswith(LEAKAGE_PREFIXES)
        ]
        if leaky:
            raise ValueError(
                f"group {self.id} selects outcome-leaking columns: {leaky}"
            )
        if OUTCOME_COLUMN in self.column_names:
            raise ValueError(f"group {self.id} selects the outcome column")


_PRESURGICAL = ("BMI", "LEVELS", "PRE_LUMBAR_EVA", "PRE_LEG_EVA", "PRE_ODI")
_SOCIOECONOMIC = ("GEN", "AGE", "EMP_ST")
_PSYCHOMETRIC = ("MSPQ", "ZUNG", "DRAM")
_ANALYTICAL = ("GLU", "UREA", "URIC_ACID", "CREAT", "CHOL")

GROUP_IDS = ("I", "II", "III", "IV", "V", "VI", "VII")


def builtin_groups() -> dict[str, VariableGroup]:
    """The seven built-in predictor groups, keyed by roman-numeral id."""
    return {
        "I": VariableGroup("I", "Pre-surgical", _PRESURGICAL),
        "II": VariableGroup("II", "Socioeconomic", _SOCIOECONOMIC),
        "III": VariableGroup("III", "Psychometric", _PSYCHOMETRIC),
        "IV": VariableGroup("IV", "Analytical", _ANALYTICAL),
        "V": VariableGroup(
            "V", "Pre-surgical + Analytical", _PRESURGICAL + _ANALYTICAL
        ),
        "VI": VariableGroup(
            "VI", "Socioeconomic + Psychometric", _SOCIOECONOMIC + _PSYCHOMETRIC
        ),
        "VII": VariableGroup(
            "VII",
            "All except postoperative",
            _PRESURGICAL + _SOCIOECONOMIC + _PSYCHOMETRIC + _ANALYTICAL,
        ),
    }


def group_by_id(group_id: str) -> VariableGroup:
    groups = builtin_groups()
    if group_id not in groups:
        raise UnknownGroupError(group_id)
    return groups[group_id]


def load_schema_json(path) -> Schema:
    """Load a schema override file: {"columns": [{"name","kind","min","max","role"}, ...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    cols = []
    for entry in raw["columns"]:
        rng = None
        if entry.get("min") is not None or entry.get("max") is not None:
            rng = (float(entry["min"]), float(entry["max"]))
        cols.append(
            ColumnSpec(entry["name"], entry["kind"], entry["role"], rng)
        )
    return Schema(tuple(cols))


def schema_to_json_dict(schema: Schema) -> dict:
    cols = []
    for c in schema.columns:
        entry = {"name": c.name, "kind": c.kind, "role": c.role}
        if c.valid_range is not None:
            entry["min"], entry["max"] = c.valid_range
        cols.append(entry)
    return {"columns": cols}
