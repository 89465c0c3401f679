"""Typed patient fields and three-valued predicates over them.

Predicates use Kleene logic: an atom over a missing field is Unknown,
AND short-circuits on False, OR on True, NOT maps Unknown to Unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Union


class Truth(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @staticmethod
    def of(value: bool) -> "Truth":
        return Truth.TRUE if value else Truth.FALSE


def kleene_not(value: Truth) -> Truth:
    if value is Truth.UNKNOWN:
        return Truth.UNKNOWN
    return Truth.of(value is Truth.FALSE)


def kleene_all(values: list[Truth]) -> Truth:
    if any(v is Truth.FALSE for v in values):
        return Truth.FALSE
    if any(v is Truth.UNKNOWN for v in values):
        return Truth.UNKNOWN
    return Truth.TRUE


def kleene_any(values: list[Truth]) -> Truth:
    if any(v is Truth.TRUE for v in values):
        return Truth.TRUE
    if any(v is Truth.UNKNOWN for v in values):
        return Truth.UNKNOWN
    return Truth.FALSE


class FieldType(str, Enum):
    NUMBER = "number"
    BOOLEAN = "boolean"
    ENUM = "enum"
    TEXT = "text"


@dataclass(frozen=True)
class FieldDef:
    """One entry of a tree's patient field dictionary."""

    name: str
    type: FieldType
    unit: str | None = None
    values: tuple[str, ...] = ()
    label: str | None = None


@dataclass(frozen=True)
class Quantity:
    """A number paired with its (opaque, never converted) unit string."""

    value: float
    unit: str | None = None


PatientValue = Union[bool, str, Quantity]


@dataclass(frozen=True)
class PatientRecord:
    values: Mapping[str, PatientValue]

    def get(self, name: str) -> PatientValue | None:
        return self.values.get(name)


class TypeMismatchError(TypeError):
    """An atom or record value is incompatible with the field dictionary."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ComparisonOp(str, Enum):
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"
    EQ = "eq"
    NE = "ne"

    @property
    def is_ordering(self) -> bool:
        return self in (ComparisonOp.LT, ComparisonOp.LE, ComparisonOp.GT, ComparisonOp.GE)


_ORDERING = {
    ComparisonOp.LT: lambda a, b: a < b,
    ComparisonOp.LE: lambda a, b: a <= b,
    ComparisonOp.GT: lambda a, b: a > b,
    ComparisonOp.GE: lambda a, b: a >= b,
    ComparisonOp.EQ: lambda a, b: a == b,
    ComparisonOp.NE: lambda a, b: a != b,
}


@dataclass(frozen=True)
class Comparison:
    field: str
    op: ComparisonOp
    value: float | str | bool

    def field_names(self) -> Iterator[str]:
        yield self.field


@dataclass(frozen=True)
class BoolField:
    """Truth test of a boolean field, the bare-field atom form."""

    field: str

    def field_names(self) -> Iterator[str]:
        yield self.field


@dataclass(frozen=True)
class AllOf:
    args: tuple["PredicateExpr", ...]

    def field_names(self) -> Iterator[str]:
        for arg in self.args:
            yield from arg.field_names()


@dataclass(frozen=True)
class AnyOf:
    args: tuple["PredicateExpr", ...]

    def field_names(self) -> Iterator[str]:
        for arg in self.args:
            yield from arg.field_names()


@dataclass(frozen=True)
class Negation:
    arg: "PredicateExpr"

    def field_names(self) -> Iterator[str]:
        yield from self.arg.field_names()


PredicateExpr = Union[Comparison, BoolField, AllOf, AnyOf, Negation]


@dataclass(frozen=True)
class DataPredicate:
    """Predicate attached to a question node.

    true_answer / false_answer designate which outgoing edge each verdict
    selects during automatic navigation; None falls back to the defaults
    resolved against the node's edges ("Yes"/"No", or the only other edge).
    """

    expr: PredicateExpr
    true_answer: str | None = None
    false_answer: str | None = None


def eval_predicate(
    expr: PredicateExpr | DataPredicate,
    record: PatientRecord,
    fields: Mapping[str, FieldDef],
) -> Truth:
    """Evaluate a predicate against a record under Kleene three-valued logic."""
    if isinstance(expr, DataPredicate):
        expr = expr.expr
    if isinstance(expr, AllOf):
        return kleene_all([eval_predicate(a, record, fields) for a in expr.args])
    if isinstance(expr, AnyOf):
        return kleene_any([eval_predicate(a, record, fields) for a in expr.args])
    if isinstance(expr, Negation):
        return kleene_not(eval_predicate(expr.arg, record, fields))
    if isinstance(expr, BoolField):
        fdef = _field_def(expr.field, fields)
        if fdef.type is not FieldType.BOOLEAN:
            raise TypeMismatchError(
                f"bare atom requires a boolean field, {expr.field!r} is {fdef.type.value}",
                field=expr.field)
        value = record.get(expr.field)
        if value is None:
            return Truth.UNKNOWN
        if not isinstance(value, bool):
            raise TypeMismatchError(
                f"field {expr.field!r} holds {value!r}, expected a boolean", field=expr.field)
        return Truth.of(value)
    return _eval_comparison(expr, record, fields)


def _field_def(name: str, fields: Mapping[str, FieldDef]) -> FieldDef:
    fdef = fields.get(name)
    if fdef is None:
        raise TypeMismatchError(f"field {name!r} is not declared", field=name)
    return fdef


def _eval_comparison(
    atom: Comparison, record: PatientRecord, fields: Mapping[str, FieldDef]
) -> Truth:
    fdef = _field_def(atom.field, fields)
    if atom.op.is_ordering and fdef.type is not FieldType.NUMBER:
        raise TypeMismatchError(
            f"ordering comparison on non-numeric field {atom.field!r} ({fdef.type.value})",
            field=atom.field)
    expected = _constant_check(atom, fdef)
    value = record.get(atom.field)
    if value is None:
        return Truth.UNKNOWN
    actual = _coerce_value(value, fdef)
    return Truth.of(_ORDERING[atom.op](actual, expected))


def _constant_check(atom: Comparison, fdef: FieldDef) -> float | str | bool:
    constant = atom.value
    if fdef.type is FieldType.NUMBER:
        if isinstance(constant, bool) or not isinstance(constant, (int, float)):
            raise TypeMismatchError(
                f"comparison constant {constant!r} is not numeric for field {fdef.name!r}",
                field=fdef.name)
        return float(constant)
    if fdef.type is FieldType.BOOLEAN:
        if not isinstance(constant, bool):
            raise TypeMismatchError(
                f"comparison constant {constant!r} is not boolean for field {fdef.name!r}",
                field=fdef.name)
        return constant
    if not isinstance(constant, str):
        raise TypeMismatchError(
            f"comparison constant {constant!r} is not a token for field {fdef.name!r}",
            field=fdef.name)
    return constant


def _coerce_value(value: PatientValue, fdef: FieldDef) -> float | str | bool:
    if fdef.type is FieldType.NUMBER:
        if not isinstance(value, Quantity):
            raise TypeMismatchError(
                f"field {fdef.name!r} holds {value!r}, expected a number", field=fdef.name)
        if value.unit is not None and value.unit != fdef.unit:
            raise TypeMismatchError(
                f"field {fdef.name!r} carries unit {value.unit!r}, dictionary says {fdef.unit!r}",
                field=fdef.name)
        return value.value
    if fdef.type is FieldType.BOOLEAN:
        if not isinstance(value, bool):
            raise TypeMismatchError(
                f"field {fdef.name!r} holds {value!r}, expected a boolean", field=fdef.name)
        return value
    if not isinstance(value, str):
        raise TypeMismatchError(
            f"field {fdef.name!r} holds {value!r}, expected text", field=fdef.name)
    return value


def check_record(record: PatientRecord, fields: Mapping[str, FieldDef]) -> None:
    """Validate a record against a field dictionary; raise on the first mismatch."""
    for name, value in record.values.items():
        fdef = fields.get(name)
        if fdef is None:
            raise TypeMismatchError(f"field {name!r} is not declared", field=name)
        coerced = _coerce_value(value, fdef)
        if fdef.type is FieldType.NUMBER and not math.isfinite(float(coerced)):
            raise TypeMismatchError(f"field {name!r} must be finite", field=name)
        if fdef.type is FieldType.ENUM and coerced not in fdef.values:
            raise TypeMismatchError(
                f"field {name!r} token {coerced!r} not in {list(fdef.values)}", field=name)
