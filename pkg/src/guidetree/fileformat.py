"""JSON wire formats: trees, patient records, cases, transcripts.

Parsers are strict (unknown keys and wrong types are errors, with the
offending JSON path in the message). Writers emit canonical output:
fixed key order, two-space indent, UTF-8 text, one trailing newline.
Absent optional values are omitted, never written as null.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

from .criteria import (
    CRITERIA,
    NARRATIVE_STAGES,
    CaseDef,
    CatalogError,
    Transcript,
    check_answers,
    check_gold,
)
from .model import (
    Edge,
    EdgeSymbol,
    Node,
    NodeKind,
    TreeDef,
    ValidationReport,
    validate_tree,
)
from .predicates import (
    AllOf,
    AnyOf,
    BoolField,
    Comparison,
    ComparisonOp,
    DataPredicate,
    FieldDef,
    FieldType,
    Negation,
    PatientRecord,
    PredicateExpr,
    Quantity,
)

FORMAT_VERSION = 1
TREE_SUFFIX = ".tree.json"
PATIENT_SUFFIX = ".patient.json"
CASE_SUFFIX = ".case.json"
TRANSCRIPT_SUFFIX = ".transcript.json"

_MAX_EXPR_DEPTH = 64


class FormatError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvalidTreeError(FormatError):
    """The document parsed but the tree violates structural rules."""

    def __init__(self, report: ValidationReport, path: str = "$"):
        lines = "; ".join(f"{i.code}: {i.message}" for i in report[:5])
        more = "" if len(report) <= 5 else f" (and {len(report) - 5} more)"
        super().__init__(f"invalid tree: {lines}{more}", path)
        self.report = report


def _as_object(value: Any, path: str) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise FormatError(f"expected an object, got {type(value).__name__}", path)
    return value


def _as_array(value: Any, path: str) -> list[Any]:
    if not isinstance(value, list):
        raise FormatError(f"expected an array, got {type(value).__name__}", path)
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise FormatError(f"expected a string, got {type(value).__name__}", path)
    return value


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"expected an integer, got {value!r}", path)
    return value


def _check_keys(obj: Mapping[str, Any], required: Sequence[str],
                optional: Sequence[str], path: str) -> None:
    for key in required:
        if key not in obj:
            raise FormatError(f"missing required key {key!r}", path)
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise FormatError(f"unknown keys {unknown}", path)


def _check_version(obj: Mapping[str, Any], path: str) -> None:
    version = _as_int(obj.get("format_version"), f"{path}.format_version")
    if version != FORMAT_VERSION:
        raise FormatError(
            f"unsupported format_version {version}, expected {FORMAT_VERSION}",
            f"{path}.format_version")


def _load_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc


def canonical_dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def write_canonical(path: Path | str, payload: Mapping[str, Any]) -> None:
    Path(path).write_text(canonical_dumps(payload), encoding="utf-8")


# --- predicate expressions ---

_COMPARISON_OPS = {op.value for op in ComparisonOp}


def _parse_expr(data: Any, path: str, depth: int = 0) -> PredicateExpr:
    if depth > _MAX_EXPR_DEPTH:
        raise FormatError(f"expression nests deeper than {_MAX_EXPR_DEPTH}", path)
    obj = _as_object(data, path)
    if "op" not in obj:
        _check_keys(obj, ["field"], [], path)
        return BoolField(field=_as_str(obj["field"], f"{path}.field"))
    op = _as_str(obj["op"], f"{path}.op")
    if op in ("and", "or"):
        _check_keys(obj, ["op", "args"], [], path)
        raw_args = _as_array(obj["args"], f"{path}.args")
        if len(raw_args) < 2:
            raise FormatError(f"{op!r} needs at least two operands", f"{path}.args")
        args = tuple(
            _parse_expr(a, f"{path}.args[{i}]", depth + 1) for i, a in enumerate(raw_args))
        return AllOf(args) if op == "and" else AnyOf(args)
    if op == "not":
        _check_keys(obj, ["op", "arg"], [], path)
        return Negation(_parse_expr(obj["arg"], f"{path}.arg", depth + 1))
    if op in _COMPARISON_OPS:
        _check_keys(obj, ["op", "field", "value"], [], path)
        value = obj["value"]
        if not isinstance(value, (bool, int, float, str)):
            raise FormatError(
                f"comparison value must be a number, string or boolean, got {value!r}",
                f"{path}.value")
        if isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        return Comparison(
            field=_as_str(obj["field"], f"{path}.field"),
            op=ComparisonOp(op),
            value=value)
    raise FormatError(f"unknown operator {op!r}", f"{path}.op")


def _expr_to_dict(expr: PredicateExpr) -> dict[str, Any]:
    if isinstance(expr, BoolField):
        return {"field": expr.field}
    if isinstance(expr, Comparison):
        return {"op": expr.op.value, "field": expr.field, "value": expr.value}
    if isinstance(expr, Negation):
        return {"op": "not", "arg": _expr_to_dict(expr.arg)}
    op = "and" if isinstance(expr, AllOf) else "or"
    return {"op": op, "args": [_expr_to_dict(a) for a in expr.args]}


def _parse_predicate(data: Any, path: str) -> DataPredicate:
    obj = _as_object(data, path)
    _check_keys(obj, ["expr"], ["true_answer", "false_answer"], path)
    true_answer = None
    false_answer = None
    if "true_answer" in obj:
        true_answer = _as_str(obj["true_answer"], f"{path}.true_answer")
    if "false_answer" in obj:
        false_answer = _as_str(obj["false_answer"], f"{path}.false_answer")
    return DataPredicate(
        expr=_parse_expr(obj["expr"], f"{path}.expr"),
        true_answer=true_answer,
        false_answer=false_answer)


def _predicate_to_dict(predicate: DataPredicate) -> dict[str, Any]:
    out: dict[str, Any] = {"expr": _expr_to_dict(predicate.expr)}
    if predicate.true_answer is not None:
        out["true_answer"] = predicate.true_answer
    if predicate.false_answer is not None:
        out["false_answer"] = predicate.false_answer
    return out


# --- field dictionary ---

def _parse_field_def(name: str, data: Any, path: str) -> FieldDef:
    obj = _as_object(data, path)
    _check_keys(obj, ["type"], ["unit", "values", "label"], path)
    type_token = _as_str(obj["type"], f"{path}.type")
    try:
        ftype = FieldType(type_token)
    except ValueError:
        raise FormatError(f"unknown field type {type_token!r}", f"{path}.type") from None
    unit = _as_str(obj["unit"], f"{path}.unit") if "unit" in obj else None
    label = _as_str(obj["label"], f"{path}.label") if "label" in obj else None
    values: tuple[str, ...] = ()
    if ftype is FieldType.ENUM:
        if "values" not in obj:
            raise FormatError("enum fields must list their values", path)
        raw = _as_array(obj["values"], f"{path}.values")
        values = tuple(_as_str(v, f"{path}.values[{i}]") for i, v in enumerate(raw))
        if len(set(values)) != len(values) or not values:
            raise FormatError("enum values must be non-empty and distinct", f"{path}.values")
    elif "values" in obj:
        raise FormatError("only enum fields take values", f"{path}.values")
    if unit is not None and ftype is not FieldType.NUMBER:
        raise FormatError("only number fields take a unit", f"{path}.unit")
    return FieldDef(name=name, type=ftype, unit=unit, values=values, label=label)


def _field_def_to_dict(fdef: FieldDef) -> dict[str, Any]:
    out: dict[str, Any] = {"type": fdef.type.value}
    if fdef.unit is not None:
        out["unit"] = fdef.unit
    if fdef.values:
        out["values"] = list(fdef.values)
    if fdef.label is not None:
        out["label"] = fdef.label
    return out


# --- trees ---

_NODE_KINDS = {k.value: k for k in NodeKind}
_EDGE_SYMBOLS = {s.value: s for s in EdgeSymbol if s is not EdgeSymbol.NONE}


def _parse_node(data: Any, path: str) -> Node:
    obj = _as_object(data, path)
    _check_keys(obj, ["id", "kind", "label"], ["predicate", "detail"], path)
    kind_token = _as_str(obj["kind"], f"{path}.kind")
    kind = _NODE_KINDS.get(kind_token)
    if kind is None:
        raise FormatError(
            f"unknown node kind {kind_token!r}, expected one of {sorted(_NODE_KINDS)}",
            f"{path}.kind")
    predicate = None
    if "predicate" in obj:
        predicate = _parse_predicate(obj["predicate"], f"{path}.predicate")
    detail = _as_str(obj["detail"], f"{path}.detail") if "detail" in obj else None
    return Node(
        id=_as_str(obj["id"], f"{path}.id"),
        kind=kind,
        label=_as_str(obj["label"], f"{path}.label"),
        predicate=predicate,
        detail=detail)


def _parse_edge(data: Any, path: str) -> Edge:
    obj = _as_object(data, path)
    _check_keys(obj, ["from", "answer", "to"], ["symbol"], path)
    symbol = EdgeSymbol.NONE
    if "symbol" in obj:
        token = _as_str(obj["symbol"], f"{path}.symbol")
        if token not in _EDGE_SYMBOLS:
            raise FormatError(
                f"unknown edge symbol {token!r}, expected one of {sorted(_EDGE_SYMBOLS)}",
                f"{path}.symbol")
        symbol = _EDGE_SYMBOLS[token]
    return Edge(
        from_=_as_str(obj["from"], f"{path}.from"),
        answer=_as_str(obj["answer"], f"{path}.answer"),
        to=_as_str(obj["to"], f"{path}.to"),
        symbol=symbol)


def parse_tree(data: Any, *, validate: bool = True) -> TreeDef:
    obj = _as_object(data, "$")
    _check_keys(obj, ["format_version", "id", "title", "root", "nodes", "edges"],
                ["fields"], "$")
    _check_version(obj, "$")
    fields: dict[str, FieldDef] = {}
    if "fields" in obj:
        raw_fields = _as_object(obj["fields"], "$.fields")
        for name in raw_fields:
            fields[name] = _parse_field_def(name, raw_fields[name], f"$.fields.{name}")
    nodes = tuple(
        _parse_node(n, f"$.nodes[{i}]")
        for i, n in enumerate(_as_array(obj["nodes"], "$.nodes")))
    edges = tuple(
        _parse_edge(e, f"$.edges[{i}]")
        for i, e in enumerate(_as_array(obj["edges"], "$.edges")))
    tree = TreeDef(
        id=_as_str(obj["id"], "$.id"),
        title=_as_str(obj["title"], "$.title"),
        root=_as_str(obj["root"], "$.root"),
        nodes=nodes,
        edges=edges,
        fields=fields)
    if validate:
        report = validate_tree(tree)
        if report:
            raise InvalidTreeError(report)
    return tree


def tree_to_dict(tree: TreeDef) -> dict[str, Any]:
    out: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "id": tree.id,
        "title": tree.title,
        "root": tree.root,
    }
    if tree.fields:
        out["fields"] = {
            name: _field_def_to_dict(tree.fields[name]) for name in sorted(tree.fields)}
    nodes = []
    for node in tree.nodes:
        entry: dict[str, Any] = {"id": node.id, "kind": node.kind.value, "label": node.label}
        if node.predicate is not None:
            entry["predicate"] = _predicate_to_dict(node.predicate)
        if node.detail is not None:
            entry["detail"] = node.detail
        nodes.append(entry)
    edges = []
    for edge in tree.edges:
        entry = {"from": edge.from_, "answer": edge.answer, "to": edge.to}
        if edge.symbol is not EdgeSymbol.NONE:
            entry["symbol"] = edge.symbol.value
        edges.append(entry)
    out["nodes"] = nodes
    out["edges"] = edges
    return out


def load_tree(path: Path | str, *, validate: bool = True) -> TreeDef:
    return parse_tree(_load_json(Path(path)), validate=validate)


def save_tree(tree: TreeDef, path: Path | str) -> None:
    write_canonical(path, tree_to_dict(tree))


# --- patient records ---

def _parse_patient_value(data: Any, path: str) -> bool | str | Quantity:
    if isinstance(data, bool):
        return data
    if isinstance(data, (int, float)):
        return Quantity(value=float(data))
    if isinstance(data, str):
        return data
    obj = _as_object(data, path)
    _check_keys(obj, ["value"], ["unit"], path)
    raw = obj["value"]
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise FormatError(f"expected a number, got {raw!r}", f"{path}.value")
    unit = _as_str(obj["unit"], f"{path}.unit") if "unit" in obj else None
    return Quantity(value=float(raw), unit=unit)


def parse_patient(data: Any) -> PatientRecord:
    obj = _as_object(data, "$")
    _check_keys(obj, ["format_version", "values"], [], "$")
    _check_version(obj, "$")
    raw_values = _as_object(obj["values"], "$.values")
    values = {
        name: _parse_patient_value(raw_values[name], f"$.values.{name}")
        for name in raw_values}
    return PatientRecord(values=values)


def patient_to_dict(record: PatientRecord) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for name in sorted(record.values):
        value = record.values[name]
        if isinstance(value, Quantity):
            if value.unit is None:
                values[name] = value.value
            else:
                values[name] = {"value": value.value, "unit": value.unit}
        else:
            values[name] = value
    return {"format_version": FORMAT_VERSION, "values": values}


def load_patient(path: Path | str) -> PatientRecord:
    return parse_patient(_load_json(Path(path)))


def save_patient(record: PatientRecord, path: Path | str) -> None:
    write_canonical(path, patient_to_dict(record))


# --- cases ---

def parse_case(data: Any) -> CaseDef:
    obj = _as_object(data, "$")
    _check_keys(obj, ["format_version", "id", "narrative", "gold"], [], "$")
    _check_version(obj, "$")
    case_id = _as_int(obj["id"], "$.id")
    if case_id < 1:
        raise FormatError("case id must be positive", "$.id")
    narrative_obj = _as_object(obj["narrative"], "$.narrative")
    _check_keys(narrative_obj, list(NARRATIVE_STAGES), [], "$.narrative")
    narrative = {
        stage: _as_str(narrative_obj[stage], f"$.narrative.{stage}")
        for stage in NARRATIVE_STAGES}
    try:
        gold = check_gold(_as_object(obj["gold"], "$.gold"))
    except CatalogError as exc:
        raise FormatError(str(exc), "$.gold") from None
    return CaseDef(id=case_id, narrative=narrative, gold=gold)


def case_to_dict(case: CaseDef) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "id": case.id,
        "narrative": {stage: case.narrative[stage] for stage in NARRATIVE_STAGES},
        "gold": {c.name: case.gold[c.name] for c in CRITERIA},
    }


def load_case(path: Path | str) -> CaseDef:
    return parse_case(_load_json(Path(path)))


def save_case(case: CaseDef, path: Path | str) -> None:
    write_canonical(path, case_to_dict(case))


# --- transcripts ---

def parse_transcript(data: Any) -> Transcript:
    obj = _as_object(data, "$")
    _check_keys(obj, ["format_version", "participant", "group", "case", "answers"],
                ["demographics"], "$")
    _check_version(obj, "$")
    participant = _as_str(obj["participant"], "$.participant")
    if not participant:
        raise FormatError("participant must be non-empty", "$.participant")
    group = _as_str(obj["group"], "$.group")
    # Single capital letters keep pooled pair specs like "AB:C" unambiguous.
    if len(group) != 1 or not group.isascii() or not group.isupper():
        raise FormatError(
            f"group must be a single letter A-Z, got {group!r}", "$.group")
    try:
        answers = check_answers(_as_object(obj["answers"], "$.answers"))
    except CatalogError as exc:
        raise FormatError(str(exc), "$.answers") from None
    demographics: dict[str, Any] = {}
    if "demographics" in obj:
        raw = _as_object(obj["demographics"], "$.demographics")
        for key in raw:
            value = raw[key]
            if not isinstance(value, (str, int, float, bool)):
                raise FormatError(
                    f"expected a scalar, got {type(value).__name__}",
                    f"$.demographics.{key}")
            demographics[key] = value
    return Transcript(
        participant=participant,
        group=group,
        case=_as_int(obj["case"], "$.case"),
        answers=answers,
        demographics=demographics)


def transcript_to_dict(transcript: Transcript) -> dict[str, Any]:
    out: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "participant": transcript.participant,
        "group": transcript.group,
        "case": transcript.case,
        "answers": {
            c.name: transcript.answers[c.name]
            for c in CRITERIA if c.name in transcript.answers},
    }
    if transcript.demographics:
        out["demographics"] = {
            key: transcript.demographics[key] for key in sorted(transcript.demographics)}
    return out


def load_transcript(path: Path | str) -> Transcript:
    return parse_transcript(_load_json(Path(path)))


def save_transcript(transcript: Transcript, path: Path | str) -> None:
    write_canonical(path, transcript_to_dict(transcript))


# --- directory loading ---

def _sorted_files(directory: Path | str, suffix: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FormatError(f"{root} is not a directory")
    return sorted(p for p in root.iterdir() if p.name.endswith(suffix) and p.is_file())


def load_trees(directory: Path | str) -> dict[str, TreeDef]:
    trees: dict[str, TreeDef] = {}
    for path in _sorted_files(directory, TREE_SUFFIX):
        tree = load_tree(path)
        if tree.id in trees:
            raise FormatError(f"duplicate tree id {tree.id!r} in {path.name}")
        trees[tree.id] = tree
    return trees


def load_cases(directory: Path | str) -> dict[int, CaseDef]:
    cases: dict[int, CaseDef] = {}
    for path in _sorted_files(directory, CASE_SUFFIX):
        case = load_case(path)
        if case.id in cases:
            raise FormatError(f"duplicate case id {case.id} in {path.name}")
        cases[case.id] = case
    return cases


def load_transcripts(directory: Path | str) -> list[Transcript]:
    return [load_transcript(p) for p in _sorted_files(directory, TRANSCRIPT_SUFFIX)]


def load_patients(directory: Path | str) -> dict[str, PatientRecord]:
    records: dict[str, PatientRecord] = {}
    for path in _sorted_files(directory, PATIENT_SUFFIX):
        records[path.name[: -len(PATIENT_SUFFIX)]] = load_patient(path)
    return records


def load_dataset(directory: Path | str) -> tuple[dict[int, CaseDef], list[Transcript]]:
    """Load a trial dataset directory.

    The expected layout is cases/*.case.json plus transcripts/*.json;
    a flat directory mixing *.case.json and *.transcript.json also works.
    """
    root = Path(directory)
    cases_dir = root / "cases" if (root / "cases").is_dir() else root
    transcripts_dir = root / "transcripts" if (root / "transcripts").is_dir() else root
    cases = load_cases(cases_dir)
    if transcripts_dir == root:
        transcripts = load_transcripts(root)
    else:
        transcripts = [
            load_transcript(p) for p in _sorted_files(transcripts_dir, ".json")]
    if not cases:
        raise FormatError(f"no case files under {root}")
    if not transcripts:
        raise FormatError(f"no transcript files under {root}")
    return cases, transcripts
