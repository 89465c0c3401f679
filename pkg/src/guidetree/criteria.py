"""Scoring catalog for simulated consultations.

A consultation is scored against a fixed catalog of 22 criteria spread
over three phases (9 + 6 + 7). Each criterion is worth one point when
the transcript's answer equals the case's gold answer, so scores range
from 0 to 22.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

GoldValue = Union[bool, str]


class Phase(str, Enum):
    INITIAL_EVALUATION = "initial_evaluation"
    INITIAL_DECISION = "initial_decision"
    REEVALUATION = "reevaluation"


class CriterionKind(str, Enum):
    BOOLEAN = "boolean"
    ENUM = "enum"


@dataclass(frozen=True)
class Criterion:
    name: str
    phase: Phase
    kind: CriterionKind = CriterionKind.BOOLEAN
    values: tuple[str, ...] = ()


def _boolean(name: str, phase: Phase) -> Criterion:
    return Criterion(name=name, phase=phase, kind=CriterionKind.BOOLEAN)


def _enum(name: str, phase: Phase, values: tuple[str, ...]) -> Criterion:
    return Criterion(name=name, phase=phase, kind=CriterionKind.ENUM, values=values)


CRITERIA: tuple[Criterion, ...] = (
    _boolean("EKG", Phase.INITIAL_EVALUATION),
    _boolean("ChestCT", Phase.INITIAL_EVALUATION),
    _boolean("GeneralBloodTest", Phase.INITIAL_EVALUATION),
    _boolean("CRP", Phase.INITIAL_EVALUATION),
    _boolean("LDH", Phase.INITIAL_EVALUATION),
    _boolean("Troponin", Phase.INITIAL_EVALUATION),
    _boolean("DDimers", Phase.INITIAL_EVALUATION),
    _boolean("Ferritin", Phase.INITIAL_EVALUATION),
    _boolean("Il6", Phase.INITIAL_EVALUATION),
    _boolean("DecisionToHospitalize", Phase.INITIAL_DECISION),
    _enum("LevelOfCare", Phase.INITIAL_DECISION, ("ward", "intermediate", "icu")),
    _boolean("Antibiotics", Phase.INITIAL_DECISION),
    _boolean("Steroids", Phase.INITIAL_DECISION),
    _boolean("Anticoagulant", Phase.INITIAL_DECISION),
    _boolean("Oxygen", Phase.INITIAL_DECISION),
    _enum("ClinicalStatus", Phase.REEVALUATION, ("improved", "stable", "deteriorated")),
    _boolean("OxygenNeed", Phase.REEVALUATION),
    _boolean("Fever", Phase.REEVALUATION),
    _boolean("BloodTest", Phase.REEVALUATION),
    _boolean("ChestCT2", Phase.REEVALUATION),
    _enum("ReevaluationDecision", Phase.REEVALUATION,
          ("continue_care", "change_treatment", "discharge")),
    _enum("PlanOfCare", Phase.REEVALUATION, ("home", "ward", "intermediate", "icu")),
)

CRITERION_BY_NAME: Mapping[str, Criterion] = {c.name: c for c in CRITERIA}
MAX_SCORE = len(CRITERIA)
NARRATIVE_STAGES = ("admission", "post_24h", "discharge")


class CatalogError(ValueError):
    """A gold record or answer set does not fit the criteria catalog."""


def check_value(criterion: Criterion, value: object) -> GoldValue:
    if criterion.kind is CriterionKind.BOOLEAN:
        if not isinstance(value, bool):
            raise CatalogError(
                f"criterion {criterion.name!r} takes true/false, got {value!r}")
        return value
    if not isinstance(value, str) or value not in criterion.values:
        raise CatalogError(
            f"criterion {criterion.name!r} takes one of {list(criterion.values)}, "
            f"got {value!r}")
    return value


def check_gold(gold: Mapping[str, object]) -> dict[str, GoldValue]:
    """Validate a complete gold record: every criterion, correct types."""
    unknown = sorted(set(gold) - set(CRITERION_BY_NAME))
    if unknown:
        raise CatalogError(f"unknown criteria {unknown}")
    missing = [c.name for c in CRITERIA if c.name not in gold]
    if missing:
        raise CatalogError(f"gold record is missing criteria {missing}")
    return {c.name: check_value(c, gold[c.name]) for c in CRITERIA}


def check_answers(answers: Mapping[str, object]) -> dict[str, GoldValue]:
    """Validate a (possibly partial) answer set against the catalog."""
    checked: dict[str, GoldValue] = {}
    for criterion in CRITERIA:
        if criterion.name in answers:
            checked[criterion.name] = check_value(criterion, answers[criterion.name])
    unknown = sorted(set(answers) - set(CRITERION_BY_NAME))
    if unknown:
        raise CatalogError(f"unknown criteria {unknown}")
    return checked


@dataclass(frozen=True)
class CaseDef:
    """One simulated patient case: narrative text plus gold answers."""

    id: int
    narrative: Mapping[str, str]
    gold: Mapping[str, GoldValue]


@dataclass(frozen=True)
class Transcript:
    """One participant's recorded run through one case."""

    participant: str
    group: str
    case: int
    answers: Mapping[str, GoldValue]
    demographics: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoreCard:
    per_criterion: Mapping[str, int]
    total: int
    phase_totals: Mapping[Phase, int]


def score_transcript(case: CaseDef, transcript: Transcript) -> ScoreCard:
    """Score one transcript: a point per criterion matching gold, absent is 0."""
    if transcript.case != case.id:
        raise CatalogError(
            f"transcript is for case {transcript.case}, scored against case {case.id}")
    per: dict[str, int] = {}
    phase_totals = {phase: 0 for phase in Phase}
    for criterion in CRITERIA:
        answered = transcript.answers.get(criterion.name)
        point = int(answered is not None and answered == case.gold[criterion.name])
        per[criterion.name] = point
        phase_totals[criterion.phase] += point
    return ScoreCard(per_criterion=per, total=sum(per.values()), phase_totals=phase_totals)
