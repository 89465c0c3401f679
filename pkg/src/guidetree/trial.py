"""Group comparison harness for simulation trials.

Scores transcripts against their cases, aggregates per-group score
vectors, and compares group pairs with Welch t-tests: one test on the
total score and one per criterion, flagged against a Bonferroni-adjusted
threshold. Reports are plain dicts ready for canonical JSON output and
are byte-identical under any permutation of the input transcripts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .criteria import CRITERIA, MAX_SCORE, CaseDef, ScoreCard, Transcript, score_transcript
from .stats import (
    DegenerateSampleError,
    WelchResult,
    bonferroni_threshold,
    mean,
    sample_variance,
    welch_t_test,
)

REPORT_FORMAT_VERSION = 1


class TrialError(ValueError):
    pass


@dataclass(frozen=True)
class ScoredTranscript:
    transcript: Transcript
    card: ScoreCard


@dataclass(frozen=True)
class PairSpec:
    """One requested comparison: a pool of groups against another."""

    left: tuple[str, ...]
    right: tuple[str, ...]

    @property
    def label(self) -> str:
        return f"{'+'.join(self.left)} vs {'+'.join(self.right)}"


def score_dataset(
    transcripts: Sequence[Transcript], cases: Mapping[int, CaseDef]
) -> list[ScoredTranscript]:
    scored: list[ScoredTranscript] = []
    for transcript in transcripts:
        case = cases.get(transcript.case)
        if case is None:
            raise TrialError(
                f"transcript of participant {transcript.participant!r} references "
                f"unknown case {transcript.case}")
        scored.append(ScoredTranscript(transcript, score_transcript(case, transcript)))
    return scored


def _groups_of(scored: Sequence[ScoredTranscript]) -> dict[str, list[ScoredTranscript]]:
    groups: dict[str, list[ScoredTranscript]] = {}
    for item in scored:
        groups.setdefault(item.transcript.group, []).append(item)
    return groups


def parse_pair_spec(spec: str, known_groups: Sequence[str]) -> PairSpec:
    """Parse "LEFT:RIGHT" where each side pools one or more groups.

    A side is group labels joined with "+"; as a shorthand, a token that
    is not itself a group label but whose every character is one pools
    those single-letter groups (so "AB" means "A+B").
    """
    known = set(known_groups)
    parts = spec.split(":")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise TrialError(f"pair spec {spec!r} must look like LEFT:RIGHT")

    def resolve(side: str) -> tuple[str, ...]:
        labels: list[str] = []
        for token in side.split("+"):
            if token in known:
                labels.append(token)
            elif token and all(ch in known for ch in token):
                labels.extend(token)
            else:
                raise TrialError(
                    f"pair spec {spec!r}: {token!r} names no group "
                    f"(known: {sorted(known)})")
        if len(set(labels)) != len(labels):
            raise TrialError(f"pair spec {spec!r} pools group {labels!r} twice")
        return tuple(labels)

    left, right = resolve(parts[0]), resolve(parts[1])
    if set(left) & set(right):
        raise TrialError(f"pair spec {spec!r} uses a group on both sides")
    return PairSpec(left=left, right=right)


def _pool(groups: Mapping[str, list[ScoredTranscript]],
          labels: tuple[str, ...]) -> list[ScoredTranscript]:
    pooled: list[ScoredTranscript] = []
    for label in labels:
        pooled.extend(groups[label])
    return pooled


def _welch_to_dict(result: WelchResult) -> dict:
    return {
        "t": result.t,
        "df": result.df,
        "p": result.p_value,
        "mean_left": result.mean_a,
        "mean_right": result.mean_b,
        "n_left": result.n_a,
        "n_right": result.n_b,
    }


def _compare_vectors(left: list[float], right: list[float]) -> tuple[dict, float | None]:
    """Welch comparison as a report entry; degenerate pairs carry no p."""
    try:
        result = welch_t_test(left, right)
    except DegenerateSampleError:
        return {
            "t": None,
            "df": None,
            "p": None,
            "degenerate": True,
            "mean_left": mean(left),
            "mean_right": mean(right),
            "n_left": len(left),
            "n_right": len(right),
        }, None
    return _welch_to_dict(result), result.p_value


def tidy_rows(scored: Sequence[ScoredTranscript]) -> list[dict]:
    """Long-format observations (one row per transcript and criterion),
    sorted so any input order yields the same table."""
    ordered = sorted(
        scored,
        key=lambda item: (item.transcript.group, item.transcript.participant,
                          item.transcript.case))
    return [
        {
            "participant": item.transcript.participant,
            "case": item.transcript.case,
            "group": item.transcript.group,
            "criterion": criterion.name,
            "score": item.card.per_criterion[criterion.name],
        }
        for item in ordered
        for criterion in CRITERIA
    ]


def build_report(
    transcripts: Sequence[Transcript],
    cases: Mapping[int, CaseDef],
    pair_specs: Sequence[str],
    alpha: float = 0.05,
    comparisons: int = MAX_SCORE,
) -> dict:
    """Score a dataset and compare the requested group pairs."""
    if not pair_specs:
        raise TrialError("at least one pair is required")
    scored = score_dataset(transcripts, cases)
    groups = _groups_of(scored)
    threshold = bonferroni_threshold(alpha, comparisons)
    pairs = [parse_pair_spec(spec, list(groups)) for spec in pair_specs]

    group_summaries = {}
    for label in sorted(groups):
        totals = [float(item.card.total) for item in groups[label]]
        entry = {"n": len(totals), "mean_total": mean(totals)}
        if len(totals) >= 2:
            entry["sd_total"] = math.sqrt(sample_variance(totals))
        group_summaries[label] = entry

    pair_entries = []
    for pair in pairs:
        left = _pool(groups, pair.left)
        right = _pool(groups, pair.right)
        for side, members in (("left", left), ("right", right)):
            if len(members) < 2:
                raise TrialError(
                    f"pair {pair.label!r}: {side} side has {len(members)} "
                    f"transcripts, need at least 2")
        total, _ = _compare_vectors(
            [float(i.card.total) for i in left],
            [float(i.card.total) for i in right])
        criteria_entries = {}
        flagged = []
        for criterion in CRITERIA:
            entry, p_value = _compare_vectors(
                [float(i.card.per_criterion[criterion.name]) for i in left],
                [float(i.card.per_criterion[criterion.name]) for i in right])
            hit = p_value is not None and p_value < threshold
            criteria_entries[criterion.name] = dict(entry, flagged=hit)
            if hit:
                flagged.append(criterion.name)
        pair_entries.append({
            "left": list(pair.left),
            "right": list(pair.right),
            "label": pair.label,
            "total": total,
            "criteria": criteria_entries,
            "flagged": flagged,
        })

    return {
        "format_version": REPORT_FORMAT_VERSION,
        "max_score": MAX_SCORE,
        "alpha": alpha,
        "comparisons": comparisons,
        "threshold": threshold,
        "n_transcripts": len(scored),
        "groups": group_summaries,
        "pairs": pair_entries,
        "tidy": tidy_rows(scored),
    }
