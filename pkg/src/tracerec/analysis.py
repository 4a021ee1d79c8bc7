"""Experiment analysis: per-group metrics, agreement, consistency, U tests.

Works over exported annotation datasets and expert judgment files. The five
metrics are: task duration (seconds per requirement), expert-judged
accuracy (two experts each distribute 10 points over the associations made
for a requirement), within-group consistency (mean pairwise cosine between
participants' association vectors), and self-reported completeness and
correctness confidence on the -2..+2 scale.

Group comparisons use the two-sided Mann-Whitney-Wilcoxon rank-sum test
with midrank tie handling. The exact p-value enumerates the permutation
distribution over the observed value multiset and is used when the
enumeration is small enough; otherwise a tie-corrected normal approximation
with continuity correction applies. All operations are pure functions over
immutable inputs.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import IO, Iterable, Literal, Mapping, Optional, Sequence

import numpy as np

from .annotation_store import AnnotationRecord, split_escaped, unescape

JUDGMENT_COLUMNS = ("expert", "requirement_id", "association", "points", "format_version")
JUDGMENT_VERSION = 1
POINTS_PER_REQUIREMENT = 10
EXACT_CAP_DEFAULT = 200_000

AGREEMENT_BUCKETS = ("0", "1", "2", "3", ">3")


class AnalysisError(ValueError):
    """Invalid analysis input."""


@dataclass(frozen=True)
class JudgmentRecord:
    """One expert's point allocation over the associations of one requirement."""

    expert: str
    requirement_id: str
    points: Mapping[str, int]

    def __post_init__(self):
        for association, value in self.points.items():
            if not isinstance(value, int) or value < 0:
                raise AnalysisError(
                    f"expert {self.expert!r}, requirement {self.requirement_id!r}: "
                    f"points for {association!r} must be a non-negative integer"
                )
        object.__setattr__(self, "points", dict(self.points))


@dataclass(frozen=True)
class GroupSummary:
    label: str
    values: tuple[float, ...]
    median: float
    count: int


@dataclass(frozen=True)
class UTestResult:
    u: float
    n1: int
    n2: int
    p: float
    sided: str = "two-sided"
    method: Literal["exact", "normal-approximation"] = "exact"

    def to_dict(self) -> dict:
        return {
            "u": self.u,
            "n1": self.n1,
            "n2": self.n2,
            "p": self.p,
            "sided": self.sided,
            "method": self.method,
        }


@dataclass(frozen=True)
class AssociationVector:
    """A participant's per-term-position object assignment, as a numeric vector."""

    requirement_id: str
    participant: str
    mode: Literal["one-hot", "numeric-code"]
    components: tuple[float, ...]


def summarize(label: str, values: Sequence[float]) -> GroupSummary:
    """Median (mean of middle two for even counts) and count of one group."""
    if not values:
        raise AnalysisError(f"group {label!r} has no values")
    return GroupSummary(
        label=label,
        values=tuple(float(v) for v in values),
        median=float(statistics.median(values)),
        count=len(values),
    )


def duration_summary(records: Iterable[AnnotationRecord]) -> dict[str, GroupSummary]:
    """Per-treatment duration summaries (metric: time spent per requirement)."""
    groups: dict[str, list[float]] = {}
    for record in records:
        groups.setdefault(record.treatment, []).append(record.duration_s)
    if not groups:
        raise AnalysisError("no records to summarize")
    return {label: summarize(label, values) for label, values in groups.items()}


def _judgments_by_requirement(
    judgments: Iterable[JudgmentRecord],
) -> dict[str, dict[str, JudgmentRecord]]:
    grouped: dict[str, dict[str, JudgmentRecord]] = {}
    for judgment in judgments:
        experts = grouped.setdefault(judgment.requirement_id, {})
        if judgment.expert in experts:
            raise AnalysisError(
                f"expert {judgment.expert!r} judged requirement "
                f"{judgment.requirement_id!r} twice"
            )
        experts[judgment.expert] = judgment
    return grouped


def accuracy_scores(
    judgments: Iterable[JudgmentRecord],
    experts_required: int = 2,
) -> dict[str, dict[str, float]]:
    """Mean expert points per association (metric: relative accuracy).

    Every requirement must be judged by exactly ``experts_required`` experts
    and every expert's points must sum to exactly 10; associations one
    expert skipped count as 0 from that expert. Per requirement, the mean
    scores therefore sum back to 10.
    """
    grouped = _judgments_by_requirement(judgments)
    if not grouped:
        raise AnalysisError("no judgments supplied")
    means: dict[str, dict[str, float]] = {}
    for requirement_id, experts in grouped.items():
        if len(experts) != experts_required:
            raise AnalysisError(
                f"requirement {requirement_id!r} was judged by {len(experts)} "
                f"expert(s), expected {experts_required}"
            )
        for expert, judgment in experts.items():
            total = sum(judgment.points.values())
            if total != POINTS_PER_REQUIREMENT:
                raise AnalysisError(
                    f"expert {expert!r} distributed {total} points on requirement "
                    f"{requirement_id!r}, expected exactly {POINTS_PER_REQUIREMENT}"
                )
        associations = sorted({a for j in experts.values() for a in j.points})
        means[requirement_id] = {
            a: sum(j.points.get(a, 0) for j in experts.values()) / len(experts)
            for a in associations
        }
    return means


def agreement_buckets(judgments: Iterable[JudgmentRecord]) -> dict[str, int]:
    """Bucketed absolute point differences between the two experts.

    Buckets are 0, 1, 2, 3 and >3; counts sum to the number of judged
    associations. Requires exactly two experts judging identical
    association sets per requirement.
    """
    grouped = _judgments_by_requirement(judgments)
    if not grouped:
        raise AnalysisError("no judgments supplied")
    buckets = {key: 0 for key in AGREEMENT_BUCKETS}
    for requirement_id, experts in grouped.items():
        if len(experts) != 2:
            raise AnalysisError(
                f"agreement needs exactly 2 experts on requirement {requirement_id!r}, "
                f"got {len(experts)}"
            )
        first, second = experts.values()
        if set(first.points) != set(second.points):
            raise AnalysisError(
                f"experts judged different associations on requirement {requirement_id!r}"
            )
        for association in first.points:
            diff = abs(first.points[association] - second.points[association])
            key = str(diff) if diff <= 3 else ">3"
            buckets[key] += 1
    return buckets


def encode_vectors(
    annotations: Mapping[str, Sequence[object]],
    mode: Literal["one-hot", "numeric-code"] = "one-hot",
    requirement_id: str = "",
) -> list[AssociationVector]:
    """Encode per-participant term-position labels as comparable vectors.

    ``annotations`` maps participant -> one label per term position. In
    one-hot mode every position expands to indicator components over the
    label alphabet observed at that position, which makes the encoding
    invariant under relabeling. Numeric-code mode keeps the raw integer
    codes as components (1 conventionally meaning "no object").
    """
    if mode not in ("one-hot", "numeric-code"):
        raise AnalysisError(f"unknown encoding mode {mode!r}")
    if not annotations:
        raise AnalysisError("no annotations to encode")
    lengths = {participant: len(labels) for participant, labels in annotations.items()}
    if len(set(lengths.values())) != 1:
        raise AnalysisError(f"inconsistent term-position counts: {lengths}")
    n_positions = next(iter(lengths.values()))

    vectors: list[AssociationVector] = []
    if mode == "numeric-code":
        for participant, labels in annotations.items():
            components = []
            for label in labels:
                if isinstance(label, bool) or not isinstance(label, (int, float)):
                    raise AnalysisError(
                        f"numeric-code mode needs numeric labels, got {label!r}"
                    )
                components.append(float(label))
            vectors.append(
                AssociationVector(requirement_id, participant, mode, tuple(components))
            )
        return vectors

    alphabets = [
        sorted({str(labels[t]) for labels in annotations.values()})
        for t in range(n_positions)
    ]
    for participant, labels in annotations.items():
        components: list[float] = []
        for t in range(n_positions):
            for symbol in alphabets[t]:
                components.append(1.0 if str(labels[t]) == symbol else 0.0)
        vectors.append(
            AssociationVector(requirement_id, participant, mode, tuple(components))
        )
    return vectors


def consistency(vectors: Sequence[AssociationVector]) -> float:
    """Mean pairwise cosine similarity over all unordered vector pairs.

    With one-hot encoding and one active label per position this equals the
    average share of term positions on which two participants agree.
    """
    if len(vectors) < 2:
        raise AnalysisError("consistency needs at least 2 vectors")
    modes = {v.mode for v in vectors}
    if len(modes) != 1:
        raise AnalysisError(f"mixed encoding modes: {sorted(modes)}")
    dims = {len(v.components) for v in vectors}
    if len(dims) != 1:
        raise AnalysisError(f"mixed vector dimensions: {sorted(dims)}")
    if dims == {0}:
        raise AnalysisError("cannot measure consistency of zero-dimension vectors")

    rows = np.array([v.components for v in vectors], dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0):
        raise AnalysisError("zero vector has no direction; cosine undefined")
    total = 0.0
    pairs = 0
    for i, j in combinations(range(len(vectors)), 2):
        value = float(np.dot(rows[i], rows[j]) / (norms[i] * norms[j]))
        total += max(-1.0, min(1.0, value))
        pairs += 1
    return total / pairs


def confidence_distribution(
    records: Iterable[AnnotationRecord],
    which: Literal["correct", "complete"],
) -> dict[str, float]:
    """Shares of low ({-2,-1}), neutral ({0}) and high ({+1,+2}) confidence."""
    if which not in ("correct", "complete"):
        raise AnalysisError(f"unknown confidence kind {which!r}")
    values = [
        record.conf_correct if which == "correct" else record.conf_complete
        for record in records
    ]
    if not values:
        raise AnalysisError("no records to analyze")
    n = len(values)
    return {
        "low": sum(1 for v in values if v < 0) / n,
        "neutral": sum(1 for v in values if v == 0) / n,
        "high": sum(1 for v in values if v > 0) / n,
    }


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _u_from_ranks(rank_sum: float, n1: int) -> float:
    return rank_sum - n1 * (n1 + 1) / 2


def mann_whitney_u(
    group_a: Sequence[float],
    group_b: Sequence[float],
    method: Literal["auto", "exact", "normal"] = "auto",
    exact_cap: int = EXACT_CAP_DEFAULT,
) -> UTestResult:
    """Two-sided Mann-Whitney-Wilcoxon rank-sum test.

    The reported U is the statistic of ``group_a``; the complement identity
    ``U_a + U_b = n1 * n2`` always holds under midrank tie handling. The
    exact method enumerates every assignment of the pooled observations to
    the two groups and is only permitted while the enumeration size
    ``C(n1 + n2, n1)`` stays within ``exact_cap``.
    """
    n1, n2 = len(group_a), len(group_b)
    if n1 == 0 or n2 == 0:
        raise AnalysisError("both groups must be non-empty")
    pooled = [float(v) for v in group_a] + [float(v) for v in group_b]
    ranks = _midranks(pooled)
    u_obs = _u_from_ranks(sum(ranks[:n1]), n1)
    mu = n1 * n2 / 2

    space = math.comb(n1 + n2, n1)
    if method == "exact" and space > exact_cap:
        raise AnalysisError(
            f"exact method refused: enumeration size {space} exceeds cap {exact_cap}"
        )
    use_exact = method == "exact" or (method == "auto" and space <= exact_cap)

    if use_exact:
        dev = abs(u_obs - mu)
        extreme = 0
        for combo in combinations(range(n1 + n2), n1):
            u = _u_from_ranks(sum(ranks[i] for i in combo), n1)
            if abs(u - mu) >= dev:
                extreme += 1
        p = extreme / space
        return UTestResult(u=u_obs, n1=n1, n2=n2, p=p, method="exact")

    n = n1 + n2
    tie_counts: list[int] = []
    for value in sorted(set(pooled)):
        tie_counts.append(sum(1 for v in pooled if v == value))
    tie_term = sum(t**3 - t for t in tie_counts) / (n * (n - 1))
    variance = n1 * n2 / 12 * ((n + 1) - tie_term)
    if variance <= 0:
        return UTestResult(u=u_obs, n1=n1, n2=n2, p=1.0, method="normal-approximation")
    z = (abs(u_obs - mu) - 0.5) / math.sqrt(variance)
    if z < 0:
        z = 0.0
    p = min(1.0, math.erfc(z / math.sqrt(2)))
    return UTestResult(u=u_obs, n1=n1, n2=n2, p=p, method="normal-approximation")


def load_judgments(source: str | Path | IO[str]) -> list[JudgmentRecord]:
    """Parse the expert judgment CSV into one record per (expert, requirement)."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise AnalysisError("empty judgment document")
    if tuple(rows[0]) != JUDGMENT_COLUMNS:
        raise AnalysisError(f"unexpected judgment header {tuple(rows[0])!r}")
    grouped: dict[tuple[str, str], dict[str, int]] = {}
    order: list[tuple[str, str]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(JUDGMENT_COLUMNS):
            raise AnalysisError(f"line {lineno}: expected {len(JUDGMENT_COLUMNS)} fields")
        expert, requirement_id, association, points_text, version = row
        if version != str(JUDGMENT_VERSION):
            raise AnalysisError(f"line {lineno}: unsupported format version {version!r}")
        try:
            points = int(points_text)
        except ValueError as exc:
            raise AnalysisError(f"line {lineno}: bad points value: {exc}") from exc
        key = (expert, requirement_id)
        if key not in grouped:
            grouped[key] = {}
            order.append(key)
        if association in grouped[key]:
            raise AnalysisError(
                f"line {lineno}: duplicate association {association!r} for "
                f"expert {expert!r}, requirement {requirement_id!r}"
            )
        grouped[key][association] = points
    return [
        JudgmentRecord(expert=expert, requirement_id=requirement_id, points=grouped[(expert, requirement_id)])
        for expert, requirement_id in order
    ]


def dump_judgments(judgments: Iterable[JudgmentRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(JUDGMENT_COLUMNS)
    for judgment in judgments:
        for association, points in judgment.points.items():
            writer.writerow(
                [judgment.expert, judgment.requirement_id, association, points, JUDGMENT_VERSION]
            )
    return buffer.getvalue()


def parse_association_key(key: str) -> Optional[tuple[str, str, str]]:
    """Split a ``participant:term:code`` judgment key; None when not attributable."""
    fields = split_escaped(key, ":")
    if len(fields) != 3 or not fields[0]:
        return None
    return unescape(fields[0]), unescape(fields[1]), unescape(fields[2])


def _group_labels(records: Sequence[AnnotationRecord]) -> dict[str, str]:
    treatment_of: dict[str, str] = {}
    for record in records:
        treatment_of[record.participant] = record.treatment
    return treatment_of


def _consistency_for_group(
    records: Sequence[AnnotationRecord],
    encoding: Literal["one-hot", "numeric-code"],
    requirement_id: str,
) -> Optional[float]:
    """Consistency of one group on one requirement; None when undefined."""
    if len(records) < 2:
        return None
    positions: list[str] = sorted({term for r in records for term, _ in r.associations})
    if not positions:
        # Nobody associated anything: the group is in complete agreement.
        return 1.0
    annotations: dict[str, list[object]] = {}
    for record in records:
        assigned: dict[str, str] = {}
        for term, code in record.associations:
            assigned[term] = code  # last assignment of a term wins
        labels: list[object] = [assigned.get(position, "1") for position in positions]
        if encoding == "numeric-code":
            try:
                labels = [int(label) for label in labels]
            except ValueError as exc:
                raise AnalysisError(
                    "numeric-code consistency needs integer object codes"
                ) from exc
        annotations[record.participant] = labels
    vectors = encode_vectors(annotations, mode=encoding, requirement_id=requirement_id)
    return consistency(vectors)


def build_report(
    records: Sequence[AnnotationRecord],
    judgments: Sequence[JudgmentRecord] | None = None,
    encoding: Literal["one-hot", "numeric-code"] = "one-hot",
    exact_cap: int = EXACT_CAP_DEFAULT,
) -> dict:
    """Compute every metric, group summary and test over an exported dataset.

    Group comparisons are restricted to the requirements annotated by every
    participant, so unequal completion counts do not bias them; when no
    requirement is common the full dataset is used and flagged. Judgments
    are optional; without them the accuracy and agreement sections are
    omitted. The result is a JSON-serializable dictionary including
    per-figure data tables.
    """
    if not records:
        raise AnalysisError("empty dataset")
    treatment_of = _group_labels(records)
    participants = sorted(treatment_of)
    requirement_order: list[str] = []
    for record in records:
        if record.requirement_id not in requirement_order:
            requirement_order.append(record.requirement_id)

    completed: dict[str, set[str]] = {p: set() for p in participants}
    for record in records:
        completed[record.participant].add(record.requirement_id)
    common = [
        rid for rid in requirement_order
        if all(rid in done for done in completed.values())
    ]
    complete_cases = bool(common)
    compared_ids = common if complete_cases else list(requirement_order)
    compared = [r for r in records if r.requirement_id in set(compared_ids)]

    groups: dict[str, list[AnnotationRecord]] = {}
    for record in compared:
        groups.setdefault(record.treatment, []).append(record)
    group_labels = sorted(groups)

    def u_test_or_none(a: Sequence[float], b: Sequence[float]) -> Optional[dict]:
        if not a or not b:
            return None
        return mann_whitney_u(a, b, exact_cap=exact_cap).to_dict()

    report: dict = {
        "format": "analysis-report",
        "version": 1,
        "participants": {p: treatment_of[p] for p in participants},
        "complete_cases": complete_cases,
        "requirements_compared": compared_ids,
        "groups": {
            label: {
                "participants": sorted({r.participant for r in group}),
                "records": len(group),
            }
            for label, group in groups.items()
        },
        "metrics": {},
        "figures": {},
    }

    # M1: duration.
    durations = {label: [r.duration_s for r in group] for label, group in groups.items()}
    summaries = {
        label: summarize(label, values) for label, values in durations.items() if values
    }
    report["metrics"]["duration"] = {
        "summary": {
            label: {"median": s.median, "count": s.count} for label, s in summaries.items()
        },
        "u_test": (
            u_test_or_none(durations.get("ccr", []), durations.get("search", []))
        ),
    }
    report["figures"]["duration_by_requirement"] = [
        {
            "requirement": rid,
            "group": label,
            "values": [
                r.duration_s for r in groups.get(label, []) if r.requirement_id == rid
            ],
        }
        for rid in compared_ids
        for label in group_labels
    ]

    # M3: within-group consistency.
    consistency_values: dict[str, list[float]] = {label: [] for label in group_labels}
    consistency_rows = []
    for rid in compared_ids:
        for label in group_labels:
            group_records = [r for r in groups[label] if r.requirement_id == rid]
            value = _consistency_for_group(group_records, encoding, rid)
            if value is not None:
                consistency_values[label].append(value)
            consistency_rows.append({"requirement": rid, "group": label, "value": value})
    report["metrics"]["consistency"] = {
        "encoding": encoding,
        "summary": {
            label: {
                "median": statistics.median(values) if values else None,
                "count": len(values),
            }
            for label, values in consistency_values.items()
        },
        "u_test": u_test_or_none(
            consistency_values.get("ccr", []), consistency_values.get("search", [])
        ),
    }
    report["figures"]["consistency_by_requirement"] = consistency_rows

    # M4 and M5: self-reported confidence.
    for which, metric_name in (("correct", "confidence_correct"), ("complete", "confidence_complete")):
        values = {
            label: [
                r.conf_correct if which == "correct" else r.conf_complete for r in group
            ]
            for label, group in groups.items()
        }
        report["metrics"][metric_name] = {
            "distribution": {
                label: confidence_distribution(group, which) for label, group in groups.items()
            },
            "u_test": u_test_or_none(values.get("ccr", []), values.get("search", [])),
        }
        report["figures"][f"{metric_name}_counts"] = [
            {
                "group": label,
                "scale": point,
                "count": sum(1 for v in values[label] if v == point),
            }
            for label in group_labels
            for point in (-2, -1, 0, 1, 2)
        ]

    # M2: expert-judged accuracy, when judgments are supplied.
    if judgments:
        means = accuracy_scores(judgments)
        agreement = agreement_buckets(judgments)
        judged_ids = [rid for rid in requirement_order if rid in means]
        judged_ids += [rid for rid in means if rid not in judged_ids]
        accuracy_values: dict[str, list[float]] = {label: [] for label in group_labels}
        unattributed = 0
        accuracy_rows = []
        for rid in judged_ids:
            sums = {label: 0.0 for label in group_labels}
            for association, mean_points in means[rid].items():
                parsed = parse_association_key(association)
                participant = parsed[0] if parsed else None
                label = treatment_of.get(participant) if participant else None
                if label is None:
                    unattributed += 1
                    continue
                sums[label] = sums.get(label, 0.0) + mean_points
            for label in group_labels:
                accuracy_values[label].append(sums[label])
                accuracy_rows.append(
                    {"requirement": rid, "group": label, "mean_points": sums[label]}
                )
        report["metrics"]["accuracy"] = {
            "per_association": means,
            "agreement": agreement,
            "unattributed_associations": unattributed,
            "summary": {
                label: {
                    "median": statistics.median(values) if values else None,
                    "count": len(values),
                }
                for label, values in accuracy_values.items()
            },
            "u_test": u_test_or_none(
                accuracy_values.get("ccr", []), accuracy_values.get("search", [])
            ),
        }
        report["figures"]["accuracy_by_requirement"] = accuracy_rows

    return report
