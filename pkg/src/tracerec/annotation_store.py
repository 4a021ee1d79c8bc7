"""Persistence for requirements, sessions, and annotation records.

Annotation records capture, per (participant, requirement): the treatment
arm, the task duration in seconds, two self-reported confidences on the
five-point scale -2..+2 (correctness and completeness), and the produced
associations. Durations are measured by the service from task-open to
task-submit; a manual override slot exists because self-reported timing is
error prone.

The dataset export is UTF-8 CSV with columns ``participant``,
``treatment``, ``requirement_id``, ``duration_s``, ``conf_correct``,
``conf_complete``, ``associations``, ``format_version``. Associations are
semicolon-joined ``term:code`` pairs; backslash escapes the literal
characters ``\\``, ``:`` and ``;`` inside a term or code. Re-importing an
export reproduces the records exactly.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Literal, NamedTuple

REQUIREMENTS_FORMAT = "requirements"
REQUIREMENTS_VERSION = 1
DATASET_VERSION = 1
CONFIDENCE_SCALE = (-2, -1, 0, 1, 2)
TREATMENTS = ("ccr", "search")

EXPORT_COLUMNS = (
    "participant",
    "treatment",
    "requirement_id",
    "duration_s",
    "conf_correct",
    "conf_complete",
    "associations",
    "format_version",
)


class AnnotationError(ValueError):
    """Invalid requirement, record, or dataset document."""


@dataclass(frozen=True)
class Requirement:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise AnnotationError("requirement id must be non-empty")
        if not self.text:
            raise AnnotationError(f"requirement {self.id!r} has empty text")

    @property
    def word_count(self) -> int:
        return len(self.text.split())


class Association(NamedTuple):
    """One term -> object assignment.

    ``term`` identifies the annotated noun instance: a stem, or a positional
    label such as ``T8`` when the dataset encodes term positions.
    """

    term: str
    code: str


@dataclass(frozen=True)
class AnnotationRecord:
    participant: str
    treatment: Literal["ccr", "search"]
    requirement_id: str
    duration_s: float
    conf_correct: int
    conf_complete: int
    associations: tuple[Association, ...] = ()

    def __post_init__(self):
        if self.treatment not in TREATMENTS:
            raise AnnotationError(f"unknown treatment {self.treatment!r}")
        if self.duration_s < 0:
            raise AnnotationError("duration must be non-negative")
        for name, value in (("conf_correct", self.conf_correct), ("conf_complete", self.conf_complete)):
            if value not in CONFIDENCE_SCALE:
                raise AnnotationError(f"{name}={value} is outside the -2..+2 scale")
        object.__setattr__(
            self, "associations", tuple(Association(t, c) for t, c in self.associations)
        )


@dataclass
class Session:
    participant: str
    treatment: str
    completed: list[str] = field(default_factory=list)
    timestamps: list[float] = field(default_factory=list)


def import_requirements(source: str | Path | IO[str]) -> list[Requirement]:
    """Parse the requirements document: a JSON-lines file with a format header."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise AnnotationError("line 1: missing format header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"line 1: malformed header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != REQUIREMENTS_FORMAT:
        raise AnnotationError("line 1: missing or wrong format header")
    if header.get("version") != REQUIREMENTS_VERSION:
        raise AnnotationError(f"line 1: unsupported version {header.get('version')!r}")

    requirements: list[Requirement] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AnnotationError(f"line {lineno}: malformed record: {exc}") from exc
        try:
            requirement = Requirement(id=str(record.get("id", "")), text=record.get("text", ""))
        except AnnotationError as exc:
            raise AnnotationError(f"line {lineno}: {exc}") from exc
        if requirement.id in seen:
            raise AnnotationError(f"line {lineno}: duplicate requirement id {requirement.id!r}")
        seen.add(requirement.id)
        requirements.append(requirement)
    return requirements


def dump_requirements(requirements: Iterable[Requirement]) -> str:
    lines = [json.dumps({"format": REQUIREMENTS_FORMAT, "version": REQUIREMENTS_VERSION})]
    for req in requirements:
        lines.append(json.dumps({"id": req.id, "text": req.text}, ensure_ascii=False))
    return "\n".join(lines) + "\n"


_ESCAPES = {"\\": "\\\\", ":": "\\:", ";": "\\;"}


def _escape(value: str) -> str:
    out = []
    for ch in value:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def split_escaped(value: str, separator: str) -> list[str]:
    """Split on unescaped separators, keeping escape sequences intact."""
    parts: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            current.append(value[i : i + 2])
            i += 2
            continue
        if ch == separator:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


def unescape(value: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        if value[i] == "\\" and i + 1 < len(value):
            out.append(value[i + 1])
            i += 2
        else:
            out.append(value[i])
            i += 1
    return "".join(out)


def format_associations(associations: Iterable[Association]) -> str:
    return ";".join(f"{_escape(term)}:{_escape(code)}" for term, code in associations)


def parse_associations(text: str) -> tuple[Association, ...]:
    if not text:
        return ()
    associations = []
    for chunk in split_escaped(text, ";"):
        fields = split_escaped(chunk, ":")
        if len(fields) != 2:
            raise AnnotationError(f"malformed association {chunk!r}")
        associations.append(Association(unescape(fields[0]), unescape(fields[1])))
    return tuple(associations)


class AnnotationStore:
    """Serialized append-only record store with per-participant sessions.

    When bound to a path, each acknowledged append is written out before the
    call returns, so the on-disk dataset always reflects every acknowledged
    record in append order.
    """

    def __init__(
        self,
        requirements: Iterable[Requirement] = (),
        persist_path: str | Path | None = None,
    ):
        self.requirements: dict[str, Requirement] = {}
        for req in requirements:
            if req.id in self.requirements:
                raise AnnotationError(f"duplicate requirement id {req.id!r}")
            self.requirements[req.id] = req
        self.records: list[AnnotationRecord] = []
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._persist_path = Path(persist_path) if persist_path is not None else None

    def append_record(self, record: AnnotationRecord) -> AnnotationRecord:
        with self._lock:
            if self.requirements and record.requirement_id not in self.requirements:
                raise AnnotationError(f"unknown requirement id {record.requirement_id!r}")
            session = self.sessions.setdefault(
                record.participant, Session(record.participant, record.treatment)
            )
            if session.treatment != record.treatment:
                raise AnnotationError(
                    f"participant {record.participant!r} is in treatment "
                    f"{session.treatment!r}, record says {record.treatment!r}"
                )
            if record.requirement_id in session.completed:
                raise AnnotationError(
                    f"participant {record.participant!r} already annotated "
                    f"{record.requirement_id!r}"
                )
            self.records.append(record)
            session.completed.append(record.requirement_id)
            if self._persist_path is not None:
                self._persist_path.write_text(export_dataset(self), encoding="utf-8")
            return record

    def completed_by(self, participant: str) -> list[str]:
        session = self.sessions.get(participant)
        return list(session.completed) if session else []


def export_dataset(store: AnnotationStore, group: str = "all") -> str:
    """Render matching records as the documented CSV; empty store gives header only."""
    if group not in ("all",) + TREATMENTS:
        raise AnnotationError(f"unknown group filter {group!r}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EXPORT_COLUMNS)
    for record in store.records:
        if group != "all" and record.treatment != group:
            continue
        writer.writerow(
            [
                record.participant,
                record.treatment,
                record.requirement_id,
                repr(record.duration_s),
                record.conf_correct,
                record.conf_complete,
                format_associations(record.associations),
                DATASET_VERSION,
            ]
        )
    return buffer.getvalue()


def import_dataset(source: str | Path | IO[str]) -> list[AnnotationRecord]:
    """Parse a dataset export back into records (the export round-trip inverse)."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise AnnotationError("empty dataset document")
    header = tuple(rows[0])
    if header != EXPORT_COLUMNS:
        raise AnnotationError(f"unexpected dataset header {header!r}")
    records: list[AnnotationRecord] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(EXPORT_COLUMNS):
            raise AnnotationError(f"line {lineno}: expected {len(EXPORT_COLUMNS)} fields")
        if row[7] != str(DATASET_VERSION):
            raise AnnotationError(f"line {lineno}: unsupported format version {row[7]!r}")
        try:
            records.append(
                AnnotationRecord(
                    participant=row[0],
                    treatment=row[1],
                    requirement_id=row[2],
                    duration_s=float(row[3]),
                    conf_correct=int(row[4]),
                    conf_complete=int(row[5]),
                    associations=parse_associations(row[6]),
                )
            )
        except (AnnotationError, ValueError) as exc:
            raise AnnotationError(f"line {lineno}: {exc}") from exc
    return records
