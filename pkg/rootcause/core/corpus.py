"""
Bug-Report Corpus

Data model for issue-tracker bug reports and the two on-disk corpus formats.

Key responsibilities:
- Closed root-cause taxonomy (RootCause) with a stable kebab-case form
- BugReport / BugEvent records and their validation
- Loading CSV / JSON-lines corpora with a per-row reject list
- Canonical serialisation (load -> save -> load is the identity)
- Category frequency and ecosystem characteristics
"""

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from dateutil.parser import isoparse

logger = logging.getLogger(__name__)


class CorpusError(Exception):
    """Base exception for corpus-related errors"""
    pass


class CorpusFormatError(CorpusError):
    """Raised when a corpus file cannot be read in the requested format"""
    pass


class DuplicateIdError(CorpusError):
    """Raised when a corpus would contain the same report id twice"""
    pass


class RecordError(CorpusError):
    """Raised when a single record fails validation"""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class RootCause(Enum):
    """The nine bug root-cause categories, in canonical order"""
    CONFIGURATION = "configuration-issue"
    NETWORK = "network-issue"
    DATABASE = "database-issue"
    GUI = "gui-issue"
    PERFORMANCE = "performance-issue"
    PERMISSION_DEPRECATION = "permission-deprecation-issue"
    SECURITY = "security-issue"
    PROGRAM_ANOMALY = "program-anomaly-issue"
    TEST_CODE = "test-code-issue"

    @classmethod
    def parse(cls, text: str) -> "RootCause":
        """
        Parse the canonical kebab-case form.

        Raises:
            RecordError: If the text names no category ("unknown label")
        """
        key = str(text).strip().lower()
        for member in cls:
            if member.value == key:
                return member
        raise RecordError("unknown label", repr(text))

    @classmethod
    def from_index(cls, index: int) -> "RootCause":
        return CANONICAL_ORDER[index]

    @property
    def index(self) -> int:
        return _INDEX[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY[self][0]

    @property
    def description(self) -> str:
        return _DISPLAY[self][1]

    def __str__(self) -> str:
        return self.value


_DISPLAY = {
    RootCause.CONFIGURATION: (
        "Configuration issue",
        "Wrong or missing configuration: build files, external libraries, plugins, paths."),
    RootCause.NETWORK: (
        "Network issue",
        "Connection, server or bandwidth problems between communicating components."),
    RootCause.DATABASE: (
        "Database-related issue",
        "Problems connecting to or querying a database, including wrong SQL."),
    RootCause.GUI: (
        "GUI-related issue",
        "Rendering, layout or interaction defects in the user interface."),
    RootCause.PERFORMANCE: (
        "Performance issue",
        "Excessive resource use: memory leaks, infinite loops, slow execution."),
    RootCause.PERMISSION_DEPRECATION: (
        "Permission/Deprecation issue",
        "Missing permissions or use of deprecated APIs and goals."),
    RootCause.SECURITY: (
        "Security issue",
        "Vulnerabilities and access-control problems."),
    RootCause.PROGRAM_ANOMALY: (
        "Program Anomaly issue",
        "Wrong program logic: crashes, exceptions, wrong return values."),
    RootCause.TEST_CODE: (
        "Test Code-related issue",
        "Defects in test code, including flaky tests."),
}

CANONICAL_ORDER: Tuple[RootCause, ...] = tuple(RootCause)
_INDEX = {cause: i for i, cause in enumerate(CANONICAL_ORDER)}
NUM_CLASSES = len(CANONICAL_ORDER)


class EventKind(Enum):
    """Timeline events mined from the tracker"""
    REPORTED = "reported"
    FIRST_RESPONSE = "first-response"
    ASSIGNED = "assigned"
    COMMIT_START = "commit-start"
    COMMIT_END = "commit-end"
    RESOLVED = "resolved"


class Resolution(Enum):
    FIXED = "fixed"
    NOT_FIXED = "not-fixed"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: Optional[str]) -> "Resolution":
        """Unknown or missing strings map to UNKNOWN"""
        if text is None:
            return cls.UNKNOWN
        key = str(text).strip().lower()
        for member in (cls.FIXED, cls.NOT_FIXED):
            if member.value == key:
                return member
        return cls.UNKNOWN


def parse_timestamp(text: str) -> datetime:
    """
    Parse RFC 3339 text into a UTC instant with second precision.

    Timestamps without an offset are read as UTC.

    Raises:
        RecordError: If the text is not a timestamp ("malformed timestamp")
    """
    try:
        ts = isoparse(str(text).strip())
    except (ValueError, OverflowError, TypeError) as e:
        raise RecordError("malformed timestamp", repr(text)) from e
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class BugEvent:
    kind: EventKind
    timestamp: datetime

    def to_record(self) -> Dict[str, str]:
        return {"kind": self.kind.value, "ts": format_timestamp(self.timestamp)}


@dataclass(frozen=True)
class BugReport:
    """
    One issue-tracker record.

    Events are stored sorted by timestamp (kind order breaks ties) with at
    most one event per kind.
    """
    id: str
    ecosystem: str
    project: str
    title: str
    summary: str
    label: Optional[RootCause] = None
    events: Tuple[BugEvent, ...] = ()
    resolution: Resolution = Resolution.UNKNOWN

    def __post_init__(self):
        if not self.id or not str(self.id).strip():
            raise RecordError("missing id")
        kinds = [event.kind for event in self.events]
        duplicated = sorted({k.value for k in kinds if kinds.count(k) > 1})
        if duplicated:
            raise RecordError("duplicate event kind", ", ".join(duplicated))
        kind_order = list(EventKind)
        ordered = tuple(sorted(self.events, key=lambda e: (e.timestamp, kind_order.index(e.kind))))
        object.__setattr__(self, "events", ordered)

    def event_time(self, kind: EventKind) -> Optional[datetime]:
        for event in self.events:
            if event.kind is kind:
                return event.timestamp
        return None

    def text(self, include_title: bool = False) -> str:
        """Classifier input text: the summary, optionally preceded by the title"""
        if include_title and self.title:
            return f"{self.title}\n{self.summary}"
        return self.summary

    def to_record(self) -> Dict[str, Any]:
        """Canonical JSON-lines record"""
        return {
            "id": self.id,
            "ecosystem": self.ecosystem,
            "project": self.project,
            "title": self.title,
            "summary": self.summary,
            "label": self.label.value if self.label else None,
            "resolution": None if self.resolution is Resolution.UNKNOWN else self.resolution.value,
            "events": [event.to_record() for event in self.events],
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "BugReport":
        """
        Validate one raw record (JSON-lines schema).

        Raises:
            RecordError: With a short reason string on any validation failure
        """
        if not isinstance(record, Mapping):
            raise RecordError("malformed record", type(record).__name__)

        raw_id = record.get("id")
        if raw_id is None or not str(raw_id).strip():
            raise RecordError("missing id")

        label_text = record.get("label")
        label = None
        if label_text is not None and str(label_text).strip():
            label = RootCause.parse(label_text)

        raw_events = record.get("events") or []
        if not isinstance(raw_events, list):
            raise RecordError("malformed events", "expected a list")
        events = []
        for raw in raw_events:
            if not isinstance(raw, Mapping):
                raise RecordError("malformed events", repr(raw))
            try:
                kind = EventKind(str(raw.get("kind")).strip().lower())
            except ValueError as e:
                raise RecordError("unknown event kind", repr(raw.get("kind"))) from e
            events.append(BugEvent(kind, parse_timestamp(raw.get("ts"))))

        return cls(
            id=str(raw_id).strip(),
            ecosystem=_text(record.get("ecosystem")),
            project=_text(record.get("project")),
            title=_text(record.get("title")),
            summary=_text(record.get("summary")),
            label=label,
            events=tuple(events),
            resolution=Resolution.parse(record.get("resolution")),
        )


def _text(value: Any) -> str:
    return "" if value is None else str(value)


@dataclass(frozen=True)
class RejectedRow:
    """A source row that failed validation"""
    row: int
    record_id: Optional[str]
    reason: str
    detail: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {"row": self.row, "id": self.record_id, "reason": self.reason, "detail": self.detail}


@dataclass(frozen=True)
class Corpus:
    """Immutable, id-unique collection of bug reports"""
    reports: Tuple[BugReport, ...]
    provenance: str = ""
    _by_id: Dict[str, BugReport] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "reports", tuple(self.reports))
        by_id: Dict[str, BugReport] = {}
        for report in self.reports:
            if report.id in by_id:
                raise DuplicateIdError(f"Duplicate report id: {report.id}")
            by_id[report.id] = report
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self) -> Iterator[BugReport]:
        return iter(self.reports)

    def get(self, report_id: str) -> Optional[BugReport]:
        return self._by_id.get(report_id)

    def labeled_subset(self) -> "Corpus":
        return Corpus(tuple(r for r in self.reports if r.label is not None), self.provenance)

    def fixed_subset(self) -> "Corpus":
        return Corpus(tuple(r for r in self.reports if r.resolution is Resolution.FIXED), self.provenance)

    def by_category(self) -> Dict[RootCause, List[BugReport]]:
        """Labeled reports grouped by category, in canonical category order"""
        groups: Dict[RootCause, List[BugReport]] = {cause: [] for cause in CANONICAL_ORDER}
        for report in self.reports:
            if report.label is not None:
                groups[report.label].append(report)
        return groups


# ============================================================================
# Loading
# ============================================================================

CSV_COLUMNS = [
    "id", "ecosystem", "project", "title", "summary", "label", "resolution",
    "ts_reported", "ts_first_response", "ts_assigned",
    "ts_commit_start", "ts_commit_end", "ts_resolved",
]

_CSV_EVENT_COLUMNS = {f"ts_{kind.value.replace('-', '_')}": kind for kind in EventKind}

FORMATS = ("csv", "jsonl")


def records_to_corpus(
    records: Iterable[Tuple[int, Any]],
    provenance: str
) -> Tuple[Corpus, List[RejectedRow]]:
    """
    Validate raw records into a Corpus.

    Args:
        records: (row number, raw record) pairs; a raw record that is an
            exception instance is rejected with its message
        provenance: Source descriptor stored on the corpus

    Returns:
        Tuple of (corpus, rejected rows); accepted + rejected = input rows
    """
    accepted: List[BugReport] = []
    rejects: List[RejectedRow] = []
    seen = set()

    for row, raw in records:
        raw_id = raw.get("id") if isinstance(raw, Mapping) else None
        record_id = str(raw_id).strip() if raw_id is not None else None
        if isinstance(raw, RecordError):
            rejects.append(RejectedRow(row, None, raw.reason, raw.detail))
            continue
        try:
            report = BugReport.from_record(raw)
        except RecordError as e:
            rejects.append(RejectedRow(row, record_id, e.reason, e.detail))
            continue
        if report.id in seen:
            rejects.append(RejectedRow(row, report.id, "duplicate id"))
            continue
        seen.add(report.id)
        accepted.append(report)

    if rejects:
        logger.warning(f"⚠️ {len(rejects)} of {len(accepted) + len(rejects)} rows rejected from {provenance}")
    logger.info(f"Loaded {len(accepted)} bug reports from {provenance}")
    return Corpus(tuple(accepted), provenance), rejects


def _read_jsonl(path: Path) -> Iterator[Tuple[int, Any]]:
    with open(path, "r", encoding="utf-8") as handle:
        for row, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield row, json.loads(line)
            except json.JSONDecodeError as e:
                yield row, RecordError("malformed json", str(e))


def _read_csv(path: Path) -> Iterator[Tuple[int, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [column for column in CSV_COLUMNS if column not in header]
        if missing:
            raise CorpusFormatError(f"CSV header of {path} lacks columns: {', '.join(missing)}")
        for row, values in enumerate(reader, start=2):
            yield row, _csv_row_to_record(values)


def _csv_row_to_record(values: Mapping[str, Optional[str]]) -> Dict[str, Any]:
    def cell(name):
        value = values.get(name)
        return value if value not in (None, "") else None

    events = [
        {"kind": kind.value, "ts": cell(column)}
        for column, kind in _CSV_EVENT_COLUMNS.items()
        if cell(column) is not None
    ]
    return {
        "id": cell("id"),
        "ecosystem": cell("ecosystem"),
        "project": cell("project"),
        "title": cell("title"),
        "summary": cell("summary"),
        "label": cell("label"),
        "resolution": cell("resolution"),
        "events": events,
    }


def load_corpus(path, format: str = "jsonl") -> Tuple[Corpus, List[RejectedRow]]:
    """
    Load and validate a corpus file.

    Args:
        path: CSV or JSON-lines file
        format: "csv" or "jsonl"

    Returns:
        Tuple of (corpus, rejected rows)

    Raises:
        CorpusFormatError: Unknown format, unreadable file or bad CSV header
    """
    fmt = str(format).lower()
    if fmt not in FORMATS:
        raise CorpusFormatError(f"Unknown corpus format: {format!r} (expected csv or jsonl)")

    path = Path(path)
    reader = _read_csv if fmt == "csv" else _read_jsonl
    try:
        return records_to_corpus(list(reader(path)), provenance=str(path))
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise CorpusFormatError(f"Cannot read corpus {path}: {e}") from e


def guess_format(path) -> str:
    """Format from the file extension (.csv -> csv, anything else -> jsonl)"""
    return "csv" if str(path).lower().endswith(".csv") else "jsonl"


# ============================================================================
# Saving
# ============================================================================

def save_corpus(corpus: Corpus, path, format: str = "jsonl") -> None:
    """Write the corpus in canonical form"""
    fmt = str(format).lower()
    if fmt not in FORMATS:
        raise CorpusFormatError(f"Unknown corpus format: {format!r} (expected csv or jsonl)")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if fmt == "jsonl":
            for report in corpus:
                handle.write(json.dumps(report.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
        else:
            writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for report in corpus:
                writer.writerow(_report_to_csv_row(report))

    logger.info(f"Wrote {len(corpus)} bug reports to {path}")


def _report_to_csv_row(report: BugReport) -> Dict[str, str]:
    record = report.to_record()
    row = {name: record.get(name) or "" for name in CSV_COLUMNS[:7]}
    for column, kind in _CSV_EVENT_COLUMNS.items():
        ts = report.event_time(kind)
        row[column] = format_timestamp(ts) if ts else ""
    return row


def write_rejects(rejects: List[RejectedRow], path) -> None:
    """Write the reject sidecar (one JSON object per rejected row)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for reject in rejects:
            handle.write(json.dumps(reject.to_record(), sort_keys=True) + "\n")


# ============================================================================
# Frequency analysis
# ============================================================================

@dataclass(frozen=True)
class CategoryShare:
    count: int
    share: float


def frequency(corpus: Corpus) -> Dict[RootCause, CategoryShare]:
    """
    How often each root cause occurs among the labeled reports.

    Every category is present in the result (count 0 when unused).

    Raises:
        CorpusError: If the corpus has no labeled report
    """
    counts = Counter(report.label for report in corpus if report.label is not None)
    total = sum(counts.values())
    if total == 0:
        raise CorpusError("Frequency analysis needs at least one labeled report")
    return {cause: CategoryShare(counts[cause], counts[cause] / total) for cause in CANONICAL_ORDER}


def frequency_by_ecosystem(corpus: Corpus) -> Dict[str, Dict[RootCause, CategoryShare]]:
    """Frequency map per ecosystem (ecosystems without labeled reports are left out)"""
    result = {}
    for ecosystem in sorted({report.ecosystem for report in corpus}):
        subset = Corpus(tuple(r for r in corpus if r.ecosystem == ecosystem and r.label is not None))
        if len(subset):
            result[ecosystem] = frequency(subset)
    return result


@dataclass(frozen=True)
class EcosystemSummary:
    ecosystem: str
    projects: int
    reports: int


def ecosystem_summary(corpus: Corpus) -> List[EcosystemSummary]:
    """Projects and bug reports per ecosystem, with a final Overall row"""
    projects: Dict[str, set] = {}
    reports: Counter = Counter()
    for report in corpus:
        projects.setdefault(report.ecosystem, set()).add(report.project)
        reports[report.ecosystem] += 1

    rows = [EcosystemSummary(name, len(projects[name]), reports[name]) for name in sorted(projects)]
    rows.append(EcosystemSummary("Overall", sum(r.projects for r in rows), len(corpus)))
    return rows
