"""
Issue-Tracker REST Client

Pages raw bug records out of a generic JSON REST endpoint and maps them onto
the corpus record schema through a field-mapping file.

The mapping file is a flat key-value file (dotenv syntax). Values are dot
paths into each remote JSON object; integer path parts index lists and a
``literal:`` prefix supplies a constant:

    RESULTS_PATH=data.issues
    QUERY_PARAM=jql
    ID=key
    ECOSYSTEM=literal:Apache
    SUMMARY=fields.description
    TS_REPORTED=fields.created

Keys left out fall back to the same-named field of the canonical JSONL
schema, so an endpoint that already serves canonical records needs no file.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Tuple

import requests
from dotenv import dotenv_values

from .corpus import Corpus, EventKind, RejectedRow, records_to_corpus

logger = logging.getLogger(__name__)


class TrackerError(Exception):
    """Base exception for tracker-related errors"""
    pass


class TrackerConnectionError(TrackerError):
    """Raised when the tracker stays unreachable after all retries"""
    pass


class TrackerHTTPError(TrackerError):
    """Raised on a non-retryable (or exhausted) non-2xx response"""

    def __init__(self, status: int, message: str):
        self.status = status
        super().__init__(message)


class TrackerSchemaError(TrackerError):
    """Raised when a response does not match the field mapping"""
    pass


RETRYABLE_STATUS = {429, 500, 502, 503, 504}

LITERAL_PREFIX = "literal:"

RECORD_FIELDS = ("id", "ecosystem", "project", "title", "summary", "label", "resolution")
EVENT_FIELDS = {f"ts_{kind.value.replace('-', '_')}": kind for kind in EventKind}


@dataclass(frozen=True)
class FieldMapping:
    """Remote JSON paths for each BugReport field plus the paging parameters"""
    results_path: str = "results"
    query_param: str = "q"
    offset_param: str = "offset"
    limit_param: str = "limit"
    fields: Dict[str, str] = field(default_factory=lambda: {name: name for name in RECORD_FIELDS})
    events_path: Optional[str] = "events"
    event_paths: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "FieldMapping":
        """
        Read a mapping file.

        Raises:
            TrackerSchemaError: On unknown keys or a missing file
        """
        path = Path(path)
        if not path.is_file():
            raise TrackerSchemaError(f"Field-mapping file not found: {path}")
        return cls.from_dict(dotenv_values(path))

    @classmethod
    def from_dict(cls, values: Mapping[str, Optional[str]]) -> "FieldMapping":
        paging = {"results_path": "results", "query_param": "q",
                  "offset_param": "offset", "limit_param": "limit"}
        record_fields = {name: name for name in RECORD_FIELDS}
        events_path: Optional[str] = "events"
        event_paths: Dict[str, str] = {}

        for key, value in values.items():
            name = key.strip().lower()
            value = (value or "").strip()
            if name in paging:
                paging[name] = value
            elif name in record_fields:
                record_fields[name] = value
            elif name == "events":
                events_path = value or None
            elif name in EVENT_FIELDS:
                event_paths[name] = value
            else:
                raise TrackerSchemaError(f"Unknown field-mapping key: {key}")

        # Per-kind timestamp paths replace the canonical events list
        if event_paths and "events" not in {k.strip().lower() for k in values}:
            events_path = None

        return cls(fields=record_fields, events_path=events_path, event_paths=event_paths, **paging)

    def to_record(self, raw: Mapping[str, Any]) -> Dict[str, Any]:
        """Project one remote object onto the canonical record schema"""
        record = {name: resolve_path(raw, path) for name, path in self.fields.items()}

        events: List[Dict[str, Any]] = []
        if self.events_path:
            remote_events = resolve_path(raw, self.events_path)
            if remote_events is not None:
                if not isinstance(remote_events, list):
                    raise TrackerSchemaError(f"'{self.events_path}' is not a list")
                events.extend(remote_events)
        for name, path in self.event_paths.items():
            ts = resolve_path(raw, path)
            if ts not in (None, ""):
                events.append({"kind": EVENT_FIELDS[name].value, "ts": ts})

        record["events"] = events
        return record


def resolve_path(obj: Any, path: str) -> Any:
    """Follow a dot path through dicts and lists; missing parts give None"""
    if not path:
        return None
    if path.startswith(LITERAL_PREFIX):
        return path[len(LITERAL_PREFIX):]
    current = obj
    for part in path.split("."):
        if isinstance(current, Mapping):
            current = current.get(part)
        elif isinstance(current, list) and part.lstrip("-").isdigit():
            index = int(part)
            current = current[index] if -len(current) <= index < len(current) else None
        else:
            return None
        if current is None:
            return None
    return current


def backoff_delay(attempt: int, base: float, cap: float) -> float:
    """Exponential backoff: min(cap, base * 2^attempt)"""
    return min(cap, base * (2 ** attempt))


class TrackerClient:
    """
    Paginated client for a generic JSON bug-tracker endpoint.

    Connection failures, timeouts, 429 and 5xx answers are retried with
    bounded exponential backoff; any other non-2xx status fails at once.

    Usage:
        client = TrackerClient("https://tracker.example/rest/bugs", FieldMapping())
        for raw in client.fetch("product=Ant"):
            ...
    """

    def __init__(
        self,
        endpoint: str,
        mapping: Optional[FieldMapping] = None,
        page_size: int = 50,
        token: str = "",
        timeout: float = 30.0,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        backoff_cap: float = 60.0,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep
    ):
        if page_size < 1:
            raise ValueError("page_size must be a positive integer")

        self.endpoint = endpoint
        self.mapping = mapping or FieldMapping()
        self.page_size = page_size
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep

        self.session = session or requests.Session()
        self.session.headers.update({"Accept": "application/json"})
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"

        logger.debug(f"Tracker client initialized for {endpoint} (page size {page_size})")

    def fetch(self, query: str) -> Iterator[Dict[str, Any]]:
        """
        Yield raw remote records page by page.

        Paging stops at an empty page or at a page shorter than page_size.
        """
        offset = 0
        total = 0
        while True:
            page = self._get_page(query, offset)
            total += len(page)
            yield from page
            if len(page) < self.page_size:
                break
            offset += len(page)
        logger.info(f"Fetched {total} raw records from {self.endpoint}")

    def _get_page(self, query: str, offset: int) -> List[Dict[str, Any]]:
        params = {
            self.mapping.query_param: query,
            self.mapping.offset_param: offset,
            self.mapping.limit_param: self.page_size,
        }
        response = self._request(params)

        try:
            body = response.json()
        except ValueError as e:
            raise TrackerSchemaError(f"Response at offset {offset} is not JSON") from e

        results = resolve_path(body, self.mapping.results_path) if self.mapping.results_path else body
        if not isinstance(results, list):
            raise TrackerSchemaError(
                f"Results path '{self.mapping.results_path}' does not hold a list at offset {offset}"
            )
        return results

    def _request(self, params: Dict[str, Any]) -> requests.Response:
        attempt = 0
        while True:
            try:
                response = self.session.get(self.endpoint, params=params, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as e:
                if attempt >= self.max_retries:
                    raise TrackerConnectionError(
                        f"Tracker unreachable after {attempt + 1} attempts: {e}"
                    ) from e
                logger.warning(f"⚠️ Tracker request failed ({e}), retrying")
            else:
                if 200 <= response.status_code < 300:
                    return response
                if response.status_code not in RETRYABLE_STATUS or attempt >= self.max_retries:
                    raise TrackerHTTPError(
                        response.status_code,
                        f"Tracker answered HTTP {response.status_code} for {response.url}"
                    )
                logger.warning(f"⚠️ Tracker answered HTTP {response.status_code}, retrying")

            delay = backoff_delay(attempt, self.backoff_base, self.backoff_cap)
            logger.debug(f"Backing off {delay:.1f}s (attempt {attempt + 1})")
            self._sleep(delay)
            attempt += 1

    def close(self) -> None:
        self.session.close()

    def __enter__(self) -> "TrackerClient":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def fetch_tracker(
    endpoint: str,
    query: str,
    page_size: int = 50,
    mapping: Optional[FieldMapping] = None,
    **client_options
) -> Iterator[Dict[str, Any]]:
    """Stream raw records from a tracker endpoint"""
    with TrackerClient(endpoint, mapping, page_size=page_size, **client_options) as client:
        yield from client.fetch(query)


def ingest_tracker(
    endpoint: str,
    query: str,
    page_size: int = 50,
    mapping: Optional[FieldMapping] = None,
    **client_options
) -> Tuple[Corpus, List[RejectedRow]]:
    """
    Fetch a tracker export and validate it exactly as load_corpus does.

    Returns:
        Tuple of (corpus, rejected rows); rows are numbered from 1 in fetch order
    """
    mapping = mapping or FieldMapping()
    rows = []
    for row, raw in enumerate(fetch_tracker(endpoint, query, page_size, mapping, **client_options), start=1):
        if not isinstance(raw, Mapping):
            raise TrackerSchemaError(f"Record {row} is not a JSON object")
        rows.append((row, mapping.to_record(raw)))
    return records_to_corpus(rows, provenance=f"{endpoint}?{query}")
