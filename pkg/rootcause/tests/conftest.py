"""
Shared fixtures: hand-built reports, corpus files and a scripted tracker
endpoint served by http.server on a background thread.
"""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Dict, List, Optional
from urllib.parse import parse_qs, urlparse

import pytest

from rootcause.core.corpus import Corpus, RootCause
from rootcause.core.synthetic import separable_corpus
from rootcause.core.textprep import PrepConfig

# Label counts of a 1,139-report study corpus (470 program anomalies)
STUDY_COUNTS = {
    RootCause.CONFIGURATION: 150,
    RootCause.NETWORK: 90,
    RootCause.DATABASE: 34,
    RootCause.GUI: 100,
    RootCause.PERFORMANCE: 80,
    RootCause.PERMISSION_DEPRECATION: 60,
    RootCause.SECURITY: 95,
    RootCause.PROGRAM_ANOMALY: 470,
    RootCause.TEST_CODE: 60,
}


def make_record(
    report_id: str,
    label: Optional[str] = "gui-issue",
    summary: str = "button rendering broken",
    events: Optional[List[Dict[str, str]]] = None,
    resolution: Optional[str] = "fixed",
    ecosystem: str = "Apache",
    project: str = "ant",
    title: str = "",
) -> Dict[str, Any]:
    return {
        "id": report_id,
        "ecosystem": ecosystem,
        "project": project,
        "title": title,
        "summary": summary,
        "label": label,
        "resolution": resolution,
        "events": events or [],
    }


def write_jsonl(path, records) -> str:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write((record if isinstance(record, str) else json.dumps(record)) + "\n")
    return str(path)


@pytest.fixture
def records():
    return [
        make_record("A-1", "gui-issue", "Button rendering broken in dialog",
                    [{"kind": "reported", "ts": "2015-08-15T00:00:00Z"},
                     {"kind": "first-response", "ts": "2015-08-15T02:00:00Z"}]),
        make_record("A-2", "security-issue", "XSS vulnerability in login form"),
        make_record("A-3", None, "Unlabeled report text", resolution=None),
    ]


@pytest.fixture
def corpus_file(tmp_path, records):
    return write_jsonl(tmp_path / "corpus.jsonl", records)


@pytest.fixture
def study_corpus_file(tmp_path):
    rows = []
    for cause, count in STUDY_COUNTS.items():
        rows.extend(make_record(f"{cause.value}-{i}", cause.value, "summary text") for i in range(count))
    return write_jsonl(tmp_path / "study.jsonl", rows)


@pytest.fixture(scope="session")
def separable():
    return separable_corpus(per_class=20, seed=3)


@pytest.fixture(scope="session")
def classifier_prep():
    return PrepConfig.classifier()


@pytest.fixture(scope="session")
def lda_prep():
    return PrepConfig.lda()


def corpus_of(*reports) -> Corpus:
    return Corpus(tuple(reports), provenance="test")


# ============================================================================
# Scripted tracker endpoint
# ============================================================================

class ScriptedTracker:
    """
    In-memory tracker behind a local HTTP server.

    statuses: status codes answered (in order) before real pages are served
    body: replaces the paged JSON answer when set
    """

    def __init__(self):
        self.records: List[Dict[str, Any]] = []
        self.statuses: List[int] = []
        self.body: Any = None
        self.requests: List[Dict[str, str]] = []
        self.authorization: List[Optional[str]] = []
        self.url = ""

    def page(self, offset: int, limit: int) -> Dict[str, Any]:
        return {"results": self.records[offset:offset + limit]}


def _handler_for(tracker: ScriptedTracker):
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            params = {key: values[0] for key, values in parse_qs(urlparse(self.path).query).items()}
            tracker.requests.append(params)
            tracker.authorization.append(self.headers.get("Authorization"))

            if tracker.statuses:
                status = tracker.statuses.pop(0)
                if status != 200:
                    self._send(status, {"error": "scripted failure"})
                    return
            if tracker.body is not None:
                self._send(200, tracker.body)
                return
            self._send(200, tracker.page(int(params.get("offset", 0)), int(params.get("limit", 50))))

        def _send(self, status: int, body: Any):
            payload = body.encode("utf-8") if isinstance(body, str) else json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, format, *args):
            pass

    return Handler


@pytest.fixture
def tracker_server():
    tracker = ScriptedTracker()
    server = ThreadingHTTPServer(("127.0.0.1", 0), _handler_for(tracker))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    tracker.url = f"http://127.0.0.1:{server.server_address[1]}/rest/bugs"
    yield tracker
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)
