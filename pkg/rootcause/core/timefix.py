"""
Time-to-Fix Analysis

Five delays between consecutive timeline events, in fractional hours:

    DBR  reported       -> first-response
    DBA  first-response -> assigned
    DBC  assigned       -> commit-start
    DBF  commit-start   -> commit-end
    DAC  commit-end     -> resolved

Per-category box statistics use linear interpolation between closest ranks
for the quartiles.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from .corpus import BugReport, CANONICAL_ORDER, Corpus, EventKind, Resolution, RootCause

logger = logging.getLogger(__name__)

CSV_HEADER = ["category", "metric", "n", "min", "q1", "median", "mean", "q3", "max"]

SECONDS_PER_HOUR = 3600.0


class TimelineError(Exception):
    """Raised when a report's events are out of order for a requested delay"""
    pass


class DelayMetric(Enum):
    DBR = "dbr"
    DBA = "dba"
    DBC = "dbc"
    DBF = "dbf"
    DAC = "dac"

    @classmethod
    def parse(cls, text: str) -> "DelayMetric":
        try:
            return cls(str(text).strip().lower())
        except ValueError as e:
            raise TimelineError(f"Unknown delay metric: {text!r}") from e

    @property
    def events(self):
        return _METRIC_EVENTS[self]

    @property
    def label(self) -> str:
        return self.name


_METRIC_EVENTS = {
    DelayMetric.DBR: (EventKind.REPORTED, EventKind.FIRST_RESPONSE),
    DelayMetric.DBA: (EventKind.FIRST_RESPONSE, EventKind.ASSIGNED),
    DelayMetric.DBC: (EventKind.ASSIGNED, EventKind.COMMIT_START),
    DelayMetric.DBF: (EventKind.COMMIT_START, EventKind.COMMIT_END),
    DelayMetric.DAC: (EventKind.COMMIT_END, EventKind.RESOLVED),
}


@dataclass(frozen=True)
class DelaySet:
    dbr: Optional[float] = None
    dba: Optional[float] = None
    dbc: Optional[float] = None
    dbf: Optional[float] = None
    dac: Optional[float] = None

    def get(self, metric: DelayMetric) -> Optional[float]:
        return getattr(self, metric.value)


def delay_hours(report: BugReport, metric: DelayMetric) -> Optional[float]:
    """
    One delay of a report, or None when either event is missing.

    Raises:
        TimelineError: If the end event precedes the start event
    """
    start_kind, end_kind = metric.events
    start = report.event_time(start_kind)
    end = report.event_time(end_kind)
    if start is None or end is None:
        return None
    hours = (end - start).total_seconds() / SECONDS_PER_HOUR
    if hours < 0:
        raise TimelineError(
            f"Report {report.id}: {end_kind.value} precedes {start_kind.value} ({metric.label} = {hours:.2f} h)"
        )
    return hours


def compute_delays(report: BugReport) -> DelaySet:
    """All five delays of one report"""
    return DelaySet(**{metric.value: delay_hours(report, metric) for metric in DelayMetric})


@dataclass(frozen=True)
class BoxStats:
    n: int
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "BoxStats":
        data = np.asarray(values, dtype=np.float64)
        if data.size == 0:
            raise ValueError("BoxStats needs at least one value")
        q1, median, q3 = np.percentile(data, [25, 50, 75], method="linear")
        return cls(
            n=int(data.size),
            min=float(data.min()),
            q1=float(q1),
            median=float(median),
            mean=float(data.mean()),
            q3=float(q3),
            max=float(data.max()),
        )


@dataclass
class DelayStats:
    metric: DelayMetric
    per_category: Dict[RootCause, BoxStats]
    warnings: List[str] = field(default_factory=list)


def delay_stats(corpus: Corpus, metric: DelayMetric) -> DelayStats:
    """
    Box statistics of one delay per root-cause category.

    Only labeled reports whose resolution is fixed are used. A report with a
    corrupt timeline for this metric is left out with a warning; categories
    without any value are omitted with a warning.
    """
    values: Dict[RootCause, List[float]] = {cause: [] for cause in CANONICAL_ORDER}
    warnings: List[str] = []

    for report in corpus:
        if report.label is None or report.resolution is not Resolution.FIXED:
            continue
        try:
            hours = delay_hours(report, metric)
        except TimelineError as e:
            logger.warning(f"⚠️ {e}")
            warnings.append(str(e))
            continue
        if hours is not None:
            values[report.label].append(hours)

    per_category: Dict[RootCause, BoxStats] = {}
    for cause, samples in values.items():
        if samples:
            per_category[cause] = BoxStats.from_values(samples)
        else:
            message = f"No {metric.label} values for {cause.value}"
            logger.warning(f"⚠️ {message}")
            warnings.append(message)

    return DelayStats(metric, per_category, warnings)


def delay_report(corpus: Corpus, metrics: Optional[Sequence[DelayMetric]] = None) -> List[DelayStats]:
    """delay_stats for several metrics (all five by default), in metric order"""
    return [delay_stats(corpus, metric) for metric in (metrics or list(DelayMetric))]


def to_csv(report: Sequence[DelayStats]) -> str:
    """Box-plot data as CSV: category,metric,n,min,q1,median,mean,q3,max"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for stats in report:
        for cause, box in stats.per_category.items():
            writer.writerow([
                cause.value, stats.metric.label, box.n,
                *(f"{value:.4f}" for value in (box.min, box.q1, box.median, box.mean, box.q3, box.max)),
            ])
    return buffer.getvalue()
