"""Event-series containers and the change-point candidate grid.

All computations run on the unit interval: an observed series is
normalized so that every event time falls strictly inside (0, 1).
Candidate change-points live on a grid of 2n positions, two per event:
index 2m - 1 sits "just before" event m and index 2m sits at the event
time itself. Indices 0 and 2n + 1 are the fixed boundaries of the
interval. Segments are left-open, right-closed: an event whose time
equals a segment's right endpoint belongs to that segment only when the
endpoint is the "at" variant, otherwise it falls in the next segment.

The parity encoding makes event counting O(1): the number of events in
the segment between grid indices p_lo and p_hi is
``p_hi // 2 - p_lo // 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

BOUNDARY = "boundary"
BEFORE = "before"
AT = "at"


def _validated_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("event times must be a one-dimensional sequence")
    if t.size:
        if np.any(np.diff(t) < 0.0):
            raise ValueError("event times must be sorted ascending")
        if t[0] <= 0.0 or t[-1] >= 1.0:
            raise ValueError(
                "event times must lie strictly inside (0, 1) after "
                "normalization; widen the observation window"
            )
    return t


@dataclass(eq=False)
class EventSeries:
    """Sorted event times on (0, 1) with the original observation window.

    Parameters
    ----------
    times:
        Event times, sorted ascending, each strictly inside (0, 1).
        Tied times are legal but flagged through ``has_ties``.
    window:
        The original observation window (t_min, t_max) that was mapped
        onto (0, 1). Kept so results can be reported on the original
        scale.
    """

    times: np.ndarray
    window: tuple[float, float] = (0.0, 1.0)
    marks = None

    def __post_init__(self) -> None:
        self.times = _validated_times(self.times)
        w0, w1 = float(self.window[0]), float(self.window[1])
        if not w1 > w0:
            raise ValueError("window must satisfy t_min < t_max")
        self.window = (w0, w1)

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def has_ties(self) -> bool:
        return bool(self.times.size > 1 and np.any(np.diff(self.times) == 0.0))

    @property
    def width(self) -> float:
        return self.window[1] - self.window[0]

    def original_times(self) -> np.ndarray:
        return self.window[0] + self.times * self.width

    def to_original(self, u):
        """Map normalized positions back to the original time scale."""
        return self.window[0] + np.asarray(u, dtype=np.float64) * self.width

    @classmethod
    def from_window(cls, raw_times, window) -> "EventSeries":
        """Normalize raw times living in ``window`` onto (0, 1)."""
        w0, w1 = float(window[0]), float(window[1])
        if not w1 > w0:
            raise ValueError("window must satisfy t_min < t_max")
        raw = np.asarray(raw_times, dtype=np.float64)
        return cls((raw - w0) / (w1 - w0), window=(w0, w1))


@dataclass(eq=False)
class MarkedEventSeries:
    """Event times with one positive mark per event.

    Marks ride along with their events through thinning and
    segmentation; per-segment mark sums come from a cached prefix sum so
    repeated queries stay O(1).
    """

    times: np.ndarray
    marks: np.ndarray
    window: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        self.times = _validated_times(self.times)
        m = np.asarray(self.marks, dtype=np.float64)
        if m.shape != self.times.shape:
            raise ValueError("marks must align one-to-one with event times")
        if m.size and np.any(m <= 0.0):
            raise ValueError("marks must be strictly positive")
        self.marks = m
        w0, w1 = float(self.window[0]), float(self.window[1])
        if not w1 > w0:
            raise ValueError("window must satisfy t_min < t_max")
        self.window = (w0, w1)
        self._mark_prefix = np.concatenate(([0.0], np.cumsum(m)))

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def has_ties(self) -> bool:
        return bool(self.times.size > 1 and np.any(np.diff(self.times) == 0.0))

    @property
    def width(self) -> float:
        return self.window[1] - self.window[0]

    @property
    def mark_prefix(self) -> np.ndarray:
        """Prefix sums of the marks; entry m is the sum of the first m marks."""
        return self._mark_prefix

    def original_times(self) -> np.ndarray:
        return self.window[0] + self.times * self.width

    def to_original(self, u):
        return self.window[0] + np.asarray(u, dtype=np.float64) * self.width

    @classmethod
    def from_window(cls, raw_times, marks, window) -> "MarkedEventSeries":
        w0, w1 = float(window[0]), float(window[1])
        if not w1 > w0:
            raise ValueError("window must satisfy t_min < t_max")
        raw = np.asarray(raw_times, dtype=np.float64)
        return cls((raw - w0) / (w1 - w0), marks, window=(w0, w1))


@dataclass(frozen=True)
class GridPoint:
    """One candidate change-point position.

    ``side`` is "before" for odd indices (just left of an event), "at"
    for even interior indices (the event time itself) and "boundary"
    for the interval endpoints 0 and 2n + 1.
    """

    index: int
    side: str
    value: float


class CandidateGrid:
    """The 2n + 2 grid positions induced by an event series."""

    def __init__(self, events) -> None:
        self.events = events
        n = events.n
        vals = np.empty(2 * n + 2, dtype=np.float64)
        vals[0] = 0.0
        vals[-1] = 1.0
        if n:
            vals[1:-1] = np.repeat(events.times, 2)
        self.values = vals
        self.n = n
        # number of interior candidate positions, indices 1 .. size
        self.size = 2 * n
        self.mark_prefix = getattr(events, "mark_prefix", None)

    @property
    def last_index(self) -> int:
        return self.size + 1

    @property
    def is_marked(self) -> bool:
        return self.mark_prefix is not None

    def _check_index(self, p: int) -> int:
        p = int(p)
        if not 0 <= p <= self.last_index:
            raise IndexError(f"grid index {p} out of range [0, {self.last_index}]")
        return p

    def value(self, p: int) -> float:
        return float(self.values[self._check_index(p)])

    def side(self, p: int) -> str:
        p = self._check_index(p)
        if p == 0 or p == self.last_index:
            return BOUNDARY
        return BEFORE if p % 2 else AT

    def point(self, p: int) -> GridPoint:
        p = self._check_index(p)
        return GridPoint(p, self.side(p), float(self.values[p]))

    def count_between(self, p_lo: int, p_hi: int) -> int:
        """Events in the open-closed segment between two grid indices."""
        return p_hi // 2 - p_lo // 2


def build_grid(events) -> CandidateGrid:
    return CandidateGrid(events)


class SegmentStats(NamedTuple):
    count: int
    length: float
    mark_sum: float | None


def segment_stats(grid: CandidateGrid, p_lo: int, p_hi: int) -> SegmentStats:
    """Count, length and (for marked data) mark sum of a grid segment.

    The segment is (value(p_lo), value(p_hi)] with before/at semantics
    resolved by the indices. Raises IndexError for out-of-range indices
    and ValueError when p_lo >= p_hi.
    """
    p_lo = grid._check_index(p_lo)
    p_hi = grid._check_index(p_hi)
    if p_lo >= p_hi:
        raise ValueError("segment requires p_lo < p_hi")
    count = p_hi // 2 - p_lo // 2
    length = float(grid.values[p_hi] - grid.values[p_lo])
    if grid.mark_prefix is None:
        return SegmentStats(count, length, None)
    s = float(grid.mark_prefix[p_hi // 2] - grid.mark_prefix[p_lo // 2])
    return SegmentStats(count, length, s)


@dataclass(frozen=True)
class Segmentation:
    """K segments described by K - 1 interior grid points."""

    k: int
    change_points: tuple[GridPoint, ...]

    def __post_init__(self) -> None:
        if self.k != len(self.change_points) + 1:
            raise ValueError("segment count must be one more than the change-point count")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.change_points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(p.value for p in self.change_points)


def segmentation_from_indices(grid: CandidateGrid, indices) -> Segmentation:
    """Build and validate a segmentation from interior grid indices.

    Indices must be strictly increasing interior positions. Segments
    that would contain no event and have zero length are rejected; they
    only arise with tied event times and carry no information.
    """
    idx = [grid._check_index(p) for p in indices]
    for p in idx:
        if p == 0 or p == grid.last_index:
            raise ValueError("change-points must be interior grid positions")
    path = [0, *idx, grid.last_index]
    for lo, hi in zip(path[:-1], path[1:]):
        if lo >= hi:
            raise ValueError("change-point indices must be strictly increasing")
        if grid.count_between(lo, hi) == 0 and grid.values[hi] == grid.values[lo]:
            raise ValueError("segmentation contains an empty zero-length segment")
    return Segmentation(len(idx) + 1, tuple(grid.point(p) for p in idx))


def segment_index_path(grid: CandidateGrid, seg: Segmentation) -> list[int]:
    """Grid indices bounding each segment, boundaries included."""
    return [0, *seg.indices, grid.last_index]


def count_vector(grid: CandidateGrid, seg: Segmentation) -> np.ndarray:
    """Per-segment event counts; always sums to n."""
    path = np.asarray(segment_index_path(grid, seg))
    return path[1:] // 2 - path[:-1] // 2


def segment_lengths(grid: CandidateGrid, seg: Segmentation) -> np.ndarray:
    path = segment_index_path(grid, seg)
    vals = grid.values[path]
    return vals[1:] - vals[:-1]


def segment_mark_sums(grid: CandidateGrid, seg: Segmentation) -> np.ndarray:
    if grid.mark_prefix is None:
        raise ValueError("series carries no marks")
    path = np.asarray(segment_index_path(grid, seg))
    pref = grid.mark_prefix[path // 2]
    return pref[1:] - pref[:-1]


@dataclass(eq=False)
class PiecewiseIntensity:
    """Piecewise-constant intensity on (0, 1].

    breakpoints has K + 1 strictly increasing entries running from 0 to
    1; rates holds the K positive segment intensities. mark_rates, when
    present, holds the exponential rate of the marks on each segment.
    """

    breakpoints: np.ndarray
    rates: np.ndarray
    mark_rates: np.ndarray | None = None

    def __post_init__(self) -> None:
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        r = np.asarray(self.rates, dtype=np.float64)
        if bp.ndim != 1 or r.ndim != 1 or bp.size != r.size + 1:
            raise ValueError("need K + 1 breakpoints for K rates")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must run from 0 to 1")
        if np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(r <= 0.0):
            raise ValueError("rates must be strictly positive")
        self.breakpoints = bp
        self.rates = r
        if self.mark_rates is not None:
            mr = np.asarray(self.mark_rates, dtype=np.float64)
            if mr.shape != r.shape:
                raise ValueError("need one mark rate per segment")
            if np.any(mr <= 0.0):
                raise ValueError("mark rates must be strictly positive")
            self.mark_rates = mr
        self._cum = np.concatenate(([0.0], np.cumsum(r * np.diff(bp))))

    @property
    def k(self) -> int:
        return int(self.rates.size)

    def segment_of(self, t):
        """Index of the segment containing t, segments right-closed."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.breakpoints, t, side="left") - 1
        return np.clip(idx, 0, self.k - 1)

    def rate_at(self, t):
        return self.rates[self.segment_of(t)]

    def cumulative(self, t):
        """Integral of the intensity from 0 to t, evaluated exactly."""
        t = np.asarray(t, dtype=np.float64)
        idx = self.segment_of(t)
        return self._cum[idx] + self.rates[idx] * (t - self.breakpoints[idx])

    @property
    def total_mass(self) -> float:
        """Expected number of events on the whole interval."""
        return float(self._cum[-1])


def intensity_from_breaks(breakpoints, rates, mark_rates=None) -> PiecewiseIntensity:
    """PiecewiseIntensity that tolerates zero-length segments by dropping them.

    Fitted segmentations may contain a zero-length segment pinned to a
    single event; such segments carry no intensity mass and are removed
    before constructing the step function.
    """
    bp = np.asarray(breakpoints, dtype=np.float64)
    r = np.asarray(rates, dtype=np.float64)
    mr = None if mark_rates is None else np.asarray(mark_rates, dtype=np.float64)
    keep = np.diff(bp) > 0.0
    if not np.all(keep):
        r = r[keep]
        if mr is not None:
            mr = mr[keep]
        bp = np.concatenate((bp[:1], bp[1:][keep]))
    return PiecewiseIntensity(bp, r, mr)
