"""Segment-count selection by thinning cross-validation.

Thinning a Poisson process with keep-probability f yields two
independent Poisson processes whose intensities are f and 1 - f times
the original. Each replicate therefore splits the data into a learning
and a test set, segments the learning set at every candidate K with a
marginal-likelihood contrast, and scores the learned model on the test
set: the learned posterior-mean rates, multiplied by (1 - f) / f, are
exactly the test process rates under the learned segmentation. For
marked data the mark-rate estimates transfer unscaled, since thinning
does not touch the marks.

The selected K minimizes the replicate-averaged test contrast; ties go
to the smaller K. Replicate randomness comes from independent child
streams of one seed sequence, so results are reproducible and
independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contrasts import (
    default_spec,
    marked_loglik,
    poisson_loglik,
    posterior_mean_mark_rate,
    posterior_mean_rate,
)
from .dp import TIES_WARNING, solve
from .model import (
    EventSeries,
    MarkedEventSeries,
    Segmentation,
    build_grid,
    count_vector,
    intensity_from_breaks,
    segment_lengths,
    segment_mark_sums,
)


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings.

    fraction is the learning-set keep probability, replicates the
    number of thinning rounds, kmax the largest segment count tried.
    prior_shape is the Gamma shape a used when refreshing
    hyper-parameters from each learning set (the rate is always
    a / n so the prior mean matches the observed count). K values that
    were feasible in fewer than min_defined_fraction of the replicates
    are excluded from selection.
    """

    fraction: float = 0.8
    replicates: int = 500
    kmax: int = 12
    seed: int = 0
    min_defined_fraction: float = 0.5
    prior_shape: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must lie strictly between 0 and 1")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")
        if not 0.0 <= self.min_defined_fraction <= 1.0:
            raise ValueError("min_defined_fraction must lie in [0, 1]")
        if not self.prior_shape > 0.0:
            raise ValueError("prior_shape must be positive")


def thin(data, fraction: float, rng: np.random.Generator):
    """Split a series into independent learning and test subsets.

    Each event joins the learning set with probability ``fraction``;
    marks travel with their events.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    keep = rng.random(data.n) < fraction
    if data.marks is None:
        learn = EventSeries(data.times[keep], window=data.window)
        test = EventSeries(data.times[~keep], window=data.window)
    else:
        learn = MarkedEventSeries(data.times[keep], data.marks[keep], window=data.window)
        test = MarkedEventSeries(data.times[~keep], data.marks[~keep], window=data.window)
    return learn, test


def _counts_between(times: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    # events in (b_{k-1}, b_k]; right-closed matches the segment rule
    pos = np.searchsorted(times, bounds, side="right")
    return pos[1:] - pos[:-1]


def _mark_sums_between(series: MarkedEventSeries, bounds: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(series.times, bounds, side="right")
    pref = series.mark_prefix[pos]
    return pref[1:] - pref[:-1]


@dataclass(frozen=True)
class CvCurve:
    """Replicate-averaged test contrasts per candidate segment count."""

    ks: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    counts: tuple[int, ...]
    replicates: int
    warnings: tuple[str, ...] = ()

    def best_k(self, min_defined_fraction: float = 0.5) -> int:
        """Smallest K attaining the minimal average test contrast."""
        threshold = min_defined_fraction * self.replicates
        best = None
        best_mean = None
        for k, mean, count in zip(self.ks, self.means, self.counts):
            if count < threshold or count == 0 or math.isnan(mean):
                continue
            if best_mean is None or mean < best_mean:
                best = k
                best_mean = mean
        if best is None:
            raise ValueError("no candidate K was defined in enough replicates")
        return best


def cross_validate(data, config: CvConfig | None = None) -> CvCurve:
    """Average test contrasts over thinning replicates for K = 1..kmax."""
    cfg = config if config is not None else CvConfig()
    if data.n == 0:
        raise ValueError("cross-validation needs at least one event")
    marked = data.marks is not None
    m_total, kmax = cfg.replicates, cfg.kmax
    ratio = (1.0 - cfg.fraction) / cfg.fraction
    gammas = np.full((m_total, kmax), np.nan)
    streams = np.random.SeedSequence(cfg.seed).spawn(m_total)
    empty_learning = 0
    for m in range(m_total):
        rng = np.random.default_rng(streams[m])
        learn, test = thin(data, cfg.fraction, rng)
        if learn.n == 0:
            empty_learning += 1
            continue
        spec = default_spec(learn, a=cfg.prior_shape)
        grid = build_grid(learn)
        results = solve(grid, spec, kmax)
        for res in results:
            if not res.feasible or res.segmentation is None:
                continue
            seg = res.segmentation
            counts = count_vector(grid, seg)
            lengths = segment_lengths(grid, seg)
            lam = posterior_mean_rate(counts, lengths, spec.a, spec.b)
            rates = lam * ratio
            assert np.all(rates == lam * ratio)
            bounds = np.concatenate(([0.0], seg.values, [1.0]))
            test_counts = _counts_between(test.times, bounds)
            if marked:
                rho = posterior_mean_mark_rate(
                    counts, segment_mark_sums(grid, seg), spec.a_rho, spec.b_rho
                )
                test_sums = _mark_sums_between(test, bounds)
                score = -marked_loglik(test_counts, lengths, test_sums, rates, rho)
            else:
                score = -poisson_loglik(test_counts, lengths, rates)
            gammas[m, res.k - 1] = score
    defined = ~np.isnan(gammas)
    counts_k = defined.sum(axis=0)
    means = np.full(kmax, np.nan)
    stderrs = np.zeros(kmax)
    for j in range(kmax):
        col = gammas[defined[:, j], j]
        if col.size:
            means[j] = np.mean(col)
        if col.size >= 2:
            stderrs[j] = np.std(col, ddof=1) / np.sqrt(col.size)
    warnings = ()
    if data.has_ties:
        warnings += (TIES_WARNING,)
    if empty_learning:
        warnings += (f"{empty_learning} replicate(s) dropped: empty learning set",)
    return CvCurve(
        ks=tuple(range(1, kmax + 1)),
        means=tuple(float(v) for v in means),
        stderrs=tuple(float(v) for v in stderrs),
        counts=tuple(int(c) for c in counts_k),
        replicates=m_total,
        warnings=warnings,
    )


@dataclass(eq=False)
class FitResult:
    """Selected model with posterior-mean rate estimates.

    Rates are per unit normalized time; divide by the window width for
    original-scale rates. ``contrast_by_k`` maps each feasible K to its
    optimal full-data contrast.
    """

    k_hat: int
    segmentation: Segmentation
    change_point_values: tuple[float, ...]
    change_point_times: tuple[float, ...]
    rates: tuple[float, ...]
    mark_rates: tuple[float, ...] | None
    contrast: float
    contrast_by_k: dict[int, float]
    curve: CvCurve
    window: tuple[float, float]
    warnings: tuple[str, ...]

    def breakpoints(self) -> np.ndarray:
        """Normalized change-points including both boundaries."""
        return np.concatenate(([0.0], self.change_point_values, [1.0]))

    def intensity(self):
        """Fitted step intensity; zero-length segments are dropped."""
        return intensity_from_breaks(self.breakpoints(), self.rates, self.mark_rates)


def fit(data, config: CvConfig | None = None) -> FitResult:
    """Select K by cross-validation, then refit on the full data.

    The final segmentation optimizes the marginal contrast on the whole
    series with hyper-parameters refreshed from it, and the reported
    rates are posterior means under that segmentation.
    """
    cfg = config if config is not None else CvConfig()
    curve = cross_validate(data, cfg)
    k_hat = curve.best_k(cfg.min_defined_fraction)
    spec = default_spec(data, a=cfg.prior_shape)
    grid = build_grid(data)
    results = solve(grid, spec, cfg.kmax)
    final = results[k_hat - 1]
    assert final.feasible and final.segmentation is not None
    seg = final.segmentation
    counts = count_vector(grid, seg)
    lengths = segment_lengths(grid, seg)
    rates = posterior_mean_rate(counts, lengths, spec.a, spec.b)
    mark_rates = None
    if data.marks is not None:
        mark_rates = posterior_mean_mark_rate(
            counts, segment_mark_sums(grid, seg), spec.a_rho, spec.b_rho
        )
    contrast_by_k = {
        res.k: float(res.contrast)
        for res in results
        if res.feasible and res.contrast is not None
    }
    warnings = curve.warnings + tuple(w for w in final.warnings if w not in curve.warnings)
    return FitResult(
        k_hat=k_hat,
        segmentation=seg,
        change_point_values=tuple(float(v) for v in seg.values),
        change_point_times=tuple(float(v) for v in data.to_original(np.asarray(seg.values))),
        rates=tuple(float(r) for r in np.atleast_1d(rates)),
        mark_rates=None
        if mark_rates is None
        else tuple(float(r) for r in np.atleast_1d(mark_rates)),
        contrast=float(final.contrast),
        contrast_by_k=contrast_by_k,
        curve=curve,
        window=data.window,
        warnings=warnings,
    )
