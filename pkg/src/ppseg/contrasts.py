"""Per-segment costs for piecewise-constant event-rate models.

Four cost families are supported, all written so that the total over a
segmentation is the quantity to minimize:

- "poisson": the negated maximized Poisson log-likelihood,
  nu * (1 - log(nu / dt)).
- "poisson_gamma": the negated log marginal likelihood under a
  Gamma(a, b) prior on each segment rate,
  (nu + a) log(dt + b) - lgamma(nu + a) + (lgamma(a) - a log b).
- "marked_poisson": the Poisson cost plus the negated maximized
  exponential-mark log-likelihood, nu * (2 - log(nu/dt) - log(nu/S)).
- "marked_pgeg": the marginal cost with Gamma priors on both the event
  rate and the exponential mark rate.

Costs are extended reals. A zero-length segment holding events drives
the likelihood costs to -inf; setting ``forbid_zero_length`` turns that
into +inf so the optimizer avoids such segments. +inf always absorbs in
``ext_add``, because +inf marks forbidden configurations.

Every function accepts scalars or numpy arrays of matching shape, which
keeps the dynamic-programming cost matrices and scalar evaluations on a
single code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .model import (
    CandidateGrid,
    Segmentation,
    build_grid,
    segment_index_path,
)

KINDS = ("poisson", "poisson_gamma", "marked_poisson", "marked_pgeg")
MARKED_KINDS = ("marked_poisson", "marked_pgeg")


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def ext_add(x, y):
    """Extended-real addition in which +inf absorbs and NaN never appears.

    -inf + inf evaluates to +inf: an infinite-likelihood segment cannot
    rescue a forbidden or infeasible configuration.
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        out = a + b
    mask = np.isposinf(a) | np.isposinf(b)
    if mask.any():
        out = np.where(mask, np.inf, out)
    return _scalar_or_array(out)


def _lgamma_shifted(count, shift):
    # Large integer-count arrays go through a lookup table: gammaln is
    # by far the most expensive piece of a cost matrix and counts only
    # take n + 1 distinct values. Bit-identical to the direct call.
    arr = np.asarray(count, dtype=np.float64)
    if arr.ndim >= 2 and arr.size > 4096:
        top = int(arr.max())
        table = gammaln(np.arange(top + 1, dtype=np.float64) + shift)
        return table[arr.astype(np.intp)]
    return gammaln(arr + shift)


def poisson_cost(count, length, forbid_zero_length: bool = False):
    """Negated maximized Poisson log-likelihood of one segment.

    Zero counts cost exactly 0 whatever the length. A positive count on
    a zero-length segment costs -inf, or +inf when such segments are
    forbidden.
    """
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c * (1.0 - np.log(c / d))
    out = np.where(c == 0.0, 0.0, out)
    if forbid_zero_length:
        out = np.where((c > 0.0) & (d == 0.0), np.inf, out)
    return _scalar_or_array(out)


def poisson_gamma_cost(count, length, a, b):
    """Negated log marginal likelihood of one segment, Gamma(a, b) prior.

    Finite for every nonnegative (count, length); the per-model prior
    constant is charged one share per segment so that totals of
    different segment counts remain comparable.
    """
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (c + a) * np.log(d + b) - _lgamma_shifted(c, a) + (gammaln(a) - a * np.log(b))
    return _scalar_or_array(out)


def marked_poisson_cost(count, length, mark_sum, forbid_zero_length: bool = False):
    """Negated maximized log-likelihood with exponential marks."""
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    s = np.asarray(mark_sum, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c * (2.0 - np.log(c / d) - np.log(c / s))
    out = np.where(c == 0.0, 0.0, out)
    if forbid_zero_length:
        out = np.where((c > 0.0) & ((d == 0.0) | (s == 0.0)), np.inf, out)
    return _scalar_or_array(out)


def marked_pgeg_cost(count, length, mark_sum, a, b, a_rho, b_rho):
    """Negated log marginal likelihood with Gamma priors on both rates.

    The event rate gets a Gamma(a, b) prior and the exponential mark
    rate a Gamma(a_rho, b_rho) prior; conjugacy gives the closed form
    below. Finite for all valid inputs.
    """
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    s = np.asarray(mark_sum, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            (c + a) * np.log(d + b)
            - _lgamma_shifted(c, a)
            + (c + a_rho) * np.log(s + b_rho)
            - _lgamma_shifted(c, a_rho)
            + (gammaln(a) - a * np.log(b))
            + (gammaln(a_rho) - a_rho * np.log(b_rho))
        )
    return _scalar_or_array(out)


@dataclass(frozen=True)
class ContrastSpec:
    """Cost family plus hyper-parameters and optional length penalty.

    ``forbid_zero_length`` defaults per kind: the pure likelihood costs
    ("poisson", "marked_poisson") forbid zero-length segments because
    their optimum otherwise degenerates to -inf for K >= 2; the marginal
    costs are finite everywhere and keep them allowed.

    ``penalty`` is an optional (f, beta) pair adding f(length) + beta to
    every segment cost. f must be concave in the segment length; this is
    spot-checked numerically at construction.
    """

    kind: str
    a: float = 1.0
    b: float = 1.0
    a_rho: float = 2.01
    b_rho: float = 1.0
    forbid_zero_length: bool | None = None
    penalty: tuple[Callable, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown contrast kind {self.kind!r}; choose from {KINDS}")
        if self.kind in ("poisson_gamma", "marked_pgeg"):
            if not (self.a > 0.0 and self.b > 0.0):
                raise ValueError("hyper-parameters a and b must be positive")
        if self.kind == "marked_pgeg":
            if not self.a_rho > 2.0:
                raise ValueError("a_rho must exceed 2 so the mark-rate prior has a variance")
            if not self.b_rho > 0.0:
                raise ValueError("b_rho must be positive")
        if self.penalty is not None:
            f, beta = self.penalty
            if not np.isfinite(beta):
                raise ValueError("penalty offset beta must be finite")
            grid = np.linspace(1e-3, 1.0, 33)
            vals = np.asarray(f(grid), dtype=np.float64)
            if vals.shape != grid.shape or not np.all(np.isfinite(vals)):
                raise ValueError("penalty f must map positive lengths to finite values")
            second = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
            if np.any(second > 1e-8):
                raise ValueError("penalty f must be concave in segment length")

    @property
    def requires_marks(self) -> bool:
        return self.kind in MARKED_KINDS

    @property
    def forbids_zero_length(self) -> bool:
        if self.forbid_zero_length is not None:
            return self.forbid_zero_length
        return self.kind in ("poisson", "marked_poisson")


def segment_cost(spec: ContrastSpec, count, length, mark_sum=None):
    """Cost of one segment (or an array of segments) under ``spec``."""
    if spec.requires_marks:
        if mark_sum is None:
            raise ValueError(f"contrast kind {spec.kind!r} requires marked data")
        if spec.kind == "marked_poisson":
            out = marked_poisson_cost(count, length, mark_sum, spec.forbids_zero_length)
        else:
            out = marked_pgeg_cost(
                count, length, mark_sum, spec.a, spec.b, spec.a_rho, spec.b_rho
            )
    elif spec.kind == "poisson":
        out = poisson_cost(count, length, spec.forbids_zero_length)
    else:
        out = poisson_gamma_cost(count, length, spec.a, spec.b)
    if spec.penalty is not None:
        f, beta = spec.penalty
        d = np.asarray(length, dtype=np.float64)
        out = out + (np.asarray(f(d), dtype=np.float64) + beta)
        out = _scalar_or_array(out)
    return out


def default_spec(data, kind: str | None = None, a: float = 1.0) -> ContrastSpec:
    """Data-driven hyper-parameters: prior mean pinned near one event.

    Uses b = a / n so the prior rate expectation a / b equals the
    observed event count, and for marked data a_rho = 2.01 with
    b_rho = mean(marks) * (a_rho - 1) so the prior mark-rate mean is the
    reciprocal of the average mark.
    """
    if data.n == 0:
        raise ValueError("cannot derive hyper-parameters from an empty series")
    marked = data.marks is not None
    if kind is None:
        kind = "marked_pgeg" if marked else "poisson_gamma"
    if kind in MARKED_KINDS and not marked:
        raise ValueError(f"contrast kind {kind!r} requires marked data")
    b = a / data.n
    if kind == "marked_pgeg":
        a_rho = 2.01
        b_rho = float(np.mean(data.marks)) * (a_rho - 1.0)
        return ContrastSpec(kind, a=a, b=b, a_rho=a_rho, b_rho=b_rho)
    return ContrastSpec(kind, a=a, b=b)


def contrast(seg: Segmentation, data, spec: ContrastSpec):
    """Total cost of a segmentation, accumulated right to left.

    Right-to-left accumulation matches the dynamic program exactly, so
    an optimal value reported by the solver reproduces bit for bit here.
    """
    grid = data if isinstance(data, CandidateGrid) else build_grid(data)
    if spec.requires_marks and not grid.is_marked:
        raise ValueError(f"contrast kind {spec.kind!r} requires marked data")
    path = segment_index_path(grid, seg)
    pieces = []
    for lo, hi in zip(path[:-1], path[1:]):
        count = grid.count_between(lo, hi)
        length = grid.values[hi] - grid.values[lo]
        s = None
        if grid.mark_prefix is not None:
            s = grid.mark_prefix[hi // 2] - grid.mark_prefix[lo // 2]
        pieces.append(segment_cost(spec, count, length, s))
    total = pieces[-1]
    for piece in pieces[-2::-1]:
        total = ext_add(piece, total)
    return total


def posterior_mean_rate(count, length, a, b):
    """Posterior expectation of a segment rate under a Gamma(a, b) prior."""
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    return _scalar_or_array((c + a) / (d + b))


def posterior_mean_mark_rate(count, mark_sum, a_rho, b_rho):
    c = np.asarray(count, dtype=np.float64)
    s = np.asarray(mark_sum, dtype=np.float64)
    return _scalar_or_array((c + a_rho) / (s + b_rho))


def mle_rate(count, length):
    """count / length with the empty-segment convention 0 / 0 = 0."""
    c = np.asarray(count, dtype=np.float64)
    d = np.asarray(length, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c / d
    out = np.where((c == 0.0) & (d == 0.0), 0.0, out)
    return _scalar_or_array(out)


def mle_mark_rate(count, mark_sum):
    return mle_rate(count, mark_sum)


def poisson_loglik(counts, lengths, rates) -> float:
    """Log-likelihood of per-segment counts under given rates.

    Terms with a zero count contribute only the exposure -rate * length;
    a positive count on a zero rate yields -inf.
    """
    c = np.asarray(counts, dtype=np.float64)
    d = np.asarray(lengths, dtype=np.float64)
    r = np.asarray(rates, dtype=np.float64)
    if not (c.shape == d.shape == r.shape):
        raise ValueError("counts, lengths and rates must have matching shapes")
    with np.errstate(divide="ignore", invalid="ignore"):
        occ = c * np.log(r)
    occ = np.where(c == 0.0, 0.0, occ)
    return float(np.sum(occ - r * d))


def marked_loglik(counts, lengths, mark_sums, rates, mark_rates) -> float:
    """Joint log-likelihood of counts and exponential marks."""
    c = np.asarray(counts, dtype=np.float64)
    s = np.asarray(mark_sums, dtype=np.float64)
    rho = np.asarray(mark_rates, dtype=np.float64)
    if not (c.shape == s.shape == rho.shape):
        raise ValueError("counts, mark sums and mark rates must have matching shapes")
    base = poisson_loglik(counts, lengths, rates)
    with np.errstate(divide="ignore", invalid="ignore"):
        occ = c * np.log(rho)
    occ = np.where(c == 0.0, 0.0, occ)
    return base + float(np.sum(occ - rho * s))
