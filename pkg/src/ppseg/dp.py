"""Exact segmentation search over the candidate grid.

Optimal change-points of a concave per-segment cost always sit on the
2n-point candidate grid, so minimizing over continuous change-point
vectors reduces to a discrete shortest-path problem. ``solve`` fills
dynamic-programming tables over the dense cost matrix in O((2n)^2 Kmax)
and returns, for every segment count K up to Kmax, the optimal
segmentation and its contrast. ``brute_force`` enumerates every
candidate subset and is the independent oracle for small instances.

Ties are broken toward the lexicographically smallest change-point
index vector. The solver achieves this with a suffix table: the first
change-point is chosen as the smallest grid index attaining the optimum
of (first segment cost) + (optimal remaining cost), then the argument
repeats on the remainder. ``numpy.argmin`` returns the first minimizing
index, which is exactly the rule needed. Once a -inf segment enters the
running prefix every continuation short of +inf ties at -inf, so from
that point the reconstruction switches to the first admissible index.

Configurations with zero events and zero length (possible only with
tied event times) carry no information and are excluded from the search
by pricing them at +inf.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .contrasts import ContrastSpec, ext_add, segment_cost
from .model import (
    CandidateGrid,
    Segmentation,
    build_grid,
    segmentation_from_indices,
)

DEGENERATE_WARNING = (
    "optimal contrast is -inf: a zero-length segment captures events; "
    "use forbid_zero_length or a marginal-likelihood contrast"
)
TIES_WARNING = "event times contain ties"


def _as_grid(data) -> CandidateGrid:
    return data if isinstance(data, CandidateGrid) else build_grid(data)


def build_cost_matrix(data, spec: ContrastSpec) -> np.ndarray:
    """Dense matrix C with C[i, j] = cost of segment (tp_{i-1}, tp_j].

    Valid for 1 <= i <= j <= A + 1 where A = 2n; every other entry is
    +inf. Row 0 is padding so that indices match the usual recurrence
    C[K, h] = min_j C[K-1, j] + C(j+1 : h).
    """
    grid = _as_grid(data)
    if spec.requires_marks and not grid.is_marked:
        raise ValueError(f"contrast kind {spec.kind!r} requires marked data")
    A = grid.size
    idx = np.arange(A + 2)
    ev = idx // 2
    vals = grid.values
    nu = ev[None, :] - ev[:, None]
    dt = vals[None, :] - vals[:, None]
    degenerate = (nu == 0) & (dt == 0.0)
    np.maximum(nu, 0, out=nu)  # lower triangle holds garbage, masked below
    if grid.mark_prefix is not None:
        pref = grid.mark_prefix[ev]
        sm = pref[None, :] - pref[:, None]
    else:
        sm = None
    f = segment_cost(spec, nu, dt, sm)
    f[degenerate] = np.inf
    cost = np.full((A + 2, A + 2), np.inf)
    cost[1:, :] = f[:-1, :]
    cost[idx[:, None] > idx[None, :]] = np.inf
    return cost


def _layer_add(a, b, out=None, check_neg=True):
    # DP sums under the +inf-absorbs rule; the mask pass is only needed
    # when -inf costs exist, which plain IEEE addition would turn into
    # NaN against +inf.
    with np.errstate(invalid="ignore"):
        res = np.add(a, b, out=out)
    if check_neg:
        mask = np.isposinf(a) | np.isposinf(b)
        if mask.any():
            if out is None:
                res = np.where(mask, np.inf, res)
            else:
                np.copyto(out, np.inf, where=mask)
                res = out
    return res


def _suffix_table(cost: np.ndarray, kmax: int) -> np.ndarray:
    """S[r, j] = optimal cost of splitting (tp_j, 1] into r segments."""
    A = cost.shape[0] - 2
    S = np.full((kmax + 1, A + 1), np.inf)
    S[1] = cost[1:, A + 1]
    if kmax >= 2:
        m = cost[1:, : A + 1]  # m[j, l] = cost of (tp_j, tp_l]
        has_neg = bool(np.isneginf(m).any())
        w = np.empty_like(m)
        for r in range(2, kmax + 1):
            _layer_add(m, S[r - 1][None, :], out=w, check_neg=has_neg)
            S[r] = w.min(axis=1)
    return S


def _prefix_table(cost: np.ndarray, kmax: int) -> np.ndarray:
    """P[k, h] = optimal cost of splitting (0, tp_h] into k segments."""
    A = cost.shape[0] - 2
    P = np.full((kmax + 1, A + 2), np.inf)
    P[1] = cost[1]
    if kmax >= 2:
        m = cost[1:, :]  # m[j, h] = cost of (tp_j, tp_h]
        has_neg = bool(np.isneginf(m).any())
        w = np.empty_like(m)
        for k in range(2, kmax + 1):
            _layer_add(P[k - 1][: A + 1][:, None], m, out=w, check_neg=has_neg)
            P[k] = w.min(axis=0)
    return P


@dataclass(eq=False)
class DpTable:
    """Prefix and suffix optimal-cost tables over the candidate grid.

    ``prefix[k, h]`` is the best cost of segmenting (0, tp_h] into k
    pieces and satisfies prefix[1, h] = cost[1, h] and
    prefix[k, h] = min_j prefix[k-1, j] + cost[j+1, h]. ``suffix`` is
    the mirror image used for leftmost tie-breaking. Row 0 of both is
    +inf padding.
    """

    cost: np.ndarray
    prefix: np.ndarray
    suffix: np.ndarray
    kmax: int


def dp_tables(data, spec: ContrastSpec, kmax: int) -> DpTable:
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    cost = build_cost_matrix(data, spec)
    return DpTable(cost, _prefix_table(cost, kmax), _suffix_table(cost, kmax), kmax)


@dataclass(eq=False)
class SolveResult:
    k: int
    feasible: bool
    segmentation: Segmentation | None
    contrast: float | None
    warnings: tuple[str, ...] = ()


def _reconstruct(cost: np.ndarray, suffix: np.ndarray, k: int) -> list[int]:
    A = suffix.shape[1] - 1
    indices: list[int] = []
    prev = 0
    neg_prefix = False
    for r in range(k - 1, 0, -1):
        row = _layer_add(cost[prev + 1, : A + 1], suffix[r])
        if neg_prefix:
            # the total is -inf through any continuation that avoids
            # +inf, so the lexicographic rule picks the first such index
            j = int(np.flatnonzero(row < np.inf)[0])
        else:
            j = int(np.argmin(row))
        if np.isneginf(cost[prev + 1, j]):
            neg_prefix = True
        indices.append(j)
        prev = j
    return indices


def solve(data, spec: ContrastSpec, kmax: int) -> list[SolveResult]:
    """Optimal segmentations for every segment count 1..kmax.

    A segment count K is infeasible when K - 1 exceeds the number of
    interior grid positions; such entries are flagged rather than given
    a sentinel cost. A -inf optimum is returned as found, with a
    warning, since it signals a degenerate likelihood maximum.
    """
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    grid = _as_grid(data)
    cost = build_cost_matrix(grid, spec)
    suffix = _suffix_table(cost, kmax)
    base_warn = (TIES_WARNING,) if grid.events.has_ties else ()
    results: list[SolveResult] = []
    for k in range(1, kmax + 1):
        if k - 1 > grid.size:
            results.append(SolveResult(k, False, None, None, base_warn))
            continue
        value = float(suffix[k, 0])
        if value == np.inf:
            # only reachable when ties make every candidate degenerate
            results.append(
                SolveResult(k, True, None, np.inf, base_warn + ("no admissible segmentation",))
            )
            continue
        seg = segmentation_from_indices(grid, _reconstruct(cost, suffix, k))
        warn = base_warn + ((DEGENERATE_WARNING,) if value == -np.inf else ())
        results.append(SolveResult(k, True, seg, value, warn))
    return results


def grid_segment_cost(grid: CandidateGrid, spec: ContrastSpec, p_lo: int, p_hi: int):
    """Cost of the grid segment (p_lo, p_hi], +inf for the empty
    zero-length configuration; p_lo == p_hi is priced at 0 so closed-cell
    corners can be evaluated."""
    if p_lo == p_hi:
        return 0.0
    count = p_hi // 2 - p_lo // 2
    length = grid.values[p_hi] - grid.values[p_lo]
    if count == 0 and length == 0.0:
        return np.inf
    s = None
    if grid.mark_prefix is not None:
        s = grid.mark_prefix[p_hi // 2] - grid.mark_prefix[p_lo // 2]
    return float(segment_cost(spec, count, length, s))


def contrast_of_indices(grid: CandidateGrid, spec: ContrastSpec, indices) -> float:
    """Total cost of a change-point index tuple, boundaries implied.

    Accumulates right to left, matching the solver's suffix recursion,
    so equal chains produce bit-equal totals.
    """
    path = [0, *indices, grid.last_index]
    total = grid_segment_cost(grid, spec, path[-2], path[-1])
    for lo, hi in zip(path[-3::-1], path[-2::-1]):
        total = ext_add(grid_segment_cost(grid, spec, lo, hi), total)
    return float(total)


def brute_force(data, spec: ContrastSpec, k: int, limit: int = 1_000_000) -> SolveResult:
    """Exhaustive search over all change-point subsets at segment count k.

    Keeps the first optimum in lexicographic enumeration order, which is
    the same tie rule as ``solve``. Only intended for small instances;
    instances beyond ``limit`` candidates are refused.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    grid = _as_grid(data)
    if spec.requires_marks and not grid.is_marked:
        raise ValueError(f"contrast kind {spec.kind!r} requires marked data")
    A = grid.size
    if k - 1 > A:
        return SolveResult(k, False, None, None)
    if comb(A, k - 1) > limit:
        raise ValueError(f"brute force would enumerate more than {limit} candidates")
    best_value: float | None = None
    best: tuple[int, ...] | None = None
    for combo in itertools.combinations(range(1, A + 1), k - 1):
        value = contrast_of_indices(grid, spec, combo)
        if best_value is None or value < best_value:
            best_value = value
            best = combo
    assert best_value is not None
    if best_value == np.inf:
        return SolveResult(k, True, None, np.inf, ("no admissible segmentation",))
    seg = segmentation_from_indices(grid, best)
    warn = (DEGENERATE_WARNING,) if best_value == -np.inf else ()
    return SolveResult(k, True, seg, best_value, warn)


def upsilon_cardinality(n: int, k: int) -> int:
    """Number of count vectors: k nonnegative integers summing to n."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    return comb(n + k - 1, k - 1)


def upsilon_star_cardinality(n: int, k: int) -> int:
    """Count vectors whose interior zeros are isolated.

    A zero count in an interior position must have nonzero counts on
    both sides; such vectors are exactly the ones a grid segmentation
    can induce. Closed form for n >= 1; n = 0 is handled directly (the
    all-zero vector is admissible only for k <= 2).
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if n == 0:
        return 1 if k <= 2 else 0
    total = 0
    for h in range(1, k + 1):
        if k - h <= h + 1:
            total += comb(n - 1, h - 1) * comb(h + 1, k - h)
    return total


def enumerate_count_vectors(n: int, k: int, starred: bool = False):
    """Yield every count vector of n events in k segments exactly once.

    With ``starred`` the enumeration skips vectors containing an
    interior zero adjacent to another zero. Exponential in k; meant for
    verification at small sizes.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    for dividers in itertools.combinations(range(n + k - 1), k - 1):
        bounds = (-1, *dividers, n + k - 1)
        vec = tuple(hi - lo - 1 for lo, hi in zip(bounds[:-1], bounds[1:]))
        if starred and any(
            vec[i] == 0 and (vec[i - 1] == 0 or vec[i + 1] == 0) for i in range(1, k - 1)
        ):
            continue
        yield vec
