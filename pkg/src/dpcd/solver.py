"""Discrete principal coordinate descent.

Each iteration evaluates the gradient at the current sign vector, derives a
pair of thresholds, collects the principal coordinates whose linear-model
improvement clears those thresholds, and flips them (all of them when the
problem is unconstrained, a balanced pairing when the count of +1 entries is
pinned). A local search over a small flip or swap neighborhood runs on a
configurable cadence and whenever an iteration moves nothing, and is the
only way to certify a stop.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .core import (
    BinaryVector,
    ConstraintSpec,
    DimensionError,
    DomainError,
    BoundUnavailableError,
    NumericError,
    Objective,
    SolverReport,
    UNCONSTRAINED,
    constraint_check,
    hamming_distance,
    random_feasible,
)

LIPSCHITZ = "lipschitz"
GRADIENT_AVERAGE = "average"

# Exhaustive neighborhood enumeration is used up to this many neighbors;
# larger neighborhoods are sampled.
NEIGHBORHOOD_CAP = 100_000

_DEFAULT_SAMPLE_BUDGET = 10_000

# chunk size for batched candidate evaluation, keeps temporaries small
_EVAL_CHUNK = 8192


@dataclass(frozen=True)
class ThresholdPolicy:
    """How the flip thresholds are derived from a gradient.

    lipschitz: L1 = L2 = L0 + epsilon, where L0 is the objective's gradient
    Lipschitz constant. epsilon defaults to max(1e-6, 1e-6 * L0).
    average: L1 is the mean of the strictly positive gradient entries, L2
    the mean of the absolute values of the strictly negative ones; a side
    with no entries of that sign gets no threshold and stays empty.
    """

    mode: str = LIPSCHITZ
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.mode not in (LIPSCHITZ, GRADIENT_AVERAGE):
            raise DomainError(f"unknown threshold mode: {self.mode!r}")
        if self.epsilon is not None and self.epsilon <= 0:
            raise DomainError("epsilon must be positive")


def effective_epsilon(policy: ThresholdPolicy, lipschitz: float) -> float:
    if policy.epsilon is not None:
        return policy.epsilon
    return max(1e-6, 1e-6 * lipschitz)


@dataclass(frozen=True)
class SolverConfig:
    # Parameters:
    #   alpha1, alpha2            threshold multipliers for the two sides
    #   max_iterations            hard iteration cap
    #   neighborhood_cadence      run the local search every T iterations;
    #                             0 disables it entirely
    #   neighborhood_radius       max flips (or swap pairs) per search move
    #   neighborhood_budget       sampled candidates when the neighborhood
    #                             exceeds the enumeration cap; 0 asks for
    #                             exhaustive search and falls back to the
    #                             default budget over the cap
    #   neighborhood_patience     consecutive fruitless sampled searches
    #                             tolerated before declaring convergence
    #   threshold_policy, seed    see ThresholdPolicy; seed feeds one rng
    alpha1: float = 1.0
    alpha2: float = 1.0
    max_iterations: int = 100
    neighborhood_cadence: int = 10
    neighborhood_radius: int = 5
    neighborhood_budget: int = _DEFAULT_SAMPLE_BUDGET
    neighborhood_patience: int = 10
    threshold_policy: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    seed: int = 0

    def __post_init__(self):
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise DomainError("alpha1 and alpha2 must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if min(self.neighborhood_cadence, self.neighborhood_radius,
               self.neighborhood_budget, self.neighborhood_patience) < 0:
            raise DomainError("neighborhood settings must be nonnegative")


@dataclass(frozen=True)
class PrincipalSets:
    """Indices eligible to flip: s_plus holds +1 entries with steep positive
    gradient, s_minus holds -1 entries with steep negative gradient."""

    s_plus: np.ndarray
    s_minus: np.ndarray


def derive_thresholds(gradient, policy: ThresholdPolicy, lipschitz: Optional[float] = None):
    """Returns (L1, L2); a side with no admissible threshold returns None."""
    g = np.asarray(gradient, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericError("gradient contains non-finite entries")
    if policy.mode == LIPSCHITZ:
        if lipschitz is None:
            raise DomainError("lipschitz threshold policy needs the objective's L0")
        level = lipschitz + effective_epsilon(policy, lipschitz)
        return level, level
    pos = g[g > 0]
    neg = g[g < 0]
    l1 = float(pos.mean()) if pos.size else None
    l2 = float(-neg.mean()) if neg.size else None
    return l1, l2


def principal_sets(x: BinaryVector, gradient, l1, l2, alpha1: float, alpha2: float) -> PrincipalSets:
    g = np.asarray(gradient, dtype=float)
    if len(x) != len(g):
        raise DimensionError("point and gradient lengths differ")
    if l1 is None:
        s_plus = np.empty(0, dtype=np.intp)
    else:
        s_plus = np.nonzero((g > alpha1 * l1) & (x > 0))[0]
    if l2 is None:
        s_minus = np.empty(0, dtype=np.intp)
    else:
        s_minus = np.nonzero((g < -alpha2 * l2) & (x < 0))[0]
    return PrincipalSets(s_plus, s_minus)


def unconstrained_flip(x: BinaryVector, sets: PrincipalSets) -> BinaryVector:
    out = np.array(x)
    out[sets.s_plus] *= -1.0
    out[sets.s_minus] *= -1.0
    out.flags.writeable = False
    return out


def _top_by_magnitude(gradient, idx: np.ndarray, m: int) -> np.ndarray:
    # descending |gradient|, ties by ascending index
    order = np.lexsort((idx, -np.abs(np.asarray(gradient)[idx])))
    return idx[order[:m]]


def balanced_flip(x: BinaryVector, gradient, sets: PrincipalSets) -> BinaryVector:
    """Flip the m steepest entries of each side, m = min of the set sizes.

    Flipping equally many +1 and -1 entries keeps the +1 count fixed, so a
    feasible x stays feasible.
    """
    m = min(len(sets.s_plus), len(sets.s_minus))
    if m == 0:
        return x
    out = np.array(x)
    out[_top_by_magnitude(gradient, sets.s_plus, m)] = -1.0
    out[_top_by_magnitude(gradient, sets.s_minus, m)] = 1.0
    out.flags.writeable = False
    return out


def neighborhood_size(x: BinaryVector, c: ConstraintSpec, m: int) -> int:
    """Exact neighbor count (the point itself excluded)."""
    n = len(x)
    if c.is_exact_ones:
        p = int(np.sum(np.asarray(x) > 0))
        q = n - p
        return sum(math.comb(p, j) * math.comb(q, j) for j in range(1, min(m, p, q) + 1))
    return sum(math.comb(n, j) for j in range(1, min(m, n) + 1))


def enumerate_neighborhood(x: BinaryVector, c: ConstraintSpec, m: int) -> Iterator[BinaryVector]:
    """Yield every neighbor: points at Hamming distance <= m, or reachable
    by interchanging <= m (+1, -1) pairs when the +1 count is pinned.
    Intended for small instances and tests; the solver path works on index
    sets instead."""
    for flips in _neighbor_index_sets(x, c, m):
        y = np.array(x)
        y[list(flips)] *= -1.0
        y.flags.writeable = False
        yield y


def _neighbor_index_groups(x, c, m):
    # yields (radius, iterator of flip-index tuples); tuples within one
    # group share a length, which keeps batched evaluation rectangular
    n = len(x)
    if c.is_exact_ones:
        plus = np.nonzero(np.asarray(x) > 0)[0]
        minus = np.nonzero(np.asarray(x) < 0)[0]
        for j in range(1, min(m, len(plus), len(minus)) + 1):
            yield j, (drop + add
                      for drop in itertools.combinations(plus, j)
                      for add in itertools.combinations(minus, j))
    else:
        for j in range(1, min(m, n) + 1):
            yield j, itertools.combinations(range(n), j)


def _neighbor_index_sets(x, c, m):
    for _, group in _neighbor_index_groups(x, c, m):
        yield from group


def _candidate_deltas(f: Objective, x, fx: float, flips: np.ndarray) -> np.ndarray:
    """f(x flipped on each index row) - f(x) for an (m, j) index matrix."""
    if f.flips_delta is not None:
        return np.asarray(f.flips_delta(x, flips), dtype=float)
    cnt = flips.shape[0]
    out = np.empty(cnt)
    if f.value_batch is not None:
        step = max(1, _EVAL_CHUNK * 64 // max(1, len(x) // 64 + 1))
        for lo in range(0, cnt, step):
            hi = min(cnt, lo + step)
            block = np.repeat(np.asarray(x)[None, :], hi - lo, axis=0)
            rows = np.arange(hi - lo)[:, None]
            block[rows, flips[lo:hi]] *= -1.0
            out[lo:hi] = np.asarray(f.value_batch(block), dtype=float) - fx
    else:
        y = np.array(x)
        for i in range(cnt):
            y[flips[i]] *= -1.0
            out[i] = f.value(y) - fx
            y[flips[i]] *= -1.0
    return out


def _distinct_rows(rng: np.random.Generator, pool: np.ndarray, j: int, cnt: int) -> np.ndarray:
    """cnt rows of j distinct draws from pool, uniform per row."""
    size = len(pool)
    if j == 1:
        return pool[rng.integers(0, size, size=(cnt, 1))]
    rows = rng.integers(0, size, size=(cnt, j))
    for _ in range(64):
        srt = np.sort(rows, axis=1)
        bad = (srt[:, 1:] == srt[:, :-1]).any(axis=1)
        if not bad.any():
            break
        rows[bad] = rng.integers(0, size, size=(int(bad.sum()), j))
    else:
        for i in np.nonzero(bad)[0]:
            rows[i] = rng.permutation(size)[:j]
    return pool[rows]


def _explore_neighborhood(x, f: Objective, c: ConstraintSpec, m: int, budget: int,
                          rng: np.random.Generator):
    """Returns (best_point, exhaustive_flag).

    best_point is x itself unless a strictly better neighbor was found.
    exhaustive_flag reports whether the whole neighborhood was enumerated,
    which is what allows a caller to treat "no improvement" as proof of
    local optimality.
    """
    n = len(x)
    xa = np.asarray(x)
    if c.is_exact_ones:
        plus = np.nonzero(xa > 0)[0]
        minus = np.nonzero(xa < 0)[0]
        m_eff = min(m, len(plus), len(minus))
    else:
        m_eff = min(m, n)
    if m_eff == 0:
        return x, True

    size = neighborhood_size(x, c, m)
    fx = f.value(x)
    best_delta = 0.0
    best_flips = None

    def consider(flips: np.ndarray):
        nonlocal best_delta, best_flips
        if flips.shape[0] == 0:
            return
        deltas = _candidate_deltas(f, x, fx, flips)
        i = int(np.argmin(deltas))
        if deltas[i] < best_delta:
            best_delta = float(deltas[i])
            best_flips = np.array(flips[i])

    if size <= NEIGHBORHOOD_CAP:
        for _, group in _neighbor_index_groups(x, c, m):
            buffer = []
            for fl in group:
                buffer.append(fl)
                if len(buffer) >= _EVAL_CHUNK:
                    consider(np.array(buffer, dtype=np.intp))
                    buffer = []
            if buffer:
                consider(np.array(buffer, dtype=np.intp))
        exhaustive = True
    else:
        draws = budget if budget > 0 else _DEFAULT_SAMPLE_BUDGET
        # radius drawn uniformly so short moves stay visible next to the
        # combinatorially dominant long ones
        radii = rng.integers(1, m_eff + 1, size=draws)
        for j in range(1, m_eff + 1):
            cnt = int(np.sum(radii == j))
            if cnt == 0:
                continue
            if c.is_exact_ones:
                drop = _distinct_rows(rng, plus, j, cnt)
                add = _distinct_rows(rng, minus, j, cnt)
                consider(np.concatenate([drop, add], axis=1))
            else:
                consider(_distinct_rows(rng, np.arange(n), j, cnt))
        exhaustive = False

    if best_flips is None:
        return x, exhaustive
    y = np.array(x)
    y[best_flips] *= -1.0
    y.flags.writeable = False
    return y, exhaustive


def neighborhood_search(x: BinaryVector, f: Objective, c: ConstraintSpec,
                        m: int, budget: int = 0, seed=0) -> BinaryVector:
    """Best point among x and the explored part of its neighborhood.

    Exhaustive enumeration up to NEIGHBORHOOD_CAP neighbors, seeded sampling
    beyond it. Never returns a strictly worse point; ties keep x.
    """
    if m < 1:
        raise DomainError("neighborhood radius must be >= 1")
    if not constraint_check(x, c):
        raise DomainError("neighborhood_search called with an infeasible point")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y, _ = _explore_neighborhood(x, f, c, m, budget, rng)
    return y


def _checked_value(f: Objective, x, iteration: int) -> float:
    try:
        v = float(f.value(x))
    except (ArithmeticError, FloatingPointError) as e:
        raise NumericError(f"objective failed at iteration {iteration}: {e}") from e
    if not np.isfinite(v):
        raise NumericError(f"non-finite objective value at iteration {iteration}")
    return v


def _checked_gradient(f: Objective, x, iteration: int) -> np.ndarray:
    try:
        g = np.asarray(f.gradient(x), dtype=float)
    except (ArithmeticError, FloatingPointError) as e:
        raise NumericError(f"gradient failed at iteration {iteration}: {e}") from e
    if not np.all(np.isfinite(g)):
        raise NumericError(f"non-finite gradient at iteration {iteration}")
    return g


def dpcd_solve(f: Objective, c: ConstraintSpec = UNCONSTRAINED,
               cfg: SolverConfig = None, initial_point: Optional[BinaryVector] = None,
               callback=None) -> SolverReport:
    """Run the descent loop until it certifies a stop or hits the cap.

    An iteration flips the principal coordinates, then (on cadence, and
    always when nothing flipped) improves the iterate by local search. A
    stop is certified when nothing flips and the search comes back empty:
    immediately if the search was exhaustive or disabled, after
    neighborhood_patience consecutive fruitless sampled searches otherwise.
    callback, when given, receives every iterate after it is accepted.
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    policy = cfg.threshold_policy
    if policy.mode == LIPSCHITZ and f.lipschitz is None:
        raise DomainError("lipschitz threshold policy needs an objective with L0")

    rng = np.random.default_rng(cfg.seed)
    if initial_point is None:
        x = random_feasible(f.dimension, c, rng)
    else:
        x = np.asarray(initial_point, dtype=float)
        if len(x) != f.dimension:
            raise DimensionError("initial point length does not match the objective")
        if not np.all(np.abs(x) == 1.0):
            raise DomainError("initial point must be a sign vector")
        if not constraint_check(x, c):
            raise DomainError("initial point violates the constraint")

    trajectory = [_checked_value(f, x, 0)]
    flips_per_iteration = []
    converged = False
    stall = 0
    cadence = cfg.neighborhood_cadence

    for k in range(1, cfg.max_iterations + 1):
        g = _checked_gradient(f, x, k)
        l1, l2 = derive_thresholds(g, policy, f.lipschitz)
        sets = principal_sets(x, g, l1, l2, cfg.alpha1, cfg.alpha2)
        if c.is_exact_ones:
            x_next = balanced_flip(x, g, sets)
        else:
            x_next = unconstrained_flip(x, sets)
        principal_flips = hamming_distance(x, x_next)

        searched = False
        exhaustive = False
        if cadence > 0 and (k % cadence == 0 or principal_flips == 0):
            x_next, exhaustive = _explore_neighborhood(
                x_next, f, c, cfg.neighborhood_radius, cfg.neighborhood_budget, rng)
            searched = True

        moved = hamming_distance(x, x_next)
        flips_per_iteration.append(moved)
        trajectory.append(_checked_value(f, x_next, k))
        x = x_next
        if callback is not None:
            callback(x)

        if moved > 0:
            stall = 0
            continue
        if cadence == 0 or (searched and exhaustive):
            converged = True
            break
        if searched and not exhaustive:
            stall += 1
            if stall >= cfg.neighborhood_patience:
                converged = True
                break

    return SolverReport(
        final_point=x,
        final_value=trajectory[-1],
        iterations=len(flips_per_iteration),
        flips_per_iteration=tuple(flips_per_iteration),
        value_trajectory=tuple(trajectory),
        converged=converged,
        wall_time=time.perf_counter() - started,
        rng_seed=cfg.seed,
    )


def step_bound(f: Objective, c: ConstraintSpec, epsilon: float,
               oracle_bounds=None) -> float:
    """Upper bound on the number of descent iterations.

    With oracle extremes (f_min, f_max) the bound is their gap over two
    epsilon. A quadratic objective additionally admits the coefficient-mass
    bound (sum|A_ij| + sum|c_i|) / epsilon without any oracle.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if oracle_bounds is not None:
        f_min, f_max = oracle_bounds
        return (f_max - f_min) / (2.0 * epsilon)
    if f.coeff_abs_sum is not None:
        return f.coeff_abs_sum / epsilon
    raise BoundUnavailableError(
        "no step bound available: supply oracle bounds or a quadratic objective")
