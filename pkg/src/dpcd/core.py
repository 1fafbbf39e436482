"""Shared domain types for binary optimization over {-1,+1}^n.

A decision variable is a numpy float64 vector whose entries are exactly -1.0
or +1.0 (the BinaryVector alias). Constraints either allow the whole cube or
pin the number of +1 entries. Objectives are plain containers of callables so
that one solver can drive every problem family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

BinaryVector = np.ndarray


class DomainError(ValueError):
    """Argument outside the documented domain."""


class DimensionError(DomainError):
    """Operands with incompatible shapes."""


class UnsupportedConstraintError(DomainError):
    """Solver asked to handle a constraint kind it does not support."""


class ParseError(ValueError):
    """Malformed input stream; message carries the line number when known."""


class NumericError(ArithmeticError):
    """Non-finite or otherwise invalid numeric state."""


class BoundUnavailableError(RuntimeError):
    """No convergence bound is computable for this objective."""


UNCONSTRAINED_KIND = "unconstrained"
EXACT_ONES_KIND = "exact_ones"


@dataclass(frozen=True)
class ConstraintSpec:
    """Feasible set: the full cube, or the slice with exactly r entries +1."""

    kind: str
    r: int = -1

    def __post_init__(self):
        if self.kind not in (UNCONSTRAINED_KIND, EXACT_ONES_KIND):
            raise DomainError(f"unknown constraint kind: {self.kind!r}")
        if self.kind == EXACT_ONES_KIND and self.r < 0:
            raise DomainError("exact-ones constraint needs r >= 0")

    @property
    def is_exact_ones(self) -> bool:
        return self.kind == EXACT_ONES_KIND


UNCONSTRAINED = ConstraintSpec(UNCONSTRAINED_KIND)


def exact_ones(r: int) -> ConstraintSpec:
    return ConstraintSpec(EXACT_ONES_KIND, int(r))


@dataclass(frozen=True)
class Objective:
    """Evaluation contract for f on [-1,1]^n.

    value and gradient must be deterministic. gradient accepts any real
    point of the box, not just binary points, so finite-difference checks
    are well defined. Optional fields speed up specific consumers and never
    change semantics:

      value_batch   rows-of-points evaluation, shape (m, n) -> (m,)
      flips_delta   f(x with signs flipped on each index row) - f(x),
                    given x and an (m, j) index matrix with distinct
                    entries per row
      coeff_abs_sum entrywise absolute coefficient mass of a quadratic,
                    sum|A_ij| + sum|c_i|, used by step bounds
    """

    dimension: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: Optional[float] = None
    value_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flips_delta: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    coeff_abs_sum: Optional[float] = None
    name: str = "objective"

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError("objective dimension must be >= 1")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise DomainError("lipschitz constant must be nonnegative")


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one solver run.

    value_trajectory[0] is the objective at the initial point, and each
    later entry is the value after one iteration, so its length is
    iterations + 1. converged means the final iterate repeated and, when a
    neighborhood search was enabled, the search gave no improvement.
    """

    final_point: BinaryVector
    final_value: float
    iterations: int
    flips_per_iteration: tuple
    value_trajectory: tuple
    converged: bool
    wall_time: float
    rng_seed: int
    flags: tuple = field(default=())


def sign(v: float) -> int:
    """Sign with the +1-at-zero convention: +1 for v >= 0, else -1."""
    if not np.isfinite(v):
        raise NumericError(f"sign of non-finite value: {v!r}")
    return 1 if v >= 0 else -1


def signs(values: np.ndarray) -> np.ndarray:
    # Elementwise version of sign(); every module routes through these two.
    a = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericError("sign of non-finite array")
    return np.where(a >= 0, 1.0, -1.0)


def binary_vector(values) -> BinaryVector:
    """Validate and freeze a {-1,+1} vector.

    Accepts any sequence; entries must compare equal to -1 or +1 exactly.
    Returns a read-only float64 array.
    """
    x = np.array(values, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DomainError("binary vector must be one-dimensional and non-empty")
    if not np.all(np.abs(x) == 1.0):
        raise DomainError("binary vector entries must be -1 or +1")
    x.flags.writeable = False
    return x


def hamming_distance(y: BinaryVector, z: BinaryVector) -> int:
    if len(y) != len(z):
        raise DimensionError(f"length mismatch: {len(y)} vs {len(z)}")
    return int(np.sum(np.asarray(y) != np.asarray(z)))


def constraint_check(x: BinaryVector, c: ConstraintSpec) -> bool:
    if not c.is_exact_ones:
        return True
    n = len(x)
    if c.r > n:
        raise DomainError(f"exact-ones r={c.r} exceeds dimension {n}")
    return int(np.sum(np.asarray(x) > 0)) == c.r


def random_feasible(n: int, c: ConstraintSpec, seed) -> BinaryVector:
    """Uniform feasible point; deterministic given the seed.

    seed may be an integer or a numpy Generator (reused by callers that
    thread one stream through a whole run).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if c.is_exact_ones:
        if c.r > n:
            raise DomainError(f"exact-ones r={c.r} infeasible for n={n}")
        x = -np.ones(n)
        # permutation prefix is a uniform r-subset
        x[rng.permutation(n)[: c.r]] = 1.0
    else:
        x = rng.integers(0, 2, size=n) * 2.0 - 1.0
    x.flags.writeable = False
    return x
