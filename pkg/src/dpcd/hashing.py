"""Supervised-hashing driver and retrieval evaluation.

The model is h(x) = sign(x P): binary codes B are learned on the training
set by alternating a closed-form ridge solve for the class projection W
with descent steps on B, then P maps raw features onto the learned codes.
Also hosts the dense-matrix file formats the command line accepts.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    DimensionError,
    DomainError,
    NumericError,
    ParseError,
    UNCONSTRAINED,
    signs,
)
from .objectives import HashingProblem, make_hashing_objective
from .solver import SolverConfig, dpcd_solve

_MAGIC = b"DPCDMAT1"


@dataclass(frozen=True)
class HashModel:
    # Parameters:
    #   B             (n, r) training codes, entries +-1
    #   W             (r, classes) code-to-label regression
    #   P             (d, r) feature-to-code projection, used by encode()
    #   loss_history  objective after every half step (W solve, then B step)
    #   outer_iterations  completed alternations
    B: np.ndarray
    W: np.ndarray
    P: np.ndarray
    loss_history: tuple
    outer_iterations: int


@dataclass(frozen=True)
class RetrievalScore:
    map: float
    precision_at_k: float
    k: int


def solve_w(B: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Exact ridge solution W = (B'B + lam I)^-1 B'Y."""
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if B.shape[0] != Y.shape[0]:
        raise DimensionError(f"codes have {B.shape[0]} rows, labels {Y.shape[0]}")
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    r = B.shape[1]
    G = B.T @ B + lam * np.eye(r)
    try:
        return np.linalg.solve(G, B.T @ Y)
    except np.linalg.LinAlgError as e:
        raise NumericError(
            "code Gram matrix is singular; use lam > 0 to regularize") from e


def solve_projection(X: np.ndarray, B: np.ndarray, ridge: Optional[float] = None) -> np.ndarray:
    """Least-squares P minimizing ||XP - B||^2, with a small default ridge
    so rank-deficient feature matrices stay solvable."""
    X = np.asarray(X, dtype=float)
    B = np.asarray(B, dtype=float)
    if X.shape[0] != B.shape[0]:
        raise DimensionError(f"features have {X.shape[0]} rows, codes {B.shape[0]}")
    d = X.shape[1]
    G = X.T @ X
    if ridge is None:
        ridge = 1e-8 * float(np.trace(G)) / d
    if ridge < 0:
        raise DomainError("ridge must be nonnegative")
    try:
        return np.linalg.solve(G + ridge * np.eye(d), X.T @ B)
    except np.linalg.LinAlgError as e:
        raise NumericError("feature Gram matrix is singular; pass ridge > 0") from e


def encode(X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Binary codes sign(XP); the shared sign convention maps 0 to +1."""
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    if X.shape[1] != P.shape[0]:
        raise DimensionError(f"features are {X.shape}, projection {P.shape}")
    return signs(X @ P)


def hashing_loss(B, W, Y, lam: float) -> float:
    R = Y - B @ W
    return float(0.5 * np.sum(R * R) + 0.5 * lam * np.sum(W * W))


def alternating_hash(X: np.ndarray, Y: np.ndarray, r: int,
                     outer_iterations: int = 5, inner: Optional[SolverConfig] = None,
                     lam: float = 1.0, seed: int = 0,
                     initial_codes: Optional[np.ndarray] = None) -> HashModel:
    """Alternate the exact W solve with binary descent on the codes.

    Each outer round records the loss after the W half-step and again after
    the B half-step; both solves only ever lower the shared objective, so
    the recorded history never increases. The code step runs without a
    neighborhood search by default, which keeps the per-round cost linear
    in the sample count.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(f"features have {X.shape[0]} rows, labels {Y.shape[0]}")
    if r < 1:
        raise DomainError("code length must be >= 1")
    if outer_iterations < 1:
        raise DomainError("outer_iterations must be >= 1")
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    if initial_codes is None:
        B = signs(rng.standard_normal((n, r)))
    else:
        B = np.asarray(initial_codes, dtype=float)
        if B.shape != (n, r):
            raise DimensionError(f"initial codes are {B.shape}, expected ({n}, {r})")
        if not np.all(np.abs(B) == 1.0):
            raise DomainError("initial codes must be sign matrices")
    if inner is None:
        inner = SolverConfig(max_iterations=20, neighborhood_cadence=0)
    problem = HashingProblem(Y=Y, lam=lam, r=r)

    history = []
    completed = 0
    for t in range(outer_iterations):
        W = solve_w(B, Y, lam)
        history.append(hashing_loss(B, W, Y, lam))
        objective = make_hashing_objective(problem, W)
        step_cfg = SolverConfig(
            alpha1=inner.alpha1, alpha2=inner.alpha2,
            max_iterations=inner.max_iterations,
            neighborhood_cadence=inner.neighborhood_cadence,
            neighborhood_radius=inner.neighborhood_radius,
            neighborhood_budget=inner.neighborhood_budget,
            neighborhood_patience=inner.neighborhood_patience,
            threshold_policy=inner.threshold_policy,
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        report = dpcd_solve(objective, UNCONSTRAINED, step_cfg,
                            initial_point=B.ravel())
        history.append(report.final_value)
        B_next = np.asarray(report.final_point).reshape(n, r)
        completed = t + 1
        if np.array_equal(B_next, B):
            B = B_next
            break
        B = B_next
    P = solve_projection(X, B)
    return HashModel(B=B, W=W, P=P, loss_history=tuple(history),
                     outer_iterations=completed)


def evaluate_retrieval(query_codes, db_codes, query_labels, db_labels,
                       k: int) -> RetrievalScore:
    """Hamming-ranking quality of a code table.

    The database is sorted per query by ascending Hamming distance with
    ties on the lower id. An item is relevant when it shares at least one
    label with the query. map averages precision over each query's full
    ranking (queries with no relevant item contribute 0); precision_at_k is
    the relevant fraction of the first k.
    """
    Q = np.asarray(query_codes, dtype=float)
    D = np.asarray(db_codes, dtype=float)
    if Q.ndim != 2 or D.ndim != 2 or Q.shape[1] != D.shape[1]:
        raise DimensionError("query and database codes must share the code length")
    nd = D.shape[0]
    if not (1 <= k <= nd):
        raise DomainError(f"cutoff k={k} outside [1, {nd}]")
    rel = _relevance_matrix(query_labels, db_labels, Q.shape[0], nd)
    r = Q.shape[1]
    # Hamming distance from sign agreement: d = (r - <q, d>) / 2
    dist = (r - Q @ D.T) / 2.0
    ap_sum = 0.0
    hits_at_k = 0.0
    for qi in range(Q.shape[0]):
        order = np.argsort(dist[qi], kind="stable")
        flags = rel[qi, order]
        total = int(flags.sum())
        if total:
            positions = np.nonzero(flags)[0]
            precisions = np.arange(1, total + 1) / (positions + 1.0)
            ap_sum += float(precisions.mean())
        hits_at_k += float(flags[:k].sum()) / k
    nq = Q.shape[0]
    return RetrievalScore(map=ap_sum / nq, precision_at_k=hits_at_k / nq, k=k)


def _relevance_matrix(query_labels, db_labels, nq: int, nd: int) -> np.ndarray:
    ql = np.asarray(query_labels)
    dl = np.asarray(db_labels)
    if ql.ndim == 1 and dl.ndim == 1:
        if len(ql) != nq or len(dl) != nd:
            raise DimensionError("label counts do not match code counts")
        return ql[:, None] == dl[None, :]
    if ql.ndim == 2 and dl.ndim == 2 and ql.shape[1] == dl.shape[1]:
        if ql.shape[0] != nq or dl.shape[0] != nd:
            raise DimensionError("label counts do not match code counts")
        return (ql.astype(float) @ dl.astype(float).T) > 0
    raise DimensionError("labels must both be id vectors or both label matrices")


# ---------------------------------------------------------------------------
# dense matrix file formats

def save_matrix_binary(path, M: np.ndarray) -> None:
    """Container layout: magic "DPCDMAT1", u64 rows, u64 cols, then
    row-major little-endian float64 payload."""
    M = np.ascontiguousarray(np.asarray(M, dtype="<f8"))
    if M.ndim != 2:
        raise DomainError("only 2-d matrices are supported")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", M.shape[0], M.shape[1]))
        fh.write(M.tobytes(order="C"))


def load_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(len(_MAGIC))
        if header != _MAGIC:
            raise ParseError(f"bad magic bytes: {header!r}")
        dims = fh.read(16)
        if len(dims) != 16:
            raise ParseError("truncated header")
        rows, cols = struct.unpack("<QQ", dims)
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise ParseError(f"payload holds {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def load_matrix_csv(path) -> np.ndarray:
    """Comma-separated numeric rows; a single leading header line is
    tolerated and skipped."""
    with open(path, "r") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ParseError("empty matrix file")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1
        if len(lines) == 1:
            raise ParseError("matrix file holds only a header")
    rows = []
    width = None
    for i, line in enumerate(lines[start:], start=start + 1):
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ParseError(f"line {i}: non-numeric field")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"line {i}: expected {width} columns, got {len(row)}")
        rows.append(row)
    return np.array(rows)


def load_matrix(path) -> np.ndarray:
    """Dispatch on the magic bytes: binary container or CSV."""
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
    if head == _MAGIC:
        return load_matrix_binary(path)
    return load_matrix_csv(path)
