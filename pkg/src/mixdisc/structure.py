"""Indecomposability tests, block decomposition, and the M(A, W) bridge."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    DecompositionInconsistent,
    DimensionTooLarge,
    NotDoublyStochastic,
    NotUnitary,
    NumericalInconsistency,
    Tolerances,
    eig_hermitian,
    max_abs,
    psd_violation,
    rank_psd,
)
from .discriminant import MatrixTuple, check_doubly_stochastic, eval_polarized

_GATE_SUBSETS = 16


@dataclass(frozen=True)
class DecompositionResult:
    """Indecomposable blocks of a doubly stochastic tuple.

    ``parts`` is a list of (index set, orthonormal subspace basis, restricted
    tuple); the index sets partition {0,..,n-1} and D(t) equals the product of
    the block discriminants up to ``product_check``.
    """

    parts: list
    product_check: float


def _check_psd_tuple(t: MatrixTuple, tol: Tolerances) -> None:
    worst = max(psd_violation(a) for a in t.matrices)
    scale = 1.0 + t.scale_of()
    if worst > tol.psd_tol * scale:
        raise ValueError(f"tuple is not PSD within tolerance (violation {worst:.3e})")


def _subsets_ascending(n: int):
    for k in range(1, n):
        yield from itertools.combinations(range(n), k)


def is_indecomposable(t: MatrixTuple, tol: Tolerances = DEFAULT_TOL):
    """Strict rank test over all proper subsets: rank(sum_{i in S} A_i) > |S|.

    Returns (True, None) or (False, witness_subset).  Subsets are scanned in
    ascending cardinality and canonical order, so the witness is minimal.
    """
    n = t.n
    if n > _GATE_SUBSETS:
        raise DimensionTooLarge(f"subset scan gated at n <= {_GATE_SUBSETS}")
    _check_psd_tuple(t, tol)
    for subset in _subsets_ascending(n):
        total = sum(t.matrices[i] for i in subset)
        if rank_psd(total, tol) <= len(subset):
            return False, subset
    return True, None


def positivity_rank_test(t: MatrixTuple, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Weak rank condition (>=) over all subsets; equivalent to D(t) > 0 for PSD tuples."""
    n = t.n
    if n > _GATE_SUBSETS:
        raise DimensionTooLarge(f"subset scan gated at n <= {_GATE_SUBSETS}")
    _check_psd_tuple(t, tol)
    for subset in _subsets_ascending(n):
        total = sum(t.matrices[i] for i in subset)
        if rank_psd(total, tol) < len(subset):
            return False
    return True


def _split(mats, labels, basis, tol: Tolerances, parts):
    """Recursively peel off minimal rank-equality subsets.

    ``mats`` lives in the current restricted coordinates; ``basis`` maps those
    coordinates back to the original space.
    """
    c = len(mats)
    witness = None
    for subset in _subsets_ascending(c):
        total = sum(mats[i] for i in subset)
        if rank_psd(total, tol) == len(subset):
            witness = subset
            break
    if witness is None:
        parts.append((tuple(labels), basis, MatrixTuple(mats)))
        return
    total = sum(mats[i] for i in witness)
    w, v = eig_hermitian(total)
    cut = int(np.count_nonzero(w > tol.rank_tol * max(w[0], 0.0))) if w[0] > 0 else 0
    if cut != len(witness):
        raise DecompositionInconsistent(
            f"image of subset {witness} has rank {cut}, expected {len(witness)}"
        )
    u = v[:, :cut]
    u_perp = v[:, cut:]
    inside = [u.conj().T @ mats[i] @ u for i in witness]
    in_labels = [labels[i] for i in witness]
    rest = [i for i in range(c) if i not in witness]
    outside = [u_perp.conj().T @ mats[i] @ u_perp for i in rest]
    out_labels = [labels[i] for i in rest]
    _split(inside, in_labels, basis @ u, tol, parts)
    _split(outside, out_labels, basis @ u_perp, tol, parts)


def decompose(t: MatrixTuple, tol: Tolerances = DEFAULT_TOL) -> DecompositionResult:
    """Indecomposable block decomposition of a doubly stochastic tuple.

    Splits recursively along minimal subsets whose matrix sum has rank equal
    to the subset size; verifies D(t) = prod of block discriminants and raises
    DecompositionInconsistent when the check fails (rank misclassification).
    """
    n = t.n
    if n > _GATE_SUBSETS:
        raise DimensionTooLarge(f"decompose gated at n <= {_GATE_SUBSETS}")
    report = check_doubly_stochastic(t, tol)
    if not report.is_doubly_stochastic:
        raise NotDoublyStochastic(f"input is not doubly stochastic: {report}")
    parts: list = []
    _split(list(t.matrices), list(range(n)), np.eye(n, dtype=np.complex128), tol, parts)
    d_total = eval_polarized(t)
    d_prod = 1.0
    for _, _, sub in parts:
        d_prod *= eval_polarized(sub)
    product_check = abs(d_total - d_prod)
    if product_check > 1e-8 * (1.0 + abs(d_total)):
        raise DecompositionInconsistent(
            f"product identity off by {product_check:.3e} "
            f"(D = {d_total:.12g}, prod = {d_prod:.12g})"
        )
    return DecompositionResult(parts=parts, product_check=product_check)


def m_matrix(t: MatrixTuple, w) -> np.ndarray:
    """M(i, j) = <A_j w_i, w_i> for the columns w_i of a unitary W.

    Real by Hermiticity of the quadratic forms; the (tiny) imaginary residue
    is checked against 1e-10 and truncated.
    """
    w = np.asarray(w, dtype=np.complex128)
    n = t.n
    if w.shape != (n, n):
        raise ValueError(f"W must be {n} x {n}")
    if max_abs(w.conj().T @ w - np.eye(n)) > 1e-9:
        raise NotUnitary("W is not unitary within 1e-9")
    m = np.empty((n, n))
    for i in range(n):
        col = w[:, i]
        for j in range(n):
            q = complex(np.vdot(col, t.matrices[j] @ col))
            if abs(q.imag) > 1e-10 * (1.0 + abs(q)):
                raise NumericalInconsistency(f"quadratic form not real: {q!r}")
            m[i, j] = q.real
    return m


def is_fully_indecomposable_support(m, threshold: float) -> bool:
    """Full indecomposability of a nonnegative doubly stochastic matrix.

    For doubly stochastic matrices this reduces to connectivity of the
    bipartite support graph (no k x (n-k) zero submatrix after permutation).
    """
    m = np.asarray(m)
    n = m.shape[0]
    support = m > threshold
    # BFS over the bipartite graph rows <-> columns.
    seen_rows = {0}
    seen_cols = set()
    frontier_rows = [0]
    while frontier_rows:
        cols = set()
        for r in frontier_rows:
            cols.update(np.nonzero(support[r])[0].tolist())
        cols -= seen_cols
        seen_cols |= cols
        rows = set()
        for c in cols:
            rows.update(np.nonzero(support[:, c])[0].tolist())
        rows -= seen_rows
        seen_rows |= rows
        frontier_rows = sorted(rows)
    return len(seen_rows) == n and len(seen_cols) == n
