"""4-dimensional Pascal determinants QP on n x n block matrices.

Two defining formulas are implemented: the signed sum of mixed discriminants
over block-column permutations (qp_block) and the quadruple permutation sum
over the 4-index tensor form (qp_tensor).  The block-to-tensor convention is
rho(i1, i2, i3, i4) = A_{i1, i3}(i2, i4), locked by brute-force agreement of
the two formulas at n = 2 (see tests); if agreement ever breaks the
convention must be revisited, not patched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimensionTooLarge,
    TermNotPsd,
    Tolerances,
    as_hermitian,
    fsum_complex,
    inv_sqrt_psd,
    make_rng,
    max_abs,
    min_eigenvalue,
    psd_violation,
    random_complex_gaussian,
)
from .discriminant import _as_real, _double_perm_raw, _perms_and_signs, _polarized_raw

_GATE_QP_BLOCK = 6
_GATE_QP_TENSOR = 4


class BlockMatrix:
    """n^2 x n^2 matrix viewed as an n x n grid of n x n complex blocks."""

    __slots__ = ("n", "blocks")

    def __init__(self, blocks):
        n = len(blocks)
        grid = []
        for row in blocks:
            if len(row) != n:
                raise ValueError("block grid must be square")
            grid.append([np.asarray(b, dtype=np.complex128) for b in row])
        for row in grid:
            for b in row:
                if b.shape != (n, n):
                    raise ValueError(f"each block must be {n} x {n}")
        self.n = n
        self.blocks = grid

    @classmethod
    def from_assembled(cls, rho, n: int) -> "BlockMatrix":
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != (n * n, n * n):
            raise ValueError(f"assembled matrix must be {n * n} x {n * n}")
        blocks = [
            [rho[i * n : (i + 1) * n, j * n : (j + 1) * n] for j in range(n)]
            for i in range(n)
        ]
        return cls(blocks)

    def assembled(self) -> np.ndarray:
        n = self.n
        rho = np.empty((n * n, n * n), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                rho[i * n : (i + 1) * n, j * n : (j + 1) * n] = self.blocks[i][j]
        return rho

    def tensor4(self) -> np.ndarray:
        """rho(i1, i2, i3, i4) = A_{i1, i3}(i2, i4); the frozen convention."""
        n = self.n
        out = np.empty((n, n, n, n), dtype=np.complex128)
        for i1 in range(n):
            for i3 in range(n):
                out[i1, :, i3, :] = self.blocks[i1][i3]
        return out

    def trace_matrix(self) -> np.ndarray:
        n = self.n
        return np.array(
            [[complex(np.trace(self.blocks[i][j])) for j in range(n)] for i in range(n)]
        )


@dataclass(frozen=True)
class BlockDsReport:
    psd_violation: float
    sum_violation: float
    trace_violation: float
    passes: bool


@dataclass(frozen=True)
class SeparableSpec:
    """rho = sum_k P_k (x) Q_k with every factor PSD."""

    terms: tuple


def qp_block(rho: BlockMatrix) -> float:
    """QP as the signed sum over sigma of D(A_{1,sigma(1)}, .., A_{n,sigma(n)})."""
    n = rho.n
    if n > _GATE_QP_BLOCK:
        raise DimensionTooLarge(f"qp_block gated at n <= {_GATE_QP_BLOCK}")
    perms, signs = _perms_and_signs(n)
    totals = np.empty(len(perms), dtype=np.complex128)
    for s, sigma in enumerate(perms):
        mats = [rho.blocks[i][int(sigma[i])] for i in range(n)]
        totals[s] = signs[s] * _polarized_raw(mats)
    return _as_real(fsum_complex(totals))


def qp_tensor(rho: BlockMatrix) -> float:
    """QP as (1/n!) sum over four permutations of the signed tensor product.

    For fixed (tau1, tau2) the inner double sum is itself a signed double
    permutation sum of gathered slices, which keeps the (n!)^4 cost usable.
    """
    n = rho.n
    if n > _GATE_QP_TENSOR:
        raise DimensionTooLarge(f"qp_tensor gated at n <= {_GATE_QP_TENSOR}")
    t4 = rho.tensor4()
    perms, signs = _perms_and_signs(n)
    fact = len(perms)
    totals = np.empty(fact * fact, dtype=np.complex128)
    pos = 0
    for s1, tau1 in enumerate(perms):
        for s2, tau2 in enumerate(perms):
            gathered = [t4[int(tau1[i]), int(tau2[i])] for i in range(n)]
            totals[pos] = signs[s1] * signs[s2] * _double_perm_raw(gathered)
            pos += 1
    return _as_real(fsum_complex(totals) / fact)


def check_block_ds(rho: BlockMatrix, tol: Tolerances = DEFAULT_TOL) -> BlockDsReport:
    """Violations of the three block doubly stochastic conditions."""
    n = rho.n
    assembled = as_hermitian(rho.assembled(), tol=np.inf)
    psd_v = psd_violation(assembled)
    diag_sum = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        diag_sum += rho.blocks[i][i]
    sum_v = max_abs(diag_sum - np.eye(n))
    trace_v = max_abs(rho.trace_matrix() - np.eye(n))
    passes = psd_v <= tol.ds_tol and sum_v <= tol.ds_tol and trace_v <= tol.ds_tol
    return BlockDsReport(psd_v, sum_v, trace_v, passes)


def assemble_separable(spec: SeparableSpec, tol: Tolerances = DEFAULT_TOL) -> BlockMatrix:
    """Blocks A_{i,j} = sum_k P_k(i, j) Q_k; PSD by construction."""
    if not spec.terms:
        raise ValueError("need at least one separable term")
    n = spec.terms[0][0].shape[0]
    for p, q in spec.terms:
        for name, m in (("P", p), ("Q", q)):
            m = np.asarray(m)
            if m.shape != (n, n):
                raise ValueError("all factors must share one dimension")
            if min_eigenvalue(as_hermitian(m, tol=1e-8)) < -tol.psd_tol * (
                1.0 + max_abs(m)
            ):
                raise TermNotPsd(f"{name} factor is not PSD")
    blocks = [[np.zeros((n, n), dtype=np.complex128) for _ in range(n)] for _ in range(n)]
    for p, q in spec.terms:
        p = np.asarray(p, dtype=np.complex128)
        q = np.asarray(q, dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                blocks[i][j] += p[i, j] * q
    return BlockMatrix(blocks)


def _block_ds_defect(spec_terms, n: int):
    diag_sum = np.zeros((n, n), dtype=np.complex128)
    trace_m = np.zeros((n, n), dtype=np.complex128)
    for p, q in spec_terms:
        diag_sum += float(np.trace(p).real) * q
        trace_m += float(np.trace(q).real) * p
    return max_abs(diag_sum - np.eye(n)) + max_abs(trace_m - np.eye(n))


def sample_separable_ds(
    n: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    max_iter: int = 500,
    max_terms: int | None = None,
):
    """One random separable block-DS matrix, or None if scaling fails to converge.

    Wishart factors are alternately normalized toward the identity-sum and
    identity-trace-matrix conditions; both maps preserve separability (they
    act as (I (x) S) rho (I (x) S) and (S (x) I) rho (S (x) I)).
    """
    rng = make_rng(seed)
    k_max = max_terms if max_terms is not None else n * n
    k = int(rng.integers(1, k_max + 1))
    terms = []
    for _ in range(k):
        gp = random_complex_gaussian(n, rng)
        gq = random_complex_gaussian(n, rng)
        terms.append((as_hermitian(gp @ gp.conj().T), as_hermitian(gq @ gq.conj().T)))
    for _ in range(max_iter):
        if _block_ds_defect(terms, n) <= tol.ds_tol:
            spec = SeparableSpec(terms=tuple(terms))
            return assemble_separable(spec, tol), spec
        diag_sum = np.zeros((n, n), dtype=np.complex128)
        for p, q in terms:
            diag_sum += float(np.trace(p).real) * q
        s = inv_sqrt_psd(diag_sum, tol)
        terms = [(p, as_hermitian(s @ q @ s, tol=1e-8)) for p, q in terms]
        trace_m = np.zeros((n, n), dtype=np.complex128)
        for p, q in terms:
            trace_m += float(np.trace(q).real) * p
        s = inv_sqrt_psd(trace_m, tol)
        terms = [(as_hermitian(s @ p @ s, tol=1e-8), q) for p, q in terms]
    return None


def sample_block_ds(
    n: int, seed: int, tol: Tolerances = DEFAULT_TOL, max_iter: int = 500
):
    """One random (not necessarily separable) block-DS matrix, or None."""
    rng = make_rng(seed)
    g = random_complex_gaussian(n * n, rng)
    rho = as_hermitian(g @ g.conj().T)
    eye = np.eye(n)
    for _ in range(max_iter):
        bm = BlockMatrix.from_assembled(rho, n)
        rep = check_block_ds(bm, tol)
        if rep.sum_violation + rep.trace_violation <= tol.ds_tol:
            return bm
        diag_sum = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            diag_sum += bm.blocks[i][i]
        s = np.kron(eye, inv_sqrt_psd(diag_sum, tol))
        rho = as_hermitian(s @ rho @ s, tol=1e-8)
        bm = BlockMatrix.from_assembled(rho, n)
        t = as_hermitian(bm.trace_matrix(), tol=1e-8)
        s = np.kron(inv_sqrt_psd(t, tol), eye)
        rho = as_hermitian(s @ rho @ s, tol=1e-8)
    return None
