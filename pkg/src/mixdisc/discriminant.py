"""Mixed discriminant evaluators, gradients, and tuple predicates.

The production evaluator is :func:`eval_polarized` (2^n determinants, the
inclusion-exclusion polarization of det(sum t_i A_i)).  The permutation-sum
formulas are kept as independent oracles behind hard dimension gates:

* :func:`eval_sigma_det`     -- sum over sigma of det(A_sigma), n <= 10
* :func:`eval_double_perm`   -- signed double permutation sum, n <= 6
* :func:`eval_signed_permanent` -- signed sum of permanents, n <= 7
* :func:`eval_tensor`        -- antisymmetrizer inner product, n <= 6

All of them agree (relative 1e-8) on Hermitian PSD tuples; tests enforce it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimensionTooLarge,
    NumericalInconsistency,
    Tolerances,
    as_hermitian,
    fsum_complex,
    fsum_real,
    max_abs,
    psd_violation,
)

_GATE_SIGMA_DET = 10
_GATE_DOUBLE_PERM = 6
_GATE_SIGNED_PERM = 7
_GATE_TENSOR = 6
_GATE_POLARIZED = 20
_GATE_PERMANENT = 20

_DET_CHUNK = 8192


class MatrixTuple:
    """Ordered n-tuple of n x n Hermitian matrices (square tuples only)."""

    __slots__ = ("n", "matrices")

    def __init__(self, matrices, tol: Tolerances = DEFAULT_TOL):
        mats = [as_hermitian(m, tol.hermitian_tol) for m in matrices]
        if not mats:
            raise ValueError("empty tuple")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise ValueError("all members must share one dimension")
        if len(mats) != n:
            raise ValueError(
                f"tuple length {len(mats)} must equal matrix dimension {n}"
            )
        for m in mats:
            m.flags.writeable = False
        self.n = n
        self.matrices = tuple(mats)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]

    def __len__(self):
        return self.n

    def replaced(self, i: int, m) -> "MatrixTuple":
        """Copy with slot ``i`` replaced by ``m``."""
        mats = list(self.matrices)
        mats[i] = m
        return MatrixTuple(mats)

    def scale_of(self) -> float:
        return max(max_abs(m) for m in self.matrices)


@dataclass(frozen=True)
class DiscriminantGradient:
    """Gradient matrices Q_i with D(A_1,..,X,..,A_n) = tr(X Q_i), plus D itself."""

    Q: tuple
    value: float


@dataclass(frozen=True)
class DsTupleReport:
    """Deviation of a tuple from the doubly stochastic conditions."""

    psd_violation: float
    trace_violation: float
    sum_violation: float
    is_doubly_stochastic: bool


def _as_real(z: complex, tol_scale: float = 1e-9) -> float:
    z = complex(z)
    if abs(z.imag) > tol_scale * (1.0 + abs(z)):
        raise NumericalInconsistency(
            f"value {z!r} has imaginary residue above {tol_scale:g} gate"
        )
    return z.real


@lru_cache(maxsize=16)
def _perms_and_signs(n: int):
    """All permutations of range(n) as an (n!, n) array with their signs."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    if n == 0:
        perms = perms.reshape(1, 0)
    inv = np.zeros(len(perms), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            inv += perms[:, i] > perms[:, j]
    signs = np.where(inv % 2 == 0, 1.0, -1.0)
    perms.flags.writeable = False
    signs.flags.writeable = False
    return perms, signs


def _iter_perm_chunks(n: int, chunk: int = 65536):
    """Yield (perms, signs) chunks without materializing all of S_n at once."""
    if n <= 8:
        yield _perms_and_signs(n)
        return
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        perms = np.array(block, dtype=np.int8)
        inv = np.zeros(len(perms), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                inv += perms[:, i] > perms[:, j]
        yield perms, np.where(inv % 2 == 0, 1.0, -1.0)


def _gate(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise DimensionTooLarge(f"{what} is gated at n <= {limit}, got n = {n}")


def _subset_sums(mats) -> np.ndarray:
    """Stack of sum_{i in S} mats[i] for every bitmask S, in mask order."""
    k = len(mats)
    n = mats[0].shape[0] if k else 0
    sums = np.zeros((1 << k, n, n), dtype=np.complex128)
    for m in range(1, 1 << k):
        lb = (m & -m).bit_length() - 1
        sums[m] = sums[m ^ (1 << lb)] + mats[lb]
    return sums


@lru_cache(maxsize=32)
def _popcounts(size: int) -> np.ndarray:
    pc = np.array([bin(m).count("1") for m in range(size)], dtype=np.int64)
    pc.flags.writeable = False
    return pc


def _dets_batched(stack: np.ndarray) -> np.ndarray:
    out = np.empty(stack.shape[0], dtype=np.complex128)
    for lo in range(0, stack.shape[0], _DET_CHUNK):
        out[lo : lo + _DET_CHUNK] = np.linalg.det(stack[lo : lo + _DET_CHUNK])
    return out


def _polarized_raw(mats) -> complex:
    """sum over S of (-1)^(n-|S|) det(sum_{i in S} mats[i]); exact polarization."""
    n = len(mats)
    _gate(n, _GATE_POLARIZED, "eval_polarized")
    if n <= 13:
        sums = _subset_sums(mats)
        dets = _dets_batched(sums[1:])
        pc = _popcounts(1 << n)[1:]
        signs = np.where((n - pc) % 2 == 0, 1.0, -1.0)
        return fsum_complex(signs * dets)
    # Gray-code streaming above the stacked-memory comfort zone.
    terms = []
    current = np.zeros((n, n), dtype=np.complex128)
    buf = np.empty((_DET_CHUNK, n, n), dtype=np.complex128)
    sgn_buf = np.empty(_DET_CHUNK)
    fill = 0
    mask = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        b = (g ^ mask).bit_length() - 1
        if g & (1 << b):
            current = current + mats[b]
        else:
            current = current - mats[b]
        mask = g
        buf[fill] = current
        sgn_buf[fill] = 1.0 if (n - bin(g).count("1")) % 2 == 0 else -1.0
        fill += 1
        if fill == _DET_CHUNK:
            terms.append(sgn_buf[:fill] * np.linalg.det(buf[:fill]))
            fill = 0
    if fill:
        terms.append(sgn_buf[:fill] * np.linalg.det(buf[:fill]))
    return fsum_complex(np.concatenate(terms))


def eval_polarized(t: MatrixTuple) -> float:
    """Mixed discriminant via 2^n-term polarization; the production path."""
    return _as_real(_polarized_raw(t.matrices))


def eval_sigma_det(t: MatrixTuple) -> float:
    """Mixed discriminant as sum over sigma of det(A_sigma).

    Column i of A_sigma is column i of A_{sigma(i)}.
    """
    n = t.n
    _gate(n, _GATE_SIGMA_DET, "eval_sigma_det")
    cols = np.stack(t.matrices)  # cols[j, :, i] is column i of A_j
    totals = []
    for perms, _ in _iter_perm_chunks(n):
        stacked = np.empty((len(perms), n, n), dtype=np.complex128)
        for i in range(n):
            stacked[:, :, i] = cols[perms[:, i], :, i]
        totals.append(_dets_batched(stacked))
    return _as_real(fsum_complex(np.concatenate(totals)))


def _double_perm_raw(mats) -> complex:
    n = len(mats)
    perms, signs = _perms_and_signs(n)
    rows = np.stack(mats)  # rows[i, k, :] is row k of A_i
    per_sigma = np.empty(len(perms), dtype=np.complex128)
    prod = np.empty((len(perms), n), dtype=np.complex128)
    for s, sigma in enumerate(perms):
        for i in range(n):
            prod[:, i] = rows[i, sigma[i], perms[:, i]]
        per_sigma[s] = signs[s] * fsum_complex(signs * np.prod(prod, axis=1))
    return fsum_complex(per_sigma)


def eval_double_perm(t: MatrixTuple) -> float:
    """Signed double permutation sum; an independent (n!)^2 oracle."""
    _gate(t.n, _GATE_DOUBLE_PERM, "eval_double_perm")
    return _as_real(_double_perm_raw(t.matrices))


def permanent(c):
    """Permanent via Ryser inclusion-exclusion with compensated summation.

    Accepts real or complex square matrices; the result dtype follows the
    input.  Gated at n <= 20.
    """
    a = np.asarray(c)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    _gate(n, _GATE_PERMANENT, "permanent")
    is_complex = np.iscomplexobj(a)
    a = a.astype(np.complex128 if is_complex else np.float64)
    if n == 0:
        return 1.0
    if n <= 13:
        rows = np.zeros((1 << n, n), dtype=a.dtype)
        for m in range(1, 1 << n):
            lb = (m & -m).bit_length() - 1
            rows[m] = rows[m ^ (1 << lb)] + a[:, lb]
        pc = _popcounts(1 << n)[1:]
        signs = np.where((n - pc) % 2 == 0, 1.0, -1.0)
        terms = signs * np.prod(rows[1:], axis=1)
        return fsum_complex(terms) if is_complex else fsum_real(terms)
    # Gray-code streaming path.
    terms = np.empty((1 << n) - 1, dtype=a.dtype)
    r = np.zeros(n, dtype=a.dtype)
    mask = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        b = (g ^ mask).bit_length() - 1
        if g & (1 << b):
            r += a[:, b]
        else:
            r -= a[:, b]
        mask = g
        sgn = 1.0 if (n - bin(g).count("1")) % 2 == 0 else -1.0
        terms[k - 1] = sgn * np.prod(r)
    return fsum_complex(terms) if is_complex else fsum_real(terms)


def eval_signed_permanent(t: MatrixTuple) -> float:
    """Signed sum over sigma of per(B_sigma) with B_sigma(k, l) = A_l(k, sigma(k))."""
    n = t.n
    _gate(n, _GATE_SIGNED_PERM, "eval_signed_permanent")
    perms, signs = _perms_and_signs(n)
    rows = np.stack(t.matrices)
    idx = np.arange(n)
    totals = np.empty(len(perms), dtype=np.complex128)
    for s, sigma in enumerate(perms):
        b = rows[:, idx, sigma.astype(np.intp)].T  # b[k, l] = A_l(k, sigma(k))
        totals[s] = signs[s] * permanent(b)
    return _as_real(fsum_complex(totals))


def eval_tensor(t: MatrixTuple) -> float:
    """<(A_1 (x) ... (x) A_n) V, V> with V the antisymmetrizer vector.

    V(i_1,..,i_n) = sgn(tau) when the index word is the value sequence of a
    permutation tau, else 0 (the standard reading of the tensor formula).
    """
    n = t.n
    _gate(n, _GATE_TENSOR, "eval_tensor")
    perms, signs = _perms_and_signs(n)
    v = np.zeros((n,) * n)
    for sigma, s in zip(perms, signs):
        v[tuple(sigma)] = s
    w = v.astype(np.complex128)
    for i in range(n):
        w = np.moveaxis(np.tensordot(t.matrices[i], w, axes=(1, i)), 0, i)
    idx = tuple(perms[:, i].astype(np.intp) for i in range(n))
    return _as_real(fsum_complex(signs * w[idx]))


# ---------------------------------------------------------------------------
# gradient and identities

def _hermitian_basis(n: int):
    """Real basis of the Hermitian n x n matrices with a reconstruction recipe.

    Order: diagonal units E_kk, then for k < l the symmetric pair
    E_kl + E_lk and the imaginary pair i(E_kl - E_lk).
    """
    basis = np.zeros((n * n, n, n), dtype=np.complex128)
    labels = []
    pos = 0
    for k in range(n):
        basis[pos, k, k] = 1.0
        labels.append(("d", k, k))
        pos += 1
    for k in range(n):
        for l in range(k + 1, n):
            basis[pos, k, l] = 1.0
            basis[pos, l, k] = 1.0
            labels.append(("s", k, l))
            pos += 1
            basis[pos, k, l] = 1.0j
            basis[pos, l, k] = -1.0j
            labels.append(("a", k, l))
            pos += 1
    return basis, labels


def _slot_functional_on_basis(mats, i: int) -> np.ndarray:
    """Values of X -> D(.., X at slot i, ..) on the Hermitian basis, as reals."""
    n = len(mats)
    others = [mats[j] for j in range(n) if j != i]
    sums = _subset_sums(others)  # 2^(n-1) stacked subset sums
    pc = _popcounts(sums.shape[0])
    sign_s = np.where((n - 1 - pc) % 2 == 0, 1.0, -1.0)
    base = _dets_batched(sums)
    basis, _ = _hermitian_basis(n)
    combo = sums[None, :, :, :] + basis[:, None, :, :]
    dets = np.linalg.det(combo.reshape(-1, n, n)).reshape(n * n, sums.shape[0])
    vals = np.empty(n * n)
    for b in range(n * n):
        vals[b] = _as_real(fsum_complex(sign_s * (dets[b] - base)), 1e-8)
    return vals


def gradient(t: MatrixTuple) -> DiscriminantGradient:
    """All Q_i such that D(A_1,..,X,..,A_n) = tr(X Q_i), plus D(t).

    Q_i is recovered from the values of the slot-i-linear functional on the
    real Hermitian matrix-unit basis; exact up to round-off.
    """
    n = t.n
    _gate(n, _GATE_POLARIZED, "gradient")
    qs = []
    for i in range(n):
        vals = _slot_functional_on_basis(t.matrices, i)
        q = np.zeros((n, n), dtype=np.complex128)
        _, labels = _hermitian_basis(n)
        by_label = dict(zip(labels, vals))
        for k in range(n):
            q[k, k] = by_label[("d", k, k)]
        for k in range(n):
            for l in range(k + 1, n):
                vs = by_label[("s", k, l)]
                vt = by_label[("a", k, l)]
                q[l, k] = (vs - 1j * vt) / 2.0
                q[k, l] = (vs + 1j * vt) / 2.0
        qs.append(as_hermitian(q, tol=1e-6))
    value = eval_polarized(t)
    return DiscriminantGradient(Q=tuple(qs), value=value)


def euler_identity_residual(t: MatrixTuple, omega=None, grad: DiscriminantGradient | None = None) -> float:
    """Max-entry norm of sum_i A_i Q_i - D * I (the Eulerian matrix identity).

    With ``omega`` given, also evaluates the quadratic-form variant
    |sum_i <A_i Q_i w, w> - D <w, w>| and returns the larger residual.
    """
    g = grad if grad is not None else gradient(t)
    acc = np.zeros((t.n, t.n), dtype=np.complex128)
    for a, q in zip(t.matrices, g.Q):
        acc += a @ q
    res = max_abs(acc - g.value * np.eye(t.n))
    if omega is not None:
        w = np.asarray(omega, dtype=np.complex128).reshape(t.n)
        quad = sum(np.vdot(w, a @ (q @ w)) for a, q in zip(t.matrices, g.Q))
        res = max(res, abs(quad - g.value * np.vdot(w, w)))
    return float(res)


def check_doubly_stochastic(t: MatrixTuple, tol: Tolerances = DEFAULT_TOL) -> DsTupleReport:
    """Violations of the three doubly stochastic tuple conditions."""
    psd_v = max(psd_violation(a) for a in t.matrices)
    trace_v = max(abs(float(a.trace().real) - 1.0) for a in t.matrices)
    total = np.zeros((t.n, t.n), dtype=np.complex128)
    for a in t.matrices:
        total += a
    sum_v = max_abs(total - np.eye(t.n))
    ok = psd_v <= tol.ds_tol and trace_v <= tol.ds_tol and sum_v <= tol.ds_tol
    return DsTupleReport(psd_v, trace_v, sum_v, ok)


def exchange_value(
    t: MatrixTuple,
    i: int,
    j: int,
    grad: DiscriminantGradient | None = None,
    check_rel: float = 1e-8,
) -> tuple[float, float]:
    """(D(A^{i,j}), D(A^{j,i})): slot j replaced by A_i, and vice versa.

    Both are computed directly (polarization of the substituted tuple) and as
    tr(A_i Q_j) / tr(A_j Q_i); the two routes must agree within ``check_rel``
    relative.  A precomputed ``grad`` avoids recomputing Q.
    """
    if i == j:
        raise ValueError("exchange_value needs two distinct slots")
    g = grad if grad is not None else gradient(t)
    d_ij = eval_polarized(t.replaced(j, t.matrices[i]))
    d_ji = eval_polarized(t.replaced(i, t.matrices[j]))
    t_ij = _as_real(np.trace(t.matrices[i] @ g.Q[j]), 1e-8)
    t_ji = _as_real(np.trace(t.matrices[j] @ g.Q[i]), 1e-8)
    scale = 1.0 + abs(d_ij) + abs(d_ji)
    if abs(d_ij - t_ij) > check_rel * scale or abs(d_ji - t_ji) > check_rel * scale:
        raise NumericalInconsistency(
            f"exchange values disagree: direct ({d_ij:.12g}, {d_ji:.12g}) vs "
            f"trace form ({t_ij:.12g}, {t_ji:.12g})"
        )
    return d_ij, d_ji


def diagonal_tuple(c) -> MatrixTuple:
    """The tuple of diagonal matrices built from the columns of ``c``.

    Bridges permanents and mixed discriminants: D of the result equals per(c).
    """
    a = np.asarray(c, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    return MatrixTuple([np.diag(a[:, j]) for j in range(a.shape[0])])
