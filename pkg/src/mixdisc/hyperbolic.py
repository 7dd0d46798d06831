"""Determinantal hyperbolic polynomials: roots, e-traces, and p-mixed values.

Only determinantal representations p(x) = det(sum x_i B_i) with a positive
definite direction pencil are supported; for those, root extraction reduces
to a single Hermitian eigenproblem via congruence, so realness is structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    PreconditionViolated,
    Tolerances,
    as_hermitian,
    eig_hermitian,
    fsum_real,
    inv_sqrt_psd,
    make_rng,
    min_eigenvalue,
)
from .extremal import bapat_bound, random_ds_tuple


class HyperbolicPencil:
    """p(x) = det(sum x_i B_i) with direction e such that sum e_i B_i > 0."""

    __slots__ = ("m", "degree", "matrices", "e", "_reducer")

    def __init__(self, matrices, e, tol: Tolerances = DEFAULT_TOL):
        mats = [as_hermitian(b, tol.hermitian_tol) for b in matrices]
        if not mats:
            raise ValueError("empty pencil")
        n = mats[0].shape[0]
        if any(b.shape != (n, n) for b in mats):
            raise ValueError("pencil matrices must share one dimension")
        e = np.asarray(e, dtype=float)
        if e.shape != (len(mats),):
            raise ValueError("direction must have one entry per pencil matrix")
        pencil_at_e = self._combine(mats, e)
        if min_eigenvalue(pencil_at_e) <= tol.psd_tol * (
            1.0 + float(np.max(np.abs(pencil_at_e)))
        ):
            raise PreconditionViolated("sum e_i B_i must be positive definite")
        self.m = len(mats)
        self.degree = n
        self.matrices = tuple(mats)
        self.e = e
        self._reducer = inv_sqrt_psd(pencil_at_e, tol)

    @staticmethod
    def _combine(mats, x) -> np.ndarray:
        acc = np.zeros_like(mats[0])
        for xi, b in zip(x, mats):
            acc += xi * b
        return acc

    def at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise ValueError(f"point must be a real {self.m}-vector")
        return self._combine(self.matrices, x)

    def value(self, x) -> float:
        """p(x) = det(sum x_i B_i); real for real x and a Hermitian pencil."""
        return float(np.linalg.det(self.at(x)).real)


@dataclass(frozen=True)
class RootVector:
    """Descending roots of p(x - lambda e) and the root-product residual."""

    lam: np.ndarray
    residual: float


@dataclass(frozen=True)
class HdMembershipReport:
    nonneg_violation: float
    trace_violation: float
    sum_violation: float
    passes: bool


def roots(pencil: HyperbolicPencil, x) -> RootVector:
    """All n roots of p(x - lambda e), descending.

    They are the eigenvalues of L B(x) L with L = (sum e_i B_i)^(-1/2), hence
    real.  The residual compares their product against p(x) relatively.
    """
    l = pencil._reducer
    w, _ = eig_hermitian(l @ pencil.at(x) @ l)
    # p(x - lam e) = det(B(x) - lam E) = det(E) * prod(eig - lam)
    p_x = pencil.value(x)
    scaled = float(np.prod(w)) * pencil.value(pencil.e)
    residual = abs(scaled - p_x) / (1.0 + abs(p_x))
    return RootVector(lam=w, residual=residual)


def trace_e(pencil: HyperbolicPencil, x) -> float:
    """Sum of the roots of p(x - lambda e); linear in x."""
    return float(fsum_real(roots(pencil, x).lam))


def is_e_nonnegative(pencil: HyperbolicPencil, x, tol: float = DEFAULT_TOL.psd_tol) -> bool:
    """Whether the smallest root of p(x - lambda e) is >= -tol."""
    return float(roots(pencil, x).lam[-1]) >= -tol


def mixed_value(pencil: HyperbolicPencil, xs) -> float:
    """p-mixed value of n vectors by inclusion-exclusion polarization.

    M_p(x_1,..,x_n) = sum over S of (-1)^(n-|S|) p(sum_{i in S} x_i); valid
    because p is homogeneous of degree n.
    """
    xs = [np.asarray(x, dtype=float) for x in xs]
    n = pencil.degree
    if len(xs) != n:
        raise ValueError(f"need exactly {n} vectors (the degree of p)")
    terms = np.empty((1 << n) - 1)
    sums = np.zeros((1 << n, pencil.m))
    for mask in range(1, 1 << n):
        lb = (mask & -mask).bit_length() - 1
        sums[mask] = sums[mask ^ (1 << lb)] + xs[lb]
        sgn = 1.0 if (n - bin(mask).count("1")) % 2 == 0 else -1.0
        terms[mask - 1] = sgn * pencil.value(sums[mask])
    return fsum_real(terms)


def check_hd_membership(
    pencil: HyperbolicPencil, xs, tol: Tolerances = DEFAULT_TOL
) -> HdMembershipReport:
    """e-double stochasticity of a vector tuple: e-nonnegative, unit e-traces, sum e."""
    xs = [np.asarray(x, dtype=float) for x in xs]
    nonneg_v = 0.0
    trace_v = 0.0
    total = np.zeros(pencil.m)
    for x in xs:
        r = roots(pencil, x)
        nonneg_v = max(nonneg_v, max(0.0, -float(r.lam[-1])))
        trace_v = max(trace_v, abs(fsum_real(r.lam) - 1.0))
        total += x
    sum_v = float(np.max(np.abs(total - pencil.e)))
    passes = nonneg_v <= tol.ds_tol and trace_v <= tol.ds_tol and sum_v <= tol.ds_tol
    return HdMembershipReport(nonneg_v, trace_v, sum_v, passes)


def pencil_from_tuple(t, tol: Tolerances = DEFAULT_TOL) -> HyperbolicPencil:
    """The determinantal pencil of a matrix tuple with the all-ones direction."""
    return HyperbolicPencil(list(t.matrices), np.ones(t.n), tol)


def axis_vectors(n: int) -> list[np.ndarray]:
    return [np.eye(n)[i] for i in range(n)]


def _random_ds_matrix(n: int, rng, iters: int = 200) -> np.ndarray:
    """Classical Sinkhorn on a positive random matrix; rows and columns sum to 1."""
    m = np.exp(rng.standard_normal((n, n)))
    for _ in range(iters):
        m /= m.sum(axis=1, keepdims=True)
        m /= m.sum(axis=0, keepdims=True)
    return m


@dataclass(frozen=True)
class ConjectureExperimentReport:
    """No-counterexample report for the hyperbolic lower-bound conjecture."""

    n: int
    samples: int
    min_ratio: float
    bound: float
    violations: list
    rejection_rate: float


def conjecture_experiment(
    n: int,
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    mixtures_per_pencil: int = 50,
) -> ConjectureExperimentReport:
    """Sample e-doubly stochastic tuples and record min M_p / p(e).

    Members come from doubly stochastic matrix tuples (p(e) = 1) with the
    axis-vector tuple mixed by random doubly stochastic matrices; mixing
    preserves membership, which is rechecked and rejected on failure.
    A ratio below n!/n^n - 1e-6 is recorded as a violation, not raised.
    """
    bound = bapat_bound(n)
    rng = make_rng(seed)
    min_ratio = math.inf
    violations = []
    rejected = 0
    done = 0
    pencil_index = 0
    while done < samples:
        t = random_ds_tuple(n, seed + 7919 * pencil_index, tol)
        pencil = pencil_from_tuple(t, tol)
        for _ in range(min(mixtures_per_pencil, samples - done)):
            mix = _random_ds_matrix(n, rng)
            xs = [mix[:, j].copy() for j in range(n)]
            rep = check_hd_membership(pencil, xs, tol)
            if not rep.passes:
                rejected += 1
                continue
            ratio = mixed_value(pencil, xs) / pencil.value(pencil.e)
            done += 1
            if ratio < min_ratio:
                min_ratio = ratio
            if ratio < bound - 1e-6:
                violations.append(
                    {"seed": seed, "pencil_index": pencil_index, "ratio": ratio}
                )
        pencil_index += 1
    return ConjectureExperimentReport(
        n=n,
        samples=done,
        min_ratio=min_ratio,
        bound=bound,
        violations=violations,
        rejection_rate=rejected / max(1, done + rejected),
    )
