"""Dense complex Hermitian linear algebra shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128.  Anything
that claims to be Hermitian goes through :func:`as_hermitian`, which rejects
grids that are non-Hermitian beyond tolerance and then symmetrizes exactly,
so downstream code may rely on ``A == A.conj().T`` holding bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np


class MixdiscError(Exception):
    """Base class for all library errors."""


class DimensionTooLarge(MixdiscError):
    """An operation was asked to run above its hard cost gate."""


class NotPositiveDefinite(MixdiscError):
    pass


class NotHermitian(MixdiscError):
    pass


class NotUnitary(MixdiscError):
    pass


class NotDoublyStochastic(MixdiscError):
    pass


class NotIndecomposable(MixdiscError):
    pass


class SingularPencil(MixdiscError):
    """det(sum x_i A_i) collapsed below 1e-300; the infimum is ~0."""


class SamplerExhausted(MixdiscError):
    pass


class PreconditionViolated(MixdiscError):
    pass


class InvalidWeight(MixdiscError):
    pass


class TermNotPsd(MixdiscError):
    pass


class DecompositionInconsistent(MixdiscError):
    """Rank thresholding produced parts whose product does not match."""


class NumericalInconsistency(MixdiscError):
    """An internal cross-check (imaginary residue, dual-path agreement) failed."""


class NonConvergence(MixdiscError):
    """Iteration cap hit.  ``result`` carries the best iterate, if any."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds, all strictly below 1.

    Defaults target double-precision desk scale (n <= 12).
    """

    hermitian_tol: float = 1e-10
    psd_tol: float = 1e-9
    rank_tol: float = 1e-9
    ds_tol: float = 1e-8
    opt_tol: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (0.0 <= v < 1.0) or not math.isfinite(v):
                raise ValueError(f"{f.name} must lie in [0, 1), got {v!r}")


DEFAULT_TOL = Tolerances()


def require_finite(a: np.ndarray, what: str = "matrix") -> None:
    if not np.all(np.isfinite(a.view(float) if np.iscomplexobj(a) else a)):
        raise ValueError(f"{what} contains NaN or infinity")


def as_hermitian(a, tol: float = DEFAULT_TOL.hermitian_tol) -> np.ndarray:
    """Validate Hermiticity within ``tol`` and symmetrize exactly.

    The returned matrix satisfies ``H[i, j] == conj(H[j, i])`` exactly, since
    averaging with the conjugate transpose is symmetric in IEEE arithmetic.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    require_finite(a)
    scale = 1.0 + float(np.max(np.abs(a))) if a.size else 1.0
    defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if defect > tol * scale:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds tolerance")
    return (a + a.conj().T) / 2.0


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def det(a) -> complex:
    """Determinant of a square complex matrix via pivoted LU."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"det needs a square matrix, got shape {a.shape}")
    return complex(np.linalg.det(a))


def det_hermitian(a) -> float:
    """Determinant of a Hermitian matrix, imaginary residue truncated."""
    d = det(a)
    if abs(d.imag) > 1e-10 * (1.0 + abs(d)):
        raise NumericalInconsistency(
            f"Hermitian determinant has imaginary residue {d.imag:.3e}"
        )
    return d.real


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and a unitary eigenvector matrix of Hermitian ``a``.

    Column k of the returned matrix is the eigenvector for eigenvalue k.
    """
    a = np.asarray(a, dtype=np.complex128)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise NonConvergence(f"Hermitian eigensolver failed: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def inv_sqrt_psd(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian positive definite L with L @ a @ L == I.

    Requires all eigenvalues of ``a`` to exceed ``psd_tol`` times the largest.
    """
    w, v = eig_hermitian(a)
    if w.size == 0 or w[0] <= 0.0 or w[-1] <= tol.psd_tol * w[0]:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (eigenvalue range [{w[-1] if w.size else 0.0:.3e}, "
            f"{w[0] if w.size else 0.0:.3e}])"
        )
    l = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return (l + l.conj().T) / 2.0


def sqrt_psd(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root (eigenvalues clipped at zero)."""
    w, v = eig_hermitian(a)
    if w.size and w[-1] < -tol.psd_tol * max(1.0, abs(w[0])):
        raise NotPositiveDefinite("matrix has a significantly negative eigenvalue")
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return (s + s.conj().T) / 2.0


def min_eigenvalue(a) -> float:
    w, _ = eig_hermitian(a)
    return float(w[-1])


def rank_psd(a, tol: Tolerances = DEFAULT_TOL) -> int:
    """Count of eigenvalues above rank_tol times the largest (0 for the zero matrix)."""
    w, _ = eig_hermitian(a)
    if w.size == 0 or w[0] <= 0.0:
        return 0
    return int(np.count_nonzero(w > tol.rank_tol * w[0]))


def psd_violation(a) -> float:
    """How far a Hermitian matrix is from PSD: max(0, -smallest eigenvalue)."""
    return max(0.0, -min_eigenvalue(a))


# ---------------------------------------------------------------------------
# randomness: a single counter-based generator family, no global state

def make_rng(seed: int) -> np.random.Generator:
    """Seeded counter-based (Philox) generator; deterministic across platforms."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent child seeds from one parent seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def random_complex_gaussian(n: int, rng: np.random.Generator) -> np.ndarray:
    """n x n matrix of independent standard complex Gaussians."""
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)


def random_psd(n: int, seed: int) -> np.ndarray:
    """G @ G* for a seeded complex Gaussian G; almost surely positive definite."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    g = random_complex_gaussian(n, make_rng(seed))
    return as_hermitian(g @ g.conj().T)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = random_complex_gaussian(n, rng)
    return (g + g.conj().T) / 2.0


# ---------------------------------------------------------------------------
# compensated accumulation

def fsum_real(terms) -> float:
    """Error-free-transform sum of real terms (math.fsum)."""
    a = np.asarray(terms, dtype=np.float64).ravel()
    return math.fsum(a)


def fsum_complex(terms) -> complex:
    """Compensated sum of complex terms, real and imaginary parts separately."""
    a = np.asarray(terms, dtype=np.complex128).ravel()
    return complex(math.fsum(a.real), math.fsum(a.imag))
