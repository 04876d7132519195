"""Small dense matrix kernels: QR, inversion and the Cayley transform.

Everything here operates on plain numpy arrays with value semantics.  The
3x3 case has closed-form fast paths; the generic routines accept any small
square matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SingularMatrixError",
    "CayleyDomainError",
    "SkewMat3",
    "frobenius",
    "qr_decompose",
    "inverse",
    "cayley",
]

_QR_DIAG_FLOOR = 1e-14
_DET_FLOOR = 1e-14
_CAYLEY_COND_LIMIT = 1e12


class SingularMatrixError(ValueError):
    """A matrix required to be invertible is numerically singular."""


class CayleyDomainError(ValueError):
    """The Cayley transform was evaluated too close to its domain boundary."""


def frobenius(m: np.ndarray) -> float:
    """Frobenius norm, the canonical matrix norm throughout the package."""
    m = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(m * m)))


@dataclass(frozen=True)
class SkewMat3:
    """A 3x3 skew-symmetric matrix stored by its strictly lower triangle.

    ``lower`` holds the entries (1,0), (2,0), (2,1); the expansion to a
    full matrix is skew-symmetric exactly, by construction.
    """

    lower: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        low = np.asarray(self.lower, dtype=float)
        if low.shape != (3,):
            raise ValueError(f"lower triangle must have shape (3,), got {low.shape}")
        object.__setattr__(self, "lower", low)

    @classmethod
    def zero(cls) -> "SkewMat3":
        return cls(np.zeros(3))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SkewMat3":
        """Project a matrix onto its skew part, keeping the lower triangle."""
        m = np.asarray(m, dtype=float)
        return cls(np.array([m[1, 0], m[2, 0], m[2, 1]]))

    def matrix(self) -> np.ndarray:
        a, b, c = self.lower
        return np.array([[0.0, -a, -b], [a, 0.0, -c], [b, c, 0.0]])

    def norm(self) -> float:
        # ||K||_F for a skew matrix: each lower entry appears twice.
        return float(np.sqrt(2.0 * np.dot(self.lower, self.lower)))

    def __add__(self, other: "SkewMat3") -> "SkewMat3":
        return SkewMat3(self.lower + other.lower)


def qr_decompose(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with the positive-diagonal sign convention.

    Returns (q, r) with q orthogonal and r upper triangular with strictly
    positive diagonal, which makes the factorization unique.
    """
    m = np.asarray(m, dtype=float)
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r)
    if np.any(np.abs(diag) < _QR_DIAG_FLOOR):
        raise SingularMatrixError(
            f"QR diagonal entry below {_QR_DIAG_FLOOR:g}: {diag}"
        )
    signs = np.sign(diag)
    return q * signs, signs[:, None] * r


def _inverse3(m: np.ndarray) -> np.ndarray:
    """Closed-form 3x3 inverse via the adjugate."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    ca = e * i - f * h
    cb = c * h - b * i
    cc = b * f - c * e
    cd = f * g - d * i
    ce = a * i - c * g
    cf = c * d - a * f
    cg = d * h - e * g
    ch = b * g - a * h
    ci = a * e - b * d
    det = a * ca + b * cd + c * cg
    if abs(det) < _DET_FLOOR:
        raise SingularMatrixError(f"3x3 determinant {det:g} below {_DET_FLOOR:g}")
    return np.array([[ca, cb, cc], [cd, ce, cf], [cg, ch, ci]]) / det


def inverse(m: np.ndarray) -> np.ndarray:
    """Matrix inverse; adjugate formula at n=3, Gaussian elimination otherwise."""
    m = np.asarray(m, dtype=float)
    if m.shape == (3, 3):
        return _inverse3(m)
    if abs(np.linalg.det(m)) < _DET_FLOOR:
        raise SingularMatrixError("matrix is numerically singular")
    return np.linalg.solve(m, np.eye(m.shape[0]))


def cayley(k: SkewMat3 | np.ndarray) -> np.ndarray:
    """Cayley transform (I - K)(I + K)^-1 of a skew-symmetric matrix.

    The result is orthogonal with determinant +1 as long as no eigenvalue
    of it reaches -1, which the caller guarantees by keeping ||K|| small.
    """
    km = k.matrix() if isinstance(k, SkewMat3) else np.asarray(k, dtype=float)
    n = km.shape[0]
    eye = np.eye(n)
    ipk = eye + km
    try:
        h = inverse(ipk)
    except SingularMatrixError as err:
        raise CayleyDomainError(
            "I + K is singular; the norm discipline on K was violated"
        ) from err
    if frobenius(ipk) * frobenius(h) > _CAYLEY_COND_LIMIT:
        raise CayleyDomainError(
            "I + K is near singular; the norm discipline on K was violated"
        )
    return (eye - km) @ h
