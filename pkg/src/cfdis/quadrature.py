"""Gauss-Legendre rules and atomic-measure recovery from Hankel moment data."""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NotPositiveDefiniteError


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported measure: nodes with strictly positive weights."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def mass(self):
        return float(np.sum(self.weights))


def gauss_legendre(order):
    """Gauss-Legendre rule on [-1, 1] with total mass 2.

    Exact for polynomials of degree <= 2*order - 1.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return AtomicMeasure(nodes=nodes, weights=weights)


def atoms_moments(measure, up_to):
    """Power moments sum_i w_i node_i^k for k = 0..up_to."""
    nodes = np.asarray(measure.nodes, dtype=float)
    weights = np.asarray(measure.weights, dtype=float)
    return np.array(
        [float(np.sum(weights * nodes**k)) for k in range(up_to + 1)]
    )


def _hankel(lam):
    n = (len(lam) + 1) // 2
    return np.array([[lam[r + c] for c in range(n)] for r in range(n)])


def _standardize(lam):
    """Shift/scale moments to mean 0, variance 1; returns (moments, shift, scale)."""
    lam = np.asarray(lam, dtype=float)
    m0 = lam[0]
    shift = lam[1] / m0
    centered = np.empty_like(lam)
    for k in range(len(lam)):
        centered[k] = sum(
            comb(k, i) * (-shift) ** (k - i) * lam[i] for i in range(k + 1)
        )
    var = centered[2] / m0
    if var <= 0:
        raise NotPositiveDefiniteError("degenerate second moment")
    scale = float(np.sqrt(var))
    scaled = centered / scale ** np.arange(len(lam))
    return scaled, shift, scale


def hankel_to_atoms(lam):
    """Recover the (t+1)-atom measure representing a Hankel-PD moment vector.

    `lam` holds moments 0..2t.  A (t+1)-point rule needs one extra moment;
    the sequence is standardized to mean 0 / scale 1 by an affine change of
    variable, the free odd moment is set to 0, and the Jacobi matrix is
    assembled from the Cholesky triangle of the extended Hankel matrix
    (Golub-Welsch).  The returned measure reproduces lam exactly up to
    round-off, whatever the free-moment choice.
    """
    lam = np.asarray(lam, dtype=float)
    if len(lam) % 2 == 0:
        raise ValueError("moment vector must have odd length 2t + 1")
    t = (len(lam) - 1) // 2
    if lam[0] <= 0:
        raise NotPositiveDefiniteError("mass must be strictly positive")
    if t == 0:
        return AtomicMeasure(nodes=np.array([0.0]), weights=np.array([lam[0]]))

    m, shift, scale = _standardize(lam)
    m = np.append(m, 0.0)  # free moment lam_{2t+1} := 0 after standardization

    H = _hankel(m[: 2 * t + 1])
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("Hankel matrix is not PD") from exc
    R = L.T  # H = R^T R, R upper triangular
    # extended column R[:, t+1] from R^T x = (m_{t+1}, ..., m_{2t+1})
    ext = np.linalg.solve(L, m[t + 1 : 2 * t + 2])
    Rfull = np.hstack([R, ext[:, None]])

    diag = np.empty(t + 1)
    off = np.empty(t)
    for k in range(t + 1):
        a = Rfull[k, k + 1] / Rfull[k, k]
        if k > 0:
            a -= Rfull[k - 1, k] / Rfull[k - 1, k - 1]
            off[k - 1] = Rfull[k, k] / Rfull[k - 1, k - 1]
        diag[k] = a
    nodes, vectors = eigh_tridiagonal(diag, off)
    weights = lam[0] * vectors[0, :] ** 2
    return AtomicMeasure(nodes=shift + scale * nodes, weights=weights)
