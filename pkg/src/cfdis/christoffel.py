"""Christoffel function evaluators, CD kernel, and orthonormal families."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import basis_size, monomial_vector
from .errors import IllConditionedError, NotPositiveDefiniteError
from .moments import CONDITION_LIMIT, riesz_eval

DET_RECIPE_MAX_SIZE = 50


@dataclass(frozen=True)
class CfEvaluator:
    """Christoffel function of a positive-definite moment matrix.

    Evaluation goes through the cached Cholesky factor (one triangular
    solve per point), never through an explicit inverse.
    """

    basis: object
    matrix: object = field(repr=False)

    @property
    def t(self):
        return self.basis.t

    @property
    def dim(self):
        return self.basis.dim

    @property
    def condition(self):
        return self.matrix.condition


def build_cf(m, condition_limit=CONDITION_LIMIT):
    """Wrap a moment matrix into a CF evaluator, refusing unusable input."""
    if not m.positive_definite:
        raise NotPositiveDefiniteError(
            "moment matrix is not positive definite; the measure may be "
            "supported on too few points for this degree"
        )
    if m.condition > condition_limit:
        raise IllConditionedError(m.condition, condition_limit)
    return CfEvaluator(basis=m.basis, matrix=m)


def cf_value(evaluator, point):
    """Lambda_t(point) = [v_t(point)^T M^{-1} v_t(point)]^{-1}."""
    v = monomial_vector(evaluator.basis, point)
    z = solve_triangular(evaluator.matrix.chol, v, lower=True)
    return 1.0 / float(z @ z)


def cd_kernel(evaluator, a, b):
    """Christoffel-Darboux kernel K_t(a, b) = v_t(a)^T M^{-1} v_t(b)."""
    L = evaluator.matrix.chol
    za = solve_triangular(L, monomial_vector(evaluator.basis, a), lower=True)
    zb = solve_triangular(L, monomial_vector(evaluator.basis, b), lower=True)
    return float(za @ zb)


@dataclass(frozen=True)
class OrthonormalFamily:
    """Coefficient rows of orthonormal polynomials in the monomial basis.

    coeffs is lower triangular in basis rank; row r holds the monomial
    coefficients of P_r.  Leading coefficients (the diagonal) are > 0.
    """

    basis: object
    coeffs: np.ndarray = field(repr=False)
    normalizers: np.ndarray = field(repr=False)

    def evaluate(self, point):
        """Values (P_0(point), ..., P_{s-1}(point))."""
        return self.coeffs @ monomial_vector(self.basis, point)

    def row_poly(self, r):
        """Row r as an exponent-tuple -> coefficient map (exact zeros dropped)."""
        return {
            self.basis.exponents(c): self.coeffs[r, c]
            for c in range(r + 1)
            if self.coeffs[r, c] != 0.0
        }


def orthonormal_det(seq, basis):
    """Orthonormal family via the leading-submatrix determinant recipe.

    P~_r is the determinant of the r-th leading submatrix of the moment
    matrix with its last row replaced by the monomials; expansion along
    that row yields the monomial coefficients as signed minors.  Each row
    is then normalized to unit length under the Riesz functional.
    """
    from .moments import moment_matrix

    m = moment_matrix(seq, basis)
    if not m.positive_definite:
        raise NotPositiveDefiniteError("moment matrix is not positive definite")
    s = basis.size
    if s > DET_RECIPE_MAX_SIZE:
        raise ValueError(
            f"determinant recipe restricted to basis sizes <= {DET_RECIPE_MAX_SIZE}"
        )
    M = m.entries
    coeffs = np.zeros((s, s))
    normalizers = np.empty(s)
    for r in range(s):
        raw = np.zeros(r + 1)
        if r == 0:
            raw[0] = M[0, 0]
        else:
            top = M[:r, : r + 1]
            for c in range(r + 1):
                minor = np.delete(top, c, axis=1)
                raw[c] = (-1.0) ** (r + c) * np.linalg.det(minor)
        norm2 = raw @ M[: r + 1, : r + 1] @ raw
        if norm2 <= 0:
            raise NotPositiveDefiniteError("determinant recipe lost positivity")
        tau = 1.0 / np.sqrt(norm2)
        coeffs[r, : r + 1] = tau * raw
        normalizers[r] = tau
    return OrthonormalFamily(basis=basis, coeffs=coeffs, normalizers=normalizers)


def orthonormal_chol(m):
    """Orthonormal family from the inverse-transpose Cholesky factor."""
    if not m.positive_definite:
        raise NotPositiveDefiniteError("moment matrix is not positive definite")
    s = m.basis.size
    coeffs = solve_triangular(m.chol, np.eye(s), lower=True)
    coeffs = np.tril(coeffs)  # exact zeros above the diagonal
    normalizers = np.diag(coeffs).copy()
    return OrthonormalFamily(basis=m.basis, coeffs=coeffs, normalizers=normalizers)


def inverse_cf_sum(family, point):
    """sum_r P_r(point)^2, the reciprocal Christoffel function."""
    vals = family.evaluate(point)
    return float(vals @ vals)


def orthonormality_residual(family, seq):
    """max |L_phi(P_r P_c) - delta_rc| over all row pairs."""
    s = family.basis.size
    worst = 0.0
    for r in range(s):
        pr = family.row_poly(r)
        for c in range(r + 1):
            pc = family.row_poly(c)
            prod = {}
            for gr, vr in pr.items():
                for gc, vc in pc.items():
                    key = tuple(a + b for a, b in zip(gr, gc))
                    prod[key] = prod.get(key, 0.0) + vr * vc
            val = riesz_eval(seq, prod)
            worst = max(worst, abs(val - (1.0 if r == c else 0.0)))
    return worst


def score_points(evaluator, points, gamma=None):
    """Scaled CF scores s_d(t) * Lambda_t for each point.

    Returns a list of (point, score) pairs, or (point, score, inside) when a
    superlevel threshold gamma is given (inside means score >= gamma).
    """
    scale = basis_size(evaluator.dim, evaluator.t)
    out = []
    for point in points:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        score = scale * cf_value(evaluator, point)
        if gamma is None:
            out.append((point, score))
        else:
            out.append((point, score, score >= gamma))
    return out


def uniform_interval_cf(t, x, a=-1.0, b=1.0):
    """CF of the uniform probability measure on [a, b] by Legendre recurrence.

    Stable at high degree where the monomial moment-matrix route is not.
    """
    u = (2.0 * x - a - b) / (b - a)
    total = 0.0
    p_prev, p = 1.0, u  # L_0, L_1
    total += 1.0  # (2*0+1) * L_0^2
    for k in range(1, t + 1):
        total += (2 * k + 1) * p * p
        p_prev, p = p, ((2 * k + 1) * u * p - k * p_prev) / (k + 1)
    return 1.0 / total
