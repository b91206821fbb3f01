"""Determinant maximization over Gram parametrizations, via dual Newton.

Both solvers minimize a dual barrier objective c^T lam - sum_j log det M_j(lam)
with damped Newton steps, where the unknowns lam are the moment values of the
sought linear functional.  The matrices involved are tiny (a few dozen rows at
most), so all linear algebra runs in extended precision (long double); this is
what lets the returned Gram matrices reproduce the input polynomial to ~1e-10
relative even for poorly scaled inputs.
"""

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .errors import MaxIterationsError, NotInInteriorError

_LD = np.longdouble

MAX_ITER = 100
LAMBDA_CAP = 1e8
GRAD_TOL = 1e-13
GRAD_TOL_LOOSE = 1e-8
ARMIJO = 1e-4


@dataclass(frozen=True)
class UnivariateSos:
    """Univariate polynomial of even degree 2t, dense ascending coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or len(c) % 2 == 0:
            raise ValueError("coefficient vector must have odd length 2t + 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def half_degree(self):
        return self.degree // 2

    def __call__(self, y):
        return np.polynomial.polynomial.polyval(y, self.coeffs)


@dataclass(frozen=True)
class MaxDetResult:
    """Solution of the Hankel max-det program for a univariate SOS."""

    gram: np.ndarray = field(repr=False)  # Q*, max-det Gram matrix
    hankel: np.ndarray = field(repr=False)  # H = (Q*)^{-1}, moment matrix
    dual: np.ndarray = field(repr=False)  # lam*, Hankel values of H
    iterations: int
    gradient_norm: float
    status: str = "success"
    objective_trace: tuple = field(default=(), repr=False)

    @property
    def mass(self):
        return float(self.dual[0])


@dataclass(frozen=True)
class WeightedCone:
    """Generators g_0..g_m (g_0 = 1 by convention) and the target degree 2t."""

    generators: tuple
    t: int

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=float) for g in self.generators)
        if not gens:
            raise ValueError("need at least one generator")
        object.__setattr__(self, "generators", gens)
        if self.t < max(self.half_degrees):
            raise ValueError("t must be >= max_j ceil(deg g_j / 2)")

    @property
    def half_degrees(self):
        return [ceil(max(len(g) - 1, 0) / 2) for g in self.generators]


@dataclass(frozen=True)
class WeightedMaxDetResult:
    """Per-generator localizing matrices and SOS multipliers."""

    blocks: tuple = field(repr=False)  # M_{t-s_j}(g_j . lam*)
    multipliers: tuple = field(repr=False)  # sigma_j coefficient vectors
    dual: np.ndarray = field(repr=False)
    iterations: int
    gradient_norm: float
    status: str = "success"
    objective_trace: tuple = field(default=(), repr=False)


def _hankel_ld(lam, size):
    return np.array(
        [[lam[r + c] for c in range(size)] for r in range(size)], dtype=_LD
    )


def _chol_ld(A):
    """Cholesky in long double; raises LinAlgError when not PD."""
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0:
            raise np.linalg.LinAlgError("matrix not positive definite")
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def _tri_inv_lower_ld(L):
    n = L.shape[0]
    X = np.zeros_like(L)
    for j in range(n):
        X[j, j] = 1 / L[j, j]
        for i in range(j + 1, n):
            X[i, j] = -(L[i, j:i] @ X[j:i, j]) / L[i, i]
    return X


def _solve_ld(A, b):
    """Gaussian elimination with partial pivoting, long double."""
    A = A.copy()
    b = b.copy()
    n = len(b)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if A[piv, k] == 0:
            raise np.linalg.LinAlgError("singular Newton system")
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        mults = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k:] -= np.outer(mults, A[k, k:])
        b[k + 1 :] -= mults * b[k]
    x = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - A[k, k + 1 :] @ x[k + 1 :]) / A[k, k]
    return x


def _pd_inverse_ld(A):
    L = _chol_ld(A)
    Li = _tri_inv_lower_ld(L)
    return Li.T @ Li, L


def _uniform_start(c0, length):
    # moments of the uniform probability measure on [-1, 1], scaled by c0
    lam = np.zeros(length, dtype=_LD)
    lam[::2] = c0 / (np.arange(0, length, 2, dtype=_LD) + 1)
    return lam


def _newton(c, lam, localizers, max_iter):
    """Damped Newton on f(lam) = c @ lam - sum_j log det M_j(lam).

    `localizers` is a list of (size_j, gen_j) pairs; M_j(lam)[r, c] =
    sum_b gen_j[b] lam[r + c + b].  Returns (lam, iterations, grad_inf).
    """
    m = len(c)
    scale = _LD(1) + np.max(np.abs(c))

    def assemble(lam):
        mats = []
        for size, gen in localizers:
            M = np.zeros((size, size), dtype=_LD)
            for r in range(size):
                for cc in range(size):
                    M[r, cc] = sum(
                        gen[b] * lam[r + cc + b] for b in range(len(gen))
                    )
            mats.append(M)
        return mats

    def objective(lam):
        val = c @ lam
        for M in assemble(lam):
            L = _chol_ld(M)  # raises off the feasible region
            val -= 2 * np.sum(np.log(np.diag(L)))
        return val

    it = 0
    grad_inf = np.inf
    trace = [float(objective(lam))]
    for it in range(1, max_iter + 1):
        mats = assemble(lam)
        invs = []
        for M in mats:
            inv, _ = _pd_inverse_ld(M)
            invs.append(inv)
        grad = c.copy()
        for (size, gen), inv in zip(localizers, invs):
            for r in range(size):
                for cc in range(size):
                    for b in range(len(gen)):
                        grad[r + cc + b] -= gen[b] * inv[r, cc]
        grad_inf = float(np.max(np.abs(grad)))
        if grad_inf <= GRAD_TOL * float(scale):
            return lam, it, grad_inf, tuple(trace)
        hess = np.zeros((m, m), dtype=_LD)
        for (size, gen), inv in zip(localizers, invs):
            # B_k[r,c] = gen[k - r - c]; accumulate tr(inv B_j inv B_k)
            nb = len(gen)
            for r in range(size):
                for cc in range(size):
                    for u in range(size):
                        for v in range(size):
                            w = inv[cc, u] * inv[v, r]
                            for b1 in range(nb):
                                j = r + cc + b1
                                gb1 = gen[b1]
                                if gb1 == 0:
                                    continue
                                for b2 in range(nb):
                                    gb2 = gen[b2]
                                    if gb2 == 0:
                                        continue
                                    hess[j, u + v + b2] += gb1 * gb2 * w
        try:
            direction = _solve_ld(hess, -grad)
        except np.linalg.LinAlgError:
            break
        decrement = float(-grad @ direction)
        if decrement <= 0:
            break
        f0 = objective(lam)
        slope = grad @ direction
        step = _LD(1)
        accepted = False
        while step > 1e-16:
            trial = lam + step * direction
            try:
                if objective(trial) <= f0 + _LD(ARMIJO) * step * slope:
                    accepted = True
                    break
            except np.linalg.LinAlgError:
                pass
            step *= _LD(0.5)
        if not accepted:
            break
        lam = lam + step * direction
        trace.append(float(objective(lam)))
        if float(np.linalg.norm(lam.astype(float))) > LAMBDA_CAP:
            raise NotInInteriorError(
                "dual iterates diverged: polynomial is not in the cone interior"
            )
    # terminated without hitting the tight tolerance: classify
    mats = assemble(lam)
    grad = c.copy()
    for (size, gen), M in zip(localizers, mats):
        inv, _ = _pd_inverse_ld(M)
        for r in range(size):
            for cc in range(size):
                for b in range(len(gen)):
                    grad[r + cc + b] -= gen[b] * inv[r, cc]
    grad_inf = float(np.max(np.abs(grad)))
    if grad_inf <= GRAD_TOL_LOOSE * float(scale):
        return lam, it, grad_inf, tuple(trace)
    if it >= max_iter:
        raise MaxIterationsError(
            f"no convergence in {max_iter} iterations "
            f"(gradient inf-norm {grad_inf:.3e})"
        )
    raise NotInInteriorError(
        "Newton stalled far from optimality: polynomial is likely not in "
        f"the cone interior (gradient inf-norm {grad_inf:.3e})"
    )


def maxdet_hankel(p, max_iter=MAX_ITER):
    """Max-det Gram matrix of a strictly positive univariate polynomial.

    Solves max log det Q over PD Gram matrices of p by minimizing the dual
    c^T lam - log det H(lam) over Hankel-PD vectors lam.  At the optimum
    Q* = H(lam*)^{-1} and H(lam*) is the moment matrix of the linear
    functional whose Christoffel function is 1/p.
    """
    if not isinstance(p, UnivariateSos):
        p = UnivariateSos(np.asarray(p, dtype=float))
    c = p.coeffs.astype(_LD)
    t = p.half_degree
    if c[0] <= 0:
        raise NotInInteriorError("p(0) <= 0: not a strictly positive polynomial")
    if t == 0:
        return MaxDetResult(
            gram=np.array([[float(c[0])]]),
            hankel=np.array([[1.0 / float(c[0])]]),
            dual=np.array([1.0 / float(c[0])]),
            iterations=0,
            gradient_norm=0.0,
        )
    lam0 = _uniform_start(c[0], 2 * t + 1)
    lam, iterations, grad_inf, trace = _newton(
        c, lam0, [(t + 1, np.ones(1, dtype=_LD))], max_iter
    )
    H = _hankel_ld(lam, t + 1)
    Q, _ = _pd_inverse_ld(H)
    return MaxDetResult(
        gram=Q.astype(float),
        hankel=H.astype(float),
        dual=lam.astype(float),
        iterations=iterations,
        gradient_norm=grad_inf,
        objective_trace=trace,
    )


def weighted_maxdet(p, cone, max_iter=MAX_ITER):
    """Weighted-cone decomposition p = sum_j sigma_j g_j with max-det blocks.

    Each sigma_j is the SOS with Gram matrix M_{t-s_j}(g_j . lam*)^{-1},
    so that p = sum_j Lambda_j^{-1} g_j with Lambda_j the CF of the
    localized functional g_j . lam*.
    """
    if not isinstance(p, UnivariateSos):
        p = UnivariateSos(np.asarray(p, dtype=float))
    t = cone.t
    if p.degree > 2 * t:
        raise ValueError("polynomial degree exceeds the cone degree 2t")
    c = np.zeros(2 * t + 1, dtype=_LD)
    c[: len(p.coeffs)] = p.coeffs
    localizers = [
        (t - s + 1, g.astype(_LD)) for g, s in zip(cone.generators, cone.half_degrees)
    ]
    lam0 = _uniform_start(max(c[0], _LD(1e-2) * (1 + np.max(np.abs(c)))), 2 * t + 1)
    # initial point must keep every localizing matrix PD
    try:
        for size, gen in localizers:
            M = np.zeros((size, size), dtype=_LD)
            for r in range(size):
                for cc in range(size):
                    M[r, cc] = sum(gen[b] * lam0[r + cc + b] for b in range(len(gen)))
            _chol_ld(M)
    except np.linalg.LinAlgError as exc:
        raise NotInInteriorError(
            "uniform starting point infeasible for these generators"
        ) from exc
    lam, iterations, grad_inf, trace = _newton(c, lam0, localizers, max_iter)
    blocks = []
    multipliers = []
    for size, gen in localizers:
        M = np.zeros((size, size), dtype=_LD)
        for r in range(size):
            for cc in range(size):
                M[r, cc] = sum(gen[b] * lam[r + cc + b] for b in range(len(gen)))
        inv, _ = _pd_inverse_ld(M)
        sigma = np.zeros(2 * size - 1, dtype=_LD)
        for r in range(size):
            for cc in range(size):
                sigma[r + cc] += inv[r, cc]
        blocks.append(M.astype(float))
        multipliers.append(sigma.astype(float))
    return WeightedMaxDetResult(
        blocks=tuple(blocks),
        multipliers=tuple(multipliers),
        dual=lam.astype(float),
        iterations=iterations,
        gradient_norm=grad_inf,
        objective_trace=trace,
    )
