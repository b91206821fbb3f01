"""Disintegration of a joint Christoffel function into marginal x conditional.

For a measure on X x Y (Y one-dimensional) the joint CF factorizes as
Lambda_joint(x, y) = Lambda_marginal(x) * Lambda_conditional(y), where the
conditional CF belongs to a measure recovered by the max-det Gram program
applied to p_t(y; x) = Lambda_joint(x, y)^{-1} / Lambda_marginal(x)^{-1}.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import enumerate_basis, monomial_vector
from .christoffel import build_cf, cf_value, uniform_interval_cf
from .errors import NotPositiveDefiniteError
from .maxdet import UnivariateSos, maxdet_hankel
from .moments import (
    DEFAULT_QUAD_ORDER,
    marginal_sequence,
    moment_matrix,
    moments_from_spec,
)
from .quadrature import hankel_to_atoms


@dataclass(frozen=True)
class DisintegrationResult:
    """Conditional measure data recovered at a single conditioning point."""

    x: np.ndarray
    t: int
    marginal_cf: float
    sos: UnivariateSos
    hankel: np.ndarray = field(repr=False)  # conditional moment matrix
    gram: np.ndarray = field(repr=False)
    dual: np.ndarray = field(repr=False)
    measure: object = None  # AtomicMeasure
    diagnostics: dict = field(default_factory=dict)

    @property
    def mass(self):
        return float(self.dual[0])


def conditional_sos(joint, marginal, x):
    """Coefficients of p_t(. ; x) = Lambda_joint(x, .)^{-1} / Lambda_marginal(x)^{-1}.

    Assembled algebraically: splitting the joint monomial vector into y-power
    blocks u_j(x), the y^k coefficient is Lambda_marginal(x) multiplied by
    sum_{j+j'=k} u_j(x)^T M^{-1} u_{j'}(x).  Returns a UnivariateSos when the
    joint basis has p = 1, otherwise a multi-index -> coefficient map over y.
    """
    basis = joint.basis
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (basis.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({basis.n},)")
    lam_marg = cf_value(marginal, x)
    L = joint.matrix.chol

    # group basis ranks by their y multi-index; entry value is x^alpha
    groups = {}
    for r, (alpha, beta) in enumerate(basis.pairs):
        v = 1.0
        for xi, e in zip(x, alpha):
            if e:
                v *= xi**e
        groups.setdefault(beta, []).append((r, v))
    betas = sorted(groups)
    z = {}
    for beta in betas:
        e = np.zeros(basis.size)
        for r, v in groups[beta]:
            e[r] = v
        z[beta] = solve_triangular(L, e, lower=True)

    coeffs = {}
    for i, b1 in enumerate(betas):
        for b2 in betas[i:]:
            key = tuple(a + b for a, b in zip(b1, b2))
            inner = float(z[b1] @ z[b2])
            factor = 1.0 if b1 == b2 else 2.0
            coeffs[key] = coeffs.get(key, 0.0) + factor * lam_marg * inner
    if basis.p == 1:
        dense = np.zeros(2 * basis.t + 1)
        for (k,), v in coeffs.items():
            dense[k] = v
        return UnivariateSos(dense)
    return coeffs


def cf_from_hankel(hankel, y):
    """CF value of a Hankel-PD conditional moment matrix at a scalar y."""
    hankel = np.asarray(hankel, dtype=float)
    try:
        L = np.linalg.cholesky(hankel)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("conditional moment matrix not PD") from exc
    v = np.power(float(y), np.arange(hankel.shape[0]))
    z = solve_triangular(L, v, lower=True)
    return 1.0 / float(z @ z)


def disintegrate_at(joint, marginal, x, extract_atoms=True):
    """Full pipeline at one point: conditional SOS -> max-det -> atoms."""
    if joint.basis.p != 1:
        raise ValueError(
            "representing-measure recovery requires a univariate conditional "
            "(p = 1); use conditional_sos directly for coefficients"
        )
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sos = conditional_sos(joint, marginal, x)
    result = maxdet_hankel(sos)
    measure = hankel_to_atoms(result.dual) if extract_atoms else None
    lam_marg = cf_value(marginal, x)
    diagnostics = {
        "joint_condition": joint.condition,
        "marginal_condition": marginal.condition,
        "newton_iterations": result.iterations,
        "gradient_norm": result.gradient_norm,
        "mass_deviation": abs(float(result.dual[0]) - 1.0),
        "extreme_marginal_cf": bool(lam_marg < 1e-14),
    }
    return DisintegrationResult(
        x=x,
        t=joint.basis.t,
        marginal_cf=lam_marg,
        sos=sos,
        hankel=result.hankel,
        gram=result.gram,
        dual=result.dual,
        measure=measure,
        diagnostics=diagnostics,
    )


def factorization_residual(joint, marginal, x, y_grid):
    """max over the grid of |L_joint(x,y) - L_marg(x) L_cond(y)| / L_joint(x,y)."""
    y_grid = np.asarray(y_grid, dtype=float)
    if y_grid.size == 0:
        return 0.0
    res = disintegrate_at(joint, marginal, x, extract_atoms=False)
    worst = 0.0
    for y in y_grid:
        lj = cf_value(joint, np.append(res.x, y))
        lc = cf_from_hankel(res.hankel, y)
        worst = max(worst, abs(lj - res.marginal_cf * lc) / lj)
    return worst


def build_evaluators(spec, t, quad_order=DEFAULT_QUAD_ORDER, n=None):
    """Joint and marginal CF evaluators for a measure spec at degree t.

    The last variable is treated as the conditioned coordinate unless `n`
    overrides the split.
    """
    seq = moments_from_spec(spec, t, quad_order=quad_order)
    d = seq.dim
    if n is None:
        n = d - 1
    if not 1 <= n < d:
        raise ValueError("need at least one marginal and one conditioned variable")
    joint = build_cf(moment_matrix(seq, enumerate_basis(n, d - n, t)))
    marg = build_cf(moment_matrix(marginal_sequence(seq, n), enumerate_basis(n, 0, t)))
    return joint, marg


def decay_sweep(spec, x, y, t_list, quad_order=DEFAULT_QUAD_ORDER):
    """Conditional CF at a fixed y across degrees, with a log-linear fit.

    Returns {"rows": [(t, value)], "slope": float | None, "r_squared": ...}.
    """
    t_list = list(t_list)
    if sorted(t_list) != t_list:
        raise ValueError("t_list must be ascending")
    rows = []
    for t in t_list:
        joint, marg = build_evaluators(spec, t, quad_order=quad_order)
        res = disintegrate_at(joint, marg, x, extract_atoms=False)
        rows.append((t, cf_from_hankel(res.hankel, y)))
    slope = r_squared = None
    if len(rows) >= 2:
        ts = np.array([r[0] for r in rows], dtype=float)
        logs = np.log([r[1] for r in rows])
        slope, intercept = np.polyfit(ts, logs, 1)
        fitted = slope * ts + intercept
        ss_res = float(np.sum((logs - fitted) ** 2))
        ss_tot = float(np.sum((logs - logs.mean()) ** 2))
        slope = float(slope)
        r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"rows": rows, "slope": slope, "r_squared": r_squared}


def asymptotic_sweep(spec, x, y, t_list, quad_order=DEFAULT_QUAD_ORDER):
    """Trend table of t * Lambda_t across degrees; no limit value asserted.

    For a univariate uniform_box spec this is t * Lambda_t(x) of the measure
    itself, computed by the stable Legendre recurrence (usable at t ~ 100).
    Otherwise each row runs the full disintegration pipeline and reports
    t * Lambda_conditional(y).
    """
    rows = []
    if spec.kind == "uniform_box" and spec.dim == 1:
        a, b = spec.bounds[0]
        xval = float(np.atleast_1d(x)[0])
        for t in t_list:
            rows.append((t, t * uniform_interval_cf(t, xval, a, b)))
        return {"rows": rows}
    for t in t_list:
        joint, marg = build_evaluators(spec, t, quad_order=quad_order)
        res = disintegrate_at(joint, marg, x, extract_atoms=False)
        rows.append((t, t * cf_from_hankel(res.hankel, y)))
    return {"rows": rows}


def conjecture_probe(spec, x, t_list, quad_order=DEFAULT_QUAD_ORDER):
    """Compare conditional moment matrices across degrees (diagnostic only).

    For consecutive degrees t < t' reports the max absolute difference
    between the leading (t+1) x (t+1) block of the degree-t' conditional
    moment matrix and the degree-t one.
    """
    t_list = list(t_list)
    if len(t_list) < 2:
        raise ValueError("conjecture probe needs at least two degrees")
    hankels = {}
    for t in t_list:
        joint, marg = build_evaluators(spec, t, quad_order=quad_order)
        res = disintegrate_at(joint, marg, x, extract_atoms=False)
        hankels[t] = res.hankel
    distances = []
    for t, t_next in zip(t_list, t_list[1:]):
        lead = hankels[t_next][: t + 1, : t + 1]
        distances.append((t, t_next, float(np.max(np.abs(lead - hankels[t])))))
    return {"hankels": hankels, "distances": distances}
