"""Moment sequences, Riesz functional, moment and localizing matrices."""

from dataclasses import dataclass, field

import numpy as np

from .basis import OrderedBasis, _multi_indices
from .errors import InvalidRegionError, NotPositiveDefiniteError
from .quadrature import gauss_legendre

CONDITION_LIMIT = 1e12
DEFAULT_QUAD_ORDER = 64


@dataclass(frozen=True)
class MomentSequence:
    """Moments phi_gamma for all |gamma| <= degree, as a multi-index map."""

    dim: int
    degree: int
    values: dict = field(repr=False)

    def __post_init__(self):
        for gamma in _multi_indices(self.dim, self.degree):
            if gamma not in self.values:
                raise ValueError(f"missing moment for index {gamma}")
        if self.values[(0,) * self.dim] <= 0:
            raise ValueError("zero-index moment (mass) must be strictly positive")

    def __call__(self, gamma):
        return self.values[tuple(gamma)]

    @property
    def mass(self):
        return self.values[(0,) * self.dim]


@dataclass(frozen=True)
class MomentMatrix:
    """Moment matrix over an OrderedBasis with an optional Cholesky factor.

    `chol` is None when the matrix failed the positive-definiteness test;
    consumers decide whether that is an error.
    """

    basis: OrderedBasis
    entries: np.ndarray = field(repr=False)
    chol: np.ndarray | None = field(repr=False)
    condition: float
    jitter: float = 0.0

    @property
    def positive_definite(self):
        return self.chol is not None


@dataclass(frozen=True)
class MeasureSpec:
    """Declarative measure description consumed by the pipeline and the CLI.

    kind is one of:
      - "samples": empirical measure of the points in `path` (CSV) or `points`
      - "uniform_box": uniform on a product of intervals `bounds`
      - "curve_region": uniform on {(x, y): x in interval, a(x) <= y <= b(x)}
        with polynomial graphs a, b given by ascending coefficient lists
    """

    kind: str
    bounds: tuple = None
    path: str = None
    points: np.ndarray = None
    interval: tuple = (-1.0, 1.0)
    lower: np.ndarray = None
    upper: np.ndarray = None
    normalize: bool = True

    @property
    def dim(self):
        if self.kind == "uniform_box":
            return len(self.bounds)
        if self.kind == "curve_region":
            return 2
        return None  # samples: determined by the data


def moments_from_samples(points, t):
    """Empirical moments (1/N) sum_i points_i^gamma up to degree 2t."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.size == 0:
        raise ValueError("need at least one sample point")
    n_pts, d = points.shape
    values = {}
    for gamma in _multi_indices(d, 2 * t):
        mono = np.ones(n_pts)
        for j, e in enumerate(gamma):
            if e:
                mono = mono * points[:, j] ** e
        values[gamma] = float(np.mean(mono))
    return MomentSequence(dim=d, degree=2 * t, values=values)


def _uniform_interval_moment(a, b, k):
    # probability-normalized k-th moment of uniform on [a, b]
    return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))


def moments_uniform_box(bounds, t, normalize=True):
    """Product moments of the uniform measure on a box, up to degree 2t."""
    bounds = [(float(a), float(b)) for a, b in bounds]
    for a, b in bounds:
        if a == b:
            raise ValueError(f"degenerate interval [{a}, {b}]")
    d = len(bounds)
    volume = float(np.prod([b - a for a, b in bounds]))
    values = {}
    for gamma in _multi_indices(d, 2 * t):
        m = 1.0
        for (a, b), k in zip(bounds, gamma):
            m *= _uniform_interval_moment(a, b, k)
        values[gamma] = m if normalize else m * volume
    return MomentSequence(dim=d, degree=2 * t, values=values)


def moments_curve_region(spec, t, quad_order=DEFAULT_QUAD_ORDER):
    """Moments of the region a(x) <= y <= b(x) over the X interval.

    mu_{alpha,j} = int_X x^alpha (b(x)^{j+1} - a(x)^{j+1}) / (j+1) dx,
    evaluated by Gauss-Legendre quadrature, then probability-normalized
    when the spec asks for it.
    """
    if spec.kind != "curve_region":
        raise ValueError("spec must be a curve_region")
    if quad_order < t + 1:
        raise ValueError("quad_order must be at least t + 1")
    lo, hi = spec.interval
    rule = gauss_legendre(quad_order)
    # map the mass-2 rule on [-1, 1] to the X interval (total weight hi - lo)
    nodes = 0.5 * (hi - lo) * rule.nodes + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * rule.weights
    a_vals = np.polynomial.polynomial.polyval(nodes, spec.lower)
    b_vals = np.polynomial.polynomial.polyval(nodes, spec.upper)
    if np.any(b_vals - a_vals <= 0):
        raise InvalidRegionError("b(x) - a(x) must be > 0 on the X interval")
    values = {}
    for gamma in _multi_indices(2, 2 * t):
        alpha, j = gamma
        fiber = (b_vals ** (j + 1) - a_vals ** (j + 1)) / (j + 1)
        values[gamma] = float(np.sum(weights * nodes**alpha * fiber))
    if spec.normalize:
        mass = values[(0, 0)]
        values = {g: v / mass for g, v in values.items()}
    return MomentSequence(dim=2, degree=2 * t, values=values)


def moments_from_spec(spec, t, quad_order=DEFAULT_QUAD_ORDER):
    """Dispatch a MeasureSpec to the matching moment generator."""
    if spec.kind == "uniform_box":
        return moments_uniform_box(spec.bounds, t, normalize=spec.normalize)
    if spec.kind == "curve_region":
        return moments_curve_region(spec, t, quad_order=quad_order)
    if spec.kind == "samples":
        pts = spec.points
        if pts is None:
            pts = read_points_csv(spec.path)
        return moments_from_samples(pts, t)
    raise ValueError(f"unknown measure kind {spec.kind!r}")


def riesz_eval(seq, poly):
    """Riesz functional: sum_gamma p_gamma * phi_gamma.

    `poly` is a map from exponent tuples to coefficients.
    """
    total = 0.0
    for gamma, coeff in poly.items():
        gamma = tuple(gamma)
        if sum(gamma) > seq.degree:
            raise ValueError(f"monomial {gamma} exceeds moment degree {seq.degree}")
        total += coeff * seq.values[gamma]
    return total


def moment_matrix(seq, basis, jitter=0.0):
    """Assemble M_t(phi) over `basis` and attempt its Cholesky factorization."""
    if 2 * basis.t > seq.degree:
        raise ValueError("basis degree exceeds available moments")
    if basis.dim != seq.dim:
        raise ValueError("basis / sequence dimension mismatch")
    s = basis.size
    entries = np.empty((s, s))
    for r in range(s):
        er = basis.exponents(r)
        for c in range(r, s):
            ec = basis.exponents(c)
            v = seq.values[tuple(a + b for a, b in zip(er, ec))]
            entries[r, c] = v
            entries[c, r] = v
    if jitter:
        entries = entries + jitter * np.eye(s)
    try:
        chol = np.linalg.cholesky(entries)
    except np.linalg.LinAlgError:
        chol = None
    condition = float(np.linalg.cond(entries))
    return MomentMatrix(
        basis=basis, entries=entries, chol=chol, condition=condition, jitter=jitter
    )


def localize_sequence(seq, g):
    """Localizing sequence g . phi with (g.phi)_alpha = sum_beta g_beta phi_{alpha+beta}.

    `g` is a map from exponent tuples to coefficients.  The returned degree
    bound is 2(t - s) with s = ceil(deg g / 2).
    """
    g = {tuple(k): v for k, v in g.items()}
    deg_g = max((sum(k) for k in g), default=0)
    s = (deg_g + 1) // 2
    t = seq.degree // 2
    new_degree = 2 * (t - s)
    if new_degree < 0:
        raise ValueError("generator degree exceeds the moment budget")
    values = {}
    for alpha in _multi_indices(seq.dim, new_degree):
        values[alpha] = sum(
            coeff * seq.values[tuple(a + b for a, b in zip(alpha, beta))]
            for beta, coeff in g.items()
        )
    if values[(0,) * seq.dim] <= 0:
        raise NotPositiveDefiniteError("localized mass is not strictly positive")
    return MomentSequence(dim=seq.dim, degree=new_degree, values=values)


def marginal_sequence(seq, n):
    """Marginal moments on the first n variables: phi_alpha = mu_(alpha, 0)."""
    if not 1 <= n <= seq.dim:
        raise ValueError("marginal dimension out of range")
    pad = (0,) * (seq.dim - n)
    values = {
        alpha: seq.values[alpha + pad] for alpha in _multi_indices(n, seq.degree)
    }
    return MomentSequence(dim=n, degree=seq.degree, values=values)


def affine_rescale(points):
    """Affinely map sample columns onto [-1, 1]; returns (scaled, shift, scale).

    Inverse map: original = scaled * scale + shift.  Constant columns are
    left untouched (scale 1).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    shift = 0.5 * (hi + lo)
    scale = 0.5 * (hi - lo)
    scale[scale == 0] = 1.0
    return (points - shift) / scale, shift, scale


def read_points_csv(path):
    """Read sample points from a CSV file with a header row."""
    import csv

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty CSV file")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows)
