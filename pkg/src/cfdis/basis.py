"""Monomial multi-indices and the block-graded basis ordering.

Bases are split into an x-part (n variables) and a y-part (p variables).
Pairs (alpha, beta) are listed by increasing |beta| (block structure), then
graded-lexicographically on beta within a block, then graded-lexicographically
on alpha.  With p = 0 this reduces to the plain graded-lex monomial basis.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

MAX_DEGREE = 12


def basis_size(n, t):
    """Number of n-variate monomials of total degree <= t, binom(n+t, n)."""
    if n < 0 or t < 0:
        raise ValueError("n and t must be nonnegative")
    return comb(n + t, n)


def _multi_indices(nvars, t):
    """All exponent tuples in N^nvars with total degree <= t."""
    if nvars == 0:
        return [()]
    out = []
    for head in range(t + 1):
        for tail in _multi_indices(nvars - 1, t - head):
            out.append((head,) + tail)
    return out


def _grlex_key(exponents):
    # degree first, then lexicographic with earlier variables dominating
    return (sum(exponents), tuple(-e for e in exponents))


@dataclass(frozen=True)
class OrderedBasis:
    """Ordered list of (alpha, beta) exponent pairs with rank lookup."""

    n: int
    p: int
    t: int
    pairs: tuple = field(repr=False)
    _rank: dict = field(repr=False)

    @property
    def size(self):
        return len(self.pairs)

    @property
    def dim(self):
        return self.n + self.p

    def rank(self, pair):
        return self._rank[pair]

    def exponents(self, r):
        """Combined exponent tuple (alpha + beta concatenated) at rank r."""
        alpha, beta = self.pairs[r]
        return alpha + beta

    def labels(self, names=None):
        """Human-readable monomial labels, e.g. '1', 'x1*y^2'."""
        if names is None:
            names = [f"x{i + 1}" for i in range(self.n)] + (
                ["y"] if self.p == 1 else [f"y{i + 1}" for i in range(self.p)]
            )
        out = []
        for r in range(self.size):
            exps = self.exponents(r)
            parts = []
            for name, e in zip(names, exps):
                if e == 1:
                    parts.append(name)
                elif e > 1:
                    parts.append(f"{name}^{e}")
            out.append("*".join(parts) if parts else "1")
        return out


def enumerate_basis(n, p, t):
    """Build the OrderedBasis for n x-variables and p y-variables, degree t."""
    if n < 1:
        raise ValueError("need at least one x variable")
    if p < 0 or t < 0:
        raise ValueError("p and t must be nonnegative")
    if t > MAX_DEGREE:
        raise ValueError(f"degree {t} exceeds the supported maximum {MAX_DEGREE}")
    pairs = []
    for beta in sorted(_multi_indices(p, t), key=_grlex_key):
        db = sum(beta)
        for alpha in sorted(_multi_indices(n, t - db), key=_grlex_key):
            pairs.append((alpha, beta))
    rank = {pair: r for r, pair in enumerate(pairs)}
    return OrderedBasis(n=n, p=p, t=t, pairs=tuple(pairs), _rank=rank)


def monomial_vector(basis, point):
    """Evaluate every basis monomial at `point`, in basis order."""
    point = np.asarray(point, dtype=float)
    if point.shape != (basis.dim,):
        raise ValueError(f"point has shape {point.shape}, expected ({basis.dim},)")
    out = np.empty(basis.size)
    for r in range(basis.size):
        exps = basis.exponents(r)
        v = 1.0
        for x, e in zip(point, exps):
            if e:
                v *= x**e
        out[r] = v
    return out
