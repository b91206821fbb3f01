import numpy as np
import pytest

from cfdis.basis import basis_size, enumerate_basis, monomial_vector
from cfdis.christoffel import (
    build_cf,
    cd_kernel,
    cf_value,
    inverse_cf_sum,
    orthonormal_chol,
    orthonormal_det,
    orthonormality_residual,
    score_points,
    uniform_interval_cf,
)
from cfdis.errors import IllConditionedError, NotPositiveDefiniteError
from cfdis.moments import (
    MomentSequence,
    marginal_sequence,
    moment_matrix,
    moments_from_samples,
    moments_uniform_box,
    riesz_eval,
)


def uniform_evaluator(t=1):
    seq = moments_uniform_box([(-1, 1)], t)
    return build_cf(moment_matrix(seq, enumerate_basis(1, 0, t)))


def test_build_cf_uniform_t1():
    e = uniform_evaluator()
    for x in [0.0, 0.3, -0.7, 2.0]:
        assert cf_value(e, [x]) == pytest.approx(1 / (1 + 3 * x * x))


def test_build_cf_rejects_singular():
    seq = moments_from_samples([[2.0]], 1)
    m = moment_matrix(seq, enumerate_basis(1, 0, 1))
    with pytest.raises(NotPositiveDefiniteError):
        build_cf(m)


def test_build_cf_rejects_ill_conditioned():
    seq = moments_uniform_box([(-1, 1)], 3)
    m = moment_matrix(seq, enumerate_basis(1, 0, 3))
    with pytest.raises(IllConditionedError):
        build_cf(m, condition_limit=1.0)


def test_build_cf_bivariate_block_basis():
    seq = moments_uniform_box([(-1, 1), (-1, 1)], 2)
    e = build_cf(moment_matrix(seq, enumerate_basis(1, 1, 2)))
    assert e.basis.labels() == ["1", "x1", "x1^2", "y", "x1*y", "y^2"]
    assert cf_value(e, [0.0, 0.0]) > 0


def test_cf_value_points():
    e = uniform_evaluator()
    assert cf_value(e, [0.0]) == pytest.approx(1.0)
    assert cf_value(e, [1.0]) == pytest.approx(0.25)
    assert cf_value(e, [2.0]) == pytest.approx(1 / 13)


def test_cd_kernel():
    e = uniform_evaluator()
    assert cd_kernel(e, [0.0], [0.0]) == pytest.approx(1.0)
    assert cd_kernel(e, [1.0], [-1.0]) == pytest.approx(-2.0)
    rng = np.random.default_rng(5)
    for _ in range(10):
        a, b = rng.uniform(-2, 2, 2)
        assert cd_kernel(e, [a], [b]) == pytest.approx(1 + 3 * a * b)
        assert cd_kernel(e, [a], [b]) == pytest.approx(cd_kernel(e, [b], [a]))
        assert cd_kernel(e, [a], [a]) == pytest.approx(1 / cf_value(e, [a]))


def test_orthonormal_det_raw_rows_match_minor_formulas():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 1, size=(60, 2)) + np.array([0.2, -0.1])
    seq = moments_from_samples(pts, 2)
    basis = enumerate_basis(1, 1, 2)
    fam = orthonormal_det(seq, basis)
    mu = lambda a, b: seq((a, b))
    # raw (unnormalized) determinant polynomials, recovered via the stored tau
    raw1 = fam.coeffs[1, :2] / fam.normalizers[1]
    np.testing.assert_allclose(raw1, [-mu(1, 0), mu(0, 0)], rtol=1e-10)
    raw2 = fam.coeffs[2, :3] / fam.normalizers[2]
    np.testing.assert_allclose(
        raw2[2], mu(0, 0) * mu(2, 0) - mu(1, 0) ** 2, rtol=1e-10
    )


def test_orthonormal_det_legendre():
    seq = moments_uniform_box([(-1, 1)], 2)
    fam = orthonormal_det(seq, enumerate_basis(1, 0, 2))
    np.testing.assert_allclose(fam.coeffs[0], [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(fam.coeffs[1], [0, np.sqrt(3), 0], atol=1e-12)
    np.testing.assert_allclose(
        fam.coeffs[2], [-np.sqrt(5) / 2, 0, 3 * np.sqrt(5) / 2], atol=1e-12
    )


def test_orthonormal_chol_matches_det():
    seq = moments_uniform_box([(-1, 1)], 2)
    basis = enumerate_basis(1, 0, 2)
    fam_d = orthonormal_det(seq, basis)
    fam_c = orthonormal_chol(moment_matrix(seq, basis))
    np.testing.assert_allclose(fam_d.coeffs, fam_c.coeffs, atol=1e-8)


def test_orthonormal_chol_identity_and_samples():
    ident = MomentSequence(dim=1, degree=2, values={(0,): 1.0, (1,): 0.0, (2,): 1.0})
    fam = orthonormal_chol(moment_matrix(ident, enumerate_basis(1, 0, 1)))
    np.testing.assert_allclose(fam.coeffs, np.eye(2))

    seq = moments_from_samples([[0.0], [1.0]], 1)
    fam = orthonormal_chol(moment_matrix(seq, enumerate_basis(1, 0, 1)))
    np.testing.assert_allclose(fam.coeffs[1], [-1.0, 2.0], rtol=1e-12)


def test_positive_leading_coefficients():
    rng = np.random.default_rng(21)
    seq = moments_from_samples(rng.uniform(-1, 1, size=(80, 2)), 3)
    basis = enumerate_basis(1, 1, 3)
    for fam in [orthonormal_det(seq, basis),
                orthonormal_chol(moment_matrix(seq, basis))]:
        assert np.all(np.diag(fam.coeffs) > 0)


def test_inverse_cf_sum_values():
    seq = moments_uniform_box([(-1, 1)], 1)
    fam = orthonormal_chol(moment_matrix(seq, enumerate_basis(1, 0, 1)))
    assert inverse_cf_sum(fam, [0.0]) == pytest.approx(1.0)
    assert inverse_cf_sum(fam, [1.0]) == pytest.approx(4.0)
    assert inverse_cf_sum(fam, [0.37]) >= fam.coeffs[0, 0] ** 2


def test_cf_definitions_consistency():
    # sum of squared orthonormal polys equals 1 / cf_value
    rng = np.random.default_rng(13)
    for t in [2, 4]:
        seq = moments_uniform_box([(-1, 1), (0, 1)], t)
        basis = enumerate_basis(1, 1, t)
        m = moment_matrix(seq, basis)
        e = build_cf(m)
        fam = orthonormal_chol(m)
        for _ in range(20):
            pt = rng.uniform(-1, 1, 2)
            assert abs(inverse_cf_sum(fam, pt) * cf_value(e, pt) - 1) <= 1e-8


def test_orthonormality_residual():
    seq = moments_uniform_box([(-1, 1), (-1, 1)], 4)
    basis = enumerate_basis(1, 1, 4)
    fam = orthonormal_chol(moment_matrix(seq, basis))
    assert orthonormality_residual(fam, seq) <= 1e-8


def test_marginal_rows_have_no_y_terms():
    # Rows indexed by |beta| = 0 never touch y monomials and are orthonormal
    # under the marginal sequence.
    seq = moments_uniform_box([(-1, 1), (0, 1)], 3)
    basis = enumerate_basis(1, 1, 3)
    fam = orthonormal_det(seq, basis)
    marg = marginal_sequence(seq, 1)
    x_ranks = [r for r, (_, beta) in enumerate(basis.pairs) if beta == (0,)]
    for r in x_ranks:
        for c in range(basis.size):
            if basis.pairs[c][1] != (0,):
                assert fam.coeffs[r, c] == 0.0
    for r in x_ranks:
        poly = {
            basis.pairs[c][0]: fam.coeffs[r, c]
            for c in x_ranks
            if fam.coeffs[r, c] != 0.0
        }
        sq = {}
        for g1, v1 in poly.items():
            for g2, v2 in poly.items():
                key = tuple(a + b for a, b in zip(g1, g2))
                sq[key] = sq.get(key, 0.0) + v1 * v2
        assert riesz_eval(marg, sq) == pytest.approx(1.0, abs=1e-8)


def test_variational_and_reproducing_properties():
    t = 3
    seq = moments_uniform_box([(-1, 1)], t)
    basis = enumerate_basis(1, 0, t)
    m = moment_matrix(seq, basis)
    e = build_cf(m)
    rng = np.random.default_rng(17)
    x0 = np.array([0.4])
    v0 = monomial_vector(basis, x0)
    cf0 = cf_value(e, x0)
    k00 = cd_kernel(e, x0, x0)
    for _ in range(30):
        coeffs = rng.normal(size=basis.size)
        val = coeffs @ v0
        if abs(val) < 1e-3:
            continue
        coeffs = coeffs / val  # q(x0) = 1
        sq = {}
        for r in range(basis.size):
            for c in range(basis.size):
                key = tuple(
                    a + b for a, b in zip(basis.exponents(r), basis.exponents(c))
                )
                sq[key] = sq.get(key, 0.0) + coeffs[r] * coeffs[c]
        assert riesz_eval(seq, sq) >= cf0 - 1e-10
        # reproducing property: L(K(x0, .) q) = q(x0) = 1
        w = np.linalg.solve(m.entries, v0)  # coefficients of K(x0, .)
        kq = {}
        for r in range(basis.size):
            for c in range(basis.size):
                key = tuple(
                    a + b for a, b in zip(basis.exponents(r), basis.exponents(c))
                )
                kq[key] = kq.get(key, 0.0) + w[r] * coeffs[c]
        assert riesz_eval(seq, kq) == pytest.approx(1.0, abs=1e-8)
    # the normalized kernel achieves the variational minimum
    wstar = np.linalg.solve(m.entries, v0) / k00
    sq = {}
    for r in range(basis.size):
        for c in range(basis.size):
            key = tuple(a + b for a, b in zip(basis.exponents(r), basis.exponents(c)))
            sq[key] = sq.get(key, 0.0) + wstar[r] * wstar[c]
    assert riesz_eval(seq, sq) == pytest.approx(cf0, abs=1e-8)


def test_score_points():
    e = uniform_evaluator()
    scored = score_points(e, [[0.0], [2.0]], gamma=0.5)
    assert scored[0][1] == pytest.approx(2.0)
    assert scored[1][1] == pytest.approx(2 / 13)
    assert scored[0][2] and not scored[1][2]
    assert score_points(e, []) == []
    inside = score_points(e, [[0.1]])[0][1]
    outside = score_points(e, [[1.8]])[0][1]
    assert inside > outside
    assert basis_size(1, 1) == 2  # the s_d(t) scale used above


def test_uniform_interval_cf_matches_moment_route():
    e = uniform_evaluator(t=4)
    for x in [-0.9, -0.2, 0.0, 0.5, 1.3]:
        assert uniform_interval_cf(4, x) == pytest.approx(
            cf_value(e, [x]), rel=1e-10
        )
    # general interval via affine map
    seq = moments_uniform_box([(0, 3)], 3)
    e2 = build_cf(moment_matrix(seq, enumerate_basis(1, 0, 3)))
    for x in [0.3, 1.5, 2.9]:
        assert uniform_interval_cf(3, x, 0, 3) == pytest.approx(
            cf_value(e2, [x]), rel=1e-9
        )
