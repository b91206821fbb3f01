import numpy as np
import pytest

from cfdis.basis import enumerate_basis
from cfdis.christoffel import build_cf, cf_value
from cfdis.disintegration import (
    asymptotic_sweep,
    build_evaluators,
    cf_from_hankel,
    conditional_sos,
    conjecture_probe,
    decay_sweep,
    disintegrate_at,
    factorization_residual,
)
from cfdis.errors import NotPositiveDefiniteError
from cfdis.maxdet import UnivariateSos
from cfdis.moments import MeasureSpec, moment_matrix, moments_uniform_box


def square_spec():
    return MeasureSpec(kind="uniform_box", bounds=((-1.0, 1.0), (-1.0, 1.0)))


def curve_spec():
    return MeasureSpec(
        kind="curve_region",
        interval=(-1.0, 1.0),
        lower=np.array([-0.8, 0.0, 0.2]),
        upper=np.array([0.9, -0.1]),
        normalize=True,
    )


def test_conditional_sos_square_t1():
    joint, marg = build_evaluators(square_spec(), 1)
    sos = conditional_sos(joint, marg, [0.0])
    assert isinstance(sos, UnivariateSos)
    np.testing.assert_allclose(sos.coeffs, [1.0, 0.0, 3.0], atol=1e-12)
    sos = conditional_sos(joint, marg, [1.0])
    np.testing.assert_allclose(sos.coeffs, [1.0, 0.0, 0.75], atol=1e-12)


def test_conditional_sos_positive_and_normalized():
    # p_t(y; x) >= 1 on a grid (value 1 is attained only at degenerate y)
    joint, marg = build_evaluators(curve_spec(), 3)
    for x in [-0.5, 0.0, 0.7]:
        sos = conditional_sos(joint, marg, [x])
        ys = np.linspace(-1.5, 1.5, 41)
        vals = np.polynomial.polynomial.polyval(ys, sos.coeffs)
        assert np.all(vals >= 1 - 1e-9)


def test_conditional_sos_shape_validation():
    joint, marg = build_evaluators(square_spec(), 2)
    with pytest.raises(ValueError):
        conditional_sos(joint, marg, [0.0, 0.0])


def test_disintegrate_at_square_t1():
    joint, marg = build_evaluators(square_spec(), 1)
    res = disintegrate_at(joint, marg, [0.0])
    np.testing.assert_allclose(res.hankel, np.diag([1.0, 1 / 3]), atol=1e-9)
    assert res.mass == pytest.approx(1.0, abs=1e-9)
    assert res.marginal_cf == pytest.approx(1.0)
    np.testing.assert_allclose(
        np.sort(res.measure.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-8
    )
    np.testing.assert_allclose(res.measure.weights, [0.5, 0.5], atol=1e-8)
    assert res.diagnostics["mass_deviation"] <= 1e-9
    assert not res.diagnostics["extreme_marginal_cf"]


def test_disintegrate_requires_univariate_conditional():
    seq = moments_uniform_box([(-1, 1)] * 3, 1)
    joint = build_cf(moment_matrix(seq, enumerate_basis(1, 2, 1)))
    marg = build_cf(
        moment_matrix(moments_uniform_box([(-1, 1)], 1), enumerate_basis(1, 0, 1))
    )
    with pytest.raises(ValueError):
        disintegrate_at(joint, marg, [0.0])


def test_cf_from_hankel():
    assert cf_from_hankel(np.diag([1.0, 1 / 3]), 0.0) == pytest.approx(1.0)
    assert cf_from_hankel(np.diag([1.0, 1 / 3]), 1.0) == pytest.approx(0.25)
    with pytest.raises(NotPositiveDefiniteError):
        cf_from_hankel(np.array([[1.0, 2.0], [2.0, 1.0]]), 0.0)


def test_factorization_residual_square():
    joint, marg = build_evaluators(square_spec(), 3)
    ys = np.linspace(-1.5, 1.5, 31)
    assert factorization_residual(joint, marg, [0.3], ys) <= 1e-8
    assert factorization_residual(joint, marg, [0.3], []) == 0.0


def test_factorization_residual_curve_region():
    joint, marg = build_evaluators(curve_spec(), 4)
    ys = np.linspace(-1.5, 1.5, 21)
    for x in [-0.5, 0.0, 0.5]:
        assert factorization_residual(joint, marg, [x], ys) <= 1e-8


def test_marginal_times_conditional_splits_joint():
    # Lambda_joint(x, y) = Lambda_marg(x) * Lambda_cond(y) pointwise
    joint, marg = build_evaluators(curve_spec(), 3)
    res = disintegrate_at(joint, marg, [0.2], extract_atoms=False)
    for y in [-0.9, 0.0, 0.4, 1.2]:
        lj = cf_value(joint, [0.2, y])
        split = res.marginal_cf * cf_from_hankel(res.hankel, y)
        assert split >= lj - 1e-9  # the split never falls below the joint CF
        assert abs(lj - split) / lj <= 1e-8


def test_conditional_sos_trivariate_coefficients():
    # p > 1 path returns a coefficient map; check the factorization identity
    # p_t(y; x) * Lambda_joint(x, y)^{-1}... i.e. p(y; x) = L_marg / L_joint.
    seq = moments_uniform_box([(-1, 1), (0, 1), (-1, 1)], 2)
    joint = build_cf(moment_matrix(seq, enumerate_basis(1, 2, 2)))
    from cfdis.moments import marginal_sequence

    marg = build_cf(
        moment_matrix(marginal_sequence(seq, 1), enumerate_basis(1, 0, 2))
    )
    coeffs = conditional_sos(joint, marg, [0.3])
    assert isinstance(coeffs, dict)
    lam_marg = cf_value(marg, [0.3])
    rng = np.random.default_rng(8)
    for _ in range(10):
        y = rng.uniform(-1, 1, 2)
        val = sum(v * y[0] ** k[0] * y[1] ** k[1] for k, v in coeffs.items())
        expected = lam_marg / cf_value(joint, [0.3, *y])
        assert val == pytest.approx(expected, rel=1e-10)


def test_build_evaluators_split_validation():
    with pytest.raises(ValueError):
        build_evaluators(square_spec(), 2, n=2)
    joint, marg = build_evaluators(square_spec(), 2, n=1)
    assert joint.basis.n == 1 and joint.basis.p == 1
    assert marg.basis.n == 1 and marg.basis.p == 0


def test_decay_sweep():
    sweep = decay_sweep(curve_spec(), [0.0], 1.2, [2, 3, 4, 5])
    rows = sweep["rows"]
    vals = [v for _, v in rows]
    assert all(b < a for a, b in zip(vals, vals[1:]))  # decay outside support
    assert sweep["slope"] < 0
    assert sweep["r_squared"] > 0.98
    with pytest.raises(ValueError):
        decay_sweep(curve_spec(), [0.0], 1.2, [3, 2])


def test_asymptotic_sweep_univariate_fast_path():
    spec = MeasureSpec(kind="uniform_box", bounds=((-1.0, 1.0),))
    sweep = asymptotic_sweep(spec, [0.0], 0.0, [20, 50, 100])
    rows = dict(sweep["rows"])
    assert abs(rows[100] - np.pi / 2) / (np.pi / 2) < 0.05
    # approximation error shrinks with the degree
    errs = [abs(rows[t] - np.pi / 2) for t in [20, 50, 100]]
    assert errs[0] > errs[1] > errs[2]


def test_asymptotic_sweep_pipeline_path():
    sweep = asymptotic_sweep(square_spec(), [0.0], 0.0, [2, 4])
    assert len(sweep["rows"]) == 2
    assert all(v > 0 for _, v in sweep["rows"])


def test_conjecture_probe():
    probe = conjecture_probe(square_spec(), [0.0], [2, 3, 4])
    assert len(probe["distances"]) == 2
    for t, t_next, d in probe["distances"]:
        assert t_next == t + 1
        assert np.isfinite(d) and d >= 0
        assert probe["hankels"][t].shape == (t + 1, t + 1)
    with pytest.raises(ValueError):
        conjecture_probe(square_spec(), [0.0], [3])


def test_determinism():
    a = disintegrate_at(*build_evaluators(curve_spec(), 3), [0.25])
    b = disintegrate_at(*build_evaluators(curve_spec(), 3), [0.25])
    assert np.array_equal(a.hankel, b.hankel)
    assert np.array_equal(a.measure.nodes, b.measure.nodes)
    assert a.marginal_cf == b.marginal_cf
