import warnings

import numpy as np
import pytest

from climarisk.elasticity import fit_cdc, predict_scenario, sweep
from climarisk.errors import (
    ClampWarning,
    GridEmpty,
    NoModel,
    NonPositiveValue,
    RankDeficient,
    TooFewObservations,
)


def planted(rng, n, p, noise=0.0, offset=0.0):
    k = rng.uniform(1.0, 50.0, size=(n, p))
    beta = rng.uniform(-1.5, 1.5, size=p)
    a = 0.7
    ly = a + np.log(k + offset) @ beta + rng.normal(0, noise, n) * (noise > 0)
    return np.exp(ly), k, a, beta


def test_noiseless_recovery(rng):
    y, k, a, beta = planted(rng, 20, 3)
    m = fit_cdc(y, k, names=["w", "x", "z"])
    np.testing.assert_allclose(m.betas, beta, atol=1e-10)
    assert m.intercept == pytest.approx(a, abs=1e-10)
    assert m.r2 == pytest.approx(1.0)
    assert m.to_dict()["betas"].keys() == {"w", "x", "z"}


def test_offset_is_applied(rng):
    y, k, _, beta = planted(rng, 15, 2, offset=1.0)
    k[:, 0] -= k[:, 0].min()  # contains a zero
    y = np.exp(0.7 + np.log(k + 1.0) @ beta)
    np.testing.assert_allclose(fit_cdc(y, k, offset=1.0).betas, beta, atol=1e-9)
    with pytest.raises(NonPositiveValue) as info:
        fit_cdc(y, k)
    assert info.value.column == "K1"


def test_collapsed_mode(rng):
    k = rng.uniform(1, 10, size=(12, 3))
    y = np.exp(0.2 + 0.4 * np.log(k.sum(axis=1)))
    m = fit_cdc(y, k, names=["a", "b", "c"], collapse=True)
    assert m.mode == "collapsed"
    assert m.names == ("a+b+c",)
    assert m.betas[0] == pytest.approx(0.4, abs=1e-12)


def test_fit_errors(rng):
    k = rng.uniform(1, 10, size=(6, 2))
    with pytest.raises(RankDeficient):
        fit_cdc(np.ones(6) * 2, np.column_stack([k[:, 0], k[:, 0] ** 2]))
    with pytest.raises(RankDeficient):
        fit_cdc(np.ones(6) * 2, np.column_stack([k[:, 0], np.full(6, 3.0)]))
    with pytest.raises(TooFewObservations):
        fit_cdc([1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(NonPositiveValue):
        fit_cdc([1.0, -2.0, 3.0], [1.0, 2.0, 3.0])


def test_scenario_identity_and_formula():
    x = np.array([3.0, 5.0, 7.0])
    b = np.array([0.25, -0.5, 1.0])
    out = predict_scenario(x, b, 0.0)
    assert out.tobytes() == x.tobytes()
    np.testing.assert_array_equal(predict_scenario(x, b, 0.5), x * (1 + 0.5 * b))


def test_scenario_clamps_with_warning():
    with pytest.warns(ClampWarning):
        out = predict_scenario([1.0, 1.0], [-2.0, 0.0], 1.0)
    np.testing.assert_array_equal(out, [0.0, 1.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        np.testing.assert_array_equal(
            predict_scenario([1.0, 1.0], [-2.0, 0.0], 1.0, clamp=False), [-1.0, 1.0])


def test_sweep_analytic_curve():
    # baseline 1 with beta 1 gives x(lam) = 1 + lam, so this scorer is 0.9 - lam
    curve = sweep(lambda r: 1.9 - r[0], [1.0], [1.0], np.linspace(0, 1, 11))
    assert curve.lambda_star == pytest.approx(0.4, abs=1e-9)
    np.testing.assert_allclose(curve.probabilities, 0.9 - curve.lambdas, atol=1e-15)


def test_sweep_without_crossing():
    curve = sweep(lambda r: 0.9, [1.0], [1.0], [0.0, 1.0])
    assert curve.lambda_star is None


def test_sweep_exact_grid_hit_and_csv():
    curve = sweep(lambda r: 1.0 - r[0] / 2, [1.0], [1.0], [0.0, 0.5, 1.0])
    assert curve.lambda_star == 0.0
    assert curve.to_csv().splitlines()[0] == "lambda,probability"


def test_sweep_errors():
    with pytest.raises(GridEmpty):
        sweep(lambda r: 0.5, [1.0], [1.0], [])
    with pytest.raises(NoModel):
        sweep(None, [1.0], [1.0], [0.0])
    with pytest.raises(ValueError):
        sweep(lambda r: 0.5, [1.0], [1.0], [0.5, 0.1])
