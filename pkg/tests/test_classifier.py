import warnings
from fractions import Fraction

import numpy as np
import pytest
from oracles import dual_value, grid_qp_dual, mann_whitney_auc
from scipy.optimize import minimize

from climarisk.classifier import (
    cross_validate,
    decision_value,
    fit_calibration,
    kkt_residuals,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_probability,
    roc_curve,
    stratified_folds,
    train_svm,
)
from climarisk.errors import DidNotConverge, FoldTooSmall, SingleClass, SingleClassFold
from climarisk.sampling import LabeledDataset


def blobs(rng, n=30, gap=2.0, d=2):
    x = np.vstack([rng.normal(size=(n, d)) + gap, rng.normal(size=(n, d)) - gap])
    y = np.r_[np.ones(n), -np.ones(n)]
    return LabeledDataset(x, y)


def test_two_point_margin():
    d = LabeledDataset([[-1.0, 0.0], [1.0, 0.0]], [-1.0, 1.0])
    m = train_svm(d, C=100.0)
    np.testing.assert_allclose(m.w, [1.0, 0.0], atol=1e-9)
    assert abs(m.b) < 1e-9
    np.testing.assert_allclose(m.alphas, [0.5, 0.5], atol=1e-9)
    assert m.converged


@pytest.mark.parametrize("C", [0.1, 1.0, 10.0])
def test_dual_matches_grid_oracle(C):
    rng = np.random.default_rng(int(C * 10))
    for _ in range(3):
        x = rng.normal(size=(4, 2))
        y = np.array([1.0, 1.0, -1.0, -1.0])
        ref, _ = grid_qp_dual(x, y, C)
        m = train_svm(LabeledDataset(x, y), C=C)
        assert m.dual_objective(x, y) == pytest.approx(ref, abs=1e-6)


def test_kkt_and_box_constraints(rng):
    d = blobs(rng, gap=0.7)
    m = train_svm(d, C=1.0, tol=1e-8)
    assert np.all(m.alphas >= 0) and np.all(m.alphas <= m.C)
    assert abs(m.alphas @ d.labels) < 1e-9
    assert kkt_residuals(m, d.features, d.labels).max() < 1e-6
    np.testing.assert_allclose(m.w, (m.alphas * d.labels) @ d.features)


def test_objective_history_non_decreasing(rng):
    d = blobs(rng, gap=0.5)
    m = train_svm(d, C=2.0)
    h = m.objective_history
    assert h.size > 1
    assert np.all(np.diff(h) >= -1e-12 * np.abs(h[1:]).max())
    assert h[-1] == pytest.approx(dual_value(m.alphas, d.features, d.labels), rel=1e-9)


def test_iteration_cap_warns(rng):
    d = blobs(rng, gap=0.3)
    with pytest.warns(DidNotConverge):
        m = train_svm(d, C=10.0, max_iter=2)
    assert not m.converged


def test_single_class_rejected():
    with pytest.raises(SingleClass):
        train_svm(LabeledDataset([[0.0], [1.0]], [1.0, 1.0]))


def test_calibration_matches_scipy(rng):
    d = blobs(rng, gap=0.6)
    m = train_svm(d, C=1.0)
    cal = fit_calibration(m, d)
    f = decision_value(m, d.features)
    n_pos, n_neg = d.counts()
    t = np.where(d.labels > 0, (n_pos + 1) / (n_pos + 2), 1 / (n_neg + 2))

    def nll(p):
        z = p[0] * f + p[1]
        return np.sum(t * z + np.logaddexp(0, -z))

    ref = minimize(nll, [0.0, 0.0], method="BFGS", options={"gtol": 1e-10})
    assert cal.A == pytest.approx(ref.x[0], abs=1e-5)
    assert cal.B == pytest.approx(ref.x[1], abs=1e-5)
    assert cal.A < 0
    p = predict_probability(m, cal, d.features)
    assert np.all((p > 0) & (p < 1))
    assert np.mean((p >= 0.5) == (d.labels > 0)) > 0.8


def test_roc_hand_case():
    pts, auc = roc_curve([0.9, 0.8, 0.7, 0.6], [1, -1, 1, -1])
    np.testing.assert_array_equal(pts[:, 0], [0, 0, 0.5, 0.5, 1])
    np.testing.assert_array_equal(pts[:, 1], [0, 0.5, 0.5, 1, 1])
    assert np.isinf(pts[0, 2])
    assert auc == 0.75


def test_roc_matches_mann_whitney_with_ties(rng):
    for _ in range(30):
        n = int(rng.integers(2, 15))
        s = rng.integers(0, 4, size=n).astype(float)
        y = np.where(rng.random(n) < 0.5, 1, -1)
        y[0], y[1] = 1, -1
        _, auc = roc_curve(s, y)
        assert auc == float(mann_whitney_auc(s.tolist(), y.tolist()))


def test_roc_needs_both_classes():
    with pytest.raises(SingleClass):
        roc_curve([0.1, 0.2], [1, 1])


def test_stratified_folds_sizes():
    y = np.r_[np.ones(23), -np.ones(23)]
    f = stratified_folds(y, 5, seed=0)
    assert np.bincount(f).tolist() == [10, 9, 9, 9, 9]
    for k in range(5):
        pos = int(np.sum((f == k) & (y > 0)))
        assert pos in (4, 5)
    np.testing.assert_array_equal(f, stratified_folds(y, 5, seed=0))
    with pytest.raises(FoldTooSmall):
        stratified_folds(y[:3], 5, 0)


def test_cross_validate_threads_agree(rng):
    d = blobs(rng, gap=1.5)
    a = cross_validate(d, k=5, seed=9, threads=1)
    b = cross_validate(d, k=5, seed=9, threads=4)
    assert a.accuracies == b.accuracies
    assert a.auc == b.auc
    assert a.mean_accuracy > 0.9


def test_single_class_fold():
    d = LabeledDataset(np.arange(6.0)[:, None], [1, 1, 1, 1, 1, -1])
    with pytest.raises(SingleClassFold):
        cross_validate(d, k=2, seed=0)


def test_model_round_trip(tmp_path, rng):
    import json

    d = blobs(rng)
    m = train_svm(d)
    cal = fit_calibration(m, d)
    doc = model_to_dict(m, cal, {"features": ["a", "b"]})
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    m2, cal2, raw = load_model(path)
    np.testing.assert_array_equal(m2.w, m.w)
    assert (m2.b, cal2.A, cal2.B) == (m.b, cal.A, cal.B)
    assert raw["features"] == ["a", "b"]
    with pytest.raises(ValueError):
        model_from_dict({"format": "other"})


def test_fraction_oracle_sanity():
    assert mann_whitney_auc([1, 1], [1, -1]) == Fraction(1, 2)


def test_fit_is_warning_free_on_separable_data(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_svm(blobs(rng, gap=3.0), C=1.0)
