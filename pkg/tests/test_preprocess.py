import numpy as np
import pytest

from vocstress.preprocess import (
    AllMissingColumn,
    NonPositiveResistance,
    ZeroBaseline,
    gsr_conductance,
    impute_column_mean,
    norm_decrease,
    norm_increase,
)


def test_norm_decrease_examples():
    assert norm_decrease(100.0, 80.0) == pytest.approx(0.20)
    assert norm_decrease(100.0, 100.0) == 0.0
    assert norm_decrease(50.0, 75.0) == pytest.approx(-0.5)


def test_norm_increase_examples():
    assert norm_increase(100.0, 140.0) == pytest.approx(0.40)
    assert norm_increase(100.0, 100.0) == 0.0


def test_sign_conventions_cancel(rng):
    b = rng.uniform(0.5, 1000.0, 20000)
    x = rng.uniform(-500.0, 2000.0, 20000)
    total = norm_increase(b, x) + norm_decrease(b, x)
    scale = np.abs(norm_increase(b, x)) + 1.0
    assert np.max(np.abs(total) / scale) < 1e-12


def test_zero_baseline_raises():
    with pytest.raises(ZeroBaseline):
        norm_decrease(0.0, 5.0)
    with pytest.raises(ZeroBaseline):
        norm_increase(0.0, 5.0)


def test_conductance_examples():
    assert gsr_conductance(500.0, 1e6) == pytest.approx(2000.0)
    assert gsr_conductance(123.0, 123.0) == pytest.approx(1.0)
    assert gsr_conductance(200.0) == pytest.approx(gsr_conductance(100.0) / 2.0)


def test_conductance_strictly_decreasing(rng):
    r = np.sort(rng.uniform(1.0, 5000.0, 100))
    c = gsr_conductance(r)
    assert np.all(np.diff(c) < 0)


def test_conductance_rejects_nonpositive():
    with pytest.raises(NonPositiveResistance):
        gsr_conductance(0.0)
    with pytest.raises(NonPositiveResistance):
        gsr_conductance(-3.0)


def test_impute_column_mean():
    m = np.array([[1.0, np.nan], [np.nan, 4.0], [3.0, 6.0]])
    out = impute_column_mean(m)
    np.testing.assert_allclose(out, [[1.0, 5.0], [2.0, 4.0], [3.0, 6.0]])
    # observed cells untouched, original not mutated
    assert np.isnan(m[0, 1])


def test_impute_identity_when_complete(rng):
    m = rng.normal(size=(10, 4))
    np.testing.assert_array_equal(impute_column_mean(m), m)


def test_impute_preserves_observed_means(rng):
    m = rng.normal(size=(50, 6))
    mask = rng.random(m.shape) < 0.3
    m[mask] = np.nan
    out = impute_column_mean(m)
    for j in range(m.shape[1]):
        observed = m[~np.isnan(m[:, j]), j]
        assert out[:, j].mean() == pytest.approx(observed.mean())


def test_impute_all_missing_column():
    m = np.array([[np.nan, 1.0], [np.nan, 2.0]])
    with pytest.raises(AllMissingColumn):
        impute_column_mean(m)


def test_column_of_single_value():
    m = np.array([[1.0], [np.nan], [3.0]])
    np.testing.assert_allclose(impute_column_mean(m), [[1.0], [2.0], [3.0]])
