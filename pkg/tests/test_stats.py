import math

import pytest
from scipy import stats as sstats
from scipy.special import betainc as sp_betainc

from qkad.errors import DegenerateVarianceError
from qkad.stats import betainc, paired_t_test, t_two_sided_p


def test_reference_example():
    res = paired_t_test([1, 2, 3], [0, 0, 0])
    assert res.t == pytest.approx(2 * math.sqrt(3))
    assert res.df == 2
    assert res.p == pytest.approx(0.0742, abs=1e-3)
    assert res.p == pytest.approx(2 * sstats.t.sf(2 * math.sqrt(3), 2), abs=1e-4)


def test_identical_samples():
    res = paired_t_test([0.3, 0.5, 0.9], [0.3, 0.5, 0.9])
    assert res.p == 1.0 and res.t == 0.0


def test_constant_nonzero_difference_raises():
    with pytest.raises(DegenerateVarianceError):
        paired_t_test([1, 2, 3], [0, 1, 2])


def test_matches_scipy_ttest_rel(rng):
    for _ in range(50):
        n = int(rng.integers(2, 15))
        a, b = rng.normal(size=(2, n))
        ours = paired_t_test(a, b)
        ref = sstats.ttest_rel(a, b)
        assert ours.t == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p == pytest.approx(ref.pvalue, abs=1e-4)


@pytest.mark.parametrize("df", [1, 2, 5, 8, 30, 200])
def test_t_tail_against_cdf_oracle(df):
    for t in (0.0, 0.1, 1.0, 2.306, 3.5, 10.0, 50.0):
        assert t_two_sided_p(t, df) == pytest.approx(2 * sstats.t.sf(t, df), abs=1e-8)


def test_t_tail_published_quantiles():
    # Two-sided 5% critical values
    assert t_two_sided_p(2.306004, 8) == pytest.approx(0.05, abs=1e-6)
    assert t_two_sided_p(12.7062, 1) == pytest.approx(0.05, abs=1e-5)


def test_betainc_against_reference(rng):
    for _ in range(200):
        a, b = rng.uniform(0.1, 20, 2)
        x = rng.uniform()
        assert betainc(a, b, x) == pytest.approx(sp_betainc(a, b, x), abs=1e-8)
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0


def test_validation():
    with pytest.raises(ValueError):
        paired_t_test([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [2.0])
    with pytest.raises(ValueError):
        betainc(-1, 1, 0.5)
