import math
from fractions import Fraction

import numpy as np
import pytest

from wmm import oracle
from wmm.core import new_1d, new_2d
from wmm.hadamard import (
    HadamardInverse,
    Magnitude,
    col_norm_max,
    hadamard_split,
    hinv_2d_norms,
    hinv_norm1_exact,
    hinv_norm2_bound,
    row_norm_max,
    table1,
)

PUBLISHED = [(1, 1, 3, -2), (2, 5, 3, 2), (3, 21, 3, 18), (4, 85, 3, 82), (5, 341, 3, 338), (10, 349525, 3, 349522)]


def test_table_reproduces_published_rows():
    rows = [(r.n, r.y1, r.y2, r.diff) for r in table1(0.5)]
    assert rows == PUBLISHED
    assert all(isinstance(r.y1, int) for r in table1(0.5))


@pytest.mark.parametrize("row", PUBLISHED)
def test_single_row(row):
    (r,) = table1(0.5, [row[0]])
    assert (r.n, r.y1, r.y2, r.diff) == row
    assert r.diff == r.y1 - r.y2


def test_table_grows_with_order():
    y1 = [r.y1 for r in table1(0.5, range(1, 15))]
    assert all(b > a for a, b in zip(y1, y1[1:]))


def test_table_off_integer_lambda():
    (r,) = table1(0.3, [4])
    assert r.y2 == pytest.approx(1.3 / 0.7)
    assert r.diff == pytest.approx(r.y1 - r.y2)


@pytest.mark.parametrize("n, lam", [(1, 0.5), (2, 0.5), (5, 0.3), (32, 0.05), (32, 0.95)])
def test_split_is_exact(n, lam):
    q = new_1d(n, lam)
    A, At = hadamard_split(q)
    assert np.array_equal(At, A.T)
    assert np.array_equal(A * At, q.todense())


def test_split_small_example():
    A, _ = hadamard_split(new_1d(2, 0.5))
    assert A.tolist() == [[1.0, 1.0], [0.5, 1.0]]


@pytest.mark.parametrize("n", [1, 2, 5, 16])
@pytest.mark.parametrize("lam", [0.2, 0.9])
def test_split_row_column_norms_give_order(n, lam):
    A, At = hadamard_split(new_1d(n, lam))
    assert row_norm_max(A) * col_norm_max(At) == pytest.approx(n, rel=1e-14)


@pytest.mark.parametrize("n", [1, 4, 32])
@pytest.mark.parametrize("lam", [0.1, 0.5, 0.95])
def test_entrywise_inverse(n, lam):
    h = HadamardInverse(n, lam)
    H = h.todense()
    assert np.max(np.abs(new_1d(n, lam).todense() * H - 1.0)) <= 1e-12
    assert H[0, -1] == pytest.approx(lam ** -(n - 1), rel=1e-13)


@pytest.mark.parametrize("n, lam, expected", [(1, 0.5, 1.0), (3, 0.5, 7.0)])
def test_norm1_examples(n, lam, expected):
    assert float(hinv_norm1_exact(HadamardInverse(n, lam))) == expected


@pytest.mark.parametrize("n, lam, expected", [(1, 0.5, 1.0), (3, 0.5, 21.0), (10, 0.5, 349525.0)])
def test_norm2_bound_examples(n, lam, expected):
    assert float(hinv_norm2_bound(HadamardInverse(n, lam))) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 7, 20, 32])
@pytest.mark.parametrize("lam", [0.05, 0.3, 0.8])
def test_closed_forms_match_dense(n, lam):
    h = HadamardInverse(n, lam)
    H = h.todense()
    assert float(hinv_norm1_exact(h)) == pytest.approx(oracle.dense_norm(H, 1), rel=1e-9)
    assert oracle.spectral_norm(H) <= float(hinv_norm2_bound(h)) * (1 + 1e-9)


def test_rational_spot_check():
    lam = Fraction(1, 20)
    exact = (1 - lam**8) / (1 - lam) / lam**7
    assert float(hinv_norm1_exact(HadamardInverse(8, 0.05))) == pytest.approx(float(exact), rel=1e-14)
    assert float(exact) == 1347368421.0


def test_log_representation():
    h = HadamardInverse(64, 0.05)
    expected = 63 * math.log(20) + math.log((1 - 0.05**64) / 0.95)
    # exponent 63 ln 20 ~ 189 stays below the switch-over, so force log form
    assert not h.log_scale
    plain = hinv_norm1_exact(h)
    logged = hinv_norm1_exact(h, log=True)
    assert not plain.is_log and logged.is_log
    assert logged.value == pytest.approx(expected, rel=1e-14)
    assert logged.value == pytest.approx(188.782426528289, rel=1e-14)
    assert plain.log == pytest.approx(logged.value, rel=1e-13)


def test_log_policy_engages_past_switch_over():
    h = HadamardInverse(400, 0.05)
    assert h.log_scale
    v = hinv_norm1_exact(h)
    assert v.is_log and math.isfinite(v.value)
    assert v.value == pytest.approx(399 * math.log(20) - math.log(0.95), rel=1e-14)
    b = hinv_norm2_bound(h)
    assert b.is_log and b.value == pytest.approx(2 * 399 * math.log(20) - math.log(1 - 0.0025), rel=1e-14)
    with pytest.raises(OverflowError):
        hinv_norm1_exact(h, log=False)


def test_magnitude_conversions():
    m = Magnitude(math.log(5.0), True)
    assert float(m) == pytest.approx(5.0)
    assert Magnitude(5.0).log == pytest.approx(math.log(5.0))


def test_2d_trivial():
    r = hinv_2d_norms(new_2d(1, 0.3, 1, 0.6))
    assert float(r.norm1) == 1.0 and float(r.norm2_bound) == 1.0


def test_2d_with_trivial_second_factor():
    r = hinv_2d_norms(new_2d(3, 0.5, 1, 0.8))
    assert float(r.norm1) == float(hinv_norm1_exact(HadamardInverse(3, 0.5)))
    assert float(r.norm2_bound) == float(hinv_norm2_bound(HadamardInverse(3, 0.5)))


def test_2d_matches_dense_kronecker():
    q = new_2d(3, 0.5, 2, 0.5)
    H = np.kron(HadamardInverse(2, 0.5).todense(), HadamardInverse(3, 0.5).todense())
    assert np.allclose(H * q.todense(), 1.0, atol=1e-14)
    r = hinv_2d_norms(q)
    assert float(r.norm1) == 21.0 == oracle.dense_norm(H, 1)
    assert oracle.spectral_norm(H) <= float(r.norm2_bound)


def test_2d_log_policy():
    r = hinv_2d_norms(new_2d(300, 0.05, 300, 0.05))
    assert r.norm1.is_log and r.norm2_bound.is_log
    assert r.norm1.value == pytest.approx(2 * hinv_norm1_exact(HadamardInverse(300, 0.05), log=True).value)
