import math

import numpy as np
import pytest

from errors import CapacityError
from sampling.stirling import StirlingTable, crt_pmf, log_pmf, nb_pmf, poisson_log_joint_pmf


def test_stirling_small_rows():
    table = StirlingTable(5)
    assert table.exact(0, 0) == 1
    assert [table.exact(3, l) for l in range(4)] == [0, 2, 3, 1]
    assert [table.exact(4, l) for l in range(5)] == [0, 6, 11, 6, 1]
    assert table.log(3, 0) == -math.inf


def test_stirling_rows_sum_to_factorial():
    table = StirlingTable(12)
    for n in range(13):
        assert sum(table.exact(n, l) for l in range(n + 1)) == math.factorial(n)


def test_stirling_capacity():
    with pytest.raises(CapacityError):
        StirlingTable(4).exact(5, 1)


def test_crt_pmf_hand_values():
    assert np.allclose(crt_pmf(3, 1.0), [0.0, 1 / 3, 1 / 2, 1 / 6])
    assert np.allclose(crt_pmf(2, 2.0), [0.0, 1 / 3, 2 / 3])
    assert np.allclose(crt_pmf(0, 0.7), [1.0])


def test_crt_pmf_sums_to_one():
    for n, r in ((10, 0.3), (25, 4.0), (40, 1.0)):
        assert math.isclose(crt_pmf(n, r).sum(), 1.0, rel_tol=1e-9)


def test_log_pmf_values():
    assert math.isclose(log_pmf(1, 0.5), 0.5 / math.log(2), rel_tol=1e-12)
    assert abs(log_pmf(1, 0.5) - 0.7213) < 1e-4
    assert abs(log_pmf(2, 0.5) - 0.1803) < 1e-4
    assert log_pmf(0, 0.5) == 0.0


def test_poisson_log_joint_marginalizes_to_nb():
    r, p = 1.7, 0.4
    for n in range(8):
        total = sum(poisson_log_joint_pmf(n, l, r, p) for l in range(n + 1))
        assert math.isclose(total, nb_pmf(n, r, p), rel_tol=1e-9)


def test_poisson_log_joint_conditional_is_crt():
    r, p, n = 2.3, 0.35, 9
    joint = np.array([poisson_log_joint_pmf(n, l, r, p) for l in range(n + 1)])
    assert np.allclose(joint / joint.sum(), crt_pmf(n, r))


def test_poisson_log_joint_at_origin():
    assert poisson_log_joint_pmf(0, 0, 1.0, 0.5) == pytest.approx(0.5)
