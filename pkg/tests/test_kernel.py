import csv

import numpy as np
import pytest

from fraclob.kernel import build_kernel, memory_window_for_trades, sibuya_weights
from fraclob.lattice import DomainError


def _brute(alpha, j):
    prod = 1.0
    for k in range(1, j + 1):
        prod *= 1.0 - (2.0 - alpha) / k
    return prod + (1.0 if j == 1 else 0.0)


def test_alpha_one_is_delta():
    k = build_kernel(1.0)
    assert list(k.weights) == [1.0]
    assert np.all(sibuya_weights(1.0, 50)[1:] == 0.0)


def test_alpha_08_first_weights():
    w = sibuya_weights(0.8, 3)
    assert w == pytest.approx([0.8, -0.08, -0.048], abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.8, 0.95, 1.0])
def test_first_weight_is_alpha(alpha):
    assert build_kernel(alpha).weights[0] == pytest.approx(alpha, abs=1e-15)


def test_cutoff_against_brute_force():
    k = build_kernel(0.6, eps=0.01)
    vals = [abs(_brute(0.6, j)) for j in range(1, 10_001)]
    first = next(j for j, v in enumerate(vals, start=1) if v < 0.01)
    assert k.cutoff == first
    assert abs(_brute(0.6, k.cutoff)) < 0.01
    assert abs(_brute(0.6, k.cutoff - 1)) >= 0.01
    assert k.window == k.cutoff - 1


def test_recursion_matches_product():
    for alpha in (0.6, 0.8):
        w = sibuya_weights(alpha, 10_000)
        for j in (1, 2, 3, 10, 100, 1000, 10_000):
            assert w[j - 1] == pytest.approx(_brute(alpha, j), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 0.7, 0.9])
def test_tail_sign_and_monotone(alpha):
    w = sibuya_weights(alpha, 500)[1:]
    assert np.all(w < 0)
    assert np.all(np.diff(np.abs(w)) <= 0)


def test_m0_extends_window():
    k = build_kernel(0.8, m0=300)
    assert k.window == 300
    assert k.min_memory == 300
    short = build_kernel(0.8, m0=2)
    assert short.window == short.cutoff - 1


def test_bad_alpha():
    for a in (0.0, -0.2, 1.01):
        with pytest.raises(DomainError):
            build_kernel(a)
    with pytest.raises(DomainError):
        build_kernel(0.8, eps=0.0)


def test_memory_window_examples():
    assert memory_window_for_trades(0.6, 0.01, 13, 8) >= 104
    assert memory_window_for_trades(1.0, 0.01, 13, 8) == 1
    assert memory_window_for_trades(1.0, 0.01, 99, 3) == 1
    assert memory_window_for_trades(0.8, 0.01, 15, 8) >= 120
    with pytest.raises(DomainError):
        memory_window_for_trades(0.8, 0.01, 0, 8)


def test_weights_read_only():
    k = build_kernel(0.8)
    with pytest.raises(ValueError):
        k.weights[0] = 0.0


def test_kernel_csv(tmp_path):
    k = build_kernel(0.8)
    k.to_csv(tmp_path / "k.csv")
    rows = list(csv.reader(open(tmp_path / "k.csv")))
    assert rows[0] == ["j", "K_j"]
    assert len(rows) == k.window + 1
    assert float(rows[1][1]) == pytest.approx(0.8)
