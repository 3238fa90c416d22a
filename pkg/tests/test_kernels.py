"""The compiled and NumPy split kernels must agree exactly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from promptgauge._kernels import (
    HAVE_COMPILED,
    best_split_sorted_compiled,
    best_split_sorted_py,
)

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    values = np.sort(rng.choice(rng.standard_normal(max(2, n // 2)), size=n))
    p = rng.uniform(0.05, 0.95, size=n)
    y = rng.integers(0, 2, size=n).astype(float)
    grad = p - y
    hess = p * (1 - p)
    return values, np.ascontiguousarray(grad), np.ascontiguousarray(hess)


@needs_compiled
@given(st.integers(min_value=0, max_value=1_000_000))
@settings(max_examples=300, deadline=None)
def test_kernels_bitwise_identical(seed):
    values, grad, hess = random_case(seed)
    lam = 1.0
    gamma = 0.0
    a = best_split_sorted_compiled(values, grad, hess, lam, gamma)
    b = best_split_sorted_py(values, grad, hess, lam, gamma)
    if a is None or b is None:
        assert a is None and b is None
    else:
        assert a[0] == b[0]  # gain, exact float equality
        assert a[1] == b[1]  # threshold
        assert a[2] == b[2]  # split position


@needs_compiled
def test_kernels_agree_with_gamma_penalty():
    values = np.array([0.0, 0.0, 1.0, 2.0])
    grad = np.array([0.5, 0.5, -0.5, -0.5])
    hess = np.full(4, 0.25)
    for gamma in (0.0, 0.1, 10.0):
        a = best_split_sorted_compiled(values, grad, hess, 1.0, gamma)
        b = best_split_sorted_py(values, grad, hess, 1.0, gamma)
        assert a == b


def test_python_kernel_constant_feature_returns_none():
    values = np.zeros(5)
    grad = np.array([0.5, -0.5, 0.5, -0.5, 0.5])
    hess = np.full(5, 0.25)
    assert best_split_sorted_py(values, grad, hess, 1.0, 0.0) is None


def test_python_kernel_skips_nonboundary_positions():
    # split may not land between equal values
    values = np.array([1.0, 1.0, 1.0, 5.0])
    grad = np.array([0.5, 0.5, -0.5, -0.5])
    hess = np.full(4, 0.25)
    result = best_split_sorted_py(values, grad, hess, 1.0, 0.0)
    assert result is not None
    assert result[1] == 3.0  # midpoint of 1 and 5
    assert result[2] == 3


def test_pure_python_env_override(tmp_path):
    import subprocess
    import sys

    code = "from promptgauge._kernels import active_kernel; print(active_kernel())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "PROMPTGAUGE_PURE_PYTHON": "1"},
    )
    assert out.stdout.strip() == "python"
