import numpy as np
import pytest


def unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def unit_rows(rng, n):
    M = rng.standard_normal((n, n))
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def triple_loop_matmul(A, B):
    """Naive product, kept free of numpy's matmul on purpose."""
    n, m, p = len(A), len(B), len(B[0])
    out = [[0.0] * p for _ in range(n)]
    for i in range(n):
        for j in range(p):
            s = 0.0
            for k in range(m):
                s += float(A[i][k]) * float(B[k][j])
            out[i][j] = s
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


def pytest_terminal_summary(terminalreporter):
    results = getattr(__import__("sys").modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for label in sorted(results, key=lambda k: int(k[1:])):
            terminalreporter.write_line(results[label])
