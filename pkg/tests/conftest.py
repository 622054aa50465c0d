import numpy as np
import pytest

from prodgraph import ProductModel, ReducedBasis


def random_orthonormal(rng, n, k):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q[:, :k]


def random_model(rng, n1, n2, k1, k2):
    return ProductModel(ReducedBasis.from_matrix(random_orthonormal(rng, n1, k1)),
                        ReducedBasis.from_matrix(random_orthonormal(rng, n2, k2)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", ()) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
