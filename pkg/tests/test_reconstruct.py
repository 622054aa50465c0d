import numpy as np
import pytest

from prodgraph import (SamplingDesign, SingularSystemError, estimate_coefficients,
                       fisher_information, greedy_design, masked_rmse, random_design,
                       reconstruct_signal, relative_error, sample, synthesize, vectorize)
from prodgraph.errors import InvalidInputError, UndefinedMetricError
from prodgraph.reconstruct import left_pinv
from tests.conftest import random_model


def _sel(n, s):
    P = np.zeros((len(s), n))
    P[np.arange(len(s)), list(s)] = 1.0
    return P


def test_sample_block():
    X = np.arange(12.0).reshape(3, 4)  # N2 = 3, N1 = 4
    d = SamplingDesign((1, 3), (0, 2), 4, 3, 1, 1, 4)
    np.testing.assert_array_equal(sample(X, d).Y, [[1.0, 3.0], [9.0, 11.0]])
    with pytest.raises(InvalidInputError):
        sample(X.T, d)


def test_sample_matches_kronecker_selection(rng):
    X = rng.standard_normal((5, 6))
    d = SamplingDesign((0, 2, 5), (1, 4), 6, 5, 1, 1, 5)
    Phi = np.kron(_sel(6, d.set1), _sel(5, d.set2))
    np.testing.assert_allclose(vectorize(sample(X, d).Y), Phi @ vectorize(X))


def test_exact_recovery(rng):
    m = random_model(rng, 9, 7, 3, 2)
    C = rng.standard_normal((2, 3))
    X = synthesize(m, C)
    d = greedy_design(m, 9)
    Ch = estimate_coefficients(sample(X, d), m)
    np.testing.assert_allclose(Ch, C, atol=1e-10)
    assert relative_error(reconstruct_signal(Ch, m), X) < 1e-10


def test_matches_full_kronecker_pinv(rng):
    m = random_model(rng, 6, 5, 2, 3)
    d = SamplingDesign((0, 1, 4), (0, 2, 3, 4), 6, 5, 2, 3, 7)
    X = rng.standard_normal((5, 6))
    A = np.kron(_sel(6, d.set1) @ m.basis1.matrix, _sel(5, d.set2) @ m.basis2.matrix)
    c_full = np.linalg.pinv(A) @ (np.kron(_sel(6, d.set1), _sel(5, d.set2)) @ vectorize(X))
    np.testing.assert_allclose(vectorize(estimate_coefficients(sample(X, d), m)), c_full, atol=1e-10)


def test_singular_system_names_factor(rng):
    m = random_model(rng, 6, 5, 2, 3)
    d = SamplingDesign((0, 1, 4), (1, 2), 6, 5, 2, 3, 5, strict=False)
    with pytest.raises(SingularSystemError) as e:
        estimate_coefficients(sample(rng.standard_normal((5, 6)), d), m)
    assert e.value.factor == 2
    with pytest.raises(SingularSystemError):
        left_pinv(np.ones((3, 2)), factor=1)


def test_fisher_factorization(rng):
    m = random_model(rng, 6, 5, 2, 3)
    d = SamplingDesign((0, 3, 5), (0, 1, 4), 6, 5, 2, 3, 6)
    T1, T2 = fisher_information(m, d)
    A = np.kron(_sel(6, d.set1) @ m.basis1.matrix, _sel(5, d.set2) @ m.basis2.matrix)
    assert np.linalg.norm(A.T @ A - np.kron(T1, T2)) <= 1e-10


def test_pinv_of_kronecker(rng):
    A, B = rng.standard_normal((4, 2)), rng.standard_normal((3, 3))
    np.testing.assert_allclose(np.linalg.pinv(np.kron(A, B)),
                               np.kron(np.linalg.pinv(A), np.linalg.pinv(B)), atol=1e-8)


def test_relative_error_examples():
    X = np.array([[3.0, 4.0]])
    assert relative_error(X, X) == 0.0
    assert relative_error(np.zeros_like(X), X) == 1.0
    assert relative_error([X, X], [X, 2 * X]) == pytest.approx(5 / np.sqrt(125))
    with pytest.raises(UndefinedMetricError):
        relative_error(X, np.zeros_like(X))


def test_masked_rmse_examples():
    X = np.zeros((2, 2))
    assert masked_rmse(X, [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 1.0)]) == pytest.approx(1.0)
    assert masked_rmse(X + 1, [(0, 0, 1.0)]) == 0.0
    assert masked_rmse(X, [(0, 0, 3.0), (1, 0, 0.0), (1, 1, 0.0)]) == pytest.approx(np.sqrt(3))
    with pytest.raises(UndefinedMetricError):
        masked_rmse(X, [])
    with pytest.raises(InvalidInputError):
        masked_rmse(X, [(2, 0, 1.0)])


def test_noise_mse_matches_fisher_trace():
    rng = np.random.default_rng(7)
    m = random_model(rng, 8, 7, 2, 2)
    d = greedy_design(m, 8)
    T1, T2 = fisher_information(m, d)
    sigma = 0.1
    expected = sigma**2 * np.trace(np.linalg.inv(np.kron(T1, T2)))
    C = rng.standard_normal((2, 2))
    X = synthesize(m, C)
    errs = []
    for _ in range(1000):
        obs = sample(X + sigma * rng.standard_normal(X.shape), d)
        errs.append(np.sum((estimate_coefficients(obs, m) - C) ** 2))
    assert np.mean(errs) == pytest.approx(expected, rel=0.15)


def _empirical_mse(m, d, C, rng, sigma=0.1, trials=200):
    X = synthesize(m, C)
    errs = [np.sum((estimate_coefficients(sample(X + sigma * rng.standard_normal(X.shape), d), m) - C) ** 2)
            for _ in range(trials)]
    return float(np.mean(errs))


@pytest.mark.xfail(strict=True, reason="frame-potential designs squeeze one factor to K_i rows; "
                   "random designs with balanced splits win on MSE")
def test_greedy_beats_best_random_design():
    from prodgraph import check_identifiability, eigendecompose, laplacian, reduce, select_support_first_k
    from prodgraph.product import ProductModel
    from prodgraph.synth import random_geometric_graph

    rng = np.random.default_rng(0)
    bases = []
    for _ in range(2):
        b = eigendecompose(laplacian(random_geometric_graph(30, 4, rng)))
        bases.append(reduce(b, select_support_first_k(b, 4)))
    m = ProductModel(*bases)
    C = rng.standard_normal((4, 4))
    g = greedy_design(m, 40)
    assert check_identifiability(m, g)
    randoms = [d for d in (random_design(30, 30, 4, 4, 40, seed=s) for s in range(300))
               if check_identifiability(m, d)][:100]
    best = min(_empirical_mse(m, d, C, rng) for d in randoms)
    assert _empirical_mse(m, g, C, rng) < best


def test_exact_frame_potential_optimum_vs_random_designs():
    # the same gap shows up for the exact optimum, so it is a property of the objective
    from prodgraph import brute_force_design, check_identifiability

    losses = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        m = random_model(rng, 5, 5, 2, 2)
        b = brute_force_design(m, 7)
        T1, T2 = fisher_information(m, b)
        opt = np.trace(np.linalg.inv(T1)) * np.trace(np.linalg.inv(T2))
        best = np.inf
        for s in range(100):
            d = random_design(5, 5, 2, 2, 7, seed=s)
            if check_identifiability(m, d):
                R1, R2 = fisher_information(m, d)
                best = min(best, np.trace(np.linalg.inv(R1)) * np.trace(np.linalg.inv(R2)))
        losses += opt > best
    assert losses == 10
