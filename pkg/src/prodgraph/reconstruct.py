"""Sampling a product-graph signal and recovering it by structured least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SingularSystemError, UndefinedMetricError
from .product import ProductModel, synthesize
from .sampler import SamplingDesign

PINV_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SampledObservation:
    """Observed block ``Y = X[set2][:, set1]`` and the design that produced it."""

    Y: np.ndarray
    design: SamplingDesign

    def __post_init__(self):
        if self.Y.shape != (len(self.design.set2), len(self.design.set1)):
            raise InvalidInputError(
                f"observation shape {self.Y.shape} does not match design sizes "
                f"({len(self.design.set2)}, {len(self.design.set1)})"
            )


def sample(X, design: SamplingDesign) -> SampledObservation:
    X = np.asarray(X, dtype=float)
    if X.shape != (design.n2, design.n1):
        raise InvalidInputError(
            f"signal shape {X.shape} does not match (N2, N1) = ({design.n2}, {design.n1})"
        )
    Y = X[np.ix_(list(design.set2), list(design.set1))]
    return SampledObservation(Y, design)


def left_pinv(A: np.ndarray, factor=None, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose left inverse via SVD; raises if ``A`` lacks full column rank."""
    k = A.shape[1]
    if A.shape[0] < k:
        raise SingularSystemError(
            f"factor {factor}: {A.shape[0]} sampled vertices for {k} frequencies", factor
        )
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    if rank < k:
        raise SingularSystemError(
            f"factor {factor}: sampled basis has rank {rank} < {k}", factor
        )
    return (Vt.T / s) @ U.T


def estimate_coefficients(obs: SampledObservation, model: ProductModel,
                          rtol: float = PINV_RTOL) -> np.ndarray:
    """Least-squares coefficients ``(Phi2 U2)^+ Y ((Phi1 U1)^+)^T``, one factor at a time."""
    d = obs.design
    P1 = left_pinv(model.basis1.matrix[list(d.set1)], factor=1, rtol=rtol)
    P2 = left_pinv(model.basis2.matrix[list(d.set2)], factor=2, rtol=rtol)
    return P2 @ obs.Y @ P1.T


def reconstruct_signal(coeffs, model: ProductModel) -> np.ndarray:
    return synthesize(model, coeffs)


def fisher_information(model: ProductModel, design: SamplingDesign) -> tuple[np.ndarray, np.ndarray]:
    """Per-factor Fisher matrices ``T_i = (Phi_i U_i)^T (Phi_i U_i)``; the full one is ``T1 kron T2``."""
    A1 = model.basis1.matrix[list(design.set1)]
    A2 = model.basis2.matrix[list(design.set2)]
    return A1.T @ A1, A2.T @ A2


def relative_error(X_hat, X) -> float:
    """Frobenius-relative error; lists of channels are compared as one concatenation."""
    if isinstance(X, (list, tuple)):
        if not isinstance(X_hat, (list, tuple)) or len(X_hat) != len(X):
            raise InvalidInputError("channel counts differ")
        X_hat = np.concatenate([np.ravel(a) for a in X_hat])
        X = np.concatenate([np.ravel(a) for a in X])
    X_hat = np.asarray(X_hat, dtype=float)
    X = np.asarray(X, dtype=float)
    if X_hat.shape != X.shape:
        raise InvalidInputError(f"shapes differ: {X_hat.shape} vs {X.shape}")
    ref = np.linalg.norm(X)
    if ref == 0:
        raise UndefinedMetricError("relative error is undefined for a zero reference signal")
    return float(np.linalg.norm(X_hat - X) / ref)


def masked_rmse(X_hat, ratings) -> float:
    """RMSE of ``X_hat[i, j]`` against ``value`` over ``(i, j, value)`` triples."""
    X_hat = np.asarray(X_hat, dtype=float)
    if len(ratings) == 0:
        raise UndefinedMetricError("masked RMSE needs a non-empty mask")
    arr = np.asarray(ratings, dtype=float)
    i = arr[:, 0].astype(int)
    j = arr[:, 1].astype(int)
    if i.min() < 0 or j.min() < 0 or i.max() >= X_hat.shape[0] or j.max() >= X_hat.shape[1]:
        raise InvalidInputError("mask index out of range")
    r = X_hat[i, j] - arr[:, 2]
    return float(np.sqrt(np.mean(r * r)))
