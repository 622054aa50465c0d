"""Product graphs and the Kronecker-factored spectral model.

A product-graph signal is stored as an ``N2 x N1`` matrix ``X``; its stacked
vector form is column-major, so ``x[i + j*N2] == X[i, j]`` (0-based). The
product vertex ``(v1, v2)`` therefore sits at index ``v1*N2 + v2``, matching
the column order of ``U1 kron U2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .graph_core import Graph, ShiftKind, ShiftOperator, adjacency
from .spectral import ReducedBasis


class ProductKind(str, enum.Enum):
    CARTESIAN = "cartesian"
    KRONECKER = "kronecker"
    STRONG = "strong"


@dataclass(frozen=True, eq=False)
class ProductModel:
    """Reduced bases of both factors; the model has ``K1*K2`` coefficients."""

    basis1: ReducedBasis
    basis2: ReducedBasis

    @property
    def n1(self) -> int:
        return self.basis1.n

    @property
    def n2(self) -> int:
        return self.basis2.n

    @property
    def k1(self) -> int:
        return self.basis1.k

    @property
    def k2(self) -> int:
        return self.basis2.k

    @property
    def dim(self) -> int:
        return self.k1 * self.k2


def product_adjacency(g1: Graph, g2: Graph, kind) -> ShiftOperator:
    """Adjacency of the product graph, in ``U1 kron U2`` vertex order.

    Only meant for small graphs; everything else in the package stays factored.
    """
    kind = ProductKind(kind)
    A1 = adjacency(g1).values
    A2 = adjacency(g2).values
    cart = np.kron(A1, np.eye(g2.n)) + np.kron(np.eye(g1.n), A2)
    if kind is ProductKind.CARTESIAN:
        A = cart
    elif kind is ProductKind.KRONECKER:
        A = np.kron(A1, A2)
    else:
        A = cart + np.kron(A1, A2)
    return ShiftOperator(A, ShiftKind.ADJACENCY)


def product_eigenvalues(lam1, lam2, kind, shift_kind=ShiftKind.ADJACENCY) -> np.ndarray:
    """Eigenvalues of the product shift operator in Kronecker order.

    The product and strong rules hold for adjacency spectra only. Laplacian
    spectra are accepted for the Cartesian product, where the sum rule is
    exact; any other combination raises.
    """
    kind = ProductKind(kind)
    shift_kind = ShiftKind(shift_kind)
    lam1 = np.asarray(lam1, dtype=float).ravel()
    lam2 = np.asarray(lam2, dtype=float).ravel()
    if shift_kind is ShiftKind.LAPLACIAN and kind is not ProductKind.CARTESIAN:
        raise InvalidParameterError(
            f"the {kind.value} product has no closed-form Laplacian spectrum"
        )
    s = np.add.outer(lam1, lam2)
    if kind is ProductKind.CARTESIAN:
        out = s
    elif kind is ProductKind.KRONECKER:
        out = np.multiply.outer(lam1, lam2)
    else:
        out = s + np.multiply.outer(lam1, lam2)
    return out.ravel()


def vectorize(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2:
        raise InvalidInputError(f"expected an N2 x N1 matrix, got shape {X.shape}")
    return X.ravel(order="F")


def matricize(x, n1: int, n2: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.size != n1 * n2:
        raise InvalidInputError(f"vector of length {x.size} cannot be reshaped to ({n2}, {n1})")
    return x.reshape((n2, n1), order="F")


def synthesize(model: ProductModel, coeffs) -> np.ndarray:
    """``X = U2 C U1^T`` for a ``K2 x K1`` coefficient matrix ``C``."""
    C = np.asarray(coeffs, dtype=float)
    if C.shape != (model.k2, model.k1):
        raise InvalidInputError(
            f"coefficient shape {C.shape} does not match (K2, K1) = ({model.k2}, {model.k1})"
        )
    return model.basis2.matrix @ C @ model.basis1.matrix.T


def analyze(model: ProductModel, X) -> np.ndarray:
    """Spectral coefficients ``U2^T X U1`` on the model's supports."""
    X = np.asarray(X, dtype=float)
    if X.shape != (model.n2, model.n1):
        raise InvalidInputError(
            f"signal shape {X.shape} does not match (N2, N1) = ({model.n2}, {model.n1})"
        )
    return model.basis2.matrix.T @ X @ model.basis1.matrix
