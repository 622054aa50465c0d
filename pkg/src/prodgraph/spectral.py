"""Graph Fourier bases: eigendecomposition, frequency supports and reduced bases."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .graph_core import SYMMETRY_TOL, ShiftKind, ShiftOperator

# entries within this distance of the largest magnitude count as tied for the sign rule
SIGN_TIE_TOL = 1e-12


class Ordering(str, enum.Enum):
    LAPLACIAN_ASCENDING = "laplacian_ascending"
    ADJACENCY_DESCENDING = "adjacency_descending"


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    ordering: Ordering

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def shift_kind(self) -> ShiftKind:
        if self.ordering is Ordering.LAPLACIAN_ASCENDING:
            return ShiftKind.LAPLACIAN
        return ShiftKind.ADJACENCY


@dataclass(frozen=True)
class FrequencySupport:
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise InvalidParameterError("frequency support must be non-empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidParameterError("support indices must be strictly increasing")
        if idx[0] < 0:
            raise InvalidParameterError("support indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    """Retained eigenvector columns of one factor, with the cached row Gram ``U U^T``."""

    matrix: np.ndarray
    support: FrequencySupport
    row_gram: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_matrix(cls, U, support=None) -> "ReducedBasis":
        """Wrap an arbitrary n x K matrix (columns assumed orthonormal)."""
        U = np.array(U, dtype=float)
        if U.ndim != 2:
            raise InvalidInputError("reduced basis must be a 2-D matrix")
        if support is None:
            support = FrequencySupport(tuple(range(U.shape[1])))
        G = U @ U.T
        U.setflags(write=False)
        G.setflags(write=False)
        return cls(U, support, G)


def _normalize_signs(U: np.ndarray) -> np.ndarray:
    mags = np.abs(U)
    peak = mags.max(axis=0)
    # first row index reaching the column maximum (up to round-off)
    lead = np.argmax(mags >= peak - SIGN_TIE_TOL, axis=0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def eigendecompose(s: ShiftOperator) -> SpectralBasis:
    """Full symmetric eigendecomposition in frequency order.

    Laplacians are ordered by ascending eigenvalue, adjacency matrices by
    descending eigenvalue. Each eigenvector is flipped so its largest-magnitude
    entry (lowest index on ties) is positive.
    """
    S = np.asarray(s.values, dtype=float)
    if not np.allclose(S, S.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise InvalidInputError("eigendecompose needs a symmetric matrix")
    lam, U = np.linalg.eigh(S)
    if s.kind is ShiftKind.LAPLACIAN:
        order = np.argsort(lam, kind="stable")
        ordering = Ordering.LAPLACIAN_ASCENDING
    else:
        order = np.argsort(-lam, kind="stable")
        ordering = Ordering.ADJACENCY_DESCENDING
    lam = lam[order]
    U = _normalize_signs(U[:, order])
    lam.setflags(write=False)
    U.setflags(write=False)
    return SpectralBasis(U, lam, ordering)


def select_support_first_k(basis: SpectralBasis, k: int) -> FrequencySupport:
    if not 1 <= k <= basis.n:
        raise InvalidParameterError(f"k must lie in [1, {basis.n}], got {k}")
    return FrequencySupport(tuple(range(k)))


def spectral_energy(basis1: SpectralBasis, basis2: SpectralBasis, X) -> np.ndarray:
    """Squared magnitudes of ``U2^T X U1`` (rows: factor-2 frequencies)."""
    X = np.asarray(X, dtype=float)
    if X.shape != (basis2.n, basis1.n):
        raise InvalidInputError(
            f"signal shape {X.shape} does not match (N2, N1) = ({basis2.n}, {basis1.n})"
        )
    Xf = basis2.eigenvectors.T @ X @ basis1.eigenvectors
    return Xf**2


def select_support_by_energy(basis1: SpectralBasis, basis2: SpectralBasis, X, fraction: float):
    """Smallest frequency prefixes ``(k1, k2)`` holding ``fraction`` of the spectral energy.

    Prefix pairs are scanned by increasing ``k1 + k2``, then increasing ``k1``.
    ``X`` may also be a stack of shape (C, N2, N1); channel energies are pooled.
    Returns ``(support1, support2)``.
    """
    if not 0 < fraction <= 1:
        raise InvalidParameterError(f"fraction must lie in (0, 1], got {fraction}")
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    E = sum(spectral_energy(basis1, basis2, Xc) for Xc in X)
    total = E.sum()
    cum = E.cumsum(axis=0).cumsum(axis=1)  # cum[a, b]: rows <= a, cols <= b
    ok = cum >= fraction * total - 1e-12 * total
    rows, cols = np.nonzero(ok)
    k2 = rows + 1
    k1 = cols + 1
    best = np.lexsort((k1, k1 + k2))[0]
    return (FrequencySupport(tuple(range(k1[best]))), FrequencySupport(tuple(range(k2[best]))))


def reduce(basis: SpectralBasis, support: FrequencySupport) -> ReducedBasis:
    if support.indices[-1] >= basis.n:
        raise InvalidParameterError(
            f"support index {support.indices[-1]} out of range for n={basis.n}"
        )
    U = basis.eigenvectors[:, list(support.indices)]
    return ReducedBasis.from_matrix(U, support)
