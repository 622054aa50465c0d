"""Sampling-set design on the factors of a product graph.

The design problem picks ``L`` factor vertices (at least ``K1`` from factor 1
and ``K2`` from factor 2) that keep the product frame potential small. It is
solved in the complemented form: choose removal sets ``S_i = V_i minus L_i``
maximizing ``G(S) = F1(V1) F2(V2) - Fbar1(S1) Fbar2(S2)``, which is normalized,
monotone and submodular. Its feasible removal sets form a truncated partition
matroid, so the greedy below is within a factor 1/2 of the optimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidParameterError, SearchSpaceError
from .product import ProductModel
from .spectral import ReducedBasis

# gains closer than TIE_RTOL * F(V) to the best one count as ties
TIE_RTOL = 1e-12
# smallest singular value must exceed this fraction of the largest
IDENTIFIABILITY_RTOL = 1e-8
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class SamplingDesign:
    """Selected vertices per factor (sorted, 0-based) and the budgets they satisfy.

    Pass ``strict=False`` to skip the budget checks (only useful for tests
    that need a deliberately broken design).
    """

    set1: tuple[int, ...]
    set2: tuple[int, ...]
    n1: int
    n2: int
    k1: int
    k2: int
    budget: int
    strict: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        s1 = tuple(sorted(int(v) for v in self.set1))
        s2 = tuple(sorted(int(v) for v in self.set2))
        object.__setattr__(self, "set1", s1)
        object.__setattr__(self, "set2", s2)
        for name, s, n in (("set1", s1, self.n1), ("set2", s2, self.n2)):
            if len(set(s)) != len(s):
                raise InvalidInputError(f"{name} contains duplicate vertices")
            if s and (s[0] < 0 or s[-1] >= n):
                raise InvalidInputError(f"{name} has vertices outside [0, {n})")
        if not self.strict:
            return
        if len(s1) < self.k1 or len(s2) < self.k2:
            raise InvalidParameterError(
                f"design keeps ({len(s1)}, {len(s2)}) vertices, needs at least ({self.k1}, {self.k2})"
            )
        if len(s1) + len(s2) != self.budget:
            raise InvalidParameterError(
                f"design keeps {len(s1) + len(s2)} vertices, budget is {self.budget}"
            )

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.set1), len(self.set2)

    @property
    def num_product_vertices(self) -> int:
        return len(self.set1) * len(self.set2)


def check_budgets(n1: int, n2: int, k1: int, k2: int, budget: int) -> None:
    if not (1 <= k1 <= n1 and 1 <= k2 <= n2):
        raise InvalidParameterError(f"need 1 <= K1 <= N1 and 1 <= K2 <= N2, got K=({k1}, {k2}), N=({n1}, {n2})")
    if not k1 + k2 <= budget <= n1 + n2:
        raise InvalidParameterError(
            f"budget L={budget} must satisfy K1 + K2 = {k1 + k2} <= L <= N1 + N2 = {n1 + n2}"
        )


def frame_potential(basis: ReducedBasis, selected) -> float:
    """``tr(T^T T)`` for ``T = (Phi U)^T (Phi U)``, via the row Gram matrix."""
    sel = np.asarray(list(selected), dtype=int)
    if sel.size == 0:
        return 0.0
    G = basis.row_gram[np.ix_(sel, sel)]
    return float(np.sum(G * G))


def product_frame_potential(model: ProductModel, design: SamplingDesign) -> float:
    return frame_potential(model.basis1, design.set1) * frame_potential(model.basis2, design.set2)


def surrogate_value(model: ProductModel, removal) -> float:
    """``G(S)`` for a removal pair ``(S1, S2)``."""
    s1, s2 = (set(int(v) for v in s) for s in removal)
    keep1 = [v for v in range(model.n1) if v not in s1]
    keep2 = [v for v in range(model.n2) if v not in s2]
    full = frame_potential(model.basis1, range(model.n1)) * frame_potential(model.basis2, range(model.n2))
    return full - frame_potential(model.basis1, keep1) * frame_potential(model.basis2, keep2)


class RemovalState:
    """Incremental bookkeeping for the greedy over removal sets.

    For every vertex ``x`` of factor ``i`` the state tracks
    ``acc_i[x] = sum over kept n of G_i[x, n]**2``. Removing a kept vertex ``x``
    lowers ``Fbar_i`` by ``2*acc_i[x] - G_i[x, x]**2``.
    """

    def __init__(self, model: ProductModel, budget: int):
        check_budgets(model.n1, model.n2, model.k1, model.k2, budget)
        self.model = model
        self.budget = budget
        self._sq = [model.basis1.row_gram**2, model.basis2.row_gram**2]
        self.kept = [np.ones(model.n1, dtype=bool), np.ones(model.n2, dtype=bool)]
        self.removed = [[], []]
        self.acc = [sq.sum(axis=1) for sq in self._sq]
        self.fbar = [float(a.sum()) for a in self.acc]
        self.caps = [model.n1 - model.k1, model.n2 - model.k2]
        self.total_cap = model.n1 + model.n2 - budget
        self.full_value = self.fbar[0] * self.fbar[1]

    @property
    def size(self) -> int:
        return len(self.removed[0]) + len(self.removed[1])

    @property
    def done(self) -> bool:
        return self.size >= self.total_cap

    def value(self) -> float:
        return self.full_value - self.fbar[0] * self.fbar[1]

    def can_remove(self, factor: int) -> bool:
        return len(self.removed[factor]) < self.caps[factor] and not self.done

    def decrements(self, factor: int) -> np.ndarray:
        """Drop in ``Fbar_factor`` for removing each vertex (NaN where already removed)."""
        sq_diag = np.diagonal(self._sq[factor])
        d = 2.0 * self.acc[factor] - sq_diag
        return np.where(self.kept[factor], d, np.nan)

    def gains(self, factor: int) -> np.ndarray:
        return self.decrements(factor) * self.fbar[1 - factor]

    def gain(self, factor: int, vertex: int) -> float:
        if not self.kept[factor][vertex]:
            raise InvalidParameterError(f"vertex {vertex} of factor {factor + 1} is already removed")
        sq = self._sq[factor]
        delta = 2.0 * self.acc[factor][vertex] - sq[vertex, vertex]
        return float(delta * self.fbar[1 - factor])

    def remove(self, factor: int, vertex: int) -> None:
        if not self.kept[factor][vertex]:
            raise InvalidParameterError(f"vertex {vertex} of factor {factor + 1} is already removed")
        if not self.can_remove(factor):
            raise InvalidParameterError(f"removing from factor {factor + 1} leaves the matroid")
        sq = self._sq[factor]
        self.fbar[factor] -= 2.0 * self.acc[factor][vertex] - sq[vertex, vertex]
        self.acc[factor] -= sq[:, vertex]
        self.kept[factor][vertex] = False
        self.removed[factor].append(int(vertex))

    def recompute(self) -> tuple[float, float]:
        """``Fbar`` of both factors evaluated from scratch."""
        b = (self.model.basis1, self.model.basis2)
        return tuple(frame_potential(b[i], np.flatnonzero(self.kept[i])) for i in (0, 1))

    def to_design(self) -> SamplingDesign:
        m = self.model
        return SamplingDesign(
            tuple(np.flatnonzero(self.kept[0])), tuple(np.flatnonzero(self.kept[1])),
            m.n1, m.n2, m.k1, m.k2, self.budget,
        )


def marginal_gain(state: RemovalState, candidate: tuple[int, int]) -> float:
    """Increase of ``G`` when vertex ``candidate[1]`` of factor ``candidate[0]`` (0 or 1) is removed."""
    factor, vertex = candidate
    return state.gain(factor, vertex)


def greedy_step(state: RemovalState, tie_rtol: float = TIE_RTOL) -> tuple[int, int, float]:
    """Pick the best feasible removal; ties go to factor 1, then the lowest index."""
    best = -np.inf
    per_factor = []
    for f in (0, 1):
        if state.can_remove(f):
            g = state.gains(f)
            per_factor.append(g)
            best = max(best, np.nanmax(g))
        else:
            per_factor.append(None)
    if best == -np.inf:
        raise InvalidParameterError("no feasible removal left")
    tol = tie_rtol * max(state.full_value, np.finfo(float).tiny)
    for f, g in enumerate(per_factor):
        if g is None:
            continue
        hits = np.flatnonzero(g >= best - tol)
        if hits.size:
            v = int(hits[0])
            return f, v, float(g[v])
    raise AssertionError("unreachable")


def greedy_design(model: ProductModel, budget: int, callback=None,
                  tie_rtol: float = TIE_RTOL) -> SamplingDesign:
    """Greedy frame-potential design keeping exactly ``budget`` factor vertices.

    Runs ``N1 + N2 - budget`` removal steps. ``callback(state)`` is invoked
    after every step if given.
    """
    state = RemovalState(model, budget)
    while not state.done:
        f, v, _ = greedy_step(state, tie_rtol)
        state.remove(f, v)
        if callback is not None:
            callback(state)
    return state.to_design()


def feasible_removal_sizes(n1, n2, k1, k2, budget):
    """Admissible ``(|S1|, |S2|)`` splits of a maximal removal set."""
    r = n1 + n2 - budget
    lo = max(0, r - (n2 - k2))
    hi = min(n1 - k1, r)
    return [(s1, r - s1) for s1 in range(lo, hi + 1)]


def count_feasible_removals(n1, n2, k1, k2, budget) -> int:
    return sum(math.comb(n1, a) * math.comb(n2, b)
               for a, b in feasible_removal_sizes(n1, n2, k1, k2, budget))


def iter_feasible_removals(n1, n2, k1, k2, budget):
    """All maximal independent removal sets ``(S1, S2)`` of the matroid."""
    for a, b in feasible_removal_sizes(n1, n2, k1, k2, budget):
        for s1 in itertools.combinations(range(n1), a):
            for s2 in itertools.combinations(range(n2), b):
                yield s1, s2


def brute_force_design(model: ProductModel, budget: int, limit: int = BRUTE_FORCE_LIMIT) -> SamplingDesign:
    """Exact maximizer of ``G`` by enumeration (test oracle for small instances)."""
    n1, n2, k1, k2 = model.n1, model.n2, model.k1, model.k2
    check_budgets(n1, n2, k1, k2, budget)
    count = count_feasible_removals(n1, n2, k1, k2, budget)
    if count > limit:
        raise SearchSpaceError(f"{count} feasible removal sets exceed the limit of {limit}")
    best, best_sets = -np.inf, None
    for s1, s2 in iter_feasible_removals(n1, n2, k1, k2, budget):
        val = surrogate_value(model, (s1, s2))
        if val > best:
            best, best_sets = val, (s1, s2)
    s1, s2 = best_sets
    keep1 = tuple(v for v in range(n1) if v not in s1)
    keep2 = tuple(v for v in range(n2) if v not in s2)
    return SamplingDesign(keep1, keep2, n1, n2, k1, k2, budget)


def random_design(n1: int, n2: int, k1: int, k2: int, budget: int, seed=None,
                  split: str = "uniform_size") -> SamplingDesign:
    """Random feasible design.

    ``split="uniform_size"`` draws ``|set1|`` uniformly over its admissible
    range, then uniform subsets of each factor. ``split="uniform_subset"``
    draws uniformly among all feasible ``budget``-subsets of ``V1 + V2``, so
    ``|set1|`` follows the constrained hypergeometric law.
    """
    check_budgets(n1, n2, k1, k2, budget)
    rng = np.random.default_rng(seed)
    lo = max(k1, budget - n2)
    hi = min(n1, budget - k2)
    sizes = np.arange(lo, hi + 1)
    if split == "uniform_size":
        l1 = int(rng.choice(sizes))
    elif split == "uniform_subset":
        logw = np.array([_log_comb(n1, a) + _log_comb(n2, budget - a) for a in sizes])
        w = np.exp(logw - logw.max())
        l1 = int(rng.choice(sizes, p=w / w.sum()))
    else:
        raise InvalidParameterError(f"unknown split rule {split!r}")
    set1 = rng.choice(n1, size=l1, replace=False)
    set2 = rng.choice(n2, size=budget - l1, replace=False)
    return SamplingDesign(tuple(set1), tuple(set2), n1, n2, k1, k2, budget)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def removal_of(design: SamplingDesign) -> tuple[tuple[int, ...], tuple[int, ...]]:
    s1 = set(design.set1)
    s2 = set(design.set2)
    return (tuple(v for v in range(design.n1) if v not in s1),
            tuple(v for v in range(design.n2) if v not in s2))


def design_value(model: ProductModel, design: SamplingDesign) -> float:
    """``G`` evaluated at the removal set complementary to ``design``."""
    return surrogate_value(model, removal_of(design))


@dataclass(frozen=True)
class IdentifiabilityReport:
    identifiable: bool
    cond1: float
    cond2: float

    def __bool__(self):
        return self.identifiable

    rtol: float = IDENTIFIABILITY_RTOL

    @property
    def failing_factors(self) -> list[int]:
        return [i + 1 for i, c in enumerate((self.cond1, self.cond2)) if not c < 1.0 / self.rtol]


def _condition(A: np.ndarray) -> float:
    if A.shape[0] < A.shape[1] or A.size == 0:
        return np.inf
    s = np.linalg.svd(A, compute_uv=False)
    return np.inf if s[-1] == 0 else float(s[0] / s[-1])


def check_identifiability(model: ProductModel, design: SamplingDesign,
                          rtol: float = IDENTIFIABILITY_RTOL) -> IdentifiabilityReport:
    """Whether both sampled factor bases have (numerically) full column rank.

    A factor passes when its smallest singular value exceeds ``rtol`` times
    its largest, i.e. its condition number is below ``1/rtol``.
    """
    c1 = _condition(model.basis1.matrix[list(design.set1)])
    c2 = _condition(model.basis2.matrix[list(design.set2)])
    ok = c1 < 1.0 / rtol and c2 < 1.0 / rtol
    return IdentifiabilityReport(bool(ok), c1, c2, rtol)
