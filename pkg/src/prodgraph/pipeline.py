"""End-to-end experiment: graphs, bases, design, sampling, reconstruction, metrics."""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import io as pio
from .config import ExperimentConfig
from .errors import InvalidInputError, ProdGraphError, SingularSystemError
from .graph_core import Graph, build_cycle_graph, build_knn_graph, shift_operator
from .product import ProductModel, synthesize
from .reconstruct import (estimate_coefficients, masked_rmse, reconstruct_signal,
                          relative_error, sample)
from .sampler import (SamplingDesign, check_identifiability, greedy_design,
                      product_frame_potential, random_design)
from .spectral import eigendecompose, reduce, select_support_by_energy, select_support_first_k

log = logging.getLogger(__name__)

TIE_RULE = "argmax ties within tie_rtol*F(V): lowest factor, then lowest vertex index"
SCHEMA_PRESETS = {
    "movielens_user": pio.MOVIELENS_USER_SCHEMA,
    "movielens_item": pio.MOVIELENS_ITEM_SCHEMA,
}


class StageError(ProdGraphError):
    """Failure inside one pipeline stage; ``stage`` names it."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.cause = exc


class _stage:
    def __init__(self, name, timings):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, et, ev, tb):
        self.timings[self.name] = time.perf_counter() - self.t0
        if ev is not None and not isinstance(ev, StageError):
            raise StageError(self.name, ev) from ev
        return False


@dataclass
class ResultRecord:
    name: str
    version: str
    config: dict
    n1: int
    n2: int
    k1: int
    k2: int
    budget: int
    design_method: str
    set1: list
    set2: list
    cond1: float
    cond2: float
    identifiable: bool
    frame_potential: float
    metrics: dict
    settings: dict
    info: dict = field(default_factory=dict)
    random_trials: dict | None = None
    singular_report: str | None = None
    timings: dict = field(default_factory=dict)
    arrays: dict | None = field(default=None, repr=False, compare=False)

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.set1), len(self.set2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("arrays")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")


@dataclass
class Signal:
    """Ground truth channels (N2 x N1 each) plus optional test ratings for masked RMSE."""

    channels: list
    kind: str
    observed: list | None = None  # (row, col, value) training entries for ratings
    info: dict = field(default_factory=dict)


def _load_dense_signal(cfg: ExperimentConfig):
    spec = cfg.signal
    if spec["type"] == "point_cloud":
        return pio.load_point_cloud(cfg.path(spec["path"]))
    if spec["type"] == "matrix":
        return [pio.load_matrix(cfg.path(spec["path"]))]
    return None


def _ratings_entries(cfg: ExperimentConfig, path, n1, n2):
    users_factor = int(cfg.signal.get("users_factor", 1))
    data = pio.load_ratings(path)
    out = []
    for r in data.ratings:
        u, i = r.user - 1, r.item - 1
        row, col = (i, u) if users_factor == 1 else (u, i)
        if not (0 <= row < n2 and 0 <= col < n1):
            raise InvalidInputError(f"rating ({r.user}, {r.item}) outside the {n2} x {n1} signal")
        out.append((row, col, r.rating))
    return out


def build_factor_graph(cfg: ExperimentConfig, which: int, dense) -> Graph:
    spec = cfg.factor1 if which == 1 else cfg.factor2
    kind = spec["type"]
    if kind == "cycle":
        n = spec.get("n")
        if n is None:
            if dense is None:
                raise InvalidInputError("cycle size must be given when the signal is not dense")
            n = dense[0].shape[1] if which == 1 else dense[0].shape[0]
        return build_cycle_graph(int(n))
    if kind == "edges":
        return pio.load_edge_list(cfg.path(spec["path"]), spec.get("n"))
    # knn
    if spec.get("source") == "signal_mean":
        if dense is None:
            raise InvalidInputError("source: signal_mean needs a dense signal")
        axis = 0 if which == 1 else 1
        feats = np.stack([X.mean(axis=axis) for X in dense], axis=1)
    else:
        schema = spec.get("schema")
        if isinstance(schema, str):
            schema = SCHEMA_PRESETS[schema]
        feats = pio.load_features(cfg.path(spec["features"]), schema,
                                  spec.get("delimiter", ","), spec.get("encoding", "utf-8"))
    return build_knn_graph(feats, int(spec.get("k", 5)), spec.get("metric", "euclidean"))


def complete_bandlimited(model: ProductModel, observed) -> np.ndarray:
    """Least-squares fit of the bandlimited model to scattered entries.

    Stand-in ground truth for entries a design queries but the data lacks.
    """
    arr = np.asarray(observed, dtype=float)
    rows, cols, vals = arr[:, 0].astype(int), arr[:, 1].astype(int), arr[:, 2]
    U1 = model.basis1.matrix[cols]
    U2 = model.basis2.matrix[rows]
    # kron(U1[c], U2[r]) in column-major vec(C) order
    A = (U1[:, :, None] * U2[:, None, :]).reshape(len(vals), -1)
    c, *_ = np.linalg.lstsq(A, vals, rcond=None)
    C = c.reshape((model.k2, model.k1), order="F")
    return synthesize(model, C)


def _support(cfg, basis1, basis2, dense):
    spec = cfg.support
    if spec["method"] == "first_k":
        return select_support_first_k(basis1, int(spec["k1"])), select_support_first_k(basis2, int(spec["k2"]))
    if dense is None:
        raise InvalidInputError("energy-based support needs a dense signal")
    return select_support_by_energy(basis1, basis2, np.stack(dense), float(spec["fraction"]))


def _reconstruct(model, design, truth, rtol):
    return [reconstruct_signal(estimate_coefficients(sample(X, design), model, rtol), model)
            for X in truth]


def _evaluate(cfg, X_hat, truth, test_entries):
    metric = cfg.evaluation["metric"]
    if metric == "relative_error":
        return {"relative_error": relative_error(X_hat, truth)}
    return {"masked_rmse": masked_rmse(X_hat[0], test_entries)}


def prepare(cfg: ExperimentConfig, timings: dict | None = None):
    """Stages up to the product model. Returns ``(model, dense, graphs)``."""
    timings = {} if timings is None else timings
    with _stage("load_signal", timings):
        dense = _load_dense_signal(cfg)
    with _stage("build_graphs", timings):
        g1 = build_factor_graph(cfg, 1, dense)
        g2 = build_factor_graph(cfg, 2, dense)
        if dense is not None and dense[0].shape != (g2.n, g1.n):
            raise InvalidInputError(
                f"signal is {dense[0].shape}, graphs give (N2, N1) = ({g2.n}, {g1.n})")
    with _stage("decompose", timings):
        b1 = eigendecompose(shift_operator(g1, cfg.shift))
        b2 = eigendecompose(shift_operator(g2, cfg.shift))
    with _stage("reduce", timings):
        s1, s2 = _support(cfg, b1, b2, dense)
        model = ProductModel(reduce(b1, s1), reduce(b2, s2))
    return model, dense, (g1, g2)


def design_for(cfg: ExperimentConfig, model: ProductModel, seed=None, rng=None) -> SamplingDesign:
    spec = cfg.design
    budget = int(spec["budget"])
    if spec["method"] == "greedy":
        return greedy_design(model, budget, tie_rtol=cfg.tolerances["tie_rtol"])
    if rng is None:
        if seed is None:
            raise InvalidInputError("random designs need a seed")
        rng = np.random.default_rng(seed)
    return random_design(model.n1, model.n2, model.k1, model.k2, budget, rng,
                         split=spec.get("split", "uniform_size"))


def load_truth(cfg: ExperimentConfig, model: ProductModel, dense):
    """Ground-truth channels and the test entries (masked RMSE only)."""
    info = {}
    if dense is not None:
        truth = dense
    else:
        observed = _ratings_entries(cfg, cfg.path(cfg.signal["path"]), model.n1, model.n2)
        completion = cfg.signal.get("completion", "bandlimited_ls")
        if isinstance(completion, dict):
            X = pio.load_matrix(cfg.path(completion["matrix"]))
            if X.shape != (model.n2, model.n1):
                raise InvalidInputError(f"completed matrix is {X.shape}, expected {(model.n2, model.n1)}")
        elif completion == "bandlimited_ls":
            X = complete_bandlimited(model, observed)
        else:
            raise InvalidInputError(f"unknown completion {completion!r}")
        arr = np.asarray(observed)
        X = X.copy()
        # measured ratings override the completion wherever they exist
        X[arr[:, 0].astype(int), arr[:, 1].astype(int)] = arr[:, 2]
        truth = [X]
        info["n_train_ratings"] = len(observed)
        info["completion"] = completion if isinstance(completion, str) else "matrix"
    test = None
    if cfg.evaluation["metric"] == "masked_rmse":
        test = _ratings_entries(cfg, cfg.path(cfg.evaluation["test_path"]), model.n1, model.n2)
        info["n_test_ratings"] = len(test)
    return truth, test, info


def run_experiment(cfg: ExperimentConfig, seed=None) -> ResultRecord:
    """Run the full pipeline; the record's ``arrays`` hold truth and reconstruction."""
    timings: dict = {}
    tol = cfg.tolerances
    model, dense, _ = prepare(cfg, timings)
    with _stage("truth", timings):
        truth, test, info = load_truth(cfg, model, dense)

    trials = None
    metrics: dict = {}
    recon = None
    singular = None
    with _stage("design", timings):
        if cfg.design["method"] == "greedy":
            design = design_for(cfg, model)
            report = check_identifiability(model, design, tol["identifiability_rtol"])
            candidates = [(design, report)]
        else:
            if seed is None:
                raise InvalidInputError("random designs need a seed")
            rng = np.random.default_rng(seed)
            n_trials = int(cfg.design.get("trials", 1))
            candidates = []
            for _ in range(n_trials):
                d = design_for(cfg, model, rng=rng)
                candidates.append((d, check_identifiability(model, d, tol["identifiability_rtol"])))
            design, report = next(((d, r) for d, r in candidates if r), candidates[0])

    with _stage("reconstruct", timings):
        values = []
        for d, r in candidates:
            if not r:
                continue
            try:
                Xh = _reconstruct(model, d, truth, tol["pinv_rtol"])
            except SingularSystemError:
                continue
            values.append(_evaluate(cfg, Xh, truth, test))
            if d is design:
                recon = Xh
        if cfg.design["method"] == "random":
            trials = {
                "trials": len(candidates),
                "singular": sum(not r for _, r in candidates),
                "split": cfg.design.get("split", "uniform_size"),
                "metric_values": [next(iter(v.values())) for v in values],
            }
    with _stage("evaluate", timings):
        if recon is not None:
            metrics = _evaluate(cfg, recon, truth, test)
        else:
            bad = report.failing_factors or [1, 2]
            singular = (f"design is not identifiable: factor(s) {bad} have condition numbers "
                        f"({report.cond1:.3g}, {report.cond2:.3g}) beyond 1/{tol['identifiability_rtol']:g}")
            log.warning(singular)

    rec = ResultRecord(
        name=cfg.name,
        version=__version__,
        config=cfg.to_dict(),
        n1=model.n1, n2=model.n2, k1=model.k1, k2=model.k2,
        budget=int(cfg.design["budget"]),
        design_method=cfg.design["method"],
        set1=[v + 1 for v in design.set1],
        set2=[v + 1 for v in design.set2],
        cond1=report.cond1, cond2=report.cond2,
        identifiable=bool(report) and recon is not None,
        frame_potential=product_frame_potential(model, design),
        metrics=metrics,
        settings={
            "tie_rule": TIE_RULE,
            "tolerances": dict(tol),
            "vectorization": "x[i + j*N2] = X[i, j] (0-based), rows = factor 2",
            "support": dict(cfg.support),
            "seed": seed,
        },
        info={**info, "product_observations": design.num_product_vertices,
              "product_vertices": model.n1 * model.n2},
        random_trials=trials,
        singular_report=singular,
        timings=timings,
    )
    rec.arrays = {"truth": truth, "reconstruction": recon, "kind": cfg.signal["type"]}
    return rec


def emit_plot_data(record: ResultRecord, out_dir) -> list[str]:
    """Write selected vertices and, for dense signals, original vs. reconstructed values."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    design = SamplingDesign([v - 1 for v in record.set1], [v - 1 for v in record.set2],
                            record.n1, record.n2, record.k1, record.k2, record.budget)
    written += pio.write_design(out_dir, design)
    p = os.path.join(out_dir, "selected_vertices.csv")
    with open(p, "w") as fh:
        fh.writelines(f"1,{v}\n" for v in record.set1)
        fh.writelines(f"2,{v}\n" for v in record.set2)
    written.append(p)
    arrays = record.arrays or {}
    recon = arrays.get("reconstruction")
    if recon is not None and arrays.get("kind") in ("point_cloud", "matrix"):
        truth = np.stack(arrays["truth"])
        Xh = np.stack(recon)
        n_ch, n2, n1 = truth.shape
        cols = [np.repeat(np.arange(1, n1 + 1), n2), np.tile(np.arange(1, n2 + 1), n1)]
        cols += [truth[c].T.ravel() for c in range(n_ch)]
        cols += [Xh[c].T.ravel() for c in range(n_ch)]
        table = np.column_stack(cols)
        p = os.path.join(out_dir, "reconstruction.csv")
        fmt = ["%d", "%d"] + ["%.17g"] * (2 * n_ch)
        np.savetxt(p, table, delimiter=",", fmt=fmt)
        written.append(p)
    return written
