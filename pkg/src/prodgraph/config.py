"""Experiment configuration (YAML documents)."""

from __future__ import annotations

import copy
import os
from dataclasses import asdict, dataclass, field

import yaml

from .errors import InvalidInputError
from .reconstruct import PINV_RTOL
from .sampler import IDENTIFIABILITY_RTOL, TIE_RTOL

GRAPH_TYPES = {"cycle", "knn", "edges"}
SUPPORT_METHODS = {"first_k", "energy"}
DESIGN_METHODS = {"greedy", "random"}
SIGNAL_TYPES = {"point_cloud", "matrix", "ratings"}
METRICS = {"relative_error", "masked_rmse"}

DEFAULT_TOLERANCES = {
    "identifiability_rtol": IDENTIFIABILITY_RTOL,
    "pinv_rtol": PINV_RTOL,
    "tie_rtol": TIE_RTOL,
}


@dataclass
class ExperimentConfig:
    """One experiment. Relative paths are resolved against ``base_dir``.

    Sections (all plain mappings):

    ``factor1`` / ``factor2``
        ``{type: cycle, n}``; ``{type: knn, k, metric, features | source: signal_mean,
        schema, delimiter, encoding}``; ``{type: edges, path, n}``.
    ``support``
        ``{method: first_k, k1, k2}`` or ``{method: energy, fraction}``.
    ``design``
        ``{method: greedy, budget}`` or ``{method: random, budget, trials, split}``.
    ``signal``
        ``{type: point_cloud | matrix, path}`` or
        ``{type: ratings, path, completion: bandlimited_ls | {matrix: path}}``.
    ``evaluation``
        ``{metric: relative_error}`` or ``{metric: masked_rmse, test_path}``.
    """

    factor1: dict
    factor2: dict
    support: dict
    design: dict
    signal: dict
    evaluation: dict
    shift: str = "laplacian"
    output_dir: str = "out"
    name: str = "experiment"
    tolerances: dict = field(default_factory=dict)
    base_dir: str = "."

    def __post_init__(self):
        for key in ("factor1", "factor2"):
            spec = getattr(self, key)
            if spec.get("type") not in GRAPH_TYPES:
                raise InvalidInputError(f"{key}.type must be one of {sorted(GRAPH_TYPES)}")
        if self.shift not in ("laplacian", "adjacency"):
            raise InvalidInputError("shift must be 'laplacian' or 'adjacency'")
        if self.support.get("method") not in SUPPORT_METHODS:
            raise InvalidInputError(f"support.method must be one of {sorted(SUPPORT_METHODS)}")
        if self.design.get("method") not in DESIGN_METHODS:
            raise InvalidInputError(f"design.method must be one of {sorted(DESIGN_METHODS)}")
        if "budget" not in self.design:
            raise InvalidInputError("design.budget is required")
        if self.signal.get("type") not in SIGNAL_TYPES:
            raise InvalidInputError(f"signal.type must be one of {sorted(SIGNAL_TYPES)}")
        if self.evaluation.get("metric") not in METRICS:
            raise InvalidInputError(f"evaluation.metric must be one of {sorted(METRICS)}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InvalidInputError(f"unknown tolerances: {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}

    def path(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(self.base_dir, p))

    def to_dict(self) -> dict:
        d = copy.deepcopy(asdict(self))
        d.pop("base_dir")
        return d

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "ExperimentConfig":
        d = dict(d)
        required = ("factor1", "factor2", "support", "design", "signal", "evaluation")
        missing = [k for k in required if k not in d]
        if missing:
            raise InvalidInputError(f"config is missing sections: {missing}")
        d.pop("base_dir", None)
        try:
            return cls(**d, base_dir=base_dir)
        except TypeError as exc:
            raise InvalidInputError(f"bad config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    if not isinstance(d, dict):
        raise InvalidInputError(f"{path}: config must be a mapping")
    return ExperimentConfig.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))


def dump_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)
