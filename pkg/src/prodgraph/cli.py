"""Command line entry point: ``prodgraph {synth,design,reconstruct,evaluate,run}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np
import yaml

from . import io as pio
from . import synth
from .config import load_config
from .errors import ProdGraphError
from .pipeline import (_evaluate, _reconstruct, design_for, emit_plot_data, load_truth,
                       prepare, run_experiment)
from .product import ProductModel
from .sampler import SamplingDesign, check_identifiability
from .graph_core import laplacian
from .spectral import eigendecompose, reduce, select_support_first_k

log = logging.getLogger("prodgraph")

EXIT_SINGULAR = 2
EXIT_ERROR = 1


def _out_dir(args, cfg):
    out = args.out or cfg.path(cfg.output_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _need_seed(args, cfg):
    if cfg.design["method"] == "random" and args.seed is None:
        raise SystemExit("error: --seed is required for random designs")


def cmd_synth(args):
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    if args.dataset == "dancer":
        P = synth.dancer_point_cloud(args.n1, args.n2, seed=args.seed)
        synth.write_point_cloud_csv(os.path.join(args.out, "dancer.csv"), P)
        cfg = {
            "name": "dancer-synthetic",
            "factor1": {"type": "cycle"},
            "factor2": {"type": "knn", "source": "signal_mean", "k": 5},
            "shift": "laplacian",
            "support": {"method": "first_k", "k1": min(500, args.n1), "k2": min(70, args.n2)},
            "design": {"method": "greedy", "budget": min(600, args.n1 + args.n2)},
            "signal": {"type": "point_cloud", "path": "dancer.csv"},
            "evaluation": {"metric": "relative_error"},
            "output_dir": "out",
        }
    elif args.dataset == "movielens":
        synth.movielens_like(args.out, seed=args.seed)
        cfg = {
            "name": "movielens-synthetic",
            "factor1": {"type": "knn", "features": "u.user", "schema": "movielens_user",
                        "delimiter": "|", "k": 10},
            "factor2": {"type": "knn", "features": "u.item", "schema": "movielens_item",
                        "delimiter": "|", "encoding": "latin-1", "k": 10},
            "shift": "laplacian",
            "support": {"method": "first_k", "k1": 20, "k2": 20},
            "design": {"method": "greedy", "budget": 100},
            "signal": {"type": "ratings", "path": "u1.base", "completion": "bandlimited_ls"},
            "evaluation": {"metric": "masked_rmse", "test_path": "u1.test"},
            "output_dir": "out",
        }
    else:
        g1 = synth.random_geometric_graph(args.n1, 4, rng)
        g2 = synth.random_geometric_graph(args.n2, 4, rng)
        pio.write_edge_list(os.path.join(args.out, "g1.edges"), g1)
        pio.write_edge_list(os.path.join(args.out, "g2.edges"), g2)
        b1, b2 = eigendecompose(laplacian(g1)), eigendecompose(laplacian(g2))
        model = ProductModel(reduce(b1, select_support_first_k(b1, args.k1)),
                             reduce(b2, select_support_first_k(b2, args.k2)))
        pio.write_matrix(os.path.join(args.out, "signal.csv"), synth.random_bandlimited_signal(model, rng))
        cfg = {
            "name": "random-synthetic",
            "factor1": {"type": "edges", "path": "g1.edges", "n": args.n1},
            "factor2": {"type": "edges", "path": "g2.edges", "n": args.n2},
            "shift": "laplacian",
            "support": {"method": "first_k", "k1": args.k1, "k2": args.k2},
            "design": {"method": "greedy", "budget": args.k1 + args.k2 + 4},
            "signal": {"type": "matrix", "path": "signal.csv"},
            "evaluation": {"metric": "relative_error"},
            "output_dir": "out",
        }
    path = os.path.join(args.out, "config.yaml")
    with open(path, "w") as fh:
        yaml.safe_dump(cfg, fh, sort_keys=False)
    print(path)
    return 0


def cmd_design(args):
    cfg = load_config(args.config)
    _need_seed(args, cfg)
    model, _, _ = prepare(cfg)
    design = design_for(cfg, model, seed=args.seed)
    out = _out_dir(args, cfg)
    pio.write_design(out, design)
    rep = check_identifiability(model, design, cfg.tolerances["identifiability_rtol"])
    print(json.dumps({"sizes": design.sizes, "cond1": rep.cond1, "cond2": rep.cond2,
                      "identifiable": rep.identifiable, "out": out}))
    if not rep:
        log.warning("design is not identifiable (factors %s)", rep.failing_factors)
    return 0


def _read_design(cfg, model, design_dir):
    s1 = pio.read_index_list(os.path.join(design_dir, "set1.txt"))
    s2 = pio.read_index_list(os.path.join(design_dir, "set2.txt"))
    return SamplingDesign(s1, s2, model.n1, model.n2, model.k1, model.k2, int(cfg.design["budget"]))


def cmd_reconstruct(args):
    cfg = load_config(args.config)
    model, dense, _ = prepare(cfg)
    truth, _, _ = load_truth(cfg, model, dense)
    design = _read_design(cfg, model, args.design_dir)
    Xh = _reconstruct(model, design, truth, cfg.tolerances["pinv_rtol"])
    out = _out_dir(args, cfg)
    for c, X in enumerate(Xh):
        pio.write_matrix(os.path.join(out, f"reconstruction_{c}.csv"), X)
    print(out)
    return 0


def cmd_evaluate(args):
    cfg = load_config(args.config)
    model, dense, _ = prepare(cfg)
    truth, test, _ = load_truth(cfg, model, dense)
    Xh = [pio.load_matrix(os.path.join(args.reconstruction, f"reconstruction_{c}.csv"))
          for c in range(len(truth))]
    print(json.dumps(_evaluate(cfg, Xh, truth, test)))
    return 0


def cmd_run(args):
    cfg = load_config(args.config)
    _need_seed(args, cfg)
    rec = run_experiment(cfg, seed=args.seed)
    out = _out_dir(args, cfg)
    rec.write(os.path.join(out, "record.json"))
    emit_plot_data(rec, out)
    print(json.dumps({"sizes": rec.sizes, "identifiable": rec.identifiable,
                      "metrics": rec.metrics, "out": out}))
    if not rec.identifiable:
        print(rec.singular_report, file=sys.stderr)
        return EXIT_SINGULAR
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prodgraph", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic dataset and a matching config")
    s.add_argument("dataset", choices=["dancer", "movielens", "random"])
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n1", type=int, default=None)
    s.add_argument("--n2", type=int, default=None)
    s.add_argument("--k1", type=int, default=4)
    s.add_argument("--k2", type=int, default=4)
    s.set_defaults(func=cmd_synth)

    for name, func, helptext in (("design", cmd_design, "design sampling sets"),
                                 ("run", cmd_run, "run the full pipeline")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("config")
        c.add_argument("--seed", type=int, default=None)
        c.add_argument("--out", default=None)
        c.set_defaults(func=func)

    c = sub.add_parser("reconstruct", help="reconstruct a signal from a stored design")
    c.add_argument("config")
    c.add_argument("--design-dir", required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("evaluate", help="score stored reconstructions")
    c.add_argument("config")
    c.add_argument("--reconstruction", required=True)
    c.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "synth":
        defaults = {"dancer": (573, 1502), "movielens": (943, 1682), "random": (20, 20)}
        d1, d2 = defaults[args.dataset]
        args.n1 = args.n1 or d1
        args.n2 = args.n2 or d2
    try:
        return args.func(args)
    except ProdGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
