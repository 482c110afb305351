"""``specc`` command-line interface.

Settings are resolved as: built-in defaults, then ``--config`` JSON, then
flags given on the command line. Files carry the canonical results; stdout
gets a short summary.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .datasets import FixtureMissingError, load_karate, load_polblogs
from .experiments import EXPERIMENTS
from .graph import EdgeListError, largest_connected_component, load_edge_list, save_edge_list
from .linalg import RankDeficientError
from .metrics import metrics_report
from .selection import DEFAULT_CLAMP, DEFAULT_GRID, WARM_STARTS, bic_score, select_k, select_lambda
from .simulate import ScenarioError, ScenarioSpec, build_scenario, sample_adjacency
from .spca import FitConfig, FitError, get_algorithm

FIT_DEFAULTS = {
    "input": None, "dataset": None, "lcc": False, "k": None, "select_k": False, "k_grid": None,
    "algorithm": "eig", "lam": None, "grid": list(DEFAULT_GRID), "criterion": "bic",
    "init": "score", "epsilon": 1e-6, "max_iter": 200, "n_starts": 5, "folds": None,
    "clamp_eps": DEFAULT_CLAMP, "warm_start": "descending", "seed": 0, "out": "specc",
}

DEFAULTS = {
    "simulate": {"n": 500, "k": 3, "overlap": 0.1, "rho": 0.1, "degree": 50.0,
                 "hub_probability": 0.0, "hub_theta": 5.0, "hubs": False, "clip": False, "scenario": None,
                 "seed": 1, "out": "sim"},
    "fit": FIT_DEFAULTS,
    "path": FIT_DEFAULTS,
    "select-k": FIT_DEFAULTS,
    "evaluate": {"estimate": None, "truth": None, "out": None},
    "reproduce": {"name": None, "polblogs": None},
}


class UsageError(ValueError):
    pass


def parse_grid(text) -> list[float]:
    """``"0.05:0.95:0.05"`` (inclusive) or ``"0.1,0.5"``; lists pass through."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 10) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_k_grid(text) -> list[int]:
    """``"2..12"`` (inclusive) or ``"1,2,3"``; lists pass through."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    if ".." in text:
        lo, hi = (int(x) for x in text.split(".."))
        return list(range(lo, hi + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _add_fit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="edge list file (with --dataset polblogs: the polblogs data file)")
    p.add_argument("--dataset", choices=["karate", "polblogs"], help="bundled or located dataset")
    p.add_argument("--lcc", action="store_true", help="restrict to the largest connected component")
    p.add_argument("--k", type=int, help="number of communities")
    p.add_argument("--k-grid", dest="k_grid", help="K values for selection, e.g. 2..12")
    p.add_argument("--algorithm", choices=["eig", "cd"])
    p.add_argument("--grid", help="lambda grid, lo:hi:step or comma list")
    p.add_argument("--criterion", choices=["bic", "ecv"])
    p.add_argument("--init", choices=["score", "random"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--n-starts", dest="n_starts", type=int)
    p.add_argument("--folds", type=int, help="edge cross-validation folds")
    p.add_argument("--clamp-eps", dest="clamp_eps", type=float)
    p.add_argument("--warm-start", dest="warm_start", choices=list(WARM_STARTS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file of settings; explicit flags win")
        return p

    p = command("simulate", "sample a network from the OCCAM model")
    p.add_argument("--scenario", help="scenario file (JSON or key=value)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--overlap", type=float, help="fraction of overlapping nodes")
    p.add_argument("--rho", type=float, help="between-community mixing")
    p.add_argument("--degree", type=float, help="target expected mean degree")
    p.add_argument("--hubs", action="store_true", help="draw hub degree factors (probability 0.1)")
    p.add_argument("--hub-probability", dest="hub_probability", type=float)
    p.add_argument("--hub-theta", dest="hub_theta", type=float)
    p.add_argument("--clip", action="store_true", help="cap edge probabilities at 1 instead of failing")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path prefix")

    p = command("fit", "estimate sparse memberships")
    _add_fit_args(p)
    p.add_argument("--lambda", dest="lam", type=float, help="fixed threshold; skips selection")
    p.add_argument("--select-k", dest="select_k", action="store_true",
                   help="choose K by edge cross-validation first")

    p = command("path", "fit the whole lambda path")
    _add_fit_args(p)

    p = command("select-k", "choose the number of communities")
    _add_fit_args(p)

    p = command("evaluate", "compare an estimate with ground truth")
    p.add_argument("--estimate", help="membership CSV")
    p.add_argument("--truth", help="membership CSV")
    p.add_argument("--out", help="metrics JSON path")

    p = command("reproduce", "run a named reproduction check")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--polblogs", help="path to polblogs.gml")
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, ``--config`` JSON and explicit flags; reject unknown config keys."""
    cfg = dict(DEFAULTS[command])
    explicit = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    if getattr(ns, "config", None):
        raw = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        raw = {k.replace("-", "_"): v for k, v in raw.items()}
        raw = {("lam" if k == "lambda" else k): v for k, v in raw.items()}
        unknown = sorted(set(raw) - set(cfg))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {unknown}")
        cfg.update(raw)
    cfg.update(explicit)
    return cfg


def _load_graph(cfg):
    if cfg["dataset"] == "karate":
        g, _ = load_karate()
    elif cfg["dataset"] == "polblogs":
        g, _ = load_polblogs(cfg["input"])
    elif cfg["input"]:
        g = load_edge_list(cfg["input"])
    else:
        raise UsageError("give --input or --dataset")
    return largest_connected_component(g) if cfg["lcc"] else g


def _fit_config(cfg, lam=0.5) -> FitConfig:
    return FitConfig(lam=lam, epsilon=cfg["epsilon"], max_iter=cfg["max_iter"],
                     init=cfg["init"], n_starts=cfg["n_starts"], seed=cfg["seed"])


def _k_selection(g, cfg):
    ks = parse_k_grid(cfg["k_grid"]) if cfg["k_grid"] else list(range(2, max(2, min(12, g.n // 10)) + 1))
    return select_k(g, ks, parse_grid(cfg["grid"]), fit=cfg["algorithm"], cfg=_fit_config(cfg),
                    folds=cfg["folds"] or 20, warm_start=cfg["warm_start"])


def cmd_simulate(cfg) -> int:
    if cfg["scenario"]:
        spec = ScenarioSpec.from_file(cfg["scenario"])
    else:
        hub_p = cfg["hub_probability"] or (0.1 if cfg["hubs"] else 0.0)
        spec = ScenarioSpec(n=cfg["n"], K=cfg["k"], overlap_fraction=cfg["overlap"], rho=cfg["rho"],
                            target_degree=cfg["degree"], hub_probability=hub_p,
                            hub_theta=cfg["hub_theta"], seed=cfg["seed"],
                            clip_probabilities=cfg["clip"])
    params = build_scenario(spec)
    g = sample_adjacency(params, seed=spec.seed)
    out = cfg["out"]
    save_edge_list(g, f"{out}_edges.txt")
    # node labels are 0..n-1 so isolated nodes still appear in the truth file
    io.write_membership_csv(f"{out}_truth.csv", params.Z, [str(i) for i in range(params.n)])
    io.write_json(f"{out}_params.json", {"scenario": spec.to_dict(), **params.to_dict()})
    print(f"simulated n={g.n} edges={g.n_edges} mean degree={2 * g.n_edges / g.n:.2f} "
          f"alpha={params.alpha:.4g} -> {out}_edges.txt, {out}_truth.csv, {out}_params.json")
    return 0


def cmd_fit(cfg) -> int:
    g = _load_graph(cfg)
    k, kscores = cfg["k"], None
    if cfg["select_k"]:
        k, kscores = _k_selection(g, cfg)
    if k is None:
        raise UsageError("give --k or --select-k")
    report = {"n": g.n, "edges": g.n_edges, "k": k, "algorithm": cfg["algorithm"], "seed": cfg["seed"]}
    if cfg["lam"] is not None:
        basis = get_algorithm(cfg["algorithm"])(g, k, _fit_config(cfg, cfg["lam"]))
        lam = cfg["lam"]
        report.update(criterion=None, lambdas=[lam], bic=bic_score(g, basis, cfg["clamp_eps"]), cv_mse=None)
    else:
        lam, path = select_lambda(g, k, parse_grid(cfg["grid"]), cfg["criterion"], cfg["algorithm"],
                                  _fit_config(cfg), folds=cfg["folds"] or 5, clamp_eps=cfg["clamp_eps"],
                                  warm_start=cfg["warm_start"])
        best = path.best()
        basis = best.basis
        report.update(criterion=cfg["criterion"], lambdas=path.lambdas, bic=best.bic, cv_mse=best.cv_mse)
    report.update(**{"lambda": lam}, iterations=basis.iterations, converged=basis.converged,
                  support_size=basis.support_size, overlap_count=basis.overlap_count)
    if kscores is not None:
        report["k_selection"] = [vars(s) for s in kscores]
    labels = g.node_labels()
    out = cfg["out"]
    io.write_membership_csv(f"{out}_membership.csv", basis, labels)
    io.write_support_csv(f"{out}_support.csv", basis, labels)
    io.write_json(f"{out}_report.json", report)
    print(f"K={k} lambda={lam:g} iterations={basis.iterations} converged={basis.converged} "
          f"support={basis.support_size} overlaps={basis.overlap_count} -> {out}_membership.csv, "
          f"{out}_report.json")
    return 0


def cmd_path(cfg) -> int:
    g = _load_graph(cfg)
    if cfg["k"] is None:
        raise UsageError("give --k")
    lam, path = select_lambda(g, cfg["k"], parse_grid(cfg["grid"]), cfg["criterion"], cfg["algorithm"],
                              _fit_config(cfg), folds=cfg["folds"] or 5, clamp_eps=cfg["clamp_eps"],
                              warm_start=cfg["warm_start"])
    out = cfg["out"]
    io.write_path_scores_csv(f"{out}_path_scores.csv", path)
    io.write_path_members_csv(f"{out}_path_members.csv", path, g.node_labels())
    print(f"{len(path)} lambdas fitted, {cfg['criterion']} selects lambda={lam:g} -> "
          f"{out}_path_scores.csv, {out}_path_members.csv")
    return 0


def cmd_select_k(cfg) -> int:
    g = _load_graph(cfg)
    k, scores = _k_selection(g, cfg)
    out = cfg["out"]
    io.write_k_scores_csv(f"{out}_kselect.csv", scores)
    for s in scores:
        print(f"K={s.k:3d} mean_mse={s.mean_mse:.6g} se={s.se:.3g}")
    print(f"selected K={k} -> {out}_kselect.csv")
    return 0


def cmd_evaluate(cfg) -> int:
    if not cfg["estimate"] or not cfg["truth"]:
        raise UsageError("give --estimate and --truth")
    est_labels, est = io.read_membership_csv(cfg["estimate"])
    truth_labels, truth = io.read_membership_csv(cfg["truth"])
    if sorted(est_labels) != sorted(truth_labels) or len(set(est_labels)) != len(est_labels):
        raise UsageError("estimate and truth do not cover the same node labels")
    order = {lab: i for i, lab in enumerate(est_labels)}
    est = est[[order[lab] for lab in truth_labels]]
    report = metrics_report(est, truth)
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg["out"]:
        io.write_json(cfg["out"], report)
    print(text)
    return 0


def cmd_reproduce(cfg) -> int:
    name = cfg["name"]
    fn = EXPERIMENTS[name]
    res = fn(path=cfg["polblogs"]) if name == "polblogs" else fn()
    print("\n".join(res.lines()))
    if "error" in res.details:
        print(res.details["error"], file=sys.stderr)
    return 0 if res.passed else 1


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "path": cmd_path, "select-k": cmd_select_k,
            "evaluate": cmd_evaluate, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return COMMANDS[ns.command](resolve(ns.command, ns))
    except (UsageError, ScenarioError, EdgeListError, FixtureMissingError, FitError,
            RankDeficientError, ValueError, OSError) as exc:
        print(f"specc {ns.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
