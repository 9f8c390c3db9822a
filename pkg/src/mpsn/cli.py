"""Command-line driver: ``mpsn {swl,fixture,sr-family,regions,flow}``."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import regions as rg
from . import seeding
from .complex import ComplexError, SimplicialComplex, complex_from_simplices
from .graph_io import FIXTURES, Graph6Error, builtin_fixture, load_family, load_graph_json, write_family
from .lifting import Graph, clique_lift
from .nn.models import FLOW_MODELS, SIN, FlowClassifier
from .nn.structure import BoundaryStack
from .nn.training import ArrayDataset, TrainConfig, TrainingDiverged, train
from .swl import swl_refine, variant_from_name

log = logging.getLogger("mpsn")

# complexes addressable by name in ``regions --complex``
NAMED_COMPLEXES = {
    "triangle": [(0, 1, 2)],
    "hollow-triangle": [(0, 1), (1, 2), (0, 2)],
    "edge": [(0, 1)],
}


class CLIError(Exception):
    pass


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _resolved(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / f"{args.command.replace(' ', '_')}_config.json", _resolved(args))
    return out


# -- loading -------------------------------------------------------------------

def _load_graph(spec: str, fmt: str) -> Graph:
    if spec.startswith("fixture:"):
        return builtin_fixture(spec.split(":", 1)[1])
    if fmt == "graph6":
        graphs = load_family(spec)
        if not graphs:
            raise CLIError(f"{spec}: no graph6 records")
        return graphs[0]
    return load_graph_json(spec)


def _load_object(spec: str, fmt: str, lift_dim: int) -> SimplicialComplex:
    if fmt == "complex":
        return SimplicialComplex.load(spec)
    return clique_lift(_load_graph(spec, fmt), lift_dim)


def _load_named_complex(spec: str) -> SimplicialComplex:
    if spec in NAMED_COMPLEXES:
        return complex_from_simplices(NAMED_COMPLEXES[spec])
    return SimplicialComplex.load(spec)


# -- swl ---------------------------------------------------------------------------

def cmd_swl(args) -> int:
    out = _outdir(args)
    a = _load_object(args.a, args.format, args.lift_dim)
    b = _load_object(args.b, args.format, args.lift_dim)
    _, _, verdict = swl_refine(a, b, variant_from_name(args.variant))
    result = verdict.to_json()
    print(json.dumps(result, sort_keys=True))
    if out:
        _write_json(out / "verdict.json", result)
    return 0


def cmd_fixture(args) -> int:
    graphs = [builtin_fixture(n) for n in args.names]
    write_family(args.output, graphs)
    print(json.dumps({"written": args.output, "graphs": len(graphs)}))
    return 0


# -- SR families ------------------------------------------------------------------------

def _sin_failures(job):
    complexes, pairs, seed, eps, hidden, layers = job
    dims = max(K.dim for K in complexes) + 1
    model = SIN(seeding.rng(seed, "sin"), dims, hidden=hidden, layers=layers)
    emb = [model.embed(K) for K in complexes]
    return sum(np.linalg.norm(emb[i] - emb[j]) < eps for i, j in pairs)


def sr_failure_rates(graphs, lift_dim: int, mode: str, seeds: int, master_seed: int, eps: float = 0.01,
                     hidden: int = 16, layers: int = 5, workers: int = 1) -> list[dict]:
    """One row per seed: pairs compared and pairs left undistinguished."""
    complexes = [clique_lift(g, lift_dim) for g in graphs]
    pairs = list(itertools.combinations(range(len(graphs)), 2))
    if not pairs:
        return []
    if mode == "swl":
        fails = sum(not swl_refine(complexes[i], complexes[j])[2].distinguished for i, j in pairs)
        return [{"seed": "exact", "pairs": len(pairs), "failures": fails, "failure_rate": fails / len(pairs)}]
    jobs = [(complexes, pairs, seeding.derive(master_seed, "sr", s), eps, hidden, layers) for s in range(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            fails = list(ex.map(_sin_failures, jobs))
    else:
        fails = [_sin_failures(j) for j in jobs]
    return [{"seed": s, "pairs": len(pairs), "failures": int(f), "failure_rate": f / len(pairs)}
            for s, f in enumerate(fails)]


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return float("nan"), float("nan")
    se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def cmd_sr_family(args) -> int:
    out = _outdir(args)
    graphs = load_family(args.file)
    rows = sr_failure_rates(graphs, args.lift_dim, args.mode, args.seeds, args.seed, args.eps,
                            args.hidden, args.layers, seeding.worker_count())
    mean, se = _mean_se([r["failure_rate"] for r in rows])
    summary = {"graphs": len(graphs), "pairs": rows[0]["pairs"] if rows else 0, "mode": args.mode,
               "mean_failure_rate": mean, "stderr": se}
    if out:
        with open(out / "sr_family.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["seed", "pairs", "failures", "failure_rate"])
            w.writeheader()
            w.writerows(rows)
        _write_json(out / "sr_family_summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


# -- regions --------------------------------------------------------------------------------

def _widths(d: list[int], p: int) -> list[int]:
    if len(d) == 1:
        return d * (p + 1)
    if len(d) != p + 1:
        raise CLIError(f"--d needs 1 or {p + 1} values, got {len(d)}")
    return d


def cmd_regions(args) -> int:
    out = _outdir(args)
    K = _load_named_complex(args.complex)
    stack = BoundaryStack.from_complex(K)
    dims = _widths(args.d, stack.dim)
    archs = list(rg.ARCHITECTURES) if args.arch == "all" else [args.arch]
    if args.mode == "bound":
        result = {a: rg.closed_form_bound(a, stack.counts, dims, args.m, detail=True) for a in archs}
        # big integers stay exact as strings
        result = {a: {k: str(v) for k, v in r.items()} for a, r in result.items()}
        print(json.dumps(result, sort_keys=True))
        if out:
            _write_json(out / "bounds.json", result)
        return 0
    if args.mode == "slice" and args.arch != "all":
        archs = list(rg.ARCHITECTURES)  # slices are emitted side by side
    trials = []
    for t in range(args.trials):
        rng = seeding.rng(args.seed, "regions", t)
        weights = rg.generic_weights(rng, dims, args.m)
        row = {"trial": t}
        arrangements = {a: rg.build_arrangement(stack, a, weights, M=args.operator) for a in archs}
        if args.mode == "whitney":
            for a, A in arrangements.items():
                row[a] = rg.whitney_count(A).count
                row[f"{a}_bound"] = rg.closed_form_bound(a, stack.counts, dims, args.m)
        else:
            N = arrangements["mpsn"].shape[1]
            u, v = rng.normal(size=N), rng.normal(size=N)
            x0 = np.zeros(N) if args.through_origin else rng.normal(scale=0.1, size=N)
            for a, A in arrangements.items():
                # the gnn input space is the vertex block of the full input
                n = A.shape[1]
                res = rg.slice_regions(A, x0[:n], u[:n], v[:n], args.resolution, args.extent)
                row[a] = res.count
                if out:
                    res.write_csv(out / f"slice_{a}_trial{t}.csv")
        trials.append(row)
    summary = {"mode": args.mode, "counts": list(stack.counts), "d": dims, "m": args.m, "trials": trials}
    if len(archs) == 3:
        summary["ordered_trials"] = sum(r["gnn"] <= r["scnn"] <= r["mpsn"] for r in trials)
    print(json.dumps(summary, sort_keys=True))
    if out:
        _write_json(out / f"regions_{args.mode}.json", summary)
    return 0


# -- flows ------------------------------------------------------------------------------

def cmd_flow_gen(args) -> int:
    from .flows import generate_dataset

    out = _outdir(args) or Path(".")
    ds = generate_dataset(args.points, args.train, args.test, args.seed, args.greedy_prob,
                          randomize=not args.canonical_test, workers=seeding.worker_count())
    path = out / "flow_dataset.json"
    ds.save(path, out / "flow_complex.json")
    pc = ds.complex
    print(json.dumps({"dataset": str(path), "vertices": pc.complex.count(0), "edges": pc.complex.count(1),
                      "triangles": pc.complex.count(2), "euler": pc.euler_characteristic,
                      "train": len(ds.train), "test": len(ds.test)}, sort_keys=True))
    return 0


def flow_arrays(ds, split: str) -> ArrayDataset:
    X, T, y = ds.arrays(split)
    return ArrayDataset({"X": X, "signs": T}, y)


def run_flow_model(ds, kind: str, seed: int, hidden: int, layers: int, config: TrainConfig,
                   eval_every: int = 0):
    stack = ds.stack()
    model = FlowClassifier(seeding.rng(seed, "init", kind), kind, hidden=hidden, layers=layers)
    ops = model.operators(stack)

    def forward(X, signs):
        return model(ops, X, signs)

    return train(model, forward, flow_arrays(ds, "train"), flow_arrays(ds, "test"), config,
                 seeding.derive(seed, "batches", kind), eval_every=eval_every or config.epochs)


def _flow_job(job):
    path, kind, seed, hidden, layers, config, eval_every = job
    from .flows import FlowDataset

    t0 = time.time()
    res = run_flow_model(FlowDataset.load(path), kind, seed, hidden, layers, config, eval_every)
    return res.history, time.time() - t0


def cmd_flow_train(args) -> int:
    out = _outdir(args)
    config = TrainConfig(args.epochs, args.batch_size, args.lr, args.lr_step, args.lr_factor)
    if out:
        _write_json(out / "model_config.json", {"model": args.model, "hidden": args.hidden,
                                                "layers": args.layers, "optimizer": config.to_json(),
                                                "seeds": args.seeds, "seed": args.seed})
    jobs = [(args.data, args.model, seeding.derive(args.seed, "run", s), args.hidden, args.layers, config,
             args.eval_every) for s in range(args.seeds)]
    workers = seeding.worker_count()
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_flow_job, jobs))
    else:
        results = [_flow_job(j) for j in jobs]
    finals = []
    for s, (history, seconds) in enumerate(results):
        finals.append(history[-1])
        log.info("seed %d: %s (%.1fs)", s, history[-1], seconds)
        if out:
            with open(out / f"metrics_{args.model}_seed{s}.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=["epoch", "train_acc", "test_acc", "loss", "lr"],
                                   restval="")
                w.writeheader()
                w.writerows(history)
    tr = _mean_se([f["train_acc"] for f in finals])
    te = _mean_se([f["test_acc"] for f in finals])
    summary = {"model": args.model, "seeds": args.seeds, "train_acc": tr[0], "train_se": tr[1],
               "test_acc": te[0], "test_se": te[1],
               "per_seed": [{"train_acc": f["train_acc"], "test_acc": f["test_acc"]} for f in finals]}
    if out:
        _write_json(out / f"summary_{args.model}.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default=None, help="output directory (config is written there too)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mpsn", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("swl", parents=[common], help="simplicial WL test on two objects")
    s.add_argument("--a", required=True, help="file, or fixture:NAME")
    s.add_argument("--b", required=True, help="file, or fixture:NAME")
    s.add_argument("--format", choices=["graph6", "graph-json", "complex"], default="graph6")
    s.add_argument("--lift-dim", type=int, default=2)
    s.add_argument("--variant", default="full", help="full, sparse, or '+'-joined adjacency names")
    s.set_defaults(func=cmd_swl)

    s = sub.add_parser("fixture", help="write built-in graphs to a graph6 file")
    s.add_argument("names", nargs="+", choices=sorted(FIXTURES))
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_fixture, out=None)

    s = sub.add_parser("sr-family", parents=[common], help="pairwise failure rate on a graph6 family")
    s.add_argument("--file", required=True)
    s.add_argument("--lift-dim", type=int, default=3)
    s.add_argument("--mode", choices=["swl", "sin"], default="swl")
    s.add_argument("--eps", type=float, default=0.01)
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--hidden", type=int, default=16)
    s.add_argument("--layers", type=int, default=5)
    s.set_defaults(func=cmd_sr_family)

    s = sub.add_parser("regions", parents=[common], help="linear-region counts of one ReLU layer")
    s.add_argument("--arch", choices=list(rg.ARCHITECTURES) + ["all"], default="all")
    s.add_argument("--complex", default="triangle",
                   help=f"complex JSON file or one of {sorted(NAMED_COMPLEXES)}")
    s.add_argument("--d", type=int, nargs="+", default=[1], help="input width per dimension")
    s.add_argument("--m", type=int, default=3, help="output width")
    s.add_argument("--mode", choices=["whitney", "bound", "slice"], default="whitney")
    s.add_argument("--operator", choices=["shifted", "hodge", "identity"], default="shifted")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--resolution", type=int, default=128)
    s.add_argument("--extent", type=float, default=1.0)
    s.add_argument("--through-origin", action="store_true", help="slice plane through the origin")
    s.set_defaults(func=cmd_regions)

    flow = sub.add_parser("flow", help="trajectory-classification benchmark")
    fsub = flow.add_subparsers(dest="flow_command", required=True)
    s = fsub.add_parser("gen", parents=[common], help="generate a dataset")
    s.add_argument("--points", type=int, default=300)
    s.add_argument("--train", type=int, default=200)
    s.add_argument("--test", type=int, default=50)
    s.add_argument("--greedy-prob", type=float, default=0.9)
    s.add_argument("--canonical-test", action="store_true", help="keep test orientations canonical")
    s.set_defaults(func=cmd_flow_gen)
    s = fsub.add_parser("train", parents=[common], help="train a model over several seeds")
    s.add_argument("--data", required=True)
    s.add_argument("--model", choices=FLOW_MODELS, default="mpsn-tanh")
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--hidden", type=int, default=32)
    s.add_argument("--layers", type=int, default=3)
    s.add_argument("--epochs", type=int, default=60)
    s.add_argument("--batch-size", type=int, default=16)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--lr-step", type=int, default=20)
    s.add_argument("--lr-factor", type=float, default=0.5)
    s.add_argument("--eval-every", type=int, default=0, help="0 evaluates only after the last epoch")
    s.set_defaults(func=cmd_flow_train)
    return p


ERRORS = (CLIError, Graph6Error, ComplexError, rg.CapacityError, TrainingDiverged, KeyError, ValueError,
          OSError, RuntimeError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "flow_command", None):
        args.command = f"flow {args.flow_command}"
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ERRORS as exc:
        err = {"error": type(exc).__name__, "message": str(exc).strip("'\"")}
        for attr in ("line", "offset"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
