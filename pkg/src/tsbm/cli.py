"""Command line: ``tsbm fit | simulate | eval | bench``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench
from .core import Priors, relabel_contiguous
from .evaluation import ari, confusion
from .greedy import FitConfig, fit
from .io import (
    ParseError,
    dump_json,
    file_digest,
    read_aggregated_csv,
    read_labels,
    read_stream_csv,
    write_aggregated_csv,
    write_partition,
)
from .simulate import PlantedModel, sample_planted, scenario1_model, scenario2, scenario2_model

log = logging.getLogger("tsbm")

INIT_NAMES = {"singletons": "singletons", "random": "random", "hier": "hierarchical"}


class Manifest:
    """Run record written next to every command's outputs."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.data = {
            "command": command,
            "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
            "seed": getattr(args, "seed", None),
            "input_digest": {},
            "outputs": [],
            "wall_time_s": {},
        }
        self._t = time.perf_counter()

    def phase(self, name: str) -> None:
        now = time.perf_counter()
        self.data["wall_time_s"][name] = round(now - self._t, 6)
        self._t = now

    def output(self, path) -> None:
        self.data["outputs"].append(str(path))

    def write(self, path) -> None:
        dump_json(self.data, path)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=["A", "B", "C", "best"], default="A")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--init", choices=sorted(INIT_NAMES), default="hier")
    p.add_argument("--kmax", type=int, default=None, help="default ceil(N/2)")
    p.add_argument("--dmax", type=int, default=None, help="default ceil(U/2)")
    p.add_argument("--alpha", type=float, default=1.0, help="Dirichlet concentration on node weights")
    p.add_argument("--gamma-prior", type=float, default=1.0, help="Dirichlet concentration on interval weights")
    p.add_argument("--a", type=float, default=1.0, help="Gamma prior shape")
    p.add_argument("--b", type=float, default=1.0, help="Gamma prior rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)


def _config(args) -> FitConfig:
    return FitConfig(
        strategy=args.strategy,
        init=INIT_NAMES[args.init],
        K_max=args.kmax,
        D_max=args.dmax,
        restarts=args.restarts,
        seed=args.seed,
        priors=Priors(args.a, args.b, args.alpha, args.gamma_prior),
        jobs=args.jobs,
    )


def cmd_fit(args) -> int:
    man = Manifest("fit", args)
    if args.format == "stream":
        if args.delta is None or args.horizon is None:
            raise SystemExit("--format stream needs --delta and --horizon")
        tensor = read_stream_csv(args.input, args.delta, args.horizon, args.n_nodes)
    else:
        tensor = read_aggregated_csv(args.input, args.n_nodes, args.n_intervals)
    man.data["input_digest"][str(args.input)] = file_digest(args.input)
    man.phase("load")
    log.info("loaded N=%d U=%d nnz=%d total=%d", tensor.n_nodes, tensor.n_intervals, tensor.nnz, tensor.total)

    cfg = _config(args)
    res = fit(tensor, cfg)
    man.phase("fit")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_partition(res.partition, out / "partition.json")
    summary = {
        "icl": res.icl.value,
        "block_term": res.icl.block_term,
        "label_term": res.icl.label_term,
        "K": res.partition.K,
        "D": res.partition.D,
        "strategy": res.strategy,
        "restart_index": res.restart_index,
        "restart_icls": res.restart_icls,
        "strategy_icls": res.strategy_icls,
        "n_moves": len(res.trace),
        "N": tensor.n_nodes,
        "U": tensor.n_intervals,
    }
    dump_json(summary, out / "result.json")
    with open(out / "time_clusters.csv", "w") as fh:
        fh.write("interval,cluster\n")
        fh.writelines(f"{u},{d}\n" for u, d in enumerate(res.partition.interval_labels.tolist()))
    for name in ("partition.json", "result.json", "time_clusters.csv"):
        man.output(out / name)
    man.phase("write")
    man.write(out / "manifest.json")
    print(f"ICL {res.icl.value:.6f}  K={res.partition.K}  D={res.partition.D}  strategy={res.strategy}")
    print("restart ICLs: " + " ".join(f"{v:.6f}" for v in res.restart_icls))
    return 0


def _grid(text, default):
    return _floats(text) if text else [default]


def cmd_simulate(args) -> int:
    man = Manifest("simulate", args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.scenario == "1":
        models = [
            (f"scenario1_psi{psi:g}_gamma{g:g}", scenario1_model(psi, g, args.N or 50, args.U or 50))
            for psi in _grid(args.psi, 2.0)
            for g in _grid(args.gamma, 1.0)
        ]
    elif args.scenario == "2":
        models = [("scenario2", scenario2_model(args.N or 50, args.U or 100))]
    else:
        if not args.model:
            raise SystemExit("--scenario custom needs --model JSON")
        with open(args.model) as fh:
            models = [("custom", PlantedModel.from_dict(json.load(fh)))]
        man.data["input_digest"][str(args.model)] = file_digest(args.model)
    for tag, model in models:
        for g in range(args.n_graphs):
            seed = [args.seed, g]
            if args.scenario == "2":
                tensor, c, y = scenario2(model.N, model.U, seed, fixed_balanced_y=args.fixed_y)
            else:
                tensor, c, y = sample_planted(model, seed)
            stem = out / f"{tag}_g{g:03d}"
            write_aggregated_csv(tensor, f"{stem}.csv")
            truth = {
                "node_labels": c.tolist(),
                "interval_labels": y.tolist(),
                "K": int(relabel_contiguous(c).max()) + 1,
                "D": int(relabel_contiguous(y).max()) + 1,
                "seed": seed,
                "model": model.to_dict(),
            }
            dump_json(truth, f"{stem}.truth.json")
            man.output(f"{stem}.csv")
            man.output(f"{stem}.truth.json")
    man.phase("simulate")
    man.write(out / "manifest.json")
    print(f"wrote {len(models) * args.n_graphs} graphs to {out}")
    return 0


def cmd_eval(args) -> int:
    c_hat, y_hat = read_labels(args.pred)
    c, y = read_labels(args.truth)
    report = {"ari_c": ari(c_hat, c), "ari_y": ari(y_hat, y)}
    print(f"ARI nodes     {report['ari_c']:.6f}")
    print(f"ARI intervals {report['ari_y']:.6f}")
    for name, a, b in (("nodes", c_hat, c), ("intervals", y_hat, y)):
        table = confusion(a, b)
        report[f"confusion_{name}"] = table.tolist()
        print(f"confusion ({name}: rows predicted, columns truth)")
        print(np.array2string(table))
    if args.out:
        dump_json(report, args.out)
    return 0


def cmd_bench(args) -> int:
    man = Manifest("bench", args)
    p = bench.BenchParams(
        suite=args.suite,
        replicates=args.replicates,
        restarts=args.restarts,
        strategy=args.strategy,
        init=INIT_NAMES[args.init],
        seed=args.seed,
        jobs=args.jobs,
        timing=args.timing,
        psi=_floats(args.psi) if args.psi else (),
        gamma=_floats(args.gamma) if args.gamma else (),
        N=args.N,
        U=args.U,
        fixed_y=not args.random_y,
        baseline=not args.no_baseline,
    )
    rows = bench.run_suite(p)
    man.phase("run")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    bench.write_rows(rows, out, append=args.append)
    summary = bench.summarize(rows)
    summary_path = out.with_name(out.stem + "_summary.csv")
    bench.write_rows(summary, summary_path, header=list(summary[0]) if summary else [])
    man.output(out)
    man.output(summary_path)
    man.phase("write")
    man.data["params"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(p).items()}
    man.write(out.with_name(out.stem + "_manifest.json"))
    for r in summary:
        print(f"{r['params']:<32} {r['strategy']:<6} n={r['n']:<3} mean ICL {float(r['mean_icl']):.2f}  "
              f"median ARI_c {float(r['median_ari_c']):.3f}  median ARI_y {float(r['median_ari_y']):.3f}")
    if args.suite == "strategies":
        print(bench.strategy_table(summary))
    if args.suite == "scaling":
        print(bench.scaling_report(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsbm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="cluster nodes and intervals of a dynamic graph")
    p.add_argument("input")
    p.add_argument("--format", choices=["aggregated", "stream"], default="aggregated")
    p.add_argument("--delta", type=float, help="interval width in seconds (stream format)")
    p.add_argument("--horizon", type=float, help="observation horizon T in seconds (stream format)")
    p.add_argument("--n-nodes", type=int, default=None, help="default: max node id + 1")
    p.add_argument("--n-intervals", type=int, default=None, help="default: max interval + 1")
    _add_fit_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="sample planted dynamic graphs")
    p.add_argument("--scenario", choices=["1", "2", "custom"], required=True)
    p.add_argument("--psi", help="comma-separated grid (scenario 1)")
    p.add_argument("--gamma", help="comma-separated contrast grid (scenario 1)")
    p.add_argument("--N", type=int)
    p.add_argument("--U", type=int)
    p.add_argument("--fixed-y", action="store_true", help="scenario 2: exactly U/2 intervals per time cluster")
    p.add_argument("--model", help="custom model JSON (N, U, node_weights, time_weights, rates)")
    p.add_argument("--n-graphs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="ARI and confusion tables of a fit against ground truth")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--out", help="optional JSON report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="replicate experiments, results CSV")
    p.add_argument("--suite", choices=bench.SUITES, required=True)
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--psi", help="comma-separated grid")
    p.add_argument("--gamma", help="comma-separated contrast grid")
    p.add_argument("--N", type=int)
    p.add_argument("--U", type=int)
    p.add_argument("--random-y", action="store_true", help="scenario 2: draw interval labels instead of fixing U/2 per cluster")
    p.add_argument("--no-baseline", action="store_true", help="skip the time-aggregated static fit")
    p.add_argument("--timing", action="store_true", help="record wall_ms (always on for the scaling suite)")
    p.add_argument("--append", action="store_true", help="append rows to an existing results CSV")
    _add_fit_flags(p)
    p.add_argument("--out", required=True, help="results CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
