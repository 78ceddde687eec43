"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baselines import CliqueCapError
from .benchmark import GeneratorConfig, generate_model
from .data import DataError, load_dataset, save_dataset
from .experiment import (ALGORITHMS, derive_seed, format_summary, learn_structure, metric_row,
                         run_bench, sample_rows, summarise, write_metrics)
from .independence import TestConfig
from .loglinear import FitConfig, LogLinearModel, NumericError, fit_report, load_model, save_model

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _write_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def cmd_gen(args) -> int:
    if args.n < 3:
        raise UsageError(f"--n must be at least 3, got {args.n}")
    if args.replicas < 1:
        raise UsageError("--replicas must be positive")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for r in range(args.replicas):
        seed = derive_seed(args.seed, args.n, r)
        model = generate_model(GeneratorConfig(args.n, epsilon=args.epsilon, seed=seed))
        name = f"model_n{args.n}_r{r}.json"
        save_model(model, out / name)
        files.append({"replica": r, "seed": seed, "file": name})
    _write_json({"n": args.n, "epsilon": args.epsilon, "seed": args.seed,
                 "replicas": args.replicas, "w2_mean": 0.5, "w2_variance": 0.001,
                 "models": files}, out / "manifest.json")
    print(f"wrote {len(files)} models to {out}")
    return 0


def cmd_sample(args) -> int:
    if args.rows < 1:
        raise UsageError("--rows must be positive")
    model = load_model(args.model)
    d = sample_rows(model, args.rows, args.seed, args.chains, args.burn_in, args.samples_per_chain)
    save_dataset(d, args.out)
    print(f"wrote {len(d)} rows to {args.out}")
    return 0


def cmd_learn(args) -> int:
    d = load_dataset(args.data, args.schema)
    fs, graph = learn_structure(args.algo, d, TestConfig(alpha=args.alpha))
    out = Path(args.out)
    _write_json(LogLinearModel.zeros(d.schema, fs).to_json(), out)
    if graph is not None:
        graph_out = Path(args.graph_out) if args.graph_out else out.with_suffix(".graph.json")
        _write_json(graph.to_json(), graph_out)
        print(f"graph with {len(graph.edges)} edges -> {graph_out}")
    print(f"{len(fs)} features -> {out}")
    return 0


def cmd_fit(args) -> int:
    start = load_model(args.features)
    d = load_dataset(args.data, args.schema)
    if d.schema != start.schema:
        raise DataError("data schema does not match the feature file's schema")
    cfg = FitConfig(max_iterations=args.max_iterations, gradient_tolerance=args.tolerance,
                    method=args.method)
    res = fit_report(start, d, cfg)
    save_model(res.model, args.out)
    print(f"pll={res.pll:.10g} iterations={res.iterations} converged={res.converged}")
    return 0


def cmd_eval(args) -> int:
    truth = load_model(args.true_model)
    learned = load_model(args.learned_model)
    if truth.schema != learned.schema:
        raise DataError("true and learned models have different schemas")
    row = metric_row(args.seed, truth.schema.n, args.rows, args.algorithm, truth, learned)
    text = write_metrics([row], args.metrics_out)
    sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    fitting = FitConfig(method=args.method)
    res = run_bench(args.n_list, args.rows_list, args.replicas, args.seed, jobs=args.jobs,
                    test=TestConfig(alpha=args.alpha), fitting=fitting, timing=args.timing)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics(res.rows, out / "metrics.csv")
    summary = format_summary(summarise(res.rows))
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    if res.errors:
        (out / "errors.txt").write_text("\n".join(res.errors) + "\n", encoding="utf-8")
        print(f"{len(res.errors)} cells failed; see {out / 'errors.txt'}", file=sys.stderr)
    sys.stdout.write(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cspc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate benchmark models")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--epsilon", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--replicas", type=int, default=10)
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="Gibbs-sample a dataset from a model")
    s.add_argument("--model", required=True)
    s.add_argument("--rows", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--chains", type=int, default=10)
    s.add_argument("--burn-in", type=int, default=100)
    s.add_argument("--samples-per-chain", type=int, default=1000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    lr = sub.add_parser("learn", help="learn a structure")
    lr.add_argument("--algo", choices=ALGORITHMS, required=True)
    lr.add_argument("--data", required=True)
    lr.add_argument("--schema", help="schema JSON sidecar; arities are inferred otherwise")
    lr.add_argument("--alpha", type=float, default=0.05)
    lr.add_argument("--out", required=True)
    lr.add_argument("--graph-out")
    lr.set_defaults(func=cmd_learn)

    f = sub.add_parser("fit", help="fit weights by maximum pseudo-likelihood")
    f.add_argument("--features", required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--schema")
    f.add_argument("--out", required=True)
    f.add_argument("--max-iterations", type=int, default=FitConfig.max_iterations)
    f.add_argument("--tolerance", type=float, default=FitConfig.gradient_tolerance)
    f.add_argument("--method", choices=("lbfgs", "gradient"), default=FitConfig.method)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="exact KL and feature-length metrics")
    e.add_argument("--true-model", required=True)
    e.add_argument("--learned-model", required=True)
    e.add_argument("--metrics-out")
    e.add_argument("--algorithm", default="learned")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--rows", type=int, default=0, help="training-set size recorded in the D column")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run the full experiment grid")
    b.add_argument("--n-list", type=_int_list, default=[4, 5, 6])
    b.add_argument("--rows-list", type=_int_list, default=[1000, 3000, 10000])
    b.add_argument("--replicas", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--alpha", type=float, default=0.05)
    b.add_argument("--method", choices=("lbfgs", "gradient"), default=FitConfig.method)
    b.add_argument("--timing", action="store_true", help="fill runtime_ms (makes output run-dependent)")
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cspc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"cspc {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, CliqueCapError, FileNotFoundError, OSError, KeyError, ValueError) as exc:
        print(f"cspc {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
