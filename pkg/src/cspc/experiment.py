"""Generate -> sample -> learn -> fit -> evaluate pipeline and the benchmark grid."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .baselines import cliques_to_features, gsmn, pc_undirected
from .benchmark import GeneratorConfig, generate_model, reference_structures
from .data import Dataset
from .features import FeatureSet, Graph
from .independence import TestConfig
from .learner import cspc
from .loglinear import FitConfig, GibbsConfig, LogLinearModel, fit, gibbs_sample
from .metrics import METRIC_COLUMNS, avg_feature_length, flag_feature_length, kl_exact

ALGORITHMS = ("cspc", "pc", "gsmn")
REFERENCES = ("empty", "full", "truth")


def derive_seed(*parts: int) -> int:
    """Stable 32-bit seed from integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def sample_rows(m: LogLinearModel, rows: int, seed: int, chains: int = 10, burn_in: int = 100,
                samples_per_chain: int = 1000) -> Dataset:
    """Exactly ``rows`` rows, taken round-robin from the chains; chains are lengthened
    when ``rows`` exceeds chains * samples_per_chain."""
    if rows < 1:
        raise ValueError("rows must be positive")
    per_chain = max(samples_per_chain, math.ceil(rows / chains))
    d = gibbs_sample(m, GibbsConfig(chains, burn_in, per_chain, seed))
    return Dataset(d.schema, d.rows[:rows])


def learn_structure(algo: str, d: Dataset, cfg: TestConfig = TestConfig()) -> tuple[FeatureSet, Graph | None]:
    if algo == "cspc":
        return cspc(d, cfg), None
    if algo == "pc":
        g = pc_undirected(d, cfg)
    elif algo == "gsmn":
        g = gsmn(d, cfg)
    else:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    return cliques_to_features(g, d.schema), g


def metric_row(seed, n, rows, algorithm, truth: LogLinearModel, learned: LogLinearModel,
               runtime_ms: float | None = None) -> dict:
    flag = truth.schema.n - 1
    fs = learned.features
    return {
        "seed": seed, "n": n, "D": rows, "algorithm": algorithm,
        "kl": f"{kl_exact(truth, learned):.10g}",
        "avg_len": f"{avg_feature_length(fs):.6g}",
        "avg_len_f0": _maybe(flag_feature_length, fs, flag, 0),
        "avg_len_f1": _maybe(flag_feature_length, fs, flag, 1),
        "runtime_ms": "" if runtime_ms is None else f"{runtime_ms:.1f}",
    }


def _maybe(fn, *args) -> str:
    try:
        return f"{fn(*args):.6g}"
    except ValueError:
        return ""


@dataclass(frozen=True)
class Cell:
    n: int
    rows: int
    replica: int
    seed: int
    epsilon: float = 1.0
    test: TestConfig = TestConfig()
    fitting: FitConfig = FitConfig()
    timing: bool = False

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.n, self.rows, self.replica)


def run_cell(cell: Cell) -> tuple[list[dict], list[str]]:
    """All reference structures and learners on one sampled dataset."""
    model_seed = derive_seed(cell.seed, cell.n, cell.replica)
    gen = GeneratorConfig(cell.n, epsilon=cell.epsilon, seed=model_seed)
    truth = generate_model(gen)
    d = sample_rows(truth, cell.rows, derive_seed(model_seed, 1))
    empty, full, true_fs = reference_structures(gen)
    jobs: list[tuple[str, object]] = [("empty", empty), ("full", full), ("truth", true_fs)]
    jobs += [(algo, algo) for algo in ALGORITHMS]
    out, errors = [], []
    for name, spec in jobs:
        start = time.perf_counter()
        try:
            fs = spec if isinstance(spec, FeatureSet) else learn_structure(spec, d, cell.test)[0]
            learned = fit(LogLinearModel.zeros(d.schema, fs), d, cell.fitting)
            elapsed = (time.perf_counter() - start) * 1000 if cell.timing else None
            out.append(metric_row(model_seed, cell.n, cell.rows, name, truth, learned, elapsed))
        except Exception as exc:  # recorded per cell, the grid continues
            errors.append(f"n={cell.n} D={cell.rows} replica={cell.replica} {name}: {exc!r}")
            out.append({"seed": model_seed, "n": cell.n, "D": cell.rows, "algorithm": name,
                        **{c: "" for c in METRIC_COLUMNS[4:]}})
    return out, errors


@dataclass
class BenchResult:
    rows: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def run_bench(n_list: Iterable[int], rows_list: Iterable[int], replicas: int, seed: int,
              jobs: int = 1, **cell_kwargs) -> BenchResult:
    cells = [Cell(n, rows, r, seed, **cell_kwargs)
             for n in n_list for rows in rows_list for r in range(replicas)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]
    res = BenchResult()
    for cell, (rows, errors) in sorted(zip(cells, results), key=lambda t: t[0].key):
        res.rows.extend(rows)
        res.errors.extend(errors)
    return res


def write_metrics(rows: Iterable[dict], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=METRIC_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def summarise(rows: Iterable[dict]) -> list[dict]:
    """Mean and standard deviation of kl and the length metrics per (n, D, algorithm)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((int(r["n"]), int(r["D"]), r["algorithm"]), []).append(r)
    order = {a: i for i, a in enumerate(REFERENCES + ALGORITHMS)}
    out = []
    for (n, D, algo) in sorted(groups, key=lambda k: (k[0], k[1], order.get(k[2], 99), k[2])):
        entry = {"n": n, "D": D, "algorithm": algo}
        for col in ("kl", "avg_len", "avg_len_f0", "avg_len_f1"):
            vals = [float(r[col]) for r in groups[(n, D, algo)] if r[col] != ""]
            entry[col] = f"{np.mean(vals):.6g} ± {np.std(vals):.2g}" if vals else ""
        out.append(entry)
    return out


def format_summary(summary: list[dict]) -> str:
    cols = ["n", "D", "algorithm", "kl", "avg_len", "avg_len_f0", "avg_len_f1"]
    table = [cols] + [[str(s[c]) for c in cols] for s in summary]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table) + "\n"
