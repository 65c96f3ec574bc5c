"""Cartesian parameter sweeps written to CSV."""

from concurrent.futures import ProcessPoolExecutor
import configparser
import csv
from dataclasses import dataclass, field
import itertools
import logging
import math
import os
from pathlib import Path

import numpy as np

from ..models import ModelKind
from ..protocol import configure, truth_grid, worst_case_mse
from ..regimes import RegimeParams
from .ratefit import RatePoint

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "m", "n", "l", "r", "case", "n_ess", "K", "K0", "inner_variant", "trials", "mean_mse", "stderr", "seed",
)


def _ints(text):
    return [int(v) for v in text.replace(",", " ").split()]


@dataclass
class ExperimentConfig:
    model: ModelKind
    r: float
    m: list
    n: list
    l: list
    scales: list = field(default_factory=lambda: [8])  # sieve k values; the worst one is reported
    signs: int = 1  # random sign vectors per scale
    C0: float = None
    eps: object = "auto"
    trials: int = 100
    max_trials: int = 400
    escalate_above: float = 0.15  # stderr / mean that triggers more trials
    seed: int = 0
    paired: bool = False  # reuse trial seeds across tuples (common random numbers)
    c3: float = 4.0
    theory_constants: bool = False
    c_inner: float = 1.0
    variant: str = None
    b_bits: int = None
    output: str = "sweep.csv"

    def __post_init__(self):
        self.model = ModelKind.parse(self.model)
        for name in ("m", "n", "l", "scales"):
            vals = getattr(self, name)
            if not vals or any(v < 1 for v in vals):
                raise ValueError(f"{name} must be a non-empty list of positive integers")
        if self.trials < 2:
            raise ValueError("trials must be at least 2")
        if self.max_trials < self.trials:
            raise ValueError("max_trials must be at least trials")

    @classmethod
    def from_file(cls, path):
        """Read an INI-style file with an [experiment] section."""
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise FileNotFoundError(path)
        return cls.from_mapping(dict(cp["experiment"]))

    @classmethod
    def from_mapping(cls, raw):
        raw = {k.strip().lower(): str(v).strip() for k, v in raw.items()}
        kw = {
            "model": raw.pop("model"),
            "r": float(raw.pop("r")),
            "m": _ints(raw.pop("m")),
            "n": _ints(raw.pop("n")),
            "l": _ints(raw.pop("l")),
        }
        converters = {
            "scales": _ints,
            "signs": int,
            "c0": float,
            "trials": int,
            "max_trials": int,
            "escalate_above": float,
            "seed": int,
            "c3": float,
            "c_inner": float,
            "b_bits": int,
            "variant": str,
            "output": str,
        }
        for key, conv in converters.items():
            if key in raw:
                kw["C0" if key == "c0" else key] = conv(raw.pop(key))
        for key in ("paired", "theory_constants"):
            if key in raw:
                kw[key] = raw.pop(key).lower() in ("1", "true", "yes", "on")
        if "eps" in raw:
            e = raw.pop("eps")
            kw["eps"] = e if e == "auto" else float(e)
        if "k" in raw:
            kw["scales"] = _ints(raw.pop("k"))
        if raw:
            raise ValueError(f"unknown config keys: {sorted(raw)}")
        kw.setdefault("max_trials", max(400, kw.get("trials", 100)))
        return cls(**kw)

    def tuples(self):
        return [RegimeParams(m, n, l, self.r) for m, n, l in itertools.product(self.m, self.n, self.l)]

    def overrides(self):
        ov = {"c3": self.c3, "theory_constants": self.theory_constants, "c_inner": self.c_inner}
        if self.variant:
            ov["variant"] = self.variant
        if self.b_bits is not None:
            ov["inner_params"] = {"b_bits": self.b_bits}
        return ov


def _tuple_seed(cfg, index):
    return np.random.SeedSequence(cfg.seed if cfg.paired else [cfg.seed, index])


def _truths(cfg):
    # the truth grid depends only on the seed, never on the tuple
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x7275]))
    return truth_grid(cfg.model, cfg.r, cfg.scales, rng, cfg.signs, cfg.C0)


def run_point(cfg, index):
    """Evaluate one tuple of the sweep; returns (CSV row dict, RatePoint)."""
    p = cfg.tuples()[index]
    truths = _truths(cfg)
    ov = cfg.overrides()
    seed = _tuple_seed(cfg, index)
    res = worst_case_mse(p, cfg.model, truths, cfg.trials, seed, **ov)
    trials = cfg.trials
    if res.mean_mse > 0 and res.stderr / res.mean_mse > cfg.escalate_above and cfg.max_trials > trials:
        # the first `trials` children of the seed are reused, so escalation only adds trials
        trials = cfg.max_trials
        res = worst_case_mse(p, cfg.model, truths, trials, _tuple_seed(cfg, index), **ov)
    oc = configure(p, cfg.model, **ov)
    row = {
        "m": p.m,
        "n": p.n,
        "l": p.l,
        "r": p.r,
        "case": int(oc.plan.case_id),
        "n_ess": repr(oc.plan.n_ess),
        "K": oc.plan.K,
        "K0": repr(oc.K0),
        "inner_variant": oc.variant.value,
        "trials": trials,
        "mean_mse": repr(res.mean_mse),
        "stderr": repr(res.stderr),
        "seed": cfg.seed,
    }
    return row, RatePoint(p, oc.plan.n_ess, res.mean_mse, res.stderr, oc.plan.case_id)


def _done_keys(path):
    if not path.exists() or path.stat().st_size == 0:
        return {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path} has columns {reader.fieldnames}, expected {list(CSV_COLUMNS)}")
        return {(int(r["m"]), int(r["n"]), int(r["l"])): r for r in reader}


def point_from_row(row):
    from ..regimes import RegimeCase

    p = RegimeParams(int(row["m"]), int(row["n"]), int(row["l"]), float(row["r"]))
    return RatePoint(p, float(row["n_ess"]), float(row["mean_mse"]), float(row["stderr"]), RegimeCase(int(row["case"])))


def read_points(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [point_from_row(r) for r in csv.DictReader(fh)]


def run_sweep(cfg, out=None, threads=1, resume=True):
    """Run every tuple not already in ``out`` and return all RatePoints in tuple order.

    Rows are appended in tuple order as results arrive, so an interrupted
    sweep resumes where it stopped and the file does not depend on
    scheduling.
    """
    path = Path(out or cfg.output)
    done = _done_keys(path) if resume else {}
    if not resume and path.exists():
        path.unlink()
    tuples = cfg.tuples()
    todo = [i for i, p in enumerate(tuples) if (p.m, p.n, p.l) not in done]
    cases = set()
    results = {}

    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\r\n")
        if new_file:
            writer.writeheader()
        pending = iter(todo)
        next_idx = next(pending, None)

        def flush():
            nonlocal next_idx
            while next_idx is not None and next_idx in results:
                writer.writerow(results[next_idx][0])
                fh.flush()
                next_idx = next(pending, None)

        def record(i, outcome):
            results[i] = outcome
            flush()

        try:
            if threads > 1 and len(todo) > 1:
                with ProcessPoolExecutor(max_workers=threads) as pool:
                    futures = {i: pool.submit(run_point, cfg, i) for i in todo}
                    for i in todo:
                        record(i, _result(futures[i], tuples[i]))
            else:
                for i in todo:
                    record(i, _compute(cfg, i, tuples[i]))
        finally:
            flush()

    points = []
    for i, p in enumerate(tuples):
        if i in results:
            points.append(results[i][1])
        else:
            points.append(point_from_row(done[(p.m, p.n, p.l)]))
        cases.add(points[-1].case_id)
    if len(cases) > 1:
        log.warning("sweep crosses regime cases %s; slope fits mix exponents", sorted(int(c) for c in cases))
    return points


def _compute(cfg, i, p):
    try:
        return run_point(cfg, i)
    except Exception as exc:
        raise RuntimeError(f"tuple m={p.m} n={p.n} l={p.l} failed: {exc}") from exc


def _result(future, p):
    try:
        return future.result()
    except Exception as exc:
        raise RuntimeError(f"tuple m={p.m} n={p.n} l={p.l} failed: {exc}") from exc


def crosses_cases(points):
    return len({p.case_id for p in points}) > 1


def default_threads():
    return max(1, min(os.cpu_count() or 1, 8))
