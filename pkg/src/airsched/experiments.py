"""Experiment harness: spec files, Monte-Carlo drivers, CSV emission.

An experiment is described by a small TOML file (or an ExperimentSpec
built in code), runs as a grid of cells (one per swept parameter value)
times ``trials`` Monte-Carlo repetitions, and lands in a flat CSV with a
fixed header. Every cell and trial derives its own child generator from
the master seed through a SeedSequence spawn key, with one fixed lane
per consumer (channel draw, each scheduler variant, data generation), so
results are reproducible regardless of which variants run, in what
order, or across how many worker processes.

Timing rows wrap the scheduler call alone; for the ota-fl kind, which
interleaves scheduling with aggregation, the row times the whole
simulation and says so in the README. Runtime columns are the only
non-deterministic ones.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .channel import IidChannelModel, RicianNetworkModel
from .coordination import gamma_from_db
from .fedavg import FlConfig, make_linear_dataset, partition_heterogeneous, run_ota_fl
from .irs import IidIrsModelSampler, IrsChannelModel, schedule_mp_tuned
from .scheduling import (
    exhaustive_oracle,
    schedule_mp,
    schedule_mp_bidirectional,
    schedule_random,
)

CSV_HEADER = "experiment,variant,gamma_db,delta,K,N,M,trial,mean_S,std_S,runtime_s,extra1,extra2"
TRACE_HEADER = "gamma_db,trial,round,n_scheduled,test_loss,zeta"

KINDS = (
    "delta-sweep",
    "gamma-sweep",
    "rician-gamma-sweep",
    "runtime-scaling",
    "oracle-compare",
    "ota-fl",
)

VARIANTS = ("mp", "mp-bidir", "random", "oracle", "mp-tuned")

# Fixed sub-stream lanes per consumer. Names, not positions in the
# requested variant list, so dropping a variant never shifts another
# variant's random draws.
_LANES = {
    "channel": 0,
    "mp": 1,
    "mp-bidir": 2,
    "random": 3,
    "oracle": 4,
    "mp-tuned": 5,
    "data": 6,
}

AGGREGATE_TRIAL = -1
WARMUP_TRIALS = 3


class SpecError(ValueError):
    """Invalid experiment spec; ``fields`` names the offending keys."""

    def __init__(self, problems):
        self.problems = list(problems)
        self.fields = [name for name, _ in self.problems]
        super().__init__("; ".join(f"{name}: {msg}" for name, msg in self.problems))


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment run."""

    kind: str
    name: str = ""
    channel: str = "iid"
    k: int = 20
    n: int = 6
    m: int = 0
    gamma_db: tuple = (5.0,)
    delta: tuple = (0.05,)
    trials: int = 100
    seed: int = 0
    variants: tuple = ("mp",)
    # runtime-scaling grids
    k_grid: tuple = ()
    n_grid: tuple = ()
    # oracle-compare
    n_candidates: int = 16
    # Rician geometry
    r_in: float = 10.0
    r_out: float = 100.0
    kappa_db: float = 3.0
    alpha: float = 3.0
    spread_lo_deg: float = 12.0
    spread_hi_deg: float = 15.0
    spacing: float = 0.5
    # ota-fl
    rounds: int = 5
    n_samples: int = 4000
    n_test: int = 500
    n_features: int = 25
    data_noise_std: float = 1.0
    eps0: float = 24.0
    eps1: float = 40.0
    noise_var: float = 1.0
    power: float = 1.0
    ridge: float = 1e-9

    @property
    def label(self) -> str:
        return self.name or self.kind

    @classmethod
    def from_mapping(cls, mapping) -> "ExperimentSpec":
        """Build a spec from a parsed TOML table; unknown keys error."""
        known = {f.name for f in fields(cls)}
        problems = [(key, "unknown field") for key in mapping if key not in known]
        if problems:
            raise SpecError(problems)
        if "kind" not in mapping:
            raise SpecError([("kind", "required")])
        values = dict(mapping)
        for key in ("gamma_db", "delta", "variants", "k_grid", "n_grid"):
            if key in values:
                v = values[key]
                if isinstance(v, (list, tuple)):
                    values[key] = tuple(v)
                else:
                    values[key] = (v,)
        spec = cls(**values)
        spec.validate()
        return spec

    def validate(self) -> None:
        """Raise SpecError listing every offending field."""
        problems = []
        if self.kind not in KINDS:
            problems.append(("kind", f"must be one of {KINDS}, got {self.kind!r}"))
        if self.channel not in ("iid", "rician"):
            problems.append(("channel", f"must be 'iid' or 'rician', got {self.channel!r}"))
        if "," in self.label or "\n" in self.label:
            problems.append(("name", "must not contain commas or newlines"))
        if self.k < 1:
            problems.append(("k", "must be at least 1"))
        if self.n < 1:
            problems.append(("n", "must be at least 1"))
        if self.m < 0:
            problems.append(("m", "must be non-negative"))
        if self.trials < 1:
            problems.append(("trials", "must be at least 1"))
        if not self.gamma_db:
            problems.append(("gamma_db", "must be non-empty"))
        if not self.delta:
            problems.append(("delta", "must be non-empty"))
        if not all(0.0 < d < 1.0 for d in self.delta):
            problems.append(("delta", "entries must lie strictly inside (0, 1)"))
        if not self.variants:
            problems.append(("variants", "must be non-empty"))
        unknown = [v for v in self.variants if v not in VARIANTS]
        if unknown:
            problems.append(("variants", f"unknown variants {unknown}"))

        if self.kind == "delta-sweep" and len(self.gamma_db) != 1:
            problems.append(("gamma_db", "delta-sweep takes a single gamma_db"))
        if self.kind in ("gamma-sweep", "rician-gamma-sweep", "oracle-compare", "ota-fl") \
                and len(self.delta) != 1:
            problems.append(("delta", f"{self.kind} takes a single delta"))
        if self.kind == "runtime-scaling":
            if not self.k_grid:
                problems.append(("k_grid", "required for runtime-scaling"))
            if not self.n_grid:
                problems.append(("n_grid", "required for runtime-scaling"))
            if self.trials <= WARMUP_TRIALS:
                problems.append(("trials", f"runtime-scaling needs more than {WARMUP_TRIALS} trials"))
            if len(self.gamma_db) != 1 or len(self.delta) != 1:
                problems.append(("gamma_db", "runtime-scaling takes single gamma_db and delta"))
            if "oracle" in self.variants and any(k > 12 for k in self.k_grid):
                problems.append(("variants", "oracle is limited to 12 devices"))
        if self.kind == "oracle-compare":
            if self.k > 12:
                problems.append(("k", "oracle-compare is limited to 12 devices"))
            if "oracle" not in self.variants:
                problems.append(("variants", "oracle-compare requires the 'oracle' variant"))
        if self.kind == "ota-fl":
            bad = [v for v in self.variants if v in ("oracle", "mp-tuned")]
            if bad:
                problems.append(("variants", f"ota-fl does not support {bad}"))
            if self.rounds < 1:
                problems.append(("rounds", "must be at least 1"))
            if not 0 < self.eps0 < self.eps1:
                problems.append(("eps0", "need 0 < eps0 < eps1"))
            if min(self.n_samples, self.n_test, self.n_features) < 1:
                problems.append(("n_samples", "dataset dimensions must be positive"))
            elif 0 < self.eps0 < self.eps1:
                # Mean provisional partition total; leave headroom so the
                # floored draws stay under budget for every seed.
                mean_total = (self.n_samples / 2 + self.k * self.eps1 / 4
                              + self.k * (self.eps0 + self.eps1) / 4)
                if mean_total > 0.9 * self.n_samples:
                    problems.append(
                        ("eps1", "partition draws average "
                         f"{mean_total:.0f} of {self.n_samples} samples; "
                         "shrink eps0/eps1 or raise n_samples"))
        if "mp-tuned" in self.variants and self.kind in ("runtime-scaling", "oracle-compare"):
            problems.append(("variants", f"mp-tuned is not supported in {self.kind}"))
        if problems:
            raise SpecError(problems)


@dataclass(frozen=True)
class ResultRow:
    """One CSV row; ``trial`` is -1 for aggregates."""

    experiment: str
    variant: str
    gamma_db: float
    delta: float
    k: int
    n: int
    m: int
    trial: int
    mean_s: float
    std_s: float
    runtime_s: float
    extra1: float
    extra2: float

    def to_csv(self) -> str:
        return ",".join((
            self.experiment,
            self.variant,
            repr(float(self.gamma_db)),
            repr(float(self.delta)),
            str(int(self.k)),
            str(int(self.n)),
            str(int(self.m)),
            str(int(self.trial)),
            repr(float(self.mean_s)),
            repr(float(self.std_s)),
            repr(float(self.runtime_s)),
            repr(float(self.extra1)),
            repr(float(self.extra2)),
        ))


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    rows: tuple
    trace_rows: tuple = ()


def child_rng(seed: int, cell: int, trial: int, lane: str) -> np.random.Generator:
    """Dedicated generator for one (cell, trial, consumer) triple."""
    key = (cell, trial, _LANES[lane])
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _channel_sampler(spec: ExperimentSpec, k: int | None = None, n: int | None = None):
    k = spec.k if k is None else k
    n = spec.n if n is None else n
    channel = "rician" if spec.kind == "rician-gamma-sweep" else spec.channel
    if channel == "rician":
        return RicianNetworkModel(
            n_antennas=n, n_devices=k, r_in=spec.r_in, r_out=spec.r_out,
            kappa_db=spec.kappa_db, spacing=spec.spacing, alpha=spec.alpha,
            spread_lo_deg=spec.spread_lo_deg, spread_hi_deg=spec.spread_hi_deg,
        )
    return IidChannelModel(n_antennas=n, n_devices=k)


def _time_variant(variant, h, model, gamma, delta, n_candidates, rng):
    """Run one scheduler variant and time just that call."""
    if variant == "mp":
        t0 = time.perf_counter()
        out = schedule_mp(h, None, gamma, policy=delta)
        return out, time.perf_counter() - t0
    if variant == "mp-bidir":
        t0 = time.perf_counter()
        out = schedule_mp_bidirectional(h, None, gamma, policy=delta)
        return out, time.perf_counter() - t0
    if variant == "random":
        t0 = time.perf_counter()
        out = schedule_random(h, None, gamma, rng=rng, policy=delta)
        return out, time.perf_counter() - t0
    if variant == "oracle":
        t0 = time.perf_counter()
        out = exhaustive_oracle(h, None, gamma, n_candidates=n_candidates, rng=rng)
        return out, time.perf_counter() - t0
    if variant == "mp-tuned":
        t0 = time.perf_counter()
        out, _ = schedule_mp_tuned(model, None, gamma, policy=delta)
        return out, time.perf_counter() - t0
    raise ValueError(f"unknown variant {variant!r}")


def _sweep_cells(spec: ExperimentSpec):
    if spec.kind == "delta-sweep":
        return [(spec.gamma_db[0], d) for d in spec.delta]
    return [(g, spec.delta[0]) for g in spec.gamma_db]


def _aggregate(values) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def _run_sweep_cell(spec: ExperimentSpec, cell_index: int):
    gamma_db, delta = _sweep_cells(spec)[cell_index]
    gamma = gamma_from_db(gamma_db)
    sampler = _channel_sampler(spec)
    irs_sampler = None
    if "mp-tuned" in spec.variants and spec.m > 0:
        irs_sampler = IidIrsModelSampler(spec.n, spec.k, spec.m)

    per_variant = {v: [] for v in spec.variants}
    rows = []
    for trial in range(spec.trials):
        if irs_sampler is not None:
            model = irs_sampler.sample(child_rng(spec.seed, cell_index, trial, "channel"))
            h = model.direct
        else:
            h = sampler.sample(child_rng(spec.seed, cell_index, trial, "channel"))
            model = IrsChannelModel(
                direct=h,
                ps_to_irs=np.zeros((h.shape[0], 0), dtype=np.complex128),
                cascades=np.zeros((0, h.shape[1]), dtype=np.complex128),
            ) if "mp-tuned" in spec.variants else None
        for variant in spec.variants:
            rng = child_rng(spec.seed, cell_index, trial, variant)
            out, dt = _time_variant(variant, h, model, gamma, delta,
                                    spec.n_candidates, rng)
            per_variant[variant].append((out.size, dt, out.iterations, out.is_empty))
            rows.append(ResultRow(
                spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
                trial, float(out.size), float("nan"), dt,
                float(out.iterations), 1.0 if out.is_empty else 0.0,
            ))
    for variant in spec.variants:
        sizes = [s for s, _, _, _ in per_variant[variant]]
        times = [t for _, t, _, _ in per_variant[variant]]
        iters = [i for _, _, i, _ in per_variant[variant]]
        empties = [e for _, _, _, e in per_variant[variant]]
        mean_s, std_s = _aggregate(sizes)
        rows.append(ResultRow(
            spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
            AGGREGATE_TRIAL, mean_s, std_s, float(np.mean(times)),
            float(np.mean(iters)), float(np.mean(empties)),
        ))
    return rows, []


def _run_oracle_cell(spec: ExperimentSpec, cell_index: int):
    gamma_db = spec.gamma_db[cell_index]
    delta = spec.delta[0]
    gamma = gamma_from_db(gamma_db)
    sampler = _channel_sampler(spec)
    per_variant = {v: [] for v in spec.variants}
    rows = []
    for trial in range(spec.trials):
        h = sampler.sample(child_rng(spec.seed, cell_index, trial, "channel"))
        outcomes = {}
        timings = {}
        for variant in spec.variants:
            rng = child_rng(spec.seed, cell_index, trial, variant)
            outcomes[variant], timings[variant] = _time_variant(
                variant, h, None, gamma, delta, spec.n_candidates, rng)
        oracle_size = outcomes["oracle"].size
        for variant in spec.variants:
            size = outcomes[variant].size
            gap = float(oracle_size - size)
            rows.append(ResultRow(
                spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
                trial, float(size), float("nan"), timings[variant],
                gap, 1.0 if size == oracle_size else 0.0,
            ))
            per_variant[variant].append((size, timings[variant], gap))
    for variant in spec.variants:
        sizes = [s for s, _, _ in per_variant[variant]]
        times = [t for _, t, _ in per_variant[variant]]
        gaps = [g for _, _, g in per_variant[variant]]
        mean_s, std_s = _aggregate(sizes)
        rows.append(ResultRow(
            spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
            AGGREGATE_TRIAL, mean_s, std_s, float(np.mean(times)),
            float(np.mean(gaps)),
            float(np.mean([1.0 if g == 0.0 else 0.0 for g in gaps])),
        ))
    return rows, []


def _run_runtime_cell(spec: ExperimentSpec, cell_index: int):
    cells = list(itertools.product(spec.k_grid, spec.n_grid))
    k, n = cells[cell_index]
    gamma_db, delta = spec.gamma_db[0], spec.delta[0]
    gamma = gamma_from_db(gamma_db)
    sampler = _channel_sampler(spec, k=k, n=n)
    per_variant = {v: [] for v in spec.variants}
    rows = []
    for trial in range(spec.trials):
        h = sampler.sample(child_rng(spec.seed, cell_index, trial, "channel"))
        for variant in spec.variants:
            rng = child_rng(spec.seed, cell_index, trial, variant)
            out, dt = _time_variant(variant, h, None, gamma, delta,
                                    spec.n_candidates, rng)
            warm = trial < WARMUP_TRIALS
            per_variant[variant].append((out.size, dt, warm))
            rows.append(ResultRow(
                spec.label, variant, gamma_db, delta, k, n, spec.m,
                trial, float(out.size), float("nan"), dt,
                float(out.iterations), 1.0 if warm else 0.0,
            ))
    for variant in spec.variants:
        sizes = [s for s, _, _ in per_variant[variant]]
        timed = [t for _, t, warm in per_variant[variant] if not warm]
        mean_s, std_s = _aggregate(sizes)
        rows.append(ResultRow(
            spec.label, variant, gamma_db, delta, k, n, spec.m,
            AGGREGATE_TRIAL, mean_s, std_s, float(np.mean(timed)),
            float(np.median(timed)), 0.0,
        ))
    return rows, []


def _run_ota_cell(spec: ExperimentSpec, cell_index: int):
    gamma_db = spec.gamma_db[cell_index]
    delta = spec.delta[0]
    gamma = gamma_from_db(gamma_db)
    sampler = _channel_sampler(spec)
    per_variant = {v: [] for v in spec.variants}
    rows, trace_rows = [], []
    for trial in range(spec.trials):
        data_rng = child_rng(spec.seed, cell_index, trial, "data")
        coef = data_rng.standard_normal(spec.n_features)
        train = make_linear_dataset(spec.n_samples, coef, spec.data_noise_std, data_rng)
        test = make_linear_dataset(spec.n_test, coef, spec.data_noise_std, data_rng)
        partition = partition_heterogeneous(spec.n_samples, spec.k, spec.eps0,
                                            spec.eps1, data_rng)
        for variant in spec.variants:
            cfg = FlConfig(rounds=spec.rounds, gamma=gamma, delta=delta,
                           power=spec.power, noise_var=spec.noise_var,
                           ridge=spec.ridge, variant=variant)
            chan_rng = child_rng(spec.seed, cell_index, trial, "channel")
            sched_rng = child_rng(spec.seed, cell_index, trial, variant) \
                if variant == "random" else None
            t0 = time.perf_counter()
            tr = run_ota_fl(train, test, partition, sampler, cfg, chan_rng,
                            scheduler_rng=sched_rng)
            dt = time.perf_counter() - t0
            sizes = [r.n_scheduled for r in tr.rounds]
            effs = [r.efficiency for r in tr.rounds]
            rows.append(ResultRow(
                spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
                trial, float(np.mean(sizes)), float(np.std(sizes)), dt,
                float(np.mean(effs)), tr.final_loss,
            ))
            per_variant[variant].append((float(np.mean(sizes)), dt,
                                         float(np.mean(effs)), tr.final_loss))
            for rec in tr.rounds:
                trace_rows.append((gamma_db, trial, rec.round_index,
                                   rec.n_scheduled, rec.test_loss, rec.efficiency))
    for variant in spec.variants:
        sizes = [s for s, _, _, _ in per_variant[variant]]
        times = [t for _, t, _, _ in per_variant[variant]]
        effs = [e for _, _, e, _ in per_variant[variant]]
        losses = [l for _, _, _, l in per_variant[variant]]
        mean_s, std_s = _aggregate(sizes)
        rows.append(ResultRow(
            spec.label, variant, gamma_db, delta, spec.k, spec.n, spec.m,
            AGGREGATE_TRIAL, mean_s, std_s, float(np.mean(times)),
            float(np.mean(effs)), float(np.mean(losses)),
        ))
    return rows, trace_rows


def _cell_count(spec: ExperimentSpec) -> int:
    if spec.kind == "runtime-scaling":
        return len(spec.k_grid) * len(spec.n_grid)
    if spec.kind == "delta-sweep":
        return len(spec.delta)
    return len(spec.gamma_db)


def _run_cell(spec: ExperimentSpec, cell_index: int):
    if spec.kind in ("gamma-sweep", "rician-gamma-sweep", "delta-sweep"):
        return _run_sweep_cell(spec, cell_index)
    if spec.kind == "oracle-compare":
        return _run_oracle_cell(spec, cell_index)
    if spec.kind == "runtime-scaling":
        return _run_runtime_cell(spec, cell_index)
    if spec.kind == "ota-fl":
        return _run_ota_cell(spec, cell_index)
    raise ValueError(f"unknown kind {spec.kind!r}")


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Run every cell of the experiment and return all rows.

    Cells are independent, so ``threads > 1`` fans them out over a
    process pool; results are concatenated in cell order either way, and
    all columns except the runtime ones are identical across thread
    counts.
    """
    spec.validate()
    n_cells = _cell_count(spec)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads > 1 and n_cells > 1:
        with ProcessPoolExecutor(max_workers=min(threads, n_cells)) as pool:
            results = list(pool.map(_run_cell, itertools.repeat(spec), range(n_cells)))
    else:
        results = [_run_cell(spec, i) for i in range(n_cells)]
    rows = []
    traces = []
    for cell_rows, cell_traces in results:
        rows.extend(cell_rows)
        traces.extend(cell_traces)
    return ExperimentResult(spec=spec, rows=tuple(rows), trace_rows=tuple(traces))


def run_runtime_scaling(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """run_experiment restricted to the runtime-scaling kind."""
    if spec.kind != "runtime-scaling":
        raise SpecError([("kind", "run_runtime_scaling requires kind='runtime-scaling'")])
    return run_experiment(spec, threads=threads)


def emit_csv(result: ExperimentResult, path) -> Path:
    """Write the result table; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER]
    lines.extend(row.to_csv() for row in result.rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_trace_csv(result: ExperimentResult, path) -> Path | None:
    """Write per-round learning traces (ota-fl only); None when absent."""
    if not result.trace_rows:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [TRACE_HEADER]
    for gamma_db, trial, rnd, size, loss, zeta in result.trace_rows:
        lines.append(",".join((
            repr(float(gamma_db)), str(int(trial)), str(int(rnd)),
            str(int(size)), repr(float(loss)), repr(float(zeta)),
        )))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path) -> list:
    """Parse a result CSV back into ResultRow objects."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 13:
            raise ValueError(f"malformed row: {ln!r}")
        rows.append(ResultRow(
            experiment=parts[0], variant=parts[1],
            gamma_db=float(parts[2]), delta=float(parts[3]),
            k=int(parts[4]), n=int(parts[5]), m=int(parts[6]),
            trial=int(parts[7]), mean_s=float(parts[8]), std_s=float(parts[9]),
            runtime_s=float(parts[10]), extra1=float(parts[11]),
            extra2=float(parts[12]),
        ))
    return rows


def emit_plot(result: ExperimentResult, path) -> Path | None:
    """Best-effort summary figure; returns None if plotting is unavailable."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return None
    spec = result.spec
    agg = [r for r in result.rows if r.trial == AGGREGATE_TRIAL]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.kind == "runtime-scaling":
            for variant in spec.variants:
                for n in spec.n_grid:
                    pts = [(r.k, r.extra1) for r in agg
                           if r.variant == variant and r.n == n]
                    pts.sort()
                    ax.loglog([p[0] for p in pts], [p[1] for p in pts],
                              marker="o", label=f"{variant}, N={n}")
            ax.set_xlabel("devices K")
            ax.set_ylabel("median runtime [s]")
        elif spec.kind == "ota-fl":
            for variant in spec.variants:
                pts = [(r.gamma_db, r.extra1) for r in agg if r.variant == variant]
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        marker="o", label=variant)
            ax.set_xlabel("gamma [dB]")
            ax.set_ylabel("mean learning efficiency")
        elif spec.kind == "delta-sweep":
            for variant in spec.variants:
                pts = [(r.delta, r.mean_s) for r in agg if r.variant == variant]
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        marker="o", label=variant)
            ax.set_xlabel("delta")
            ax.set_ylabel("mean scheduled devices")
        else:
            for variant in spec.variants:
                pts = [(r.gamma_db, r.mean_s) for r in agg if r.variant == variant]
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        marker="o", label=variant)
            ax.set_xlabel("gamma [dB]")
            ax.set_ylabel("mean scheduled devices")
        ax.grid(True, alpha=0.3)
        ax.legend()
        ax.set_title(spec.label)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=120, bbox_inches="tight")
        return path
    except Exception:
        return None
    finally:
        plt.close(fig)
