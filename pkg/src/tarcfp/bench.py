"""Benchmark harness: parameter sweeps and random corpora, one row per (net, engine)."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

from .engines import NotOneSafeError, tar_bounded_improved, tar_general, tar_improved, tar_jin
from .generators import gen_breadth, gen_depth, gen_random_bounded, gen_random_safe
from .net import NetSystem
from .reachability import DEFAULT_STATE_CAP, CapExceeded, build_rg, tar_from_rg
from .unfolding import EventCapExceeded, unfold

ENGINES = ("rg", "general", "improved", "bounded-improved", "jin")
SUITES = ("testA", "testB", "corpus")

CSV_COLUMNS = (
    "net_id", "generator", "params", "|P|", "|T|", "rg_nodes", "rg_edges", "rg_capped",
    "cfp_conditions", "cfp_events", "cfp_cutoffs", "engine", "time_ms", "pairs_found",
    "co_hits", "mea_hits", "corr_mea_hits", "cut_enum_calls", "status", "agrees_with_rg",
)


@dataclass
class BenchRecord:
    """One engine run on one net.

    ``status`` is ``ok``, ``cap`` (a cap stopped the engine), ``refused``
    (class gate) or ``error``; only ``ok`` rows carry a time.
    ``agrees_with_rg`` is None when the oracle itself did not finish.
    """

    net_id: str
    generator: str
    params: str
    n_places: int
    n_transitions: int
    engine: str
    status: str = "ok"
    time_ms: float | None = None
    rg_nodes: int | None = None
    rg_edges: int | None = None
    rg_capped: bool = False
    cfp_conditions: int | None = None
    cfp_events: int | None = None
    cfp_cutoffs: int | None = None
    pairs_found: int | None = None
    co_hits: int = 0
    mea_hits: int = 0
    corr_mea_hits: int = 0
    cut_enum_calls: int = 0
    agrees_with_rg: bool | None = None
    detail: str = field(default="", compare=False)

    def row(self) -> list[object]:
        def opt(v: object) -> object:
            if v is None:
                return ""
            if isinstance(v, bool):
                return int(v)
            return v

        time_ms = "" if self.time_ms is None else f"{self.time_ms:.3f}"
        return [
            self.net_id, self.generator, self.params, self.n_places, self.n_transitions,
            opt(self.rg_nodes), opt(self.rg_edges), int(self.rg_capped),
            opt(self.cfp_conditions), opt(self.cfp_events), opt(self.cfp_cutoffs),
            self.engine, time_ms, opt(self.pairs_found), self.co_hits, self.mea_hits,
            self.corr_mea_hits, self.cut_enum_calls, self.status, opt(self.agrees_with_rg),
        ]

    def stable(self) -> tuple:
        """Every field except the timing."""
        return tuple(getattr(self, f.name) for f in fields(self) if f.name not in ("time_ms", "detail"))


@dataclass(frozen=True)
class NetSpec:
    """A generator call that can be shipped to a worker process."""

    generator: str
    args: tuple

    @property
    def net_id(self) -> str:
        return f"{self.generator}({','.join(map(str, self.args))})"

    @property
    def params(self) -> str:
        return ";".join(map(str, self.args))

    def build(self) -> NetSystem:
        fn = {
            "breadth": gen_breadth,
            "depth": gen_depth,
            "random-safe": gen_random_safe,
            "random-bounded": gen_random_bounded,
        }[self.generator]
        return fn(*self.args)


def suite_specs(
    suite: str,
    lo: int | None = None,
    hi: int | None = None,
    branches: int = 5,
    max_transitions: int = 12,
    bounded: bool = False,
) -> list[NetSpec]:
    """Nets of a named suite.

    testA sweeps breadth ``lo..hi`` (default 2..14); testB sweeps depth
    ``lo..hi`` (default 1..8) at ``branches``; corpus takes seeds
    ``lo..hi`` (default 0..499).
    """
    if suite == "testA":
        lo, hi = lo if lo is not None else 2, hi if hi is not None else 14
        return [NetSpec("breadth", (n,)) for n in range(lo, hi + 1)]
    if suite == "testB":
        lo, hi = lo if lo is not None else 1, hi if hi is not None else 8
        return [NetSpec("depth", (branches, d)) for d in range(lo, hi + 1)]
    if suite == "corpus":
        lo, hi = lo if lo is not None else 0, hi if hi is not None else 499
        gen = "random-bounded" if bounded else "random-safe"
        return [NetSpec(gen, (s, max_transitions)) for s in range(lo, hi + 1)]
    raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")


def bench_net(
    spec: NetSpec,
    engines: Sequence[str],
    state_cap: int = DEFAULT_STATE_CAP,
    event_cap: int = 100_000,
) -> list[BenchRecord]:
    """Run each engine on one net; failures become status rows."""
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}")
    system = spec.build()
    net = system.net
    base = dict(net_id=spec.net_id, generator=spec.generator, params=spec.params,
                n_places=len(net.places), n_transitions=len(net.transitions))

    # The oracle runs whenever possible so that every row can be checked.
    oracle = None
    rg_info: dict[str, object] = {}
    rg_ms = None
    t0 = time.perf_counter()
    try:
        rg = build_rg(system, state_cap=state_cap)
        oracle = tar_from_rg(rg)
        rg_ms = (time.perf_counter() - t0) * 1000
        rg_info = dict(rg_nodes=rg.num_nodes, rg_edges=rg.num_edges)
    except CapExceeded as exc:
        rg_info = dict(rg_nodes=exc.graph.num_nodes, rg_edges=exc.graph.num_edges, rg_capped=True)
        rg_detail = str(exc)

    prefix = None
    unfold_ms = 0.0
    prefix_info: dict[str, object] = {}
    prefix_detail = ""
    if any(e != "rg" for e in engines):
        t0 = time.perf_counter()
        try:
            prefix = unfold(system, event_cap=event_cap)
            unfold_ms = (time.perf_counter() - t0) * 1000
            prefix_info = dict(cfp_conditions=len(prefix.conditions), cfp_events=len(prefix.events),
                               cfp_cutoffs=prefix.num_cutoffs)
        except EventCapExceeded as exc:
            prefix_detail = str(exc)

    records = []
    for engine in engines:
        rec = BenchRecord(engine=engine, **base, **rg_info, **prefix_info)
        if engine == "rg":
            if oracle is None:
                rec.status, rec.detail = "cap", rg_detail
            else:
                rec.time_ms, rec.pairs_found, rec.agrees_with_rg = rg_ms, len(oracle), True
            records.append(rec)
            continue
        if prefix is None:
            rec.status, rec.detail = "cap", prefix_detail
            records.append(rec)
            continue
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if engine == "general":
                    rel = tar_general(system, prefix)
                elif engine == "improved":
                    rel = tar_improved(system, prefix, fallback=False)
                elif engine == "bounded-improved":
                    rel = tar_bounded_improved(system, prefix)
                else:
                    rel = tar_jin(prefix)
        except NotOneSafeError as exc:
            rec.status, rec.detail = "refused", str(exc)
            records.append(rec)
            continue
        rec.time_ms = unfold_ms + (time.perf_counter() - t0) * 1000
        rec.pairs_found = len(rel)
        s = rel.stats
        rec.co_hits, rec.mea_hits, rec.corr_mea_hits, rec.cut_enum_calls = (
            s.co_hits, s.mea_hits, s.corr_mea_hits, s.cut_enum_calls)
        if oracle is not None:
            rec.agrees_with_rg = rel == oracle
        records.append(rec)
    return records


def _bench_job(args: tuple) -> list[BenchRecord]:
    return bench_net(*args)


def run_bench(
    specs: Iterable[NetSpec],
    engines: Sequence[str] = ("rg", "general", "improved"),
    state_cap: int = DEFAULT_STATE_CAP,
    event_cap: int = 100_000,
    jobs: int = 1,
) -> list[BenchRecord]:
    """Benchmark every net; records come back in input order.

    With ``jobs > 1`` nets are spread over worker processes; engines on one
    net still run one after another.
    """
    jobs_args = [(s, tuple(engines), state_cap, event_cap) for s in specs]
    if jobs <= 1:
        per_net = [_bench_job(a) for a in jobs_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_net = list(pool.map(_bench_job, jobs_args))
    return [r for recs in per_net for r in recs]


# -- output ----------------------------------------------------------------


def to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def to_table(records: Sequence[BenchRecord]) -> str:
    head = ("net", "engine", "status", "ms", "rg_nodes", "events", "cutoffs", "pairs", "cuts", "ok")
    rows = [head]
    for r in records:
        rows.append((
            r.net_id, r.engine, r.status,
            "-" if r.time_ms is None else f"{r.time_ms:.1f}",
            ("" if r.rg_nodes is None else str(r.rg_nodes)) + ("+" if r.rg_capped else ""),
            "" if r.cfp_events is None else str(r.cfp_events),
            "" if r.cfp_cutoffs is None else str(r.cfp_cutoffs),
            "" if r.pairs_found is None else str(r.pairs_found),
            str(r.cut_enum_calls),
            {None: "?", True: "yes", False: "NO"}[r.agrees_with_rg],
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows) + "\n"


def disagreements(records: Iterable[BenchRecord]) -> list[BenchRecord]:
    return [r for r in records if r.agrees_with_rg is False]


@dataclass(frozen=True)
class ShapeFit:
    slope: float
    r2: float
    points: int

    def __str__(self) -> str:
        return f"slope {self.slope:.3f}, r^2 {self.r2:.4f} over {self.points} points"


def _fit(xs: list[float], ys: list[float]) -> ShapeFit | None:
    if len(xs) < 3 or len(set(ys)) < 2:
        return None
    slope, _ = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return ShapeFit(slope, r * r, len(xs))


def growth_shape(records: Sequence[BenchRecord], param_index: int = -1) -> dict[str, ShapeFit | None]:
    """Linear fits of log2(RG nodes) and prefix events against the sweep parameter.

    A good fit of the first means exponential state-space growth; of the
    second, linear prefix growth.  Capped RG rows are left out.
    """
    seen: dict[str, BenchRecord] = {}
    for r in records:
        seen.setdefault(r.net_id, r)
    rg_x, rg_y, ev_x, ev_y = [], [], [], []
    for r in seen.values():
        x = float(r.params.split(";")[param_index])
        if r.rg_nodes and not r.rg_capped:
            rg_x.append(x)
            rg_y.append(math.log2(r.rg_nodes))
        if r.cfp_events is not None:
            ev_x.append(x)
            ev_y.append(float(r.cfp_events))
    return {"log2_rg_nodes": _fit(rg_x, rg_y), "cfp_events": _fit(ev_x, ev_y)}


def summary(records: Sequence[BenchRecord]) -> str:
    bad = disagreements(records)
    status: dict[str, int] = {}
    for r in records:
        status[r.status] = status.get(r.status, 0) + 1
    nets = len({r.net_id for r in records})
    parts = [f"{nets} nets, {len(records)} rows",
             ", ".join(f"{k}={v}" for k, v in sorted(status.items())),
             f"{len(bad)} disagreements"]
    lines = ["; ".join(parts)]
    for r in bad:
        lines.append(f"  disagreement: {r.net_id} engine {r.engine}")
    return "\n".join(lines) + "\n"
