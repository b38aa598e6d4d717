"""Command-line front end: ``tarcfp {tar,compare,unfold,rg,gen,bench}``.

Exit status: 0 on success, 1 on input, cap or class-gate errors, 2 when
exact engines disagree.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import dataclass

from . import bench as benchmod
from .engines import NotOneSafeError, tar_bounded_improved, tar_general, tar_improved, tar_jin
from .formats import ParseError, parse_net, render_net, render_pnml
from .generators import GenerationError, GenOptions, gen_breadth, gen_depth, gen_random_bounded, gen_random_safe
from .net import NetError, NetSystem, is_free_choice
from .reachability import (
    DEFAULT_BOUND_CAP,
    DEFAULT_STATE_CAP,
    CapExceeded,
    UnboundedSuspected,
    build_rg,
    classify,
    tar_from_rg,
)
from .relation import TarRelation
from .unfolding import DEFAULT_EVENT_CAP, EventCapExceeded, Prefix, unfold

log = logging.getLogger("tarcfp")

ENGINE_CHOICES = ("rg", "general", "improved", "bounded-improved", "jin", "all")
FORMATS = ("pairs", "matrix", "json", "dot", "csv")
# engines whose results must coincide; jin is a baseline and only reported
EXACT = ("rg", "general", "improved", "bounded-improved")

EXIT_OK, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    engine: str
    fmt: str | None
    out: str | None
    state_cap: int
    bound_cap: int
    event_cap: int
    fallback: bool

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        inputs = getattr(ns, "inputs", None) or ([ns.input] if getattr(ns, "input", None) else [])
        return cls(ns.command, inputs, ns.engine, ns.format, ns.out, ns.state_cap,
                   ns.bound_cap, ns.event_cap, ns.fallback)


# -- helpers ----------------------------------------------------------------


def _read_system(path: str | None) -> NetSystem:
    if path in (None, "-"):
        return parse_net(sys.stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    return parse_net(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _prefix(system: NetSystem, cfg: RunConfig) -> Prefix:
    try:
        return unfold(system, event_cap=cfg.event_cap, bound_cap=cfg.bound_cap)
    except EventCapExceeded as exc:
        raise CliError(f"unbounded-suspected: {exc}") from None


def _rg(system: NetSystem, cfg: RunConfig):
    try:
        return build_rg(system, state_cap=cfg.state_cap, bound_cap=cfg.bound_cap)
    except CapExceeded as exc:
        tag = "unbounded-suspected" if isinstance(exc, UnboundedSuspected) else exc.reason
        raise CliError(f"{tag}: {exc} ({exc.graph.num_nodes} markings explored)") from None


def run_engine(engine: str, system: NetSystem, cfg: RunConfig, prefix: Prefix | None = None) -> TarRelation:
    if engine == "rg":
        return tar_from_rg(_rg(system, cfg))
    prefix = prefix or _prefix(system, cfg)
    if engine == "general":
        return tar_general(system, prefix)
    if engine == "improved":
        try:
            return tar_improved(system, prefix, fallback=cfg.fallback)
        except NotOneSafeError as exc:
            raise CliError(f"{exc}; pass --fallback to use the general engine") from None
    if engine == "bounded-improved":
        return tar_bounded_improved(system, prefix)
    if engine == "jin":
        if not is_free_choice(system.net):
            log.warning("net is not free-choice; jin may report spurious pairs")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return tar_jin(prefix)
    raise CliError(f"unknown engine {engine!r}")


def _fmt_pairs(rel: TarRelation, pairs) -> str:
    names = rel.net.transitions
    return " ".join(f"({names[a]},{names[b]})" for a, b in sorted(pairs))


def agreement_report(system: NetSystem, cfg: RunConfig) -> tuple[dict, bool]:
    """Run every engine on ``system``; returns the report and whether the
    exact engines agree."""
    results: dict[str, TarRelation | None] = {}
    status: dict[str, str] = {}
    prefix = None
    try:
        prefix = _prefix(system, cfg)
    except CliError as exc:
        prefix_err = str(exc)
    for engine in ENGINE_CHOICES[:-1]:
        if engine != "rg" and prefix is None:
            results[engine], status[engine] = None, prefix_err
            continue
        if engine == "improved" and not prefix.is_one_safe():
            results[engine], status[engine] = None, "skipped: not 1-safe"
            continue
        try:
            results[engine] = run_engine(engine, system, cfg, prefix)
            status[engine] = "ok"
        except CliError as exc:
            results[engine], status[engine] = None, str(exc)

    ref_name = next((e for e in EXACT if results.get(e) is not None), None)
    ref = results.get(ref_name) if ref_name else None
    rows = []
    agree = ref is not None
    for engine in ENGINE_CHOICES[:-1]:
        rel = results[engine]
        row = {"engine": engine, "status": status[engine],
               "pairs": None if rel is None else len(rel)}
        if rel is not None and ref is not None:
            extra = rel.pairs() - ref.pairs()
            missing = ref.pairs() - rel.pairs()
            row["extra"] = _fmt_pairs(rel, extra)
            row["missing"] = _fmt_pairs(rel, missing)
            row["agrees"] = not extra and not missing
            if engine in EXACT and not row["agrees"]:
                agree = False
        rows.append(row)
    report = {
        "reference": ref_name,
        "free_choice": is_free_choice(system.net),
        "engines": rows,
        "pairs": sorted(ref.labelled()) if ref else [],
        "exact_engines_agree": agree,
    }
    return report, agree


def render_report(report: dict, fmt: str | None, label: str = "") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    lines = []
    if label:
        lines.append(f"# {label}")
    w = max(len(r["engine"]) for r in report["engines"])
    ref = report["reference"]
    for r in report["engines"]:
        pairs = "-" if r["pairs"] is None else str(r["pairs"])
        if r["status"] != "ok":
            verdict = r["status"]
        elif r["engine"] == ref:
            verdict = "reference"
        elif r.get("agrees"):
            verdict = f"= {ref}"
        else:
            bits = []
            if r["extra"]:
                bits.append(f"extra {r['extra']}")
            if r["missing"]:
                bits.append(f"missing {r['missing']}")
            verdict = "; ".join(bits)
        lines.append(f"{r['engine'].ljust(w)}  {pairs.rjust(4)} pairs  {verdict}")
    if ref is None:
        lines.append("verdict: no exact engine finished")
    elif report["exact_engines_agree"]:
        lines.append("verdict: exact engines agree")
    else:
        lines.append("verdict: DISAGREEMENT between exact engines")
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------


def cmd_tar(cfg: RunConfig) -> int:
    system = _read_system(cfg.inputs[0] if cfg.inputs else None)
    if cfg.engine == "all":
        report, agree = agreement_report(system, cfg)
        _emit(render_report(report, cfg.fmt), cfg.out)
        if report["reference"] is None:
            return EXIT_ERROR
        return EXIT_OK if agree else EXIT_DISAGREE
    rel = run_engine(cfg.engine, system, cfg)
    if rel.note:
        log.warning(rel.note)
    _emit(rel.render(cfg.fmt or "pairs"), cfg.out)
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    paths = cfg.inputs or ["-"]
    out, code = [], EXIT_OK
    for path in paths:
        system = _read_system(path)
        report, agree = agreement_report(system, cfg)
        if cfg.fmt == "json":
            report["input"] = path
        out.append(render_report(report, cfg.fmt, label=path if len(paths) > 1 else ""))
        if report["reference"] is None:
            code = max(code, EXIT_ERROR)
        elif not agree:
            code = EXIT_DISAGREE
    _emit("".join(out), cfg.out)
    return code


def cmd_unfold(cfg: RunConfig) -> int:
    system = _read_system(cfg.inputs[0] if cfg.inputs else None)
    prefix = _prefix(system, cfg)
    if cfg.fmt == "dot":
        text = prefix.to_dot()
    elif cfg.fmt == "json":
        text = prefix.to_json()
    else:
        stats = prefix.stats()
        stats["one_safe"] = int(prefix.is_one_safe())
        if cfg.fmt == "csv":
            text = ",".join(stats) + "\n" + ",".join(str(v) for v in stats.values()) + "\n"
        else:
            text = "".join(f"{k}: {v}\n" for k, v in stats.items())
            for e in prefix.events:
                if e.cutoff:
                    corr = "initial" if e.corr is None else prefix.event_name(e.corr)
                    text += f"cutoff {prefix.event_name(e.id)} corr {corr}\n"
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_rg(cfg: RunConfig) -> int:
    system = _read_system(cfg.inputs[0] if cfg.inputs else None)
    rg = _rg(system, cfg)
    if cfg.fmt == "dot":
        text = rg.to_dot()
    elif cfg.fmt == "csv":
        text = rg.counts_csv()
    else:
        info = {"nodes": rg.num_nodes, "edges": rg.num_edges,
                "boundedness": str(classify(system, rg)), "max_tokens": rg.max_tokens}
        if cfg.fmt == "json":
            text = json.dumps(info, indent=2) + "\n"
        else:
            text = "".join(f"{k}: {v}\n" for k, v in info.items())
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_gen(cfg: RunConfig, ns: argparse.Namespace) -> int:
    if ns.kind == "breadth":
        system = gen_breadth(ns.n)
    elif ns.kind == "depth":
        system = gen_depth(ns.branches, ns.depth)
    else:
        opts = GenOptions(ns.p_seq, ns.p_xor, ns.p_and, ns.p_nfc, ns.p_loop)
        seed = ns.seed if ns.seed is not None else 0
        if ns.tokens > 1:
            system = gen_random_bounded(seed, ns.max_transitions, opts, tokens=ns.tokens)
        else:
            system = gen_random_safe(seed, ns.max_transitions, opts)
    pnml = ns.pnml or (cfg.out or "").endswith(".pnml")
    _emit(render_pnml(system) if pnml else render_net(system), cfg.out)
    return EXIT_OK


def _span(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO..HI, got {text!r}") from None


def cmd_bench(cfg: RunConfig, ns: argparse.Namespace) -> int:
    if ns.suite == "testA":
        lo, hi = ns.min if ns.min is not None else 2, ns.max if ns.max is not None else 14
    elif ns.suite == "testB":
        lo, hi = ns.min if ns.min is not None else 1, ns.max_depth or ns.max or 8
    else:
        lo, hi = ns.seeds if ns.seeds else (0, 499)
    specs = benchmod.suite_specs(ns.suite, lo, hi, branches=ns.branches,
                                 max_transitions=ns.max_transitions, bounded=ns.bounded)
    if ns.engines:
        engines = tuple(e.strip() for e in ns.engines.split(",") if e.strip())
    elif cfg.engine not in ("all", "improved"):
        engines = ("rg", cfg.engine) if cfg.engine != "rg" else ("rg",)
    elif ns.suite == "corpus" and ns.bounded:
        engines = ("rg", "general", "bounded-improved")
    else:
        engines = ("rg", "general", "improved")
    if cfg.engine == "all" and not ns.engines:
        engines = benchmod.ENGINES
    bad = [e for e in engines if e not in benchmod.ENGINES]
    if bad:
        raise CliError(f"unknown engine(s): {', '.join(bad)}")
    records = benchmod.run_bench(specs, engines, state_cap=cfg.state_cap,
                                 event_cap=cfg.event_cap, jobs=ns.jobs)
    if cfg.out:
        _emit(benchmod.to_csv(records), cfg.out)
    if cfg.fmt == "csv" and not cfg.out:
        sys.stdout.write(benchmod.to_csv(records))
    else:
        sys.stdout.write(benchmod.to_table(records))
        if ns.suite != "corpus":
            for name, fit in benchmod.growth_shape(records).items():
                sys.stdout.write(f"{name} vs parameter: {fit or 'not enough points'}\n")
        sys.stdout.write(benchmod.summary(records))
    # timing and per-row failures are reported, only a wrong answer fails
    exact_bad = [r for r in benchmod.disagreements(records) if r.engine in EXACT]
    return EXIT_DISAGREE if exact_bad else EXIT_OK


# -- argument parsing -------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=FORMATS, default=None, help="output format")
    p.add_argument("--engine", choices=ENGINE_CHOICES, default="improved")
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP, metavar="N")
    p.add_argument("--bound-cap", type=int, default=DEFAULT_BOUND_CAP, metavar="K")
    p.add_argument("--event-cap", type=int, default=DEFAULT_EVENT_CAP, metavar="N")
    p.add_argument("--fallback", action="store_true",
                   help="let the improved engine fall back to general on non-1-safe nets")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", "-o", default=None, metavar="PATH", help="write output here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="tarcfp",
        description="Transition adjacency relations of Petri nets via complete prefix unfoldings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tar", parents=[common], help="compute the TAR of a net")
    p.add_argument("input", nargs="?", help="net file (.net or .pnml); stdin when omitted")

    p = sub.add_parser("compare", parents=[common], help="run every engine and report agreement")
    p.add_argument("inputs", nargs="*", help="net files; stdin when omitted")

    p = sub.add_parser("unfold", parents=[common], help="build the complete prefix")
    p.add_argument("input", nargs="?")

    p = sub.add_parser("rg", parents=[common], help="build the reachability graph")
    p.add_argument("input", nargs="?")

    p = sub.add_parser("gen", help="generate a net")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("breadth", parents=[common])
    g.add_argument("n", type=int)
    g = gsub.add_parser("depth", parents=[common])
    g.add_argument("branches", type=int)
    g.add_argument("depth", type=int)
    g = gsub.add_parser("random", parents=[common])
    g.add_argument("--max-transitions", type=int, default=12)
    g.add_argument("--tokens", type=int, default=1, help="start tokens; above 1 gives a bounded net")
    defaults = GenOptions()
    for name in ("p_seq", "p_xor", "p_and", "p_nfc", "p_loop"):
        g.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(defaults, name))
    for g in gsub.choices.values():
        g.add_argument("--pnml", action="store_true", help="emit PNML")

    p = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    p.add_argument("suite", choices=benchmod.SUITES)
    p.add_argument("--min", type=int, default=None, help="first sweep value")
    p.add_argument("--max", type=int, default=None, help="last sweep value")
    p.add_argument("--branches", type=int, default=5, help="testB branch count")
    p.add_argument("--max-depth", type=int, default=None, help="testB last depth")
    p.add_argument("--seeds", type=_span, default=None, metavar="LO..HI", help="corpus seeds")
    p.add_argument("--max-transitions", type=int, default=12)
    p.add_argument("--bounded", action="store_true", help="corpus of bounded, non-1-safe nets")
    p.add_argument("--engines", default=None, help="comma-separated engine list")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (across nets)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    cfg = RunConfig.from_args(ns)
    try:
        if ns.command == "tar":
            return cmd_tar(cfg)
        if ns.command == "compare":
            return cmd_compare(cfg)
        if ns.command == "unfold":
            return cmd_unfold(cfg)
        if ns.command == "rg":
            return cmd_rg(cfg)
        if ns.command == "gen":
            return cmd_gen(cfg, ns)
        return cmd_bench(cfg, ns)
    except ParseError as exc:
        print(f"error: parse error: {exc}", file=sys.stderr)
    except (CliError, GenerationError, NetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
