"""Explicit reachability graphs and the TAR oracle read directly off them."""

from __future__ import annotations

import csv
import io
from array import array
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .net import Marking, NetError, NetSystem
from .relation import TarRelation

DEFAULT_STATE_CAP = 1_000_000
DEFAULT_BOUND_CAP = 64


class CapExceeded(NetError):
    """Exploration stopped early; ``graph`` holds what was explored."""

    reason = "cap"

    def __init__(self, message: str, graph: "ReachabilityGraph") -> None:
        super().__init__(message)
        self.graph = graph


class StateCapExceeded(CapExceeded):
    reason = "state-cap"


class UnboundedSuspected(CapExceeded):
    reason = "bound-cap"


class _Layout:
    """Packs a marking into one int with a fixed-width field per place."""

    def __init__(self, n_places: int, bound_cap: int) -> None:
        self.width = (bound_cap + 1).bit_length()
        self.mask = (1 << self.width) - 1
        self.n_places = n_places

    def encode(self, m: Marking) -> int:
        code = 0
        for p, n in m.items:
            code |= n << (p * self.width)
        return code

    def decode(self, code: int) -> Marking:
        counts = {}
        p = 0
        while code:
            n = code & self.mask
            if n:
                counts[p] = n
            code >>= self.width
            p += 1
        return Marking(counts)


class ReachabilityGraph:
    """Markings as nodes, firings as labelled edges.

    The out-edges of node ``i`` occupy ``edge_off[i]:edge_off[i] + edge_cnt[i]``
    of the parallel ``edge_t`` / ``edge_dst`` arrays.  Nodes are numbered in
    discovery order.  In a partial graph, nodes never expanded have no edges.
    """

    def __init__(
        self,
        system: NetSystem,
        layout: _Layout,
        codes: list[int],
        edge_off: array,
        edge_cnt: array,
        edge_t: array,
        edge_dst: array,
        exhausted: bool,
        max_tokens: int,
    ) -> None:
        self.system = system
        self._layout = layout
        self._codes = codes
        self.edge_off = edge_off
        self.edge_cnt = edge_cnt
        self.edge_t = edge_t
        self.edge_dst = edge_dst
        self.exhausted = exhausted
        self.max_tokens = max_tokens
        self.initial = 0

    @property
    def num_nodes(self) -> int:
        return len(self._codes)

    @property
    def num_edges(self) -> int:
        return len(self.edge_t)

    def marking(self, i: int) -> Marking:
        return self._layout.decode(self._codes[i])

    def markings(self) -> list[Marking]:
        return [self._layout.decode(c) for c in self._codes]

    def out_edges(self, i: int) -> list[tuple[int, int]]:
        lo = self.edge_off[i]
        hi = lo + self.edge_cnt[i]
        return list(zip(self.edge_t[lo:hi], self.edge_dst[lo:hi]))

    def enabled_at(self, i: int) -> frozenset[int]:
        lo = self.edge_off[i]
        return frozenset(self.edge_t[lo:lo + self.edge_cnt[i]])

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for src in range(self.num_nodes):
            lo = self.edge_off[src]
            for k in range(lo, lo + self.edge_cnt[src]):
                yield src, self.edge_t[k], self.edge_dst[k]

    def __repr__(self) -> str:
        state = "exhausted" if self.exhausted else "partial"
        return f"ReachabilityGraph({self.num_nodes} nodes, {self.num_edges} edges, {state})"

    def to_dot(self) -> str:
        net = self.system.net
        lines = ["digraph rg {", "  node [shape=ellipse];"]
        for i in range(self.num_nodes):
            style = ", peripheries=2" if i == self.initial else ""
            lines.append(f'  m{i} [label="{self.marking(i).format(net)}"{style}];')
        for src, t, dst in self.edges():
            lines.append(f'  m{src} -> m{dst} [label="{net.transitions[t]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def counts_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nodes", "edges", "exhausted", "max_tokens"])
        w.writerow([self.num_nodes, self.num_edges, int(self.exhausted), self.max_tokens])
        return buf.getvalue()


def build_rg(
    system: NetSystem,
    state_cap: int = DEFAULT_STATE_CAP,
    bound_cap: int = DEFAULT_BOUND_CAP,
    order: str = "bfs",
) -> ReachabilityGraph:
    """Explore every marking reachable from ``m0``.

    Raises :class:`StateCapExceeded` once more than ``state_cap`` markings
    have been found, and :class:`UnboundedSuspected` as soon as some place
    holds more than ``bound_cap`` tokens.  Both carry the partial graph.
    ``order="dfs"`` explores depth-first; node numbering changes, the
    state space does not.
    """
    if state_cap < 1 or bound_cap < 1:
        raise ValueError("caps must be positive")
    if order not in ("bfs", "dfs"):
        raise ValueError(f"unknown exploration order {order!r}")
    net = system.net
    layout = _Layout(len(net.places), bound_cap)
    width, mask = layout.width, layout.mask

    pre_shifts = [tuple(p * width for p in pre) for pre in net.pre]
    delta = [
        sum(1 << (p * width) for p in net.post[t]) - sum(1 << (p * width) for p in net.pre[t])
        for t in range(len(net.transitions))
    ]
    grows = [tuple(p * width for p in sorted(set(net.post[t]) - set(net.pre[t])))
             for t in range(len(net.transitions))]
    consumers = [net.place_post[p] for p in range(len(net.places))]

    codes: list[int] = []
    index: dict[int, int] = {}
    edge_off = array("q")
    edge_cnt = array("l")
    edge_t = array("l")
    edge_dst = array("l")
    max_tokens = system.m0.max_count()

    def graph(exhausted: bool) -> ReachabilityGraph:
        return ReachabilityGraph(system, layout, codes, edge_off, edge_cnt, edge_t, edge_dst,
                                 exhausted, max_tokens)

    def discover(code: int) -> int:
        i = len(codes)
        codes.append(code)
        index[code] = i
        edge_off.append(0)
        edge_cnt.append(0)
        return i

    if max_tokens > bound_cap:
        discover(0)
        raise UnboundedSuspected(
            f"initial marking already exceeds bound cap {bound_cap}", graph(False)
        )

    discover(layout.encode(system.m0))
    frontier: deque[int] = deque([0])
    pop = frontier.popleft if order == "bfs" else frontier.pop

    while frontier:
        src = pop()
        code = codes[src]
        edge_off[src] = len(edge_t)
        candidates: set[int] = set()
        c, p = code, 0
        while c:
            if c & mask:
                candidates.update(consumers[p])
            c >>= width
            p += 1
        for t in sorted(candidates):
            if not all((code >> s) & mask for s in pre_shifts[t]):
                continue
            nxt = code + delta[t]
            for s in grows[t]:
                n = (nxt >> s) & mask
                if n > max_tokens:
                    max_tokens = n
                    if n > bound_cap:
                        edge_cnt[src] = len(edge_t) - edge_off[src]
                        raise UnboundedSuspected(
                            f"place {net.places[s // width]!r} exceeded bound cap {bound_cap}",
                            graph(False),
                        )
            dst = index.get(nxt)
            if dst is None:
                if len(codes) >= state_cap:
                    edge_cnt[src] = len(edge_t) - edge_off[src]
                    raise StateCapExceeded(f"more than {state_cap} reachable markings", graph(False))
                dst = discover(nxt)
                frontier.append(dst)
            edge_t.append(t)
            edge_dst.append(dst)
        edge_cnt[src] = len(edge_t) - edge_off[src]

    return graph(True)


@dataclass(frozen=True)
class Boundedness:
    kind: str  # "one-safe" | "bounded" | "unknown"
    bound: int | None = None

    def __str__(self) -> str:
        if self.kind == "bounded":
            return f"bounded({self.bound})"
        return self.kind


def classify(system: NetSystem, rg: ReachabilityGraph) -> Boundedness:
    if rg.system is not system and rg.system != system:
        raise ValueError("reachability graph was built for a different system")
    if not rg.exhausted:
        return Boundedness("unknown")
    if rg.max_tokens <= 1:
        return Boundedness("one-safe", 1)
    return Boundedness("bounded", rg.max_tokens)


def tar_from_rg(rg: ReachabilityGraph) -> TarRelation:
    """``(t1, t2)`` iff some edge ``M -t1-> M'`` has ``t2`` enabled at ``M'``."""
    if not rg.exhausted:
        raise ValueError("the TAR oracle needs an exhausted reachability graph")
    rel = TarRelation(rg.system.net, engine="rg")
    enabled_sets: dict[int, frozenset[int]] = {}
    off, cnt, et, ed = rg.edge_off, rg.edge_cnt, rg.edge_t, rg.edge_dst
    for k in range(len(et)):
        dst = ed[k]
        en = enabled_sets.get(dst)
        if en is None:
            en = frozenset(et[off[dst]:off[dst] + cnt[dst]])
            enabled_sets[dst] = en
        t1 = et[k]
        for t2 in en:
            if (t1, t2) not in rel.rules:
                rel.rules[(t1, t2)] = "rg"
    return rel
