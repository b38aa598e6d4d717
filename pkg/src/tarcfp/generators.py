"""Synthetic net systems: the AND-split sweeps and random block-structured nets.

The random generator builds a net from nested blocks, each block leading one
token from an entry place to an exit place:

* task: a single transition;
* sequence: two blocks chained through a fresh place;
* xor: two blocks sharing entry and exit places;
* and: a split transition, two parallel blocks, a join transition;
* nfc: a choice that leaves a memo token, an inner block, then a pair of
  joins that read the memo (the shape that breaks free-choice).

Any block may get a redo transition from its exit back to its entry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .net import NetError, NetSystem
from .reachability import CapExceeded, build_rg, classify


class GenerationError(NetError):
    pass


def gen_depth(branches: int, depth: int) -> NetSystem:
    """AND-split into ``branches`` chains of ``depth`` transitions, AND-join.

    Transitions are ``S``, ``J`` and ``B<i>`` (depth 1) or ``B<i>.<j>``.
    """
    if branches < 1 or depth < 1:
        raise ValueError("branches and depth must be at least 1")

    def tname(i: int, j: int) -> str:
        return f"B{i}" if depth == 1 else f"B{i}.{j}"

    places = ["start", "end"]
    transitions = ["S", "J"]
    arcs = []
    for i in range(1, branches + 1):
        chain = [f"a{i}.{j}" for j in range(depth + 1)]
        places += chain
        arcs.append(("S", chain[0]))
        for j in range(1, depth + 1):
            t = tname(i, j)
            transitions.append(t)
            arcs += [(chain[j - 1], t), (t, chain[j])]
        arcs.append((chain[-1], "J"))
    arcs += [("start", "S"), ("J", "end")]
    return NetSystem.build(places, transitions, arcs, {"start": 1})


def gen_breadth(n: int) -> NetSystem:
    """Split, ``n`` one-transition branches, join."""
    return gen_depth(n, 1)


@dataclass(frozen=True)
class GenOptions:
    """Block mix for :func:`gen_random_safe`; the four weights need not sum to 1."""

    p_seq: float = 0.60
    p_xor: float = 0.15
    p_and: float = 0.15
    p_nfc: float = 0.10
    p_loop: float = 0.10
    max_retries: int = 50
    state_cap: int = 20_000

    def __post_init__(self) -> None:
        weights = (self.p_seq, self.p_xor, self.p_and, self.p_nfc)
        if min(weights) < 0 or sum(weights) <= 0:
            raise ValueError("block weights must be non-negative and not all zero")
        if not 0 <= self.p_loop <= 1:
            raise ValueError("p_loop must lie in [0, 1]")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")


# minimum transitions each block kind needs
_COST = {"task": 1, "seq": 2, "xor": 2, "and": 4, "nfc": 5}


class _Builder:
    def __init__(self, rng: random.Random, opts: GenOptions) -> None:
        self.rng = rng
        self.opts = opts
        self.places: list[str] = []
        self.transitions: list[str] = []
        self.arcs: list[tuple[str, str]] = []

    def place(self) -> str:
        p = f"p{len(self.places)}"
        self.places.append(p)
        return p

    def transition(self, pre: list[str], post: list[str]) -> str:
        t = f"t{len(self.transitions)}"
        self.transitions.append(t)
        self.arcs += [(p, t) for p in pre] + [(t, p) for p in post]
        return t

    def pick(self, budget: int) -> str:
        o = self.opts
        kinds = [k for k, w in (("seq", o.p_seq), ("xor", o.p_xor), ("and", o.p_and), ("nfc", o.p_nfc))
                 if w > 0 and _COST[k] <= budget]
        if not kinds:
            return "task"
        weights = [getattr(o, f"p_{k}") for k in kinds]
        return self.rng.choices(kinds, weights)[0]

    def split(self, budget: int, lo_a: int, lo_b: int) -> tuple[int, int]:
        a = self.rng.randint(lo_a, budget - lo_b)
        return a, budget - a

    def block(self, src: str, dst: str, budget: int) -> None:
        """Fill ``src -> dst`` with exactly ``budget`` transitions."""
        loop = budget >= 2 and self.rng.random() < self.opts.p_loop
        if loop:
            budget -= 1
        kind = "task" if budget == 1 else self.pick(budget)
        if kind == "task" and budget > 1:
            kind = "seq"
        if kind == "task":
            self.transition([src], [dst])
        elif kind == "seq":
            mid = self.place()
            a, b = self.split(budget, 1, 1)
            self.block(src, mid, a)
            self.block(mid, dst, b)
        elif kind == "xor":
            a, b = self.split(budget, 1, 1)
            self.block(src, dst, a)
            self.block(src, dst, b)
        elif kind == "and":
            l_in, r_in, l_out, r_out = (self.place() for _ in range(4))
            self.transition([src], [l_in, r_in])
            a, b = self.split(budget - 2, 1, 1)
            self.block(l_in, l_out, a)
            self.block(r_in, r_out, b)
            self.transition([l_out, r_out], [dst])
        else:  # nfc
            mid, inner_out, memo_a, memo_b = (self.place() for _ in range(4))
            self.transition([src], [mid, memo_a])
            self.transition([src], [mid, memo_b])
            self.block(mid, inner_out, budget - 4)
            self.transition([inner_out, memo_a], [dst])
            self.transition([inner_out, memo_b], [dst])
        if loop:
            self.transition([dst], [src])


def _draw(seed: int, max_transitions: int, opts: GenOptions, tokens: int) -> NetSystem:
    rng = random.Random(seed)
    b = _Builder(rng, opts)
    start, end = b.place(), b.place()
    b.block(start, end, rng.randint(max(1, max_transitions // 3), max_transitions))
    return NetSystem.build(b.places, b.transitions, b.arcs, {start: tokens})


def _generate(seed: int, max_transitions: int, opts: GenOptions, tokens: int, want: str) -> NetSystem:
    if max_transitions < 1:
        raise ValueError("max_transitions must be at least 1")
    for attempt in range(opts.max_retries):
        system = _draw(seed * 1_000_003 + attempt, max_transitions, opts, tokens)
        try:
            rg = build_rg(system, state_cap=opts.state_cap, bound_cap=max(2, tokens))
        except CapExceeded:
            continue
        if classify(system, rg).kind == want:
            return system
    raise GenerationError(f"no {want} net after {opts.max_retries} attempts (seed {seed})")


def gen_random_safe(seed: int, max_transitions: int = 12, options: GenOptions | None = None) -> NetSystem:
    """A 1-safe net with at most ``max_transitions`` transitions, fixed by ``seed``.

    1-safety and an exhaustible state space are checked on the reachability
    graph; draws that fail are replaced by redraws from a derived seed.
    """
    return _generate(seed, max_transitions, options or GenOptions(), 1, "one-safe")


def gen_random_bounded(
    seed: int,
    max_transitions: int = 12,
    options: GenOptions | None = None,
    tokens: int = 2,
) -> NetSystem:
    """The same block nets started with ``tokens`` (>= 2) tokens: bounded, not 1-safe."""
    if tokens < 2:
        raise ValueError("tokens must be at least 2")
    return _generate(seed, max_transitions, options or GenOptions(), tokens, "bounded")
