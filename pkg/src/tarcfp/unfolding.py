"""Complete finite prefixes of bounded net systems.

The construction is the usual possible-extensions loop: candidate events
wait in a priority queue ordered by an adequate total order on their local
configurations, the smallest is added, and an added event becomes a cutoff
when an earlier event (or the empty configuration) already reached the
same marking.  Cutoff events keep their postset conditions, but those
conditions are never extended.

Relations are kept as Python ints used as bitsets:

* ``co[c]`` -- conditions concurrent with condition ``c``;
* ``past[e]`` -- events of the local configuration ``[e]`` (``e`` included);
* ``consumed[e]`` / ``produced[e]`` -- conditions consumed / produced by ``[e]``.

Everything else (causality and conflict between arbitrary nodes, event
concurrency, cuts) is derived from these.
"""

from __future__ import annotations

import enum
import heapq
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .net import Marking, NetError, NetSystem, TransitionRef
from .reachability import DEFAULT_BOUND_CAP

DEFAULT_EVENT_CAP = 100_000


class EventCapExceeded(NetError):
    pass


class BoundCapExceeded(EventCapExceeded):
    """Some local configuration marks a place above the bound cap."""


class InvalidConfigurationError(NetError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Condition:
    id: int
    place: int
    pre_event: int | None
    post_events: tuple[int, ...] = ()


@dataclass(frozen=True)
class Event:
    id: int
    transition: int
    preset: tuple[int, ...]
    postset: tuple[int, ...]
    cutoff: bool = False
    # For a cutoff: the corresponding event, or None when the matching
    # configuration is the empty one (Mark([e]) == m0).
    corr: int | None = None
    local_size: int = 1


Node = Union[Condition, Event]


class Relation(enum.Enum):
    SAME = "same"
    CAUSAL_LT = "causal-lt"
    CAUSAL_GT = "causal-gt"
    CONFLICT = "conflict"
    CO = "co"


@dataclass(frozen=True)
class Configuration:
    events: frozenset[int]
    cut: frozenset[int] = field(compare=False)
    mark: Marking = field(compare=False)

    def __len__(self) -> int:
        return len(self.events)


class _Key:
    """Adequate order on local configurations.

    Size first, then Parikh vectors compared lexicographically over the
    transition indices (fewer occurrences of the first differing
    transition is smaller), then Foata normal forms level by level.  That
    much is adequate and decides cutoffs; it is total on 1-safe systems
    only.  The preset condition ids of the candidate event break the
    remaining ties so the queue order is deterministic, but a tie never
    makes an event a cutoff: the tie-break is not preserved by extensions,
    and treating it as strict loses markings when places hold two tokens.
    """

    __slots__ = ("size", "parikh", "_foata_fn", "_foata", "tail")

    def __init__(self, size, parikh, foata_fn, tail) -> None:
        self.size = size
        self.parikh = parikh
        self._foata_fn = foata_fn
        self._foata = None
        self.tail = tail

    @property
    def foata(self):
        if self._foata is None:
            self._foata = self._foata_fn()
        return self._foata

    def strictly_below(self, other: "_Key") -> bool:
        """Smaller in the adequate part, ignoring the tie-break."""
        for a, b in ((self.size, other.size), (self.parikh, other.parikh)):
            if a != b:
                return a < b
        return self.foata < other.foata

    def _cmp(self, other: "_Key") -> int:
        for a, b in ((self.size, other.size), (self.parikh, other.parikh)):
            if a != b:
                return -1 if a < b else 1
        if self.foata != other.foata:
            return -1 if self.foata < other.foata else 1
        if self.tail != other.tail:
            return -1 if self.tail < other.tail else 1
        return 0

    def __lt__(self, other: "_Key") -> bool:
        return self._cmp(other) < 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _Key) and self._cmp(other) == 0


class Prefix:
    """A complete finite prefix built by :func:`unfold`.

    Condition and event ids are dense and assigned in construction order.
    Treat instances as read-only once returned.
    """

    def __init__(self, system: NetSystem) -> None:
        self.system = system
        self.conditions: list[Condition] = []
        self.events: list[Event] = []
        self.initial: tuple[int, ...] = ()
        # bitsets, see module docstring
        self.co: list[int] = []
        self.past: list[int] = []
        self.consumed: list[int] = []
        self.produced: list[int] = []
        self.pre_mask: list[int] = []
        self.post_mask: list[int] = []
        self.depth: list[int] = []
        self.place_mask: list[int] = [0] * len(system.net.places)
        self.initial_mask = 0
        self._event_co_conds: list[int] | None = None
        self._events_of: dict[int, tuple[int, ...]] | None = None
        self._one_safe: bool | None = None

    def __repr__(self) -> str:
        return (f"Prefix({len(self.conditions)} conditions, {len(self.events)} events, "
                f"{self.num_cutoffs} cutoffs)")

    @property
    def num_cutoffs(self) -> int:
        return sum(1 for e in self.events if e.cutoff)

    # -- naming -----------------------------------------------------------

    def event_name(self, e: int) -> str:
        """``<transition>-<k>`` with ``k`` the 1-based construction index."""
        return f"{self.system.net.transitions[self.events[e].transition]}-{e + 1}"

    def condition_name(self, c: int) -> str:
        return f"{self.system.net.places[self.conditions[c].place]}-c{c}"

    def find_event(self, name: str) -> Event:
        for e in self.events:
            if self.event_name(e.id) == name:
                return e
        raise NetError(f"no event named {name!r}")

    def events_of(self, t: TransitionRef) -> tuple[int, ...]:
        if self._events_of is None:
            by_t: dict[int, list[int]] = {}
            for e in self.events:
                by_t.setdefault(e.transition, []).append(e.id)
            self._events_of = {t: tuple(v) for t, v in by_t.items()}
        return self._events_of.get(self.system.net.transition_id(t), ())

    # -- relations ---------------------------------------------------------

    def conds_co_with_event(self, e: int) -> int:
        """Bitset of conditions concurrent with event ``e``.

        A condition is concurrent with ``e`` exactly when it is concurrent
        with every condition of ``•e``.
        """
        if self._event_co_conds is None:
            out = []
            for ev in self.events:
                m = -1
                for c in ev.preset:
                    m &= self.co[c]
                out.append(m)
            self._event_co_conds = out
        return self._event_co_conds[e]

    def cond_lt_event(self, c: int, e: int) -> bool:
        return bool(self.consumed[e] >> c & 1)

    def event_lt_cond(self, e: int, c: int) -> bool:
        pe = self.conditions[c].pre_event
        return pe is not None and bool(self.past[pe] >> e & 1)

    def event_lt(self, e: int, f: int) -> bool:
        return e != f and bool(self.past[f] >> e & 1)

    def events_co(self, e: int, f: int) -> bool:
        if e == f:
            return False
        need = self.pre_mask[f]
        return need & self.conds_co_with_event(e) == need

    def cond_co_event(self, c: int, e: int) -> bool:
        return bool(self.conds_co_with_event(e) >> c & 1)

    def conds_co(self, c: int, d: int) -> bool:
        return bool(self.co[c] >> d & 1)

    def is_co_set(self, conds: Iterable[int]) -> bool:
        conds = list(conds)
        for i, c in enumerate(conds):
            for d in conds[i + 1:]:
                if c == d or not self.conds_co(c, d):
                    return False
        return True

    def is_one_safe(self) -> bool:
        """True iff no two concurrent conditions share a place.

        Every co-set of a complete prefix lies in the cut of one of its
        configurations, so this decides 1-safety of the source system.
        """
        if self._one_safe is None:
            self._one_safe = True
            for c in self.conditions:
                if self.co[c.id] & self.place_mask[c.place]:
                    self._one_safe = False
                    break
        return self._one_safe

    # -- export ----------------------------------------------------------

    def stats(self) -> dict[str, int]:
        return {
            "conditions": len(self.conditions),
            "events": len(self.events),
            "cutoffs": self.num_cutoffs,
        }

    def to_dot(self) -> str:
        net = self.system.net
        lines = ["digraph prefix {", "  rankdir=TB;"]
        for c in self.conditions:
            lines.append(f'  c{c.id} [shape=circle, label="{net.places[c.place]}"];')
        for e in self.events:
            style = ", style=dashed" if e.cutoff else ""
            lines.append(f'  e{e.id} [shape=box, label="{self.event_name(e.id)}"{style}];')
        for e in self.events:
            for c in e.preset:
                lines.append(f"  c{c} -> e{e.id};")
            for c in e.postset:
                lines.append(f"  e{e.id} -> c{c};")
            if e.cutoff and e.corr is not None:
                lines.append(f"  e{e.id} -> e{e.corr} [style=dotted, constraint=false];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        net = self.system.net
        doc = {
            "places": list(net.places),
            "transitions": list(net.transitions),
            "initial": list(self.initial),
            "conditions": [
                {"id": c.id, "place": net.places[c.place], "pre": c.pre_event,
                 "post": list(c.post_events)}
                for c in self.conditions
            ],
            "events": [
                {"id": e.id, "name": self.event_name(e.id), "transition": net.transitions[e.transition],
                 "preset": list(e.preset), "postset": list(e.postset), "cutoff": e.cutoff,
                 "corr": e.corr, "local_size": e.local_size}
                for e in self.events
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def unfold(
    system: NetSystem,
    event_cap: int = DEFAULT_EVENT_CAP,
    bound_cap: int = DEFAULT_BOUND_CAP,
) -> Prefix:
    """Build a complete finite prefix of ``system``.

    Raises :class:`EventCapExceeded` when more than ``event_cap`` events
    would be needed, and :class:`BoundCapExceeded` (a subclass) as soon as
    an event's local configuration puts more than ``bound_cap`` tokens on a
    place.  The prefix of an unbounded system has local configurations with
    unboundedly large markings, so the second check usually fires first.
    """
    if bound_cap < 1:
        raise ValueError("bound_cap must be positive")
    return _Unfolder(system, event_cap, bound_cap).run()


class _Unfolder:
    def __init__(self, system: NetSystem, event_cap: int, bound_cap: int = DEFAULT_BOUND_CAP) -> None:
        if event_cap < 1:
            raise ValueError("event_cap must be positive")
        self.bound_cap = bound_cap
        self.system = system
        self.net = system.net
        self.event_cap = event_cap
        self.px = Prefix(system)
        self.live_place_mask = [0] * len(self.net.places)
        self.post_events: list[list[int]] = []
        self.queue: list[tuple[_Key, int, tuple[int, ...]]] = []
        self.seen: set[tuple[int, tuple[int, ...]]] = set()
        self.first_with_mark: dict[Marking, tuple[_Key | None, int | None]] = {}

    def new_condition(self, place: int, pre_event: int | None) -> int:
        px = self.px
        c = len(px.conditions)
        px.conditions.append(Condition(c, place, pre_event))
        px.co.append(0)
        self.post_events.append([])
        px.place_mask[place] |= 1 << c
        return c

    def run(self) -> Prefix:
        px = self.px
        init = []
        for p, n in self.system.m0.items:
            for _ in range(n):
                init.append(self.new_condition(p, None))
        px.initial = tuple(init)
        px.initial_mask = mask_of(init)
        for c in init:
            px.co[c] = px.initial_mask & ~(1 << c)
            self.live_place_mask[px.conditions[c].place] |= 1 << c
        self.first_with_mark[self.system.m0] = (None, None)
        self.extend_from(init)

        while self.queue:
            key, t, preset = heapq.heappop(self.queue)
            if len(px.events) >= self.event_cap:
                raise EventCapExceeded(
                    f"more than {self.event_cap} events; the system is probably unbounded"
                )
            e = self.add_event(t, preset, key)
            if not px.events[e].cutoff:
                self.extend_from(px.events[e].postset)

        px.conditions = [
            Condition(c.id, c.place, c.pre_event, tuple(self.post_events[c.id]))
            for c in px.conditions
        ]
        return px

    # -- possible extensions --------------------------------------------------

    def extend_from(self, new_conds: Iterable[int]) -> None:
        """Queue every extension whose preset meets ``new_conds``."""
        px, net = self.px, self.net
        for c in new_conds:
            place = px.conditions[c].place
            for t in net.place_post[place]:
                others = [p for p in net.pre[t] if p != place]
                for rest in self._co_choices(others, px.co[c]):
                    preset = tuple(sorted((c, *rest)))
                    if (t, preset) in self.seen:
                        continue
                    self.seen.add((t, preset))
                    heapq.heappush(self.queue, (self.key_for(t, preset), t, preset))

    def _co_choices(self, places: list[int], allowed: int) -> Iterator[tuple[int, ...]]:
        if not places:
            yield ()
            return
        px = self.px
        p, rest = places[0], places[1:]
        for d in bits(self.live_place_mask[p] & allowed):
            for tail in self._co_choices(rest, allowed & px.co[d]):
                yield (d, *tail)

    def key_for(self, t: int, preset: tuple[int, ...]) -> _Key:
        px = self.px
        past = 0
        for c in preset:
            pe = px.conditions[c].pre_event
            if pe is not None:
                past |= px.past[pe]
        counts = [0] * len(self.net.transitions)
        counts[t] += 1
        size = 1
        for f in bits(past):
            counts[px.events[f].transition] += 1
            size += 1

        def foata() -> tuple[tuple[int, ...], ...]:
            levels: dict[int, list[int]] = {}
            depth = 1
            for f in bits(past):
                levels.setdefault(px.depth[f], []).append(px.events[f].transition)
                depth = max(depth, px.depth[f] + 1)
            levels.setdefault(depth, []).append(t)
            out = []
            for lvl in range(1, depth + 1):
                row = [0] * len(self.net.transitions)
                for u in levels.get(lvl, ()):
                    row[u] += 1
                out.append(tuple(row))
            return tuple(out)

        return _Key(size, tuple(counts), foata, (preset, t))

    # -- insertion -----------------------------------------------------------

    def add_event(self, t: int, preset: tuple[int, ...], key: _Key) -> int:
        px, net = self.px, self.net
        e = len(px.events)
        pre_mask = mask_of(preset)
        past = 1 << e
        consumed = pre_mask
        produced = 0
        depth = 1
        for c in preset:
            pe = px.conditions[c].pre_event
            if pe is not None:
                past |= px.past[pe]
                consumed |= px.consumed[pe]
                produced |= px.produced[pe]
                depth = max(depth, px.depth[pe] + 1)
            self.post_events[c].append(e)

        post = [self.new_condition(p, e) for p in net.post[t]]
        post_mask = mask_of(post)
        produced |= post_mask

        # A condition is co with the new ones iff it is co with all of •e.
        common = -1
        for c in preset:
            common &= px.co[c]
        for c in post:
            px.co[c] = common | (post_mask & ~(1 << c))
        for d in bits(common):
            px.co[d] |= post_mask

        px.past.append(past)
        px.consumed.append(consumed)
        px.produced.append(produced)
        px.pre_mask.append(pre_mask)
        px.post_mask.append(post_mask)
        px.depth.append(depth)

        cut = (px.initial_mask | produced) & ~consumed
        mark = Marking(Counter(px.conditions[c].place for c in bits(cut)))
        if mark.max_count() > self.bound_cap:
            raise BoundCapExceeded(
                f"{self.net.transitions[t]} event marks a place above bound cap {self.bound_cap}"
            )
        # The first event reaching a marking has the least key among them,
        # so comparing against it is enough.
        seen = self.first_with_mark.get(mark)
        cutoff = seen is not None and (seen[0] is None or seen[0].strictly_below(key))
        corr = seen[1] if cutoff else None
        if seen is None:
            self.first_with_mark[mark] = (key, e)
        if not cutoff:
            for c in post:
                self.live_place_mask[px.conditions[c].place] |= 1 << c
        px.events.append(Event(e, t, tuple(preset), tuple(post), cutoff, corr, bin(past).count("1")))
        return e


# -- queries on a finished prefix -----------------------------------------


def _event(prefix: Prefix, e: int | Event) -> int:
    i = e.id if isinstance(e, Event) else e
    if not (isinstance(i, int) and 0 <= i < len(prefix.events)):
        raise NetError(f"unknown event {e!r}")
    if isinstance(e, Event) and prefix.events[i] != e:
        raise NetError(f"event {e!r} does not belong to this prefix")
    return i


def _condition(prefix: Prefix, c: int | Condition) -> int:
    i = c.id if isinstance(c, Condition) else c
    if not (isinstance(i, int) and 0 <= i < len(prefix.conditions)):
        raise NetError(f"unknown condition {c!r}")
    if isinstance(c, Condition) and prefix.conditions[i] != c:
        raise NetError(f"condition {c!r} does not belong to this prefix")
    return i


def relation(prefix: Prefix, x: Node, y: Node) -> Relation:
    """Classify two nodes as same / causal either way / conflict / co."""
    xe, ye = isinstance(x, Event), isinstance(y, Event)
    if not xe and not isinstance(x, Condition) or not ye and not isinstance(y, Condition):
        raise NetError("relation() expects Condition or Event nodes")
    xi = _event(prefix, x) if xe else _condition(prefix, x)
    yi = _event(prefix, y) if ye else _condition(prefix, y)

    if xe and ye:
        if xi == yi:
            return Relation.SAME
        if prefix.event_lt(xi, yi):
            return Relation.CAUSAL_LT
        if prefix.event_lt(yi, xi):
            return Relation.CAUSAL_GT
        return Relation.CO if prefix.events_co(xi, yi) else Relation.CONFLICT
    if not xe and not ye:
        if xi == yi:
            return Relation.SAME
        if prefix.conds_co(xi, yi):
            return Relation.CO
        pe_y = prefix.conditions[yi].pre_event
        if pe_y is not None and prefix.cond_lt_event(xi, pe_y):
            return Relation.CAUSAL_LT
        pe_x = prefix.conditions[xi].pre_event
        if pe_x is not None and prefix.cond_lt_event(yi, pe_x):
            return Relation.CAUSAL_GT
        return Relation.CONFLICT
    # one condition, one event
    if xe:
        flipped = relation(prefix, y, x)
        return {Relation.CAUSAL_LT: Relation.CAUSAL_GT,
                Relation.CAUSAL_GT: Relation.CAUSAL_LT}.get(flipped, flipped)
    if prefix.cond_lt_event(xi, yi):
        return Relation.CAUSAL_LT
    if prefix.event_lt_cond(yi, xi):
        return Relation.CAUSAL_GT
    return Relation.CO if prefix.cond_co_event(xi, yi) else Relation.CONFLICT


def _config_from_events(prefix: Prefix, events: frozenset[int]) -> Configuration:
    consumed = produced = 0
    for e in events:
        consumed |= prefix.pre_mask[e]
        produced |= prefix.post_mask[e]
    cut = (prefix.initial_mask | produced) & ~consumed
    mark = Marking(Counter(prefix.conditions[c].place for c in bits(cut)))
    return Configuration(events, frozenset(bits(cut)), mark)


def is_configuration(prefix: Prefix, events: Iterable[int]) -> bool:
    """Causally closed and conflict-free."""
    s = set(events)
    for e in s:
        if e < 0 or e >= len(prefix.events):
            return False
        for f in bits(prefix.past[e]):
            if f not in s:
                return False
    # With causal closure in place, conflict shows up as a condition
    # consumed twice.
    used = 0
    for e in s:
        if used & prefix.pre_mask[e]:
            return False
        used |= prefix.pre_mask[e]
    return True


def configuration(prefix: Prefix, events: Iterable[int | Event]) -> Configuration:
    ids = frozenset(_event(prefix, e) for e in events)
    if not is_configuration(prefix, ids):
        raise InvalidConfigurationError(
            "not a configuration: " + ", ".join(prefix.event_name(e) for e in sorted(ids))
        )
    return _config_from_events(prefix, ids)


def local_config(prefix: Prefix, e: int | Event) -> Configuration:
    i = _event(prefix, e)
    return _config_from_events(prefix, frozenset(bits(prefix.past[i])))


def _as_config(prefix: Prefix, c: Configuration | Iterable[int]) -> Configuration:
    if isinstance(c, Configuration):
        if not is_configuration(prefix, c.events):
            raise InvalidConfigurationError("not a configuration of this prefix")
        return c
    return configuration(prefix, c)


def cut_of(prefix: Prefix, c: Configuration | Iterable[int]) -> frozenset[int]:
    """``(Min(O) ∪ C•) \\ •C`` as a set of condition ids."""
    return _as_config(prefix, c).cut


def mark_of(prefix: Prefix, c: Configuration | Iterable[int]) -> Marking:
    return _as_config(prefix, c).mark


def max_events(prefix: Prefix, events: Iterable[int | Event]) -> frozenset[int]:
    ids = {_event(prefix, e) for e in events}
    below = 0
    for e in ids:
        below |= prefix.past[e] & ~(1 << e)
    return frozenset(e for e in ids if not below >> e & 1)


def configurations(prefix: Prefix, cutoff_free: bool = False) -> Iterator[frozenset[int]]:
    """Enumerate every configuration (exponential; small prefixes only)."""
    n = len(prefix.events)
    allowed = [not (cutoff_free and prefix.events[e].cutoff) for e in range(n)]

    def grow(current: frozenset[int], used: int, start: int) -> Iterator[frozenset[int]]:
        yield current
        for e in range(start, n):
            if not allowed[e] or used & prefix.pre_mask[e]:
                continue
            preds = prefix.past[e] & ~(1 << e)
            if any(f not in current for f in bits(preds)):
                continue
            yield from grow(current | {e}, used | prefix.pre_mask[e], e + 1)

    # Events are numbered so that predecessors come first; extending in
    # increasing id order visits each configuration exactly once.
    yield from grow(frozenset(), 0, 0)
