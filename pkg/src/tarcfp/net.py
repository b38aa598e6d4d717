"""Place/transition nets with weight-1 arcs and the token game."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

TransitionRef = Union[int, str]
PlaceRef = Union[int, str]


class NetError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NetError):
    pass


class UnknownNodeError(NetError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class NotEnabledError(NetError):
    pass


class PetriNet:
    """A net ``(P, T, F)`` with places and transitions stored as dense indices.

    Labels given at construction are kept for reporting; every internal
    structure (presets, postsets, markings) speaks in indices.
    """

    __slots__ = (
        "places",
        "transitions",
        "pre",
        "post",
        "place_pre",
        "place_post",
        "_place_index",
        "_transition_index",
    )

    def __init__(
        self,
        places: Sequence[str],
        transitions: Sequence[str],
        arcs: Iterable[tuple[str, str]],
    ) -> None:
        places = tuple(places)
        transitions = tuple(transitions)
        if not places and not transitions:
            raise ValidationError("a net needs at least one place or transition")

        place_index: dict[str, int] = {}
        for i, name in enumerate(places):
            if name in place_index:
                raise ValidationError(f"duplicate place id {name!r}")
            place_index[name] = i
        transition_index: dict[str, int] = {}
        for i, name in enumerate(transitions):
            if name in transition_index or name in place_index:
                raise ValidationError(f"duplicate node id {name!r}")
            transition_index[name] = i

        pre: list[set[int]] = [set() for _ in transitions]
        post: list[set[int]] = [set() for _ in transitions]
        for src, dst in arcs:
            if src in place_index and dst in transition_index:
                pre[transition_index[dst]].add(place_index[src])
            elif src in transition_index and dst in place_index:
                post[transition_index[src]].add(place_index[dst])
            elif src not in place_index and src not in transition_index:
                raise ValidationError(f"arc {src} -> {dst}: unknown source {src!r}")
            elif dst not in place_index and dst not in transition_index:
                raise ValidationError(f"arc {src} -> {dst}: unknown target {dst!r}")
            else:
                raise ValidationError(f"arc {src} -> {dst} connects two nodes of the same kind")

        for t, preset in enumerate(pre):
            if not preset:
                raise ValidationError(f"transition {transitions[t]!r} has an empty preset")

        place_pre: list[set[int]] = [set() for _ in places]
        place_post: list[set[int]] = [set() for _ in places]
        for t in range(len(transitions)):
            for p in pre[t]:
                place_post[p].add(t)
            for p in post[t]:
                place_pre[p].add(t)

        self.places = places
        self.transitions = transitions
        self.pre: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in pre)
        self.post: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in post)
        self.place_pre: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in place_pre)
        self.place_post: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in place_post)
        self._place_index = place_index
        self._transition_index = transition_index

    def __repr__(self) -> str:
        return f"PetriNet(|P|={len(self.places)}, |T|={len(self.transitions)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and self.pre == other.pre
            and self.post == other.post
        )

    def __hash__(self) -> int:
        return hash((self.places, self.transitions, self.pre, self.post))

    def transition_id(self, t: TransitionRef) -> int:
        if isinstance(t, str):
            try:
                return self._transition_index[t]
            except KeyError:
                raise UnknownNodeError(f"unknown transition {t!r}") from None
        if isinstance(t, int) and 0 <= t < len(self.transitions):
            return t
        raise UnknownNodeError(f"unknown transition {t!r}")

    def place_id(self, p: PlaceRef) -> int:
        if isinstance(p, str):
            try:
                return self._place_index[p]
            except KeyError:
                raise UnknownNodeError(f"unknown place {p!r}") from None
        if isinstance(p, int) and 0 <= p < len(self.places):
            return p
        raise UnknownNodeError(f"unknown place {p!r}")

    def arcs(self) -> Iterator[tuple[str, str]]:
        for t, name in enumerate(self.transitions):
            for p in self.pre[t]:
                yield self.places[p], name
            for p in self.post[t]:
                yield name, self.places[p]

    def successors(self, t: TransitionRef) -> tuple[int, ...]:
        """``(t•)•``: transitions consuming from some output place of ``t``."""
        t = self.transition_id(t)
        return tuple(sorted({u for p in self.post[t] for u in self.place_post[p]}))


class Marking:
    """A multiset of places, kept in canonical sparse form.

    ``items`` is a sorted tuple of ``(place, count)`` with zero counts
    dropped, so equality and hashing are multiset equality.
    """

    __slots__ = ("items", "_hash")

    def __init__(self, counts: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> None:
        pairs = counts.items() if isinstance(counts, Mapping) else counts
        acc: dict[int, int] = {}
        for p, n in pairs:
            if n < 0:
                raise ValidationError(f"negative token count {n} on place {p}")
            if n:
                acc[p] = acc.get(p, 0) + n
        self.items: tuple[tuple[int, int], ...] = tuple(sorted(acc.items()))
        self._hash = hash(self.items)

    @classmethod
    def from_places(cls, places: Iterable[int]) -> "Marking":
        return cls(Counter(places))

    def __getitem__(self, p: int) -> int:
        for q, n in self.items:
            if q == p:
                return n
        return 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self.items == other.items

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Marking") -> bool:
        return self.items < other.items

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.items)

    def __len__(self) -> int:
        """Number of marked places."""
        return len(self.items)

    def __repr__(self) -> str:
        return f"Marking({dict(self.items)})"

    def total(self) -> int:
        return sum(n for _, n in self.items)

    def support(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.items)

    def max_count(self) -> int:
        return max((n for _, n in self.items), default=0)

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def format(self, net: PetriNet) -> str:
        parts = [net.places[p] if n == 1 else f"{net.places[p]}:{n}" for p, n in self.items]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class NetSystem:
    net: PetriNet
    m0: Marking

    def __post_init__(self) -> None:
        for p, _ in self.m0.items:
            if not (isinstance(p, int) and 0 <= p < len(self.net.places)):
                raise ValidationError(f"initial marking names unknown place {p!r}")

    @classmethod
    def build(
        cls,
        places: Sequence[str],
        transitions: Sequence[str],
        arcs: Iterable[tuple[str, str]],
        marking: Mapping[str, int],
    ) -> "NetSystem":
        """Convenience constructor working on labels throughout."""
        net = PetriNet(places, transitions, arcs)
        return cls(net, marking_of(net, marking))

    def __repr__(self) -> str:
        return f"NetSystem({self.net!r}, m0={self.m0.format(self.net)})"


def marking_of(net: PetriNet, counts: Mapping[PlaceRef, int]) -> Marking:
    return Marking({net.place_id(p): n for p, n in counts.items()})


def enabled(system: NetSystem, m: Marking, t: TransitionRef) -> bool:
    t = system.net.transition_id(t)
    counts = dict(m.items)
    return all(counts.get(p, 0) >= 1 for p in system.net.pre[t])


def fire(system: NetSystem, m: Marking, t: TransitionRef) -> Marking:
    net = system.net
    t = net.transition_id(t)
    counts = dict(m.items)
    for p in net.pre[t]:
        if counts.get(p, 0) < 1:
            raise NotEnabledError(
                f"transition {net.transitions[t]!r} is not enabled at {m.format(net)}"
            )
    for p in net.pre[t]:
        counts[p] -= 1
    for p in net.post[t]:
        counts[p] = counts.get(p, 0) + 1
    return Marking(counts)


def enabled_transitions(system: NetSystem, m: Marking) -> tuple[int, ...]:
    counts = dict(m.items)
    net = system.net
    candidates = sorted({t for p in counts for t in net.place_post[p]})
    return tuple(t for t in candidates if all(counts.get(p, 0) >= 1 for p in net.pre[t]))


def is_free_choice(net: PetriNet) -> bool:
    # Transitions sharing an input place must share their whole preset.
    for consumers in net.place_post:
        if len({net.pre[t] for t in consumers}) > 1:
            return False
    return True
