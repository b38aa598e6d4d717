"""TAR computation on complete prefixes.

``tar_general`` asks :func:`check_by_cuts` about every transition pair.
``tar_improved`` (1-safe systems) settles most pairs structurally: event
concurrency for pairs with ``t1• ∩ •t2 = ∅``, and max-event adjacency,
possibly through a cutoff's corresponding event, for consecutive pairs;
only what is left goes to cut enumeration.  ``tar_bounded_improved``
keeps just the plain max-event adjacency shortcut, which stays sound on
bounded nets.  ``tar_jin`` is the single-condition adjacency rule used as
a comparison baseline; it over-approximates on non-free-choice nets.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

from .cliques import maximal_cliques
from .net import NetError, NetSystem, TransitionRef, is_free_choice
from .relation import EngineStats, TarRelation
from .unfolding import Prefix, bits

log = logging.getLogger(__name__)


class NotOneSafeError(NetError):
    pass


@dataclass(frozen=True)
class EarWitness:
    """Evidence that ``e1`` is event-adjacent to ``e2``.

    ``kind`` is ``"co"``, ``"mea"``, ``"mea-via-corr"`` or
    ``"cut-enumeration"``.  For cut enumeration ``e2`` is None and ``cut``
    holds the co-set found; ``corr`` is set for ``"mea-via-corr"``.
    """

    e1: int
    e2: int | None
    kind: str
    cut: frozenset[int] = field(default_factory=frozenset)
    corr: int | None = None

    def as_dict(self) -> dict[str, object]:
        d: dict[str, object] = {"e1": self.e1, "e2": self.e2, "kind": self.kind}
        if self.cut:
            d["cut"] = sorted(self.cut)
        if self.corr is not None:
            d["corr"] = self.corr
        return d


def _check_prefix(system: NetSystem, prefix: Prefix) -> None:
    if prefix.system is not system and prefix.system != system:
        raise ValueError("prefix was built for a different system")


# -- cut enumeration --------------------------------------------------------


def b_prec(prefix: Prefix, e1: int, t2: int) -> int:
    """Candidate conditions for the cut search, as a bitset.

    ``e1•`` plus every condition on a place of ``•t2`` that is co with
    ``e1``.  A non-initial condition on such a place is always produced by
    an event mapped into ``•(•t2)``, so this covers the producer scan, and
    it also admits initial conditions, which the producer scan misses.
    """
    net = prefix.system.net
    places = 0
    for p in net.pre[t2]:
        places |= prefix.place_mask[p]
    return prefix.post_mask[e1] | (places & prefix.conds_co_with_event(e1))


def check_by_cuts(
    prefix: Prefix,
    t1: TransitionRef,
    t2: TransitionRef,
    stats: EngineStats | None = None,
) -> EarWitness | None:
    """Decide ``t1 <tar t2`` by enumerating cuts of the candidate set.

    Returns a witness when the pair is in the relation, None otherwise.
    """
    net = prefix.system.net
    t1 = net.transition_id(t1)
    t2 = net.transition_id(t2)
    if stats is not None:
        stats.cut_enum_calls += 1
    need = net.pre[t2]
    for e1 in prefix.events_of(t1):
        cands = b_prec(prefix, e1, t2)
        adj = {c: prefix.co[c] for c in bits(cands)}
        for clique in maximal_cliques(adj, cands):
            covered = {prefix.conditions[c].place for c in bits(clique)}
            if all(p in covered for p in need):
                if stats is not None:
                    stats.cut_enum_hits += 1
                return EarWitness(e1, None, "cut-enumeration", frozenset(bits(clique)))
    return None


def tar_general(system: NetSystem, prefix: Prefix) -> TarRelation:
    _check_prefix(system, prefix)
    rel = TarRelation(system.net, engine="general")
    n = len(system.net.transitions)
    for t1 in range(n):
        for t2 in range(n):
            w = check_by_cuts(prefix, t1, t2, rel.stats)
            if w is not None:
                rel.add(t1, t2, "cut-enumeration", w)
    return rel


# -- structural rules -------------------------------------------------------


def mea(prefix: Prefix, e1: int, e2: int) -> bool:
    """``e1 ▷ e2``: ``e1 < e2`` and every output condition of ``e1`` lying
    below ``e2`` is an input condition of ``e2``."""
    for e in (e1, e2):
        if not (isinstance(e, int) and 0 <= e < len(prefix.events)):
            raise NetError(f"unknown event {e!r}")
    if not prefix.event_lt(e1, e2):
        return False
    below = prefix.post_mask[e1] & prefix.consumed[e2]
    return below & ~prefix.pre_mask[e2] == 0


def _same_post_places(prefix: Prefix, e: int, f: int) -> bool:
    def image(x: int) -> list[int]:
        return sorted(prefix.conditions[c].place for c in prefix.events[x].postset)

    return image(e) == image(f)


def _early_confirm(prefix: Prefix, t1: int, t2: int, use_corr: bool = True) -> EarWitness | None:
    targets = prefix.events_of(t2)
    for e1 in prefix.events_of(t1):
        ev = prefix.events[e1]
        if ev.cutoff:
            if not use_corr or ev.corr is None:
                continue
            corr = ev.corr
            if not _same_post_places(prefix, e1, corr):
                continue
            for e2 in targets:
                if mea(prefix, corr, e2):
                    return EarWitness(e1, e2, "mea-via-corr", corr=corr)
        else:
            for e2 in targets:
                if mea(prefix, e1, e2):
                    return EarWitness(e1, e2, "mea")
    return None


def _require_one_safe(prefix: Prefix) -> None:
    if not prefix.is_one_safe():
        raise NotOneSafeError("the structural rules need a 1-safe system")


def early_confirm(prefix: Prefix, t1: TransitionRef, t2: TransitionRef) -> bool:
    """True when ``t1 <tar t2`` is confirmed by max-event adjacency.

    False only means "not confirmed"; the pair may still be in the relation.
    """
    _require_one_safe(prefix)
    net = prefix.system.net
    return _early_confirm(prefix, net.transition_id(t1), net.transition_id(t2)) is not None


def co_event_pairs(prefix: Prefix) -> list[tuple[int, int]]:
    """All pairs ``e1 < e2`` (by id) of concurrent events."""
    out = []
    n = len(prefix.events)
    for e in range(n):
        co_conds = prefix.conds_co_with_event(e)
        for f in range(e + 1, n):
            need = prefix.pre_mask[f]
            if co_conds & need == need:
                out.append((e, f))
    return out


def tar_improved(system: NetSystem, prefix: Prefix, fallback: bool = True) -> TarRelation:
    """All TAR pairs of a 1-safe system, cut enumeration only as a last resort.

    On a system that is not 1-safe this raises :class:`NotOneSafeError`, or
    with ``fallback=True`` logs a warning and returns :func:`tar_general`.
    """
    _check_prefix(system, prefix)
    if not prefix.is_one_safe():
        if not fallback:
            raise NotOneSafeError("improved engine needs a 1-safe system")
        log.warning("system is not 1-safe; improved engine falls back to general")
        rel = tar_general(system, prefix)
        rel.engine = "improved"
        rel.note = "fell back to general: system is not 1-safe"
        return rel

    net = system.net
    rel = TarRelation(net, engine="improved")
    # The co rule goes first so that consecutive pairs it already settled
    # skip the per-pair checks; the resulting set is the same.
    for e1, e2 in co_event_pairs(prefix):
        a = prefix.events[e1].transition
        b = prefix.events[e2].transition
        if rel.add(a, b, "co", EarWitness(e1, e2, "co")):
            rel.stats.co_hits += 1
        if rel.add(b, a, "co", EarWitness(e2, e1, "co")):
            rel.stats.co_hits += 1

    for t1 in range(len(net.transitions)):
        for t2 in net.successors(t1):
            if (t1, t2) in rel:
                continue
            w = _early_confirm(prefix, t1, t2)
            if w is not None:
                rel.add(t1, t2, w.kind, w)
                if w.kind == "mea":
                    rel.stats.mea_hits += 1
                else:
                    rel.stats.corr_mea_hits += 1
                continue
            w = check_by_cuts(prefix, t1, t2, rel.stats)
            if w is not None:
                rel.add(t1, t2, "cut-enumeration", w)
    return rel


def tar_bounded_improved(system: NetSystem, prefix: Prefix) -> TarRelation:
    """Every pair, plain max-event adjacency first, cut enumeration otherwise."""
    _check_prefix(system, prefix)
    net = system.net
    rel = TarRelation(net, engine="bounded-improved")
    n = len(net.transitions)
    for t1 in range(n):
        for t2 in range(n):
            w = _early_confirm(prefix, t1, t2, use_corr=False)
            if w is not None:
                rel.add(t1, t2, "mea", w)
                rel.stats.mea_hits += 1
                continue
            w = check_by_cuts(prefix, t1, t2, rel.stats)
            if w is not None:
                rel.add(t1, t2, "cut-enumeration", w)
    return rel


def tar_jin(prefix: Prefix) -> TarRelation:
    """Single-condition adjacency plus event concurrency.

    A pair ``(h(e1), h(e2))`` is reported whenever some condition links
    ``e1`` directly to ``e2``; a cutoff event borrows the direct successors
    of its corresponding event (or of ``Min(O)``).  Exact on many
    free-choice nets, wrong on non-free-choice ones.
    """
    net = prefix.system.net
    if not is_free_choice(net):
        warnings.warn("net is not free-choice; the jin rule may report spurious pairs",
                      stacklevel=2)
    rel = TarRelation(net, engine="jin")
    h = [e.transition for e in prefix.events]
    for e in prefix.events:
        for c in e.postset:
            for f in prefix.conditions[c].post_events:
                rel.add(h[e.id], h[f], "direct")
        if e.cutoff:
            source = prefix.initial if e.corr is None else prefix.events[e.corr].postset
            for c in source:
                for f in prefix.conditions[c].post_events:
                    rel.add(h[e.id], h[f], "direct-via-corr")
    for e1, e2 in co_event_pairs(prefix):
        rel.add(h[e1], h[e2], "co")
        rel.add(h[e2], h[e1], "co")
    return rel
