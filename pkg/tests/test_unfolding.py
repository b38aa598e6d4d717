import json

import pytest

from conftest import load, small_corpus
from oracles import PrefixOracle, cutoff_free_marks, max_event_violations, marking_key, token_game
from tarcfp import (
    BoundCapExceeded,
    EventCapExceeded,
    NetError,
    NetSystem,
    Relation,
    build_rg,
    classify,
    cut_of,
    gen_breadth,
    gen_random_bounded,
    local_config,
    mark_of,
    unfold,
)
from tarcfp.net import marking_of
from tarcfp.unfolding import (
    InvalidConfigurationError,
    configuration,
    configurations,
    is_configuration,
    max_events,
    relation,
)

CORPUS = small_corpus()
IDS = [name for name, _ in CORPUS]


def ev(prefix, name):
    return prefix.find_event(name).id


def names(prefix, ids):
    return {prefix.event_name(e) for e in ids}


def places(prefix, conds):
    return sorted(prefix.system.net.places[prefix.conditions[c].place] for c in conds)


# -- examples ---------------------------------------------------------------


def test_chain_prefix():
    p = unfold(load("chain"))
    assert (len(p.events), len(p.conditions), p.num_cutoffs) == (2, 3, 0)
    full = configuration(p, [0, 1])
    assert places(p, cut_of(p, full)) == ["P2"]
    assert places(p, cut_of(p, [])) == ["P0"]
    assert mark_of(p, []) == p.system.m0


def test_fig1a_cutoff():
    p = unfold(load("fig1a"))
    cutoffs = [e for e in p.events if e.cutoff]
    assert len(cutoffs) == 1
    t8 = cutoffs[0]
    assert p.event_name(t8.id) == "T8-10"
    assert p.event_name(t8.corr) == "T9-9"
    l8, l9 = local_config(p, t8.id), local_config(p, t8.corr)
    assert names(p, l8.events) == {"T0-1", "T2-4", "T5-7", "T8-10"}
    assert names(p, l9.events) == {"T0-1", "T2-4", "T5-7", "T9-9"}
    want = marking_of(p.system.net, {"P1": 1, "P3": 1, "P10": 1})
    assert l8.mark == l9.mark == want
    assert places(p, cut_of(p, l8)) == ["P1", "P10", "P3"]


def test_fig1a_max_events():
    p = unfold(load("fig1a"))
    chain = [ev(p, n) for n in ("T0-1", "T2-4", "T5-7")]
    assert names(p, max_events(p, chain)) == {"T5-7"}
    assert max_events(p, []) == frozenset()
    e = ev(p, "T8-10")
    assert max_events(p, local_config(p, e).events) == {e}


@pytest.mark.parametrize("n", [1, 2, 3, 6, 10])
def test_breadth_prefix_is_the_net(n):
    p = unfold(gen_breadth(n))
    assert len(p.events) == n + 2 and p.num_cutoffs == 0


def test_breadth2_branches_are_co():
    p = unfold(gen_breadth(2))
    a, b = p.events_of("B1")[0], p.events_of("B2")[0]
    assert relation(p, p.events[a], p.events[b]) is Relation.CO
    assert PrefixOracle(p).classify(("e", a), ("e", b)) == "co"


def test_relation_examples():
    p = unfold(load("fig2a"))
    e = p.events[0]
    assert relation(p, e, e) is Relation.SAME
    c = p.conditions[0]
    assert relation(p, c, c) is Relation.SAME
    # two events consuming the same condition
    shared = next(c for c in p.conditions if len(c.post_events) > 1)
    x, y = shared.post_events[:2]
    assert relation(p, p.events[x], p.events[y]) is Relation.CONFLICT


def test_local_config_without_predecessors():
    p = unfold(load("chain"))
    assert local_config(p, 0).events == {0}


def test_errors():
    p = unfold(load("chain"))
    with pytest.raises(NetError):
        local_config(p, 7)
    with pytest.raises(NetError):
        relation(p, p.events[0], "T1")
    with pytest.raises(InvalidConfigurationError):
        cut_of(p, [1])
    with pytest.raises(NetError, match="unknown event"):
        mark_of(p, [5])
    with pytest.raises(ValueError):
        unfold(load("chain"), event_cap=0)


def test_conflicting_set_is_not_configuration():
    p = unfold(load("fig2a"))
    shared = next(c for c in p.conditions if len(c.post_events) > 1)
    assert not is_configuration(p, shared.post_events[:2])


def unbounded():
    return NetSystem.build(["p", "q"], ["t"], [("p", "t"), ("t", "p"), ("t", "q")], {"p": 1})


def test_unbounded_hits_bound_cap():
    with pytest.raises(BoundCapExceeded):
        unfold(unbounded(), bound_cap=8)


def test_event_cap():
    with pytest.raises(EventCapExceeded):
        unfold(gen_breadth(6), event_cap=3)


def test_two_token_places_not_cut_off_early():
    # Two tokens in one place: the second occurrence of the same transition
    # has the same adequate key as the first and must not become a cutoff.
    s = NetSystem.build(["p", "q"], ["t"], [("p", "t"), ("t", "q")], {"p": 2})
    p = unfold(s)
    assert len(p.events) == 2 and p.num_cutoffs == 0
    assert {marking_key(mark_of(p, c)) for c in configurations(p, True)} == token_game(s)[0]


def test_bounded_regression():
    s = gen_random_bounded(0)
    p = unfold(s)
    marks = {marking_key(mark_of(p, c)) for c in configurations(p, True)}
    assert marks == {marking_key(m) for m in build_rg(s).markings()}


def test_exports():
    p = unfold(load("fig1a"))
    dot = p.to_dot()
    assert dot.startswith("digraph") and "T8-10" in dot and "dashed" in dot
    data = json.loads(p.to_json())
    assert len(data["events"]) == 10
    assert p.stats()["cutoffs"] == 1


# -- corpus-wide properties -------------------------------------------------


@pytest.fixture(scope="module")
def prefixes():
    return {name: unfold(s) for name, s in CORPUS}


@pytest.mark.parametrize("name", IDS)
def test_relation_trichotomy_matches_paths(name, prefixes):
    p = prefixes[name]
    o = PrefixOracle(p)
    conv = {Relation.SAME: "same", Relation.CAUSAL_LT: "lt", Relation.CAUSAL_GT: "gt",
            Relation.CONFLICT: "conflict", Relation.CO: "co"}
    nodes = [("c", c) for c in range(len(p.conditions))] + [("e", e) for e in range(len(p.events))]
    obj = {("c", c.id): c for c in p.conditions} | {("e", e.id): e for e in p.events}
    for x in nodes:
        for y in nodes:
            assert conv[relation(p, obj[x], obj[y])] == o.classify(x, y), (x, y)


@pytest.mark.parametrize("name", IDS)
def test_structure(name, prefixes):
    p = prefixes[name]
    net = p.system.net
    o = PrefixOracle(p)
    for e in p.events:
        # homomorphism: presets and postsets map bijectively onto the transition's
        assert sorted(p.conditions[c].place for c in e.preset) == sorted(net.pre[e.transition])
        assert sorted(p.conditions[c].place for c in e.postset) == sorted(net.post[e.transition])
        # the preset is a co-set
        assert p.is_co_set(e.preset)
        if e.cutoff:
            # nothing is built on top of a cutoff
            for c in e.postset:
                assert not p.conditions[c].post_events
            if e.corr is None:
                assert local_config(p, e.id).mark == p.system.m0
            else:
                assert local_config(p, e.id).mark == local_config(p, e.corr).mark
                assert not p.events[e.corr].cutoff
        # adequate-order soundness, visible as construction order and size
        for f in o.local(e.id) - {e.id}:
            assert f < e.id
            assert p.events[f].local_size < e.local_size
        assert e.local_size == len(o.local(e.id))
    for c in p.conditions:
        assert len(c.post_events) == len(set(c.post_events))
    assert {p.conditions[c].place for c in p.initial} == set(p.system.m0.support())


@pytest.mark.parametrize("name", IDS)
def test_configurations_match_brute(name, prefixes):
    p = prefixes[name]
    o = PrefixOracle(p)
    for free in (False, True):
        assert sorted(map(sorted, configurations(p, free))) == sorted(map(sorted, o.configurations(free)))
    for conf in o.configurations():
        assert cut_of(p, conf) == o.cut(conf)
        assert max_events(p, conf) == o.max_events(conf)
        cut = cut_of(p, conf)
        assert p.is_co_set(cut)


@pytest.mark.parametrize("name", IDS)
def test_marks_are_reachable(name, prefixes):
    p = prefixes[name]
    o = PrefixOracle(p)
    rg = {marking_key(m) for m in build_rg(p.system).markings()}
    for conf in o.configurations():
        mk = marking_key(mark_of(p, conf))
        assert mk == o.mark_by_firing(conf)
        assert mk in rg


@pytest.mark.parametrize("name", IDS)
def test_completeness(name, prefixes):
    p = prefixes[name]
    rg = {marking_key(m) for m in build_rg(p.system).markings()}
    assert cutoff_free_marks(p) == rg


@pytest.mark.parametrize("name", IDS)
def test_max_event_facts(name, prefixes):
    assert max_event_violations(prefixes[name]) == {"drop_max": 0, "max_union": 0, "coset_closure": 0, "max_preset_in_cut": 0}


@pytest.mark.parametrize("name", IDS)
def test_one_safety_from_prefix(name, prefixes):
    p = prefixes[name]
    assert p.is_one_safe() == (classify(p.system, build_rg(p.system)).kind == "one-safe")


@pytest.mark.parametrize("name", IDS[:15])
def test_deterministic(name, prefixes):
    p, q = prefixes[name], unfold(dict(CORPUS)[name])
    assert p.events == q.events and p.conditions == q.conditions
