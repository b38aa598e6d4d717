"""Transition adjacency relations (TAR) of Petri nets.

The relation is computed from a complete finite prefix of the net's
unfolding. The explicit reachability graph serves as the reference oracle.

    >>> from tarcfp import parse_net, unfold, tar_improved
    >>> system = parse_net(open("net.net").read())
    >>> tar_improved(system, unfold(system)).labelled()
"""

from types import ModuleType as _ModuleType

from .engines import (
    EarWitness,
    NotOneSafeError,
    check_by_cuts,
    early_confirm,
    mea,
    tar_bounded_improved,
    tar_general,
    tar_improved,
    tar_jin,
)
from .formats import ParseError, parse_net, parse_pnml, parse_text, render_net, render_pnml
from .generators import GenOptions, gen_breadth, gen_depth, gen_random_bounded, gen_random_safe
from .net import (
    Marking,
    NetError,
    NetSystem,
    NotEnabledError,
    PetriNet,
    UnknownNodeError,
    ValidationError,
    enabled,
    enabled_transitions,
    fire,
    is_free_choice,
)
from .reachability import (
    Boundedness,
    CapExceeded,
    ReachabilityGraph,
    StateCapExceeded,
    UnboundedSuspected,
    build_rg,
    classify,
    tar_from_rg,
)
from .relation import EngineStats, TarRelation
from .unfolding import (
    BoundCapExceeded,
    Condition,
    Configuration,
    Event,
    EventCapExceeded,
    Prefix,
    Relation,
    cut_of,
    local_config,
    mark_of,
    unfold,
)

__version__ = "0.1.0"

__all__ = [n for n, v in list(globals().items())
           if not n.startswith("_") and not isinstance(v, _ModuleType)]
