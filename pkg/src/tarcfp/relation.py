"""Transition adjacency relations and their output formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, asdict
from typing import Iterable, Iterator

from .net import PetriNet

Pair = tuple[int, int]


@dataclass
class EngineStats:
    """Per-rule counters filled in by the CFP engines."""

    co_hits: int = 0
    mea_hits: int = 0
    corr_mea_hits: int = 0
    cut_enum_calls: int = 0
    cut_enum_hits: int = 0

    def resolved_structurally(self) -> int:
        return self.co_hits + self.mea_hits + self.corr_mea_hits

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass
class TarRelation:
    """A set of ordered transition pairs over ``net``.

    ``rules`` maps every pair to the rule that first established it
    (``"rg"``, ``"co"``, ``"mea"``, ``"mea-via-corr"``, ``"cut-enumeration"``,
    ``"direct"``, ...).  Equality ignores provenance.
    """

    net: PetriNet
    rules: dict[Pair, str] = field(default_factory=dict)
    engine: str = ""
    stats: EngineStats = field(default_factory=EngineStats)
    witnesses: dict[Pair, object] = field(default_factory=dict, repr=False)
    note: str = ""

    def add(self, t1: int, t2: int, rule: str, witness: object = None) -> bool:
        if (t1, t2) in self.rules:
            return False
        n = len(self.net.transitions)
        if not (0 <= t1 < n and 0 <= t2 < n):
            raise ValueError(f"pair ({t1}, {t2}) outside the transition range")
        self.rules[(t1, t2)] = rule
        if witness is not None:
            self.witnesses[(t1, t2)] = witness
        return True

    def __contains__(self, pair: object) -> bool:
        return pair in self.rules

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.rules))

    def __len__(self) -> int:
        return len(self.rules)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TarRelation):
            return NotImplemented
        return self.pairs() == other.pairs()

    def pairs(self) -> frozenset[Pair]:
        return frozenset(self.rules)

    def labelled(self) -> set[tuple[str, str]]:
        names = self.net.transitions
        return {(names[a], names[b]) for a, b in self.rules}

    def self_loops(self) -> list[int]:
        return sorted(a for a, b in self.rules if a == b)

    def matrix(self) -> list[list[bool]]:
        n = len(self.net.transitions)
        grid = [[False] * n for _ in range(n)]
        for a, b in self.rules:
            grid[a][b] = True
        return grid

    def to_pairs_text(self) -> str:
        names = self.net.transitions
        lines = []
        for a, b in self:
            flag = " (self)" if a == b else ""
            lines.append(f"{names[a]} -> {names[b]} [{self.rules[(a, b)]}]{flag}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_matrix_text(self) -> str:
        names = self.net.transitions
        width = max((len(x) for x in names), default=1)
        header = " " * width + " " + " ".join(n.rjust(max(len(n), 1)) for n in names)
        rows = [header]
        for a, row in enumerate(self.matrix()):
            cells = " ".join(("1" if v else "0").rjust(len(names[b])) for b, v in enumerate(row))
            rows.append(names[a].ljust(width) + " " + cells)
        return "\n".join(rows) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.net.transitions))
        for a, row in enumerate(self.matrix()):
            writer.writerow([self.net.transitions[a]] + [int(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        names = self.net.transitions
        doc = {
            "engine": self.engine,
            "transitions": list(names),
            "pairs": [
                {
                    "from": names[a],
                    "to": names[b],
                    "rule": self.rules[(a, b)],
                    "self": a == b,
                    **({"witness": _witness_json(self.witnesses[(a, b)])}
                       if (a, b) in self.witnesses else {}),
                }
                for a, b in self
            ],
            "stats": self.stats.as_dict(),
        }
        if self.note:
            doc["note"] = self.note
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def to_dot(self) -> str:
        names = self.net.transitions
        lines = ["digraph tar {", "  rankdir=LR;"]
        for i, n in enumerate(names):
            lines.append(f'  t{i} [shape=box, label="{n}"];')
        for a, b in self:
            lines.append(f'  t{a} -> t{b} [label="{self.rules[(a, b)]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        renderers = {
            "pairs": self.to_pairs_text,
            "matrix": self.to_matrix_text,
            "csv": self.to_csv,
            "json": self.to_json,
            "dot": self.to_dot,
        }
        try:
            return renderers[fmt]()
        except KeyError:
            raise ValueError(f"unknown TAR format {fmt!r}") from None


def _witness_json(w: object) -> object:
    to_dict = getattr(w, "as_dict", None)
    return to_dict() if to_dict else repr(w)


def relation_from_pairs(net: PetriNet, pairs: Iterable[tuple[str, str]], rule: str = "given") -> TarRelation:
    rel = TarRelation(net, engine=rule)
    for a, b in pairs:
        rel.add(net.transition_id(a), net.transition_id(b), rule)
    return rel
