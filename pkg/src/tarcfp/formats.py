"""Reading and writing net systems.

Two input formats are accepted.  The line-oriented text format::

    # comment
    place <id> [tokens=<n>]
    transition <id>
    arc <src> <dst>

and a PNML subset (``place``, ``transition``, ``arc``, ``initialMarking``,
``name``).  ``docs/formats.md`` holds the full grammar.
"""

from __future__ import annotations

import re
import shlex
import warnings
import xml.etree.ElementTree as ET

from .net import Marking, NetError, NetSystem, PetriNet, ValidationError

_ID = re.compile(r"[^\s#=\"']+\Z")


class ParseError(NetError):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def parse_net(text: str) -> NetSystem:
    """Parse a text or PNML document into a validated :class:`NetSystem`."""
    if text.lstrip().startswith("<"):
        return parse_pnml(text)
    return parse_text(text)


def parse_text(text: str) -> NetSystem:
    places: list[str] = []
    transitions: list[str] = []
    arcs: list[tuple[str, str]] = []
    tokens: dict[str, int] = {}
    seen: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        column = len(body) - len(body.lstrip()) + 1
        try:
            words = shlex.split(body, posix=True)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, column) from None
        keyword, args = words[0], words[1:]

        if keyword in ("place", "transition"):
            if not args:
                raise ParseError(f"{keyword} needs an id", lineno, column)
            ident, options = args[0], _options(args[1:], lineno, column)
            if not _ID.match(ident):
                raise ParseError(f"bad id {ident!r}", lineno, column)
            if ident in seen:
                raise ValidationError(
                    f"line {lineno}: duplicate id {ident!r} (first declared on line {seen[ident]})"
                )
            seen[ident] = lineno
            allowed = {"tokens"} if keyword == "place" else set()
            unknown = set(options) - allowed
            if unknown:
                raise ParseError(f"unknown option {sorted(unknown)[0]!r}", lineno, column)
            if keyword == "place":
                places.append(ident)
                if "tokens" in options:
                    try:
                        n = int(options["tokens"])
                    except ValueError:
                        raise ParseError(
                            f"tokens must be an integer, got {options['tokens']!r}", lineno, column
                        ) from None
                    if n < 0:
                        raise ValidationError(f"line {lineno}: negative token count on {ident!r}")
                    tokens[ident] = n
            else:
                transitions.append(ident)
        elif keyword == "arc":
            if len(args) != 2:
                raise ParseError("arc takes exactly a source and a target", lineno, column)
            arcs.append((args[0], args[1]))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", lineno, column)

    net = PetriNet(places, transitions, arcs)
    return NetSystem(net, Marking({net.place_id(p): n for p, n in tokens.items()}))


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _options(words: list[str], lineno: int, column: int) -> dict[str, str]:
    out = {}
    for w in words:
        key, sep, value = w.partition("=")
        if not sep or not key:
            raise ParseError(f"expected key=value, got {w!r}", lineno, column)
        out[key] = value
    return out


def render_net(system: NetSystem) -> str:
    """Text rendering; ``parse_text(render_net(s))`` reproduces ``s``."""
    net = system.net
    lines = []
    for p, name in enumerate(net.places):
        n = system.m0[p]
        lines.append(f"place {name} tokens={n}" if n else f"place {name}")
    for name in net.transitions:
        lines.append(f"transition {name}")
    for src, dst in net.arcs():
        lines.append(f"arc {src} {dst}")
    return "\n".join(lines) + "\n"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _text_of(elem: ET.Element, child: str) -> str | None:
    for sub in elem:
        if _local(sub.tag) == child:
            for t in sub.iter():
                if _local(t.tag) == "text" and t.text is not None:
                    return t.text.strip()
            if sub.text and sub.text.strip():
                return sub.text.strip()
    return None


_PNML_SKIP = {"graphics", "name", "initialMarking", "inscription", "text"}


def parse_pnml(text: str) -> NetSystem:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed PNML: {exc}", line, col + 1) from None

    places: list[str] = []
    transitions: list[str] = []
    arcs: list[tuple[str, str]] = []
    tokens: dict[str, int] = {}
    ignored: set[str] = set()

    for elem in root.iter():
        kind = _local(elem.tag)
        if kind == "place":
            pid = elem.get("id")
            if pid is None:
                raise ValidationError("PNML place without id")
            places.append(pid)
            marking = _text_of(elem, "initialMarking")
            if marking:
                try:
                    n = int(marking)
                except ValueError:
                    raise ValidationError(f"place {pid!r}: bad initialMarking {marking!r}") from None
                if n < 0:
                    raise ValidationError(f"place {pid!r}: negative initialMarking")
                tokens[pid] = n
        elif kind == "transition":
            tid = elem.get("id")
            if tid is None:
                raise ValidationError("PNML transition without id")
            transitions.append(tid)
        elif kind == "arc":
            src, dst = elem.get("source"), elem.get("target")
            if src is None or dst is None:
                raise ValidationError(f"PNML arc {elem.get('id')!r} lacks source or target")
            weight = _text_of(elem, "inscription")
            if weight not in (None, "", "1"):
                raise ValidationError(f"arc {src} -> {dst}: weighted arcs are not supported")
            arcs.append((src, dst))
        elif kind not in _PNML_SKIP and kind not in ("pnml", "net", "page", "dimension", "position",
                                                     "offset", "fill", "line", "font"):
            ignored.add(kind)

    for kind in sorted(ignored):
        warnings.warn(f"PNML element <{kind}> ignored", stacklevel=2)

    net = PetriNet(places, transitions, arcs)
    return NetSystem(net, Marking({net.place_id(p): n for p, n in tokens.items()}))


def render_pnml(system: NetSystem) -> str:
    net = system.net
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<pnml xmlns="http://www.pnml.org/version-2009/grammar/pnml">',
           '  <net id="net" type="http://www.pnml.org/version-2009/grammar/ptnet">',
           '    <page id="page">']
    for p, name in enumerate(net.places):
        n = system.m0[p]
        marking = f"<initialMarking><text>{n}</text></initialMarking>" if n else ""
        out.append(f'      <place id="{name}">{marking}</place>')
    for name in net.transitions:
        out.append(f'      <transition id="{name}"/>')
    for i, (src, dst) in enumerate(net.arcs()):
        out.append(f'      <arc id="a{i}" source="{src}" target="{dst}"/>')
    out += ["    </page>", "  </net>", "</pnml>"]
    return "\n".join(out) + "\n"
