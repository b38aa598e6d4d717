from __future__ import annotations

import functools
import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))

from tarcfp import gen_breadth, gen_depth, gen_random_bounded, gen_random_safe, parse_net, unfold  # noqa: E402

FIXTURES = HERE / "fixtures"
FIXTURE_NAMES = ("chain", "fig1a", "fig2a", "fig2c", "fig6a")


@functools.lru_cache(maxsize=None)
def load(name: str):
    return parse_net((FIXTURES / f"{name}.net").read_text())


def fixture_text(name: str) -> str:
    return (FIXTURES / f"{name}.net").read_text()


@functools.lru_cache(maxsize=None)
def small_corpus() -> tuple[tuple[str, object], ...]:
    """50 small systems with exhaustible state spaces and prefixes of at most
    18 events: the hand fixtures, a few sweep nets, random 1-safe and
    random bounded nets."""
    out = [(name, load(name)) for name in FIXTURE_NAMES]
    out += [(f"breadth{n}", gen_breadth(n)) for n in (1, 2, 3, 4)]
    out += [("depth2x2", gen_depth(2, 2)), ("depth3x2", gen_depth(3, 2))]
    seed = 0
    while len(out) < 40:
        s = gen_random_safe(seed, 8)
        if len(unfold(s).events) <= 18:
            out.append((f"safe{seed}", s))
        seed += 1
    seed = 0
    while len(out) < 50:
        s = gen_random_bounded(seed, 6)
        if len(unfold(s).events) <= 18:
            out.append((f"bounded{seed}", s))
        seed += 1
    return tuple(out)


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_system(request):
    return request.param, load(request.param)


# -- acceptance report ------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
