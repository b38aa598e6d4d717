"""Maximal clique enumeration over graphs given as adjacency bitsets."""

from __future__ import annotations

from typing import Iterator, Mapping


def _popcount(x: int) -> int:
    return bin(x).count("1")


def maximal_cliques(adj: Mapping[int, int], vertices: int) -> Iterator[int]:
    """Yield every maximal clique of the graph restricted to ``vertices``.

    ``adj[v]`` is the neighbour bitset of ``v`` (no self loops).  Cliques
    come out as bitsets.  Bron-Kerbosch with Tomita pivoting.
    """

    def expand(r: int, p: int, x: int) -> Iterator[int]:
        if not p and not x:
            yield r
            return
        # pivot: the vertex of P ∪ X with most neighbours in P
        best, pivot = -1, 0
        px = p | x
        while px:
            low = px & -px
            u = low.bit_length() - 1
            px ^= low
            n = _popcount(p & adj[u])
            if n > best:
                best, pivot = n, u
        cand = p & ~adj[pivot]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            nv = adj[v] & vertices
            yield from expand(r | low, p & nv, x & nv)
            p &= ~low
            x |= low

    if vertices:
        yield from expand(0, vertices, 0)
