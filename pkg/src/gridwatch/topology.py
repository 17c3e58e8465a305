"""Host parent topology: a DAG of hosts used for reachability classification."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping


class TopologyGraph:
    """Hosts with parent edges, verified acyclic at construction.

    A host with no parents is checked directly by the monitor; a host with
    parents is reached through them, which is what lets the engine tell a
    DOWN host from an UNREACHABLE one.
    """

    def __init__(self, parents: Mapping[str, Iterable[str]]):
        self._parents: dict[str, tuple[str, ...]] = {
            h: tuple(ps) for h, ps in parents.items()
        }
        self._children: dict[str, list[str]] = {h: [] for h in self._parents}
        for h, ps in self._parents.items():
            for p in ps:
                if p not in self._parents:
                    raise KeyError(f"parent {p!r} of {h!r} is not a known host")
                self._children[p].append(h)
        cycle = find_cycle(self._parents)
        if cycle is not None:
            raise ValueError(f"parent cycle: {' -> '.join(cycle)}")

    def __contains__(self, host: str) -> bool:
        return host in self._parents

    def __iter__(self) -> Iterator[str]:
        return iter(self._parents)

    def __len__(self) -> int:
        return len(self._parents)

    def parents(self, host: str) -> tuple[str, ...]:
        return self._parents[host]

    def children(self, host: str) -> tuple[str, ...]:
        return tuple(self._children[host])

    def descendants(self, host: str) -> list[str]:
        """All hosts below `host`, breadth-first, each listed once."""
        seen: set[str] = set()
        order: list[str] = []
        frontier = list(self._children[host])
        while frontier:
            nxt: list[str] = []
            for h in frontier:
                if h in seen:
                    continue
                seen.add(h)
                order.append(h)
                nxt.extend(self._children[h])
            frontier = nxt
        return order

    def ancestors(self, host: str) -> list[str]:
        seen: set[str] = set()
        order: list[str] = []
        frontier = list(self._parents[host])
        while frontier:
            nxt: list[str] = []
            for h in frontier:
                if h in seen:
                    continue
                seen.add(h)
                order.append(h)
                nxt.extend(self._parents[h])
            frontier = nxt
        return order

    def roots(self) -> list[str]:
        return [h for h, ps in self._parents.items() if not ps]


def find_cycle(parents: Mapping[str, Iterable[str]]) -> list[str] | None:
    """Return one cycle through the parent relation, or None if acyclic."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {h: WHITE for h in parents}
    stack: list[str] = []

    def visit(h: str) -> list[str] | None:
        color[h] = GRAY
        stack.append(h)
        for p in parents[h]:
            if color.get(p, WHITE) == GRAY:
                return stack[stack.index(p):] + [p]
            if color.get(p, WHITE) == WHITE and p in parents:
                found = visit(p)
                if found:
                    return found
        stack.pop()
        color[h] = BLACK
        return None

    for h in parents:
        if color[h] == WHITE:
            found = visit(h)
            if found:
                return found
    return None
