"""Graph value type, built-in generators and the text file format."""

from __future__ import annotations

import re
import warnings
from collections import deque
from dataclasses import dataclass, field

from spinlat.errors import GraphParseError, InvalidArgument


class NonCubicWarning(UserWarning):
    """A loaded graph is not 3-regular."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Edges are stored sorted, each pair ascending, so equal graphs compare
    equal and serialize identically. ``name`` is a label only and takes no
    part in equality.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidArgument(f"vertex count must be a positive integer, got {self.n!r}")
        canon = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InvalidArgument(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidArgument(f"edge {u}-{v} has an endpoint outside [0, {self.n})")
            canon.append((u, v) if u < v else (v, u))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise InvalidArgument(f"duplicate edge {a[0]}-{a[1]}")
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for nb in adj:
            nb.sort()
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_cubic(self) -> bool:
        return all(d == 3 for d in self.degrees())

    def is_connected(self) -> bool:
        return len(_component(self.adjacency(), 0)) == self.n

    def relabel(self, perm) -> Graph:
        """Return the graph with vertex ``v`` renamed to ``perm[v]``."""
        return Graph(self.n, tuple((perm[u], perm[v]) for u, v in self.edges), self.name)

    def bipartition(self):
        """BFS 2-colouring; returns the colour list or None for odd cycles."""
        adj = self.adjacency()
        color = [-1] * self.n
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in adj[u]:
                    if color[w] < 0:
                        color[w] = 1 - color[u]
                        queue.append(w)
                    elif color[w] == color[u]:
                        return None
        return color

    def is_bipartite(self) -> bool:
        return self.bipartition() is not None

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


def _component(adj, start):
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def ladder_on_circle(n_total: int) -> Graph:
    """Two concentric rings of ``n_total/2`` vertices joined by rungs.

    Inner ring is ``0..n/2-1``, outer ring ``n/2..n-1``, rung ``i -- i+n/2``.
    Bipartite exactly when each ring has an even number of vertices.
    """
    if not isinstance(n_total, int) or n_total % 2 or n_total < 6:
        raise InvalidArgument(f"ladder needs an even vertex count >= 6, got {n_total!r}")
    h = n_total // 2
    edges = []
    for i in range(h):
        edges.append((i, (i + 1) % h))
        edges.append((h + i, h + (i + 1) % h))
        edges.append((i, i + h))
    return Graph(n_total, tuple(edges), f"ladder{n_total}")


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), f"K{n}")


def k33() -> Graph:
    return Graph(6, tuple((i, j) for i in range(3) for j in range(3, 6)), "K33")


def dodecahedron() -> Graph:
    """Dodecahedral graph: 20 vertices, cubic, planar, every face a pentagon.

    Built as an outer 5-cycle, a 10-cycle middle belt and an inner 5-cycle.
    """
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))  # outer pentagon
        edges.append((i, 5 + 2 * i))  # spokes to the belt
        edges.append((15 + i, 15 + (i + 1) % 5))  # inner pentagon
        edges.append((15 + i, 5 + 2 * i + 1))  # spokes from inner pentagon
    for j in range(10):
        edges.append((5 + j, 5 + (j + 1) % 10))
    return Graph(20, tuple(edges), "pentagonal20")


# --- text format -------------------------------------------------------------

_EDGE = re.compile(r"^(\d+)-(\d+)$")


def _parse_edges(tokens, lineno, n):
    out = []
    for tok in tokens:
        m = _EDGE.match(tok)
        if not m:
            raise GraphParseError(f"malformed edge token {tok!r}", lineno)
        u, v = int(m.group(1)), int(m.group(2))
        if u >= n or v >= n:
            raise GraphParseError(f"edge {tok} has an endpoint outside [0, {n})", lineno)
        out.append((u, v, lineno))
    return out


def _finish(name, n, edge_rows, start_line):
    if n is None:
        raise GraphParseError("record has no 'n=<int>' line", start_line)
    seen = {}
    for u, v, lineno in edge_rows:
        if u == v:
            raise GraphParseError(f"self-loop {u}-{v}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphParseError(f"duplicate edge {key[0]}-{key[1]}", lineno)
        seen[key] = lineno
    g = Graph(n, tuple(seen), name)
    if not g.is_cubic():
        warnings.warn(f"graph {name or '<unnamed>'} is not 3-regular", NonCubicWarning, stacklevel=3)
    return g


def loads(text: str) -> list[Graph]:
    """Parse graph records.

    A record is ``graph <name>``, then ``n=<int>``, then edge tokens
    ``u-v`` on any number of lines, closed by a blank line or end of
    input. The compact one-liner ``n=4; 0-1 0-2 ...`` is also accepted.
    ``#`` starts a comment.
    """
    graphs = []
    name, n, rows, start = "", None, [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if start is not None:
                graphs.append(_finish(name, n, rows, start))
                name, n, rows, start = "", None, [], None
            continue
        if start is None:
            start = lineno
        if line.startswith("graph"):
            if n is not None or name:
                raise GraphParseError("'graph' header inside a record (missing blank line?)", lineno)
            parts = line.split(None, 1)
            if parts[0] != "graph":
                raise GraphParseError(f"unexpected token {parts[0]!r}", lineno)
            name = parts[1].strip() if len(parts) > 1 else ""
            continue
        if line.startswith("n="):
            if n is not None:
                raise GraphParseError("second 'n=' line in record", lineno)
            head, _, rest = line.partition(";")
            try:
                n = int(head[2:].strip())
            except ValueError:
                raise GraphParseError(f"bad vertex count {head!r}", lineno) from None
            if n < 1:
                raise GraphParseError(f"vertex count must be positive, got {n}", lineno)
            rows.extend(_parse_edges(rest.split(), lineno, n))
            continue
        if n is None:
            raise GraphParseError("edge tokens before 'n=' line", lineno)
        rows.extend(_parse_edges(line.split(), lineno, n))
    if start is not None:
        graphs.append(_finish(name, n, rows, start))
    return graphs


def dumps(graphs) -> str:
    chunks = []
    for i, g in enumerate(graphs):
        name = g.name or f"g{i}"
        tokens = [f"{u}-{v}" for u, v in g.edges]
        lines = [f"graph {name}", f"n={g.n}"]
        for k in range(0, len(tokens), 12):
            lines.append(" ".join(tokens[k:k + 12]))
        chunks.append("\n".join(lines) + "\n")
    return "\n".join(chunks)


def load_graphs(text: str) -> list[Graph]:
    return loads(text)


def read_graphs(path) -> list[Graph]:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_graphs(path, graphs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(graphs))
