"""graph6 parsing/serialization and the built-in fixture graphs."""
from __future__ import annotations

import json
from itertools import product
from pathlib import Path

from .lifting import Graph

HEADER = b">>graph6<<"


class Graph6Error(ValueError):
    """Malformed graph6 input.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        self.line = line
        self.offset = offset
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


def _pairs(n: int):
    # column-major upper triangle: (0,1), (0,2), (1,2), (0,3), ...
    for j in range(1, n):
        for i in range(j):
            yield i, j


def parse_graph6(line: bytes | str) -> Graph:
    if isinstance(line, str):
        line = line.encode("ascii")
    data = line.strip()
    if data.startswith(HEADER):
        data = data[len(HEADER):]
    if not data:
        raise Graph6Error("empty graph6 record")
    for pos, byte in enumerate(data):
        if not 63 <= byte <= 126:
            raise Graph6Error(f"byte {byte!r} outside 63..126", offset=pos)
    if data[0] == 126:
        raise Graph6Error("long-form graph6 sizes (n > 62) are not supported", offset=0)
    n = data[0] - 63
    npairs = n * (n - 1) // 2
    nbytes = (npairs + 5) // 6
    body = data[1:]
    if len(body) != nbytes:
        raise Graph6Error(f"expected {nbytes} data bytes for n={n}, got {len(body)}", offset=1)
    edges = []
    for bit, (i, j) in enumerate(_pairs(n)):
        value = body[bit // 6] - 63
        if value >> (5 - bit % 6) & 1:
            edges.append((i, j))
    return Graph.from_edges(n, edges)


def serialize_graph6(g: Graph) -> bytes:
    if g.n > 62:
        raise Graph6Error("long-form graph6 sizes (n > 62) are not supported")
    bits = [1 if g.has_edge(i, j) else 0 for i, j in _pairs(g.n)]
    bits += [0] * (-len(bits) % 6)
    out = bytearray([g.n + 63])
    for k in range(0, len(bits), 6):
        value = 0
        for b in bits[k:k + 6]:
            value = value << 1 | b
        out.append(value + 63)
    return bytes(out)


def load_family(path: str | Path) -> list[Graph]:
    """Read a file of newline-separated graph6 records (blank lines skipped)."""
    graphs = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                graphs.append(parse_graph6(raw))
            except Graph6Error as exc:
                raise Graph6Error(str(exc), line=lineno, offset=exc.offset) from exc
    return graphs


def write_family(path: str | Path, graphs) -> None:
    with open(path, "wb") as fh:
        for g in graphs:
            fh.write(serialize_graph6(g) + b"\n")


def save_graph_json(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_json()))


def load_graph_json(path: str | Path) -> Graph:
    return Graph.from_json(json.loads(Path(path).read_text()))


# -- fixtures --------------------------------------------------------------

def rook_graph(k: int = 4) -> Graph:
    cells = list(product(range(k), range(k)))
    idx = {c: i for i, c in enumerate(cells)}
    edges = [(idx[a], idx[b]) for a in cells for b in cells
             if a < b and (a[0] == b[0] or a[1] == b[1])]
    return Graph.from_edges(len(cells), edges)


def shrikhande_graph() -> Graph:
    cells = list(product(range(4), range(4)))
    idx = {c: i for i, c in enumerate(cells)}
    conn = {(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)}
    edges = []
    for a in cells:
        for d in conn:
            b = ((a[0] + d[0]) % 4, (a[1] + d[1]) % 4)
            edges.append((idx[a], idx[b]))
    return Graph.from_edges(16, edges)


def cycle_graph(n: int, offset: int = 0) -> list[tuple[int, int]]:
    return [(offset + i, offset + (i + 1) % n) for i in range(n)]


def decalin_graph() -> Graph:
    # two hexagons 0-1-2-3-4-5 and 4-5-6-7-8-9 fused along edge (4, 5)
    edges = cycle_graph(6) + [(5, 6), (6, 7), (7, 8), (8, 9), (9, 4)]
    return Graph.from_edges(10, edges)


def bicyclopentyl_graph() -> Graph:
    edges = cycle_graph(5) + cycle_graph(5, offset=5) + [(0, 5)]
    return Graph.from_edges(10, edges)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


FIXTURES = {
    "rook4x4": rook_graph,
    "shrikhande": shrikhande_graph,
    "decalin": decalin_graph,
    "bicyclopentyl": bicyclopentyl_graph,
    "c6": lambda: Graph.from_edges(6, cycle_graph(6)),
    "two_c3": lambda: Graph.from_edges(6, cycle_graph(3) + cycle_graph(3, offset=3)),
}


def builtin_fixture(name: str) -> Graph:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
