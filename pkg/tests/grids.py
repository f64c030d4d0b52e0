"""Rectangular test-town generator shared by the routing tests.

A grid of nx * ny square-ish blocks with spacing (sx, sy). Codes are
deterministic: crossing (i, j) gets j*(nx+1)+i+1, block (a, b) gets
b*nx+a+1, horizontal street j gets j+1, vertical street i gets
ny+1+i+1. The oracle in the tests rebuilds the same geometry from
plain arithmetic so it shares no code with the plan loader.
"""

from __future__ import annotations


def crossing_code(i: int, j: int, nx: int) -> int:
    return j * (nx + 1) + i + 1


def block_code(a: int, b: int, nx: int, ny: int) -> int | None:
    if 0 <= a < nx and 0 <= b < ny:
        return b * nx + a + 1
    return None


def make_grid(nx: int, ny: int, sx: float = 100.0, sy: float = 100.0) -> str:
    """Plan-file text for a full nx * ny block grid."""
    lines = []
    for j in range(ny + 1):
        lines.append(f"street|{j + 1}|H{j + 1}")
    for i in range(nx + 1):
        lines.append(f"street|{ny + 1 + i + 1}|V{i + 1}")

    def fmt(v: int | None) -> str:
        return "" if v is None else str(v)

    for j in range(ny + 1):
        for i in range(nx + 1):
            attached = (
                block_code(i - 1, j, nx, ny),
                block_code(i, j, nx, ny),
                block_code(i, j - 1, nx, ny),
                block_code(i - 1, j - 1, nx, ny),
            )
            fields = "|".join(fmt(a) for a in attached)
            lines.append(
                f"crossing|{crossing_code(i, j, nx)}|{i * sx:g}|{j * sy:g}|{fields}"
            )
    for b in range(ny):
        for a in range(nx):
            streets = (ny + 1 + a + 1, b + 2, ny + 1 + a + 2, b + 1)
            corners = (
                crossing_code(a, b, nx),
                crossing_code(a, b + 1, nx),
                crossing_code(a + 1, b + 1, nx),
                crossing_code(a + 1, b, nx),
            )
            cx, cy = (a + 0.5) * sx, (b + 0.5) * sy
            lines.append(
                f"block|{block_code(a, b, nx, ny)}|"
                + "|".join(str(s) for s in streets)
                + "|"
                + "|".join(str(c) for c in corners)
                + f"|{cx:g}|{cy:g}"
            )
    return "\n".join(lines) + "\n"


def containing_blocks(p: tuple[float, float], nx: int, ny: int, sx: float, sy: float) -> list[int]:
    """Block codes covering a point, boundaries inclusive, by arithmetic."""
    x, y = p
    found = []
    for b in range(ny):
        for a in range(nx):
            if a * sx <= x <= (a + 1) * sx and b * sy <= y <= (b + 1) * sy:
                found.append(block_code(a, b, nx, ny))
    return found


def block_corner_indices(a: int, b: int, nx: int) -> list[int]:
    """0-based oracle node ids of a block's corner crossings."""
    return [
        crossing_code(a, b, nx) - 1,
        crossing_code(a, b + 1, nx) - 1,
        crossing_code(a + 1, b + 1, nx) - 1,
        crossing_code(a + 1, b, nx) - 1,
    ]


def node_coord(node: int, nx: int, sx: float, sy: float) -> tuple[float, float]:
    return ((node % (nx + 1)) * sx, (node // (nx + 1)) * sy)


def oracle_distances(nx: int, ny: int, sx: float, sy: float):
    """All-pairs shortest distances between crossings, by scipy Dijkstra.

    The graph mirrors the routing model: within one block every pair of
    corners is mutually reachable at straight-line cost (rim or cut).
    Built from grid arithmetic alone, independent of the plan loader.
    """
    import math

    import numpy as np
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    n = (nx + 1) * (ny + 1)
    edges: dict[tuple[int, int], float] = {}
    for b in range(ny):
        for a in range(nx):
            corners = block_corner_indices(a, b, nx)
            for x in range(4):
                for y in range(x + 1, 4):
                    u, v = corners[x], corners[y]
                    pu = node_coord(u, nx, sx, sy)
                    pv = node_coord(v, nx, sx, sy)
                    w = math.hypot(pu[0] - pv[0], pu[1] - pv[1])
                    key = (min(u, v), max(u, v))
                    if key not in edges or w < edges[key]:
                        edges[key] = w
    rows, cols, data = [], [], []
    for (u, v), w in edges.items():
        rows += [u, v]
        cols += [v, u]
        data += [w, w]
    graph = csr_matrix((np.array(data), (np.array(rows), np.array(cols))), shape=(n, n))
    return dijkstra(graph, directed=False)


def oracle_route_length(
    p: tuple[float, float],
    q: tuple[float, float],
    nx: int,
    ny: int,
    sx: float,
    sy: float,
    dist_matrix,
) -> float:
    """Shortest start-to-goal length in the same model as the router:
    straight across a shared block, else enter and leave the crossing
    network at the corners of the containing blocks."""
    import math

    sb = containing_blocks(p, nx, ny, sx, sy)
    eb = containing_blocks(q, nx, ny, sx, sy)
    if set(sb) & set(eb):
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def entries(point, codes):
        out: dict[int, float] = {}
        for code in codes:
            a, b = (code - 1) % nx, (code - 1) // nx
            for node in block_corner_indices(a, b, nx):
                c = node_coord(node, nx, sx, sy)
                w = math.hypot(point[0] - c[0], point[1] - c[1])
                if node not in out or w < out[node]:
                    out[node] = w
        return out

    best = math.inf
    start_entries = entries(p, sb)
    end_entries = entries(q, eb)
    for u, wu in start_entries.items():
        for v, wv in end_entries.items():
            best = min(best, wu + dist_matrix[u, v] + wv)
    return best


def crossings_share_block(c1: int, c2: int, nx: int, ny: int) -> bool:
    """True when both crossings are corners of one existing block."""
    i1, j1 = (c1 - 1) % (nx + 1), (c1 - 1) // (nx + 1)
    i2, j2 = (c2 - 1) % (nx + 1), (c2 - 1) // (nx + 1)
    for a in {i1 - 1, i1} & {i2 - 1, i2}:
        for b in {j1 - 1, j1} & {j2 - 1, j2}:
            if block_code(a, b, nx, ny) is not None:
                return True
    return False
