"""City plan: streets, crossings, blocks, constructions, apartments.

The plan is a flat-file description of a street map. Routing walks it
greedily: enter the street network at a crossing of the starting
block, repeatedly pick the attached block whose center is nearest the
goal, walk that block's perimeter to the crossing nearest the goal,
and cut across the final block to the goal point. Ties break toward
smaller codes, so routes are deterministic. When the greedy walk runs
out of unvisited crossings it falls back to an exact shortest-path
search over the same network and says so on the returned path.

Distances are Euclidean in meters; travel times come from per-street,
per-hour speed rows with mode defaults (pedestrian 5 km/h, car 40).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import KbqaError

Pos = tuple[float, float]

DEFAULT_SPEEDS_KMH = {"pedestrian": 5.0, "car": 40.0}


class PlanLoadError(KbqaError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnresolvedPlaceError(KbqaError):
    """A place cannot be pinned to coordinates on this plan."""


class UnreachableError(KbqaError):
    """No route exists; carries the partial path walked so far."""

    def __init__(self, start: Pos, end: Pos, partial: "Path"):
        super().__init__(f"no route from {start} to {end}")
        self.partial = partial


@dataclass(frozen=True)
class Street:
    code: int
    name: str

    @property
    def name_key(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Crossing:
    code: int
    center: Pos
    # Attached blocks clockwise from top-left; None where the city ends.
    block_codes: tuple[int | None, int | None, int | None, int | None]


@dataclass(frozen=True)
class Block:
    code: int
    # Bounding streets and corner crossings, cyclically aligned: the
    # i-th street runs along the edge from corner i to corner i+1.
    street_codes: tuple[int | None, int | None, int | None, int | None]
    crossing_slots: tuple[int | None, int | None, int | None, int | None]
    center: Pos

    def present_crossings(self) -> tuple[int, ...]:
        return tuple(c for c in self.crossing_slots if c is not None)


@dataclass(frozen=True)
class Construction:
    code: int
    street_code: int
    center: Pos
    block_code: int
    house_number: int | None = None
    name: str | None = None


@dataclass(frozen=True)
class Apartment:
    code: int
    house_code: int  # construction code
    entrance: int
    floor: int
    number: int


@dataclass(frozen=True)
class Path:
    """A polyline route. ``fallback`` marks an exact-search result."""

    waypoints: tuple[Pos, ...]
    total_length: float
    crossing_codes: tuple[int, ...] = ()
    fallback: bool = False


def _dist(a: Pos, b: Pos) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _polyline_length(points: list[Pos]) -> float:
    return sum(_dist(a, b) for a, b in zip(points, points[1:]))


def round_minutes(minutes: float) -> int:
    """Round to whole minutes, halves going up."""
    return math.floor(minutes + 0.5)


def _on_segment(p: Pos, a: Pos, b: Pos, tol: float = 1e-7) -> bool:
    ax, ay = b[0] - a[0], b[1] - a[1]
    px, py = p[0] - a[0], p[1] - a[1]
    cross = ax * py - ay * px
    seg2 = ax * ax + ay * ay
    if seg2 == 0.0:
        return _dist(p, a) <= tol
    if abs(cross) / math.sqrt(seg2) > tol:
        return False
    dot = px * ax + py * ay
    return -tol * math.sqrt(seg2) <= dot <= seg2 + tol * math.sqrt(seg2)


def _point_in_polygon(p: Pos, poly: list[Pos]) -> bool:
    n = len(poly)
    for i in range(n):
        if _on_segment(p, poly[i], poly[(i + 1) % n]):
            return True
    x, y = p
    inside = False
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_at = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < x_at:
                inside = not inside
    return inside


class SpeedTable:
    """Per-street, per-hour speed rows for a travel mode."""

    def __init__(self, rows: list[tuple[str, int, int, int, float]]):
        self._rows = list(rows)

    def lookup(self, mode: str, street_code: int, hour: int | None) -> float | None:
        if hour is None:
            return None
        for row_mode, street, h_from, h_to, kmh in self._rows:
            if row_mode != mode or street != street_code:
                continue
            if h_from <= h_to:
                if h_from <= hour < h_to:
                    return kmh
            elif hour >= h_from or hour < h_to:  # wraps past midnight
                return kmh
        return None

    @classmethod
    def from_text(cls, text: str) -> "SpeedTable":
        rows = []
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 5:
                raise PlanLoadError(no, f"expected 5 speed fields, got {len(parts)}")
            mode, street, h_from, h_to, kmh = parts
            if mode not in DEFAULT_SPEEDS_KMH:
                raise PlanLoadError(no, f"unknown travel mode {mode!r}")
            try:
                street_i, from_i, to_i, kmh_f = int(street), int(h_from), int(h_to), float(kmh)
            except ValueError:
                raise PlanLoadError(no, f"bad numeric field in speed row {line!r}")
            if not (0 <= from_i <= 24 and 0 <= to_i <= 24):
                raise PlanLoadError(no, "speed hours must lie in 0..24")
            if kmh_f <= 0:
                raise PlanLoadError(no, "speed must be positive")
            rows.append((mode, street_i, from_i, to_i, kmh_f))
        return cls(rows)


def load_speeds(path) -> SpeedTable:
    with open(path, "r", encoding="utf-8") as fh:
        return SpeedTable.from_text(fh.read())


class CityPlan:
    def __init__(
        self,
        streets: dict[int, Street],
        crossings: dict[int, Crossing],
        blocks: dict[int, Block],
        constructions: dict[int, Construction],
        apartments: dict[int, Apartment],
    ):
        self.streets = streets
        self.crossings = crossings
        self.blocks = blocks
        self.constructions = constructions
        self.apartments = apartments
        self.speeds: SpeedTable | None = None

        self._street_by_name = {s.name_key: s for s in streets.values()}
        self._crossing_by_pos = {c.center: c.code for c in crossings.values()}
        self._edge_street: dict[tuple[int, int], int] = {}
        for b in blocks.values():
            for i in range(4):
                a, c = b.crossing_slots[i], b.crossing_slots[(i + 1) % 4]
                s = b.street_codes[i]
                if a is not None and c is not None and s is not None:
                    self._edge_street[(min(a, c), max(a, c))] = s
        self._polygons = {
            b.code: [crossings[c].center for c in b.present_crossings()]
            for b in blocks.values()
        }
        self._bounds = self._compute_bounds()
        self._bucket_index, self._bucket_size = self._build_bucket_index()
        self._adjacency: dict[int, dict[int, float]] | None = None

    # -- geometry ----------------------------------------------------------

    def _compute_bounds(self) -> tuple[float, float, float, float]:
        points = [c.center for c in self.crossings.values()]
        points += [c.center for c in self.constructions.values()]
        if not points:
            return (0.0, 0.0, 0.0, 0.0)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        return (min(xs), min(ys), max(xs), max(ys))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self._bounds

    def _build_bucket_index(self):
        # Coarse spatial index: blocks bucketed by bounding box overlap.
        minx, miny, maxx, maxy = self._bounds
        k = max(1, int(math.sqrt(len(self.blocks) or 1)))
        w = max(maxx - minx, 1e-9) / k
        h = max(maxy - miny, 1e-9) / k
        index: dict[tuple[int, int], list[int]] = {}
        for b in self.blocks.values():
            poly = self._polygons[b.code]
            if not poly:
                continue
            bx0 = int((min(p[0] for p in poly) - minx) / w)
            bx1 = int((max(p[0] for p in poly) - minx) / w)
            by0 = int((min(p[1] for p in poly) - miny) / h)
            by1 = int((max(p[1] for p in poly) - miny) / h)
            for bx in range(max(0, bx0), min(k - 1, bx1) + 1):
                for by in range(max(0, by0), min(k - 1, by1) + 1):
                    index.setdefault((bx, by), []).append(b.code)
        return index, (minx, miny, w, h, k)

    def blocks_containing(self, p: Pos) -> list[Block]:
        """Blocks whose area (boundary included) covers the point."""
        minx, miny, w, h, k = self._bucket_size
        bx = min(k - 1, max(0, int((p[0] - minx) / w)))
        by = min(k - 1, max(0, int((p[1] - miny) / h)))
        found = []
        for code in self._bucket_index.get((bx, by), ()):
            if self._contains(self.blocks[code], p):
                found.append(self.blocks[code])
        found.sort(key=lambda b: b.code)
        return found

    def _contains(self, block: Block, p: Pos) -> bool:
        poly = self._polygons[block.code]
        if len(poly) >= 3:
            return _point_in_polygon(p, poly)
        if len(poly) == 2:
            return _on_segment(p, poly[0], poly[1])
        if len(poly) == 1:
            return _dist(p, poly[0]) <= 1e-7
        return False

    def _require_inside(self, p: Pos) -> None:
        minx, miny, maxx, maxy = self._bounds
        eps = 1e-9
        if not (minx - eps <= p[0] <= maxx + eps and miny - eps <= p[1] <= maxy + eps):
            raise ValueError(f"position {p} lies outside the plan region")

    # -- locating ----------------------------------------------------------

    def locate(self, place) -> tuple[Pos, Block]:
        """Coordinates and containing block for a street address.

        With a house number the matching construction decides; a bare
        street name resolves to the midpoint of the street's span.
        """
        street = self._street_by_name.get(place.street_key)
        if street is None:
            raise UnresolvedPlaceError(f"no street named {place.street!r} on the plan")
        if place.house_number is not None:
            for code in sorted(self.constructions):
                c = self.constructions[code]
                if c.street_code == street.code and c.house_number == place.house_number:
                    return c.center, self.blocks[c.block_code]
            raise UnresolvedPlaceError(
                f"no house {place.house_number} on {place.street} street"
            )
        points = [
            self.crossings[code].center
            for pair, s in self._edge_street.items()
            if s == street.code
            for code in pair
        ]
        if not points:
            points = [
                c.center for c in self.constructions.values() if c.street_code == street.code
            ]
        if not points:
            raise UnresolvedPlaceError(f"street {place.street!r} has no located points")
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        mid = ((min(xs) + max(xs)) / 2.0, (min(ys) + max(ys)) / 2.0)
        blocks = self.blocks_containing(mid)
        if not blocks:
            raise UnresolvedPlaceError(
                f"midpoint of street {place.street!r} falls outside every block"
            )
        return mid, blocks[0]

    def apartment_position(self, code: int) -> tuple[Pos, Block]:
        apt = self.apartments.get(code)
        if apt is None:
            raise UnresolvedPlaceError(f"no apartment with code {code}")
        house = self.constructions[apt.house_code]
        return house.center, self.blocks[house.block_code]

    # -- routing -----------------------------------------------------------

    def route(self, start: Pos, end: Pos) -> Path:
        """Greedy block-to-block route from start to end.

        Both points must lie inside the plan's bounding region. Points
        sharing a block connect by a straight segment. Deterministic:
        distance ties break toward smaller codes.
        """
        start = (float(start[0]), float(start[1]))
        end = (float(end[0]), float(end[1]))
        self._require_inside(start)
        self._require_inside(end)
        if start == end:
            return Path((start,), 0.0)
        start_blocks = self.blocks_containing(start)
        end_blocks = self.blocks_containing(end)
        if {b.code for b in start_blocks} & {b.code for b in end_blocks}:
            return Path((start, end), _dist(start, end))

        waypoints: list[Pos] = [start]
        codes: list[int] = []
        visited: set[int] = set()
        cur = self._crossing_by_pos.get(start)
        if cur is None:
            entry = next(
                (b for b in start_blocks if b.present_crossings()), None
            )
            if entry is None:
                return self._fallback(start, end, waypoints, codes)
            cur = min(
                entry.present_crossings(),
                key=lambda c: (_dist(self.crossings[c].center, end), c),
            )
            waypoints.append(self.crossings[cur].center)
        codes.append(cur)
        visited.add(cur)

        for _ in range(len(self.crossings) + 1):
            attached = [
                self.blocks[b]
                for b in self.crossings[cur].block_codes
                if b is not None
            ]
            if not attached:
                return self._fallback(start, end, waypoints, codes)
            target_block = min(attached, key=lambda b: (_dist(b.center, end), b.code))
            if self._contains(target_block, end):
                waypoints.append(end)
                return Path(tuple(waypoints), _polyline_length(waypoints), tuple(codes))
            candidates = [
                c for c in target_block.present_crossings() if c not in visited
            ]
            if not candidates:
                return self._fallback(start, end, waypoints, codes)
            nxt = min(
                candidates, key=lambda c: (_dist(self.crossings[c].center, end), c)
            )
            for c in self._perimeter_walk(target_block, cur, nxt)[1:]:
                waypoints.append(self.crossings[c].center)
                codes.append(c)
                visited.add(c)
            cur = nxt
        return self._fallback(start, end, waypoints, codes)

    def _perimeter_walk(self, block: Block, a: int, b: int) -> list[int]:
        """Corner sequence from a to b along the block rim, shorter side.

        Equal-length sides break the tie by comparing the code
        sequences, so the walk never depends on iteration order.
        """
        cyc = block.present_crossings()
        if a == b:
            return [a]
        i, j = cyc.index(a), cyc.index(b)
        n = len(cyc)
        fwd = [cyc[(i + k) % n] for k in range(((j - i) % n) + 1)]
        bwd = [cyc[(i - k) % n] for k in range(((i - j) % n) + 1)]

        def measure(seq: list[int]) -> tuple[float, tuple[int, ...]]:
            pts = [self.crossings[c].center for c in seq]
            return (_polyline_length(pts), tuple(seq))

        return min(fwd, bwd, key=measure)

    def _routing_adjacency(self) -> dict[int, dict[int, float]]:
        # Every pair of corners of one block is mutually reachable:
        # perimeter or straight across, the crow-flies length bounds both.
        if self._adjacency is None:
            adj: dict[int, dict[int, float]] = {c: {} for c in self.crossings}
            for block in self.blocks.values():
                corners = block.present_crossings()
                for i, a in enumerate(corners):
                    for b in corners[i + 1:]:
                        w = _dist(self.crossings[a].center, self.crossings[b].center)
                        if b not in adj[a] or w < adj[a][b]:
                            adj[a][b] = w
                            adj[b][a] = w
            self._adjacency = adj
        return self._adjacency

    def _fallback(self, start: Pos, end: Pos, waypoints: list[Pos], codes: list[int]) -> Path:
        exact = self._exact_route(start, end)
        if exact is None:
            partial = Path(tuple(waypoints), _polyline_length(waypoints), tuple(codes))
            raise UnreachableError(start, end, partial)
        pts, through = exact
        return Path(tuple(pts), _polyline_length(pts), tuple(through), fallback=True)

    def _exact_route(self, start: Pos, end: Pos):
        """Dijkstra over the crossing network; None when disconnected."""
        adj = self._routing_adjacency()
        START, END = -1, -2

        def entry_edges(p: Pos) -> dict[int, float]:
            code = self._crossing_by_pos.get(p)
            if code is not None:
                return {code: 0.0}
            edges: dict[int, float] = {}
            for block in self.blocks_containing(p):
                for c in block.present_crossings():
                    w = _dist(p, self.crossings[c].center)
                    if c not in edges or w < edges[c]:
                        edges[c] = w
            return edges

        start_edges = entry_edges(start)
        end_edges = entry_edges(end)
        if not start_edges or not end_edges:
            return None

        dist: dict[int, float] = {START: 0.0}
        prev: dict[int, int] = {}
        heap: list[tuple[float, int]] = [(0.0, START)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist.get(node, math.inf):
                continue
            if node == END:
                break
            if node == START:
                neighbours = start_edges.items()
            else:
                neighbours = list(adj[node].items())
                if node in end_edges:
                    neighbours.append((END, end_edges[node]))
            for nxt, w in neighbours:
                nd = d + w
                if nd < dist.get(nxt, math.inf):
                    dist[nxt] = nd
                    prev[nxt] = node
                    heapq.heappush(heap, (nd, nxt))
        if END not in dist:
            return None
        chain: list[int] = []
        node = END
        while node != START:
            chain.append(node)
            node = prev[node]
        chain.reverse()
        through = [c for c in chain if c >= 0]
        pts = [start] + [self.crossings[c].center for c in through] + [end]
        # Collapse repeats when start or end already sits on a crossing.
        cleaned = [pts[0]]
        for p in pts[1:]:
            if p != cleaned[-1]:
                cleaned.append(p)
        return cleaned, through

    # -- travel time ---------------------------------------------------------

    def _segment_street(self, a: Pos, b: Pos) -> int | None:
        ca = self._crossing_by_pos.get(a)
        cb = self._crossing_by_pos.get(b)
        if ca is None or cb is None:
            return None
        return self._edge_street.get((min(ca, cb), max(ca, cb)))

    def travel_time(self, path: Path, mode: str, departure=None) -> float:
        """Minutes to cover the path, honoring per-street car speeds.

        ``departure`` is a timestamp whose hour selects speed rows; the
        whole trip uses the departure hour. Segments between points
        that are not both crossings move at the mode default.
        """
        if mode not in DEFAULT_SPEEDS_KMH:
            raise ValueError(f"unknown travel mode {mode!r}")
        hour = departure.hour if departure is not None else None
        total = 0.0
        for a, b in zip(path.waypoints, path.waypoints[1:]):
            seg = _dist(a, b)
            if seg == 0.0:
                continue
            kmh = DEFAULT_SPEEDS_KMH[mode]
            if self.speeds is not None:
                street = self._segment_street(a, b)
                if street is not None:
                    row = self.speeds.lookup(mode, street, hour)
                    if row is not None:
                        kmh = row
            total += (seg / 1000.0) / kmh * 60.0
        return total


# -- plan file parsing -------------------------------------------------------


def _int_or_none(field_text: str) -> int | None:
    return int(field_text) if field_text else None


def parse_plan(text: str) -> CityPlan:
    """Build a plan from ``street|``, ``crossing|``, ``block|``,
    ``construction|``, and ``apartment|`` records, validating every
    cross-reference."""
    streets: dict[int, Street] = {}
    crossings: dict[int, Crossing] = {}
    blocks: dict[int, Block] = {}
    constructions: dict[int, Construction] = {}
    apartments: dict[int, Apartment] = {}
    lines: dict[str, int] = {}  # record key -> line, for late validation

    def fail(no: int, msg: str):
        raise PlanLoadError(no, msg)

    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        head = parts[0].lower()
        try:
            if head == "street":
                if len(parts) != 3:
                    fail(no, "street record needs: street|code|name")
                code, name = int(parts[1]), parts[2]
                if not name:
                    fail(no, "street needs a name")
                if code in streets:
                    fail(no, f"duplicate street code {code}")
                if name.lower() in {s.name_key for s in streets.values()}:
                    fail(no, f"duplicate street name {name!r}")
                streets[code] = Street(code, name)
            elif head == "crossing":
                if len(parts) != 8:
                    fail(no, "crossing record needs: crossing|code|x|y|b1|b2|b3|b4")
                code = int(parts[1])
                if code in crossings:
                    fail(no, f"duplicate crossing code {code}")
                center = (float(parts[2]), float(parts[3]))
                attached = tuple(_int_or_none(p) for p in parts[4:8])
                crossings[code] = Crossing(code, center, attached)
                lines[f"crossing:{code}"] = no
            elif head == "block":
                if len(parts) != 12:
                    fail(no, "block record needs: block|code|s1..s4|c1..c4|x|y")
                code = int(parts[1])
                if code in blocks:
                    fail(no, f"duplicate block code {code}")
                street_codes = tuple(_int_or_none(p) for p in parts[2:6])
                crossing_slots = tuple(_int_or_none(p) for p in parts[6:10])
                center = (float(parts[10]), float(parts[11]))
                blocks[code] = Block(code, street_codes, crossing_slots, center)
                lines[f"block:{code}"] = no
            elif head == "construction":
                if len(parts) != 8:
                    fail(no, "construction record needs: construction|code|house|street|name|x|y|block")
                code = int(parts[1])
                if code in constructions:
                    fail(no, f"duplicate construction code {code}")
                house = _int_or_none(parts[2])
                if house is not None and house <= 0:
                    fail(no, "house number must be positive")
                constructions[code] = Construction(
                    code=code,
                    house_number=house,
                    street_code=int(parts[3]),
                    name=parts[4] or None,
                    center=(float(parts[5]), float(parts[6])),
                    block_code=int(parts[7]),
                )
                lines[f"construction:{code}"] = no
            elif head == "apartment":
                if len(parts) != 6:
                    fail(no, "apartment record needs: apartment|code|house|entrance|floor|number")
                code = int(parts[1])
                if code in apartments:
                    fail(no, f"duplicate apartment code {code}")
                apartments[code] = Apartment(
                    code, int(parts[2]), int(parts[3]), int(parts[4]), int(parts[5])
                )
                lines[f"apartment:{code}"] = no
            else:
                fail(no, f"unknown record type {parts[0]!r}")
        except ValueError as exc:
            fail(no, f"bad numeric field: {exc}")

    # Late validation, once every record is in.
    for c in crossings.values():
        no = lines[f"crossing:{c.code}"]
        for b in c.block_codes:
            if b is None:
                continue
            if b not in blocks:
                fail(no, f"crossing {c.code} names missing block {b}")
            if c.code not in blocks[b].crossing_slots:
                fail(no, f"crossing {c.code} names block {b}, which does not list it back")
    for b in blocks.values():
        no = lines[f"block:{b.code}"]
        for s in b.street_codes:
            if s is not None and s not in streets:
                fail(no, f"block {b.code} names missing street {s}")
        for c in b.crossing_slots:
            if c is None:
                continue
            if c not in crossings:
                fail(no, f"block {b.code} names missing crossing {c}")
            if b.code not in crossings[c].block_codes:
                fail(no, f"block {b.code} names crossing {c}, which does not list it back")
    for k in constructions.values():
        no = lines[f"construction:{k.code}"]
        if k.street_code not in streets:
            fail(no, f"construction {k.code} names missing street {k.street_code}")
        if k.block_code not in blocks:
            fail(no, f"construction {k.code} names missing block {k.block_code}")
    for a in apartments.values():
        no = lines[f"apartment:{a.code}"]
        if a.house_code not in constructions:
            fail(no, f"apartment {a.code} names missing construction {a.house_code}")

    return CityPlan(streets, crossings, blocks, constructions, apartments)


def load_plan(path) -> CityPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_plan(fh.read())
