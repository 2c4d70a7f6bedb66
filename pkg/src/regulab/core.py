"""Partite graphs, 3-graphs and chains, with exact counting primitives.

Vertices are numbered globally and contiguously: part 0 occupies [0, s0),
part 1 the next s1 indices, and so on.  Adjacency is kept as row bitmasks
over *local* indices (global index minus the part offset), so neighborhood
intersections are single-word AND+popcount operations at desk scale.

Every density on a tested path is a fractions.Fraction; counts are plain
Python ints.  The 0/0 = 0 convention for relative densities lives in
:func:`ratio` and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence


class InvalidStructure(ValueError):
    """A container invariant does not hold."""


class DensityUndefined(ValueError):
    """Density requested over an empty ground set (other than 0/0 -> 0)."""


class ContainmentError(ValueError):
    """A restriction refers to vertices or edges outside its host."""


class ParseError(ValueError):
    """Malformed input file; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CapacityError(RuntimeError):
    """Instance exceeds a documented exhaustive-search cap."""


def ratio(num: int, den: int) -> Fraction:
    """num/den as an exact fraction, with the 0/0 -> 0 convention."""
    if den == 0:
        if num == 0:
            return Fraction(0)
        raise DensityUndefined(f"{num}/0 has no value")
    return Fraction(num, den)


def bits(mask: int) -> Iterator[int]:
    """Set bit positions of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class PartiteVertexSet:
    """Named parts with contiguous global numbering."""

    names: tuple[str, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.sizes) or not self.names:
            raise InvalidStructure("need matching non-empty names and sizes")
        if len(set(self.names)) != len(self.names):
            raise InvalidStructure("part names must be unique")
        if any(s < 0 for s in self.sizes):
            raise InvalidStructure("part sizes must be non-negative")

    @classmethod
    def of_sizes(cls, *sizes: int) -> "PartiteVertexSet":
        return cls(tuple(f"X{i}" for i in range(len(sizes))), tuple(sizes))

    @property
    def t(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def part_of(self, g: int) -> int:
        if not 0 <= g < self.total:
            raise InvalidStructure(f"vertex {g} out of range")
        off = self.offsets
        lo, hi = 0, self.t - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if off[mid] <= g:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def to_local(self, g: int) -> tuple[int, int]:
        i = self.part_of(g)
        return i, g - self.offsets[i]

    def to_global(self, part: int, local: int) -> int:
        if not 0 <= local < self.sizes[part]:
            raise InvalidStructure(f"local index {local} outside part {part}")
        return self.offsets[part] + local

    def full_mask(self, part: int) -> int:
        return (1 << self.sizes[part]) - 1


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph as row bitmasks: bit y of rows[x] is the edge (x, y)."""

    left_size: int
    right_size: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.left_size:
            raise InvalidStructure("rows must have one entry per left vertex")
        full = (1 << self.right_size) - 1
        for x, r in enumerate(self.rows):
            if r < 0 or r & ~full:
                raise InvalidStructure(f"row {x} has bits outside the right part")

    @classmethod
    def empty(cls, l: int, r: int) -> "BipartiteGraph":
        return cls(l, r, (0,) * l)

    @classmethod
    def complete(cls, l: int, r: int) -> "BipartiteGraph":
        return cls(l, r, ((1 << r) - 1,) * l)

    @classmethod
    def from_edges(cls, l: int, r: int, edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        rows = [0] * l
        for x, y in edges:
            if not (0 <= x < l and 0 <= y < r):
                raise InvalidStructure(f"edge ({x},{y}) out of range")
            rows[x] |= 1 << y
        return cls(l, r, tuple(rows))

    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def has_edge(self, x: int, y: int) -> bool:
        return bool(self.rows[x] >> y & 1)

    def density(self) -> Fraction:
        if self.left_size == 0 or self.right_size == 0:
            raise DensityUndefined("density of a bipartite graph with an empty side")
        return Fraction(self.edge_count, self.left_size * self.right_size)

    def columns(self) -> tuple[int, ...]:
        cols = [0] * self.right_size
        for x, r in enumerate(self.rows):
            while r:
                low = r & -r
                cols[low.bit_length() - 1] |= 1 << x
                r ^= low
        return tuple(cols)

    def restrict(self, left_mask: int, right_mask: int) -> "BipartiteGraph":
        """Same index space, edges outside left_mask x right_mask dropped."""
        rows = tuple(
            (r & right_mask) if left_mask >> x & 1 else 0 for x, r in enumerate(self.rows)
        )
        return BipartiteGraph(self.left_size, self.right_size, rows)

    def edges(self) -> Iterator[tuple[int, int]]:
        for x, r in enumerate(self.rows):
            for y in bits(r):
                yield x, y


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on [n] as symmetric row bitmasks."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise InvalidStructure("rows must have one entry per vertex")
        full = (1 << self.n) - 1
        for x, r in enumerate(self.rows):
            if r < 0 or r & ~full:
                raise InvalidStructure(f"row {x} out of range")
            if r >> x & 1:
                raise InvalidStructure(f"loop at vertex {x}")
        for x in range(self.n):
            for y in bits(self.rows[x]):
                if not self.rows[y] >> x & 1:
                    raise InvalidStructure(f"adjacency not symmetric at ({x},{y})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise InvalidStructure(f"bad edge ({u},{v})")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in bits(self.rows[u]):
                if v > u:
                    yield u, v

    def density(self) -> Fraction:
        if self.n < 2:
            raise DensityUndefined("density of a graph with fewer than 2 vertices")
        return Fraction(2 * self.edge_count, self.n * (self.n - 1))


@dataclass(frozen=True)
class MultipartiteGraph:
    """t-partite graph: one bipartite graph per part pair i < j."""

    vertex_set: PartiteVertexSet
    pair_graphs: Mapping[tuple[int, int], BipartiteGraph]

    def __post_init__(self):
        vs = self.vertex_set
        want = {(i, j) for i in range(vs.t) for j in range(i + 1, vs.t)}
        if set(self.pair_graphs) != want:
            raise InvalidStructure("pair_graphs must cover exactly all pairs i < j")
        for (i, j), bg in self.pair_graphs.items():
            if bg.left_size != vs.sizes[i] or bg.right_size != vs.sizes[j]:
                raise InvalidStructure(f"pair ({i},{j}) has wrong side sizes")

    @classmethod
    def complete(cls, vs: PartiteVertexSet) -> "MultipartiteGraph":
        return cls(
            vs,
            {
                (i, j): BipartiteGraph.complete(vs.sizes[i], vs.sizes[j])
                for i in range(vs.t)
                for j in range(i + 1, vs.t)
            },
        )

    @property
    def t(self) -> int:
        return self.vertex_set.t

    def pair(self, i: int, j: int) -> BipartiteGraph:
        return self.pair_graphs[(i, j)] if i < j else self.pair_graphs[(j, i)]

    def pair_density(self, i: int, j: int) -> Fraction:
        return self.pair(i, j).density()

    def with_pairs(self, updates: Mapping[tuple[int, int], BipartiteGraph]) -> "MultipartiteGraph":
        d = dict(self.pair_graphs)
        d.update(updates)
        return MultipartiteGraph(self.vertex_set, d)


def _canon_triple(u: int, v: int, w: int) -> tuple[int, int, int]:
    a, b, c = sorted((u, v, w))
    return a, b, c


@dataclass(frozen=True)
class ThreeGraph:
    """Plain 3-uniform hypergraph on [n]; triples stored sorted."""

    n: int
    triples: frozenset[tuple[int, int, int]]

    def __post_init__(self):
        for t in self.triples:
            u, v, w = t
            if not (0 <= u < v < w < self.n):
                raise InvalidStructure(f"triple {t} not sorted-distinct in range")

    @classmethod
    def from_triples(cls, n: int, triples: Iterable[Sequence[int]]) -> "ThreeGraph":
        out = set()
        for t in triples:
            u, v, w = t
            if len({u, v, w}) != 3:
                raise InvalidStructure(f"degenerate triple {tuple(t)}")
            out.add(_canon_triple(u, v, w))
        return cls(n, frozenset(out))

    @property
    def edge_count(self) -> int:
        return len(self.triples)

    def has_triple(self, u: int, v: int, w: int) -> bool:
        if len({u, v, w}) != 3:
            return False
        return _canon_triple(u, v, w) in self.triples


@dataclass(frozen=True)
class PartiteThreeGraph:
    """3-graph whose triples each cross three distinct parts."""

    vertex_set: PartiteVertexSet
    triples: frozenset[tuple[int, int, int]]

    def __post_init__(self):
        vs = self.vertex_set
        for t in self.triples:
            u, v, w = t
            if not (0 <= u < v < w < vs.total):
                raise InvalidStructure(f"triple {t} not sorted-distinct in range")
            if len({vs.part_of(u), vs.part_of(v), vs.part_of(w)}) != 3:
                raise InvalidStructure(f"triple {t} does not cross three parts")

    @classmethod
    def from_triples(
        cls, vs: PartiteVertexSet, triples: Iterable[Sequence[int]]
    ) -> "PartiteThreeGraph":
        return cls(vs, frozenset(_canon_triple(*t) for t in triples))

    @property
    def edge_count(self) -> int:
        return len(self.triples)

    def has_triple(self, u: int, v: int, w: int) -> bool:
        if len({u, v, w}) != 3:
            return False
        return _canon_triple(u, v, w) in self.triples

    def to_three_graph(self) -> ThreeGraph:
        return ThreeGraph(self.vertex_set.total, self.triples)

    def triples_of_parts(self, i: int, j: int, k: int) -> Iterator[tuple[int, int, int]]:
        """Triples whose parts are exactly {i, j, k} (global ids, sorted)."""
        vs = self.vertex_set
        want = {i, j, k}
        for t in self.triples:
            if {vs.part_of(t[0]), vs.part_of(t[1]), vs.part_of(t[2])} == want:
                yield t


def triangles_local(g: MultipartiteGraph, i: int = 0, j: int = 1, k: int = 2) -> Iterator[tuple[int, int, int]]:
    """Local-index triangles (x, y, z) with x in part i, y in j, z in k (i<j<k)."""
    ab, ac, bc = g.pair(i, j), g.pair(i, k), g.pair(j, k)
    for x in range(ab.left_size):
        row_ab = ab.rows[x]
        if not row_ab:
            continue
        row_ac = ac.rows[x]
        if not row_ac:
            continue
        for y in bits(row_ab):
            common = row_ac & bc.rows[y]
            for z in bits(common):
                yield x, y, z


def triangle_count(g: MultipartiteGraph, i: int = 0, j: int = 1, k: int = 2) -> int:
    """Number of triangles across parts (i, j, k), by row intersections."""
    ab, ac, bc = g.pair(i, j), g.pair(i, k), g.pair(j, k)
    total = 0
    for x in range(ab.left_size):
        row_ac = ac.rows[x]
        if not row_ac:
            continue
        for y in bits(ab.rows[x]):
            total += (row_ac & bc.rows[y]).bit_count()
    return total


@dataclass(frozen=True)
class Chain:
    """A tripartite graph together with a 3-graph supported on its triangles."""

    graph: MultipartiteGraph
    hyper: PartiteThreeGraph

    def __post_init__(self):
        if self.graph.t != 3:
            raise InvalidStructure("chain graph must be tripartite")
        if self.hyper.vertex_set != self.graph.vertex_set:
            raise InvalidStructure("chain graph and hypergraph disagree on parts")
        vs = self.graph.vertex_set
        off = vs.offsets
        for (u, v, w) in self.hyper.triples:
            x, y, z = u - off[0], v - off[1], w - off[2]
            if not (
                self.graph.pair(0, 1).has_edge(x, y)
                and self.graph.pair(0, 2).has_edge(x, z)
                and self.graph.pair(1, 2).has_edge(y, z)
            ):
                raise InvalidStructure(f"hyperedge {(u, v, w)} not on a triangle")

    @property
    def vertex_set(self) -> PartiteVertexSet:
        return self.graph.vertex_set


def relative_density(c: Chain) -> Fraction:
    """|E(H)| / number of triangles of the chain graph, 0/0 -> 0."""
    return ratio(c.hyper.edge_count, triangle_count(c.graph))


def product_density(g: MultipartiteGraph) -> Fraction:
    """Product of all pair densities; 0 when any pair is empty."""
    out = Fraction(1)
    for i in range(g.t):
        for j in range(i + 1, g.t):
            out *= g.pair_density(i, j)
    return out


def _mask_of(indices: Iterable[int], size: int) -> int:
    m = 0
    for a in indices:
        if not 0 <= a < size:
            raise ContainmentError(f"index {a} outside part of size {size}")
        m |= 1 << a
    return m


def restrict_chain(
    c: Chain,
    vertex_subsets: Sequence[Iterable[int]] | None = None,
    edge_subsets: Mapping[tuple[int, int], Sequence[int]] | None = None,
) -> Chain:
    """Chain induced on per-part vertex subsets and optional edge subsets.

    ``vertex_subsets`` lists local indices per part (None keeps everything).
    ``edge_subsets`` maps a part pair to replacement rows in the *original*
    local coordinates; rows must be contained in the original pair graph.
    The result is re-indexed to compact parts so densities use the restricted
    sizes, and hyperedges off the surviving triangles are dropped.
    """
    vs = c.vertex_set
    if vertex_subsets is None:
        masks = [vs.full_mask(i) for i in range(3)]
    else:
        if len(vertex_subsets) != 3:
            raise ContainmentError("need one vertex subset per part")
        masks = [_mask_of(sub, vs.sizes[i]) for i, sub in enumerate(vertex_subsets)]

    new_rows: dict[tuple[int, int], tuple[int, ...]] = {}
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        host = c.graph.pair(i, j)
        if edge_subsets is not None and (i, j) in edge_subsets:
            rows = tuple(edge_subsets[(i, j)])
            if len(rows) != host.left_size:
                raise ContainmentError(f"edge subset for {(i, j)} has wrong row count")
            for x, r in enumerate(rows):
                if r & ~host.rows[x]:
                    raise ContainmentError(f"edge subset for {(i, j)} not contained in host")
        else:
            rows = host.rows
        new_rows[(i, j)] = tuple(
            (rows[x] & masks[j]) if masks[i] >> x & 1 else 0 for x in range(host.left_size)
        )

    keep = [sorted(bits(m)) for m in masks]
    remap = [{old: new for new, old in enumerate(k)} for k in keep]
    sizes = tuple(len(k) for k in keep)
    sub_vs = PartiteVertexSet(vs.names, sizes)

    def compact(rows, i, j):
        out = []
        for old_x in keep[i]:
            r, row = 0, rows[old_x]
            for old_y in bits(row):
                r |= 1 << remap[j][old_y]
            out.append(r)
        return tuple(out)

    pair_graphs = {
        (i, j): BipartiteGraph(sizes[i], sizes[j], compact(new_rows[(i, j)], i, j))
        for (i, j) in ((0, 1), (0, 2), (1, 2))
    }
    sub_graph = MultipartiteGraph(sub_vs, pair_graphs)

    off_old, off_new = vs.offsets, sub_vs.offsets
    surviving = []
    for (u, v, w) in c.hyper.triples:
        x, y, z = u - off_old[0], v - off_old[1], w - off_old[2]
        if not (masks[0] >> x & 1 and masks[1] >> y & 1 and masks[2] >> z & 1):
            continue
        nx, ny, nz = remap[0][x], remap[1][y], remap[2][z]
        if (
            pair_graphs[(0, 1)].has_edge(nx, ny)
            and pair_graphs[(0, 2)].has_edge(nx, nz)
            and pair_graphs[(1, 2)].has_edge(ny, nz)
        ):
            surviving.append((off_new[0] + nx, off_new[1] + ny, off_new[2] + nz))
    sub_hyper = PartiteThreeGraph(sub_vs, frozenset(surviving))
    return Chain(sub_graph, sub_hyper)


def equitable_partition(n: int, t: int, seed: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Split [n] into t parts of size floor/ceil(n/t); remainder on the first parts.

    With a seed, vertices are shuffled (splitmix64 Fisher-Yates) before
    slicing; part contents are returned sorted either way.
    """
    if t < 1 or n < 0:
        raise InvalidStructure("need t >= 1 and n >= 0")
    order = list(range(n))
    if seed is not None:
        from .generators import SplitMix64

        SplitMix64(seed).shuffle(order)
    base, extra = divmod(n, t)
    parts, pos = [], 0
    for i in range(t):
        size = base + (1 if i < extra else 0)
        parts.append(tuple(sorted(order[pos : pos + size])))
        pos += size
    return tuple(parts)


def partite_from_three_graph(
    h: ThreeGraph, parts: Sequence[Sequence[int]], names: Sequence[str] | None = None
) -> tuple[PartiteThreeGraph, tuple[tuple[int, ...], ...]]:
    """Crossing triples of ``h`` w.r.t. a vertex partition, re-indexed to parts.

    Returns the partite 3-graph plus, per part, the original vertex ids in
    their new local order (for translating results back).
    """
    seen = [v for p in parts for v in p]
    if sorted(seen) != list(range(h.n)):
        raise InvalidStructure("parts must partition the vertex set")
    names = tuple(names) if names is not None else tuple(f"X{i}" for i in range(len(parts)))
    vs = PartiteVertexSet(names, tuple(len(p) for p in parts))
    where = {}
    for i, p in enumerate(parts):
        for local, v in enumerate(p):
            where[v] = vs.to_global(i, local)
    part_idx = {v: i for i, p in enumerate(parts) for v in p}
    crossing = []
    for (u, v, w) in h.triples:
        if len({part_idx[u], part_idx[v], part_idx[w]}) == 3:
            crossing.append(_canon_triple(where[u], where[v], where[w]))
    return PartiteThreeGraph(vs, frozenset(crossing)), tuple(tuple(p) for p in parts)


# ---------------------------------------------------------------------------
# Text formats.
#
# One line per declaration:
#   part <name> <size>
#   e <u> <v>        (global 0-based vertex ids)
#   t <u> <v> <w>
# '#' starts a comment; blank lines are ignored.  Canonical form declares
# parts in order, then edges/triples sorted lexicographically.
# ---------------------------------------------------------------------------


def _scan(text: str):
    parts: list[tuple[str, int]] = []
    edges: list[tuple[int, tuple[int, ...]]] = []
    triples: list[tuple[int, tuple[int, ...]]] = []
    seen_names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]
        if kind == "part":
            if len(args) != 2:
                raise ParseError(lineno, "expected: part <name> <size>")
            name, size_s = args
            try:
                size = int(size_s)
            except ValueError:
                raise ParseError(lineno, f"part size {size_s!r} is not an integer")
            if size < 0:
                raise ParseError(lineno, "part size must be non-negative")
            if name in seen_names:
                raise ParseError(lineno, f"duplicate part name {name!r}")
            if edges or triples:
                raise ParseError(lineno, "part declared after edges")
            seen_names.add(name)
            parts.append((name, size))
        elif kind in ("e", "t"):
            want = 2 if kind == "e" else 3
            if len(args) != want:
                raise ParseError(lineno, f"expected {want} vertex ids after {kind!r}")
            try:
                ids = tuple(int(a) for a in args)
            except ValueError:
                raise ParseError(lineno, "vertex ids must be integers")
            (edges if kind == "e" else triples).append((lineno, ids))
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")
    if not parts:
        raise ParseError(1, "no part declarations")
    return parts, edges, triples


def _check_range(lineno: int, ids: tuple[int, ...], total: int):
    for v in ids:
        if not 0 <= v < total:
            raise ParseError(lineno, f"vertex id {v} out of range (total {total})")


def load_multipartite(text: str) -> MultipartiteGraph:
    parts, edges, triples = _scan(text)
    if triples:
        raise ParseError(triples[0][0], "graph file may not contain triples")
    vs = PartiteVertexSet(tuple(n for n, _ in parts), tuple(s for _, s in parts))
    rows = {
        (i, j): [0] * vs.sizes[i] for i in range(vs.t) for j in range(i + 1, vs.t)
    }
    for lineno, (u, v) in edges:
        _check_range(lineno, (u, v), vs.total)
        (i, a), (j, b) = vs.to_local(u), vs.to_local(v)
        if i == j:
            raise ParseError(lineno, f"edge ({u},{v}) lies within part {vs.names[i]}")
        if i > j:
            i, j, a, b = j, i, b, a
        rows[(i, j)][a] |= 1 << b
    return MultipartiteGraph(
        vs,
        {
            key: BipartiteGraph(vs.sizes[key[0]], vs.sizes[key[1]], tuple(r))
            for key, r in rows.items()
        },
    )


def save_multipartite(g: MultipartiteGraph) -> str:
    vs = g.vertex_set
    lines = [f"part {n} {s}" for n, s in zip(vs.names, vs.sizes)]
    all_edges = []
    for i in range(vs.t):
        for j in range(i + 1, vs.t):
            off_i, off_j = vs.offsets[i], vs.offsets[j]
            for x, y in g.pair(i, j).edges():
                all_edges.append((off_i + x, off_j + y))
    lines += [f"e {u} {v}" for u, v in sorted(all_edges)]
    return "\n".join(lines) + "\n"


def load_partite_3graph(text: str) -> PartiteThreeGraph:
    parts, edges, triples = _scan(text)
    if edges:
        raise ParseError(edges[0][0], "3-graph file may not contain pair edges")
    vs = PartiteVertexSet(tuple(n for n, _ in parts), tuple(s for _, s in parts))
    out = set()
    for lineno, ids in triples:
        _check_range(lineno, ids, vs.total)
        if len(set(ids)) != 3:
            raise ParseError(lineno, f"triple {ids} repeats a vertex")
        if len({vs.part_of(v) for v in ids}) != 3:
            raise ParseError(lineno, f"triple {ids} does not cross three parts")
        out.add(_canon_triple(*ids))
    return PartiteThreeGraph(vs, frozenset(out))


def save_partite_3graph(h: PartiteThreeGraph) -> str:
    vs = h.vertex_set
    lines = [f"part {n} {s}" for n, s in zip(vs.names, vs.sizes)]
    lines += [f"t {u} {v} {w}" for u, v, w in sorted(h.triples)]
    return "\n".join(lines) + "\n"


def load_three_graph(text: str) -> ThreeGraph:
    """Any 3-graph file, part structure ignored (triples as plain 3-subsets)."""
    parts, edges, triples = _scan(text)
    if edges:
        raise ParseError(edges[0][0], "3-graph file may not contain pair edges")
    total = sum(s for _, s in parts)
    out = set()
    for lineno, ids in triples:
        _check_range(lineno, ids, total)
        if len(set(ids)) != 3:
            raise ParseError(lineno, f"triple {ids} repeats a vertex")
        out.add(_canon_triple(*ids))
    return ThreeGraph(total, frozenset(out))


def save_three_graph(h: ThreeGraph, name: str = "V") -> str:
    lines = [f"part {name} {h.n}"]
    lines += [f"t {u} {v} {w}" for u, v, w in sorted(h.triples)]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> Graph:
    """Any graph file as a plain simple graph (part structure ignored)."""
    parts, edges, triples = _scan(text)
    if triples:
        raise ParseError(triples[0][0], "graph file may not contain triples")
    total = sum(s for _, s in parts)
    out = []
    for lineno, (u, v) in edges:
        _check_range(lineno, (u, v), total)
        if u == v:
            raise ParseError(lineno, f"loop at vertex {u}")
        out.append((u, v))
    return Graph.from_edges(total, out)


def save_graph(g: Graph, name: str = "V") -> str:
    lines = [f"part {name} {g.n}"]
    lines += [f"e {u} {v}" for u, v in sorted(g.edges())]
    return "\n".join(lines) + "\n"

def relative_complement(c: Chain) -> Chain:
    """Chain carrying the triangles of the graph that are not hyperedges."""
    vs = c.vertex_set
    off = vs.offsets
    missing = set()
    for x, y, z in triangles_local(c.graph):
        u, v, w = off[0] + x, off[1] + y, off[2] + z
        if not c.hyper.has_triple(u, v, w):
            missing.add((u, v, w))
    return Chain(c.graph, PartiteThreeGraph(vs, frozenset(missing)))


def load_chain(text: str) -> Chain:
    """Chain file: part lines, then the graph's e-lines and the 3-graph's
    t-lines; every triple must sit on a triangle of the graph."""
    parts, edges, triples = _scan(text)
    names = tuple(n for n, _ in parts)
    sizes = tuple(s for _, s in parts)
    if len(parts) != 3:
        raise ParseError(1, "chain file needs exactly three parts")
    vs = PartiteVertexSet(names, sizes)
    rows = {(i, j): [0] * sizes[i] for i in range(3) for j in range(i + 1, 3)}
    for lineno, (u, v) in edges:
        _check_range(lineno, (u, v), vs.total)
        (i, a), (j, b) = vs.to_local(u), vs.to_local(v)
        if i == j:
            raise ParseError(lineno, f"edge ({u},{v}) lies within part {names[i]}")
        if i > j:
            i, j, a, b = j, i, b, a
        rows[(i, j)][a] |= 1 << b
    g = MultipartiteGraph(
        vs,
        {k: BipartiteGraph(sizes[k[0]], sizes[k[1]], tuple(r)) for k, r in rows.items()},
    )
    out = set()
    for lineno, ids in triples:
        _check_range(lineno, ids, vs.total)
        if len(set(ids)) != 3:
            raise ParseError(lineno, f"triple {ids} repeats a vertex")
        if len({vs.part_of(v) for v in ids}) != 3:
            raise ParseError(lineno, f"triple {ids} does not cross three parts")
        out.add(_canon_triple(*ids))
    hyper = PartiteThreeGraph(vs, frozenset(out))
    for u, v, w in hyper.triples:
        (_, a), (_, b), (_, cc) = vs.to_local(u), vs.to_local(v), vs.to_local(w)
        if not (
            g.pair(0, 1).has_edge(a, b)
            and g.pair(0, 2).has_edge(a, cc)
            and g.pair(1, 2).has_edge(b, cc)
        ):
            raise ParseError(1, f"triple ({u},{v},{w}) is not on a triangle")
    return Chain(g, hyper)


def save_chain(c: Chain) -> str:
    vs = c.vertex_set
    lines = [f"part {n} {s}" for n, s in zip(vs.names, vs.sizes)]
    all_edges = []
    for i in range(3):
        for j in range(i + 1, 3):
            off_i, off_j = vs.offsets[i], vs.offsets[j]
            for x, y in c.graph.pair(i, j).edges():
                all_edges.append((off_i + x, off_j + y))
    lines += [f"e {u} {v}" for u, v in sorted(all_edges)]
    lines += [f"t {u} {v} {w}" for u, v, w in sorted(c.hyper.triples)]
    return "\n".join(lines) + "\n"
