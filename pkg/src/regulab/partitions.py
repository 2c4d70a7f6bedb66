"""Cylinder and chain partitions, the mean-squared density q, and audits.

A vertex cylinder partition splits the product X_1 x ... x X_t into product
cells; an edge partition splits each bipartite host into edge cells; a
cylinder chain partition carries one edge partition per cylinder.  The Venn
construction flattens a cylinder chain partition into a plain chain
partition (vertex parts plus partitions of each complete bipartite graph
between them).

q is the triangle-mass-weighted sum of squared relative densities of the
cells.  The ``fast`` mode enumerates the host's triangles once and tallies
cells by label; the ``naive`` mode re-enumerates each cell by triple loops.
Both are exact and must agree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Mapping, Sequence

from .core import (
    BipartiteGraph,
    CapacityError,
    Chain,
    InvalidStructure,
    MultipartiteGraph,
    PartiteThreeGraph,
    PartiteVertexSet,
    ThreeGraph,
    bits,
    ratio,
    relative_density,
)
from .quasirandom import (
    PolyFunction,
    QuasirandomnessCertificate,
    chain_quasirandomness,
    masked_pair_quasirandomness,
)


def rational_sqrt(f: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    if f < 0:
        return None
    rn, rd = isqrt(f.numerator), isqrt(f.denominator)
    if rn * rn == f.numerator and rd * rd == f.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class VertexCylinder:
    """A product cell, one local-index bitmask per part."""

    masks: tuple[int, ...]

    def sizes(self) -> tuple[int, ...]:
        return tuple(m.bit_count() for m in self.masks)

    def weight(self, vs: PartiteVertexSet) -> Fraction:
        num = den = 1
        for m, s in zip(self.masks, vs.sizes):
            num *= m.bit_count()
            den *= s
        return ratio(num, den)

    def contains(self, locals_: Sequence[int]) -> bool:
        return all(m >> a & 1 for m, a in zip(self.masks, locals_))

    def is_empty(self) -> bool:
        return any(m == 0 for m in self.masks)


@dataclass(frozen=True)
class VertexCylinderPartition:
    vertex_set: PartiteVertexSet
    cylinders: tuple[VertexCylinder, ...]

    def __post_init__(self):
        self.validate()

    @classmethod
    def trivial(cls, vs: PartiteVertexSet) -> "VertexCylinderPartition":
        return cls(vs, (VertexCylinder(tuple(vs.full_mask(i) for i in range(vs.t))),))

    def validate(self) -> None:
        """Exact partition check: masks in range, pairwise product-disjoint,
        and cell weights summing to the full product.  No enumeration."""
        vs = self.vertex_set
        total = 1
        for s in vs.sizes:
            total *= s
        acc = 0
        for cyl in self.cylinders:
            if len(cyl.masks) != vs.t:
                raise InvalidStructure("cylinder arity does not match parts")
            prod = 1
            for i, m in enumerate(cyl.masks):
                if m < 0 or m & ~vs.full_mask(i):
                    raise InvalidStructure("cylinder mask out of part range")
                prod *= m.bit_count()
            acc += prod
        for a in range(len(self.cylinders)):
            ca = self.cylinders[a]
            if ca.is_empty():
                continue
            for b in range(a + 1, len(self.cylinders)):
                cb = self.cylinders[b]
                if cb.is_empty():
                    continue
                if all(ma & mb for ma, mb in zip(ca.masks, cb.masks)):
                    raise InvalidStructure(f"cylinders {a} and {b} overlap")
        if acc != total:
            raise InvalidStructure(f"cylinders cover {acc} of {total} tuples")

    def lookup(self, locals_: Sequence[int]) -> int:
        for idx, cyl in enumerate(self.cylinders):
            if cyl.contains(locals_):
                return idx
        raise InvalidStructure(f"tuple {tuple(locals_)} not covered")


@dataclass(frozen=True)
class PairPartition:
    """Partition of a bipartite host's edges between two index spaces.

    ``host_rows`` carries the host edges; cells are row tuples of the same
    length whose disjoint union is the host.  ``left_mask``/``right_mask``
    name the relevant vertex sets (cells may only use those bits), so pair
    densities divide by the mask sizes, not the ambient index spaces.
    """

    left_size: int
    right_size: int
    left_mask: int
    right_mask: int
    host_rows: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.host_rows) != self.left_size:
            raise InvalidStructure("host rows length mismatch")
        full_r = (1 << self.right_size) - 1
        if self.left_mask & ~((1 << self.left_size) - 1) or self.right_mask & ~full_r:
            raise InvalidStructure("masks out of range")
        for x, r in enumerate(self.host_rows):
            inside = (self.left_mask >> x & 1) and not (r & ~self.right_mask)
            if r and not inside:
                raise InvalidStructure(f"host row {x} outside masks")
        for cell in self.cells:
            if len(cell) != self.left_size:
                raise InvalidStructure("cell rows length mismatch")
        for x in range(self.left_size):
            union = 0
            count = 0
            for cell in self.cells:
                union |= cell[x]
                count += cell[x].bit_count()
                if cell[x] & ~self.host_rows[x]:
                    raise InvalidStructure(f"cell exceeds host at row {x}")
            if union != self.host_rows[x] or count != self.host_rows[x].bit_count():
                raise InvalidStructure(f"cells do not partition host at row {x}")

    @classmethod
    def trivial(
        cls, left_size: int, right_size: int, left_mask: int, right_mask: int, host_rows
    ) -> "PairPartition":
        return cls(left_size, right_size, left_mask, right_mask, tuple(host_rows), (tuple(host_rows),))

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def sides(self) -> tuple[int, int]:
        return self.left_mask.bit_count(), self.right_mask.bit_count()

    def cell_density(self, idx: int) -> Fraction:
        l, r = self.sides()
        return ratio(sum(row.bit_count() for row in self.cells[idx]), l * r)

    def labels(self) -> list[list[int]]:
        """label[x][y] = cell index, -1 off the host."""
        lab = [[-1] * self.right_size for _ in range(self.left_size)]
        for idx, cell in enumerate(self.cells):
            for x in range(self.left_size):
                for y in bits(cell[x]):
                    lab[x][y] = idx
        return lab

    def restrict(self, left_mask: int, right_mask: int) -> "PairPartition":
        """Restriction to sub-masks; empty cells dropped."""
        lm, rm = self.left_mask & left_mask, self.right_mask & right_mask
        host = tuple((r & rm) if lm >> x & 1 else 0 for x, r in enumerate(self.host_rows))
        cells = []
        for cell in self.cells:
            sub = tuple((r & rm) if lm >> x & 1 else 0 for x, r in enumerate(cell))
            if any(sub):
                cells.append(sub)
        if not cells and any(host):
            raise InvalidStructure("restriction lost host edges")
        if not cells:
            cells = [tuple(0 for _ in range(self.left_size))]
        return PairPartition(self.left_size, self.right_size, lm, rm, host, tuple(cells))


@dataclass(frozen=True)
class EdgePartition:
    """One PairPartition per part pair i < j of a tripartite or t-partite host."""

    pairs: Mapping[tuple[int, int], PairPartition]

    def pair(self, i: int, j: int) -> PairPartition:
        return self.pairs[(i, j)] if i < j else self.pairs[(j, i)]

    @property
    def cell_count(self) -> int:
        return max(pp.cell_count for pp in self.pairs.values())

    @classmethod
    def trivial_for_graph(cls, g: MultipartiteGraph) -> "EdgePartition":
        vs = g.vertex_set
        return cls(
            {
                (i, j): PairPartition.trivial(
                    vs.sizes[i], vs.sizes[j], vs.full_mask(i), vs.full_mask(j), g.pair(i, j).rows
                )
                for i in range(vs.t)
                for j in range(i + 1, vs.t)
            }
        )

    @classmethod
    def trivial_for_cylinder(cls, vs: PartiteVertexSet, cyl: VertexCylinder) -> "EdgePartition":
        out = {}
        for i in range(vs.t):
            for j in range(i + 1, vs.t):
                rows = tuple(
                    cyl.masks[j] if cyl.masks[i] >> x & 1 else 0 for x in range(vs.sizes[i])
                )
                out[(i, j)] = PairPartition.trivial(
                    vs.sizes[i], vs.sizes[j], cyl.masks[i], cyl.masks[j], rows
                )
        return cls(out)


@dataclass(frozen=True)
class CylinderChainPartition:
    vertex: VertexCylinderPartition
    edges: tuple[EdgePartition, ...]

    def __post_init__(self):
        vs = self.vertex.vertex_set
        if len(self.edges) != len(self.vertex.cylinders):
            raise InvalidStructure("need one edge partition per cylinder")
        for cyl, ep in zip(self.vertex.cylinders, self.edges):
            for i in range(vs.t):
                for j in range(i + 1, vs.t):
                    pp = ep.pair(i, j)
                    if pp.left_mask != cyl.masks[i] or pp.right_mask != cyl.masks[j]:
                        raise InvalidStructure("edge partition masks disagree with cylinder")
                    want = tuple(
                        cyl.masks[j] if cyl.masks[i] >> x & 1 else 0 for x in range(vs.sizes[i])
                    )
                    if pp.host_rows != want:
                        raise InvalidStructure("cylinder edge host must be complete bipartite")

    @classmethod
    def trivial(cls, vs: PartiteVertexSet) -> "CylinderChainPartition":
        vcp = VertexCylinderPartition.trivial(vs)
        return cls(vcp, (EdgePartition.trivial_for_cylinder(vs, vcp.cylinders[0]),))

    @property
    def vertex_count(self) -> int:
        return len(self.vertex.cylinders)

    @property
    def edge_count(self) -> int:
        return max(ep.cell_count for ep in self.edges)


@dataclass(frozen=True)
class ChainPartition:
    """Vertex parts of a universe plus partitions of each complete bipartite
    graph between parts.  Pair partitions index vertices positionally within
    the part tuples."""

    n: int
    parts: tuple[tuple[int, ...], ...]
    pairs: Mapping[tuple[int, int], PairPartition]

    def __post_init__(self):
        seen = sorted(v for p in self.parts for v in p)
        if seen != list(range(self.n)):
            raise InvalidStructure("parts must partition the universe")
        for p in self.parts:
            if list(p) != sorted(p):
                raise InvalidStructure("part tuples must be sorted")
        want = {
            (a, b) for a in range(len(self.parts)) for b in range(a + 1, len(self.parts))
        }
        if set(self.pairs) != want:
            raise InvalidStructure("pair partitions must cover exactly all part pairs")
        for (a, b), pp in self.pairs.items():
            la, lb = len(self.parts[a]), len(self.parts[b])
            if pp.left_size != la or pp.right_size != lb:
                raise InvalidStructure(f"pair ({a},{b}) has wrong sizes")
            if pp.left_mask != (1 << la) - 1 or pp.right_mask != (1 << lb) - 1:
                raise InvalidStructure("chain partition pairs must use full masks")
            if pp.host_rows != ((1 << lb) - 1,) * la:
                raise InvalidStructure("chain partition hosts must be complete")

    @classmethod
    def trivial(cls, n: int, parts: Sequence[Sequence[int]]) -> "ChainPartition":
        pt = tuple(tuple(sorted(p)) for p in parts)
        pairs = {}
        for a in range(len(pt)):
            for b in range(a + 1, len(pt)):
                la, lb = len(pt[a]), len(pt[b])
                pairs[(a, b)] = PairPartition.trivial(
                    la, lb, (1 << la) - 1, (1 << lb) - 1, ((1 << lb) - 1,) * la
                )
        return cls(max((v for p in pt for v in p), default=-1) + 1 if pt else 0, pt, pairs)

    @property
    def part_count(self) -> int:
        return len(self.parts)

    @property
    def edge_cell_count(self) -> int:
        return max(pp.cell_count for pp in self.pairs.values()) if self.pairs else 1

    def part_of(self) -> dict[int, int]:
        return {v: a for a, p in enumerate(self.parts) for v in p}


# ---------------------------------------------------------------------------
# Mean-squared density q.
# ---------------------------------------------------------------------------


def _q_triple_fast(
    rows_ab: Sequence[int],
    rows_ac: Sequence[int],
    rows_bc: Sequence[int],
    pp_ab: PairPartition,
    pp_ac: PairPartition,
    pp_bc: PairPartition,
    hyper_zmask,
) -> Fraction:
    """q over one part triple: single triangle sweep with cell labels.

    ``hyper_zmask(x, y)`` is the bitmask over z of hyperedges through (x, y).
    """
    lab_ab, lab_ac, lab_bc = pp_ab.labels(), pp_ac.labels(), pp_bc.labels()
    tri: dict[tuple[int, int, int], int] = {}
    hyp: dict[tuple[int, int, int], int] = {}
    total = 0
    for x in range(len(rows_ab)):
        row_ac = rows_ac[x]
        if not row_ac:
            continue
        lx_ac = lab_ac[x]
        for y in bits(rows_ab[x]):
            zmask = row_ac & rows_bc[y]
            if not zmask:
                continue
            a = lab_ab[x][y]
            hmask = hyper_zmask(x, y)
            ly_bc = lab_bc[y]
            for z in bits(zmask):
                key = (a, lx_ac[z], ly_bc[z])
                tri[key] = tri.get(key, 0) + 1
                if hmask >> z & 1:
                    hyp[key] = hyp.get(key, 0) + 1
                total += 1
    if total == 0:
        return Fraction(0)
    out = Fraction(0)
    for key, e in hyp.items():
        out += Fraction(e * e, tri[key] * total)
    return out


def _q_triple_naive(
    rows_ab, rows_ac, rows_bc, pp_ab, pp_ac, pp_bc, hyper_zmask, sizes
) -> Fraction:
    """Literal re-enumeration of every cell combination."""
    n0, n1, n2 = sizes
    total = 0
    for x in range(n0):
        for y in range(n1):
            if rows_ab[x] >> y & 1:
                total += (rows_ac[x] & rows_bc[y]).bit_count()
    if total == 0:
        return Fraction(0)
    out = Fraction(0)
    for ca in range(pp_ab.cell_count):
        for cb in range(pp_ac.cell_count):
            for cc in range(pp_bc.cell_count):
                t_cnt = h_cnt = 0
                cell_ab, cell_ac, cell_bc = pp_ab.cells[ca], pp_ac.cells[cb], pp_bc.cells[cc]
                for x in range(n0):
                    for y in range(n1):
                        if not cell_ab[x] >> y & 1:
                            continue
                        for z in range(n2):
                            if cell_ac[x] >> z & 1 and cell_bc[y] >> z & 1:
                                t_cnt += 1
                                if hyper_zmask(x, y) >> z & 1:
                                    h_cnt += 1
                d = ratio(h_cnt, t_cnt)
                out += ratio(t_cnt, total) * d * d
    return out


def _hyper_zmask_for_parts(
    h: PartiteThreeGraph, i: int, j: int, k: int
) -> dict[tuple[int, int], int]:
    """(x, y) -> bitmask over z of hyperedges across parts (i, j, k), local."""
    vs = h.vertex_set
    off = vs.offsets
    out: dict[tuple[int, int], int] = {}
    for (u, v, w) in h.triples:
        pu, pv, pw = vs.part_of(u), vs.part_of(v), vs.part_of(w)
        if {pu, pv, pw} != {i, j, k}:
            continue
        by_part = dict(((pu, u), (pv, v), (pw, w)))
        x, y, z = by_part[i] - off[i], by_part[j] - off[j], by_part[k] - off[k]
        out[(x, y)] = out.get((x, y), 0) | (1 << z)
    return out


def q_edge_partition(c: Chain, pe: EdgePartition, mode: str = "fast") -> Fraction:
    """q of an edge partition of the chain graph; trivial partition gives d^2."""
    vs = c.vertex_set
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        if pe.pair(i, j).host_rows != c.graph.pair(i, j).rows:
            raise InvalidStructure(f"edge partition host disagrees with chain at {(i, j)}")
    zmask = _hyper_zmask_for_parts(c.hyper, 0, 1, 2)
    lookup = lambda x, y: zmask.get((x, y), 0)
    args = (
        c.graph.pair(0, 1).rows,
        c.graph.pair(0, 2).rows,
        c.graph.pair(1, 2).rows,
        pe.pair(0, 1),
        pe.pair(0, 2),
        pe.pair(1, 2),
        lookup,
    )
    if mode == "fast":
        return _q_triple_fast(*args)
    if mode == "naive":
        return _q_triple_naive(*args, vs.sizes)
    raise InvalidStructure(f"unknown mode {mode!r}")


def q_cylinder(
    h: PartiteThreeGraph, cyl: VertexCylinder, pe: EdgePartition, mode: str = "fast"
) -> Fraction:
    """Sum of per-triple q over all part triples of one cylinder."""
    vs = h.vertex_set
    out = Fraction(0)
    for i in range(vs.t):
        for j in range(i + 1, vs.t):
            for k in range(j + 1, vs.t):
                rows_ab = tuple(
                    cyl.masks[j] if cyl.masks[i] >> x & 1 else 0 for x in range(vs.sizes[i])
                )
                rows_ac = tuple(
                    cyl.masks[k] if cyl.masks[i] >> x & 1 else 0 for x in range(vs.sizes[i])
                )
                rows_bc = tuple(
                    cyl.masks[k] if cyl.masks[j] >> y & 1 else 0 for y in range(vs.sizes[j])
                )
                zm = _hyper_zmask_for_parts(h, i, j, k)
                mask_i, mask_j, mask_k = cyl.masks[i], cyl.masks[j], cyl.masks[k]
                lookup = lambda x, y, zm=zm, mi=mask_i, mj=mask_j, mk=mask_k: (
                    (zm.get((x, y), 0) & mk) if (mi >> x & 1 and mj >> y & 1) else 0
                )
                args = (rows_ab, rows_ac, rows_bc, pe.pair(i, j), pe.pair(i, k), pe.pair(j, k), lookup)
                if mode == "fast":
                    out += _q_triple_fast(*args)
                elif mode == "naive":
                    out += _q_triple_naive(*args, (vs.sizes[i], vs.sizes[j], vs.sizes[k]))
                else:
                    raise InvalidStructure(f"unknown mode {mode!r}")
    return out


def q_partition(h: PartiteThreeGraph, p: CylinderChainPartition, mode: str = "fast") -> Fraction:
    """Weight-averaged q over all cylinders; bounded by C(t, 3)."""
    vs = h.vertex_set
    if p.vertex.vertex_set != vs:
        raise InvalidStructure("partition and hypergraph disagree on parts")
    out = Fraction(0)
    for cyl, ep in zip(p.vertex.cylinders, p.edges):
        w = cyl.weight(vs)
        if w:
            out += w * q_cylinder(h, cyl, ep, mode=mode)
    return out


# ---------------------------------------------------------------------------
# Refinement predicates and common refinement.
# ---------------------------------------------------------------------------


def refines_vertex(fine: VertexCylinderPartition, coarse: VertexCylinderPartition) -> bool:
    """Every non-empty cylinder of ``fine`` sits inside one of ``coarse``."""
    if fine.vertex_set != coarse.vertex_set:
        return False
    for f in fine.cylinders:
        if f.is_empty():
            continue
        if not any(
            all(mf & ~mc == 0 for mf, mc in zip(f.masks, c.masks)) for c in coarse.cylinders
        ):
            return False
    return True


def refines_pair(fine: PairPartition, coarse: PairPartition) -> bool:
    """Every non-empty cell of ``fine`` inside a cell of ``coarse``.

    Hosts need not be equal: this is the test used both for plain edge
    refinements (equal hosts) and for cylinder restrictions (fine host
    contained in coarse host).
    """
    if fine.left_size != coarse.left_size or fine.right_size != coarse.right_size:
        return False
    for x in range(fine.left_size):
        if fine.host_rows[x] & ~coarse.host_rows[x]:
            return False
    for cell in fine.cells:
        if not any(cell[x] for x in range(fine.left_size)):
            continue
        found = False
        for big in coarse.cells:
            if all(cell[x] & ~big[x] == 0 for x in range(fine.left_size)):
                found = True
                break
        if not found:
            return False
    return True


def refines_edge(fine: EdgePartition, coarse: EdgePartition) -> bool:
    if set(fine.pairs) != set(coarse.pairs):
        return False
    return all(refines_pair(fine.pairs[k], coarse.pairs[k]) for k in fine.pairs)


def refines_cylinder_chain(fine: CylinderChainPartition, coarse: CylinderChainPartition) -> bool:
    """Vertex refinement plus per-cylinder edge refinement after restriction."""
    if not refines_vertex(fine.vertex, coarse.vertex):
        return False
    for f_idx, fcyl in enumerate(fine.vertex.cylinders):
        if fcyl.is_empty():
            continue
        container = None
        for c_idx, ccyl in enumerate(coarse.vertex.cylinders):
            if all(mf & ~mc == 0 for mf, mc in zip(fcyl.masks, ccyl.masks)):
                container = c_idx
                break
        if container is None:
            return False
        for key, fine_pp in fine.edges[f_idx].pairs.items():
            if not refines_pair(fine_pp, coarse.edges[container].pairs[key]):
                return False
    return True


def common_refinement(pps: Sequence[PairPartition]) -> PairPartition:
    """Coarsest partition refining each input; inputs must share a host."""
    if not pps:
        raise InvalidStructure("need at least one partition")
    first = pps[0]
    for pp in pps[1:]:
        if (
            pp.host_rows != first.host_rows
            or pp.left_mask != first.left_mask
            or pp.right_mask != first.right_mask
        ):
            raise InvalidStructure("common refinement requires identical hosts")
    if len(pps) == 1:
        return first
    labels = [pp.labels() for pp in pps]
    groups: dict[tuple[int, ...], list[int]] = {}
    for x in range(first.left_size):
        for y in bits(first.host_rows[x]):
            key = tuple(lab[x][y] for lab in labels)
            rows = groups.get(key)
            if rows is None:
                rows = [0] * first.left_size
                groups[key] = rows
            rows[x] |= 1 << y
    cells = tuple(tuple(rows) for _, rows in sorted(groups.items()))
    if not cells:
        cells = ((0,) * first.left_size,)
    return PairPartition(
        first.left_size,
        first.right_size,
        first.left_mask,
        first.right_mask,
        first.host_rows,
        cells,
    )


# ---------------------------------------------------------------------------
# Venn diagram conversion.
# ---------------------------------------------------------------------------


def venn_diagram(p: CylinderChainPartition) -> ChainPartition:
    """Flatten a cylinder chain partition into a chain partition.

    Vertices are grouped by which cylinders they can participate in (a
    cylinder counts only if its other coordinates are non-empty); edges
    between two such groups are grouped by their cell membership across all
    cylinders containing both groups.
    """
    vs = p.vertex.vertex_set
    cylinders = p.vertex.cylinders

    relevant: dict[int, list[int]] = {i: [] for i in range(vs.t)}
    for idx, cyl in enumerate(cylinders):
        for i in range(vs.t):
            if all(cyl.masks[j] for j in range(vs.t) if j != i):
                relevant[i].append(idx)

    # (part index, local ids, profile of relevant containing cylinders)
    part_cells: list[tuple[int, tuple[int, ...], tuple[int, ...]]] = []
    for i in range(vs.t):
        profiles: dict[tuple[int, ...], list[int]] = {}
        for a in range(vs.sizes[i]):
            prof = tuple(idx for idx in relevant[i] if cylinders[idx].masks[i] >> a & 1)
            profiles.setdefault(prof, []).append(a)
        for prof in sorted(profiles):
            part_cells.append((i, tuple(profiles[prof]), prof))

    off = vs.offsets
    parts = tuple(tuple(off[i] + a for a in locs) for i, locs, _ in part_cells)

    pairs: dict[tuple[int, int], PairPartition] = {}
    for a_idx in range(len(part_cells)):
        i, locs_a, prof_a = part_cells[a_idx]
        for b_idx in range(a_idx + 1, len(part_cells)):
            j, locs_b, prof_b = part_cells[b_idx]
            la, lb = len(locs_a), len(locs_b)
            full_l, full_r = (1 << la) - 1, (1 << lb) - 1
            host = (full_r,) * la
            if i == j:
                pairs[(a_idx, b_idx)] = PairPartition.trivial(la, lb, full_l, full_r, host)
                continue
            lo, hi = (i, j) if i < j else (j, i)
            containing = sorted(set(prof_a) & set(prof_b))
            lab_per_cyl = [p.edges[c].pair(lo, hi).labels() for c in containing]
            groups: dict[tuple[int, ...], list[int]] = {}
            for pa, a in enumerate(locs_a):
                for pb, b in enumerate(locs_b):
                    if i < j:
                        key = tuple(lab[a][b] for lab in lab_per_cyl)
                    else:
                        key = tuple(lab[b][a] for lab in lab_per_cyl)
                    rows = groups.get(key)
                    if rows is None:
                        rows = [0] * la
                        groups[key] = rows
                    rows[pa] |= 1 << pb
            cells = tuple(tuple(rows) for _, rows in sorted(groups.items()))
            if not cells:
                cells = ((0,) * la,)
            pairs[(a_idx, b_idx)] = PairPartition(la, lb, full_l, full_r, host, cells)

    return ChainPartition(vs.total, parts, pairs)


def restrict_chain_partition(
    q: ChainPartition, new_parts: Sequence[Sequence[int]], origin: Sequence[int]
) -> ChainPartition:
    """Chain partition on refined vertex parts; edge cells restricted.

    ``new_parts[a]`` must be a subset of ``q.parts[origin[a]]``.  Pairs whose
    parts share an origin get the trivial (complete) partition, matching the
    convention that same-origin pairs carry no edge structure.
    """
    pt = tuple(tuple(sorted(p)) for p in new_parts)
    for p, o in zip(pt, origin):
        if not set(p) <= set(q.parts[o]):
            raise InvalidStructure("refined part not inside its origin")
    pos_in_origin = [
        {v: i for i, v in enumerate(q.parts[o])} for o in range(len(q.parts))
    ]
    pairs = {}
    for a in range(len(pt)):
        for b in range(a + 1, len(pt)):
            la, lb = len(pt[a]), len(pt[b])
            full_l, full_r = (1 << la) - 1, (1 << lb) - 1
            host = (full_r,) * la
            oa, ob = origin[a], origin[b]
            if oa == ob:
                pairs[(a, b)] = PairPartition.trivial(la, lb, full_l, full_r, host)
                continue
            lo_o, hi_o = (oa, ob) if oa < ob else (ob, oa)
            base = q.pairs[(lo_o, hi_o)]
            lab = base.labels()
            cells_rows: dict[int, list[int]] = {}
            for pa, u in enumerate(pt[a]):
                for pb, v in enumerate(pt[b]):
                    if oa < ob:
                        idx = lab[pos_in_origin[oa][u]][pos_in_origin[ob][v]]
                    else:
                        idx = lab[pos_in_origin[ob][v]][pos_in_origin[oa][u]]
                    rows = cells_rows.get(idx)
                    if rows is None:
                        rows = [0] * la
                        cells_rows[idx] = rows
                    rows[pa] |= 1 << pb
            cells = tuple(tuple(rows) for _, rows in sorted(cells_rows.items()))
            if not cells:
                cells = ((0,) * la,)
            pairs[(a, b)] = PairPartition(la, lb, full_l, full_r, host, cells)
    return ChainPartition(q.n, pt, pairs)


# ---------------------------------------------------------------------------
# Audits.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomogeneityAudit:
    """Triple-mass accounting for a decomposition.

    ``homogeneous_mass`` is over all ordered vertex triples (triples not
    crossing three distinct parts count as failures);
    ``homogeneous_crossing_mass`` restricts the denominator to crossing
    triples.  ``quasirandom_mass`` uses the same ordered convention for the
    graph quasirandomness condition.  Degenerate chains (no triangles) count
    as homogeneous.
    """

    gamma: Fraction
    homogeneous_mass: Fraction
    homogeneous_crossing_mass: Fraction
    quasirandom_mass: Fraction
    degenerate_mass: Fraction
    noncrossing_mass: Fraction
    mode: str = "exhaustive"
    samples: int | None = None
    # Filled by decomposition pipelines: ordered pair-mass of part pairs
    # whose bipartite density falls at or below the sparseness threshold.
    sparse_pair_mass: Fraction | None = None


def _cell_cert(pp: PairPartition, idx: int) -> QuasirandomnessCertificate:
    left = [x for x in range(pp.left_size) if pp.left_mask >> x & 1]
    return masked_pair_quasirandomness(pp.cells[idx], left, pp.right_mask)


def homogeneity_audit(
    h: ThreeGraph | PartiteThreeGraph,
    q: ChainPartition,
    gamma: Fraction,
    psi: PolyFunction | None = None,
) -> HomogeneityAudit:
    """Exact triple-mass audit of a chain partition against density windows.

    A triple is homogeneous when its chain's relative density lies in
    [0, gamma] or [1 - gamma, 1]; quasirandom (when psi is given) when all
    three of its chain's bipartite cells are psi(delta)-quasirandom for
    delta the product of the cell densities.
    """
    if isinstance(h, PartiteThreeGraph):
        h = h.to_three_graph()
    if h.n != q.n:
        raise InvalidStructure("universe size mismatch")
    n = q.n
    if n == 0:
        one = Fraction(1)
        return HomogeneityAudit(gamma, one, one, one, Fraction(0), Fraction(0))

    part_of = q.part_of()
    pos = [{v: i for i, v in enumerate(p)} for p in q.parts]
    labels = {key: pp.labels() for key, pp in q.pairs.items()}
    cert_cache: dict[tuple[int, int, int], Fraction] = {}
    dens_cache: dict[tuple[int, int, int], Fraction] = {}

    def cell_stats(a: int, b: int, idx: int) -> tuple[Fraction, Fraction]:
        key = (a, b, idx)
        if key not in dens_cache:
            pp = q.pairs[(a, b)]
            dens_cache[key] = pp.cell_density(idx)
            cert_cache[key] = _cell_cert(pp, idx).value
        return dens_cache[key], cert_cache[key]

    hyp: dict[tuple, int] = {}
    for (u, v, w) in h.triples:
        pa, pb, pc = part_of[u], part_of[v], part_of[w]
        if len({pa, pb, pc}) != 3:
            continue
        (pa, u2), (pb, v2), (pc, w2) = sorted(((pa, u), (pb, v), (pc, w)))
        key = (
            pa,
            pb,
            pc,
            labels[(pa, pb)][pos[pa][u2]][pos[pb][v2]],
            labels[(pa, pc)][pos[pa][u2]][pos[pc][w2]],
            labels[(pb, pc)][pos[pb][v2]][pos[pc][w2]],
        )
        hyp[key] = hyp.get(key, 0) + 1

    hom_num = qr_num = crossing = 0
    m = len(q.parts)
    for pa in range(m):
        for pb in range(pa + 1, m):
            for pc in range(pb + 1, m):
                sizes = (len(q.parts[pa]), len(q.parts[pb]), len(q.parts[pc]))
                if 0 in sizes:
                    continue
                crossing += 6 * sizes[0] * sizes[1] * sizes[2]
                lab_ab = labels[(pa, pb)]
                lab_ac = labels[(pa, pc)]
                lab_bc = labels[(pb, pc)]
                tri: dict[tuple[int, int, int], int] = {}
                for ia in range(sizes[0]):
                    row_ab, row_ac = lab_ab[ia], lab_ac[ia]
                    for ib in range(sizes[1]):
                        cab = row_ab[ib]
                        lab_b = lab_bc[ib]
                        for ic in range(sizes[2]):
                            key = (cab, row_ac[ic], lab_b[ic])
                            tri[key] = tri.get(key, 0) + 1
                for (cab, cac, cbc), t_cnt in tri.items():
                    e_cnt = hyp.get((pa, pb, pc, cab, cac, cbc), 0)
                    d = ratio(e_cnt, t_cnt)
                    if d <= gamma or d >= 1 - gamma:
                        hom_num += 6 * t_cnt
                    if psi is not None:
                        d_ab, c_ab = cell_stats(pa, pb, cab)
                        d_ac, c_ac = cell_stats(pa, pc, cac)
                        d_bc, c_bc = cell_stats(pb, pc, cbc)
                        thresh = psi(d_ab * d_ac * d_bc)
                        if max(c_ab, c_ac, c_bc) <= thresh:
                            qr_num += 6 * t_cnt

    total = n**3
    return HomogeneityAudit(
        gamma=gamma,
        homogeneous_mass=Fraction(hom_num, total),
        homogeneous_crossing_mass=ratio(hom_num, crossing),
        quasirandom_mass=Fraction(qr_num, total) if psi is not None else Fraction(0),
        degenerate_mass=Fraction(0),
        noncrossing_mass=Fraction(total - crossing, total),
    )


@dataclass(frozen=True)
class CylinderAudit:
    """Tuple-mass accounting for a cylinder chain partition."""

    good_mass: Fraction
    degenerate_mass: Fraction
    mode: str
    samples: int | None = None


class _CylinderContext:
    """Shared caches for tuple audits of a cylinder chain partition."""

    def __init__(self, h: PartiteThreeGraph, p: CylinderChainPartition):
        if h.vertex_set != p.vertex.vertex_set:
            raise InvalidStructure("partition and hypergraph disagree on parts")
        self.h = h
        self.p = p
        self.vs = h.vertex_set
        t = self.vs.t
        self.labels = {}
        for c, ep in enumerate(p.edges):
            for i in range(t):
                for j in range(i + 1, t):
                    self.labels[(c, i, j)] = ep.pair(i, j).labels()
        self.zmasks = {}
        for i in range(t):
            for j in range(i + 1, t):
                for k in range(j + 1, t):
                    self.zmasks[(i, j, k)] = _hyper_zmask_for_parts(h, i, j, k)
        self._dens: dict[tuple, Fraction] = {}
        self._cert: dict[tuple, Fraction] = {}
        self._chain: dict[tuple, tuple[int, int, Fraction | None]] = {}

    def cell_density(self, c: int, i: int, j: int, idx: int) -> Fraction:
        key = (c, i, j, idx)
        if key not in self._dens:
            self._dens[key] = self.p.edges[c].pair(i, j).cell_density(idx)
        return self._dens[key]

    def cell_cert(self, c: int, i: int, j: int, idx: int) -> Fraction:
        key = (c, i, j, idx)
        if key not in self._cert:
            self._cert[key] = _cell_cert(self.p.edges[c].pair(i, j), idx).value
        return self._cert[key]

    def chain_stats(
        self, c: int, triple: tuple[int, int, int], combo: tuple[int, int, int], want_cert: bool
    ) -> tuple[int, int, Fraction | None]:
        """(triangles, hyperedges, chain certificate) of one cell chain."""
        key = (c, triple, combo)
        have = self._chain.get(key)
        if have is not None and (have[2] is not None or not want_cert):
            return have
        i, j, k = triple
        cyl = self.p.vertex.cylinders[c]
        ep = self.p.edges[c]
        cell_ab = ep.pair(i, j).cells[combo[0]]
        cell_ac = ep.pair(i, k).cells[combo[1]]
        cell_bc = ep.pair(j, k).cells[combo[2]]
        zm = self.zmasks[(i, j, k)]
        tri = hyp = 0
        for x in bits(cyl.masks[i]):
            row_ac = cell_ac[x]
            if not row_ac:
                continue
            for y in bits(cell_ab[x]):
                inter = row_ac & cell_bc[y]
                if inter:
                    tri += inter.bit_count()
                    hm = zm.get((x, y), 0)
                    if hm:
                        hyp += (inter & hm).bit_count()
        cert = None
        if want_cert:
            cert = self._cell_chain_cert(c, triple, combo, tri, hyp)
        self._chain[key] = (tri, hyp, cert)
        return self._chain[key]

    def _cell_chain_cert(self, c, triple, combo, tri, hyp) -> Fraction:
        if tri == 0:
            return Fraction(0)
        i, j, k = triple
        cyl = self.p.vertex.cylinders[c]
        ep = self.p.edges[c]
        chain = extract_cell_chain(
            self.h,
            (cyl.masks[i], cyl.masks[j], cyl.masks[k]),
            (i, j, k),
            (
                ep.pair(i, j).cells[combo[0]],
                ep.pair(i, k).cells[combo[1]],
                ep.pair(j, k).cells[combo[2]],
            ),
        )
        return chain_quasirandomness(chain).value


def extract_cell_chain(
    h: PartiteThreeGraph,
    masks: tuple[int, int, int],
    parts: tuple[int, int, int],
    cells: tuple[Sequence[int], Sequence[int], Sequence[int]],
) -> Chain:
    """Standalone tripartite chain for one cell combination (compact ids)."""
    vs = h.vertex_set
    i, j, k = parts
    keep = [sorted(bits(m)) for m in masks]
    remap = [{old: new for new, old in enumerate(kp)} for kp in keep]
    sizes = tuple(len(kp) for kp in keep)
    sub_vs = PartiteVertexSet((vs.names[i], vs.names[j], vs.names[k]), sizes)

    def compact(rows, src, dst):
        out = []
        for old_x in keep[src]:
            r = 0
            for old_y in bits(rows[old_x] & masks_by_pos[dst]):
                r |= 1 << remap[dst][old_y]
            out.append(r)
        return tuple(out)

    masks_by_pos = {0: masks[0], 1: masks[1], 2: masks[2]}
    g = MultipartiteGraph(
        sub_vs,
        {
            (0, 1): BipartiteGraph(sizes[0], sizes[1], compact(cells[0], 0, 1)),
            (0, 2): BipartiteGraph(sizes[0], sizes[2], compact(cells[1], 0, 2)),
            (1, 2): BipartiteGraph(sizes[1], sizes[2], compact(cells[2], 1, 2)),
        },
    )
    off = sub_vs.offsets
    zm = _hyper_zmask_for_parts(h, i, j, k)
    triples = set()
    for (x, y), m in zm.items():
        if not (masks[0] >> x & 1 and masks[1] >> y & 1):
            continue
        nx, ny = remap[0][x], remap[1][y]
        if not g.pair(0, 1).has_edge(nx, ny):
            continue
        for z in bits(m & masks[2]):
            nz = remap[2][z]
            if g.pair(0, 2).has_edge(nx, nz) and g.pair(1, 2).has_edge(ny, nz):
                triples.add((off[0] + nx, off[1] + ny, off[2] + nz))
    return Chain(g, PartiteThreeGraph(sub_vs, frozenset(triples)))


def cylinder_quasirandomness_audit(
    h: PartiteThreeGraph,
    p: CylinderChainPartition,
    eta: Fraction,
    psi: PolyFunction,
    cap: int = 10**6,
    samples: int = 10**4,
    seed: int = 0,
) -> CylinderAudit:
    """Mass of tuples whose visible chains are all (eta, psi)-quasirandom.

    A tuple is good when, for every part triple (i, j, k), its cell chain
    has chain certificate <= eta and the three cells are psi(delta)-
    quasirandom, delta being the product of the three cell densities.
    Exhaustive below ``cap`` tuples, seeded Monte Carlo above.
    """
    ctx = _CylinderContext(h, p)
    vs = ctx.vs
    t = vs.t
    triples = [(i, j, k) for i in range(t) for j in range(i + 1, t) for k in range(j + 1, t)]
    pairs = [(i, j) for i in range(t) for j in range(i + 1, t)]
    verdict_cache: dict[tuple, tuple[bool, bool]] = {}

    def judge(c: int, cells: dict[tuple[int, int], int]) -> tuple[bool, bool]:
        key = (c, tuple(cells[pq] for pq in pairs))
        got = verdict_cache.get(key)
        if got is not None:
            return got
        degenerate = False
        good = True
        for (i, j, k) in triples:
            combo = (cells[(i, j)], cells[(i, k)], cells[(j, k)])
            delta = (
                ctx.cell_density(c, i, j, combo[0])
                * ctx.cell_density(c, i, k, combo[1])
                * ctx.cell_density(c, j, k, combo[2])
            )
            thresh = psi(delta)
            if (
                ctx.cell_cert(c, i, j, combo[0]) > thresh
                or ctx.cell_cert(c, i, k, combo[1]) > thresh
                or ctx.cell_cert(c, j, k, combo[2]) > thresh
            ):
                good = False
                break
            tri, hyp, cert = ctx.chain_stats(c, (i, j, k), combo, True)
            if tri == 0:
                degenerate = True
            if cert > eta:
                good = False
                break
        verdict_cache[key] = (good, degenerate)
        return good, degenerate

    def tuple_verdict(locals_) -> tuple[bool, bool]:
        c = ctx.p.vertex.lookup(locals_)
        cells = {
            (i, j): ctx.labels[(c, i, j)][locals_[i]][locals_[j]] for (i, j) in pairs
        }
        return judge(c, cells)

    space = 1
    for s in vs.sizes:
        space *= s
    if space == 0:
        return CylinderAudit(Fraction(1), Fraction(0), "exhaustive")
    if space <= cap:
        good = degen = 0
        for locals_ in itertools.product(*(range(s) for s in vs.sizes)):
            g, d = tuple_verdict(locals_)
            good += g
            degen += d
        return CylinderAudit(Fraction(good, space), Fraction(degen, space), "exhaustive")
    from .generators import SplitMix64

    rng = SplitMix64(seed)
    good = degen = 0
    for _ in range(samples):
        locals_ = tuple(rng.below(s) for s in vs.sizes)
        g, d = tuple_verdict(locals_)
        good += g
        degen += d
    return CylinderAudit(Fraction(good, samples), Fraction(degen, samples), "sampled", samples)


def cylinder_homogeneity_audit(
    h: PartiteThreeGraph,
    p: CylinderChainPartition,
    gamma: Fraction,
    psi: PolyFunction | None = None,
    cap: int = 10**6,
    samples: int = 10**4,
    seed: int = 0,
) -> HomogeneityAudit:
    """Tuple-mass of gamma-homogeneous visible chains of a cylinder partition.

    Degenerate cell chains (no triangles) count as homogeneous.  The
    quasirandom mass applies psi(delta) thresholds per part triple, with
    delta the product of that triple's cell densities, when psi is given.
    These masses live on the tuple space X_1 x ... x X_t, so the crossing
    and non-crossing fields coincide.
    """
    ctx = _CylinderContext(h, p)
    vs = ctx.vs
    t = vs.t
    triples = [(i, j, k) for i in range(t) for j in range(i + 1, t) for k in range(j + 1, t)]
    pairs = [(i, j) for i in range(t) for j in range(i + 1, t)]
    cache: dict[tuple, tuple[bool, bool, bool]] = {}

    def judge(c: int, cells: dict[tuple[int, int], int]) -> tuple[bool, bool, bool]:
        key = (c, tuple(cells[pq] for pq in pairs))
        got = cache.get(key)
        if got is not None:
            return got
        hom = True
        degen = False
        for (i, j, k) in triples:
            tri, hyp, _ = ctx.chain_stats(
                c, (i, j, k), (cells[(i, j)], cells[(i, k)], cells[(j, k)]), False
            )
            if tri == 0:
                degen = True
                continue
            d = Fraction(hyp, tri)
            if not (d <= gamma or d >= 1 - gamma):
                hom = False
                break
        qr = True
        if psi is not None:
            for (i, j, k) in triples:
                combo = (cells[(i, j)], cells[(i, k)], cells[(j, k)])
                delta = (
                    ctx.cell_density(c, i, j, combo[0])
                    * ctx.cell_density(c, i, k, combo[1])
                    * ctx.cell_density(c, j, k, combo[2])
                )
                thresh = psi(delta)
                if (
                    ctx.cell_cert(c, i, j, combo[0]) > thresh
                    or ctx.cell_cert(c, i, k, combo[1]) > thresh
                    or ctx.cell_cert(c, j, k, combo[2]) > thresh
                ):
                    qr = False
                    break
        cache[key] = (hom, degen, qr)
        return hom, degen, qr

    def tuple_verdict(locals_):
        c = ctx.p.vertex.lookup(locals_)
        cells = {
            (i, j): ctx.labels[(c, i, j)][locals_[i]][locals_[j]] for (i, j) in pairs
        }
        return judge(c, cells)

    space = 1
    for s in vs.sizes:
        space *= s
    if space == 0:
        one = Fraction(1)
        return HomogeneityAudit(gamma, one, one, one, Fraction(0), Fraction(0))
    if space <= cap:
        hom = degen = qr = 0
        for locals_ in itertools.product(*(range(s) for s in vs.sizes)):
            a, b, c_ = tuple_verdict(locals_)
            hom += a
            degen += b
            qr += c_
        return HomogeneityAudit(
            gamma,
            Fraction(hom, space),
            Fraction(hom, space),
            Fraction(qr, space) if psi is not None else Fraction(0),
            Fraction(degen, space),
            Fraction(0),
        )
    from .generators import SplitMix64

    rng = SplitMix64(seed)
    hom = degen = qr = 0
    for _ in range(samples):
        locals_ = tuple(rng.below(s) for s in vs.sizes)
        a, b, c_ = tuple_verdict(locals_)
        hom += a
        degen += b
        qr += c_
    return HomogeneityAudit(
        gamma,
        Fraction(hom, samples),
        Fraction(hom, samples),
        Fraction(qr, samples) if psi is not None else Fraction(0),
        Fraction(degen, samples),
        Fraction(0),
        "sampled",
        samples,
    )


@dataclass(frozen=True)
class MarkovCheck:
    mass_bad: Fraction
    gamma: Fraction
    bound: Fraction | None
    direction: str
    ok: bool


def markov_split_check(
    c: Chain,
    vertex_splits: Sequence[Sequence[Sequence[int]]],
    edge_splits: Mapping[tuple[int, int], Sequence[Sequence[int]]] | None,
    gamma: Fraction,
) -> MarkovCheck:
    """Mass of triangles in sub-chains whose density escapes the window.

    With d(H|G) < gamma, a triangle is bad when its containing sub-chain
    (vertex parts x edge parts) has density >= sqrt(gamma); the returned
    mass must be < sqrt(gamma), verified exactly by squaring.  The
    symmetric direction applies when d > 1 - gamma.
    """
    vs = c.vertex_set
    d = relative_density(c)
    if d < gamma:
        direction = "sparse"
    elif d > 1 - gamma:
        direction = "dense"
    else:
        raise InvalidStructure("chain density is not inside either window")

    vlabel = []
    for i, split in enumerate(vertex_splits):
        lab = [-1] * vs.sizes[i]
        for idx, block in enumerate(split):
            for a in block:
                if lab[a] != -1:
                    raise InvalidStructure(f"vertex {a} of part {i} assigned twice")
                lab[a] = idx
        if any(v == -1 for v in lab):
            raise InvalidStructure(f"vertex split of part {i} incomplete")
        vlabel.append(lab)

    elabel = {}
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        host = c.graph.pair(i, j)
        lab = [[-1] * host.right_size for _ in range(host.left_size)]
        if edge_splits is not None and (i, j) in edge_splits:
            blocks = edge_splits[(i, j)]
            seen = [0] * host.left_size
            for idx, rows in enumerate(blocks):
                for x in range(host.left_size):
                    r = rows[x]
                    if r & ~host.rows[x] or r & seen[x]:
                        raise InvalidStructure(f"edge split of pair {(i, j)} invalid at row {x}")
                    seen[x] |= r
                    for y in bits(r):
                        lab[x][y] = idx
            if any(seen[x] != host.rows[x] for x in range(host.left_size)):
                raise InvalidStructure(f"edge split of pair {(i, j)} incomplete")
        else:
            for x in range(host.left_size):
                for y in bits(host.rows[x]):
                    lab[x][y] = 0
        elabel[(i, j)] = lab

    zm = _hyper_zmask_for_parts(c.hyper, 0, 1, 2)
    tri: dict[tuple, int] = {}
    hyp: dict[tuple, int] = {}
    total = 0
    ab, ac, bc = c.graph.pair(0, 1), c.graph.pair(0, 2), c.graph.pair(1, 2)
    for x in range(vs.sizes[0]):
        row_ac = ac.rows[x]
        if not row_ac:
            continue
        for y in bits(ab.rows[x]):
            zmask = row_ac & bc.rows[y]
            if not zmask:
                continue
            hm = zm.get((x, y), 0)
            base = (vlabel[0][x], vlabel[1][y], elabel[(0, 1)][x][y])
            for z in bits(zmask):
                key = base + (vlabel[2][z], elabel[(0, 2)][x][z], elabel[(1, 2)][y][z])
                tri[key] = tri.get(key, 0) + 1
                if hm >> z & 1:
                    hyp[key] = hyp.get(key, 0) + 1
                total += 1

    bad = 0
    for key, t_cnt in tri.items():
        dens = Fraction(hyp.get(key, 0), t_cnt)
        escape = dens if direction == "sparse" else 1 - dens
        if escape * escape >= gamma:
            bad += t_cnt
    mass_bad = ratio(bad, total)
    bound = rational_sqrt(gamma)
    ok = mass_bad * mass_bad < gamma
    return MarkovCheck(mass_bad, gamma, bound, direction, ok)
