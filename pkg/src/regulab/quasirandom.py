"""Quasirandomness functionals for bipartite graphs and chains.

The pair functional sums f(x,y)f(x',y)f(x,y')f(x',y') over all ordered
choices (diagonal terms included); the chain functional is the analogous
eight-fold sum over two choices in each of the three parts, applied to the
deviation f(x,y,z) = (1_E(H) - d(H|G)) restricted to triangles of G.

Every functional has a ``fast`` mode (codegree / popcount kernels, exact
integer arithmetic) and a ``naive`` mode (literal nested sums over a scaled
integer table).  The two must agree exactly; tests enforce this.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .core import (
    BipartiteGraph,
    CapacityError,
    Chain,
    Graph,
    InvalidStructure,
    MultipartiteGraph,
    PartiteThreeGraph,
    PartiteVertexSet,
    ThreeGraph,
    bits,
    product_density,
    ratio,
    relative_density,
    triangle_count,
)


@dataclass(frozen=True)
class PolyFunction:
    """x -> min(c * x**k, x): the regularity-rate functions used everywhere.

    c in (0, 1] and k >= 1 keep the function increasing and at most the
    identity on [0, 1].
    """

    c: Fraction
    k: int

    def __post_init__(self):
        if not (0 < self.c <= 1):
            raise InvalidStructure("coefficient must lie in (0, 1]")
        if self.k < 1:
            raise InvalidStructure("exponent must be a positive integer")

    def __call__(self, x: Fraction) -> Fraction:
        x = Fraction(x)
        return min(self.c * x**self.k, x)

    def squared(self) -> "PolyFunction":
        return PolyFunction(self.c * self.c, 2 * self.k)

    @classmethod
    def parse(cls, text: str) -> "PolyFunction":
        """Parse "c,k" with c a rational like 1/16 or 2**-100."""
        try:
            c_s, k_s = text.split(",")
            c_s = c_s.strip()
            if "**" in c_s:
                base, exp = c_s.split("**")
                c = Fraction(int(base)) ** int(exp)
            else:
                c = Fraction(c_s)
            return cls(c, int(k_s))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidStructure(f"cannot parse rate function {text!r}: {exc}")


@dataclass(frozen=True)
class QuasirandomnessCertificate:
    """Raw functional value, its normalizer, and their exact quotient.

    ``value`` is the least alpha (resp. eta) for which the object is
    alpha-quasirandom; ``is_quasirandom(beta)`` is beta >= value.  A zero
    normalizer (empty part or empty triangle set) is flagged degenerate and
    reports value 0.
    """

    raw_sum: Fraction
    normalizer: Fraction
    value: Fraction
    degenerate: bool = False

    def is_quasirandom(self, beta: Fraction) -> bool:
        return self.value <= beta


def _as_table2(f) -> list[list[Fraction]]:
    table = f.table if isinstance(f, DeviationFunction2) else f
    return [[Fraction(v) for v in row] for row in table]


def _as_table3(f) -> list[list[list[Fraction]]]:
    table = f.table if isinstance(f, DeviationFunction3) else f
    return [[[Fraction(v) for v in col] for col in row] for row in table]


@dataclass(frozen=True)
class DeviationFunction2:
    """A rational table on X x Y with entries in [-1, 1]."""

    table: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        widths = {len(r) for r in self.table}
        if len(widths) > 1:
            raise InvalidStructure("ragged table")
        for row in self.table:
            for v in row:
                if not -1 <= v <= 1:
                    raise InvalidStructure(f"entry {v} outside [-1, 1]")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "DeviationFunction2":
        return cls(tuple(tuple(Fraction(v) for v in r) for r in rows))

    @classmethod
    def from_bipartite(cls, g: BipartiteGraph) -> "DeviationFunction2":
        d = g.density()
        return cls(
            tuple(
                tuple((1 - d) if g.has_edge(x, y) else -d for y in range(g.right_size))
                for x in range(g.left_size)
            )
        )


@dataclass(frozen=True)
class DeviationFunction3:
    """A rational table on X x Y x Z, zero off its support mask."""

    table: tuple[tuple[tuple[Fraction, ...], ...], ...]
    support: frozenset[tuple[int, int, int]] | None = None

    def __post_init__(self):
        for x, plane in enumerate(self.table):
            for y, col in enumerate(plane):
                for z, v in enumerate(col):
                    if not -1 <= v <= 1:
                        raise InvalidStructure(f"entry {v} outside [-1, 1]")
                    if self.support is not None and v and (x, y, z) not in self.support:
                        raise InvalidStructure(f"nonzero entry off support at {(x, y, z)}")

    @classmethod
    def from_rows(cls, rows, support=None) -> "DeviationFunction3":
        return cls(
            tuple(tuple(tuple(Fraction(v) for v in col) for col in plane) for plane in rows),
            frozenset(support) if support is not None else None,
        )

    @classmethod
    def from_chain(cls, c: Chain) -> "DeviationFunction3":
        vs = c.vertex_set
        n0, n1, n2 = vs.sizes
        off = vs.offsets
        d = relative_density(c)
        ab, ac, bc = c.graph.pair(0, 1), c.graph.pair(0, 2), c.graph.pair(1, 2)
        table = []
        support = set()
        for x in range(n0):
            plane = []
            for y in range(n1):
                col = []
                tri_mask = (ac.rows[x] & bc.rows[y]) if ab.has_edge(x, y) else 0
                for z in range(n2):
                    if tri_mask >> z & 1:
                        support.add((x, y, z))
                        is_edge = c.hyper.has_triple(off[0] + x, off[1] + y, off[2] + z)
                        col.append((1 - d) if is_edge else -d)
                    else:
                        col.append(Fraction(0))
                plane.append(tuple(col))
            table.append(tuple(plane))
        return cls(tuple(tuple(p) for p in table), frozenset(support))


def _scale2(table: list[list[Fraction]]) -> tuple[list[list[int]], int]:
    denoms = [v.denominator for row in table for v in row] or [1]
    scale = lcm(*denoms)
    return [[int(v * scale) for v in row] for row in table], scale


def _scale3(table) -> tuple[list[list[list[int]]], int]:
    denoms = [v.denominator for plane in table for col in plane for v in col] or [1]
    scale = lcm(*denoms)
    return [[[int(v * scale) for v in col] for col in plane] for plane in table], scale


def c4_sum(f, mode: str = "fast") -> Fraction:
    """Four-fold pair functional of a rational table; always >= 0."""
    table = _as_table2(f)
    nx = len(table)
    ny = len(table[0]) if nx else 0
    if nx == 0 or ny == 0:
        return Fraction(0)
    F, scale = _scale2(table)
    if mode == "naive":
        total = 0
        for x in range(nx):
            for x2 in range(nx):
                for y in range(ny):
                    for y2 in range(ny):
                        total += F[x][y] * F[x2][y] * F[x][y2] * F[x2][y2]
        return Fraction(total, scale**4)
    if mode != "fast":
        raise InvalidStructure(f"unknown mode {mode!r}")
    total = 0
    for x in range(nx):
        row_x = F[x]
        for x2 in range(x, nx):
            row_x2 = F[x2]
            s = sum(a * b for a, b in zip(row_x, row_x2))
            total += s * s if x == x2 else 2 * s * s
    return Fraction(total, scale**4)


def oct_sum(f, mode: str = "fast") -> Fraction:
    """Eight-fold octahedral functional of a rational 3d table; always >= 0.

    Fast mode evaluates sum_{z,z'} c4_sum(g_{z,z'}) with
    g_{z,z'}(x,y) = f(x,y,z) f(x,y,z'); naive mode is the literal six-index
    sum.  Both are exact.
    """
    table = _as_table3(f)
    nx = len(table)
    ny = len(table[0]) if nx else 0
    nz = len(table[0][0]) if ny else 0
    if nx == 0 or ny == 0 or nz == 0:
        return Fraction(0)
    F, scale = _scale3(table)
    if mode == "naive":
        total = 0
        for x in range(nx):
            for x2 in range(nx):
                for y in range(ny):
                    for y2 in range(ny):
                        for z in range(nz):
                            for z2 in range(nz):
                                total += (
                                    F[x][y][z]
                                    * F[x2][y][z]
                                    * F[x][y2][z]
                                    * F[x2][y2][z]
                                    * F[x][y][z2]
                                    * F[x2][y][z2]
                                    * F[x][y2][z2]
                                    * F[x2][y2][z2]
                                )
        return Fraction(total, scale**8)
    if mode != "fast":
        raise InvalidStructure(f"unknown mode {mode!r}")
    total = 0
    for z in range(nz):
        for z2 in range(z, nz):
            inner = 0
            G = [[F[x][y][z] * F[x][y][z2] for y in range(ny)] for x in range(nx)]
            for x in range(nx):
                for x2 in range(x, nx):
                    s = sum(a * b for a, b in zip(G[x], G[x2]))
                    inner += s * s if x == x2 else 2 * s * s
            total += inner if z == z2 else 2 * inner
    return Fraction(total, scale**8)


def _pair_raw_scaled(rows: Sequence[int], xs: Sequence[int], right_mask: int, e: int, area: int) -> int:
    """c4 raw sum of (1_E - e/area) scaled by area, over rows[xs] & right_mask."""
    a = area - e  # scaled value on edges
    b = -e  # scaled value on non-edges
    ny = right_mask.bit_count()
    degs = [(rows[x] & right_mask).bit_count() for x in xs]
    total = 0
    n = len(xs)
    for i in range(n):
        ri = rows[xs[i]] & right_mask
        di = degs[i]
        for j in range(i, n):
            cod = (ri & rows[xs[j]]).bit_count()
            dj = degs[j]
            s = a * a * cod + a * b * (di + dj - 2 * cod) + b * b * (ny - di - dj + cod)
            total += s * s if i == j else 2 * s * s
    return total


def pair_quasirandomness(g: BipartiteGraph, mode: str = "fast") -> QuasirandomnessCertificate:
    """Certificate for a bipartite pair with f = 1_E - density."""
    l, r = g.left_size, g.right_size
    if l == 0 or r == 0:
        return QuasirandomnessCertificate(Fraction(0), Fraction(0), Fraction(0), True)
    if mode == "naive":
        raw = c4_sum(DeviationFunction2.from_bipartite(g), mode="naive")
    else:
        area = l * r
        raw = Fraction(
            _pair_raw_scaled(g.rows, range(l), (1 << r) - 1, g.edge_count, area), area**4
        )
    norm = Fraction(l * l * r * r)
    return QuasirandomnessCertificate(raw, norm, raw / norm, False)


def masked_pair_quasirandomness(
    rows: Sequence[int], left_indices: Sequence[int], right_mask: int
) -> QuasirandomnessCertificate:
    """Certificate for the pair induced on a row subset and column mask."""
    l = len(left_indices)
    r = right_mask.bit_count()
    if l == 0 or r == 0:
        return QuasirandomnessCertificate(Fraction(0), Fraction(0), Fraction(0), True)
    e = sum((rows[x] & right_mask).bit_count() for x in left_indices)
    area = l * r
    raw = Fraction(_pair_raw_scaled(rows, left_indices, right_mask, e, area), area**4)
    norm = Fraction(l * l * r * r)
    return QuasirandomnessCertificate(raw, norm, raw / norm, False)


def graph_pair_quasirandomness(
    g: Graph, xs: Sequence[int], ys: Sequence[int], mode: str = "fast"
) -> QuasirandomnessCertificate:
    """Pair certificate between two disjoint vertex subsets of a graph."""
    if set(xs) & set(ys):
        raise InvalidStructure("pair sides must be disjoint")
    ymask = 0
    for y in ys:
        ymask |= 1 << y
    positions = {y: i for i, y in enumerate(ys)}
    rows = []
    for x in xs:
        m = 0
        for y in bits(g.rows[x] & ymask):
            m |= 1 << positions[y]
        rows.append(m)
    return pair_quasirandomness(BipartiteGraph(len(xs), len(ys), tuple(rows)), mode=mode)


def graph_quasirandomness(
    g: MultipartiteGraph, mode: str = "fast"
) -> dict[tuple[int, int], QuasirandomnessCertificate]:
    """All pair certificates of a multipartite graph."""
    return {
        (i, j): pair_quasirandomness(g.pair(i, j), mode=mode)
        for i in range(g.t)
        for j in range(i + 1, g.t)
    }


def is_graph_quasirandom(g: MultipartiteGraph, alpha: Fraction, mode: str = "fast") -> bool:
    return all(cert.value <= alpha for cert in graph_quasirandomness(g, mode).values())


def _chain_oct_raw_scaled(c: Chain) -> tuple[int, int]:
    """(scaled octahedral sum, scale) for a chain, by popcount kernels.

    The deviation takes only three values: u = q - p on hyperedges,
    v = -p on triangles that are not hyperedges, 0 off triangles, where
    d(H|G) = p/q with q the triangle count.  For each pair (z, z') the
    product g = f(.,.,z) f(.,.,z') then takes values in {u^2, uv, v^2, 0},
    and the inner sums collapse to nine popcounts per row pair.
    """
    vs = c.vertex_set
    n0, n1, n2 = vs.sizes
    off = vs.offsets
    q = triangle_count(c.graph)
    p = c.hyper.edge_count
    if q == 0:
        return 0, 1
    u, v = q - p, -p
    ab, ac, bc = c.graph.pair(0, 1), c.graph.pair(0, 2), c.graph.pair(1, 2)
    cols_bc = bc.columns()  # per z: mask over y

    # Per (x, z): mask over y of triangles / hyperedges through (x, ., z).
    T = [[0] * n2 for _ in range(n0)]
    U = [[0] * n2 for _ in range(n0)]
    for x in range(n0):
        row_ab, row_ac = ab.rows[x], ac.rows[x]
        if not (row_ab and row_ac):
            continue
        t_x = T[x]
        for z in bits(row_ac):
            t_x[z] = row_ab & cols_bc[z]
    for (gu, gv, gw) in c.hyper.triples:
        U[gu - off[0]][gw - off[2]] |= 1 << (gv - off[1])

    uu, uv_, vv = u * u, u * v, v * v
    w4, w31, w22, w13, w04 = uu * uu, uu * uv_, uv_ * uv_, uv_ * vv, vv * vv
    w22b = uu * vv  # |A op C| cross terms share u^2 v^2 with |B op B|
    total = 0
    for z in range(n2):
        for z2 in range(z, n2):
            A, B, C, active = [], [], [], []
            for x in range(n0):
                t1, t2 = T[x][z], T[x][z2]
                if not (t1 and t2):
                    continue
                u1, u2 = U[x][z], U[x][z2]
                v1, v2 = t1 & ~u1, t2 & ~u2
                a = u1 & u2
                b = (u1 & v2) | (v1 & u2)
                cmask = v1 & v2
                if a | b | cmask:
                    A.append(a)
                    B.append(b)
                    C.append(cmask)
                    active.append(x)
            inner = 0
            m = len(active)
            for i in range(m):
                ai, bi, ci = A[i], B[i], C[i]
                for j in range(i, m):
                    aj, bj, cj = A[j], B[j], C[j]
                    s = (
                        w4 * (ai & aj).bit_count()
                        + w31 * ((ai & bj).bit_count() + (bi & aj).bit_count())
                        + w22b * ((ai & cj).bit_count() + (ci & aj).bit_count())
                        + w22 * (bi & bj).bit_count()
                        + w13 * ((bi & cj).bit_count() + (ci & bj).bit_count())
                        + w04 * (ci & cj).bit_count()
                    )
                    inner += s * s if i == j else 2 * s * s
            total += inner if z == z2 else 2 * inner
    return total, q


def chain_quasirandomness(c: Chain, mode: str = "fast") -> QuasirandomnessCertificate:
    """Least eta for which the chain's deviation is eta-quasirandom.

    The normalizer is [d(X,Y) d(X,Z) d(Y,Z)]^4 |X|^2 |Y|^2 |Z|^2 over the
    chain graph's pair densities.
    """
    vs = c.vertex_set
    n0, n1, n2 = vs.sizes
    if n0 == 0 or n1 == 0 or n2 == 0:
        return QuasirandomnessCertificate(Fraction(0), Fraction(0), Fraction(0), True)
    if mode == "naive":
        raw = oct_sum(DeviationFunction3.from_chain(c), mode="naive")
    elif mode == "fast":
        scaled, scale = _chain_oct_raw_scaled(c)
        raw = Fraction(scaled, scale**8)
    else:
        raise InvalidStructure(f"unknown mode {mode!r}")
    dprod = (
        c.graph.pair_density(0, 1) * c.graph.pair_density(0, 2) * c.graph.pair_density(1, 2)
    )
    norm = dprod**4 * Fraction((n0 * n1 * n2) ** 2)
    if norm == 0:
        return QuasirandomnessCertificate(raw, norm, Fraction(0), True)
    return QuasirandomnessCertificate(raw, norm, raw / norm, False)


def part_triple_chain(g: MultipartiteGraph, h: PartiteThreeGraph, i: int, j: int, k: int) -> Chain:
    """The tripartite chain induced on parts (i, j, k) of a t-partite pair (g, h)."""
    if not i < j < k:
        raise InvalidStructure("parts must be given in increasing order")
    vs = g.vertex_set
    sub_vs = PartiteVertexSet(
        (vs.names[i], vs.names[j], vs.names[k]), (vs.sizes[i], vs.sizes[j], vs.sizes[k])
    )
    sub_graph = MultipartiteGraph(
        sub_vs, {(0, 1): g.pair(i, j), (0, 2): g.pair(i, k), (1, 2): g.pair(j, k)}
    )
    off, sub_off = vs.offsets, sub_vs.offsets
    triples = set()
    for (u, v, w) in h.triples_of_parts(i, j, k):
        locs = sorted((vs.part_of(x), x) for x in (u, v, w))
        a, b, cc = locs[0][1] - off[i], locs[1][1] - off[j], locs[2][1] - off[k]
        triples.add((sub_off[0] + a, sub_off[1] + b, sub_off[2] + cc))
    return Chain(sub_graph, PartiteThreeGraph(sub_vs, frozenset(triples)))


def tpartite_chain_quasirandomness(
    g: MultipartiteGraph, h: PartiteThreeGraph, eta: Fraction, mode: str = "fast"
) -> tuple[bool, dict[tuple[int, int, int], QuasirandomnessCertificate]]:
    """Check every tripartite subchain of a t-partite chain against eta."""
    if g.vertex_set != h.vertex_set:
        raise InvalidStructure("graph and hypergraph must share parts")
    certs = {}
    for i in range(g.t):
        for j in range(i + 1, g.t):
            for k in range(j + 1, g.t):
                certs[(i, j, k)] = chain_quasirandomness(
                    part_triple_chain(g, h, i, j, k), mode=mode
                )
    ok = all(cert.value <= eta for cert in certs.values())
    return ok, certs


def eta_psi_check(c: Chain, eta: Fraction, psi: PolyFunction, mode: str = "fast") -> bool:
    """Chain eta-quasirandom and its graph psi(delta(G))-quasirandom."""
    if chain_quasirandomness(c, mode=mode).value > eta:
        return False
    threshold = psi(product_density(c.graph))
    return is_graph_quasirandom(c.graph, threshold, mode=mode)


@dataclass(frozen=True)
class WeakWitness:
    """Subsets violating the weak density condition, with the exact deviation."""

    s1: tuple[int, ...]
    s2: tuple[int, ...]
    s3: tuple[int, ...]
    deviation: Fraction
    bound: Fraction


def weak_quasirandom_check(
    h: ThreeGraph | PartiteThreeGraph,
    x1: Sequence[int],
    x2: Sequence[int],
    x3: Sequence[int],
    eta: Fraction,
    cap: int = 1 << 24,
) -> tuple[bool, WeakWitness | None]:
    """Exhaustive weak quasirandomness over three disjoint vertex sets.

    Checks |e(S1,S2,S3) - d |S1||S2||S3|| <= eta |X1||X2||X3| for all subsets
    S_i of X_i, where d is the density over X1 x X2 x X3.  Subsets of X2 and
    X3 are enumerated (X2 in Gray-code order with incremental counts); the
    extremal S1 for fixed (S2, S3) is found by thresholding, which is exact.
    """
    n1, n2, n3 = len(x1), len(x2), len(x3)
    sets = [set(x1), set(x2), set(x3)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise InvalidStructure("the three sets must be disjoint")
    if n1 and n2 and n3 and (1 << (n1 + n2 + n3)) > cap:
        raise CapacityError(f"2^{n1 + n2 + n3} subset combinations exceed cap {cap}")
    N = n1 * n2 * n3
    if N == 0:
        return True, None

    link = [[0] * n2 for _ in range(n1)]
    e_total = 0
    for a, u in enumerate(x1):
        for b, v in enumerate(x2):
            m = 0
            for cpos, w in enumerate(x3):
                if h.has_triple(u, v, w):
                    m |= 1 << cpos
            link[a][b] = m
            e_total += m.bit_count()
    # d = e_total / N; all comparisons scaled by N and eta's denominator.
    ea, eb = eta.numerator, eta.denominator
    bound = eta * N

    for s3_mask in range(1 << n3):
        k3 = s3_mask.bit_count()
        M = [[(link[a][b] & s3_mask).bit_count() for b in range(n2)] for a in range(n1)]
        counts = [0] * n1
        prev_gray = 0
        for g_idx in range(1 << n2):
            gray = g_idx ^ (g_idx >> 1)
            flip = gray ^ prev_gray
            if flip:
                b = flip.bit_length() - 1
                sign = 1 if gray & flip else -1
                for a in range(n1):
                    counts[a] += sign * M[a][b]
            prev_gray = gray
            k2 = gray.bit_count()
            k23 = k2 * k3
            if k23 == 0:
                continue
            # w_a = N * counts[a] - e_total * k23, the scaled per-vertex deviation.
            pos = neg = 0
            for a in range(n1):
                w = N * counts[a] - e_total * k23
                if w > 0:
                    pos += w
                elif w < 0:
                    neg += w
            # deviation * N = max(pos, -neg); violation iff > eta * N * N.
            worst = pos if pos >= -neg else neg
            if eb * abs(worst) > ea * N * N:
                s1 = tuple(x1[a] for a in range(n1) if (N * counts[a] - e_total * k23 > 0) == (worst > 0) and N * counts[a] - e_total * k23 != 0)
                s2 = tuple(x2[b] for b in bits(gray))
                s3 = tuple(x3[cpos] for cpos in bits(s3_mask))
                return False, WeakWitness(s1, s2, s3, Fraction(abs(worst), N), bound)
    return True, None

def multipartite_graph_quasirandomness(g: MultipartiteGraph, mode: str = "fast") -> Fraction:
    """Largest pair certificate over all part pairs; the least alpha for
    which every pair of g is alpha-quasirandom."""
    return max(cert.value for cert in graph_quasirandomness(g, mode=mode).values())
