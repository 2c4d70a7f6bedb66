"""Brute-force shattering testers and induced-pattern searches.

Everything here is exact and exponential, guarded by hard caps.  The
intended regime is tiny instances where an exhaustive answer serves as
ground truth for the structural machinery elsewhere in the package:
VC dimension of a set system, VC2 dimension of a 3-graph (shattered
complete bipartite link patterns), and three flavors of induced-pattern
embedding.  Every witness returned by a public function is re-verified
against its definition before it leaves, so a bug in a search heuristic
can only cause a miss, never a false positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from .core import (
    BipartiteGraph,
    CapacityError,
    Graph,
    InvalidStructure,
    PartiteThreeGraph,
    ThreeGraph,
    bits,
)

VC_UNIVERSE_CAP = 24
VC2_VERTEX_CAP = 20
BIPARTITE_PATTERN_CAP = 10
TRIPARTITE_PATTERN_CAP = 9
INDUCED_PATTERN_CAP = 8


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise RuntimeError(f"witness failed re-verification: {msg}")


@dataclass(frozen=True)
class SetSystem:
    """Family of subsets of [n], each subset a bitmask."""

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        full = (1 << self.n) - 1
        for m in self.members:
            if m < 0 or m & ~full:
                raise InvalidStructure("member set leaves the universe")


@dataclass(frozen=True)
class ShatterWitness:
    """Shattered set(s) plus one realizer per pattern.

    ``sets`` holds (S,) for plain VC and (A, B) for VC2.  ``realizers``
    maps each pattern bitmask to the index of a realizing member (VC) or
    to a realizing vertex (VC2).  Pattern bit conventions: bit i of a VC
    pattern is membership of S[i]; bit i*|B|+j of a VC2 pattern is the
    presence of the triple (A[i], B[j], v).
    """

    sets: tuple[tuple[int, ...], ...]
    realizers: dict[int, int]


def neighborhood_system(g: Graph | BipartiteGraph, side: str = "right") -> SetSystem:
    """Set system of vertex neighborhoods.

    For a plain graph the universe is V(G) and every vertex contributes
    its open neighborhood.  For a bipartite graph, ``side`` picks whose
    neighborhoods form the family: "right" (default) takes each right
    vertex's neighborhood inside the left part, "left" the transpose.
    """
    if isinstance(g, Graph):
        return SetSystem(g.n, tuple(g.rows))
    if isinstance(g, BipartiteGraph):
        if side == "right":
            return SetSystem(g.left_size, tuple(g.columns()))
        if side == "left":
            return SetSystem(g.right_size, tuple(g.rows))
        raise InvalidStructure(f"unknown side {side!r}")
    raise InvalidStructure("expected a Graph or BipartiteGraph")


def _project(member: int, positions: tuple[int, ...]) -> int:
    pat = 0
    for i, p in enumerate(positions):
        pat |= ((member >> p) & 1) << i
    return pat


def _verify_vc(s: SetSystem, d: int, w: ShatterWitness) -> None:
    (elems,) = w.sets
    _check(len(elems) == d and len(set(elems)) == d, "bad shattered set")
    _check(len(w.realizers) == 1 << d, "pattern count")
    for pat, idx in w.realizers.items():
        _check(0 <= idx < len(s.members), "realizer index")
        _check(_project(s.members[idx], elems) == pat, "pattern mismatch")


def vc_dimension(
    s: SetSystem, cap_d: int | None = None, cap_n: int = VC_UNIVERSE_CAP
) -> tuple[int, ShatterWitness | None]:
    """Exact VC dimension of a set system, with a shattering witness.

    Searches sizes upward and stops at the first size with no shattered
    set (shattering is downward closed, so larger sizes cannot succeed).
    An empty family has dimension -1 by convention.  Raises
    CapacityError when the universe exceeds ``cap_n``.
    """
    if s.n > cap_n:
        raise CapacityError(f"universe {s.n} exceeds the brute-force cap {cap_n}")
    if not s.members:
        return -1, None
    limit = s.n if cap_d is None else min(cap_d, s.n)
    # A family of m sets realizes at most m patterns on any fixed S.
    while (1 << limit) > len(s.members) and limit > 0:
        limit -= 1
    best = 0, ShatterWitness(((),), {0: 0})
    for d in range(1, limit + 1):
        found = None
        want = 1 << d
        for elems in combinations(range(s.n), d):
            seen: dict[int, int] = {}
            for idx, m in enumerate(s.members):
                pat = _project(m, elems)
                if pat not in seen:
                    seen[pat] = idx
                    if len(seen) == want:
                        break
            if len(seen) == want:
                found = ShatterWitness((elems,), seen)
                break
        if found is None:
            break
        best = d, found
    _verify_vc(s, best[0], best[1])
    return best


def _pair_links(h: ThreeGraph) -> dict[tuple[int, int], int]:
    """For each vertex pair (a < b), the bitmask of joint link vertices."""
    out: dict[tuple[int, int], int] = {}
    for (u, v, w) in h.triples:
        out[(u, v)] = out.get((u, v), 0) | (1 << w)
        out[(u, w)] = out.get((u, w), 0) | (1 << v)
        out[(v, w)] = out.get((v, w), 0) | (1 << u)
    return out


def _as_three_graph(h: ThreeGraph | PartiteThreeGraph) -> ThreeGraph:
    return h.to_three_graph() if isinstance(h, PartiteThreeGraph) else h


def _vc2_pattern(links: dict, a_side, b_side, v: int) -> int:
    pat = 0
    t = 0
    for a in a_side:
        for b in b_side:
            key = (a, b) if a < b else (b, a)
            pat |= ((links.get(key, 0) >> v) & 1) << t
            t += 1
    return pat


def _verify_vc2(h: ThreeGraph, d: int, w: ShatterWitness) -> None:
    a_side, b_side = w.sets
    _check(len(a_side) == d and len(b_side) == d, "side sizes")
    _check(not set(a_side) & set(b_side), "sides intersect")
    _check(len(w.realizers) == 1 << (d * d), "pattern count")
    for pat, v in w.realizers.items():
        t = 0
        for a in a_side:
            for b in b_side:
                _check(h.has_triple(a, b, v) == bool((pat >> t) & 1), "link mismatch")
                t += 1


def vc2_dimension(
    h: ThreeGraph | PartiteThreeGraph,
    cap_d: int = 2,
    cap_n: int = VC2_VERTEX_CAP,
) -> tuple[int, ShatterWitness | None]:
    """Exact VC2 dimension up to ``cap_d``, with a shattering witness.

    A shattered K_{d,d} is a pair of disjoint d-sets A, B such that every
    one of the 2^(d*d) subsets S of A x B is the exact trace of some
    vertex's link on A x B.  Placements are unrestricted: for partite
    inputs A and B may land anywhere, including inside one part.
    Distinct patterns force distinct realizing vertices, so sizes with
    2^(d*d) > |V| are skipped outright.
    """
    h3 = _as_three_graph(h)
    if h3.n > cap_n:
        raise CapacityError(f"{h3.n} vertices exceed the brute-force cap {cap_n}")
    if h3.n == 0:
        raise InvalidStructure("empty vertex set")
    links = _pair_links(h3)
    best: tuple[int, ShatterWitness | None] = 0, ShatterWitness(((), ()), {0: 0})
    for d in range(1, cap_d + 1):
        want = 1 << (d * d)
        if want > h3.n:
            break
        found = None
        for a_side in combinations(range(h3.n), d):
            rest = [x for x in range(h3.n) if x not in a_side]
            for b_side in combinations(rest, d):
                if b_side < a_side:
                    continue  # (A,B) and (B,A) shatter together
                seen: dict[int, int] = {}
                for v in range(h3.n):
                    pat = _vc2_pattern(links, a_side, b_side, v)
                    if pat not in seen:
                        seen[pat] = v
                        if len(seen) == want:
                            break
                if len(seen) == want:
                    found = ShatterWitness((a_side, b_side), seen)
                    break
            if found is not None:
                break
        if found is None:
            break
        best = d, found
    if best[0] > 0:
        _verify_vc2(h3, best[0], best[1])
    return best


@dataclass(frozen=True)
class EmbeddingWitness:
    """Injective image tuples, one per part of the pattern."""

    images: tuple[tuple[int, ...], ...]

    def all_vertices(self) -> tuple[int, ...]:
        return tuple(v for side in self.images for v in side)


def _verify_disjoint_injective(w: EmbeddingWitness) -> None:
    flat = w.all_vertices()
    _check(len(set(flat)) == len(flat), "images collide")


def bipartitely_induced(
    f: BipartiteGraph, g: Graph, cap: int = BIPARTITE_PATTERN_CAP
) -> EmbeddingWitness | None:
    """Search for a bipartitely induced copy of ``f`` inside ``g``.

    Wanted: disjoint images A', B' of f's sides with g-adjacency across
    the sides matching f exactly.  Adjacency inside A' or inside B' is
    unconstrained.  Exhaustive over ordered left images; right images
    are filled greedily from per-vertex candidate bitmasks, which is
    exact because right candidates with different required neighborhoods
    never compete.  First witness in enumeration order wins.
    """
    if f.left_size + f.right_size > cap:
        raise CapacityError(f"pattern has {f.left_size + f.right_size} > {cap} vertices")
    n = g.n
    if f.left_size + f.right_size > n:
        return None
    full = (1 << n) - 1
    # Group right pattern vertices by their required left-trace.
    col_groups: dict[int, list[int]] = {}
    for y in range(f.right_size):
        col = 0
        for x in range(f.left_size):
            if f.has_edge(x, y):
                col |= 1 << x
        col_groups.setdefault(col, []).append(y)
    for left_img in permutations(range(n), f.left_size):
        used = 0
        for v in left_img:
            used |= 1 << v
        # Candidates per trace: vertices adjacent to exactly the traced lefts.
        right_img: list[int] = [-1] * f.right_size
        taken = used
        ok = True
        for col, ys in sorted(col_groups.items()):
            cand = full & ~used
            for x in range(f.left_size):
                row = g.rows[left_img[x]]
                cand &= row if (col >> x) & 1 else ~row
            cand &= full & ~taken
            picks = []
            for v in bits(cand):
                picks.append(v)
                if len(picks) == len(ys):
                    break
            if len(picks) < len(ys):
                ok = False
                break
            for y, v in zip(ys, picks):
                right_img[y] = v
                taken |= 1 << v
        if not ok:
            continue
        w = EmbeddingWitness((tuple(left_img), tuple(right_img)))
        _verify_disjoint_injective(w)
        for x in range(f.left_size):
            for y in range(f.right_size):
                _check(
                    g.has_edge(left_img[x], right_img[y]) == f.has_edge(x, y),
                    "cross edge mismatch",
                )
        return w
    return None


def tripartitely_induced(
    v: PartiteThreeGraph,
    h: ThreeGraph | PartiteThreeGraph,
    cap: int = TRIPARTITE_PATTERN_CAP,
) -> EmbeddingWitness | None:
    """Search for a tripartitely induced copy of ``v`` inside ``h``.

    Only crossing triples are constrained: a triple of image vertices,
    one per part, must be an edge of h exactly when the pattern triple
    is an edge of v.  Triples of h meeting an image part twice are free.
    Exhaustive over ordered images of the first two parts; third-part
    vertices are matched by their required link pattern, exactly as in
    the bipartite search.  The default cap suits patterns on at most 9
    vertices; callers may raise it explicitly for bigger patterns.
    """
    vs = v.vertex_set
    if vs.t != 3:
        raise InvalidStructure("pattern must be tripartite")
    if vs.total > cap:
        raise CapacityError(f"pattern has {vs.total} > {cap} vertices")
    h3 = _as_three_graph(h)
    n = h3.n
    if vs.total > n:
        return None
    s0, s1, s2 = vs.sizes
    links = _pair_links(h3)
    # Required link pattern of each third-part vertex, bit a*s1+b.
    req: list[int] = []
    for c in range(s2):
        pat = 0
        for a in range(s0):
            for b in range(s1):
                if v.has_triple(vs.to_global(0, a), vs.to_global(1, b), vs.to_global(2, c)):
                    pat |= 1 << (a * s1 + b)
        req.append(pat)
    req_groups: dict[int, list[int]] = {}
    for c, pat in enumerate(req):
        req_groups.setdefault(pat, []).append(c)
    for img0 in permutations(range(n), s0):
        used0 = 0
        for x in img0:
            used0 |= 1 << x
        for img1 in permutations((x for x in range(n) if not (used0 >> x) & 1), s1):
            used = used0
            for x in img1:
                used |= 1 << x
            rows = []
            for a in range(s0):
                for b in range(s1):
                    x, y = img0[a], img1[b]
                    key = (x, y) if x < y else (y, x)
                    rows.append(links.get(key, 0))
            # Bucket available h-vertices by their link pattern on the images.
            buckets: dict[int, list[int]] = {}
            for x in range(n):
                if (used >> x) & 1:
                    continue
                pat = 0
                for t, row in enumerate(rows):
                    pat |= ((row >> x) & 1) << t
                if pat in req_groups:
                    buckets.setdefault(pat, []).append(x)
            if any(len(buckets.get(pat, ())) < len(cs) for pat, cs in req_groups.items()):
                continue
            img2 = [-1] * s2
            for pat, cs in req_groups.items():
                for c, x in zip(cs, buckets[pat]):
                    img2[c] = x
            w = EmbeddingWitness((img0, img1, tuple(img2)))
            _verify_disjoint_injective(w)
            for a in range(s0):
                for b in range(s1):
                    for c in range(s2):
                        _check(
                            h3.has_triple(img0[a], img1[b], img2[c])
                            == v.has_triple(
                                vs.to_global(0, a), vs.to_global(1, b), vs.to_global(2, c)
                            ),
                            "crossing triple mismatch",
                        )
            return w
    return None


def induced_copy_search(
    f: ThreeGraph, h: ThreeGraph, cap: int = INDUCED_PATTERN_CAP
) -> EmbeddingWitness | None:
    """Search for an induced sub-3-graph of ``h`` isomorphic to ``f``.

    All triples of the image are constrained, matching f exactly under
    the vertex map.  Depth-first over pattern vertices in index order,
    pruning on every triple completed by the newest assignment.
    """
    if f.n > cap:
        raise CapacityError(f"pattern has {f.n} > {cap} vertices")
    if f.n > h.n:
        return None
    m = f.n
    img: list[int] = []
    used = [False] * h.n

    def extend() -> bool:
        k = len(img)
        if k == m:
            return True
        for cand in range(h.n):
            if used[cand]:
                continue
            good = True
            for i in range(k):
                for j in range(i + 1, k):
                    if h.has_triple(img[i], img[j], cand) != f.has_triple(i, j, k):
                        good = False
                        break
                if not good:
                    break
            if not good:
                continue
            img.append(cand)
            used[cand] = True
            if extend():
                return True
            used[cand] = False
            img.pop()
        return False

    if not extend():
        return None
    w = EmbeddingWitness((tuple(img),))
    _verify_disjoint_injective(w)
    for a, b, c in combinations(range(m), 3):
        _check(
            h.has_triple(img[a], img[b], img[c]) == f.has_triple(a, b, c),
            "induced triple mismatch",
        )
    return w
