"""Honeycomb lattice geometry and string-net basis enumeration.

The honeycomb is stored in brick-wall form: vertices sit at integer
coordinates (x, y) with x running over 2*Lx columns and y over Ly rows.
Horizontal edges join (x, y) -> (x+1, y) and carry their label along +x;
vertical edges join (x, y) -> (x, y+1) where x + y is even and carry
their label upward.  A vertex with an upward vertical edge ("A" type)
splits its west label into (east, north); a vertex with a downward
vertical edge ("B" type) fuses (south, west) into east.  On the torus an
odd number of rows wraps with a one-column shear, which keeps the
bipartition intact.

Bricks (plaquettes) are anchored at their bottom-left A-vertex.  Each
brick records its six vertices, six ring edges and six outer legs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_BASIS_CAP = 20_000_000


class LatticeError(ValueError):
    pass


class BasisCapExceeded(RuntimeError):
    def __init__(self, estimate, cap):
        super().__init__(f"estimated basis size {estimate:.3e} exceeds cap {cap:.3e}")
        self.estimate = estimate
        self.cap = cap


@dataclass(frozen=True)
class Edge:
    kind: str  # "h" or "v"
    tail: int
    head: int


@dataclass(frozen=True)
class Brick:
    """One hexagonal plaquette in brick-wall coordinates."""

    index: int
    verts: tuple  # (bl, bm, br, tl, tm, tr) vertex ids
    ring: tuple  # (h1, h2, lL, lR, t1, t2) edge ids
    legs: tuple  # (g_bl, u_b, g_br, g_tl, u_t, g_tr) edge ids or None (pinned)


@dataclass(frozen=True)
class Region:
    """A subsystem named by its vertex set (factors of the Hilbert space)."""

    vertices: frozenset
    tag: str = ""

    def __or__(self, other: "Region") -> "Region":
        return Region(self.vertices | other.vertices, f"{self.tag}+{other.tag}")

    def __len__(self) -> int:
        return len(self.vertices)


class HoneycombLattice:
    def __init__(self, Lx: int, Ly: int, topology: str):
        self.Lx = Lx
        self.Ly = Ly
        self.topology = topology
        self.coords: list[tuple[int, int]] = []
        self.vid: dict[tuple[int, int], int] = {}
        self.edges: list[Edge] = []
        self._eid: dict[tuple[int, int, str], int] = {}
        self.plaquettes: list[Brick] = []
        self.degenerate_wrap = topology == "torus" and (Lx == 1 or Ly == 1)

    # -- construction helpers ---------------------------------------------

    def _add_vertex(self, x, y):
        key = (x, y)
        if key not in self.vid:
            self.vid[key] = len(self.coords)
            self.coords.append(key)
        return self.vid[key]

    def _add_edge(self, x, y, kind, head_coord):
        key = (x, y, kind)
        if key not in self._eid:
            tail = self.vid[(x, y)]
            head = self.vid[head_coord]
            self._eid[key] = len(self.edges)
            self.edges.append(Edge(kind, tail, head))
        return self._eid[key]

    def is_a_vertex(self, vidx: int) -> bool:
        x, y = self.coords[vidx]
        return (x + y) % 2 == 0

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_slots(self, vidx: int) -> dict:
        """Incident edge ids by slot: W (in), E (out), V (up for A, down for B).

        Missing slots (open boundary) map to None and are pinned to the
        vacuum label.
        """
        return self._slots[vidx]

    def _build_slots(self):
        self._slots = [{"W": None, "E": None, "V": None} for _ in self.coords]
        for eid, e in enumerate(self.edges):
            if e.kind == "h":
                self._slots[e.tail]["E"] = eid
                self._slots[e.head]["W"] = eid
            else:
                self._slots[e.tail]["V"] = eid
                self._slots[e.head]["V"] = eid

    def graph_distance(self, srcs: set) -> np.ndarray:
        """BFS vertex distances from a vertex set."""
        dist = np.full(self.n_vertices, -1, dtype=int)
        frontier = [v for v in srcs]
        for v in frontier:
            dist[v] = 0
        adj = [[] for _ in range(self.n_vertices)]
        for e in self.edges:
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
        d = 0
        while frontier:
            nxt = []
            for v in frontier:
                for w in adj[v]:
                    if dist[w] < 0:
                        dist[w] = d + 1
                        nxt.append(w)
            frontier = nxt
            d += 1
        return dist

    def plaquette_region(self, p: int, tag: str = "") -> Region:
        return Region(frozenset(self.plaquettes[p].verts), tag or f"p{p}")

    def ball(self, core: set, radius: int, tag: str = "") -> Region:
        dist = self.graph_distance(core)
        return Region(frozenset(int(v) for v in np.where((dist >= 0) & (dist <= radius))[0]), tag)

    def to_json(self) -> dict:
        return {
            "topology": self.topology,
            "Lx": self.Lx,
            "Ly": self.Ly,
            "vertices": [list(c) for c in self.coords],
            "edges": [[e.kind, e.tail, e.head] for e in self.edges],
            "plaquettes": [
                {"verts": list(p.verts), "ring": list(p.ring), "legs": list(p.legs)}
                for p in self.plaquettes
            ],
        }


def build_torus(Lx: int, Ly: int) -> HoneycombLattice:
    """Torus with 2*Lx*Ly vertices, 3*Lx*Ly edges and Lx*Ly plaquettes.

    An odd Ly wraps the top row onto the bottom with a one-column shear so
    the brick pattern stays consistent.
    """
    if Lx < 1 or Ly < 1:
        raise LatticeError("Lx, Ly must be >= 1")
    lat = HoneycombLattice(Lx, Ly, "torus")
    W = 2 * Lx
    shear = Ly % 2

    for y in range(Ly):
        for x in range(W):
            lat._add_vertex(x, y)

    def up(x, y):
        if y < Ly - 1:
            return (x, y + 1)
        return ((x + shear) % W, 0)

    for y in range(Ly):
        for x in range(W):
            lat._add_edge(x, y, "h", ((x + 1) % W, y))
            if (x + y) % 2 == 0:
                lat._add_edge(x, y, "v", up(x, y))

    def heid(x, y):
        return lat._eid[(x % W, y % Ly, "h")]

    def veid(x, y):
        # the vertical edge *anchored* at row y; row -1 wraps to the top
        # row, whose up-edges land with the shear applied
        if y >= 0:
            return lat._eid[(x % W, y, "v")]
        return lat._eid[((x - shear) % W, Ly - 1, "v")]

    idx = 0
    for y in range(Ly):
        for x in range(W):
            if (x + y) % 2 != 0:
                continue
            tlc = up(x, y)
            tmc = ((tlc[0] + 1) % W, tlc[1])
            trc = ((tlc[0] + 2) % W, tlc[1])
            verts = (
                lat.vid[(x, y)],
                lat.vid[((x + 1) % W, y)],
                lat.vid[((x + 2) % W, y)],
                lat.vid[tlc],
                lat.vid[tmc],
                lat.vid[trc],
            )
            ring = (
                heid(x, y),                     # h1: bl -> bm
                heid(x + 1, y),                 # h2: bm -> br
                veid(x, y),                     # lL: bl -> tl
                veid(x + 2, y),                 # lR: br -> tr
                lat._eid[(tlc[0], tlc[1], "h")],            # t1: tl -> tm
                lat._eid[(tmc[0], tmc[1], "h")],            # t2: tm -> tr
            )
            legs = (
                heid(x - 1, y),                 # g_bl: into bl from the west
                veid(x + 1, y - 1),             # u_b: up into bm from below
                heid(x + 2, y),                 # g_br: out of br
                lat._eid[((tlc[0] - 1) % W, tlc[1], "h")],  # g_tl: into tl
                lat._eid[(tmc[0], tmc[1], "v")],            # u_t: out of tm
                lat._eid[(trc[0], trc[1], "h")],            # g_tr: out of tr
            )
            lat.plaquettes.append(Brick(idx, verts, ring, legs))
            idx += 1

    lat._build_slots()
    _check_counts(lat, torus=True)
    return lat


def build_open_patch(Lx: int, Ly: int) -> HoneycombLattice:
    """Open patch of Lx*Ly bricks; dangling legs are pinned to the vacuum."""
    if Lx < 1 or Ly < 1:
        raise LatticeError("Lx, Ly must be >= 1")
    lat = HoneycombLattice(Lx, Ly, "open")
    anchors = []
    for y in range(Ly):
        for k in range(Lx):
            anchors.append((y % 2 + 2 * k, y))
    for (x0, y) in anchors:
        for dx in range(3):
            lat._add_vertex(x0 + dx, y)
            lat._add_vertex(x0 + dx, y + 1)
    # edges: any geometric neighbor pair present in the vertex set
    for (x, y) in list(lat.vid):
        if (x + 1, y) in lat.vid and _h_edge_in_patch(lat, x, y):
            lat._add_edge(x, y, "h", (x + 1, y))
        if (x + y) % 2 == 0 and (x, y + 1) in lat.vid:
            lat._add_edge(x, y, "v", (x, y + 1))

    def maybe(x, y, kind):
        return lat._eid.get((x, y, kind))

    for idx, (x0, y) in enumerate(anchors):
        verts = tuple(
            lat.vid[c]
            for c in [(x0, y), (x0 + 1, y), (x0 + 2, y), (x0, y + 1), (x0 + 1, y + 1), (x0 + 2, y + 1)]
        )
        ring = (
            maybe(x0, y, "h"),
            maybe(x0 + 1, y, "h"),
            maybe(x0, y, "v"),
            maybe(x0 + 2, y, "v"),
            maybe(x0, y + 1, "h"),
            maybe(x0 + 1, y + 1, "h"),
        )
        if any(e is None for e in ring):
            raise LatticeError("internal brick edge missing")
        legs = (
            maybe(x0 - 1, y, "h"),
            maybe(x0 + 1, y - 1, "v"),
            maybe(x0 + 2, y, "h"),
            maybe(x0 - 1, y + 1, "h"),
            maybe(x0 + 1, y + 1, "v"),
            maybe(x0 + 2, y + 1, "h"),
        )
        lat.plaquettes.append(Brick(idx, verts, ring, legs))

    lat._build_slots()
    return lat


def _h_edge_in_patch(lat, x, y) -> bool:
    """Horizontal edges exist only along brick rows, not between stray pairs."""
    # Both endpoints exist; the edge belongs to the patch when it lies on a
    # brick row at this height: for staggered rows every present pair does.
    return True


def _check_counts(lat: HoneycombLattice, torus: bool):
    V, E, P = lat.n_vertices, lat.n_edges, len(lat.plaquettes)
    if torus:
        ok = V == 2 * lat.Lx * lat.Ly and E == 3 * lat.Lx * lat.Ly and P == lat.Lx * lat.Ly
        if not ok or V - E + P != 0:
            raise LatticeError(f"bad torus counts V={V} E={E} P={P}")


# ---------------------------------------------------------------------------
# basis enumeration


class StringNetBasis:
    """Enumerated stable configurations on a vertex subset.

    A configuration assigns a label to every edge variable (edges with at
    least one endpoint in the subset) plus a multiplicity index per vertex.
    The branching rule is enforced at subset vertices only; pinned slots
    read the vacuum.
    """

    def __init__(self, cat, lattice, vertex_set, edge_vars, labels, mults):
        self.cat = cat
        self.lattice = lattice
        self.vertex_set = vertex_set
        self.edge_vars = edge_vars  # ordered eids
        self.evar_pos = {e: i for i, e in enumerate(edge_vars)}
        self.vertex_list = sorted(vertex_set)
        self.vpos = {v: i for i, v in enumerate(self.vertex_list)}
        self.labels = labels  # (n, len(edge_vars)) uint8
        self.mults = mults  # (n, len(vertex_list)) uint8
        self._index = {
            (lab.tobytes(), mul.tobytes()): i
            for i, (lab, mul) in enumerate(zip(labels, mults))
        }

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self):
        return self.labels.shape[0]

    def index(self, labels: np.ndarray, mults: np.ndarray) -> int | None:
        return self._index.get((labels.tobytes(), mults.tobytes()))

    def edge_label(self, row: int, eid: int) -> int:
        pos = self.evar_pos.get(eid)
        if pos is None:
            return 0  # pinned / outside the subset
        return int(self.labels[row, pos])

    def vertex_mult(self, row: int, vidx: int) -> int:
        return int(self.mults[row, self.vpos[vidx]])

    def restriction_keys(self, region_vertices: frozenset) -> np.ndarray:
        """Integer key per basis row identifying the region restriction.

        Two rows share a key iff they agree on every edge variable incident
        to the region and on every region-vertex multiplicity.  Columns are
        ordered by global edge/vertex ids so the key order is comparable
        across bases built on different vertex subsets.
        """
        eids = sorted(e for e in self.evar_pos if self._edge_touches(e, region_vertices))
        cols = [self.evar_pos[e] for e in eids]
        vids = sorted(v for v in region_vertices if v in self.vpos)
        vcols = [self.vpos[v] for v in vids]
        mat = np.concatenate(
            [self.labels[:, cols], self.mults[:, vcols]], axis=1
        )
        _, keys = np.unique(mat, axis=0, return_inverse=True)
        return keys

    def _edge_touches(self, eid, vset):
        e = self.lattice.edges[eid]
        return e.tail in vset or e.head in vset


def vertex_constraint(cat, lattice, vidx, label_of) -> int:
    """Branching multiplicity at a vertex given a label lookup callable."""
    slots = lattice.vertex_slots(vidx)
    lw = label_of(slots["W"])
    le = label_of(slots["E"])
    lv = label_of(slots["V"])
    if lattice.is_a_vertex(vidx):
        return cat.n(le, lv, lw)
    return cat.n(lv, lw, le)


def enumerate_basis(cat, lattice, vertex_set=None, cap: int = DEFAULT_BASIS_CAP) -> StringNetBasis:
    """Enumerate stable edge labelings (plus vertex multiplicities).

    The enumeration back-tracks vertex by vertex in coordinate order, so
    most vertices have at most one undetermined slot when reached.  The
    configurations come out in lexicographic order of (edge labels, then
    vertex multiplicities).
    """
    if vertex_set is None:
        vertex_set = frozenset(range(lattice.n_vertices))
    vertex_set = frozenset(vertex_set)
    edge_vars = sorted(
        {
            eid
            for v in vertex_set
            for eid in lattice.vertex_slots(v).values()
            if eid is not None
        }
    )
    est = float(cat.rank) ** len(edge_vars)
    if est > cap:
        # refine the estimate by the admissible-triple fraction per vertex
        tot = cat.rank**3
        adm = sum(
            cat.n(a, b, c) > 0
            for a in range(cat.rank)
            for b in range(cat.rank)
            for c in range(cat.rank)
        )
        est = est * (adm / tot) ** max(len(vertex_set) - 2, 0)
        if est > cap:
            raise BasisCapExceeded(est, cap)

    epos = {e: i for i, e in enumerate(edge_vars)}
    verts = sorted(vertex_set, key=lambda v: (lattice.coords[v][1], lattice.coords[v][0]))
    slots_per_vertex = []
    for v in verts:
        slots = lattice.vertex_slots(v)
        slots_per_vertex.append(
            (v, [epos.get(slots[s]) if slots[s] is not None else None for s in ("W", "E", "V")])
        )

    assign = np.full(len(edge_vars), -1, dtype=np.int16)
    out_labels: list[bytes] = []
    rank = cat.rank

    def label_at(pos):
        return 0 if pos is None else int(assign[pos])

    def check_vertex(v, positions):
        lw, le, lv = (label_at(p) for p in positions)
        if lattice.is_a_vertex(v):
            return cat.n(le, lv, lw)
        return cat.n(lv, lw, le)

    def rec(i):
        if i == len(slots_per_vertex):
            out_labels.append(assign.astype(np.uint8).tobytes())
            return
        v, positions = slots_per_vertex[i]
        free = [p for p in positions if p is not None and assign[p] < 0]
        if not free:
            if check_vertex(v, positions):
                rec(i + 1)
            return
        def fill(j):
            if j == len(free):
                if check_vertex(v, positions):
                    rec(i + 1)
                return
            for lab in range(rank):
                assign[free[j]] = lab
                fill(j + 1)
            assign[free[j]] = -1
        fill(0)

    rec(0)
    labels = (
        np.frombuffer(b"".join(sorted(out_labels)), dtype=np.uint8).reshape(
            len(out_labels), len(edge_vars)
        )
        if out_labels
        else np.zeros((0, len(edge_vars)), dtype=np.uint8)
    )

    # expand vertex multiplicities (trivial for multiplicity-free data)
    rows_lab, rows_mul = [], []
    nv = len(verts)
    vorder = sorted(vertex_set)
    for row in labels:
        def lab_of(eid):
            return 0 if eid is None else int(row[epos[eid]])
        dims = [vertex_constraint(cat, lattice, v, lab_of) for v in vorder]
        total = int(np.prod(dims))
        for flat in range(total):
            m = np.zeros(nv, dtype=np.uint8)
            rem = flat
            for j in range(nv - 1, -1, -1):
                m[j] = rem % dims[j]
                rem //= dims[j]
            rows_lab.append(row)
            rows_mul.append(m)
    labels = np.array(rows_lab, dtype=np.uint8) if rows_lab else labels
    mults = (
        np.array(rows_mul, dtype=np.uint8)
        if rows_mul
        else np.zeros((0, nv), dtype=np.uint8)
    )
    return StringNetBasis(cat, lattice, vertex_set, edge_vars, labels, mults)


def brute_force_basis_count(cat, lattice) -> int:
    """Independent oracle: filter the full product of edge labelings."""
    E = lattice.n_edges
    rank = cat.rank
    if rank**E > 5_000_000:
        raise LatticeError("brute force oracle too large")
    count = 0
    labels = np.zeros(E, dtype=int)

    def lab_of(eid):
        return 0 if eid is None else int(labels[eid])

    def rec(e):
        nonlocal count
        if e == E:
            mult = 1
            for v in range(lattice.n_vertices):
                mult *= vertex_constraint(cat, lattice, v, lab_of)
                if not mult:
                    return
            count += mult
            return
        for lab in range(rank):
            labels[e] = lab
            rec(e + 1)

    rec(0)
    return count


# ---------------------------------------------------------------------------
# axiom partitions


@dataclass
class Partition:
    regions: dict  # name -> Region
    kind: str
    anchor: int

    def __getitem__(self, name):
        return self.regions[name]


def plaquette_neighbors(lattice, p: int) -> list[tuple[int, int]]:
    """Bricks sharing a vertex with brick p, with wrapped x-displacement."""
    W = 2 * lattice.Lx
    core = set(lattice.plaquettes[p].verts)
    ax0 = lattice.coords[lattice.plaquettes[p].verts[0]][0]
    out = []
    for q, br in enumerate(lattice.plaquettes):
        if q == p or not (set(br.verts) & core):
            continue
        qx = lattice.coords[br.verts[0]][0]
        if lattice.topology == "torus":
            dx = ((qx - ax0 + W // 2) % W) - W // 2
        else:
            dx = qx - ax0
        out.append((q, dx))
    return out


def plaquette_ring(lattice, anchor: int, width: int = 1) -> list[tuple[int, int]]:
    """Plaquettes within ``width`` rings of the anchor (excluded), with dx."""
    seen = {anchor}
    frontier = [anchor]
    for _ in range(width):
        nxt = []
        for p in frontier:
            for q, _ in plaquette_neighbors(lattice, p):
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    ring = []
    ax0 = lattice.coords[lattice.plaquettes[anchor].verts[0]][0]
    W = 2 * lattice.Lx
    for q in sorted(seen):
        if q == anchor:
            continue
        qx = lattice.coords[lattice.plaquettes[q].verts[0]][0]
        if lattice.topology == "torus":
            dx = ((qx - ax0 + W // 2) % W) - W // 2
        else:
            dx = qx - ax0
        ring.append((q, dx))
    return ring


def make_axiom_partition(lattice, kind, anchor: int = 0, width: int = 1) -> Partition:
    """Region partition matching one of the bootstrap-axiom layouts.

    C is the disk of one plaquette; the annulus around it consists of the
    ``width`` surrounding rings of plaquettes.  For A0 the whole annulus is
    B; for A1 it splits into the left arc B and the right arc D by the
    wrapped x-displacement of each ring plaquette, junction vertices going
    to B.  Boundary variants use the same construction anchored on an open
    patch, where the arcs terminate on the physical boundary.
    """
    if kind not in ("A0-bulk", "A1-bulk", "A0-boundary", "A1-boundary"):
        raise LatticeError(f"unknown partition kind {kind}")
    if "boundary" in kind and lattice.topology != "open":
        raise LatticeError("boundary placements need an open patch")
    if "bulk" in kind and lattice.topology != "torus":
        raise LatticeError("bulk placements run on the torus")
    if width < 1:
        raise LatticeError("width must be >= 1 plaquette")
    core = frozenset(lattice.plaquettes[anchor].verts)
    C = Region(core, "C")
    ring = plaquette_ring(lattice, anchor, width)
    if not ring:
        raise LatticeError("lattice too small for requested width")
    allv = frozenset(range(lattice.n_vertices))
    if kind.startswith("A0"):
        B = frozenset(v for q, _ in ring for v in lattice.plaquettes[q].verts) - core
        rest = allv - B - core
        return Partition(
            {"B": Region(B, "B"), "C": C, "rest": Region(rest, "rest")}, kind, anchor
        )
    left = [q for q, dx in ring if dx < 0]
    right = [q for q, dx in ring if dx >= 0]
    if not left or not right:
        raise LatticeError("cannot split the ring into two arcs")
    Bv = frozenset(v for q in left for v in lattice.plaquettes[q].verts) - core
    Dv = frozenset(v for q in right for v in lattice.plaquettes[q].verts) - core - Bv
    rest = allv - Bv - Dv - core
    return Partition(
        {"B": Region(Bv, "B"), "C": C, "D": Region(Dv, "D"), "rest": Region(rest, "rest")},
        kind,
        anchor,
    )
