"""Lattice bookkeeping: brickwork patches and square-lattice tori.

All other modules import their index conventions from here.

Vertex legs
-----------
Every degree-4 vertex carries legs in the fixed order

        b (top-in)
        |
  a ----+---- c (right-out)
 (left-in)
        |
        d (bottom-out)

and a single-line tensor entry is read as W[(a, b), (c, d)] with the pair
index  (a, b) -> a * N + b.  Composite pair indexing everywhere in the
package is big-endian in this sense.

Brickwork patches
-----------------
A brickwork patch is the space-time graph of the automaton: `width` sites
carry one live edge each; sub-layer 0 applies gates at sites [0, arity),
[arity, 2*arity), ...; sub-layer 1 is offset by arity/2; sites not covered
by a gate pass their edge through unchanged.  A gate consumes the live
edges on its sites (in-legs, left to right: a, b) and emits fresh edges
(out-legs: c, d).  Time increases with the sub-layer index; a "double
layer" is one even plus one odd sub-layer.

Faces (dual sites) are tracked for double-line tensors: dual position k
sits to the left of site k, so a patch has width+1 initial faces.  A gate
on sites (s, s+1) replaces the face at dual s+1.  Its face tuple is
ordered (left, mid-in, right, mid-out), matching the double-line tensor
index order A[left][mid-in][right][mid-out], and every physical edge label
is the difference

    label(edge) = (face_left - face_right) mod N .

Square-lattice tori
-------------------
Vertices at (x, y), x column / y row, horizontal edge h(x, y) pointing
east from (x, y) and vertical edge v(x, y) pointing south.  The legs of
vertex (x, y) are a = h(x-1, y), b = v(x, y-1), c = h(x, y), d = v(x, y).
Plaquette P(x, y) is the face south-east of vertex (x, y).  Double-line
faces are the plaquettes; a vertex reads A[SW][NW][NE][SE] and edge labels
are h(x, y) = P(x, y) - P(x, y-1), v(x, y) = P(x-1, y) - P(x, y).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Gate:
    """One gate application: a vertex of the space-time tensor network."""

    vid: int
    layer: int
    sites: tuple[int, ...]
    in_edges: tuple[int, ...]
    out_edges: tuple[int, ...]
    faces: tuple[int, int, int, int] | None = None  # (left, mid-in, right, mid-out)


@dataclass
class BrickworkPatch:
    """Space-time graph of a width x n_sublayers brickwork circuit."""

    width: int
    n_sublayers: int
    arity: int
    gates: list[Gate] = field(default_factory=list)
    n_edges: int = 0
    n_faces: int = 0
    initial_edges: list[int] = field(default_factory=list)
    final_edges: list[int] = field(default_factory=list)
    edge_site: list[int] = field(default_factory=list)
    edge_birth: list[int] = field(default_factory=list)
    edge_faces: list[tuple[int, int]] = field(default_factory=list)

    def gate_at(self, layer: int, leftmost_site: int) -> Gate:
        for g in self.gates:
            if g.layer == layer and g.sites[0] == leftmost_site:
                return g
        raise KeyError(f"no gate at layer {layer}, site {leftmost_site}")

    def layout(self) -> dict[int, tuple[int, int]]:
        """vid -> (site of left leg, sub-layer) for automaton evaluation."""
        return {g.vid: (g.sites[0], g.layer) for g in self.gates}


def gate_spans(width: int, layer: int, arity: int) -> list[int]:
    """Leftmost sites of the gates in one sub-layer (even layers at offset 0)."""
    offset = 0 if layer % 2 == 0 else arity // 2
    return [s for s in range(offset, width - arity + 1, arity)]


def build_brickwork(width: int, n_sublayers: int, arity: int = 2) -> BrickworkPatch:
    """Construct the brickwork patch graph with edge and face bookkeeping."""
    if arity not in (2, 4):
        raise ValueError("arity must be 2 or 4")
    if width % arity:
        raise ValueError(f"width must be a multiple of arity={arity}")

    patch = BrickworkPatch(width=width, n_sublayers=n_sublayers, arity=arity)
    live = list(range(width))  # live edge id per site
    patch.n_edges = width
    patch.initial_edges = list(range(width))
    patch.edge_site = list(range(width))
    patch.edge_birth = [0] * width

    track_faces = arity == 2
    if track_faces:
        live_face = list(range(width + 1))  # dual position -> live face id
        patch.n_faces = width + 1
        patch.edge_faces = [(x, x + 1) for x in range(width)]

    vid = 0
    for layer in range(n_sublayers):
        for s in gate_spans(width, layer, arity):
            sites = tuple(range(s, s + arity))
            ins = tuple(live[x] for x in sites)
            outs = tuple(range(patch.n_edges, patch.n_edges + arity))
            patch.n_edges += arity
            patch.edge_site.extend(sites)
            patch.edge_birth.extend([layer + 1] * arity)
            faces = None
            if track_faces:
                new_face = patch.n_faces
                patch.n_faces += 1
                faces = (live_face[s], live_face[s + 1], live_face[s + 2], new_face)
                live_face[s + 1] = new_face
                patch.edge_faces.append((live_face[s], new_face))
                patch.edge_faces.append((new_face, live_face[s + 2]))
            patch.gates.append(Gate(vid, layer, sites, ins, outs, faces))
            for x, e in zip(sites, outs):
                live[x] = e
            vid += 1
    patch.final_edges = list(live)
    return patch


@dataclass(frozen=True)
class SquareTorus:
    """W x H square-lattice torus (kind may also be 'cylinder': x wrapped,
    y open with boundary in-legs on row 0 and free out-legs on row H-1)."""

    W: int
    H: int
    kind: str = "torus"

    def __post_init__(self):
        if self.kind not in ("torus", "cylinder"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def n_vertices(self) -> int:
        return self.W * self.H

    @property
    def n_edges(self) -> int:
        return 2 * self.W * self.H if self.kind == "torus" else 2 * self.W * self.H + self.W

    def vertex(self, x: int, y: int) -> int:
        return (y % self.H) * self.W + (x % self.W)

    def h_edge(self, x: int, y: int) -> int:
        return (y % self.H) * self.W + (x % self.W)

    def v_edge(self, x: int, y: int) -> int:
        # on the cylinder, v(x, -1) are the W extra boundary edges at the end
        if self.kind == "cylinder" and y == -1:
            return 2 * self.W * self.H + (x % self.W)
        return self.W * self.H + (y % self.H) * self.W + (x % self.W)

    def vertex_legs(self, x: int, y: int) -> tuple[int, int, int, int]:
        """(a, b, c, d) edge ids of vertex (x, y)."""
        return (
            self.h_edge(x - 1, y),
            self.v_edge(x, y - 1) if not (self.kind == "cylinder" and y == 0) else self.v_edge(x, -1),
            self.h_edge(x, y),
            self.v_edge(x, y),
        )

    def all_vertex_legs(self) -> list[tuple[int, int, int, int]]:
        return [self.vertex_legs(x, y) for y in range(self.H) for x in range(self.W)]

    def plaquette_edges(self, x: int, y: int) -> tuple[int, int, int, int]:
        """(north, west, south, east) edges of plaquette P(x, y); the loop
        shift raising this plaquette applies +1 on north/east, -1 on
        west/south to preserve every vertex charge."""
        return (
            self.h_edge(x, y),
            self.v_edge(x, y),
            self.h_edge(x, (y + 1) % self.H),
            self.v_edge((x + 1) % self.W, y),
        )

    def plaquette_vertices(self, x: int, y: int) -> tuple[int, int, int, int]:
        return (
            self.vertex(x, y),
            self.vertex(x + 1, y),
            self.vertex(x, y + 1),
            self.vertex(x + 1, y + 1),
        )

    def plaquette_support(self, x: int, y: int) -> list[int]:
        """The 12 edges touched by the plaquette term: legs of its 4 corners."""
        edges = set()
        for vx, vy in ((x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)):
            edges.update(self.vertex_legs(vx % self.W, vy % self.H))
        return sorted(edges)

    def face(self, x: int, y: int) -> int:
        return (y % self.H) * self.W + (x % self.W)

    def vertex_faces(self, x: int, y: int) -> tuple[int, int, int, int]:
        """(SW, NW, NE, SE) plaquettes around vertex (x, y), i.e. the
        double-line tensor index order A[SW][NW][NE][SE]."""
        return (
            self.face(x - 1, y),
            self.face(x - 1, y - 1),
            self.face(x, y - 1),
            self.face(x, y),
        )

    def edge_face_pair(self, edge: int) -> tuple[int, int]:
        """(f_plus, f_minus) with label(edge) = f_plus - f_minus mod N."""
        if edge < self.W * self.H:
            x, y = edge % self.W, edge // self.W
            return (self.face(x, y), self.face(x, y - 1))
        e = edge - self.W * self.H
        x, y = e % self.W, e // self.W
        return (self.face(x - 1, y), self.face(x, y))

    def vertical_cut_edges(self, x0: int = 0) -> list[int]:
        """Horizontal edges crossing the vertical cut east of column x0."""
        return [self.h_edge(x0, y) for y in range(self.H)]

    def horizontal_cut_edges(self, y0: int = 0) -> list[int]:
        """Vertical edges crossing the horizontal cut south of row y0."""
        return [self.v_edge(x, y0) for x in range(self.W)]
