"""Compile generalized Pauli strings into products of local diagonal vertex factors.

The compiled object replaces an off-diagonal operator that permutes
configurations, c -> F(c), by a diagonal one that permutes amplitudes,
alpha_c -> alpha_F(c).  Per affected vertex the factor table is

    O_v[labels] = (W_shifted[labels] / W[labels])*   where W != 0,
    O_v[labels] = 1                                  where W == 0,

with W_shifted the vertex tensor read at labels displaced by the X-powers
on the vertex legs.  Z-powers are already diagonal; their per-edge phase
is folded into the vertex producing the edge (or the consuming vertex for
boundary-row edges), so a compiled operator is always a pure product of
vertex factors.

For double-line tensors the same construction runs in face variables: an
X-pattern is realizable iff it is a boundary of face shifts, and the
factor at each corner vertex is the shifted-A ratio.  Operators whose
X-pattern is not a face-shift boundary annihilate the closed-loop states;
`ANNIHILATES` is returned for those (a distinguished result, not an error).
"""

from __future__ import annotations

import json

import numpy as np

from .geometry import BrickworkPatch
from .tensors import ADoubleLine, WSingleLine
from .zn import PauliString, clock_phase


class _Annihilates:
    """Sentinel: the operator maps every closed-loop state out of the
    closed-loop subspace, so its expectation value vanishes identically."""

    def __repr__(self):
        return "ANNIHILATES"

    def __bool__(self):
        return False


ANNIHILATES = _Annihilates()


class CompiledDiagonal:
    """Product of local diagonal vertex factors equivalent to a Pauli string.

    factors: list of (vertex id, complex table); tables are indexed by the
    vertex's leg labels in geometry order (in-legs then out-legs) for
    basis='labels', or by its four face labels for basis='faces'.
    """

    def __init__(self, modulus: int, factors, provenance=None, basis: str = "labels"):
        self.modulus = modulus
        self.factors = list(factors)
        self.provenance = provenance
        self.basis = basis

    @property
    def support(self) -> int:
        return len(self.factors)

    @property
    def max_ratio(self) -> float:
        """Largest |factor| entry; a variance proxy for the sampler."""
        if not self.factors:
            return 1.0
        return max(float(np.max(np.abs(t))) for _, t in self.factors)

    def vertex_ids(self) -> list[int]:
        return [vid for vid, _ in self.factors]

    def to_json(self) -> str:
        payload = {
            "modulus": self.modulus,
            "basis": self.basis,
            "factors": [
                {
                    "vertex": vid,
                    "shape": list(table.shape),
                    "entries": [[float(z.real), float(z.imag)] for z in table.reshape(-1)],
                }
                for vid, table in self.factors
            ],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "CompiledDiagonal":
        payload = json.loads(text)
        factors = []
        for f in payload["factors"]:
            flat = np.array([complex(re, im) for re, im in f["entries"]])
            factors.append((f["vertex"], flat.reshape(f["shape"])))
        return cls(payload["modulus"], factors, basis=payload["basis"])


def _ratio_table(w: np.ndarray, shifts: tuple[int, ...]) -> np.ndarray:
    """(W_shifted / W)* with the zero-entry convention, as a leg-indexed table."""
    shifted = np.roll(w, shift=[-s for s in shifts], axis=tuple(range(w.ndim)))
    out = np.ones_like(w)
    nz = w != 0
    out[nz] = (shifted[nz] / w[nz]).conj()
    return out


def compile_single_line(
    patch: BrickworkPatch,
    tensors,
    op: PauliString,
    boundary=None,
) -> CompiledDiagonal:
    """Compile `op` against a brickwork patch of single-line tensors.

    `tensors` is one WSingleLine shared by all gates or a dict vid -> tensor.
    `boundary` optionally gives the per-site boundary amplitude vectors so
    that X-powers on initial edges fold the boundary-weight ratio in; the
    default None means a label-independent boundary (ratio 1).
    """
    n = op.modulus
    for e in op.edges():
        if not 0 <= e < patch.n_edges:
            raise ValueError(f"op references edge {e} outside the patch")

    def tensor_for(vid: int) -> WSingleLine:
        t = tensors[vid] if isinstance(tensors, dict) else tensors
        if t.modulus != n:
            raise ValueError("tensor modulus does not match operator modulus")
        return t

    touched: dict[int, np.ndarray] = {}
    consumer = {}
    producer = {}
    for g in patch.gates:
        for e in g.in_edges:
            consumer[e] = g
        for e in g.out_edges:
            producer[e] = g

    def table_for(g) -> np.ndarray:
        if len(g.sites) != 2:
            raise ValueError("the compiler supports arity-2 gates only")
        if g.vid not in touched:
            touched[g.vid] = np.ones((n,) * 4, dtype=complex)
        return touched[g.vid]

    # X-powers: shifted-tensor ratio at every adjacent vertex
    x_vertices: dict[int, list[int]] = {}
    for e in op.edges():
        x = op.x_power(e)
        if x == 0:
            continue
        for g in (producer.get(e), consumer.get(e)):
            if g is None:
                continue
            shifts = x_vertices.setdefault(g.vid, [0, 0, 0, 0])
            legs = list(g.in_edges) + list(g.out_edges)
            shifts[legs.index(e)] += x
    for vid, shifts in x_vertices.items():
        g = patch.gates[vid]
        table_for(g)
        w = tensor_for(vid).as_four_index()
        touched[vid] = touched[vid] * _ratio_table(w, tuple(shifts))

    def fold_axis(g, axis: int, phase_vec: np.ndarray) -> None:
        table = table_for(g)
        shape = [1, 1, 1, 1]
        shape[axis] = n
        touched[g.vid] = table * phase_vec.reshape(shape)

    # Z-powers: per-edge clock phases, evaluated at the already-shifted label
    for e in op.edges():
        z = op.z_power(e)
        if z == 0:
            continue
        x = op.x_power(e)
        phase = np.array([clock_phase((l + x) % n, z, n) for l in range(n)])
        g = producer.get(e)
        if g is not None:
            fold_axis(g, 2 + list(g.out_edges).index(e), phase)
        else:
            g = consumer.get(e)
            if g is None:
                raise ValueError(f"edge {e} is adjacent to no gate; cannot fold")
            fold_axis(g, list(g.in_edges).index(e), phase)

    # boundary-weight ratios for X-powers on initial edges
    if boundary is not None:
        beta = np.asarray(boundary, dtype=complex)
        for e in op.edges():
            x = op.x_power(e)
            if x == 0 or e not in patch.initial_edges:
                continue
            site = patch.edge_site[e]
            b = beta[site] if beta.ndim == 2 else beta
            ratio = np.ones(n, dtype=complex)
            nz = b != 0
            ratio[nz] = np.roll(b, -x)[nz] / b[nz]
            g = consumer.get(e)
            if g is None:
                raise ValueError(f"initial edge {e} is adjacent to no gate")
            fold_axis(g, list(g.in_edges).index(e), ratio.conj())

    factors = [(vid, touched[vid]) for vid in sorted(touched)]
    return CompiledDiagonal(n, factors, provenance=op, basis="labels")


def solve_face_shifts(patch: BrickworkPatch, op: PauliString):
    """Express the X-pattern of `op` as face shifts, or None if impossible.

    Returns a dict face -> shift with component roots gauged to zero, such
    that x_power(e) = shift[f_plus] - shift[f_minus] mod N for every edge.
    """
    n = op.modulus
    req = {e: op.x_power(e) for e in range(patch.n_edges)}
    adj: dict[int, list[tuple[int, int]]] = {}
    for e, (fp, fm) in enumerate(patch.edge_faces):
        adj.setdefault(fp, []).append((fm, -req.get(e, 0)))
        adj.setdefault(fm, []).append((fp, req.get(e, 0)))
    shifts: dict[int, int] = {}
    for root in range(patch.n_faces):
        if root in shifts:
            continue
        shifts[root] = 0
        stack = [root]
        while stack:
            f = stack.pop()
            for f2, delta in adj.get(f, ()):
                want = (shifts[f] + delta) % n
                if f2 in shifts:
                    if shifts[f2] != want:
                        return None
                else:
                    shifts[f2] = want
                    stack.append(f2)
    return shifts


def compile_loop_double_line(
    a: ADoubleLine,
    patch: BrickworkPatch,
    plaquettes=None,
    op: PauliString | None = None,
):
    """Compile a product of elementary plaquette loops on a double-line patch.

    Either pass `plaquettes` (face ids, repeats raise the shift) or a raw
    X-string `op`, which is decomposed into face shifts when possible and
    otherwise ANNIHILATES.  Z-powers in `op` fold in as clock phases of the
    face-difference labels.  Factor tables are indexed by the gate's four
    faces (basis='faces').
    """
    n = a.modulus
    shifts: dict[int, int] = {}
    if plaquettes is not None:
        for f in plaquettes:
            if not 0 <= f < patch.n_faces:
                raise ValueError(f"face {f} outside the patch")
            shifts[f] = (shifts.get(f, 0) + 1) % n
    elif op is not None:
        solved = solve_face_shifts(patch, op)
        if solved is None:
            return ANNIHILATES
        shifts = {f: s for f, s in solved.items() if s}
    else:
        raise ValueError("pass plaquettes or op")

    touched: dict[int, np.ndarray] = {}
    consumer = {}
    producer = {}
    for g in patch.gates:
        for e in g.in_edges:
            consumer[e] = g
        for e in g.out_edges:
            producer[e] = g

    for g in patch.gates:
        local = tuple(shifts.get(f, 0) for f in g.faces)
        if any(local):
            touched[g.vid] = _ratio_table(a.entries, local)

    if op is not None:
        for e in op.edges():
            z = op.z_power(e)
            if z == 0:
                continue
            fp, fm = patch.edge_faces[e]
            dx = (shifts.get(fp, 0) - shifts.get(fm, 0)) % n
            g = consumer.get(e) or producer.get(e)
            if g is None:
                raise ValueError(f"edge {e} is adjacent to no gate; cannot fold")
            if g.vid not in touched:
                touched[g.vid] = np.ones((n,) * 4, dtype=complex)
            ip = g.faces.index(fp)
            im = g.faces.index(fm)
            table = touched[g.vid]
            idx = np.indices(table.shape)
            label = (idx[ip] - idx[im] + dx) % n
            phases = np.exp(2j * np.pi * ((label * z) % n) / n)
            touched[g.vid] = table * phases

    factors = [(vid, touched[vid]) for vid in sorted(touched)]
    return CompiledDiagonal(n, factors, provenance=op, basis="faces")


def reduce_double_to_single(a: ADoubleLine) -> WSingleLine:
    """Domain-wall reduction of a double-line tensor to a single-line one.

    Requires |A| invariant under a common shift of all four faces (true for
    every string-net family here); the reduced tensor is then the deformed
    Z_N toric code on the domain-wall variables, agnostic about the complex
    phases of A.
    """
    n = a.modulus
    mags = np.abs(a.entries)
    rolled = mags
    for _ in range(n - 1):
        rolled = np.roll(rolled, shift=(1, 1, 1, 1), axis=(0, 1, 2, 3))
        if not np.allclose(rolled, mags, atol=1e-13):
            raise ValueError("|A| is not shift-invariant; no single-line reduction")
    w = np.zeros((n,) * 4, dtype=complex)
    for s in range(n):
        for r in range(n):
            for mu in range(n):
                nu = (s + r - mu) % n
                w[s, r, mu, nu] = mags[s, 0, (-r) % n, (s - mu) % n]
    return WSingleLine(n, w.reshape(n**2, n**2))
