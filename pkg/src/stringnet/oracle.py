"""Exact brute-force contraction of small patches and tori.

Amplitudes are enumerated over all edge configurations (single-line) or
all face configurations (double-line).  A configuration index is a base-q
integer, edge/face 0 least significant.  The default cap of 2**20
configurations is a refusal threshold: beyond it the oracle raises rather
than approximating.

Single-line amplitudes factorize as the product of W-entries over vertices
times the boundary weights of initial edges; double-line amplitudes are
products of A-entries over vertices, with physical edge labels given by
face differences.  On the torus the single-line contraction projects onto
the zero-flux (trivial topological) sector by default; Z- and X-twist
lines along the two cuts are available for sector studies.  The face
enumeration of a double-line torus produces the trivial sector by itself.
"""

from __future__ import annotations

import numpy as np

from .geometry import BrickworkPatch, SquareTorus
from .opcompile import CompiledDiagonal
from .tensors import ADoubleLine, WSingleLine
from .zn import PauliString, clock_phase

CONFIG_CAP = 2**20


class CapExceededError(Exception):
    """Requested enumeration exceeds the exactness cap."""


def _check_cap(q: int, count: int, cap: int) -> int:
    total = q**count
    if total > cap:
        raise CapExceededError(f"{q}^{count} = {total} configurations exceed cap {cap}")
    return total


def _labels(idx: np.ndarray, slot: int, q: int) -> np.ndarray:
    return (idx // q**slot) % q


class ExactState:
    """Dense amplitudes over edge configurations of a single-line network."""

    def __init__(self, q, n_edges, amplitudes, vertex_legs, kind="open-patch"):
        self.q = q
        self.n_edges = n_edges
        self.amplitudes = amplitudes
        self.vertex_legs = vertex_legs  # list of (a, b, c, d) edge ids
        self.kind = kind
        self.norm_squared = float(np.sum(np.abs(amplitudes) ** 2))

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.q**self.n_edges, dtype=np.int64)

    def edge_labels(self, edge: int) -> np.ndarray:
        return _labels(self.index, edge, self.q)


class ExactFaceState:
    """Dense amplitudes over face configurations of a double-line network."""

    def __init__(self, q, n_faces, amplitudes, vertex_faces, edge_faces, kind="open-patch"):
        self.q = q
        self.n_faces = n_faces
        self.amplitudes = amplitudes
        self.vertex_faces = vertex_faces  # list of 4-face tuples per vertex
        self.edge_faces = edge_faces  # edge id -> (f_plus, f_minus)
        self.kind = kind
        self.norm_squared = float(np.sum(np.abs(amplitudes) ** 2))

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.q**self.n_faces, dtype=np.int64)

    def face_labels(self, face: int) -> np.ndarray:
        return _labels(self.index, face, self.q)

    def edge_labels(self, edge: int) -> np.ndarray:
        fp, fm = self.edge_faces[edge]
        return (self.face_labels(fp) - self.face_labels(fm)) % self.q


def contract_brickwork_single(
    patch: BrickworkPatch, tensors, boundary=None, cap: int = CONFIG_CAP
) -> ExactState:
    """Exact state of a brickwork patch of single-line tensors.

    `tensors` is a shared WSingleLine or dict vid -> WSingleLine;
    `boundary` gives per-site boundary amplitude vectors (default uniform
    1/sqrt(q), the |+> row).
    """
    t0 = tensors[0] if isinstance(tensors, dict) else tensors
    q = t0.modulus
    total = _check_cap(q, patch.n_edges, cap)
    idx = np.arange(total, dtype=np.int64)
    amp = np.ones(total, dtype=complex)
    legs = []
    for g in patch.gates:
        if len(g.sites) != 2:
            raise ValueError("single-line contraction expects arity-2 gates")
        w = (tensors[g.vid] if isinstance(tensors, dict) else tensors).entries
        a, b = (_labels(idx, e, q) for e in g.in_edges)
        c, d = (_labels(idx, e, q) for e in g.out_edges)
        amp *= w[a * q + b, c * q + d]
        legs.append((*g.in_edges, *g.out_edges))
    if boundary is None:
        beta = np.full((patch.width, q), 1.0 / np.sqrt(q), dtype=complex)
    else:
        beta = np.asarray(boundary, dtype=complex)
        if beta.ndim == 1:
            beta = np.tile(beta, (patch.width, 1))
    for site, e in enumerate(patch.initial_edges):
        amp *= beta[site][_labels(idx, e, q)]
    return ExactState(q, patch.n_edges, amp, legs, kind="open-patch")


def contract_torus_single(
    torus: SquareTorus,
    w: WSingleLine,
    flux: tuple[int, int] | None = (0, 0),
    z_twist: tuple[int, int] = (0, 0),
    x_twist: tuple[int, int] = (0, 0),
    cap: int = CONFIG_CAP,
) -> ExactState:
    """Exact single-line state on a torus.

    flux=(0, 0) keeps the trivial (zero winding) sector; None keeps all
    sectors.  A Z-twist weights sectors by clock phases of the fluxes; an
    X-twist shifts the labels read across the two cuts (a symmetry-twisted
    boundary).
    """
    if torus.kind != "torus":
        raise ValueError("contract_torus_single requires a torus")
    q = w.modulus
    total = _check_cap(q, torus.n_edges, cap)
    idx = np.arange(total, dtype=np.int64)
    amp = np.ones(total, dtype=complex)
    cut_v = set(torus.vertical_cut_edges(0))
    cut_h = set(torus.horizontal_cut_edges(0))
    legs = []
    for y in range(torus.H):
        for x in range(torus.W):
            a, b, c, d = torus.vertex_legs(x, y)
            legs.append((a, b, c, d))
            la, lb, lc, ld = (_labels(idx, e, q) for e in (a, b, c, d))
            # the a-leg of column 0 and b-leg of row 0 read across the cuts
            if x == 0 and a in cut_v and x_twist[0]:
                la = (la + x_twist[0]) % q
            if y == 0 and b in cut_h and x_twist[1]:
                lb = (lb + x_twist[1]) % q
            amp *= w.entries[la * q + lb, lc * q + ld]
    flux_x = np.zeros(total, dtype=np.int64)
    for e in cut_v:
        flux_x += _labels(idx, e, q)
    flux_y = np.zeros(total, dtype=np.int64)
    for e in cut_h:
        flux_y += _labels(idx, e, q)
    flux_x %= q
    flux_y %= q
    if z_twist[0] or z_twist[1]:
        amp = amp * np.exp(
            2j * np.pi * ((z_twist[0] * flux_x + z_twist[1] * flux_y) % q) / q
        )
    if flux is not None:
        amp = amp * ((flux_x == flux[0] % q) & (flux_y == flux[1] % q))
    return ExactState(q, torus.n_edges, amp, legs, kind="torus")


def contract_brickwork_double(
    patch: BrickworkPatch, a: ADoubleLine, cap: int = CONFIG_CAP
) -> ExactFaceState:
    """Exact face-variable state of a brickwork patch of double-line tensors."""
    q = a.modulus
    total = _check_cap(q, patch.n_faces, cap)
    idx = np.arange(total, dtype=np.int64)
    amp = np.ones(total, dtype=complex)
    vfaces = []
    for g in patch.gates:
        f1, f2, f3, f4 = g.faces
        amp *= a.entries[
            _labels(idx, f1, q), _labels(idx, f2, q), _labels(idx, f3, q), _labels(idx, f4, q)
        ]
        vfaces.append(g.faces)
    return ExactFaceState(q, patch.n_faces, amp, vfaces, list(patch.edge_faces))


def contract_torus_double(
    torus: SquareTorus, a: ADoubleLine, cap: int = CONFIG_CAP
) -> ExactFaceState:
    """Exact face-variable state of a double-line torus (trivial sector)."""
    if torus.kind != "torus":
        raise ValueError("contract_torus_double requires a torus")
    q = a.modulus
    total = _check_cap(q, torus.W * torus.H, cap)
    idx = np.arange(total, dtype=np.int64)
    amp = np.ones(total, dtype=complex)
    vfaces = []
    for y in range(torus.H):
        for x in range(torus.W):
            faces = torus.vertex_faces(x, y)
            amp *= a.entries[tuple(_labels(idx, f, q) for f in faces)]
            vfaces.append(faces)
    edge_faces = [torus.edge_face_pair(e) for e in range(2 * torus.W * torus.H)]
    return ExactFaceState(q, torus.W * torus.H, amp, vfaces, edge_faces, kind="torus")


def _pauli_expectation_single(state: ExactState, op: PauliString) -> complex:
    q = state.q
    idx = state.index
    shifted = idx.copy()
    phase = np.ones(idx.shape, dtype=complex)
    for e in op.edges():
        l = state.edge_labels(e)
        x = op.x_power(e)
        z = op.z_power(e)
        if x:
            shifted += (((l + x) % q) - l) * q**e
        if z:
            lut = np.array([clock_phase((v + x) % q, z, q) for v in range(q)])
            phase *= lut[l]
    num = np.sum(state.amplitudes[shifted].conj() * phase * state.amplitudes)
    return complex(num / state.norm_squared)


def _pauli_expectation_double(state: ExactFaceState, op: PauliString) -> complex:
    q = state.q
    # solve: x_power(e) = m[f_plus] - m[f_minus] for a face-shift vector m
    adj: dict[int, list[tuple[int, int]]] = {}
    for e, (fp, fm) in enumerate(state.edge_faces):
        x = op.x_power(e)
        adj.setdefault(fp, []).append((fm, -x))
        adj.setdefault(fm, []).append((fp, x))
    shifts = {}
    for root in range(state.n_faces):
        if root in shifts:
            continue
        shifts[root] = 0
        stack = [root]
        while stack:
            f = stack.pop()
            for f2, delta in adj.get(f, ()):
                want = (shifts[f] + delta) % q
                if f2 in shifts:
                    if shifts[f2] != want:
                        return 0.0  # open strings: annihilates the closed-loop state
                else:
                    shifts[f2] = want
                    stack.append(f2)
    idx = state.index
    shifted = idx.copy()
    for f, m in shifts.items():
        if m:
            l = state.face_labels(f)
            shifted += (((l + m) % q) - l) * q**f
    phase = np.ones(idx.shape, dtype=complex)
    for e in op.edges():
        z = op.z_power(e)
        if z:
            l = state.edge_labels(e)
            x = op.x_power(e)
            lut = np.array([clock_phase((v + x) % q, z, q) for v in range(q)])
            phase *= lut[l]
    num = np.sum(state.amplitudes[shifted].conj() * phase * state.amplitudes)
    return complex(num / state.norm_squared)


def _compiled_values(state, compiled: CompiledDiagonal) -> np.ndarray:
    """Pointwise diagonal values of a compiled operator on all configurations."""
    q = state.q
    vals = np.ones(state.index.shape, dtype=complex)
    for vid, table in compiled.factors:
        if compiled.basis == "labels":
            legs = state.vertex_legs[vid]
            coords = tuple(state.edge_labels(e) for e in legs)
        else:
            faces = state.vertex_faces[vid]
            coords = tuple(state.face_labels(f) for f in faces)
        vals *= table[coords]
    return vals


def exact_expectation(state, op) -> complex:
    """<psi| op |psi> / <psi|psi> by direct summation.

    `op` may be a PauliString, a CompiledDiagonal, a (matrix, edges) pair
    applying a dense operator to the listed edges (single-line states
    only), or a plain vector of diagonal values over configurations.
    """
    if isinstance(op, PauliString):
        if isinstance(state, ExactState):
            return _pauli_expectation_single(state, op)
        return _pauli_expectation_double(state, op)
    if isinstance(op, CompiledDiagonal):
        if compiled_basis_mismatch(state, op):
            raise ValueError("compiled basis does not match the state kind")
        vals = _compiled_values(state, op)
        num = np.sum(np.abs(state.amplitudes) ** 2 * vals)
        return complex(num / state.norm_squared)
    if isinstance(op, tuple) and len(op) == 2:
        matrix, edges = op
        return _dense_expectation(state, np.asarray(matrix, dtype=complex), list(edges))
    vals = np.asarray(op)
    num = np.sum(np.abs(state.amplitudes) ** 2 * vals)
    return complex(num / state.norm_squared)


def compiled_basis_mismatch(state, compiled: CompiledDiagonal) -> bool:
    if compiled.basis == "labels":
        return not isinstance(state, ExactState)
    return not isinstance(state, ExactFaceState)


def _dense_expectation(state: ExactState, matrix: np.ndarray, edges: list[int]) -> complex:
    if not isinstance(state, ExactState):
        raise ValueError("dense operators are supported on single-line states only")
    q = state.q
    k = len(edges)
    if matrix.shape != (q**k, q**k):
        raise ValueError("operator dimension does not match the edge list")
    psi = state.amplitudes.reshape((q,) * state.n_edges)
    # configuration index is base-q with edge 0 least significant, so axis
    # of edge e is (n_edges - 1 - e)
    axes = [state.n_edges - 1 - e for e in edges]
    m = matrix.reshape((q,) * (2 * k))
    applied = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), axes))
    applied = np.moveaxis(applied, list(range(k)), axes)
    num = np.vdot(psi, applied)
    return complex(num / state.norm_squared)


# --- parent Hamiltonians on tori ---------------------------------------------

def zn_shift_group(n: int) -> list[np.ndarray]:
    """Label permutations of the Z_N shifts, element k acting as l -> l+k."""
    return [np.roll(np.arange(n), k) for k in range(n)]


def z22_embedded_group() -> list[np.ndarray]:
    """The Z_2 x Z_2 layer flips acting on 4-level labels j = 2 j1 + j2."""
    perms = []
    for s1 in range(2):
        for s2 in range(2):
            perms.append(np.array([2 * ((j // 2) ^ s1) + ((j % 2) ^ s2) for j in range(4)]))
    return perms


def _perm_inverse(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p))
    return inv


class ParentHamiltonianTerms:
    """Vertex projectors and plaquette terms of a fixed-point Hamiltonian.

    The vertex projector at v penalizes configurations outside the support
    of the fixed-point tensor.  Plaquette operators are a family B_p^(k)
    indexed by an abelian group of label permutations: element k raises
    the north/east plaquette edges by its permutation and lowers the
    west/south edges by the inverse, then multiplies the diagonal phase
    O_ph extracted from the fixed-point amplitudes (identically 1 for
    positive states, a CZ-type sign pattern for the double semion).  The
    plaquette term is 1 - (1/|G|) sum_k B_p^(k), restricted by the corner
    projector P_p.
    """

    def __init__(self, torus: SquareTorus, q: int, support4: np.ndarray,
                 fixed_amplitudes: np.ndarray, group=None):
        self.torus = torus
        self.q = q
        self.group = zn_shift_group(q) if group is None else list(group)
        self.dim = len(fixed_amplitudes)
        idx = np.arange(self.dim, dtype=np.int64)
        self.vertex_legs = torus.all_vertex_legs()
        psi = fixed_amplitudes

        # diagonal vertex projectors 1 - [labels in support]
        self.vertex_proj = []
        self._vertex_ok = []
        for a, b, c, d in self.vertex_legs:
            ok = support4[
                _labels(idx, a, q), _labels(idx, b, q), _labels(idx, c, q), _labels(idx, d, q)
            ]
            self._vertex_ok.append(ok)
            self.vertex_proj.append(1.0 - ok.astype(float))

        # plaquette permutation index maps and extracted O_ph diagonals
        self.plaquettes = []
        for y in range(torus.H):
            for x in range(torus.W):
                north, west, south, east = torus.plaquette_edges(x, y)
                elems = []
                for perm in self.group:
                    inv = _perm_inverse(perm)
                    shifted = idx.copy()
                    for e, pmap in ((north, perm), (east, perm), (west, inv), (south, inv)):
                        l = _labels(idx, e, q)
                        shifted += (pmap[l] - l) * q**e
                    o_ph = np.ones(self.dim, dtype=complex)
                    back = _perm_index_inverse(shifted)
                    src = psi[back]
                    nz = np.abs(src) > 1e-14
                    o_ph[nz] = psi[nz] / src[nz]
                    elems.append((shifted, back, o_ph))
                corners = [
                    self._vertex_ok[self.torus.vertex(vx, vy)]
                    for vx, vy in ((x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1))
                ]
                p_proj = np.ones(self.dim)
                for ok in corners:
                    p_proj = p_proj * ok
                self.plaquettes.append((elems, p_proj))

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_proj)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def a_term(self, v: int, vec: np.ndarray) -> np.ndarray:
        """Apply the vertex projector (script A_v)."""
        return self.vertex_proj[v] * vec

    def b_element(self, p: int, k: int, vec: np.ndarray, dagger=False, t_diag=None) -> np.ndarray:
        """Apply B_p^(k), optionally conjugated by a diagonal deformation T."""
        shifted, back, o_ph = self.plaquettes[p][0][k]
        if t_diag is None:
            if dagger:
                return o_ph[shifted].conj() * vec[shifted]
            return o_ph * vec[back]
        if dagger:
            return (o_ph[shifted].conj() * t_diag[shifted] / t_diag) * vec[shifted]
        return (o_ph * t_diag / t_diag[back]) * vec[back]

    def b_term(self, p: int, vec: np.ndarray, t_diag=None) -> np.ndarray:
        """Apply script B_p = 1 - (1/|G|) sum_k B_p^(k) (deformed if T given)."""
        acc = np.zeros_like(vec)
        for k in range(len(self.group)):
            acc += self.b_element(p, k, vec, t_diag=t_diag)
        return vec - acc / len(self.group)

    def b_term_dagger(self, p: int, vec: np.ndarray, t_diag=None) -> np.ndarray:
        acc = np.zeros_like(vec)
        for k in range(len(self.group)):
            acc += self.b_element(p, k, vec, dagger=True, t_diag=t_diag)
        return vec - acc / len(self.group)

    def bp_term(self, p: int, vec: np.ndarray, t_diag=None) -> np.ndarray:
        """Apply (script B_p^dag script B_p) P_p, the Hamiltonian plaquette term."""
        out = self.plaquettes[p][1] * vec
        out = self.b_term(p, out, t_diag=t_diag)
        return self.b_term_dagger(p, out, t_diag=t_diag)

    def dense_terms(self, max_dim: int = 4096) -> list[np.ndarray]:
        """All terms as dense matrices (for commutator checks at small N)."""
        if self.dim > max_dim:
            raise CapExceededError(f"dense terms refused at dim {self.dim} > {max_dim}")
        eye = np.eye(self.dim, dtype=complex)
        mats = [np.diag(pv.astype(complex)) for pv in self.vertex_proj]
        for p in range(self.n_plaquettes):
            mats.append(np.column_stack([self.bp_term(p, eye[:, i]) for i in range(self.dim)]))
        return mats

    def loop_product_state(self) -> np.ndarray:
        """prod_p (sum_k B_p^(k)) |0...0>, normalized: the projected-loop
        construction of the ground state."""
        vec = np.zeros(self.dim, dtype=complex)
        vec[0] = 1.0
        for p in range(self.n_plaquettes):
            acc = np.zeros_like(vec)
            for k in range(len(self.group)):
                acc += self.b_element(p, k, vec)
            vec = acc
        return vec / np.linalg.norm(vec)


def _perm_index_inverse(shifted: np.ndarray) -> np.ndarray:
    back = np.empty_like(shifted)
    back[shifted] = np.arange(len(shifted), dtype=shifted.dtype)
    return back


def face_state_to_edge_amplitudes(state: ExactFaceState, n_edges: int) -> np.ndarray:
    """Physical (edge-configuration) amplitudes of a double-line face state."""
    q = state.q
    edge_idx = np.zeros(q**state.n_faces, dtype=np.int64)
    for e in range(n_edges):
        edge_idx += state.edge_labels(e) * q**e
    out = np.zeros(q**n_edges, dtype=complex)
    np.add.at(out, edge_idx, state.amplitudes)
    return out


def _from_single_line(torus, w, group, cap):
    # O_ph extraction runs on the unprojected state: every flux sector is a
    # ground state, and non-clock plaquette groups (the two-layer flips) do
    # not preserve the Z_N flux, only their own layer fluxes.
    _check_cap(w.modulus, torus.n_edges, cap)
    support4 = np.abs(w.as_four_index()) > 1e-14
    psi = contract_torus_single(torus, w, flux=None, cap=cap).amplitudes
    return ParentHamiltonianTerms(torus, w.modulus, support4, psi, group=group)


def build_parent_hamiltonian_terms(
    n: int, torus: SquareTorus, model: str = "tc", cap: int = CONFIG_CAP
) -> ParentHamiltonianTerms:
    """Fixed-point Hamiltonian terms for a supported (N, model) pair.

    Supported: ('tc', any N), ('ds', N=2), ('z22', N=4), ('z4f', N=4).
    The diagonal plaquette dressing O_ph is extracted exactly from the
    contracted fixed-point amplitudes (identity for tc, the CZ pattern for
    ds); unsupported pairs raise ValueError.
    """
    from .paths import path_set_frac, path_z22_to_critical
    from .tensors import double_semion_double_line, toric_code_single_line

    if model == "tc":
        return _from_single_line(torus, toric_code_single_line(n), None, cap)
    if model == "ds":
        if n != 2:
            raise ValueError("the double semion model requires N=2")
        _check_cap(2, torus.n_edges, cap)
        fstate = contract_torus_double(torus, double_semion_double_line(), cap=cap)
        psi = face_state_to_edge_amplitudes(fstate, torus.n_edges)
        psi = psi / np.linalg.norm(psi)
        support4 = np.abs(toric_code_single_line(2).as_four_index()) > 1e-14
        return ParentHamiltonianTerms(torus, 2, support4, psi)
    if model == "z22":
        if n != 4:
            raise ValueError("the two-layer model requires N=4")
        return _from_single_line(torus, path_z22_to_critical(1.0), z22_embedded_group(), cap)
    if model == "z4f":
        if n != 4:
            raise ValueError("the fractionalized fixed point requires N=4")
        return _from_single_line(torus, path_set_frac(-1.0, 4), None, cap)
    raise ValueError(f"unsupported (N, model) pair ({n}, {model!r})")


def deformed_hamiltonian_check(name: str, g: float, torus: SquareTorus, cap=CONFIG_CAP) -> float:
    """Residual of the deformed parent Hamiltonian on a small torus.

    Builds the diagonal imaginary-time factor T from per-vertex magnitude
    ratios of deformed to fixed-point entries (exp of the beta-weights),
    conjugates the fixed-point plaquette operators, and returns the largest
    of: vertex-term residuals, deformed-plaquette eigenvalue residuals, and
    Hamiltonian-term annihilation residuals, all on the contracted deformed
    state.  Raises if T is underivable (support mismatch) or the
    enumeration exceeds the cap.
    """
    from .paths import REGISTRY, evaluate_path

    spec = REGISTRY[name]
    if spec.tensor_kind != "single-line":
        raise ValueError(f"{name} is not a single-line path")
    w_g = evaluate_path(name, g)
    if name == "z22-z4-seg1":
        w_fix, group = evaluate_path(name, 1.0), z22_embedded_group()
    elif name == "set-frac":
        w_fix, group = evaluate_path(name, 1.0 if g >= 0 else -1.0), None
    else:
        w_fix, group = evaluate_path(name, 1.0), None

    ham = _from_single_line(torus, w_fix, group, cap)
    q = w_g.modulus
    idx = np.arange(ham.dim, dtype=np.int64)
    ratio4 = np.ones((q,) * 4)
    wg4 = np.abs(w_g.as_four_index())
    wf4 = np.abs(w_fix.as_four_index())
    if np.any((wf4 < 1e-14) & (wg4 > 1e-14)):
        raise ValueError("T underivable: deformed entry outside fixed-point support")
    nz = wf4 > 1e-14
    ratio4[nz] = wg4[nz] / wf4[nz]
    t_diag = np.ones(ham.dim)
    for a, b, c, d in ham.vertex_legs:
        t_diag = t_diag * ratio4[
            _labels(idx, a, q), _labels(idx, b, q), _labels(idx, c, q), _labels(idx, d, q)
        ]

    psi_g = contract_torus_single(torus, w_g, flux=None, cap=cap).amplitudes
    norm = np.linalg.norm(psi_g)
    if norm < 1e-14:
        raise ValueError("deformed state vanished")
    psi_g = psi_g / norm

    residual = 0.0
    for v in range(ham.n_vertices):
        residual = max(residual, float(np.linalg.norm(ham.a_term(v, psi_g))))
    for p in range(ham.n_plaquettes):
        residual = max(residual, float(np.linalg.norm(ham.b_term(p, psi_g, t_diag=t_diag))))
        residual = max(residual, float(np.linalg.norm(ham.bp_term(p, psi_g, t_diag=t_diag))))
    return residual
