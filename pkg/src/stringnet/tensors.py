"""Single-line and double-line tensor types, fixed points, and validators.

Index conventions come from :mod:`stringnet.geometry`: a single-line tensor
is its W-matrix, an N^2 x N^2 complex array indexed W[(a, b), (c, d)] with
pair index a*N + b, legs ordered (left-in a, top-in b, right-out c,
bottom-out d).  A double-line tensor is stored through its A-tensor,
A[left][mid-in][right][mid-out] over the four adjacent faces; the delta
structure of the full N^4 x N^4 W-matrix is implied and never stored.

Virtual-symmetry validators evaluate the corresponding tensor identity
exactly (left side minus right side, entrywise) and report the maximum
residual; `holds` means residual < 1e-10.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HOLD_TOL = 1e-10

Z_LOOP = "Z-loop"
X_LOOP_TRIVIAL = "X-loop-trivial"
X_LOOP_CZ = "X-loop-CZ"
FRAC_TRIVIAL = "frac-trivial"
FRAC_NONTRIVIAL = "frac-nontrivial"


def pair_index(a: int, b: int, n: int) -> int:
    return a * n + b


def pair_labels(idx: int, n: int) -> tuple[int, int]:
    return divmod(idx, n)


@dataclass(frozen=True)
class VirtualSymmetryReport:
    symmetry_name: str
    holds: bool
    max_residual: float

    @classmethod
    def from_residual(cls, name: str, residual: float) -> "VirtualSymmetryReport":
        return cls(name, bool(residual < HOLD_TOL), float(residual))


class WSingleLine:
    """Single-line vertex tensor: complex N^2 x N^2 W-matrix."""

    kind = "single-line"

    def __init__(self, modulus: int, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (modulus**2, modulus**2):
            raise ValueError(f"W must be N^2 x N^2 for N={modulus}, got {entries.shape}")
        self.modulus = modulus
        self.entries = entries

    def entry(self, a: int, b: int, c: int, d: int) -> complex:
        n = self.modulus
        return self.entries[pair_index(a, b, n), pair_index(c, d, n)]

    def as_four_index(self) -> np.ndarray:
        n = self.modulus
        return self.entries.reshape(n, n, n, n)

    def row_norm_residual(self) -> float:
        """Max deviation of any input-row squared norm from 1."""
        rows = np.sum(np.abs(self.entries) ** 2, axis=1)
        return float(np.max(np.abs(rows - 1.0)))

    def charge_support_residual(self) -> float:
        """Max |entry| outside the closed-loop support (a+b)-(c+d) = 0 mod N."""
        n = self.modulus
        w = self.as_four_index()
        a, b, c, d = np.ogrid[:n, :n, :n, :n]
        violating = (a + b - c - d) % n != 0
        return float(np.max(np.abs(w * violating))) if violating.any() else 0.0


class ADoubleLine:
    """Double-line vertex tensor stored through its rank-4 A-tensor."""

    kind = "double-line"

    def __init__(self, modulus: int, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (modulus,) * 4:
            raise ValueError(f"A must be rank-4 over Z_{modulus}, got {entries.shape}")
        self.modulus = modulus
        self.entries = entries

    def entry(self, a: int, c: int, dp: int, bp: int) -> complex:
        return self.entries[a, c, dp, bp]

    def norm_residual(self) -> float:
        """Max deviation of sum_{mid-out} |A|^2 from 1 over (left, mid-in, right)."""
        rows = np.sum(np.abs(self.entries) ** 2, axis=3)
        return float(np.max(np.abs(rows - 1.0)))

    def full_w_matrix(self) -> np.ndarray:
        """The implied N^4 x N^4 W-matrix with its delta structure."""
        n = self.modulus
        w = np.zeros((n,) * 8, dtype=complex)  # (a, b, c, d, a', b', c', d')
        for a in range(n):
            for c in range(n):
                for d in range(n):
                    for bp in range(n):
                        w[a, c, c, d, a, bp, bp, d] = self.entries[a, c, d, bp]
        return w.reshape(n**4, n**4)

    def full_tensor(self) -> np.ndarray:
        """T[sigma, rho, (ab), (cd), (a'b'), (c'd')] with domain-wall lock."""
        n = self.modulus
        w = self.full_w_matrix().reshape((n,) * 8)
        t = np.zeros((n, n) + (n,) * 8, dtype=complex)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        s = (a - b) % n
                        r = (c - d) % n
                        t[s, r, a, b, c, d] = w[a, b, c, d]
        return t


def toric_code_single_line(n: int) -> WSingleLine:
    """Z_N toric code fixed point: 1/sqrt(N) on the closed-loop support."""
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    w = np.zeros((n,) * 4)
    a, b, c, d = np.ogrid[:n, :n, :n, :n]
    w = np.where((a + b - c - d) % n == 0, 1.0 / np.sqrt(n), 0.0)
    return WSingleLine(n, w.reshape(n**2, n**2).astype(complex))


def toric_code_double_line(n: int) -> ADoubleLine:
    """Z_N toric code as a double-line tensor: all entries 1/sqrt(N)."""
    return ADoubleLine(n, np.full((n,) * 4, 1.0 / np.sqrt(n), dtype=complex))


def double_semion_double_line() -> ADoubleLine:
    """Double semion fixed point (N=2): signs on A_0011 and A_0110."""
    a = np.full((2,) * 4, 1.0 / np.sqrt(2), dtype=complex)
    a[0, 0, 1, 1] = -1.0 / np.sqrt(2)
    a[0, 1, 1, 0] = -1.0 / np.sqrt(2)
    return ADoubleLine(2, a)


def frac_q_matrix(n: int) -> np.ndarray:
    """Diagonal Q dressing the anti-unitary symmetry's virtual operator.

    Q_jj = -1 for odd j > N/2 when N = 4k, and Q_jj = i for odd j when
    N = 4k + 2; otherwise 1.
    """
    if n % 2:
        raise ValueError("Q is defined for even N only")
    q = np.ones(n, dtype=complex)
    if n % 4 == 0:
        for j in range(n):
            if j % 2 == 1 and j > n // 2:
                q[j] = -1.0
    else:
        for j in range(n):
            if j % 2 == 1:
                q[j] = 1j
    return q


def check_isometry(t) -> VirtualSymmetryReport:
    """Isometry validator.

    Single-line: row normalization (the isometry contraction reduces to it
    under the plumbing decomposition).  Double-line: the literal contraction
    sum_{sigma rho out} T T* = delta^4 * delta_{bc} on the in-legs.
    """
    if isinstance(t, WSingleLine):
        return VirtualSymmetryReport.from_residual("isometry", t.row_norm_residual())
    if isinstance(t, ADoubleLine):
        n = t.modulus
        tt = t.full_tensor().reshape(n * n, (n * n) ** 2, (n * n) ** 2)
        lhs = np.einsum("sij,skj->ik", tt, tt.conj())
        a, b, c, d = np.ogrid[:n, :n, :n, :n]
        rhs = np.zeros((n,) * 8)
        for aa in range(n):
            for bb in range(n):
                for dd in range(n):
                    rhs[aa, bb, bb, dd, aa, bb, bb, dd] = 1.0
        rhs = rhs.reshape((n * n) ** 2, (n * n) ** 2)
        return VirtualSymmetryReport.from_residual(
            "isometry", float(np.max(np.abs(lhs - rhs)))
        )
    raise TypeError(f"unsupported tensor type {type(t)!r}")


def check_virtual_symmetry(t, symmetry_name: str) -> VirtualSymmetryReport:
    """Evaluate a virtual-symmetry tensor identity exactly.

    Z-loop (single-line): support confined to (a+b)-(c+d) = 0 mod N.
    X-loop-trivial (double-line, N=2): A invariant under flipping all faces.
    X-loop-CZ (double-line, N=2): flip dressed by the controlled-Z pattern
      (-1)^((a xor right)(mid-in xor mid-out)).
    frac-trivial (single-line, even N): conj(W) with all legs shifted by N/2
      equals W.
    frac-nontrivial: the shifted conjugate dressed by Q on the in-legs and
      conj(Q) on the out-legs equals W.
    """
    if symmetry_name == Z_LOOP:
        if not isinstance(t, WSingleLine):
            raise ValueError("Z-loop applies to single-line tensors")
        return VirtualSymmetryReport.from_residual(Z_LOOP, t.charge_support_residual())

    if symmetry_name in (X_LOOP_TRIVIAL, X_LOOP_CZ):
        if not isinstance(t, ADoubleLine) or t.modulus != 2:
            raise ValueError(f"{symmetry_name} applies to double-line tensors with N=2")
        a = t.entries
        flipped = a[::-1, ::-1, ::-1, ::-1]
        if symmetry_name == X_LOOP_TRIVIAL:
            return VirtualSymmetryReport.from_residual(
                X_LOOP_TRIVIAL, float(np.max(np.abs(flipped - a)))
            )
        i, j, k, l = np.ogrid[:2, :2, :2, :2]
        cz = np.where(((i ^ k) & (j ^ l)) == 1, -1.0, 1.0)
        return VirtualSymmetryReport.from_residual(
            X_LOOP_CZ, float(np.max(np.abs(cz * flipped - a)))
        )

    if symmetry_name in (FRAC_TRIVIAL, FRAC_NONTRIVIAL):
        if not isinstance(t, WSingleLine) or t.modulus % 2:
            raise ValueError(f"{symmetry_name} applies to single-line tensors with even N")
        n = t.modulus
        h = n // 2
        w = t.as_four_index()
        shifted = np.roll(w, shift=(-h, -h, -h, -h), axis=(0, 1, 2, 3)).conj()
        if symmetry_name == FRAC_TRIVIAL:
            return VirtualSymmetryReport.from_residual(
                FRAC_TRIVIAL, float(np.max(np.abs(shifted - w)))
            )
        q = frac_q_matrix(n)
        dressing = np.einsum("a,b,c,d->abcd", q, q, q.conj(), q.conj())
        return VirtualSymmetryReport.from_residual(
            FRAC_NONTRIVIAL, float(np.max(np.abs(dressing * shifted - w)))
        )

    raise ValueError(f"unknown symmetry {symmetry_name!r}")


def classify_symmetry_action(w: WSingleLine) -> str:
    """Which anti-unitary symmetry representation the tensor carries.

    Returns 'trivial', 'nontrivial', 'both' (the critical point), or
    'neither'.  Requires even N.
    """
    if w.modulus % 2:
        raise ValueError("classification requires even N")
    triv = check_virtual_symmetry(w, FRAC_TRIVIAL).holds
    nontriv = check_virtual_symmetry(w, FRAC_NONTRIVIAL).holds
    if triv and nontriv:
        return "both"
    if triv:
        return "trivial"
    if nontriv:
        return "nontrivial"
    return "neither"


def save_tensor(t, path) -> None:
    """Write a tensor as self-describing JSON ([re, im] pairs, row-major)."""
    flat = np.asarray(t.entries).reshape(-1)
    payload = {
        "kind": t.kind,
        "N": t.modulus,
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }
    Path(path).write_text(json.dumps(payload))


def load_tensor(path):
    """Inverse of :func:`save_tensor`."""
    payload = json.loads(Path(path).read_text())
    n = payload["N"]
    flat = np.array([complex(re, im) for re, im in payload["entries"]])
    if payload["kind"] == "single-line":
        return WSingleLine(n, flat.reshape(n**2, n**2))
    if payload["kind"] == "double-line":
        return ADoubleLine(n, flat.reshape((n,) * 4))
    raise ValueError(f"unknown tensor kind {payload['kind']!r}")
