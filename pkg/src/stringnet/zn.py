"""Z_N label arithmetic and generalized Pauli operators.

Conventions used throughout the package:

  * group labels are integers in [0, N-1] with addition mod N;
  * the clock operator acts as  Z|j> = exp(2*pi*i*j/N) |j>;
  * the shift operator acts as  X|j> = |(j+1) mod N>;
  * a generalized Pauli factor is Z^z X^x with z, x in [0, N-1], z + x > 0
    (identity factors are never stored, so the number of stored factors is
    the weight of a Pauli string);
  * a Pauli string maps opaque integer edge identifiers to factors.  Edge
    identifiers are assigned by the geometry module; this module never
    interprets them.

Matrix conventions: Z = diag(1, w, w^2, ...) with w = exp(2*pi*i/N), and
X[j, k] = 1 iff j = (k+1) mod N, so that X @ e_k = e_{k+1 mod N}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np


def clock_phase(j: int, power: int, n: int) -> complex:
    """Return exp(2*pi*i * j * power / n), the eigenvalue of Z^power on |j>."""
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    return np.exp(2j * np.pi * ((j * power) % n) / n)


def shift_label(j: int, power: int, n: int) -> int:
    """Return (j + power) mod n, the action of X^power on a basis label.

    Negative powers are allowed and implement X^dagger.
    """
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    return (j + power) % n


@dataclass(frozen=True)
class GroupLabel:
    """An element of Z_N: an integer value reduced mod the group order."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        object.__setattr__(self, "value", self.value % self.modulus)

    def _check(self, other: "GroupLabel") -> None:
        if self.modulus != other.modulus:
            raise ValueError(f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __add__(self, other: "GroupLabel") -> "GroupLabel":
        self._check(other)
        return GroupLabel(self.value + other.value, self.modulus)

    def __sub__(self, other: "GroupLabel") -> "GroupLabel":
        self._check(other)
        return GroupLabel(self.value - other.value, self.modulus)

    def __neg__(self) -> "GroupLabel":
        return GroupLabel(-self.value, self.modulus)

    def shifted(self, power: int) -> "GroupLabel":
        return GroupLabel(self.value + power, self.modulus)


@dataclass(frozen=True)
class PauliFactor:
    """Exponents of a single non-identity generalized Pauli factor Z^z X^x."""

    z_power: int
    x_power: int

    def __post_init__(self):
        if self.z_power < 0 or self.x_power < 0:
            raise ValueError("powers must be reduced to [0, N-1] before storing")
        if self.z_power + self.x_power == 0:
            raise ValueError("identity factors are never stored")


class PauliString:
    """A product of Z^z X^x factors over distinct edges, all mod one N.

    Factors are stored sparsely; edges not present carry the identity.  The
    weight of the string is the number of stored (non-identity) factors.
    """

    def __init__(self, modulus: int, factors: Mapping[int, PauliFactor] | None = None):
        if modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {modulus}")
        self.modulus = modulus
        self.factors: dict[int, PauliFactor] = {}
        if factors:
            for edge, f in factors.items():
                self._set(edge, f)

    def _set(self, edge: int, factor: PauliFactor) -> None:
        z = factor.z_power % self.modulus
        x = factor.x_power % self.modulus
        if z + x == 0:
            raise ValueError(f"identity factor on edge {edge}")
        if edge in self.factors:
            raise ValueError(f"duplicate edge {edge}")
        self.factors[edge] = PauliFactor(z, x)

    @property
    def weight(self) -> int:
        return len(self.factors)

    def edges(self) -> list[int]:
        return sorted(self.factors)

    def z_power(self, edge: int) -> int:
        f = self.factors.get(edge)
        return f.z_power if f else 0

    def x_power(self, edge: int) -> int:
        f = self.factors.get(edge)
        return f.x_power if f else 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.modulus == other.modulus
            and self.factors == other.factors
        )

    def __repr__(self) -> str:
        body = " ".join(
            f"e{e}:Z^{f.z_power}X^{f.x_power}" for e, f in sorted(self.factors.items())
        )
        return f"PauliString(N={self.modulus}, {body or 'identity'})"


def clock_matrix(n: int) -> np.ndarray:
    """Dense N x N clock operator Z."""
    return np.diag([clock_phase(j, 1, n) for j in range(n)])


def shift_matrix(n: int) -> np.ndarray:
    """Dense N x N shift operator X with X|j> = |j+1 mod N>."""
    m = np.zeros((n, n), dtype=complex)
    for k in range(n):
        m[(k + 1) % n, k] = 1.0
    return m


def pauli_factor_matrix(factor: PauliFactor, n: int) -> np.ndarray:
    """Dense matrix of Z^z X^x on one qudit."""
    return np.linalg.matrix_power(clock_matrix(n), factor.z_power) @ np.linalg.matrix_power(
        shift_matrix(n), factor.x_power
    )


def pauli_string_matrix(op: PauliString, sites: Iterable[int]) -> np.ndarray:
    """Dense matrix of `op` on the listed sites (identity where absent)."""
    n = op.modulus
    m = np.array([[1.0 + 0j]])
    for s in sites:
        f = op.factors.get(s)
        local = pauli_factor_matrix(f, n) if f else np.eye(n, dtype=complex)
        m = np.kron(m, local)
    return m


def pauli_basis_decompose(op: np.ndarray, n: int, max_sites: int = 8):
    """Expand a dense k-site operator in the generalized Pauli basis.

    Returns a list of (coefficient, PauliString) pairs, sites labeled 0..k-1,
    using the trace inner product <A, B> = Tr(A^dag B) / N^k so coefficients
    are read off directly.  Terms with |coefficient| < 1e-14 are dropped.
    """
    op = np.asarray(op, dtype=complex)
    dim = op.shape[0]
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("operator must be a square matrix")
    k = round(np.log(dim) / np.log(n))
    if n**k != dim:
        raise ValueError(f"dimension {dim} is not a power of N={n}")
    if k > max_sites:
        raise ValueError(f"refusing k={k} sites > cap {max_sites}")

    singles = [
        [pauli_factor_matrix(PauliFactor(z, x), n) if z + x else np.eye(n, dtype=complex)
         for x in range(n)]
        for z in range(n)
    ]
    terms = []
    for code in np.ndindex(*([n * n] * k)):
        basis = np.array([[1.0 + 0j]])
        factors = {}
        for site, c in enumerate(code):
            z, x = divmod(c, n)
            basis = np.kron(basis, singles[z][x])
            if z + x:
                factors[site] = PauliFactor(z, x)
        coeff = np.trace(basis.conj().T @ op) / dim
        if abs(coeff) >= 1e-14:
            terms.append((coeff, PauliString(n, factors)))
    return terms


def pauli_terms_matrix(terms, k: int, n: int) -> np.ndarray:
    """Reconstruct the dense operator from a (coefficient, PauliString) list."""
    dim = n**k
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in terms:
        out += coeff * pauli_string_matrix(string, range(k))
    return out
