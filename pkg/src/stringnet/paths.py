"""Parametrized tensor families interpolating between string-net fixed points.

Every path is a pure function of a real parameter g.  Endpoints reproduce
the declared fixed points exactly; row normalization holds for every g in
range (the tests treat it as the consistency oracle for the piecewise case
analysis).

Naming: `tc-ds` is the double-line family connecting the N=2 toric code
(g=1) to the double semion model (g=-1); `z22-z4-seg1/2` connect two
decoupled Z_2 layers and the Z_4 toric code (both N=4, meeting at g=0);
`set-frac` connects the two symmetry-fractionalization sectors of the even
Z_N toric code; `dipole-seg1/2/3` chain the Z_9 toric code to the
charge-conserving rule W^Q and on to the charge+dipole-conserving W^P,
each 9-level edge viewed as a pair of qutrits |j1>|j2> -> |3 j1 + j2>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensors import ADoubleLine, WSingleLine


@dataclass(frozen=True)
class PathSpec:
    name: str
    modulus: int
    parameter_range: tuple[float, float]
    tensor_kind: str  # "single-line" | "double-line"


REGISTRY: dict[str, PathSpec] = {
    "tc-ds": PathSpec("tc-ds", 2, (-1.0, 1.0), "double-line"),
    "z22-z4-seg1": PathSpec("z22-z4-seg1", 4, (0.0, 1.0), "single-line"),
    "z22-z4-seg2": PathSpec("z22-z4-seg2", 4, (0.0, 1.0), "single-line"),
    "set-frac": PathSpec("set-frac", 4, (-1.0, 1.0), "single-line"),
    "dipole-seg1": PathSpec("dipole-seg1", 9, (0.0, 1.0), "single-line"),
    "dipole-seg2": PathSpec("dipole-seg2", 9, (0.0, 1.0), "single-line"),
    "dipole-seg3": PathSpec("dipole-seg3", 9, (0.0, 1.0), "single-line"),
}


def _check_range(name: str, g: float) -> None:
    lo, hi = REGISTRY[name].parameter_range
    if not (lo <= g <= hi):
        raise ValueError(f"{name}: g={g} outside [{lo}, {hi}]")


def path_tc_ds(g: float) -> ADoubleLine:
    """Toric code (g=1) to double semion (g=-1), N=2 double-line."""
    _check_range("tc-ds", g)
    sg = 1.0 if g >= 0 else -1.0  # sign(0) := +1; the guarded entries vanish there
    big = 1.0 / np.sqrt(1.0 + abs(g))
    small = np.sqrt(abs(g) / (1.0 + abs(g)))
    a = np.full((2,) * 4, 1.0 / np.sqrt(2.0), dtype=complex)
    a[0, 0, 1, 0] = a[0, 1, 1, 1] = big
    a[1, 1, 0, 1] = a[1, 0, 0, 0] = big
    a[0, 0, 1, 1] = a[0, 1, 1, 0] = sg * small
    a[1, 1, 0, 0] = a[1, 0, 0, 1] = small
    return ADoubleLine(2, a)


def _c1(a: int, b: int, c: int, d: int) -> int:
    """Parity of the upper-qubit layer (j -> floor(j/2)) over the four legs."""
    return (a // 2 + b // 2 + c // 2 + d // 2) % 2


def _c2(a: int, b: int, c: int, d: int) -> int:
    """Parity of the lower-qubit layer (j -> j mod 2) over the four legs."""
    return (a + b + c + d) % 2


def _c3(a: int, b: int, c: int, d: int) -> int:
    return (a + b - c - d) % 4


def _z22_z4_matrix(g: float, in_shift: tuple[int, int]) -> np.ndarray:
    """Shared piecewise construction of the two N=4 coupling paths.

    `in_shift` is the probe shift applied to the in-legs when testing
    whether an entry also satisfies the other phase's constraints; the
    cases are taken in the written order, first match wins.
    """
    n = 4
    da, db = in_shift
    w = np.zeros((n,) * 4, dtype=complex)
    heavy = 1.0 / np.sqrt(2.0 + 2.0 * g)
    light = np.sqrt(g / (2.0 + 2.0 * g))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    layers_ok = _c1(a, b, c, d) == 0 and _c2(a, b, c, d) == 0
                    z4_ok = _c3(a, b, c, d) == 0
                    sa, sb = (a + da) % n, (b + db) % n
                    probe_ok = _c1(sa, sb, c, d) == 0 and _c2(sa, sb, c, d) == 0
                    if da == 1 and db == 1:  # two-layer path W^1
                        if layers_ok and z4_ok and probe_ok:
                            w[a, b, c, d] = heavy
                        elif layers_ok and not z4_ok:
                            w[a, b, c, d] = light
                        elif layers_ok and z4_ok and not probe_ok:
                            w[a, b, c, d] = 0.5
                    else:  # Z_4 path W^2
                        if layers_ok and z4_ok and not probe_ok:
                            w[a, b, c, d] = heavy
                        elif not layers_ok and z4_ok:
                            w[a, b, c, d] = light
                        elif layers_ok and z4_ok and probe_ok:
                            w[a, b, c, d] = 0.5
    return w.reshape(n**2, n**2)


def path_z22_to_critical(g: float) -> WSingleLine:
    """Two decoupled Z_2 toric code layers (g=1) deformed to the coupled
    critical point (g=0); respects both layer parities for all g."""
    _check_range("z22-z4-seg1", g)
    return WSingleLine(4, _z22_z4_matrix(g, (1, 1)))


def path_z4_to_critical(g: float) -> WSingleLine:
    """Z_4 toric code (g=1) deformed to the same critical point (g=0)."""
    _check_range("z22-z4-seg2", g)
    return WSingleLine(4, _z22_z4_matrix(g, (1, -1)))


def _frac_sign(a: int, b: int, c: int, d: int, n: int) -> int:
    """Sign structure of the non-trivially fractionalized Z_N fixed point."""
    if a + n * b > n * n // 2:
        return 1
    if n % 4 == 0:
        odd_large = sum(1 for j in (a, b, c, d) if j % 2 == 1 and j > n // 2)
        return -1 if odd_large % 2 == 1 else 1
    ab_even = a % 2 == 0 and b % 2 == 0
    cd_even = c % 2 == 0 and d % 2 == 0
    ab_odd = a % 2 == 1 and b % 2 == 1
    cd_odd = c % 2 == 1 and d % 2 == 1
    return -1 if (ab_even and cd_odd) or (ab_odd and cd_even) else 1


def path_set_frac(g: float, n: int = 4) -> WSingleLine:
    """Even Z_N toric code with trivial (g=1) vs non-trivial (g=-1)
    fractionalization of the anti-unitary symmetry on vertex excitations."""
    if n % 2:
        raise ValueError("set-frac path requires even N")
    if not -1.0 <= g <= 1.0:
        raise ValueError(f"set-frac: g={g} outside [-1, 1]")
    w = np.zeros((n,) * 4, dtype=complex)
    heavy = np.sqrt(2.0) / np.sqrt(n) / np.sqrt(1.0 + abs(g))
    light = np.sqrt(2.0 * abs(g)) / np.sqrt(n) / np.sqrt(1.0 + abs(g))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if (a + b - c - d) % n != 0:
                        continue
                    prefactor = 1 if g >= 0 else _frac_sign(a, b, c, d, n)
                    ab_even = a % 2 == 0 and b % 2 == 0
                    cd_even = c % 2 == 0 and d % 2 == 0
                    ab_odd = a % 2 == 1 and b % 2 == 1
                    cd_odd = c % 2 == 1 and d % 2 == 1
                    cross = (ab_even and cd_odd) or (ab_odd and cd_even)
                    if n % 4 == 0:
                        odd_large = sum(1 for j in (a, b, c, d) if j % 2 == 1 and j > n // 2)
                        if odd_large % 2 == 1 or cross:
                            w[a, b, c, d] = prefactor * light
                        else:
                            w[a, b, c, d] = heavy
                    else:
                        if cross:
                            w[a, b, c, d] = prefactor * light
                        elif (ab_even and cd_even) or (ab_odd and cd_odd):
                            w[a, b, c, d] = heavy
                        else:
                            w[a, b, c, d] = 1.0 / np.sqrt(n)
    return WSingleLine(n, w.reshape(n**2, n**2))


# --- dipole family: N = 9 edges as qutrit pairs ------------------------------

_QUTRIT_CODES = [(j1, j2) for j1 in range(3) for j2 in range(3)]


def _qutrit_tuple(code: int) -> tuple[int, int, int, int]:
    """(a1, a2, b1, b2) digits of a gate-input index in [0, 81)."""
    a, b = divmod(code, 9)
    return (a // 3, a % 3, b // 3, b % 3)


@lru_cache(maxsize=None)
def _dipole_counts() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Exact combinatorial counts over the 81 gate outputs.

    Returns boolean tables charge9[in, out], qsum[in, out], dipole[in, out]
    and the per-row counts N_Z90 (charge9 and qsum) and N1 (qsum and
    dipole); N0 (qsum alone) is qsum.sum(axis=1).
    """
    digits = np.array([_qutrit_tuple(k) for k in range(81)])
    edge_sum = (3 * digits[:, 0] + digits[:, 1]) + (3 * digits[:, 2] + digits[:, 3])
    qsum_val = digits.sum(axis=1)
    dip_val = digits @ np.array([1, 2, 3, 4])
    charge9 = (edge_sum[:, None] - edge_sum[None, :]) % 9 == 0
    qsum = qsum_val[:, None] == qsum_val[None, :]
    dipole = dip_val[:, None] == dip_val[None, :]
    n_z90 = (charge9 & qsum).sum(axis=1)
    n_1 = (qsum & dipole).sum(axis=1)
    return charge9, qsum, dipole, n_z90, n_1


def fixed_point_wq() -> WSingleLine:
    """Charge-conserving reference rule W^Q on qutrit quadruples."""
    _, qsum, _, _, _ = _dipole_counts()
    n0 = qsum.sum(axis=1)
    w = np.where(qsum, 1.0 / np.sqrt(n0)[:, None], 0.0)
    return WSingleLine(9, w.astype(complex))


def fixed_point_wp() -> WSingleLine:
    """Charge- and dipole-conserving rule W^P."""
    _, qsum, dipole, _, n1 = _dipole_counts()
    keep = qsum & dipole
    w = np.where(keep, 1.0 / np.sqrt(n1)[:, None], 0.0)
    return WSingleLine(9, w.astype(complex))


def dipole_path_segment(seg: int, g: float) -> WSingleLine:
    """Piecewise path chaining W^Z9 (seg 1, g=1) through the critical
    point (seg1 g=0 = seg2 g=0) and W^Q (seg2 g=1 = seg3 g=0) to W^P
    (seg 3, g=1)."""
    if seg not in (1, 2, 3):
        raise ValueError(f"segment must be 1, 2 or 3, got {seg}")
    _check_range(f"dipole-seg{seg}", g)
    charge9, qsum, dipole, n_z90, n1 = _dipole_counts()
    n0 = qsum.sum(axis=1)
    if seg == 1:
        denom = n_z90 + (9 - n_z90) * g
        heavy = charge9 & qsum
        light = charge9 & ~qsum
        t = g
    elif seg == 2:
        denom = n_z90 + (n0 - n_z90) * g
        heavy = charge9 & qsum
        light = ~charge9 & qsum
        t = g
    else:
        # the written seg-3 formula runs W^P -> W^Q; flip the parameter so
        # the segment chains as W^3(0) = W^Q, W^3(1) = W^P
        t = 1.0 - g
        denom = n1 + (n0 - n1) * t
        heavy = qsum & dipole
        light = qsum & ~dipole
    w = np.zeros((81, 81))
    w += np.where(heavy, 1.0 / np.sqrt(denom)[:, None], 0.0)
    w += np.where(light, np.sqrt(t / denom)[:, None], 0.0)
    return WSingleLine(9, w.astype(complex))


def evaluate_path(name: str, g: float):
    """Registry dispatch: path name and parameter to a tensor."""
    if name == "tc-ds":
        return path_tc_ds(g)
    if name == "z22-z4-seg1":
        return path_z22_to_critical(g)
    if name == "z22-z4-seg2":
        return path_z4_to_critical(g)
    if name == "set-frac":
        return path_set_frac(g)
    if name.startswith("dipole-seg"):
        return dipole_path_segment(int(name[-1]), g)
    raise KeyError(f"unknown path {name!r}")


def path_grid(name: str, n: int = 101, refine: int = 0) -> np.ndarray:
    """g-grid over the path's range: n uniform points, optionally refined
    geometrically near g=0 (where the critical points sit)."""
    lo, hi = REGISTRY[name].parameter_range
    pts = list(np.linspace(lo, hi, n))
    if refine and lo <= 0.0 <= hi:
        for k in range(1, refine + 1):
            step = 10.0**-k
            if hi >= step:
                pts.append(step)
            if lo <= -step:
                pts.append(-step)
    return np.unique(np.array(pts))


# --- conserved quantities of the critical rules ------------------------------

def gate_charge_vector(name: str) -> np.ndarray:
    """Integer charge per gate-input index whose exact conservation the
    named critical rule exhibits ('tc-ds', 'z22-z4', 'set-frac', 'wq');
    'wp' returns a 2-row array (charge; dipole)."""
    if name == "tc-ds":
        vals = [s - r for s in range(2) for r in range(2)]
        return np.array(vals)
    if name in ("z22-z4", "set-frac"):
        vals = [a % 2 + b % 2 for a in range(4) for b in range(4)]
        return np.array(vals)
    digits = np.array([_qutrit_tuple(k) for k in range(81)])
    if name == "wq":
        return digits.sum(axis=1)
    if name == "wp":
        return np.stack([digits.sum(axis=1), digits @ np.array([1, 2, 3, 4])])
    raise KeyError(f"unknown conserved quantity {name!r}")


def conservation_violations(w: WSingleLine, charges: np.ndarray) -> int:
    """Number of transitions with nonzero probability that change the
    charge (checked exactly over the full transition table)."""
    probs = np.abs(w.entries) ** 2
    charges = np.atleast_2d(charges)
    bad = np.zeros_like(probs, dtype=bool)
    for row in charges:
        bad |= row[:, None] != row[None, :]
    return int(np.count_nonzero((probs > 0) & bad))
