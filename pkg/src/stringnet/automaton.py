"""Stochastic brickwork automata and Monte Carlo observable estimators.

A normalized single-line tensor is identified with a local update rule:
|W|^2 entries are the transition probabilities p(out|in), and the entry
phases are retained for compiled-diagonal evaluation.  Trajectories sample
the squared wavefunction of the 2D state; diagonal observables are
trajectory averages.

Geometry mapping: automaton site s at sub-layer l holds the edge label of
the brickwork patch built by geometry.build_brickwork; the gate at scan
position k of sub-layer l is patch vertex (l, k), reading its in-legs from
the state before l and its out-legs after (see the geometry module's
diagram; time increases with the sub-layer index).  Two boundary-time
geometries are supported: "offset" starts from a full boundary row and
measures after a thermalization offset t0 (default width/2 double layers),
"corner" grows a light cone from a corner site whose outside remains
boundary-distributed.  For product boundaries that are stationary for the
rule (the uniform |+...+> row is, for every rule here, since the gates are
doubly stochastic) the two agree on bulk expectation values where light
cones permit.

Determinism: estimates depend only on (seed, parameters): the RNG is
counter-based per trajectory and the accumulation is a fixed-order
reduction over the per-trajectory value array, so results are independent
of thread count and of the kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import gate_spans
from .opcompile import CompiledDiagonal
from .tensors import WSingleLine

_ISO_TOL = 1e-10


@dataclass(frozen=True)
class StochasticRule:
    """Local update rule: transition probabilities and retained phases.

    arity: sites per gate (2 for N-level edge rules, 4 for the qutrit
    sub-site rules); site_dim q satisfies q**arity = N**2.
    """

    modulus: int
    arity: int
    site_dim: int
    probs: np.ndarray
    phases: np.ndarray
    alias_prob: np.ndarray
    alias_idx: np.ndarray
    digits: np.ndarray

    @property
    def tables(self):
        return (self.alias_prob, self.alias_idx, self.digits)

    def transition_count(self) -> int:
        return int(np.count_nonzero(self.probs))


def rule_from_single_line(w: WSingleLine, sub_sites: int = 2) -> StochasticRule:
    """Identify a normalized W-matrix with a stochastic update rule.

    sub_sites=4 reinterprets an N=q**2 edge rule as acting on quadruples of
    q-level sites (the qutrit view of the dipole family).  Non-normalized
    tensors are rejected.
    """
    res = w.row_norm_residual()
    if res > _ISO_TOL:
        raise ValueError(f"tensor is not normalized (row residual {res:.2e})")
    n = w.modulus
    if sub_sites == 2:
        q = n
    elif sub_sites == 4:
        q = int(round(np.sqrt(n)))
        if q * q != n:
            raise ValueError(f"N={n} does not split into pairs of sub-sites")
    else:
        raise ValueError("sub_sites must be 2 or 4")
    probs = np.abs(w.entries) ** 2
    phases = np.ones_like(w.entries)
    nz = probs > 0
    phases[nz] = w.entries[nz] / np.abs(w.entries[nz])
    aprob, aidx = kernels.build_alias_tables(probs)
    dig = kernels.decode_digits(probs.shape[1], q, sub_sites)
    return StochasticRule(n, sub_sites, q, probs, phases, aprob, aidx, dig)


@dataclass(frozen=True)
class TrajectoryEnsembleStats:
    estimate: complex
    standard_error: float
    samples: int
    seed: int


def _stats(values: np.ndarray, seed: int) -> TrajectoryEnsembleStats:
    n = len(values)
    mean = complex(np.mean(values))
    if n < 2:
        return TrajectoryEnsembleStats(mean, 0.0, n, seed)
    se_re = float(np.std(values.real, ddof=1) / np.sqrt(n))
    se_im = float(np.std(values.imag, ddof=1) / np.sqrt(n))
    return TrajectoryEnsembleStats(mean, float(np.hypot(se_re, se_im)), n, seed)


def uniform_boundary(width: int, q: int) -> np.ndarray:
    """The fully disordered |+...+> boundary: uniform site distributions."""
    return np.full((width, q), 1.0 / q)


def _boundary_cdf(boundary, width: int, q: int) -> np.ndarray:
    b = np.asarray(boundary, dtype=float)
    if b.ndim == 1:
        b = np.tile(b, (width, 1))
    if b.shape != (width, q):
        raise ValueError(f"boundary must be ({width}, {q}), got {b.shape}")
    rows = b.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > 1e-12:
        raise ValueError("boundary distributions must be normalized")
    cdf = np.cumsum(b, axis=1)
    cdf[:, -1] = 1.0
    return cdf


def _active_mask(rule: StochasticRule, width: int, n_layers: int,
                 geometry: str, corner: int | None) -> np.ndarray:
    arity = rule.arity
    gmax = max(len(gate_spans(width, l, arity)) for l in range(2)) if n_layers else 1
    active = np.zeros((max(n_layers, 1), gmax), dtype=np.uint8)
    cx = width // 2 if corner is None else corner
    for layer in range(n_layers):
        spans = gate_spans(width, layer, arity)
        for k, s in enumerate(spans):
            if geometry == "offset":
                active[layer, k] = 1
            else:  # corner: light cone grows by arity sites per double layer
                h = arity * (layer // 2 + 1)
                active[layer, k] = int(s >= cx - h and s + arity <= cx + h)
    return active


def simulate(rule: StochasticRule, boundary, width: int, depth: int, seed: int,
             n_traj: int = 1, geometry: str = "offset", corner: int | None = None) -> np.ndarray:
    """Sample brickwork trajectories; returns (n_traj, 2*depth+1, width).

    Row 0 is the boundary row; row l is the state after sub-layer l-1;
    `depth` counts double layers.  Deterministic given the seed.
    """
    if width % rule.arity:
        raise ValueError(f"width must be a multiple of {rule.arity} (brickwork pairing)")
    if geometry not in ("offset", "corner"):
        raise ValueError(f"unknown geometry {geometry!r}")
    n_layers = 2 * depth
    bcdf = _boundary_cdf(boundary, width, rule.site_dim)
    active = _active_mask(rule, width, n_layers, geometry, corner)
    return kernels.run_record_full(
        rule.tables, rule.site_dim, rule.arity, width, n_layers, active, bcdf, seed, n_traj
    )


def estimate_diagonal(
    rule: StochasticRule,
    compiled: CompiledDiagonal,
    layout: dict[int, tuple[int, int]],
    boundary,
    width: int,
    samples: int,
    seed: int,
    depth: int | None = None,
    patch=None,
) -> TrajectoryEnsembleStats:
    """Monte Carlo mean of the compiled diagonal over trajectories.

    `layout` maps compiled vertex ids to (leftmost site, sub-layer), as
    produced by BrickworkPatch.layout().  Phases carried by the factor
    tables are included; the estimator is unbiased for the patch state.

    Face-basis compiled operators (double-line loops) additionally need
    the patch for its face bookkeeping: face labels are reconstructed
    from the sampled domain walls in the gauge where the first boundary
    face is 0; the compiled product is a physical operator, so the gauge
    choice drops out.
    """
    q, arity = rule.site_dim, rule.arity
    max_layer = -1
    for vid, _ in compiled.factors:
        if vid not in layout:
            raise ValueError(f"vertex {vid} missing from the layout window")
        max_layer = max(max_layer, layout[vid][1])
    if depth is None:
        depth = (max_layer + 2) // 2
    if 2 * depth < max_layer + 1:
        raise ValueError("layout window too small for the compiled support")
    records = simulate(rule, boundary, width, depth, seed, n_traj=samples)
    values = np.ones(samples, dtype=complex)
    if compiled.basis == "labels":
        for vid, table in compiled.factors:
            s, layer = layout[vid]
            flat = table.reshape(-1)
            code = np.zeros(samples, dtype=np.int64)
            for i in range(arity):
                code = code * q + records[:, layer, s + i]
            for i in range(arity):
                code = code * q + records[:, layer + 1, s + i]
            values *= flat[code]
        return _stats(values, seed)
    if patch is None:
        raise ValueError("face-basis compiled operators need the brickwork patch")
    faces = _face_labels_from_records(patch, records, q)
    for vid, table in compiled.factors:
        flat = table.reshape(-1)
        f1, f2, f3, f4 = patch.gates[vid].faces
        code = ((faces[:, f1] * q + faces[:, f2]) * q + faces[:, f3]) * q + faces[:, f4]
        values *= flat[code]
    return _stats(values, seed)


def _face_labels_from_records(patch, records: np.ndarray, q: int) -> np.ndarray:
    """Reconstruct face labels from domain-wall trajectories.

    Gauge: the leftmost boundary face is 0; every edge label is
    (face_left - face_right) mod q, walked left to right along the
    boundary row and gate by gate in creation order.
    """
    n_traj = records.shape[0]
    faces = np.zeros((n_traj, patch.n_faces), dtype=np.int64)
    for x in range(patch.width):
        faces[:, x + 1] = (faces[:, x] - records[:, 0, x]) % q
    for g in patch.gates:
        left, _, _, new = g.faces
        s = g.sites[0]
        # out-edge at the left site: label = face(left) - face(new)
        faces[:, new] = (faces[:, left] - records[:, g.layer + 1, s]) % q
    return faces


@dataclass(frozen=True)
class CorrelatorTable:
    r: np.ndarray
    estimate: np.ndarray
    standard_error: np.ndarray
    samples: int
    seed: int
    k: int
    site: int


def time_correlator(
    rule: StochasticRule,
    k: int,
    x: int,
    r_max: int,
    boundary,
    width: int,
    samples: int,
    seed: int,
    t0: int | None = None,
    geometry: str = "offset",
    n_ref: int = 1,
) -> CorrelatorTable:
    """Equal-site two-time correlator <Z^k(x, t) Z^k(x, t+r)^dagger>.

    x indexes N-level edges (blocks of arity/2 sites); r runs 1..r_max in
    double layers, measured after a thermalization offset t0 (default
    width/2 double layers; the uniform boundary is stationary so this is
    conservative).  n_ref > 1 additionally averages each trajectory over
    that many consecutive reference times past t0 -- valid by the same
    stationarity, with standard errors taken across trajectories (the
    per-trajectory time averages stay independent).  Enforces
    width >= 4 r_max to keep light cones off the chain ends.
    """
    if width < 4 * r_max:
        raise ValueError(f"width {width} < 4*r_max = {4 * r_max}")
    if width % rule.arity:
        raise ValueError(f"width must be a multiple of {rule.arity}")
    n = rule.modulus
    block = rule.arity // 2
    if t0 is None:
        t0 = width // 2
    block_start = x * block
    if geometry == "corner":
        block_start = (width // 2 // block) * block
    if not 0 <= block_start <= width - block:
        raise ValueError(f"site {x} outside the chain")
    n_meas = r_max + n_ref
    depth = t0 + n_meas
    bcdf = _boundary_cdf(boundary, width, rule.site_dim)
    active = _active_mask(rule, width, 2 * depth, geometry, None)
    vals = kernels.run_correlator_block(
        rule.tables, rule.site_dim, rule.arity, width, 2 * depth, active, bcdf, seed,
        samples, block_start, block, t0, n_meas,
    )
    # N-level edge value from the site block (big-endian sub-sites)
    level = np.zeros(vals.shape[:2], dtype=np.int64)
    for i in range(block):
        level = level * rule.site_dim + vals[:, :, i]
    phase = np.exp(2j * np.pi * ((k * level) % n) / n)
    rs = np.arange(1, r_max + 1)
    est = np.empty(r_max, dtype=complex)
    err = np.empty(r_max)
    for i, r in enumerate(rs):
        prod = (phase[:, :n_ref] * phase[:, r : r + n_ref].conj()).mean(axis=1)
        st = _stats(prod, seed)
        est[i] = st.estimate
        err[i] = st.standard_error
    return CorrelatorTable(rs, est, err, samples, seed, k, x)


def fit_power_law(table: CorrelatorTable, window: tuple[int, int] | None = None,
                  min_points: int = 6):
    """Weighted least squares of log|C(r)| on log r.

    Returns (exponent, exponent standard error, (r_lo, r_hi)).  Points with
    |C| <= 3 stderr are excluded; fewer than `min_points` surviving points
    inside the window is an error.
    """
    r = np.asarray(table.r, dtype=float)
    c = np.abs(np.asarray(table.estimate))
    e = np.asarray(table.standard_error)
    if window is None:
        window = (4, int(r.max()) // 2)
    lo, hi = window
    keep = (r >= lo) & (r <= hi) & (c > 3 * e) & (c > 0)
    if int(keep.sum()) < min_points:
        raise ValueError(
            f"only {int(keep.sum())} significant points in window {window}; need {min_points}"
        )
    lx = np.log(r[keep])
    ly = np.log(c[keep])
    w = np.ones_like(lx)
    nz = e[keep] > 0
    w[nz] = (c[keep][nz] / e[keep][nz]) ** 2  # var(log C) = (err/C)^2
    sw = w.sum()
    mx = (w * lx).sum() / sw
    my = (w * ly).sum() / sw
    sxx = (w * (lx - mx) ** 2).sum()
    slope = (w * (lx - mx) * (ly - my)).sum() / sxx
    slope_err = 1.0 / np.sqrt(sxx)
    return float(slope), float(slope_err), (lo, hi)


def trajectory_charges(records: np.ndarray, charge_of_site_value=None) -> np.ndarray:
    """Total conserved charge per recorded double layer (sub-layer rows 0,
    2, 4, ... of `records`), default charge = site value."""
    rows = records[:, ::2, :]
    if charge_of_site_value is None:
        return rows.sum(axis=2)
    lut = np.asarray(charge_of_site_value)
    return lut[rows].sum(axis=2)
