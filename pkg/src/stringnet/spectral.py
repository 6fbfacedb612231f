"""Ring transfer operators, spectral gaps, and correlation lengths.

The transfer operator is the one-double-layer Markov map of a rule on a
periodic ring of L edge sites (even-bond layer, then odd-bond layer with
the wrap-around gate).  Because the rules here are doubly stochastic, the
Perron eigenvalue 1 generically comes with a degenerate multiplet, one
eigenvector per conserved-charge sector; local observables relax inside
the sectors, so the correlation length reads the largest eigenvalue
magnitude strictly below the unit shell:

    eta_2 = max { |lambda| : |lambda| < 1 - 1e-12 },   xi = -1 / log|eta_2|

with xi = +inf flagged when nothing lies below the shell (identity rule)
and xi = 0 when eta_2 = 0 (fixed points).  The unit-shell multiplicity is
reported alongside.  xi is measured in double layers, i.e. rows of the
time-like direction of the 2D state.

Eigenvalues come from a dense solve at small dimension and otherwise from
ARPACK with a seeded subspace-iteration fallback (block power iteration
with Rayleigh-Ritz extraction and deflation of converged vectors), which
also covers the exactly-low-rank fixed-point operators ARPACK rejects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .automaton import StochasticRule

UNIT_SHELL = 1e-12
DENSE_CAP = 4096
DENSE_EIG_CUTOFF = 1500


class ConvergenceError(Exception):
    """Iterative eigensolver failed to reach the requested tolerance."""


@dataclass(frozen=True)
class TransferSpectrum:
    ring_width: int
    leading_eigenvalues: np.ndarray
    eta2_abs: float
    xi: float
    unit_multiplicity: int
    mode: str
    residual: float

    @property
    def diverged(self) -> bool:
        return np.isinf(self.xi)


def _ring_layout(rule: StochasticRule, ring_edges: int):
    """Sites, gate span, and per-layer gate count of the ring circuit."""
    sub = rule.arity // 2
    n_sites = ring_edges * sub
    if ring_edges % 2:
        raise ValueError("ring width must be even (brickwork pairing)")
    return n_sites, rule.arity, n_sites // rule.arity


def transfer_matvec_factory(rule: StochasticRule, ring_edges: int):
    """Returns (dim, apply) with apply(rho) = one double layer on the ring.

    rho is a distribution over the N^L edge configurations, reshaped
    internally to site tensors; the odd layer wraps via a cyclic roll by
    half a gate span.
    """
    n_sites, arity, gates = _ring_layout(rule, ring_edges)
    q = rule.site_dim
    dim = q**n_sites
    p = rule.probs.reshape((q,) * (2 * rule.arity))  # (out..., in...)? see below
    # probs[in, out]: build the per-gate Markov matrix acting on
    # distributions: M[out, in] = probs[in, out]
    gate_m = np.ascontiguousarray(rule.probs.T)
    half = arity // 2

    def apply_layer(t: np.ndarray) -> np.ndarray:
        # t: (q,)*n_sites distribution tensor; apply gate to consecutive
        # site blocks [0, arity), [arity, 2 arity), ...
        m = t.reshape((q**arity,) * gates)
        for g in range(gates):
            m = np.tensordot(gate_m, m, axes=(1, g))
            m = np.moveaxis(m, 0, g)
        return m.reshape((q,) * n_sites)

    fwd = [int(i) for i in (np.arange(n_sites) - half) % n_sites]
    back = [int(i) for i in (np.arange(n_sites) + half) % n_sites]

    def apply(rho: np.ndarray) -> np.ndarray:
        t = rho.reshape((q,) * n_sites)
        t = apply_layer(t)
        t = np.moveaxis(t, list(range(n_sites)), fwd)
        t = apply_layer(t)
        t = np.moveaxis(t, list(range(n_sites)), back)
        return np.ascontiguousarray(t).reshape(dim)

    return dim, apply


def build_transfer_operator(rule: StochasticRule, ring_edges: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense column-stochastic double-layer transfer matrix (small rings)."""
    dim, apply = transfer_matvec_factory(rule, ring_edges)
    if dim > cap:
        raise ValueError(f"dense transfer operator refused at dim {dim} > cap {cap}")
    cols = np.empty((dim, dim))
    e = np.zeros(dim)
    for i in range(dim):
        e[i] = 1.0
        cols[:, i] = apply(e)
        e[i] = 0.0
    return cols


def _subspace_iteration(apply, dim, k, seed, tol=1e-10, max_sweeps=600):
    """Seeded block power iteration with Rayleigh-Ritz extraction.

    Converges the top-k eigenvalues by magnitude of a general real
    operator; handles exactly-low-rank operators (the Krylov block simply
    spans the range after one sweep).
    """
    rng = np.random.default_rng(seed)
    block = min(dim, k)
    v = rng.standard_normal((dim, block))
    v, _ = np.linalg.qr(v)
    prev = None
    for sweep in range(max_sweeps):
        w = np.column_stack([apply(v[:, j]) for j in range(v.shape[1])])
        v2, _ = np.linalg.qr(w)
        h = v2.T @ np.column_stack([apply(v2[:, j]) for j in range(v2.shape[1])])
        vals = np.linalg.eigvals(h)
        vals = vals[np.argsort(-np.abs(vals))]
        v = v2
        if prev is not None and len(prev) == len(vals):
            if np.max(np.abs(np.abs(vals) - np.abs(prev))) < tol:
                # residual of the Ritz pairs for reporting
                hvals, hvecs = np.linalg.eig(h)
                order = np.argsort(-np.abs(hvals))
                ritz = v @ hvecs[:, order]
                res = 0.0
                for j in range(min(3, ritz.shape[1])):
                    x = ritz[:, j]
                    res = max(res, float(np.linalg.norm(
                        np.asarray(apply(x.real)) + 1j * np.asarray(apply(x.imag))
                        - hvals[order[j]] * x
                    ) / max(np.linalg.norm(x), 1e-300)))
                return vals, res
        prev = vals
    raise ConvergenceError(f"subspace iteration: no convergence in {max_sweeps} sweeps")


def transfer_eigenvalues(rule: StochasticRule, ring_edges: int, top: int = 6,
                         seed: int = 1234, dense_cutoff: int = DENSE_EIG_CUTOFF):
    """Leading eigenvalues by magnitude, their mode tag and residual."""
    dim, apply = transfer_matvec_factory(rule, ring_edges)
    if dim <= dense_cutoff:
        t = build_transfer_operator(rule, ring_edges, cap=max(DENSE_CAP, dim))
        vals = np.linalg.eigvals(t)
        vals = vals[np.argsort(-np.abs(vals))]
        return vals[: max(top, min(dim, 40))], "dense", 0.0

    # enough vectors to get past the unit multiplet of conserved sectors
    k = max(top + 4, 24)
    while True:
        try:
            op = spla.LinearOperator((dim, dim), matvec=apply)
            rng = np.random.default_rng(seed)
            vals = spla.eigs(op, k=min(k, dim - 2), which="LM",
                             v0=rng.standard_normal(dim), tol=1e-10,
                             return_eigenvectors=False)
            vals = vals[np.argsort(-np.abs(vals))]
            mode, residual = "iterative", 1e-10
        except (spla.ArpackError, spla.ArpackNoConvergence):
            vals, residual = _subspace_iteration(apply, dim, k, seed)
            mode = "iterative"
        below = np.abs(vals) < 1.0 - UNIT_SHELL
        if below.any() or k >= min(dim - 2, 96):
            return vals, mode, residual
        k *= 2


def correlation_length(rule: StochasticRule, ring_edges: int, top: int = 6,
                       seed: int = 1234) -> TransferSpectrum:
    """Transfer spectrum and xi = -1/log|eta_2| on a periodic ring."""
    vals, mode, residual = transfer_eigenvalues(rule, ring_edges, top=top, seed=seed)
    mags = np.abs(vals)
    if abs(mags[0] - 1.0) > 1e-10:
        raise ConvergenceError(f"Perron root {mags[0]} is not 1 within 1e-10")
    unit = int(np.count_nonzero(mags >= 1.0 - UNIT_SHELL))
    below = mags[mags < 1.0 - UNIT_SHELL]
    if below.size == 0:
        eta2, xi = 1.0, np.inf
    else:
        eta2 = float(below.max())
        if eta2 >= 1.0 - UNIT_SHELL:
            xi = np.inf
        elif eta2 < UNIT_SHELL:  # numerical zero: the fixed-point case
            xi = 0.0
        else:
            xi = -1.0 / np.log(eta2)
    return TransferSpectrum(ring_edges, vals[:top], float(eta2), float(xi), unit, mode, residual)


def path_scan(name: str, g_grid, ring_edges: int, seed: int = 1234):
    """xi along a path: rows (g, |eta_2|, xi, unit multiplicity, mode, residual)."""
    from . import paths
    from .automaton import rule_from_single_line
    from .opcompile import reduce_double_to_single

    spec = paths.REGISTRY[name]
    rows = []
    for g in np.asarray(g_grid, dtype=float):
        t = paths.evaluate_path(name, float(g))
        w = reduce_double_to_single(t) if spec.tensor_kind == "double-line" else t
        sub = 4 if spec.modulus == 9 else 2
        rule = rule_from_single_line(w, sub_sites=sub)
        ts = correlation_length(rule, ring_edges, seed=seed)
        rows.append((float(g), ts.eta2_abs, ts.xi, ts.unit_multiplicity, ts.mode, ts.residual))
    return rows
