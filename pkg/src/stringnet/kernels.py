"""Hot trajectory-sampling kernels: numba @njit with a pure-numpy fallback.

Backend selection: environment variable STRINGNET_BACKEND = "numba"
(default when numba imports) or "numpy".  Both backends consume the same
counter-based random stream and make identical float comparisons, so they
produce bit-identical trajectories; the flag trades speed only.
STRINGNET_WORKERS caps the numba thread count.

Random stream: splitmix64 finalizer over a 64-bit counter,

    key(seed, traj) = mix64((seed ^ SALT) + GOLDEN * traj)
    u(key, k)       = (mix64(key + GOLDEN * (k + 1)) >> 11) * 2**-53

with counters laid out as: k = site for the boundary-row draws, and
k = width + layer * gmax + gate for the gate at scan position `gate` in
sub-layer `layer` (gmax = widest layer's gate count).  Counters are
positional, never sequential, so gates masked off by the corner geometry
skip their draws without desynchronizing anything.

Output sampling uses per-row alias tables (built once, shared by both
backends): u -> v = u * K, j = floor(v), out = j if v - j < prob[j] else
alias[j].  One multiply and two loads per gate beats a binary search over
the cumulative row and carries no divisions in the inner loop.
"""

from __future__ import annotations

import os

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
SALT = 0x5DEECE66D
MASK = (1 << 64) - 1

try:
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay runnable
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap

    prange = range


def backend() -> str:
    choice = os.environ.get("STRINGNET_BACKEND", "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError("STRINGNET_BACKEND=numba but numba is not importable")
        return choice
    return "numba" if HAS_NUMBA else "numpy"


def configure_workers() -> None:
    workers = os.environ.get("STRINGNET_WORKERS", "").strip()
    if workers and HAS_NUMBA:
        numba.set_num_threads(max(1, int(workers)))


def mix64_py(z: int) -> int:
    z &= MASK
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK
    return (z ^ (z >> 31)) & MASK


def traj_key_py(seed: int, traj: int) -> int:
    return mix64_py(((seed ^ SALT) + GOLDEN * traj) & MASK)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniforms_np(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Vectorized counter-based uniforms; keys and counters broadcast."""
    v = keys.astype(np.uint64) + np.uint64(GOLDEN) * (counters.astype(np.uint64) + np.uint64(1))
    v = _mix64_np(v)
    return (v >> np.uint64(11)) * 2.0**-53


def build_alias_tables(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias tables per row, with a fixed deterministic construction.

    Returns (prob, alias) of the same shape as `probs`; rows must sum to 1
    within roundoff.
    """
    rows, k = probs.shape
    prob = np.zeros((rows, k))
    alias = np.zeros((rows, k), dtype=np.int64)
    for r in range(rows):
        scaled = probs[r] * k
        small = [j for j in range(k) if scaled[j] < 1.0]
        large = [j for j in range(k) if scaled[j] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[r, s] = scaled[s]
            alias[r, s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        for j in large + small:
            prob[r, j] = 1.0
            alias[r, j] = j
    return prob, alias


def decode_digits(k_total: int, q: int, arity: int) -> np.ndarray:
    """Digit table: code -> its base-q digits (big-endian, length arity)."""
    out = np.zeros((k_total, arity), dtype=np.int64)
    for code in range(k_total):
        c = code
        for i in range(arity - 1, -1, -1):
            out[code, i] = c % q
            c //= q
    return out


if HAS_NUMBA:

    @njit(cache=True, inline="always")
    def _mix64_nb(z):
        z = z ^ (z >> np.uint64(30))
        z = z * np.uint64(0xBF58476D1CE4E5B9)
        z = z ^ (z >> np.uint64(27))
        z = z * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @njit(cache=True, inline="always")
    def _uniform_nb(key, counter):
        v = key + np.uint64(GOLDEN) * (counter + np.uint64(1))
        return (_mix64_nb(v) >> np.uint64(11)) * 2.0**-53

    @njit(cache=True, inline="always")
    def _searchsorted_right(row, u):
        lo = 0
        hi = row.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if row[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        return lo

    @njit(cache=True, inline="always")
    def _init_row(state, bcdf, key):
        for x in range(state.shape[0]):
            u = _uniform_nb(key, np.uint64(x))
            state[x] = _searchsorted_right(bcdf[x], u)

    @njit(cache=True, inline="always")
    def _apply_layer(state, aprob, aidx, dig, q, arity, layer, active, key, width):
        offset = 0 if layer % 2 == 0 else arity // 2
        gmax = active.shape[1]
        ktot = aprob.shape[1]
        base = np.uint64(width) + np.uint64(layer) * np.uint64(gmax)
        k = 0
        for s in range(offset, width - arity + 1, arity):
            if active[layer, k]:
                code = state[s]
                for i in range(1, arity):
                    code = code * q + state[s + i]
                u = _uniform_nb(key, base + np.uint64(k))
                v = u * ktot
                j = np.int64(v)
                if v - j < aprob[code, j]:
                    out = j
                else:
                    out = aidx[code, j]
                for i in range(arity):
                    state[s + i] = dig[out, i]
            k += 1

    @njit(cache=True, parallel=True)
    def record_full_nb(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf, seed,
                       n_traj, records):
        for t in prange(n_traj):
            key = _mix64_nb((np.uint64(seed) ^ np.uint64(SALT)) + np.uint64(GOLDEN) * np.uint64(t))
            state = np.zeros(width, dtype=np.int64)
            _init_row(state, bcdf, key)
            for x in range(width):
                records[t, 0, x] = state[x]
            for layer in range(n_layers):
                _apply_layer(state, aprob, aidx, dig, q, arity, layer, active, key, width)
                for x in range(width):
                    records[t, layer + 1, x] = state[x]

    @njit(cache=True, parallel=True)
    def correlator_block_nb(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf,
                            seed, n_traj, block_start, block_len, t0, values):
        # values: (n_traj, n_meas, block_len); measurement m is the state
        # after double layer t0 + m (0-based), i.e. t0 + m + 1 double layers in
        n_meas = values.shape[1]
        for t in prange(n_traj):
            key = _mix64_nb((np.uint64(seed) ^ np.uint64(SALT)) + np.uint64(GOLDEN) * np.uint64(t))
            state = np.zeros(width, dtype=np.int64)
            _init_row(state, bcdf, key)
            m = 0
            for dl in range(n_layers // 2):
                _apply_layer(state, aprob, aidx, dig, q, arity, 2 * dl, active, key, width)
                _apply_layer(state, aprob, aidx, dig, q, arity, 2 * dl + 1, active, key, width)
                if dl >= t0 and m < n_meas:
                    for i in range(block_len):
                        values[t, m, i] = state[block_start + i]
                    m += 1


def _init_rows_np(bcdf: np.ndarray, keys: np.ndarray) -> np.ndarray:
    width = bcdf.shape[0]
    counters = np.arange(width, dtype=np.uint64)[None, :]
    u = uniforms_np(keys[:, None], counters)
    # side='right' search per site against its own cdf
    return (bcdf[None, :, :] <= u[:, :, None]).sum(axis=2).astype(np.int64)


def _apply_layer_np(states, aprob, aidx, dig, q, arity, layer, active, keys, width):
    offset = 0 if layer % 2 == 0 else arity // 2
    gmax = active.shape[1]
    spans = list(range(offset, width - arity + 1, arity))
    if not spans:
        return
    act = active[layer, : len(spans)].astype(bool)
    if not act.any():
        return
    starts = np.array(spans)[act]
    ks = np.nonzero(act)[0]
    codes = states[:, starts]
    for i in range(1, arity):
        codes = codes * q + states[:, starts + i]
    counters = (np.uint64(width) + np.uint64(layer) * np.uint64(gmax) + ks.astype(np.uint64))[None, :]
    u = uniforms_np(keys[:, None], counters)
    ktot = aprob.shape[1]
    v = u * ktot
    j = v.astype(np.int64)
    take = v - j < aprob[codes, j]
    outs = np.where(take, j, aidx[codes, j])
    for i in range(arity):
        states[:, starts + i] = dig[outs, i]


def record_full_np(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf, seed,
                   n_traj, records):
    keys = _mix64_np(
        (np.uint64(seed) ^ np.uint64(SALT)) + np.uint64(GOLDEN) * np.arange(n_traj, dtype=np.uint64)
    )
    states = _init_rows_np(bcdf, keys)
    records[:, 0, :] = states
    for layer in range(n_layers):
        _apply_layer_np(states, aprob, aidx, dig, q, arity, layer, active, keys, width)
        records[:, layer + 1, :] = states


def correlator_block_np(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf, seed,
                        n_traj, block_start, block_len, t0, values, chunk: int = 4096):
    n_meas = values.shape[1]
    for lo in range(0, n_traj, chunk):
        hi = min(lo + chunk, n_traj)
        keys = _mix64_np(
            (np.uint64(seed) ^ np.uint64(SALT))
            + np.uint64(GOLDEN) * np.arange(lo, hi, dtype=np.uint64)
        )
        states = _init_rows_np(bcdf, keys)
        m = 0
        for dl in range(n_layers // 2):
            _apply_layer_np(states, aprob, aidx, dig, q, arity, 2 * dl, active, keys, width)
            _apply_layer_np(states, aprob, aidx, dig, q, arity, 2 * dl + 1, active, keys, width)
            if dl >= t0 and m < n_meas:
                values[lo:hi, m, :] = states[:, block_start : block_start + block_len]
                m += 1


def run_record_full(tables, q, arity, width, n_layers, active, bcdf, seed, n_traj):
    aprob, aidx, dig = tables
    records = np.zeros((n_traj, n_layers + 1, width), dtype=np.int64)
    if backend() == "numba":
        configure_workers()
        record_full_nb(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf,
                       np.uint64(seed), n_traj, records)
    else:
        record_full_np(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf,
                       seed, n_traj, records)
    return records


def run_correlator_block(tables, q, arity, width, n_layers, active, bcdf, seed, n_traj,
                         block_start, block_len, t0, n_meas):
    aprob, aidx, dig = tables
    values = np.zeros((n_traj, n_meas, block_len), dtype=np.int64)
    if backend() == "numba":
        configure_workers()
        correlator_block_nb(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf,
                            np.uint64(seed), n_traj, block_start, block_len, t0, values)
    else:
        correlator_block_np(aprob, aidx, dig, q, arity, width, n_layers, active, bcdf,
                            seed, n_traj, block_start, block_len, t0, values)
    return values
