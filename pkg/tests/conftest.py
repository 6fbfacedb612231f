import numpy as np

from stringnet.tensors import WSingleLine
from stringnet.zn import PauliFactor, PauliString


def random_normalized_w(n, rng):
    m = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
    m /= np.sqrt(np.sum(np.abs(m) ** 2, axis=1))[:, None]
    return WSingleLine(n, m)


def random_product_boundary(width, n, rng):
    b = rng.normal(size=(width, n)) + 1j * rng.normal(size=(width, n))
    b /= np.sqrt(np.sum(np.abs(b) ** 2, axis=1))[:, None]
    return b


def random_pauli_string(n, n_edges, max_weight, rng):
    wt = int(rng.integers(1, max_weight + 1))
    edges = rng.choice(n_edges, size=wt, replace=False)
    factors = {}
    for e in edges:
        z, x = int(rng.integers(0, n)), int(rng.integers(0, n))
        if z + x == 0:
            z = 1
        factors[int(e)] = PauliFactor(z, x)
    return PauliString(n, factors)


def patch_shape_for(n):
    """(width, sublayers) keeping the enumeration within the oracle cap."""
    return (4, 3) if n == 2 else (4, 2)
