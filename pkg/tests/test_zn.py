import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stringnet.zn import (
    GroupLabel,
    PauliFactor,
    PauliString,
    clock_matrix,
    clock_phase,
    pauli_basis_decompose,
    pauli_string_matrix,
    pauli_terms_matrix,
    shift_label,
    shift_matrix,
)


def test_clock_phase_values():
    assert clock_phase(0, 5, 4) == 1
    assert clock_phase(1, 1, 2) == pytest.approx(-1)
    # e^{3 pi i} = -1
    assert clock_phase(3, 2, 4) == pytest.approx(-1)


def test_shift_label_values():
    assert shift_label(0, 0, 3) == 0
    assert shift_label(1, 1, 2) == 0
    assert shift_label(3, -1, 4) == 2


@given(st.integers(2, 9), st.integers(0, 8), st.integers(-20, 20), st.integers(-20, 20))
def test_shift_composition(n, j, p, q):
    j = j % n
    assert shift_label(shift_label(j, p, n), q, n) == shift_label(j, p + q, n)


@given(st.integers(2, 9), st.integers(0, 8))
def test_clock_order(n, j):
    assert clock_phase(j % n, n, n) == pytest.approx(1)


@given(st.integers(2, 7), st.integers(-30, 30), st.integers(-30, 30))
def test_group_label_axioms(n, a, b):
    x, y = GroupLabel(a, n), GroupLabel(b, n)
    assert (x + y).value == (a + b) % n
    assert (x + (-x)).value == 0
    assert (x + GroupLabel(0, n)) == x


def test_group_label_modulus_mismatch():
    with pytest.raises(ValueError):
        GroupLabel(1, 2) + GroupLabel(1, 3)


def test_pauli_factor_rejects_identity():
    with pytest.raises(ValueError):
        PauliFactor(0, 0)


def test_pauli_string_rejects_duplicates_and_identity():
    with pytest.raises(ValueError):
        PauliString(2, {0: PauliFactor(2, 0)})  # reduces to identity mod 2
    s = PauliString(3, {0: PauliFactor(1, 0)})
    assert s.weight == 1 and s.z_power(0) == 1 and s.x_power(1) == 0


def test_clock_shift_matrices():
    n = 3
    z, x = clock_matrix(n), shift_matrix(n)
    assert np.allclose(np.linalg.matrix_power(z, n), np.eye(n))
    assert np.allclose(np.linalg.matrix_power(x, n), np.eye(n))
    # ZX = omega XZ
    omega = np.exp(2j * np.pi / n)
    assert np.allclose(z @ x, omega * x @ z)


def test_decompose_identity_and_z():
    for n in (2, 3):
        terms = pauli_basis_decompose(np.eye(n), n)
        assert len(terms) == 1
        coeff, string = terms[0]
        assert coeff == pytest.approx(1) and string.weight == 0
    terms = pauli_basis_decompose(clock_matrix(2), 2)
    assert len(terms) == 1
    coeff, string = terms[0]
    assert coeff == pytest.approx(1)
    assert string.factors[0] == PauliFactor(1, 0)


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_decompose_reconstructs_random_operators(n, k):
    rng = np.random.default_rng(10 * n + k)
    op = rng.normal(size=(n**k, n**k)) + 1j * rng.normal(size=(n**k, n**k))
    terms = pauli_basis_decompose(op, n)
    back = pauli_terms_matrix(terms, k, n)
    assert np.max(np.abs(back - op)) < 1e-12


def test_decompose_term_count():
    rng = np.random.default_rng(0)
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    terms = pauli_basis_decompose(op, 2)
    assert len(terms) == 16


def test_decompose_dimension_mismatch():
    with pytest.raises(ValueError):
        pauli_basis_decompose(np.eye(5), 2)


def test_pauli_string_matrix_weighting():
    s = PauliString(2, {1: PauliFactor(1, 1)})
    m = pauli_string_matrix(s, [0, 1])
    zx = clock_matrix(2) @ shift_matrix(2)
    assert np.allclose(m, np.kron(np.eye(2), zx))
