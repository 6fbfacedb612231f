import numpy as np
import pytest

from stringnet import tensors as T
from stringnet.paths import path_set_frac, path_tc_ds


def test_toric_code_single_line_entries():
    w = T.toric_code_single_line(2)
    s = 1 / np.sqrt(2)
    assert w.entry(0, 0, 0, 0) == pytest.approx(s)
    assert w.entry(0, 0, 1, 1) == pytest.approx(s)
    assert w.entry(0, 0, 0, 1) == 0
    # row (0,1): nonzero exactly at (0,1) and (1,0)
    nz = {(c, d) for c in range(2) for d in range(2) if w.entry(0, 1, c, d) != 0}
    assert nz == {(0, 1), (1, 0)}


@pytest.mark.parametrize("n", [2, 3, 4, 9])
def test_toric_code_row_norms_and_support_count(n):
    w = T.toric_code_single_line(n)
    rows = np.sum(np.abs(w.entries) ** 2, axis=1)
    # N entries of 1/N each; exact up to one ulp of the square root
    assert np.max(np.abs(rows - 1)) < 1e-15
    assert np.count_nonzero(w.entries) == n**3
    assert T.check_virtual_symmetry(w, T.Z_LOOP).holds


def test_double_line_fixed_points():
    a_tc = T.toric_code_double_line(2)
    a_ds = T.double_semion_double_line()
    assert a_tc.entry(0, 0, 0, 0) == pytest.approx(1 / np.sqrt(2))
    assert a_ds.entry(0, 0, 1, 1) == pytest.approx(-1 / np.sqrt(2))
    assert a_ds.entry(1, 0, 0, 1) == pytest.approx(+1 / np.sqrt(2))
    # they differ only in signs
    assert np.array_equal(np.abs(a_tc.entries), np.abs(a_ds.entries))
    assert a_tc.norm_residual() < 1e-14
    assert a_ds.norm_residual() < 1e-14


def test_check_isometry_single_line():
    for n in (2, 4):
        rep = T.check_isometry(T.toric_code_single_line(n))
        assert rep.holds and rep.max_residual < 1e-14
    broken = T.toric_code_single_line(2)
    broken.entries[0, 0] *= 2
    assert not T.check_isometry(broken).holds


def test_check_isometry_double_line_contraction():
    # the literal T T* contraction with the extra delta_{bc} projector
    for a in (T.toric_code_double_line(2), T.double_semion_double_line(), path_tc_ds(0.37)):
        rep = T.check_isometry(a)
        assert rep.holds, rep
    assert T.check_isometry(path_tc_ds(0.37)).max_residual < 1e-14


def test_x_loop_symmetries():
    a_tc = T.toric_code_double_line(2)
    a_ds = T.double_semion_double_line()
    assert T.check_virtual_symmetry(a_tc, T.X_LOOP_TRIVIAL).holds
    assert not T.check_virtual_symmetry(a_ds, T.X_LOOP_TRIVIAL).holds
    assert T.check_virtual_symmetry(a_ds, T.X_LOOP_CZ).holds


def test_frac_symmetries_and_q_matrix():
    q4 = T.frac_q_matrix(4)
    assert np.array_equal(q4, np.array([1, 1, 1, -1], dtype=complex))
    q6 = T.frac_q_matrix(6)
    assert np.array_equal(q6, np.array([1, 1j, 1, 1j, 1, 1j]))
    w_triv = path_set_frac(1.0, 4)
    w_frac = path_set_frac(-1.0, 4)
    assert T.check_virtual_symmetry(w_triv, T.FRAC_TRIVIAL).holds
    assert not T.check_virtual_symmetry(w_triv, T.FRAC_NONTRIVIAL).holds
    assert T.check_virtual_symmetry(w_frac, T.FRAC_NONTRIVIAL).holds
    assert not T.check_virtual_symmetry(w_frac, T.FRAC_TRIVIAL).holds


@pytest.mark.parametrize("n", [4, 6])
def test_classify_symmetry_action(n):
    assert T.classify_symmetry_action(path_set_frac(1.0, n)) == "trivial"
    assert T.classify_symmetry_action(path_set_frac(-1.0, n)) == "nontrivial"
    assert T.classify_symmetry_action(path_set_frac(0.0, n)) == "both"


def test_classify_rejects_odd_n():
    with pytest.raises(ValueError):
        T.classify_symmetry_action(T.toric_code_single_line(3))


def test_incompatible_symmetry_pairings():
    with pytest.raises(ValueError):
        T.check_virtual_symmetry(T.toric_code_double_line(2), T.Z_LOOP)
    with pytest.raises(ValueError):
        T.check_virtual_symmetry(T.toric_code_single_line(2), T.X_LOOP_TRIVIAL)
    with pytest.raises(ValueError):
        T.check_virtual_symmetry(T.toric_code_single_line(3), T.FRAC_TRIVIAL)


def test_save_load_round_trip(tmp_path):
    w = path_set_frac(0.3, 4)
    T.save_tensor(w, tmp_path / "w.json")
    back = T.load_tensor(tmp_path / "w.json")
    assert back.kind == "single-line" and back.modulus == 4
    assert np.max(np.abs(back.entries - w.entries)) < 1e-15
    a = path_tc_ds(-0.7)
    T.save_tensor(a, tmp_path / "a.json")
    back = T.load_tensor(tmp_path / "a.json")
    assert back.kind == "double-line"
    assert np.max(np.abs(back.entries - a.entries)) < 1e-15
