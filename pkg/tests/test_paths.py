import numpy as np
import pytest

from stringnet import paths as P
from stringnet import tensors as T


def _residual(t):
    return t.row_norm_residual() if hasattr(t, "row_norm_residual") else t.norm_residual()


@pytest.mark.parametrize("name", sorted(P.REGISTRY))
def test_normalization_along_each_path(name):
    for g in P.path_grid(name, 21, refine=4):
        assert _residual(P.evaluate_path(name, float(g))) < 1e-12


def test_tc_ds_endpoints_and_zero_entries():
    assert np.allclose(P.path_tc_ds(1.0).entries, T.toric_code_double_line(2).entries)
    assert np.allclose(P.path_tc_ds(-1.0).entries, T.double_semion_double_line().entries)
    a0 = P.path_tc_ds(0.0)
    for idx in ((0, 0, 1, 1), (0, 1, 1, 0), (1, 1, 0, 0), (1, 0, 0, 1)):
        assert a0.entries[idx] == 0
    assert a0.norm_residual() < 1e-14


def test_tc_ds_out_of_range():
    with pytest.raises(ValueError):
        P.path_tc_ds(1.5)


def _c123(a, b, c, d):
    return (
        (a // 2 + b // 2 + c // 2 + d // 2) % 2,
        (a + b + c + d) % 2,
        (a + b - c - d) % 4,
    )


def test_z22_endpoint_is_two_layer_fixed_point():
    w1 = P.path_z22_to_critical(1.0).as_four_index()
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    c1, c2, _ = _c123(a, b, c, d)
                    want = 0.5 if (c1 == 0 and c2 == 0) else 0.0
                    assert w1[a, b, c, d] == pytest.approx(want)


def test_z4_endpoint_and_meeting_point():
    w2 = P.path_z4_to_critical(1.0)
    assert np.allclose(w2.entries, T.toric_code_single_line(4).entries)
    assert w2.entry(0, 1, 1, 0) == pytest.approx(0.5)  # 0+1-1-0 = 0 mod 4
    assert np.allclose(
        P.path_z22_to_critical(0.0).entries, P.path_z4_to_critical(0.0).entries
    )


def test_set_frac_zero_coupling_entries_vanish():
    w0 = P.path_set_frac(0.0, 4).as_four_index()
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    if (a + b - c - d) % 4:
                        continue
                    odd_large = sum(1 for j in (a, b, c, d) if j % 2 and j > 2)
                    cross = (a % 2 == 0 and b % 2 == 0 and c % 2 and d % 2) or (
                        a % 2 and b % 2 and c % 2 == 0 and d % 2 == 0
                    )
                    if odd_large % 2 or cross:
                        assert w0[a, b, c, d] == 0
                    else:
                        assert abs(w0[a, b, c, d]) > 0


def test_set_frac_rejects_odd_n():
    with pytest.raises(ValueError):
        P.path_set_frac(0.5, 3)


def test_path_continuity_and_sign_switch():
    for name in sorted(P.REGISTRY):
        lo, hi = P.REGISTRY[name].parameter_range
        for g in (lo + 0.11, (lo + hi) / 2 + 0.13, hi - 0.2):
            t1 = P.evaluate_path(name, g).entries
            t2 = P.evaluate_path(name, g + 1e-7).entries
            assert np.max(np.abs(t1 - t2)) < 1e-6
    # sign(g) flips only zero-magnitude entries at g=0
    for f in (P.path_tc_ds, P.path_set_frac):
        below = f(-0.0).entries
        above = f(+0.0).entries
        assert np.array_equal(below, above)


def test_conservation_tables_at_critical_points():
    cases = [
        (P.path_z22_to_critical(0.0), "z22-z4"),
        (P.path_z4_to_critical(0.0), "z22-z4"),
        (P.path_set_frac(0.0), "set-frac"),
        (P.fixed_point_wq(), "wq"),
        (P.fixed_point_wp(), "wp"),
    ]
    for w, tag in cases:
        assert P.conservation_violations(w, P.gate_charge_vector(tag)) == 0
    # away from criticality the table does violate
    assert P.conservation_violations(P.path_z22_to_critical(0.5), P.gate_charge_vector("z22-z4")) > 0


def test_dipole_chain_endpoints():
    assert np.allclose(P.dipole_path_segment(1, 1.0).entries, T.toric_code_single_line(9).entries)
    assert np.allclose(P.dipole_path_segment(1, 0.0).entries, P.dipole_path_segment(2, 0.0).entries)
    assert np.allclose(P.dipole_path_segment(2, 1.0).entries, P.fixed_point_wq().entries)
    assert np.allclose(P.dipole_path_segment(3, 0.0).entries, P.fixed_point_wq().entries)
    assert np.allclose(P.dipole_path_segment(3, 1.0).entries, P.fixed_point_wp().entries)


def test_wq_vacuum_row_is_deterministic():
    # only the all-zeros output conserves qutrit charge 0
    row = np.abs(P.fixed_point_wq().entries[0]) ** 2
    assert row[0] == 1.0 and np.count_nonzero(row) == 1


def test_wp_rows_are_uniform_over_their_support():
    probs = np.abs(P.fixed_point_wp().entries) ** 2
    rows = probs.sum(axis=1)
    assert np.max(np.abs(rows - 1)) < 1e-12
    for r in range(81):
        nz = probs[r][probs[r] > 0]
        assert np.allclose(nz, nz[0])


def test_declared_symmetries_hold_along_segments():
    for g in P.path_grid("tc-ds", 11):
        a = P.path_tc_ds(float(g))
        if g >= 0:
            assert T.check_virtual_symmetry(a, T.X_LOOP_TRIVIAL).holds
        if g <= 0:
            assert T.check_virtual_symmetry(a, T.X_LOOP_CZ).holds
    for g in P.path_grid("set-frac", 11):
        w = P.path_set_frac(float(g))
        if g >= 0:
            assert T.check_virtual_symmetry(w, T.FRAC_TRIVIAL).holds
        if g <= 0:
            assert T.check_virtual_symmetry(w, T.FRAC_NONTRIVIAL).holds
        assert T.check_virtual_symmetry(w, T.Z_LOOP).holds


def test_path_grid_shapes():
    g = P.path_grid("tc-ds", 101)
    assert len(g) == 101 and g[0] == -1.0 and g[-1] == 1.0
    refined = P.path_grid("tc-ds", 101, refine=6)
    assert len(refined) > 101 and 1e-6 in refined and -1e-6 in refined


def test_registry_dispatch_unknown_path():
    with pytest.raises(KeyError):
        P.evaluate_path("nope", 0.0)
