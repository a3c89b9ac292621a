import numpy as np
import pytest

from qnls.rates import (
    KIND_ORDER,
    KINDS,
    _one_cell,
    _output_multiplier,
    expected_slope,
    product_rate_experiment,
)
from qnls.spectral import Grid, lp_annulus


def test_kind_table_complete():
    assert len(KINDS) == 8
    assert set(KIND_ORDER) == set(KINDS)
    for kind, row in KINDS.items():
        conj2, v_pattern, out_pattern, vb_tag, u_side, v_side = row
        assert isinstance(conj2, bool)
        assert v_pattern in ("band", "muchless", "broad")
        assert out_pattern in ("similar", "muchless", "exact", None)
        assert vb_tag in ("plus", "minus")
        assert u_side in ("both", "+") and v_side in ("both", "-")


def test_expected_slope_values():
    assert expected_slope("gain1", 0.05) == (-0.45, 0.1)
    assert expected_slope("kkkk1", 0.05) == (-0.25, 0.12)
    target, tol = expected_slope("gain3", 0.05)
    assert target == -0.1 and tol is None
    with pytest.raises(ValueError):
        expected_slope("nope", 0.05)


def test_output_multiplier_patterns():
    g = Grid(256)
    xi = g.frequencies
    exact = _output_multiplier(g, "exact", 4)
    np.testing.assert_allclose(exact, lp_annulus(xi / 16.0))
    low = _output_multiplier(g, "muchless", 8)
    assert np.all(low[np.abs(xi) > 8.0] == 0)  # bands up to k-6=2
    assert low[0] == 1.0
    sim = _output_multiplier(g, "similar", 4)
    assert sim[16] == pytest.approx(1.0)
    assert np.all(sim[np.abs(xi) > 2.0**8] == 0)


def test_one_cell_ratio_positive_and_deterministic():
    for kind in ("gain1", "kkk1", "plusminus"):
        r1 = _one_cell(kind, 3, 0.05, 7, 64, 2 * np.pi)
        r2 = _one_cell(kind, 3, 0.05, 7, 64, 2 * np.pi)
        assert r1 == r2
        assert np.isfinite(r1) and r1 > 0


def test_experiment_report_shape():
    rep = product_rate_experiment("gain3", (3, 5), 0.05, n_seeds=3, n_t=64, seed=5)
    assert rep.kind == "gain3"
    assert rep.ks == [3, 4, 5]
    assert len(rep.medians) == 3
    assert all(m > 0 for m in rep.medians)
    assert not rep.degenerate
    assert len(rep.ratios[3]) == 3
    assert np.isfinite(rep.slope) and np.isfinite(rep.stderr)


def test_threads_do_not_change_values():
    a = product_rate_experiment("kkk3", (3, 4), 0.05, n_seeds=3, n_t=64, seed=9, threads=1)
    b = product_rate_experiment("kkk3", (3, 4), 0.05, n_seeds=3, n_t=64, seed=9, threads=3)
    np.testing.assert_allclose(a.medians, b.medians, rtol=0, atol=0)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        product_rate_experiment("mystery", (3, 4), 0.05, n_seeds=2)
