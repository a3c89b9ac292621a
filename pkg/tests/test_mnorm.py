import math

import numpy as np
import pytest

from qnls.mnorm import (
    BoxSpec,
    alternating_max,
    bound_ppm1,
    bound_ppm2,
    bound_ppm4,
    build_model,
    count_triples,
    exhaustive_lower_bound,
    exhaustive_max,
    multiplier_lower_bound,
    trilinear_sphere_max,
)

TINY_A = (BoxSpec((1, 1, -1), (2.0, 1.0, 1.0), (1.0, 1.0, 8.0)), 2.0)
TINY_B = (BoxSpec((1, 1, -1), (1.0, 1.0, 1.0), (1.0, 1.0, 8.0)), 4.0)


class TestBoxSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            BoxSpec((1, 1), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            BoxSpec((1, 1, 0), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            BoxSpec((1, 1, -1), (1.0, -1.0, 1.0), (1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            BoxSpec((1, 1, -1), (1.0, 1.0, 1.0), (1.0, 0.0, 1.0))


class TestBuildModel:
    def test_lattice_layout(self):
        box, h = TINY_A
        m = build_model(box, h, n_tau=4, n_xi=8)
        # common xi step: max freq / (8//4) = 1
        assert m.dxi == pytest.approx(1.0)
        # slot 1 covers +-[2, 4]: magnitudes 2, 3, 4 on both sides
        assert sorted(np.abs(m.xi_grids[0]).tolist()) == [2, 2, 3, 3, 4, 4]
        # each mu lattice covers +-[L, 2L] at step L (n_tau//4 = 1)
        assert sorted(m.mu_grids[0].tolist()) == [-2.0, -1.0, 1.0, 2.0]
        assert m.measure_factor == pytest.approx(math.sqrt(1.0 * 1.0 * 1.0 / 8.0))

    def test_unresolved_scale_rejected(self):
        # max freq 3 -> dxi = 3/2 does not hit the other block endpoint 1
        box = BoxSpec((1, 1, -1), (3.0, 1.0, 1.0), (1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            build_model(box, 4.0, n_tau=4, n_xi=8)

    def test_window_filters_levels(self):
        box, _ = TINY_A
        # resonance level of (+,+,-) at |xi_j| ~ 1..4 never reaches 1000
        m = build_model(box, 1000.0, n_tau=4, n_xi=8)
        assert m.empty
        est = multiplier_lower_bound(box, 1000.0, n_tau=4, n_xi=8)
        assert est.empty and est.value == 0.0

    def test_triples_known_instance(self):
        box, h = TINY_A
        m = build_model(box, h, n_tau=4, n_xi=8)
        assert count_triples(m) == 20

    def test_bad_h(self):
        with pytest.raises(ValueError):
            build_model(TINY_A[0], 0.0, n_tau=4, n_xi=8)


class TestSphereMax:
    """Closed-form instances for the search oracle."""

    def test_single_triple(self):
        assert trilinear_sphere_max([0], [0], [0], (2, 2, 2)) == pytest.approx(1.0)

    def test_repeated_triple_adds(self):
        assert trilinear_sphere_max([0, 0], [0, 0], [0, 0], (1, 1, 1)) == pytest.approx(2.0)

    def test_disjoint_triples_take_max(self):
        # mass concentrates on one component
        val = trilinear_sphere_max([0, 1], [0, 1], [0, 1], (2, 2, 2))
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_all_ones_tensor(self):
        t1, t2, t3 = np.meshgrid(np.arange(2), np.arange(3), np.arange(4), indexing="ij")
        val = trilinear_sphere_max(t1.ravel(), t2.ravel(), t3.ravel(), (2, 3, 4))
        assert val == pytest.approx(math.sqrt(24), rel=1e-9)

    def test_shared_slot_svd(self):
        # W[0, :, :] = identity: best value is the top singular value 1
        val = trilinear_sphere_max([0, 0], [0, 1], [0, 1], (1, 2, 2))
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_needs_small_slot(self):
        t1, t2, t3 = np.meshgrid(np.arange(3), np.arange(3), np.arange(3), indexing="ij")
        with pytest.raises(ValueError):
            trilinear_sphere_max(t1.ravel(), t2.ravel(), t3.ravel(), (3, 3, 3))

    def test_empty(self):
        assert trilinear_sphere_max([], [], [], (2, 2, 2)) == 0.0


class TestAlternating:
    def test_monotone_in_restarts(self):
        box, h = TINY_B
        m = build_model(box, h, n_tau=4, n_xi=8)
        vals = [alternating_max(m, iters=i, seed=3) for i in (1, 2, 4, 8)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_matches_search_oracle_tiny(self):
        for box, h in (TINY_A, TINY_B):
            est = multiplier_lower_bound(box, h, n_tau=4, n_xi=8, iters=24, seed=1)
            exh = exhaustive_lower_bound(box, h, n_tau=4, n_xi=8)
            assert est.value == pytest.approx(exh, rel=1e-9)

    def test_estimate_fields(self):
        box, h = TINY_A
        est = multiplier_lower_bound(box, h, n_tau=4, n_xi=8, iters=4, seed=2)
        assert not est.empty
        assert est.n_triples == 20
        assert est.value == pytest.approx(est.raw * build_model(box, h, 4, 8).measure_factor)

    def test_seed_determinism(self):
        box, h = TINY_A
        a = multiplier_lower_bound(box, h, n_tau=4, n_xi=8, iters=4, seed=5)
        b = multiplier_lower_bound(box, h, n_tau=4, n_xi=8, iters=4, seed=5)
        assert a.value == b.value


class TestGuards:
    def test_exhaustive_size_guard(self):
        box = BoxSpec((1, 1, -1), (8.0, 8.0, 8.0), (8.0, 8.0, 64.0))
        m = build_model(box, 64.0, n_tau=64, n_xi=64)
        if not m.empty:
            with pytest.raises(ValueError):
                exhaustive_max(m)


class TestBounds:
    def test_reference_bound_formulas(self):
        freqs = (16.0, 8.0, 8.0)
        mods = (1.0, 4.0, 256.0)
        assert bound_ppm1(freqs, mods) == pytest.approx(math.sqrt(1.0 * 8.0))
        assert bound_ppm2(freqs, mods) == pytest.approx(
            math.sqrt(min(1.0 * 256.0 / 8.0, 4.0 * 256.0 / 16.0))
        )
        lo, mid, _hi = sorted(mods)
        assert bound_ppm4(freqs, mods) == pytest.approx(lo**0.5 * mid**0.25)
