"""Experiment drivers: pure functions from a config dict to result dicts.

Each driver draws its own deterministic seed stream from [run] seed, runs
the relevant operators, and returns plain rows/scalars; writing artifacts
and judging thresholds happens in the command-line layer and the
acceptance suite, which both call into this module."""

from __future__ import annotations

import math

import numpy as np

from .bilinear import apply_bilinear, g_symbol, leibniz_residual, normal_form_pair, weighted_product
from .evolution import (
    EvolutionConfig,
    decompose,
    direct_w_solve,
    integrate,
    lipschitz_experiment,
    normal_form_h,
    rhs_groups,
    substitution_check,
)
from .mnorm import (
    BoxSpec,
    bound_ppm1,
    bound_ppm2,
    bound_ppm4,
    exhaustive_lower_bound,
    multiplier_lower_bound,
)
from .rates import KIND_ORDER, expected_slope, product_rate_experiment
from .roughdata import DataSpec, gen_rough_data
from .spacetime import fitted_regularity, sobolev_norm
from .spectral import (
    Grid,
    SpectralField,
    bessel_potential,
    free_propagate,
    l2_norm,
    lp_annulus,
    lp_bump,
    max_band,
    sign_project,
)

_TAGS = {
    "identity": 11,
    "smoothing": 22,
    "decompose": 33,
    "rates": 44,
    "mnorm": 55,
    "lipschitz": 66,
    "subst": 77,
    "simulate": 88,
    "infra": 99,
}


def _seed(cfg, tag, idx=0) -> int:
    base = int(cfg["run"]["seed"])
    return (base * 1000003 + _TAGS[tag]) * 1000003 + idx


# ----------------------------------------------------------------------------
# resonance identity
# ----------------------------------------------------------------------------

def run_identity(cfg) -> dict:
    c = cfg["identity"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    rows = []
    for kind_idx, kind in enumerate(("u2", "uubar", "ubar2")):
        t_sym, g_sym = normal_form_pair(kind, run["alpha"], run["beta"])
        for pair in range(c["n_pairs"]):
            base = _seed(cfg, "identity", kind_idx * 1000 + pair)
            f = gen_rough_data(
                DataSpec(c["sigma"], c["band_limit"], amplitude=c["amplitude"], seed=base), grid
            )
            g = gen_rough_data(
                DataSpec(c["sigma"], c["band_limit"], amplitude=c["amplitude"], seed=base + 500),
                grid,
            )
            rep = leibniz_residual(t_sym, g_sym, f, g, c["t"], c["dt"])
            rep_half = leibniz_residual(t_sym, g_sym, f, g, c["t"], 0.5 * c["dt"])
            ratio = rep.residual / rep_half.residual if rep_half.residual > 0 else float("nan")
            rows.append((kind, pair, c["dt"], rep.residual, rep_half.residual, ratio))
    residuals = [r[3] for r in rows]
    ratios = [r[5] for r in rows]
    return {
        "rows": rows,
        "max_residual": max(residuals),
        "min_ratio": min(ratios),
        "max_ratio": max(ratios),
    }


# ----------------------------------------------------------------------------
# normal-form smoothing on rough data
# ----------------------------------------------------------------------------

def run_smoothing(cfg) -> dict:
    c = cfg["smoothing"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    rows = []
    for i in range(c["n_seeds"]):
        f = gen_rough_data(
            DataSpec(c["sigma"], c["freq_hi"], amplitude=c["amplitude"], seed=_seed(cfg, "smoothing", i)),
            grid,
        )
        h0 = normal_form_h(f, 0.0, run["alpha"], run["beta"], "u2")
        fit = fitted_regularity(h0, c["fit_lo"], c["fit_hi"])
        data_fit = fitted_regularity(f, c["fit_lo"], c["fit_hi"])
        rows.append((i, fit.sigma, fit.stderr, data_fit.sigma))
    fits = [r[1] for r in rows]
    return {"rows": rows, "min_fit": min(fits), "median_fit": float(np.median(fits))}


# ----------------------------------------------------------------------------
# flow decomposition: free wave + quadratic lift + smoother remainder
# ----------------------------------------------------------------------------

def run_decompose(cfg) -> dict:
    c = cfg["decompose"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    alpha, beta = run["alpha"], run["beta"]

    # v-form: free + normal form + smoother remainder
    f = gen_rough_data(
        DataSpec(c["sigma"], c["freq_hi"], amplitude=c["amplitude"], seed=_seed(cfg, "decompose", 0)),
        grid,
    )
    vcfg = EvolutionConfig(
        c["n_points"], alpha, beta, c["dt"], c["t_final"],
        kind="u2", variables="v", n_saves=c["n_saves"],
    )
    traj = integrate(vcfg, f)
    dec = decompose(traj, f)
    h0 = normal_form_h(f, 0.0, alpha, beta, "u2")
    w0_check = l2_norm(dec.w[0] + h0) / max(l2_norm(h0), 1e-300)

    v_rows = []
    for t, fr, hh, ww in zip(dec.times, dec.free, dec.h, dec.w):
        fit_free = fitted_regularity(fr, c["fit_lo"], c["fit_hi"]).sigma
        fit_h = fitted_regularity(hh, c["fit_lo"], c["fit_hi"]).sigma
        fit_w = fitted_regularity(ww, c["fit_lo"], c["fit_hi"]).sigma
        v_rows.append((t, fit_free, fit_h, fit_w, fit_w - fit_free, l2_norm(ww)))
    min_margin = min(r[4] for r in v_rows)

    # u-form: the rough route, measured against its own free evolution
    fu = gen_rough_data(
        DataSpec(c["u_sigma"], c["freq_hi"], amplitude=c["u_amplitude"], seed=_seed(cfg, "decompose", 1)),
        grid,
    )
    ucfg = EvolutionConfig(
        c["n_points"], alpha, beta, c["dt"], c["t_final"],
        kind="u2", variables="u", n_saves=c["n_saves"],
    )
    traj_u = integrate(ucfg, fu)
    u_data_fit = fitted_regularity(fu, c["fit_lo"], c["fit_hi"]).sigma
    u_rows = []
    for t, state in zip(traj_u.times, traj_u.states):
        if t == 0.0:
            continue
        diff = state - free_propagate(t, fu)
        fit_diff = fitted_regularity(diff, c["fit_lo"], c["fit_hi"]).sigma
        u_rows.append((t, fit_diff, l2_norm(diff)))
    min_u_fit = min(r[1] for r in u_rows)

    return {
        "v_rows": v_rows,
        "w0_check": w0_check,
        "min_margin": min_margin,
        "u_rows": u_rows,
        "u_data_fit": u_data_fit,
        "min_u_fit": min_u_fit,
    }


# ----------------------------------------------------------------------------
# dyadic rate suite
# ----------------------------------------------------------------------------

def run_rates(cfg) -> dict:
    c = cfg["rates"]
    run = cfg["run"]
    kinds = list(KIND_ORDER) if c["kinds"] == ["all"] else list(c["kinds"])
    reports = {}
    rows = []
    slope_rows = []
    for kind in kinds:
        rep = product_rate_experiment(
            kind,
            (c["k_lo"], c["k_hi"]),
            run["delta"],
            c["n_seeds"],
            c["n_t"],
            seed=_seed(cfg, "rates", KIND_ORDER.index(kind)),
            threads=run["threads"],
        )
        reports[kind] = rep
        for k, med in zip(rep.ks, rep.medians):
            rows.append((kind, k, med))
        target, tol = expected_slope(kind, run["delta"])
        if tol is None:
            ok = (not rep.degenerate) and rep.slope >= target
        else:
            ok = (not rep.degenerate) and abs(rep.slope - target) <= tol
        slope_rows.append((kind, rep.slope, rep.stderr, target, tol if tol is not None else "", ok))
    return {"reports": reports, "rows": rows, "slope_rows": slope_rows}


# ----------------------------------------------------------------------------
# multiplier lower-bound sweep
# ----------------------------------------------------------------------------

def mnorm_sweep_configs():
    """Nine box triples: three bound families at three sizes.

    All use curvature signs (+, +, -), comparable first/third scales
    (freqs (2N0, N0, N0)) and a resonance window H = 4 N0^2 ~ N1 N2 that the
    admissible corner actually attains; the third modulation scale equals H
    (the largest), so the families differ in the small modulations."""
    out = []
    for n0 in (8, 16, 32):
        h = 4.0 * n0 * n0
        freqs = (2.0 * n0, float(n0), float(n0))
        out.append(("ppm1", n0, BoxSpec((1, 1, -1), freqs, (1.0, 4.0, h)), h))
        out.append(("ppm2", n0, BoxSpec((1, 1, -1), freqs, (4.0, 4.0, h)), h))
        out.append(("ppm4", n0, BoxSpec((1, 1, -1), freqs, (2.0, 8.0, h)), h))
    return out

_BOUNDS = {"ppm1": bound_ppm1, "ppm2": bound_ppm2, "ppm4": bound_ppm4}


def run_mnorm(cfg) -> dict:
    c = cfg["mnorm"]
    sweep_rows = []
    family_c: dict = {}
    ppm4_points = []
    for family, n0, box, h in mnorm_sweep_configs():
        est = multiplier_lower_bound(
            box, h, n_tau=c["n_tau"], n_xi=c["n_xi"], iters=c["iters"],
            seed=_seed(cfg, "mnorm", n0),
        )
        bound = _BOUNDS[family](box.freqs, box.mods)
        ratio = est.value / bound
        sweep_rows.append((family, n0, est.value, bound, ratio, est.n_triples, est.empty))
        family_c[family] = max(family_c.get(family, 0.0), ratio)
        if family == "ppm4" and est.value > 0:
            ppm4_points.append((math.log2(n0), math.log2(est.value)))

    if len(ppm4_points) >= 2:
        xs = np.array([p[0] for p in ppm4_points])
        ys = np.array([p[1] for p in ppm4_points])
        size_slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        size_slope = float("nan")

    # tiny instances: alternating maximization against the sphere-sweep oracle
    tiny_rows = []
    for label, box, h in (
        ("tiny-a", BoxSpec((1, 1, -1), (2.0, 1.0, 1.0), (1.0, 1.0, 8.0)), 2.0),
        ("tiny-b", BoxSpec((1, 1, -1), (1.0, 1.0, 1.0), (1.0, 1.0, 8.0)), 4.0),
        ("tiny-c", BoxSpec((1, 1, -1), (2.0, 2.0, 1.0), (1.0, 1.0, 4.0)), 8.0),
    ):
        alt = multiplier_lower_bound(box, h, n_tau=4, n_xi=8, iters=24, seed=_seed(cfg, "mnorm", 999))
        exh = exhaustive_lower_bound(box, h, n_tau=4, n_xi=8, grid_points=c["tiny_grid"])
        rel = abs(alt.value - exh) / max(exh, 1e-300)
        tiny_rows.append((label, alt.value, exh, rel))
    max_tiny = max(r[3] for r in tiny_rows)

    return {
        "sweep_rows": sweep_rows,
        "family_c": family_c,
        "tiny_rows": tiny_rows,
        "max_tiny_reldiff": max_tiny,
        "ppm4_size_slope": size_slope,
    }


# ----------------------------------------------------------------------------
# stability experiments
# ----------------------------------------------------------------------------

def run_lipschitz(cfg) -> dict:
    c = cfg["lipschitz"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    f = gen_rough_data(
        DataSpec(c["sigma"], c["freq_hi"], amplitude=c["amplitude"], seed=_seed(cfg, "lipschitz", 0)),
        grid,
    )
    g_raw = gen_rough_data(
        DataSpec(c["g_sigma"], c["freq_hi"], amplitude=1.0, seed=_seed(cfg, "lipschitz", 1)), grid
    )
    g = (1.0 / sobolev_norm(-0.5, g_raw)) * g_raw
    ecfg = EvolutionConfig(
        c["n_points"], run["alpha"], run["beta"], c["dt"], c["t_final"],
        kind="u2", variables="u", n_saves=c["n_saves"],
    )
    rep = lipschitz_experiment(f, g, c["epsilons"], ecfg)
    rows = list(zip(rep.epsilons, rep.ratios))
    return {"rows": rows, "spread": rep.spread, "ratios": rep.ratios}


def run_subst(cfg) -> dict:
    c = cfg["subst"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    z0 = gen_rough_data(
        DataSpec(c["sigma"], c["freq_hi"], amplitude=c["amplitude"], seed=_seed(cfg, "subst", 0)),
        grid,
    )
    ecfg = EvolutionConfig(
        c["n_points"], run["alpha"], c["beta"], c["dt"], c["t_final"],
        kind="u2", variables="u", n_saves=c["n_saves"],
    )
    rep = substitution_check(z0, c["beta"], ecfg)
    rows = list(zip(rep.dts, rep.sup_diffs))
    return {"rows": rows, "max_sup": max(rep.sup_diffs)}


def run_simulate(cfg):
    c = cfg["simulate"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    data = gen_rough_data(
        DataSpec(c["sigma"], c["freq_hi"], amplitude=c["amplitude"], seed=_seed(cfg, "simulate", 0)),
        grid,
    )
    ecfg = EvolutionConfig(
        c["n_points"], run["alpha"], run["beta"], c["dt"], c["t_final"],
        kind=c["kind"], variables=c["variables"], n_saves=c["n_saves"],
    )
    traj = integrate(ecfg, data)
    rows = list(zip(traj.times, traj.l2_history))
    return {"rows": rows, "final_l2": traj.l2_history[-1]}, traj


# ----------------------------------------------------------------------------
# infrastructure checks
# ----------------------------------------------------------------------------

def reference_apply_bilinear(sym, u, v):
    """Independent double-loop evaluation of a bilinear symbol contraction
    (plain Python arithmetic, explicit index wrap)."""
    grid = u.grid
    n = grid.n
    mat = sym.matrix(grid)
    a = list(u.coeffs if not sym.conj_first else np.conj(u.coeffs)[(-np.arange(n)) % n])
    c = list(v.coeffs if not sym.conj_second else np.conj(v.coeffs)[(-np.arange(n)) % n])
    out = [0j] * n
    for i in range(n):
        if a[i] == 0:
            continue
        for j in range(n):
            m = mat[i, j]
            if m != 0 and c[j] != 0:
                out[(i + j) % n] += m * a[i] * c[j]
    out[n // 2] = 0j
    return SpectralField(grid, np.array(out))


def measure_integrator_order(cfg) -> dict:
    c = cfg["infra"]
    run = cfg["run"]
    grid = Grid(c["order_n"])
    data = gen_rough_data(
        DataSpec(c["order_sigma"], c["order_freq_hi"], amplitude=c["order_amplitude"],
                 seed=_seed(cfg, "infra", 0)),
        grid,
    )
    dt0 = c["order_dt"]
    finals = {}
    for scale in (1.0, 0.5, 0.25, 1.0 / 16.0):
        ecfg = EvolutionConfig(
            c["order_n"], run["alpha"], run["beta"], dt0 * scale, c["order_t_final"],
            kind="u2", variables="u", n_saves=2,
        )
        finals[scale] = integrate(ecfg, data).final
    ref = finals[1.0 / 16.0]
    e1 = l2_norm(finals[1.0] - ref)
    e2 = l2_norm(finals[0.5] - ref)
    e3 = l2_norm(finals[0.25] - ref)
    return {
        "errors": [e1, e2, e3],
        "order_12": math.log2(e1 / e2) if e2 > 0 else float("nan"),
        "order_23": math.log2(e2 / e3) if e3 > 0 else float("nan"),
    }


def measure_partition_deviation(n_points: int = 1024) -> float:
    grid = Grid(n_points)
    xi = grid.frequencies
    top = max_band(grid)
    total = lp_bump(xi).copy()
    for k in range(1, top + 1):
        total += lp_annulus(xi / float(2**k))
    covered = np.abs(xi) <= float(2**top)
    return float(np.max(np.abs(total[covered] - 1.0)))


def measure_bilinear_oracle_deviation(cfg) -> float:
    run = cfg["run"]
    grid = Grid(64)
    worst = 0.0
    for idx, make in enumerate((
        lambda: g_symbol(run["alpha"], run["beta"]),
        lambda: normal_form_pair("u2", run["alpha"], run["beta"])[0],
        lambda: normal_form_pair("uubar", run["alpha"], run["beta"])[0],
        lambda: normal_form_pair("ubar2", run["alpha"], run["beta"])[0],
    )):
        sym = make()
        f = gen_rough_data(DataSpec(0.5, 16.0, seed=_seed(cfg, "infra", 100 + idx)), grid)
        g = gen_rough_data(DataSpec(0.5, 16.0, seed=_seed(cfg, "infra", 200 + idx)), grid)
        fast = apply_bilinear(sym, f, g)
        slow = reference_apply_bilinear(sym, f, g)
        scale = max(l2_norm(slow), 1e-300)
        worst = max(worst, l2_norm(fast - slow) / scale)
    return worst


def measure_group_sum_deviation(cfg) -> float:
    run = cfg["run"]
    alpha, beta = run["alpha"], run["beta"]
    grid = Grid(256)
    f = gen_rough_data(DataSpec(0.0, 32.0, amplitude=0.2, seed=_seed(cfg, "infra", 300)), grid)
    t = 0.37
    h_field = normal_form_h(f, t, alpha, beta, "u2")
    w_field = gen_rough_data(DataSpec(1.0, 32.0, amplitude=0.1, seed=_seed(cfg, "infra", 301)), grid)
    groups = rhs_groups(f, h_field, w_field, t, alpha, beta)
    total = groups[0]
    for piece in groups[1:]:
        total = total + piece
    big_f = free_propagate(t, f)
    v = big_f + h_field + w_field
    full = weighted_product(alpha, beta - alpha, v, v)
    fplus = sign_project("+", big_f)
    paired = weighted_product(alpha, beta - alpha, fplus, fplus)
    target = full - paired
    return l2_norm(total - target) / max(l2_norm(target), 1e-300)


def measure_route_equivalence(cfg) -> list:
    c = cfg["infra"]
    run = cfg["run"]
    grid = Grid(c["n_points"])
    rows = []
    for kind_idx, kind in enumerate(("u2", "uubar", "ubar2")):
        data = gen_rough_data(
            DataSpec(3.0, 8.0, amplitude=0.3, seed=_seed(cfg, "infra", 400 + kind_idx)), grid
        )
        ecfg = EvolutionConfig(
            c["n_points"], run["alpha"], run["beta"], c["route_dt"], c["route_t_final"],
            kind=kind, variables="v", n_saves=6,
        )
        traj = integrate(ecfg, data)
        dec = decompose(traj, data)
        direct = direct_w_solve(ecfg, data)
        worst = 0.0
        for wd, wdir in zip(dec.w, direct.states):
            scale = max(l2_norm(wdir), 1e-300)
            worst = max(worst, l2_norm(wd - wdir) / scale)
        rows.append((kind, worst))
    return rows


def run_infra(cfg) -> dict:
    order = measure_integrator_order(cfg)
    partition = measure_partition_deviation()
    oracle = measure_bilinear_oracle_deviation(cfg)
    group = measure_group_sum_deviation(cfg)
    route = measure_route_equivalence(cfg)
    return {
        "order": order,
        "partition_dev": partition,
        "bilinear_dev": oracle,
        "group_dev": group,
        "route_rows": route,
        "max_route_dev": max(r[1] for r in route),
    }
