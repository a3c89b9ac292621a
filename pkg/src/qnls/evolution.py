"""Time integration and the normal-form decomposition pipeline.

The evolutions integrated here are quadratic Schrodinger flows

    u_t + i u_xx = <D>^outer [ (<D>^inner u') (<D>^inner u'') ]

where the primes mark the interaction kind (plain square, mixed conjugate,
double conjugate) and the exponent pair (inner, outer) encodes the working
variable:

    variables "u": (0, beta)           rough route
    variables "v": (alpha, beta-alpha) smoothed route
    variables "z": (beta, 0)           both derivatives on the inputs

The integrator is an integrating-factor Runge-Kutta 4 scheme: the linear
phase exp(i xi^2 t) is applied exactly and the classical RK4 tableau acts on
the rotated nonlinearity, so a vanishing nonlinearity reproduces the free
propagator to rounding error and the local error is O(dt^5).

States stay band-limited to the guard index (a quarter of the grid): the
nonlinear term is evaluated by the dealiased doubled-grid product and then
truncated back to the guard band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .bilinear import apply_bilinear, apply_pair_g_fast, t_symbol_u2, t_symbol_uubar, t_symbol_ubar2, weighted_product
from .spectral import (
    Grid,
    SpectralField,
    bessel_potential,
    free_propagate,
    l2_norm,
    sign_project,
)

_KIND_CONJ = {"u2": (False, False), "uubar": (False, True), "ubar2": (True, True)}
_VARIABLE_EXPONENTS = {
    "u": lambda a, b: (0.0, b),
    "v": lambda a, b: (a, b - a),
    "z": lambda a, b: (b, 0.0),
}

BLOWUP_FACTOR = 1.0e6


class BlowUpError(RuntimeError):
    """L2 mass exceeded the blow-up guard during integration."""

    def __init__(self, t, norm, initial_norm):
        super().__init__(
            f"blow-up guard tripped at t={t:.6g}: L2 norm {norm:.3e} "
            f"exceeds {BLOWUP_FACTOR:.0e} x initial {initial_norm:.3e}"
        )
        self.t = t
        self.norm = norm
        self.initial_norm = initial_norm


@dataclass(frozen=True)
class EvolutionConfig:
    """Parameters of one integration run.

    dt must resolve the nonlinear phase at the guard frequency:
    dt * guard_frequency^2 <= 10 (the linear phase is exact, so only the
    nonlinear return trips matter).
    """

    n_points: int
    alpha: float
    beta: float
    dt: float
    t_final: float
    kind: str = "u2"
    variables: str = "u"
    length: float = 2.0 * math.pi
    n_saves: int = 11
    dealias: str = "guard"

    def __post_init__(self):
        if self.kind not in _KIND_CONJ:
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.variables not in _VARIABLE_EXPONENTS:
            raise ValueError(f"variables must be 'u', 'v' or 'z', got {self.variables!r}")
        if self.dealias != "guard":
            raise ValueError("only the guard-band dealias policy is implemented")
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        if self.n_saves < 2:
            raise ValueError("n_saves must be at least 2")
        grid = Grid(self.n_points, self.length)
        phase = self.dt * grid.guard_frequency**2
        if phase > 10.0 + 1e-12:
            raise ValueError(
                f"dt={self.dt:g} does not resolve the guard frequency "
                f"(dt * guard_freq^2 = {phase:.3g} > 10)"
            )
        steps = self.t_final / self.dt
        if abs(steps - round(steps)) > 1e-8 * max(1.0, steps):
            raise ValueError(f"dt={self.dt:g} does not divide t_final={self.t_final:g}")

    @property
    def grid(self) -> Grid:
        return Grid(self.n_points, self.length)

    @property
    def exponents(self):
        return _VARIABLE_EXPONENTS[self.variables](self.alpha, self.beta)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class Trajectory:
    config: EvolutionConfig
    times: list
    states: list
    l2_history: list = dataclass_field(default_factory=list)

    @property
    def final(self) -> SpectralField:
        return self.states[-1]


def _guard_mask(grid: Grid) -> np.ndarray:
    idx = np.arange(grid.n)
    mag = np.minimum(idx, grid.n - idx)
    return mag <= grid.guard_index


def truncate_guard(field: SpectralField) -> SpectralField:
    return SpectralField(field.grid, np.where(_guard_mask(field.grid), field.coeffs, 0.0))


def rhs(config: EvolutionConfig, state: SpectralField) -> SpectralField:
    """Nonlinear term of the configured evolution (autonomous).

    The state must be band-limited to the guard index; the result is
    truncated back to the guard band (the dealias policy)."""
    grid = state.grid
    if grid != config.grid:
        raise ValueError("state grid does not match the configuration")
    if np.any(state.coeffs[~_guard_mask(grid)] != 0.0):
        raise ValueError("state carries frequencies beyond the guard index")
    inner, outer = config.exponents
    c1, c2 = _KIND_CONJ[config.kind]
    out = weighted_product(inner, outer, state, state, conj_first=c1, conj_second=c2)
    return truncate_guard(out)


def _integrate_core(grid: Grid, u0: np.ndarray, dt: float, n_steps: int, nonlin, t0: float, save_steps):
    """Integrating-factor RK4 on raw coefficient arrays.

    nonlin(coeffs, t) -> coeffs must return guard-limited arrays."""
    L = 1j * grid.frequencies**2
    e_full = np.exp(L * dt)
    e_half = np.exp(L * (0.5 * dt))
    e_half_i = np.conj(e_half)
    e_full_i = np.conj(e_full)

    ref = max(math.sqrt(grid.length) * float(np.linalg.norm(u0)), 1e-300)
    saves = {}
    u = u0.copy()
    if 0 in save_steps:
        saves[0] = u.copy()
    for step in range(n_steps):
        t = t0 + step * dt
        g1 = nonlin(u, t)
        g2 = e_half_i * nonlin(e_half * (u + 0.5 * dt * g1), t + 0.5 * dt)
        g3 = e_half_i * nonlin(e_half * (u + 0.5 * dt * g2), t + 0.5 * dt)
        g4 = e_full_i * nonlin(e_full * (u + dt * g3), t + dt)
        u = e_full * (u + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4))
        norm = math.sqrt(grid.length) * float(np.linalg.norm(u))
        if norm > BLOWUP_FACTOR * ref:
            raise BlowUpError(t + dt, norm, ref)
        if step + 1 in save_steps:
            saves[step + 1] = u.copy()
    return saves


def _save_schedule(n_steps: int, n_saves: int):
    idx = sorted({int(round(j * n_steps / (n_saves - 1))) for j in range(n_saves)})
    return idx


def integrate(config: EvolutionConfig, initial: SpectralField) -> Trajectory:
    """Run the configured evolution from the given initial data.

    Raises BlowUpError if the L2 norm grows by the guard factor, and
    ValueError if the initial data is not guard-band-limited."""
    grid = config.grid
    if initial.grid != grid:
        raise ValueError("initial data grid does not match the configuration")
    if np.any(initial.coeffs[~_guard_mask(grid)] != 0.0):
        raise ValueError("initial data carries frequencies beyond the guard index")

    inner, outer = config.exponents
    c1, c2 = _KIND_CONJ[config.kind]
    gmask = _guard_mask(grid)

    def nonlin(coeffs, _t):
        state = SpectralField(grid, coeffs)
        out = weighted_product(inner, outer, state, state, conj_first=c1, conj_second=c2)
        return np.where(gmask, out.coeffs, 0.0)

    save_steps = _save_schedule(config.n_steps, config.n_saves)
    saves = _integrate_core(grid, initial.coeffs, config.dt, config.n_steps, nonlin, 0.0, set(save_steps))
    times = [s * config.dt for s in save_steps]
    states = [SpectralField(grid, saves[s]) for s in save_steps]
    history = [l2_norm(st) for st in states]
    return Trajectory(config, times, states, history)


# ----------------------------------------------------------------------------
# normal-form pipeline
# ----------------------------------------------------------------------------

_T_SYMBOLS = {"u2": t_symbol_u2, "uubar": t_symbol_uubar, "ubar2": t_symbol_ubar2}
_T_CACHE: dict = {}


def _t_symbol_cached(kind, alpha, beta):
    key = (kind, float(alpha), float(beta))
    sym = _T_CACHE.get(key)
    if sym is None:
        sym = _T_SYMBOLS[kind](alpha, beta)
        _T_CACHE[key] = sym
    return sym


def normal_form_h(f: SpectralField, t: float, alpha: float, beta: float, kind: str = "u2") -> SpectralField:
    """The transformed pair h(t) = T(F(t), F(t)) of the free wave F = e^{it
    d^2/dx^2-ish} f; solves the inhomogeneous linear flow forced by the
    frequency-restricted weight of the kind."""
    if kind not in _T_SYMBOLS:
        raise ValueError(f"unknown interaction kind {kind!r}")
    sym = _t_symbol_cached(kind, alpha, beta)
    big_f = free_propagate(t, f)
    return apply_bilinear(sym, big_f, big_f)


@dataclass
class Decomposition:
    times: list
    free: list
    h: list
    w: list


def decompose(trajectory: Trajectory, f: SpectralField) -> Decomposition:
    """Split a v-form trajectory into free wave + normal form + remainder.

    At each save time, free = the propagated data, h = the normal-form pair
    of the free wave, w = state - free - h.  At t = 0 this forces
    w(0) = -h(0) since free(0) = f."""
    cfg = trajectory.config
    if cfg.variables != "v":
        raise ValueError("the decomposition applies to the v-form evolution")
    free_fields, h_fields, w_fields = [], [], []
    for t, state in zip(trajectory.times, trajectory.states):
        fr = free_propagate(t, f)
        hh = normal_form_h(f, t, cfg.alpha, cfg.beta, cfg.kind)
        w_fields.append(state - fr - hh)
        free_fields.append(fr)
        h_fields.append(hh)
    return Decomposition(list(trajectory.times), free_fields, h_fields, w_fields)


def rhs_groups(
    f: SpectralField,
    h_field: SpectralField,
    w_field: SpectralField,
    t: float,
    alpha: float,
    beta: float,
):
    """The eight pieces of the remainder equation's right side (plain-square
    kind, v-form weight).

    With F the free wave at time t, v = F + h + w, and split(x) denoting the
    positive-frequency part x_+ and its complement x_0 = x - x_+, the pieces
    are ordered as:

        1: G(( F + w )_0, v + v_+)       5: 2 G(F_+, w_+)
        2: G(h_0, (h + w) + (h + w)_+)   6: G(h_+, h_+)
        3: G(h_0, F + F_+)               7: 2 G(h_+, w_+)
        4: 2 G(F_+, h_+)                 8: G(w_+, w_+)

    Their sum telescopes to G(v, v) - G(F_+, F_+), the full remainder
    forcing."""
    def g(a, b):
        return weighted_product(alpha, beta - alpha, a, b)

    big_f = free_propagate(t, f)
    v = big_f + h_field + w_field

    def pos(x):
        return sign_project("+", x)

    def low(x):
        return x - pos(x)

    v_plus = pos(v)
    hw = h_field + w_field
    n1 = g(low(big_f + w_field), v + v_plus)
    n2 = g(low(h_field), hw + pos(hw))
    n3 = g(low(h_field), big_f + pos(big_f))
    n4 = 2.0 * g(pos(big_f), pos(h_field))
    n5 = 2.0 * g(pos(big_f), pos(w_field))
    n6 = g(pos(h_field), pos(h_field))
    n7 = 2.0 * g(pos(h_field), pos(w_field))
    n8 = g(pos(w_field), pos(w_field))
    return [n1, n2, n3, n4, n5, n6, n7, n8]


def direct_w_solve(config: EvolutionConfig, f: SpectralField) -> Trajectory:
    """Integrate the remainder equation directly from w(0) = -T(f, f).

    The remainder forcing is G(v, v) - G_pair(F, F) with v = F + h + w,
    valid for every interaction kind; for the plain-square kind, summing
    the eight groups gives the same field (the group-sum consistency
    check)."""
    if config.variables != "v":
        raise ValueError("the remainder equation lives in the v-form variables")
    grid = config.grid
    if f.grid != grid:
        raise ValueError("data grid does not match the configuration")
    alpha, beta = config.alpha, config.beta
    c1, c2 = _KIND_CONJ[config.kind]
    gmask = _guard_mask(grid)

    def nonlin(coeffs, t):
        w_field = SpectralField(grid, coeffs)
        big_f = free_propagate(t, f)
        h_field = normal_form_h(f, t, alpha, beta, config.kind)
        v = big_f + h_field + w_field
        full = weighted_product(alpha, beta - alpha, v, v, conj_first=c1, conj_second=c2)
        paired = apply_pair_g_fast(config.kind, alpha, beta, big_f, big_f)
        return np.where(gmask, full.coeffs - paired.coeffs, 0.0)

    w0 = -1.0 * normal_form_h(f, 0.0, alpha, beta, config.kind)
    save_steps = _save_schedule(config.n_steps, config.n_saves)
    saves = _integrate_core(grid, w0.coeffs, config.dt, config.n_steps, nonlin, 0.0, set(save_steps))
    times = [s * config.dt for s in save_steps]
    states = [SpectralField(grid, saves[s]) for s in save_steps]
    return Trajectory(config, times, states, [l2_norm(st) for st in states])


# ----------------------------------------------------------------------------
# stability experiments
# ----------------------------------------------------------------------------

@dataclass
class LipschitzReport:
    epsilons: list
    ratios: list

    @property
    def spread(self) -> float:
        finite = [r for r in self.ratios if r > 0]
        return max(finite) / min(finite) if finite else float("inf")


def lipschitz_experiment(f: SpectralField, g: SpectralField, eps_list, config: EvolutionConfig) -> LipschitzReport:
    """Difference-quotient stability of the solution map.

    For each eps, integrates data f and f + eps*g and records
    sup_t ||u_eps(t) - u(t)||_{H^-1/2} / (eps ||g||_{H^-1/2}); a roughly
    constant ratio across decades of eps is the numerical signature of the
    Lipschitz property."""
    from .spacetime import sobolev_norm  # local import avoids a cycle

    base = integrate(config, f)
    g_norm = sobolev_norm(-0.5, g)
    if g_norm == 0:
        raise ValueError("perturbation direction has zero H^-1/2 norm")
    ratios = []
    for eps in eps_list:
        pert = integrate(config, f + float(eps) * g)
        worst = 0.0
        for su, sp in zip(base.states, pert.states):
            diff = sobolev_norm(-0.5, sp - su)
            worst = max(worst, diff / (float(eps) * g_norm))
        ratios.append(worst)
    return LipschitzReport([float(e) for e in eps_list], ratios)


@dataclass
class SubstitutionReport:
    dts: list
    sup_diffs: list


def substitution_check(z0: SpectralField, beta: float, config: EvolutionConfig) -> SubstitutionReport:
    """Compare the two equivalent routes to the rough evolution.

    Route one integrates the z-form equation and lifts each snapshot by
    <D>^beta; route two integrates the u-form equation from the lifted
    data.  The report records sup_t ||u(t) - <D>^beta z(t)||_L2 at the
    configured dt and at dt/2."""
    sups, dts = [], []
    for dt in (config.dt, 0.5 * config.dt):
        cfg_z = EvolutionConfig(
            config.n_points, config.alpha, beta, dt, config.t_final,
            kind=config.kind, variables="z", length=config.length, n_saves=config.n_saves,
        )
        cfg_u = EvolutionConfig(
            config.n_points, config.alpha, beta, dt, config.t_final,
            kind=config.kind, variables="u", length=config.length, n_saves=config.n_saves,
        )
        traj_z = integrate(cfg_z, z0)
        traj_u = integrate(cfg_u, bessel_potential(beta, z0))
        worst = 0.0
        for zu, uu in zip(traj_z.states, traj_u.states):
            worst = max(worst, l2_norm(uu - bessel_potential(beta, zu)))
        sups.append(worst)
        dts.append(dt)
    return SubstitutionReport(dts, sups)
