"""Ground-state computation by constrained Sobolev-gradient descent.

The iteration keeps every iterate on the constraint set {P = 0}:

    1. strong-form residual (R_u, R_v) at the current pair,
    2. preconditioned direction g = (-Lap + 1)^{-1} (R_u, R_v), i.e. the
       gradient in the ambient inner product, which keeps the usable step
       size mesh-independent,
    3. trial pair = Nehari projection of w - tau * g, with tau halved until
       the projected energy does not increase (at most 30 halvings),
    4. on a fixed cadence, the pair is replaced by the symmetric decreasing
       rearrangement of its absolute values, reprojected, and kept only if
       that does not raise the energy by more than 1e-12 (guards against
       rearrangement discretization error).

Stopping is on the scalar residual ||(R_u, R_v)||_2 / ||w||_E, which
certifies that the pair satisfies the system pointwise up to tolerance.
Parameters on or beyond the critical nonexistence lines are refused unless
explicitly forced.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .functional import (
    DegeneratePairError,
    EnergyBreakdown,
    StatePair,
)
from .grid import Field, GridSpec, h1_norm_sq, helmholtz_inverse, integrate, laplacian
from .params import EXISTS, ProblemParams, classify_existence
from .rearrange import schwarz
from .riesz import RieszPlan, get_plan, riesz_apply

MAX_HALVINGS = 30
SYMMETRIZE_SLACK = 1e-12


class NonexistenceRefusedError(RuntimeError):
    """Solve refused: parameters sit on/beyond a critical line (or outside
    the admissible box) and force was not set."""


class StagnationError(RuntimeError):
    """Backtracking could not find a non-increasing step."""

    def __init__(self, message: str, last: StatePair):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class GaussianInit:
    widths: tuple[float, ...] = (1.0,)
    centers: tuple[tuple[float, ...], ...] = ()
    amplitudes: tuple[float, ...] = (1.0,)


@dataclass(frozen=True)
class RandomInit:
    n_bumps: int = 4


@dataclass
class SolveConfig:
    params: ProblemParams
    spec: GridSpec
    init: GaussianInit | RandomInit = field(default_factory=GaussianInit)
    seed: int = 0
    step0: float = 0.5
    tol_residual: float = 1e-6
    max_iters: int = 5000
    symmetrize_every: int = 10
    force: bool = False

    def __post_init__(self):
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if not 0.0 < self.step0 <= 2.0:
            raise ValueError("step0 must lie in (0, 2]")
        if self.symmetrize_every < 0:
            raise ValueError("symmetrize_every must be >= 0")
        if self.spec.N != self.params.N:
            raise ValueError("grid and parameter dimensions disagree")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    history_I: list[float]
    history_residual: list[float]
    history_t: list[float]
    final_energy: EnergyBreakdown
    c_level: float
    wall_time_s: float


@dataclass
class _Work:
    """Per-iteration scratch shared between the residual and the step."""

    plan: RieszPlan
    e: float = 0.0
    d: float = 0.0
    res_u: np.ndarray | None = None
    res_v: np.ndarray | None = None
    scalar_residual: float = 0.0


def _gaussian_field(spec: GridSpec, init: GaussianInit) -> Field:
    coords = spec.coords()
    centers = init.centers if init.centers else ((0.0,) * spec.N,)
    reps = max(len(init.widths), len(centers), len(init.amplitudes))
    vals = np.zeros(spec.shape)
    for i in range(reps):
        w = init.widths[i % len(init.widths)]
        c = centers[i % len(centers)]
        a = init.amplitudes[i % len(init.amplitudes)]
        d2 = sum((x - ci) ** 2 for x, ci in zip(coords, c))
        vals += a * np.exp(-d2 / w)
    return Field(spec, vals)


def _random_field(spec: GridSpec, rng: np.random.Generator, n_bumps: int) -> Field:
    coords = spec.coords()
    vals = np.zeros(spec.shape)
    for _ in range(n_bumps):
        w = rng.uniform(0.5, 2.0)
        a = rng.uniform(0.3, 1.0)
        c = rng.uniform(-spec.L / 3, spec.L / 3, size=spec.N)
        d2 = sum((x - ci) ** 2 for x, ci in zip(coords, c))
        vals += a * np.exp(-d2 / w)
    return Field(spec, vals)


def initialize(cfg: SolveConfig) -> StatePair:
    """Positive starting pair; refuses inadmissible parameters unless forced."""
    tag = classify_existence(cfg.params).tag
    if tag != EXISTS and not cfg.force:
        raise NonexistenceRefusedError(
            f"refused: critical/nonexistence parameters ({tag})"
        )
    if isinstance(cfg.init, GaussianInit):
        f = _gaussian_field(cfg.spec, cfg.init)
        return StatePair(f, Field(cfg.spec, f.values.copy()))
    rng = np.random.default_rng(cfg.seed)
    return StatePair(
        _random_field(cfg.spec, rng, cfg.init.n_bumps),
        _random_field(cfg.spec, rng, cfg.init.n_bumps),
    )


def _interaction_raw(work: _Work, u: np.ndarray, v: np.ndarray, params) -> float:
    spec = work.plan.spec
    up = Field(spec, np.abs(u) ** params.p)
    conv = riesz_apply(work.plan, up)
    return integrate(Field(spec, conv.values * np.abs(v) ** params.q))


def _project_raw(
    work: _Work, u: np.ndarray, v: np.ndarray, params: ProblemParams
) -> tuple[np.ndarray, np.ndarray, float, float, float, float]:
    """Project raw arrays onto the constraint; returns scaled arrays and
    (t, e, d, I) of the projected pair."""
    spec = work.plan.spec
    e = h1_norm_sq(Field(spec, u)) + h1_norm_sq(Field(spec, v))
    d = _interaction_raw(work, u, v, params)
    if d <= 1e-300:
        raise DegeneratePairError("degenerate pair: interaction integral vanished")
    s = params.p + params.q
    t = (e / (2.0 * d)) ** (1.0 / (s - 2.0))
    e_p = t * t * e
    d_p = t**s * d
    energy_i = 0.5 * e_p - 2.0 * d_p / s
    return t * u, t * v, t, e_p, d_p, energy_i


def _residual(work: _Work, w: StatePair, params: ProblemParams):
    """Fill scratch with energies, residual fields and the scalar residual."""
    spec = w.spec
    p, q = params.p, params.q
    s = p + q
    conv_vq = riesz_apply(work.plan, Field(spec, np.abs(w.v.values) ** q))
    conv_up = riesz_apply(work.plan, Field(spec, np.abs(w.u.values) ** p))
    work.d = integrate(Field(spec, conv_up.values * np.abs(w.v.values) ** q))
    work.e = w.e_norm_sq()
    ru = (
        -laplacian(w.u).values
        + w.u.values
        - (2.0 * p / s) * conv_vq.values * np.sign(w.u.values) * np.abs(w.u.values) ** (p - 1)
    )
    rv = (
        -laplacian(w.v).values
        + w.v.values
        - (2.0 * q / s) * conv_up.values * np.sign(w.v.values) * np.abs(w.v.values) ** (q - 1)
    )
    work.res_u, work.res_v = ru, rv
    h = spec.h**spec.N
    l2 = np.sqrt(h * (np.sum(ru * ru) + np.sum(rv * rv)))
    work.scalar_residual = float(l2 / np.sqrt(work.e))


def step(
    w: StatePair,
    cfg: SolveConfig,
    state: _Work,
    iteration: int | None = None,
) -> tuple[StatePair, float, float]:
    """One accepted descent move from an on-constraint pair.

    Returns (new pair, its energy, projection scale of the accepted trial).
    Raises StagnationError after MAX_HALVINGS failed halvings.
    """
    params = cfg.params
    spec = w.spec
    if state.res_u is None:
        _residual(state, w, params)
    s = params.p + params.q
    i_current = 0.5 * state.e - 2.0 * state.d / s

    gu = helmholtz_inverse(Field(spec, state.res_u)).values
    gv = helmholtz_inverse(Field(spec, state.res_v)).values

    tau = cfg.step0
    accepted = None
    for _ in range(MAX_HALVINGS + 1):
        try:
            u2, v2, t, e_p, d_p, i_new = _project_raw(
                state, w.u.values - tau * gu, w.v.values - tau * gv, params
            )
        except DegeneratePairError:
            tau *= 0.5
            continue
        if i_new <= i_current:
            accepted = (u2, v2, t, i_new)
            break
        tau *= 0.5
    if accepted is None:
        raise StagnationError("stagnation: no non-increasing step found", w)
    u2, v2, t, i_new = accepted
    w_new = StatePair(Field(spec, u2), Field(spec, v2))

    if cfg.symmetrize_every and iteration and iteration % cfg.symmetrize_every == 0:
        su = schwarz(Field(spec, np.abs(w_new.u.values)))
        sv = schwarz(Field(spec, np.abs(w_new.v.values)))
        try:
            u3, v3, t3, _, _, i_sym = _project_raw(
                state, su.values, sv.values, params
            )
        except DegeneratePairError:
            i_sym = np.inf
        if i_sym <= i_new + SYMMETRIZE_SLACK:
            w_new = StatePair(Field(spec, u3), Field(spec, v3))
            i_new, t = i_sym, t3
    state.res_u = state.res_v = None  # residual no longer matches the pair
    return w_new, i_new, t


def solve(
    cfg: SolveConfig, initial: StatePair | None = None
) -> tuple[StatePair, SolveReport]:
    """Iterate to the ground state; non-convergence is a report flag.

    ``initial`` overrides the configured initialization (e.g. to warm-start
    a fine grid from a coarse solution); the admissibility guard applies
    either way.
    """
    t_start = time.perf_counter()
    params = cfg.params
    if initial is None:
        w = initialize(cfg)
    else:
        tag = classify_existence(params).tag
        if tag != EXISTS and not cfg.force:
            raise NonexistenceRefusedError(
                f"refused: critical/nonexistence parameters ({tag})"
            )
        if initial.spec != cfg.spec:
            raise ValueError("initial pair lives on a different grid")
        w = initial

    work = _Work(plan=get_plan(cfg.spec, params.alpha))
    u0, v0, t, _, _, _ = _project_raw(work, w.u.values, w.v.values, params)
    w = StatePair(Field(cfg.spec, u0), Field(cfg.spec, v0))

    hist_i: list[float] = []
    hist_res: list[float] = []
    hist_t: list[float] = []
    converged = False
    iterations = 0

    for it in range(1, cfg.max_iters + 1):
        _residual(work, w, params)
        s = params.p + params.q
        hist_i.append(0.5 * work.e - 2.0 * work.d / s)
        hist_res.append(work.scalar_residual)
        hist_t.append(t)
        if work.scalar_residual <= cfg.tol_residual:
            converged = True
            iterations = it - 1
            break
        w, _, t = step(w, cfg, work, iteration=it)
        iterations = it

    final_e = w.e_norm_sq()
    final_d = _interaction_raw(work, w.u.values, w.v.values, params)
    s = params.p + params.q
    final = EnergyBreakdown(
        e_norm_sq=final_e,
        d_interaction=final_d,
        energy_I=0.5 * final_e - 2.0 * final_d / s,
        nehari_P=final_e - 2.0 * final_d,
    )
    report = SolveReport(
        converged=converged,
        iterations=iterations,
        history_I=hist_i,
        history_residual=hist_res,
        history_t=hist_t,
        final_energy=final,
        c_level=final.energy_I,
        wall_time_s=time.perf_counter() - t_start,
    )
    return w, report
