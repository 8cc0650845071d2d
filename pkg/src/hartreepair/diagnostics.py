"""Quantitative checks of the theory's predictions on a computed pair.

Each diagnostic is a pure measurement; none of them asserts.  What they
quantify, for a candidate ground state (u, v) of the coupled system:

* ``pohozaev_residual``: relative violation of the dilation identity

      (N-2)/2 int |grad u|^2 + |grad v|^2  +  N/2 int u^2 + v^2
          = 2 (N + alpha)/(p + q) * D(u, v),

  which holds for genuine solutions and detects discretization error or
  outright non-solutions.

* ``symmetry_deviation``: relative L2 distance of a field from its radial
  average about its own peak, computed over exact torus-distance classes so
  a perfectly radial sample scores 0 to rounding.

* ``fit_decay``: tail fits against the predicted decay laws.  Exponential
  components (exponent above 2) are fit as log(u * r^{(N-1)/2}) ~ rate * r
  with predicted rate -1; algebraic components (exponent below 2) as
  log u ~ slope * log r with predicted slope -(N - alpha)/(2 - exponent),
  plus the limit-constant comparison u^{2-p} r^{N-alpha} ->
  (2p/(p+q)) c_alpha int |v|^q.  Borderline components (exponent 2) report
  the window variation of the compensated product whose limit the theory
  asserts, with the inner integral done by adaptive quadrature.

* ``hls_audit``: finiteness/stability of the convolution-inequality ratios
  at the canonical Lebesgue indices.

Fit windows default to [0.35 L, 0.7 L]: far enough out to be asymptotic,
short of the zone polluted by periodization.  Window sensitivity is the
caller's job (the report runs three staggered windows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .grid import (
    Field,
    _min_image_offsets,
    dirichlet_energy,
    inner,
    integrate,
    lp_norm,
    radial_profile,
)
from .functional import StatePair, interaction
from .params import (
    CASE_ALGEBRAIC,
    CASE_CRITICAL,
    CASE_EXPONENTIAL,
    ProblemParams,
    decay_case,
    theta_interval,
)
from .riesz import RieszPlan, get_plan, riesz_apply, riesz_constant

DEFAULT_WINDOW = (0.35, 0.70)
MIN_FIT_BINS = 10


def pohozaev_residual(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> float:
    """Relative violation of the dilation identity; 0 for the zero pair."""
    N = params.N
    lhs = 0.5 * (N - 2) * (dirichlet_energy(w.u) + dirichlet_energy(w.v)) + 0.5 * N * (
        inner(w.u, w.u) + inner(w.v, w.v)
    )
    rhs = 2.0 * (N + params.alpha) / (params.p + params.q) * interaction(
        w, params, plan
    )
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30)


def _half_grid_d2(spec, center2: tuple[int, ...]) -> np.ndarray:
    """Exact squared torus distances, in half-cell units, to a half-grid
    center (doubled indices; even entries are nodes, odd entries are cell
    corners between nodes)."""
    M = spec.M
    d2 = np.zeros(spec.shape, dtype=np.int64)
    for ax in range(spec.N):
        delta = (2 * np.arange(M) - center2[ax]) % (2 * M)
        delta = np.where(delta >= M, delta - 2 * M, delta)
        d2 = d2 + (delta**2).reshape(
            (1,) * ax + (M,) + (1,) * (spec.N - ax - 1)
        )
    return d2


def radial_average_field(f: Field, center2: tuple[int, ...]) -> Field:
    """Replace each value by the mean over its exact distance class about a
    half-grid center (doubled indices)."""
    d2 = _half_grid_d2(f.spec, center2).ravel()
    flat = f.values.ravel()
    counts = np.bincount(d2)
    sums = np.bincount(d2, weights=flat)
    means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return Field(f.spec, means[d2].reshape(f.spec.shape))


def symmetry_deviation(f: Field) -> float:
    """Relative L2 distance from the best radial average about the peak.

    The candidate centers are the argmax node and the half-grid points
    around it, so both node-centered and cell-corner-centered radial fields
    score zero to rounding.  Whole-cell translations change nothing: the
    candidates and distance classes shift along.
    """
    norm = float(np.sqrt(np.sum(f.values**2)))
    if norm == 0.0:
        raise ValueError("symmetry deviation of the zero field is undefined")
    peak = np.unravel_index(int(np.argmax(np.abs(f.values))), f.spec.shape)
    best = math.inf
    offsets = (-1, 0, 1)
    for shift in np.ndindex(*((3,) * f.spec.N)):
        center2 = tuple(2 * k + offsets[s] for k, s in zip(peak, shift))
        avg = radial_average_field(f, center2)
        dev = float(np.sqrt(np.sum((f.values - avg.values) ** 2)) / norm)
        best = min(best, dev)
    return best


@dataclass
class DecayFit:
    component: str
    case: str
    window: tuple[float, float]
    n_bins: int
    fitted: float
    predicted: float
    r_squared: float
    limit_estimate: float | None
    limit_predicted: float | None
    theory_applicable: bool


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and R^2."""
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def _critical_compensator(a_pow: float, nu: float, radii: np.ndarray) -> np.ndarray:
    """exp of the WKB phase integral for the borderline decay case.

    a_pow is the constant whose nu-th root locates the turning point; the
    integrand sqrt(1 - a_pow / s^nu) is clamped to [0, 1].
    """
    a_len = a_pow ** (1.0 / nu)

    def integrand(s):
        return math.sqrt(min(1.0, max(0.0, 1.0 - a_pow / s**nu)))

    out = np.empty_like(radii)
    for i, r in enumerate(radii):
        if r <= a_len:
            out[i] = 0.0
            continue
        val, _ = quad(integrand, a_len, r, limit=200)
        out[i] = val
    return np.exp(out)


def _fit_component(
    label: str,
    comp_case,
    own: float,
    other_integral: float,
    prof_r: np.ndarray,
    prof_val: np.ndarray,
    params: ProblemParams,
    window: tuple[float, float],
    applicable: bool,
) -> DecayFit:
    r_lo, r_hi = window
    sel = (prof_r >= r_lo) & (prof_r <= r_hi)
    r = prof_r[sel]
    vals = prof_val[sel]
    if r.size < MIN_FIT_BINS:
        raise ValueError(
            f"decay window [{r_lo:g}, {r_hi:g}] keeps {r.size} bins; "
            f"need at least {MIN_FIT_BINS}"
        )
    if np.any(vals <= 0):
        raise ValueError(f"component {label} is nonpositive inside the fit window")

    N, alpha = params.N, params.alpha
    c_alpha = riesz_constant(N, alpha)
    coeff = 2.0 * own / (params.p + params.q)

    if comp_case.case == CASE_EXPONENTIAL:
        y = np.log(vals * r ** ((N - 1) / 2.0))
        slope, _, r2 = _linear_fit(r, y)
        limit_est = float(np.median(vals * r ** ((N - 1) / 2.0) * np.exp(r)))
        return DecayFit(
            component=label,
            case=comp_case.case,
            window=window,
            n_bins=int(r.size),
            fitted=slope,
            predicted=-1.0,
            r_squared=r2,
            limit_estimate=limit_est,
            limit_predicted=None,
            theory_applicable=applicable,
        )

    if comp_case.case == CASE_ALGEBRAIC:
        slope, _, r2 = _linear_fit(np.log(r), np.log(vals))
        limit_est = float(np.median(vals ** (2.0 - own) * r ** (N - alpha)))
        limit_pred = coeff * c_alpha * other_integral
        return DecayFit(
            component=label,
            case=comp_case.case,
            window=window,
            n_bins=int(r.size),
            fitted=slope,
            predicted=-(N - alpha) / (2.0 - own),
            r_squared=r2,
            limit_estimate=limit_est,
            limit_predicted=limit_pred,
            theory_applicable=applicable,
        )

    # borderline component: compensated product should flatten to a limit
    a_pow = comp_case.limit_coefficient * c_alpha * other_integral
    comp = vals * r ** ((N - 1) / 2.0) * _critical_compensator(a_pow, N - alpha, r)
    med = float(np.median(comp))
    variation = float((np.max(comp) - np.min(comp)) / (abs(med) + 1e-30))
    return DecayFit(
        component=label,
        case=comp_case.case,
        window=window,
        n_bins=int(r.size),
        fitted=variation,
        predicted=0.0,
        r_squared=1.0,
        limit_estimate=med,
        limit_predicted=a_pow,
        theory_applicable=applicable,
    )


def fit_decay(
    w: StatePair,
    params: ProblemParams,
    window: tuple[float, float] | None = None,
) -> tuple[DecayFit, DecayFit]:
    """Tail fits for both components on one radial window (absolute radii)."""
    spec = w.spec
    if window is None:
        window = (DEFAULT_WINDOW[0] * spec.L, DEFAULT_WINDOW[1] * spec.L)
    r_lo, r_hi = window
    if not 0.0 <= r_lo < r_hi <= spec.L:
        raise ValueError("fit window must satisfy 0 <= r_lo < r_hi <= L")

    dc = decay_case(params)
    int_vq = integrate(Field(spec, np.abs(w.v.values) ** params.q))
    int_up = integrate(Field(spec, np.abs(w.u.values) ** params.p))

    def profile_of(f: Field):
        center = np.unravel_index(int(np.argmax(np.abs(f.values))), spec.shape)
        prof = radial_profile(f, center)
        return prof.r_node_mean, prof.mean

    ru, vu = profile_of(w.u)
    rv, vv = profile_of(w.v)
    fit_u = _fit_component(
        "u", dc.case_u, params.p, int_vq, ru, vu, params, window, dc.extra_ok
    )
    fit_v = _fit_component(
        "v", dc.case_v, params.q, int_up, rv, vv, params, window, dc.extra_ok
    )
    return fit_u, fit_v


@dataclass
class HLSAudit:
    theta1: float
    theta2: float
    pair_ratio: float
    conv_ratio: float
    norm_u: float
    norm_v: float


def hls_audit(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> HLSAudit:
    """Convolution-inequality ratios at the canonical Lebesgue indices."""
    iv = theta_interval(params)
    if not iv.nonempty:
        raise ValueError("no admissible Lebesgue indices for these exponents")
    t1, t2 = iv.theta1, iv.theta2
    norm_u = lp_norm(w.u, t1 * params.p)
    norm_v = lp_norm(w.v, t2 * params.q)
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("degenerate pair: a component vanishes")
    d = interaction(w, params, plan)
    pair_ratio = d / (norm_u**params.p * norm_v**params.q)

    # smoothing inequality for |u|^p at index s = theta1 (inside (1, N/alpha))
    if plan is None:
        plan = get_plan(w.spec, params.alpha)
    s = t1
    up = Field(w.spec, np.abs(w.u.values) ** params.p)
    conv = riesz_apply(plan, up)
    target = params.N * s / (params.N - params.alpha * s)
    conv_ratio = lp_norm(conv, target) / lp_norm(up, s)
    return HLSAudit(
        theta1=t1,
        theta2=t2,
        pair_ratio=float(pair_ratio),
        conv_ratio=float(conv_ratio),
        norm_u=float(norm_u),
        norm_v=float(norm_v),
    )
