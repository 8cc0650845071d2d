"""Energy, Nehari constraint and residual for the coupled pair.

For a pair w = (u, v) on one grid the code evaluates

    D(u, v)   = integral (I_alpha * |u|^p) |v|^q,
    I(u, v)   = ||w||_E^2 / 2 - 2 D / (p + q),
    P(u, v)   = ||w||_E^2 - 2 D,

where ||w||_E^2 is the sum of the two H^1 norms squared.  P is the radial
derivative of I along the ray t -> t w, and the constraint set {P = 0}
carries the ground states.  Every nonzero pair projects onto it with the
closed-form scale

    tbar = [ ||w||_E^2 / (2 D) ]^{1/(p+q-2)},

which also maximizes t -> I(t w).  The strong-form residual pairs with test
functions exactly like the first variation of I, because the Dirichlet form
and the spectral Laplacian share one multiplier (see grid module).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, h1_norm_sq, inner, integrate, laplacian
from .params import ProblemParams
from .riesz import RieszPlan, get_plan, riesz_apply

D_FLOOR = 1e-300


class DegeneratePairError(ValueError):
    """Raised when the interaction integral underflows to nothing."""


@dataclass
class StatePair:
    u: Field
    v: Field

    def __post_init__(self):
        if self.u.spec != self.v.spec:
            raise ValueError("components live on different grids")

    @property
    def spec(self) -> GridSpec:
        return self.u.spec

    def scaled(self, t: float) -> "StatePair":
        return StatePair(
            Field(self.spec, t * self.u.values),
            Field(self.spec, t * self.v.values),
        )

    def e_norm_sq(self) -> float:
        return h1_norm_sq(self.u) + h1_norm_sq(self.v)


@dataclass(frozen=True)
class EnergyBreakdown:
    e_norm_sq: float
    d_interaction: float
    energy_I: float
    nehari_P: float

    @staticmethod
    def k_coefficient(params: ProblemParams) -> float:
        """1/2 - 1/(p+q), the constrained-energy prefactor."""
        return 0.5 - 1.0 / (params.p + params.q)


def _plan_for(w: StatePair, params: ProblemParams, plan: RieszPlan | None) -> RieszPlan:
    if plan is not None:
        if plan.spec != w.spec or plan.alpha != params.alpha:
            raise ValueError("plan does not match the pair/parameters")
        return plan
    return get_plan(w.spec, params.alpha)


def interaction(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> float:
    """D(u, v), nonnegative; zero only for a vanishing component."""
    plan = _plan_for(w, params, plan)
    up = Field(w.spec, np.abs(w.u.values) ** params.p)
    conv = riesz_apply(plan, up)
    return integrate(Field(w.spec, conv.values * np.abs(w.v.values) ** params.q))


def energy(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> EnergyBreakdown:
    e = w.e_norm_sq()
    d = interaction(w, params, plan)
    s = params.p + params.q
    return EnergyBreakdown(
        e_norm_sq=e,
        d_interaction=d,
        energy_I=0.5 * e - 2.0 * d / s,
        nehari_P=e - 2.0 * d,
    )


def nehari_scale(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> float:
    """Unique t > 0 placing t*w on the constraint set."""
    e = w.e_norm_sq()
    d = interaction(w, params, plan)
    if d <= D_FLOOR:
        raise DegeneratePairError("degenerate pair: interaction integral vanished")
    return float((e / (2.0 * d)) ** (1.0 / (params.p + params.q - 2.0)))


def project_nehari(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> tuple[StatePair, float]:
    t = nehari_scale(w, params, plan)
    return w.scaled(t), t


def _signed_power(values: np.ndarray, expo: float) -> np.ndarray:
    # |u|^{p-2} u, continuously extended by 0 at u = 0 for 1 < p < 2
    return np.sign(values) * np.abs(values) ** (expo - 1.0)


def euler_residual(
    w: StatePair, params: ProblemParams, plan: RieszPlan | None = None
) -> tuple[StatePair, float]:
    """Strong-form residual fields and the scalar residual.

    R_u = (-Lap + 1) u - (2p/(p+q)) (I_alpha * |v|^q) |u|^{p-2} u and the
    symmetric R_v; the scalar is the joint L2 norm of (R_u, R_v) divided by
    the ambient norm of w.
    """
    plan = _plan_for(w, params, plan)
    p, q = params.p, params.q
    s = p + q
    conv_vq = riesz_apply(plan, Field(w.spec, np.abs(w.v.values) ** q))
    conv_up = riesz_apply(plan, Field(w.spec, np.abs(w.u.values) ** p))
    r_u = (
        -laplacian(w.u).values
        + w.u.values
        - (2.0 * p / s) * conv_vq.values * _signed_power(w.u.values, p)
    )
    r_v = (
        -laplacian(w.v).values
        + w.v.values
        - (2.0 * q / s) * conv_up.values * _signed_power(w.v.values, q)
    )
    res = StatePair(Field(w.spec, r_u), Field(w.spec, r_v))
    l2 = np.sqrt(inner(res.u, res.u) + inner(res.v, res.v))
    e = w.e_norm_sq()
    scalar = float(l2 / np.sqrt(e)) if e > 0 else 0.0
    return res, scalar


def projected_energy_closed_form(w: StatePair, params: ProblemParams) -> float:
    """I at the projected pair, straight from the scale formula."""
    e = w.e_norm_sq()
    d = interaction(w, params)
    if d <= D_FLOOR:
        raise DegeneratePairError("degenerate pair: interaction integral vanished")
    s = params.p + params.q
    k = EnergyBreakdown.k_coefficient(params)
    return float(k * (e / (2.0 * d) ** (2.0 / s)) ** (s / (s - 2.0)))
