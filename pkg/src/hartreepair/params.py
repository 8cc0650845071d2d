"""Parameter arithmetic for the coupled Hartree system.

Everything in here is pure arithmetic over the quadruple (N, alpha, p, q):
admissibility of the exponents, the interval of usable Lebesgue indices for
the convolution estimates, existence / nonexistence classification against
the two critical lines, the four regularity regions with their integrability
thresholds, and the decay-law case selection for each component.

Boundary comparisons are strict with an absolute tolerance ``TOL`` (1e-12);
values within tolerance of a critical line are pushed to the
nonexistence/failure side, so the classifiers never report existence for a
borderline pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TOL = 1e-12

EXISTS = "ExistsH1"
NONEXIST_LOWER = "NonexistenceLowerLine"
NONEXIST_UPPER = "NonexistenceUpperLine"
OUTSIDE = "OutsideTheory"

CASE_EXPONENTIAL = "Exponential"
CASE_CRITICAL = "Critical"
CASE_ALGEBRAIC = "Algebraic"


@dataclass(frozen=True)
class ProblemParams:
    """The quadruple (N, alpha, p, q) with derived critical exponents."""

    N: int
    alpha: float
    p: float
    q: float

    def __post_init__(self):
        if self.N not in (1, 2, 3):
            raise ValueError(f"N must be 1, 2 or 3, got {self.N}")
        if not 0.0 < self.alpha < self.N:
            raise ValueError(f"alpha must lie in (0, N), got {self.alpha}")
        if self.p <= 1.0 or self.q <= 1.0:
            raise ValueError("p and q must exceed 1")

    @property
    def two_star(self) -> float:
        """Sobolev critical exponent; +inf for N = 1, 2."""
        return 2.0 * self.N / (self.N - 2) if self.N >= 3 else math.inf

    @property
    def two_star_alpha(self) -> float:
        """Upper critical exponent for p + q; +inf for N = 1, 2."""
        if self.N >= 3:
            return 2.0 * (self.N + self.alpha) / (self.N - 2)
        return math.inf

    @property
    def lower_box(self) -> float:
        """Lower admissible bound for each of p and q."""
        return max(2.0 * self.alpha / self.N, 1.0)

    @property
    def lower_sum(self) -> float:
        """Lower critical value for p + q."""
        return 2.0 * (self.N + self.alpha) / self.N


@dataclass(frozen=True)
class H1Margins:
    """Signed slacks of the five strict admissibility inequalities."""

    p_low: float
    p_high: float
    q_low: float
    q_high: float
    sum_low: float
    sum_high: float

    def all_positive(self, tol: float = TOL) -> bool:
        return all(
            m > tol
            for m in (self.p_low, self.p_high, self.q_low,
                      self.q_high, self.sum_low, self.sum_high)
        )


@dataclass(frozen=True)
class ExistenceClass:
    tag: str
    margins: H1Margins


@dataclass(frozen=True)
class ThetaInterval:
    """Open interval of admissible 1/theta1, with a canonical choice.

    ``lo < 1/theta1 < hi`` is required for the double convolution estimate;
    the interval is nonempty exactly when the exponents are admissible.  The
    canonical theta1 is the reciprocal of the interval midpoint and theta2 is
    determined by 1/theta1 + 1/theta2 = (N + alpha)/N.
    """

    lo: float
    hi: float
    theta1: float | None
    theta2: float | None

    @property
    def nonempty(self) -> bool:
        return self.theta1 is not None


@dataclass(frozen=True)
class RegularityRegion:
    """Region tag A-D and lower integrability thresholds for (u, v).

    r_bar = 1 means every exponent > 1 is admissible for the second-order
    Sobolev regularity of u; likewise h_bar for v.
    """

    region: str
    r_bar: float
    h_bar: float


@dataclass(frozen=True)
class ComponentDecay:
    """Decay law of one component: case tag plus predicted tail data.

    For the algebraic case ``exponent`` is (N - alpha)/(2 - p) and the tail
    is ~ r**(-exponent); for the exponential case the tail is
    ~ r**(-(N-1)/2) * exp(-r) and ``rate`` is -1; for the critical case the
    limit involves the constant whose (N - alpha)-th power is
    ``limit_coefficient * c_alpha * integral`` (integral of the *other*
    component's power).
    """

    case: str
    exponent: float | None = None
    rate: float | None = None
    limit_coefficient: float | None = None


@dataclass(frozen=True)
class DecayCase:
    case_u: ComponentDecay
    case_v: ComponentDecay
    extra_ok: bool
    extra_threshold: float | None = None


def check_h1(params: ProblemParams) -> tuple[bool, H1Margins]:
    """Evaluate the strict admissibility inequalities with their slacks."""
    margins = H1Margins(
        p_low=params.p - params.lower_box,
        p_high=params.two_star - params.p,
        q_low=params.q - params.lower_box,
        q_high=params.two_star - params.q,
        sum_low=(params.p + params.q) - params.lower_sum,
        sum_high=params.two_star_alpha - (params.p + params.q),
    )
    return margins.all_positive(), margins


def theta_interval(params: ProblemParams) -> ThetaInterval:
    """Admissible open interval for 1/theta1, empty on failure."""
    N, a, p, q = params.N, params.alpha, params.p, params.q
    lo = max(a / N, p * (N - 2) / (2 * N), (N + a) / N - q / 2)
    hi = min(1.0, p / 2, (N + a) / N - q * (N - 2) / (2 * N))
    if hi - lo <= TOL:
        return ThetaInterval(lo=lo, hi=hi, theta1=None, theta2=None)
    mid = 0.5 * (lo + hi)
    theta1 = 1.0 / mid
    theta2 = 1.0 / ((N + a) / N - mid)
    return ThetaInterval(lo=lo, hi=hi, theta1=theta1, theta2=theta2)


def classify_existence(params: ProblemParams) -> ExistenceClass:
    """Existence / nonexistence classification against the critical lines."""
    ok, margins = check_h1(params)
    if ok:
        return ExistenceClass(tag=EXISTS, margins=margins)
    s = params.p + params.q
    if s * params.N <= 2 * (params.N + params.alpha) + TOL:
        return ExistenceClass(tag=NONEXIST_LOWER, margins=margins)
    if params.N >= 3 and s * (params.N - 2) >= 2 * (params.N + params.alpha) - TOL:
        return ExistenceClass(tag=NONEXIST_UPPER, margins=margins)
    return ExistenceClass(tag=OUTSIDE, margins=margins)


def classify_regularity(params: ProblemParams) -> RegularityRegion:
    """Assign the regularity region and integrability thresholds.

    The four regions partition the admissible box; exactly one tag applies.
    Raises if the exponents are not admissible, since the thresholds are
    only meaningful there.
    """
    ok, _ = check_h1(params)
    if not ok:
        raise ValueError("regularity classification requires admissible (p, q)")
    N, a, p, q = params.N, params.alpha, params.p, params.q
    kappa = N / (N - a)          # integrability pivot
    split = 2 * N / (2 * N - a)  # small-exponent sub-case split

    if q >= a * p / N + 1 and q <= (N / a) * (p - 1):
        return RegularityRegion("A", 1.0, 1.0)

    if p < kappa and q < kappa:
        if p < split:
            r = (2 - p) * N / (N - a)
            h = (2 - p) * q * N / ((2 * q + p - 2) * N - 2 * q * a)
        elif q < split:
            r = (2 - q) * p * N / ((2 * p + q - 2) * N - 2 * p * a)
            h = (2 - q) * N / (N - a)
        else:
            r = p * N / (p * (2 * N - a) - N)
            h = q * N / (q * (2 * N - a) - N)
        return RegularityRegion("B", r, h)

    if q >= kappa and q > (N / a) * (p - 1):
        if (2 - p) / (N - a) <= p * q / (N + a * q):
            r = p * q * N / ((p * q + p - 1) * N - q * a)
            h = 1.0
        else:
            r = (2 - p) * N / (N - a)
            h = (2 - p) * q * N / ((2 * q + p - 2) * N - 2 * q * a)
        return RegularityRegion("C", r, h)

    if q < a * p / N + 1 and p >= kappa:
        if (2 - q) / (N - a) < p * q / (N + a * p):
            r = 1.0
            h = p * q * N / ((p * q + q - 1) * N - p * a)
        else:
            r = (2 - q) * p * N / ((2 * p + q - 2) * N - 2 * p * a)
            h = (2 - q) * N / (N - a)
        return RegularityRegion("D", r, h)

    raise AssertionError("admissible (p, q) escaped regions A-D")


def _component_decay(own: float, other: float, N: int, alpha: float) -> ComponentDecay:
    if own > 2 + TOL:
        return ComponentDecay(case=CASE_EXPONENTIAL, rate=-1.0)
    if own >= 2 - TOL:
        # critical case: limit constant coefficient 2*other/(p+q), as stated
        # for the system's decay theorem
        return ComponentDecay(
            case=CASE_CRITICAL,
            limit_coefficient=2 * other / (own + other),
        )
    return ComponentDecay(
        case=CASE_ALGEBRAIC,
        exponent=(N - alpha) / (2 - own),
        limit_coefficient=2 * own / (own + other),
    )


def decay_case(params: ProblemParams) -> DecayCase:
    """Per-component decay law plus the extra smallness conditions.

    ``extra_ok`` is False when the decay theorem imposes an additional lower
    bound on min(p, q) (only relevant when neither exponent exceeds 2) and
    that bound fails; the decay prediction is then not asserted.
    """
    ok, _ = check_h1(params)
    if not ok:
        raise ValueError("decay classification requires admissible (p, q)")
    N, a, p, q = params.N, params.alpha, params.p, params.q
    case_u = _component_decay(p, q, N, a)
    case_v = _component_decay(q, p, N, a)

    mx, mn = max(p, q), min(p, q)
    extra_ok = True
    threshold = None
    if abs(mx - 2) <= TOL and mn < 2 - TOL:
        threshold = max(2 * N / (2 * N - a), 2 * (a + 1) / (N + 1))
        extra_ok = mn > threshold + TOL
    elif mx < 2 - TOL:
        threshold = 2 * N / (2 * N - a)
        extra_ok = mn > threshold + TOL
    return DecayCase(case_u=case_u, case_v=case_v,
                     extra_ok=extra_ok, extra_threshold=threshold)
