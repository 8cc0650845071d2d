"""Diagnostics tests: Pohozaev, symmetry score, decay fits, HLS ratios."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from hartreepair.diagnostics import (
    DecayFit,
    _critical_compensator,
    fit_decay,
    hls_audit,
    pohozaev_residual,
    symmetry_deviation,
)
from hartreepair.functional import StatePair
from hartreepair.grid import Field, GridSpec
from hartreepair.params import ProblemParams
from hartreepair.riesz import riesz_constant


def test_pohozaev_zero_pair():
    spec = GridSpec(N=3, L=4.0, M=16)
    w = StatePair(Field.full(spec, 0.0), Field.full(spec, 0.0))
    pr = ProblemParams(N=3, alpha=2.0, p=2.0, q=2.0)
    assert pohozaev_residual(w, pr) == 0.0


def test_pohozaev_order_one_for_non_solution():
    spec = GridSpec(N=3, L=6.0, M=16)
    r2 = spec.radius_sq()
    w = StatePair(Field(spec, np.exp(-r2)), Field(spec, np.exp(-0.5 * r2)))
    pr = ProblemParams(N=3, alpha=2.0, p=2.0, q=2.0)
    res = pohozaev_residual(w, pr)
    assert res > 0.05  # a random pair is far from satisfying the identity


def test_pohozaev_sign_flip_invariance():
    spec = GridSpec(N=3, L=6.0, M=16)
    r2 = spec.radius_sq()
    pr = ProblemParams(N=3, alpha=2.0, p=2.0, q=2.0)
    u = Field(spec, np.exp(-r2))
    v = Field(spec, np.exp(-0.7 * r2))
    base = pohozaev_residual(StatePair(u, v), pr)
    flipped = pohozaev_residual(
        StatePair(Field(spec, -u.values), v), pr
    )
    assert flipped == pytest.approx(base, rel=1e-14)


def test_symmetry_deviation_radial_gaussian():
    spec = GridSpec(N=2, L=8.0, M=64)
    f = Field.from_function(spec, lambda x, y: np.exp(-(x**2 + y**2)))
    assert symmetry_deviation(f) <= 1e-12


def test_symmetry_deviation_zero_field_rejected():
    spec = GridSpec(N=1, L=4.0, M=32)
    with pytest.raises(ValueError):
        symmetry_deviation(Field.full(spec, 0.0))


def test_symmetry_deviation_grows_with_odd_perturbation():
    spec = GridSpec(N=2, L=8.0, M=64)
    x, y = spec.coords()
    base = np.exp(-(x**2 + y**2))
    odd = x * np.exp(-(x**2 + y**2))
    scores = [
        symmetry_deviation(Field(spec, base + amp * odd))
        for amp in (0.01, 0.05, 0.2)
    ]
    assert scores[0] < scores[1] < scores[2]


def test_symmetry_deviation_translation_covariant():
    spec = GridSpec(N=2, L=8.0, M=64)
    x, y = spec.coords()
    vals = np.exp(-(x**2 + y**2)) + 0.05 * x * np.exp(-(x**2 + y**2))
    f = Field(spec, vals)
    g = Field(spec, np.roll(vals, (7, -11), axis=(0, 1)))
    assert symmetry_deviation(g) == pytest.approx(symmetry_deviation(f), abs=1e-12)


def _planted_pair(spec, tail_u, tail_v):
    # plant about a node so the profile center matches the field center
    mid = spec.axis_coords()[spec.M // 2]
    r2 = sum((c - mid) ** 2 for c in spec.coords())
    r = np.maximum(np.sqrt(r2), spec.h)
    return StatePair(Field(spec, tail_u(r)), Field(spec, tail_v(r)))


def test_fit_decay_recovers_planted_power_tail():
    # u ~ r^{-2}: the algebraic prediction for N=3, alpha=2, p=1.5; the
    # shell statistics need a fine grid for the regression oracle tolerance
    pr = ProblemParams(N=3, alpha=2.0, p=1.5, q=2.5)
    spec = GridSpec(N=3, L=32.0, M=256)
    w = _planted_pair(spec, lambda r: r**-2.0, lambda r: np.exp(-r))
    fit_u, fit_v = fit_decay(w, pr)
    assert fit_u.case == "Algebraic"
    assert fit_u.fitted == pytest.approx(-2.0, abs=1e-3)
    assert fit_u.r_squared > 0.999999
    assert fit_v.case == "Exponential"


def test_fit_decay_recovers_planted_exponential_tail():
    # u ~ e^{-r} r^{-1}: the exponential prediction for N=3
    pr = ProblemParams(N=3, alpha=2.0, p=2.5, q=2.5)
    spec = GridSpec(N=3, L=32.0, M=128)
    w = _planted_pair(
        spec, lambda r: np.exp(-r) / r, lambda r: np.exp(-r) / r
    )
    fit_u, _ = fit_decay(w, pr)
    assert fit_u.case == "Exponential"
    assert fit_u.fitted == pytest.approx(-1.0, abs=1e-3)


def test_fit_decay_limit_constant_planted():
    # plant u = K^{1/(2-p)} r^{-(N-a)/(2-p)} and check the reported limit
    pr = ProblemParams(N=3, alpha=2.0, p=1.5, q=2.5)
    spec = GridSpec(N=3, L=32.0, M=128)
    K = 0.37
    expo = (pr.N - pr.alpha) / (2.0 - pr.p)
    w = _planted_pair(
        spec,
        lambda r: K ** (1.0 / (2.0 - pr.p)) * r ** (-expo),
        lambda r: np.exp(-r),
    )
    fit_u, _ = fit_decay(w, pr)
    assert fit_u.limit_estimate == pytest.approx(K, rel=2e-3)


def test_fit_decay_window_validation():
    pr = ProblemParams(N=3, alpha=2.0, p=2.5, q=2.5)
    spec = GridSpec(N=3, L=16.0, M=32)
    w = _planted_pair(spec, lambda r: np.exp(-r), lambda r: np.exp(-r))
    with pytest.raises(ValueError):
        fit_decay(w, pr, window=(10.0, 20.0))  # outside the grid
    with pytest.raises(ValueError):
        fit_decay(w, pr, window=(5.0, 5.5))  # too few bins


def test_fit_decay_rejects_nonpositive_window_values():
    pr = ProblemParams(N=3, alpha=2.0, p=2.5, q=2.5)
    spec = GridSpec(N=3, L=16.0, M=32)
    r = np.sqrt(spec.radius_sq())
    vals = np.where(r < 4.0, 1.0, 0.0)
    w = StatePair(Field(spec, vals), Field(spec, np.exp(-r)))
    with pytest.raises(ValueError):
        fit_decay(w, pr)


def test_fit_decay_flags_inapplicable_theory():
    # both exponents below 2 with min below the smallness threshold
    pr = ProblemParams(N=3, alpha=2.0, p=1.45, q=1.9)
    spec = GridSpec(N=3, L=32.0, M=64)
    w = _planted_pair(spec, lambda r: r**-2.0, lambda r: r**-2.0)
    fit_u, fit_v = fit_decay(w, pr)
    assert not fit_u.theory_applicable
    assert not fit_v.theory_applicable


def test_critical_compensator_against_closed_form():
    # alpha = N - 1 makes the phase integral elementary:
    # int_A^r sqrt(1 - A/s) ds = sqrt(r(r-A)) - A atanh(sqrt(1 - A/r))
    A = 1.7
    radii = np.array([2.5, 4.0, 9.0, 15.0])
    out = _critical_compensator(A, 1.0, radii)
    for r, got in zip(radii, out):
        exact = math.sqrt(r * (r - A)) - A * math.atanh(math.sqrt(1 - A / r))
        assert math.log(got) == pytest.approx(exact, abs=1e-8)


def test_critical_compensator_clamps_inside_turning_point():
    out = _critical_compensator(8.0, 1.0, np.array([1.0, 2.0]))
    assert np.all(np.isfinite(out))
    assert out[0] == 1.0  # zero phase below the turning point


def test_fit_decay_critical_case_planted():
    # borderline component with a planted exact profile: the compensated
    # product should be nearly flat across the window
    pr = ProblemParams(N=3, alpha=2.0, p=2.0, q=2.0)
    spec = GridSpec(N=3, L=16.0, M=64)
    c_a = riesz_constant(3, 2.0)

    # build v first to know int |v|^q, then plant u with the matched phase
    mid = spec.axis_coords()[spec.M // 2]
    r = np.sqrt(sum((c - mid) ** 2 for c in spec.coords()))
    v_vals = np.exp(-np.maximum(r, spec.h))
    from hartreepair.grid import integrate as _int

    int_vq = _int(Field(spec, v_vals**2))
    a_pow = (2 * pr.q / (pr.p + pr.q)) * c_a * int_vq

    prof_r = np.maximum(r, 1.01 * a_pow)
    comp = _critical_compensator(a_pow, 1.0, prof_r.ravel()).reshape(r.shape)
    u_vals = prof_r ** (-1.0) / comp
    w = StatePair(Field(spec, u_vals), Field(spec, v_vals))
    fit_u, _ = fit_decay(w, pr)
    assert fit_u.case == "Critical"
    assert fit_u.fitted <= 5e-2  # window variation of the compensated product
    assert fit_u.limit_predicted == pytest.approx(a_pow, rel=1e-12)


def test_hls_audit_gaussian_pair():
    pr = ProblemParams(N=2, alpha=1.0, p=2.2, q=2.4)
    spec = GridSpec(N=2, L=10.0, M=64)
    r2 = spec.radius_sq()
    w = StatePair(Field(spec, np.exp(-r2)), Field(spec, np.exp(-0.5 * r2)))
    audit = hls_audit(w, pr)
    assert math.isfinite(audit.pair_ratio) and audit.pair_ratio > 0
    assert math.isfinite(audit.conv_ratio) and audit.conv_ratio > 0


def test_hls_audit_dilation_stability():
    pr = ProblemParams(N=2, alpha=1.0, p=2.2, q=2.4)
    spec = GridSpec(N=2, L=12.0, M=64)
    r2 = spec.radius_sq()
    ratios = []
    for lam in (0.5, 1.0, 2.0):
        w = StatePair(
            Field(spec, np.exp(-r2 / lam**2)),
            Field(spec, np.exp(-0.5 * r2 / lam**2)),
        )
        audit = hls_audit(w, pr)
        ratios.append((audit.pair_ratio, audit.conv_ratio))
    for k in range(2):
        vals = [r[k] for r in ratios]
        assert max(vals) <= 2.0 * min(vals)


def test_hls_audit_degenerate_pair():
    pr = ProblemParams(N=2, alpha=1.0, p=2.2, q=2.4)
    spec = GridSpec(N=2, L=10.0, M=32)
    w = StatePair(Field.full(spec, 0.0), Field.full(spec, 1.0))
    with pytest.raises(ValueError):
        hls_audit(w, pr)
