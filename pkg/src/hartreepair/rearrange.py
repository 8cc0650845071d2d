"""Symmetric decreasing rearrangement and half-space polarization on grids.

The grid rearrangement is the exact-permutation variant: cell values are
sorted in decreasing order and reassigned to cells sorted by increasing
distance from the grid center, ties broken lexicographically by index.  Lp
norms are therefore preserved exactly (same value multiset); only gradient
and convolution comparisons carry discretization tolerance.

Polarization reflects across a coordinate hyperplane through the center,
which maps grid nodes to grid nodes exactly (index reflection k -> M-1-k on
the chosen axis; no node sits on the hyperplane), and swaps each value pair
so the larger one lands on the chosen side.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, integrate
from .riesz import RieszPlan, get_plan, riesz_apply


@dataclass(frozen=True)
class HalfSpace:
    """Closed half-space {sign * x_axis >= 0} bounded by a center hyperplane."""

    axis: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")


@functools.lru_cache(maxsize=16)
def _schwarz_order(spec: GridSpec) -> np.ndarray:
    """Flat node order: increasing distance from center, lexicographic ties.

    The center is the point 0; with cell-centered nodes the per-axis offsets
    2k - (M - 1) are odd integers, so distances compare exactly.
    """
    M = spec.M
    d2_axis = (2 * np.arange(M, dtype=np.int64) - (M - 1)) ** 2
    d2 = np.zeros(spec.shape, dtype=np.int64)
    for ax in range(spec.N):
        d2 = d2 + d2_axis.reshape((1,) * ax + (M,) + (1,) * (spec.N - ax - 1))
    # stable sort on distance; C-order flattening is the lexicographic tie-break
    return np.argsort(d2.ravel(order="C"), kind="stable")


def schwarz(f: Field) -> Field:
    """Symmetric decreasing rearrangement about the grid center."""
    if np.any(f.values < 0):
        raise ValueError("rearrangement requires a nonnegative field")
    order = _schwarz_order(f.spec)
    flat = f.values.ravel(order="C")
    out = np.empty_like(flat)
    out[order] = -np.sort(-flat, kind="stable")
    return Field(f.spec, out.reshape(f.spec.shape))


def reflect(f: Field, H: HalfSpace) -> Field:
    """f composed with the exact grid reflection across the hyperplane."""
    if not 0 <= H.axis < f.spec.N:
        raise ValueError("axis out of range")
    return Field(f.spec, np.flip(f.values, axis=H.axis).copy())


def _side_mask(spec: GridSpec, H: HalfSpace) -> np.ndarray:
    coord = spec.axis_coords() * H.sign
    on_side = coord >= 0
    shape = (1,) * H.axis + (spec.M,) + (1,) * (spec.N - H.axis - 1)
    return np.broadcast_to(on_side.reshape(shape), spec.shape)


def polarize(f: Field, H: HalfSpace) -> Field:
    """max(f, reflected f) on the half-space, min on the complement."""
    refl = reflect(f, H).values
    mask = _side_mask(f.spec, H)
    hi = np.maximum(f.values, refl)
    lo = np.minimum(f.values, refl)
    return Field(f.spec, np.where(mask, hi, lo))


def riesz_rearrangement_check(
    f: Field, g: Field, alpha: float, plan: RieszPlan | None = None
) -> tuple[float, float]:
    """Both sides of the kernel-smoothing comparison: the double integral of
    f, kernel, g against the one with both arguments rearranged.

    Contract: lhs <= rhs + tolerance; equality for already-symmetric
    decreasing inputs.
    """
    if np.any(f.values < 0) or np.any(g.values < 0):
        raise ValueError("rearrangement comparison requires nonnegative fields")
    if f.spec != g.spec:
        raise ValueError("fields live on different grids")
    if plan is None:
        plan = get_plan(f.spec, alpha)
    lhs = integrate(Field(f.spec, riesz_apply(plan, f).values * g.values))
    fs, gs = schwarz(f), schwarz(g)
    rhs = integrate(Field(f.spec, riesz_apply(plan, fs).values * gs.values))
    return lhs, rhs
