"""Exponentially weighted energy of a profile and its exact discrete gradient.

The energy of a profile u on the truncated grid is

    sum over cells of  E_i * ( |u_{i+1} - u_i|^2 / (2 h_i^2) + (W_i + W_{i+1}) / 2 )

where E_i integrates the weight e^{c x} exactly over the cell.  The slope
term is exact for piecewise-linear profiles, so the discrete energy is a
genuine energy of the interpolated profile; the potential term is the
trapezoid average.  The one-sided sign constraint on the right half-line is
enforced softly by a quadratic penalty on the negative part of the potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, WeightOverflowError
from .potential import PotentialConstants, PotentialSpec
from .profile import Profile

WEIGHT_EXP_CAP = 600.0


@dataclass(frozen=True)
class FunctionalParams:
    """Wave-speed parameter plus penalty and weight-normalization settings."""

    c: float
    penalty_kappa: float = 1e3
    weight_normalization: str = "none"  # "none" | "shift-by-x0"

    def __post_init__(self):
        if not self.c > 0:
            raise ContractViolationError(f"speed parameter must be positive, got {self.c}")
        if self.penalty_kappa < 0:
            raise ContractViolationError("penalty weight must be nonnegative")
        if self.weight_normalization not in ("none", "shift-by-x0"):
            raise ContractViolationError(
                f"unknown weight normalization '{self.weight_normalization}'"
            )


@dataclass(frozen=True)
class BoundsReport:
    """Analytic two-sided bounds on the minimum energy and the speed bracket."""

    c: float
    lower: float
    upper: float
    bracket_lo: float
    bracket_hi: float

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "lower": self.lower,
            "upper": self.upper,
            "bracket_lo": self.bracket_lo,
            "bracket_hi": self.bracket_hi,
        }


def cell_weights(grid, params: FunctionalParams) -> np.ndarray:
    """Exact integral of the weight over each cell, optionally shift-normalized."""
    x = grid.nodes
    c = params.c
    if c * x[-1] > WEIGHT_EXP_CAP and params.weight_normalization == "none":
        raise WeightOverflowError(
            f"c * x_right = {c * x[-1]:.3g} would overflow the weight; "
            "use weight_normalization='shift-by-x0' or a shorter grid"
        )
    x_ref = x[-1] if params.weight_normalization == "shift-by-x0" else 0.0
    ex = np.exp(c * (x - x_ref))
    return np.diff(ex) / c


def _energy_terms(spec: PotentialSpec, params: FunctionalParams, profile: Profile, w=None):
    """Shared fast path: (energy, penalty, node potential values, cell weights)."""
    x = profile.grid.nodes
    u = profile.values
    h = np.diff(x)
    E = cell_weights(profile.grid, params)
    if w is None:
        w = spec.value(u)

    du = (u[1:] - u[:-1]) / h[:, None]
    kin = 0.5 * np.sum(du * du, axis=1)
    pot = 0.5 * (w[:-1] + w[1:])
    energy_val = float(np.sum(E * (kin + pot)))

    if params.penalty_kappa > 0:
        p = np.square(np.minimum(w, 0.0))
        right = x[:-1] >= 0.0
        pen = params.penalty_kappa * float(np.sum(E[right] * 0.5 * (p[:-1] + p[1:])[right]))
    else:
        pen = 0.0
    return energy_val, pen, w, E


def energy(spec: PotentialSpec, params: FunctionalParams, profile: Profile) -> float:
    """Weighted energy of the profile over the truncated grid (penalty excluded)."""
    if not np.array_equal(profile.well_b, np.asarray(spec.well_b, dtype=float)):
        raise ContractViolationError("profile right boundary does not match the potential well")
    val, _, _, _ = _energy_terms(spec, params, profile)
    return val


def penalty_energy(spec: PotentialSpec, params: FunctionalParams, profile: Profile) -> float:
    """Quadratic penalty on the negative part of the potential right of 0."""
    _, pen, _, _ = _energy_terms(spec, params, profile)
    return pen


def energy_gradient(spec: PotentialSpec, params: FunctionalParams, profile: Profile) -> np.ndarray:
    """Exact gradient of energy + penalty with respect to node values.

    The right boundary node is fixed at the reference well, so its row is
    zero.  Node 0 is returned raw; constraint handling (projection onto the
    zero level set) is the optimizer's job.
    """
    x = profile.grid.nodes
    u = profile.values
    h = np.diff(x)
    E = cell_weights(profile.grid, params)
    w = spec.value(u)
    dw = np.asarray(spec.gradient(u), dtype=float)

    g = np.zeros_like(u)
    t = (E / (h * h))[:, None] * (u[1:] - u[:-1])
    g[:-1] -= t
    g[1:] += t

    node_w = np.zeros(x.size)
    node_w[:-1] += E
    node_w[1:] += E
    g += 0.5 * node_w[:, None] * dw

    if params.penalty_kappa > 0:
        right = x[:-1] >= 0.0
        node_wr = np.zeros(x.size)
        node_wr[:-1][right] += E[right]
        node_wr[1:][right] += E[right]
        # d/du of max(0, -W)^2 is -2 max(0, -W) DW
        g += params.penalty_kappa * 0.5 * node_wr[:, None] * (
            -2.0 * np.maximum(-w, 0.0)[:, None] * dw
        )

    g[-1] = 0.0
    return g


def objective(spec: PotentialSpec, params: FunctionalParams, profile: Profile) -> float:
    """Energy plus penalty, the quantity the minimizer descends."""
    val, pen, _, _ = _energy_terms(spec, params, profile)
    return val + pen


def compute_bounds(spec: PotentialSpec, consts: PotentialConstants, c: float) -> BoundsReport:
    """Analytic lower/upper bounds on the minimum energy and the root bracket."""
    if not c > 0:
        raise ContractViolationError("bounds need c > 0")
    m, M, d = consts.m, consts.M, consts.d
    gap2 = float(np.sum((np.asarray(spec.well_b) - consts.point_a) ** 2))
    lower = c * d * d / 2.0 - m / c
    upper = ((gap2 / 2.0 + M) * (np.exp(c) - 1.0) - m * np.exp(-c)) / c
    bracket_lo = float(np.log(0.5 * (1.0 + np.sqrt(1.0 + 8.0 * m / (gap2 + 2.0 * M)))))
    bracket_hi = float(np.sqrt(2.0 * m) / d)
    return BoundsReport(
        c=c, lower=float(lower), upper=float(upper),
        bracket_lo=bracket_lo, bracket_hi=bracket_hi,
    )
