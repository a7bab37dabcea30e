"""Root finding for the unique speed where the minimum energy vanishes.

The minimum energy is strictly increasing in the speed, negative for small
speeds and positive for large ones, so bisection on its sign converges to
the unique root.  Bisection rather than a secant-type method because the
estimates carry optimization noise and only their signs are trusted.

Two robustness rules shape the implementation:

* every evaluation runs on a sub-range of the caller's grid sized for its
  own speed (left end at -40/c, right end at 40 over the tail decay rate),
  which keeps the exponential weight within double-precision range;
* a found local minimum can only overestimate the true minimum energy, so
  negative estimates are trusted as-is, while nonnegative warm-started
  estimates are cross-checked by cold runs raced from every well of the
  potential (profiles seeded from the wrong well shed their extra fronts
  only logarithmically slowly, so seeding from each well is what makes the
  cold estimates reliable).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BracketFailureError, ContractViolationError, NotAWaveError
from .functional import FunctionalParams, compute_bounds
from .minimize import GammaResult, MinimizeOptions, minimize_from_seeds, minimize_profile
from .potential import PotentialConstants, PotentialSpec, well_minima
from .profile import Grid, Profile, interpolate, segment_profile

_EXPAND_FACTOR = 1.5
_MAX_EXPANSIONS = 6
# bisection probes only need trustworthy signs; the final minimizer is
# recomputed at the caller's full tolerance
_PROBE_OPT_TOL = 1e-5


@dataclass(frozen=True)
class SpeedResult:
    """Root of the minimum-energy function with its bisection history."""

    c_star: float
    gamma_at_c_star: float
    bracket_history: list
    profile: Profile
    gamma_result: GammaResult
    wave_ok: bool | None = None

    def as_dict(self) -> dict:
        return {
            "c_star": self.c_star,
            "gamma_at_c_star": self.gamma_at_c_star,
            "bracket_history": [list(b) for b in self.bracket_history],
            "wave_ok": self.wave_ok,
            "gamma_result": self.gamma_result.as_dict(),
        }

    def with_wave_ok(self, ok: bool) -> "SpeedResult":
        return replace(self, wave_ok=ok)


def gamma_zero_tol(consts: PotentialConstants, c: float) -> float:
    """Tolerance for treating an energy estimate as zero, scaled to its natural size."""
    return 5e-3 * (1.0 + consts.m / c)


def decay_rate(consts: PotentialConstants, c: float) -> float:
    """Positive root of the tail characteristic equation at speed c."""
    return 0.5 * (c + np.sqrt(c * c + 4.0 * consts.mu))


def speed_subgrid(grid: Grid, consts: PotentialConstants, c: float) -> Grid:
    """Sub-range of a grid sized for one speed: x in [-40/c, 40/decay_rate]."""
    nodes = grid.nodes
    iz = grid.index_zero
    xl = max(grid.x_left, -40.0 / c)
    xr = min(grid.x_right, 40.0 / decay_rate(consts, c))
    i_lo = int(np.searchsorted(nodes, xl, side="left"))
    i_hi = int(np.searchsorted(nodes, xr, side="right"))
    i_lo = min(i_lo, iz - 2)
    i_hi = max(i_hi, iz + 3)
    sub = nodes[i_lo:i_hi]
    if i_lo == 0 and i_hi == nodes.size:
        return grid
    return Grid(nodes=sub.copy(), spacing=grid.spacing)


def transfer_profile(profile: Profile, grid: Grid, well_b) -> Profile:
    """Resample a profile onto another grid, extending by its end values."""
    vals = interpolate(profile, grid.nodes)
    vals[-1] = np.asarray(well_b, dtype=float)
    return Profile(grid=grid, values=vals, well_b=np.asarray(well_b, dtype=float))


def seed_points(spec: PotentialSpec, consts: PotentialConstants) -> list[np.ndarray]:
    """Distinct negative-region wells to seed cold minimizations from."""
    points = [np.asarray(consts.point_a, dtype=float)]
    for q in well_minima(spec):
        if all(np.linalg.norm(q - p) > 1e-6 for p in points):
            points.append(q)
    return points


def _probe_opts(opts: MinimizeOptions) -> MinimizeOptions:
    return MinimizeOptions(
        opt_tol=max(opts.opt_tol, _PROBE_OPT_TOL),
        max_iters=opts.max_iters,
        armijo_c1=opts.armijo_c1,
        armijo_shrink=opts.armijo_shrink,
        restarts=0,
        seed=opts.seed,
        feas_tol=opts.feas_tol,
    )


def find_speed(
    spec: PotentialSpec,
    consts: PotentialConstants,
    grid: Grid,
    opts: MinimizeOptions,
    c_tol: float,
    penalty_kappa: float = 1e3,
) -> SpeedResult:
    """Bisect the analytic bracket for the root of the minimum energy.

    The bracket endpoints come from the analytic bounds; if a probe has the
    wrong sign (possible on a coarse grid) the bracket is expanded
    geometrically, with a hard failure after a few expansions.  Interior
    probes are warm-started from the nearest evaluated minimizer.  The
    returned profile is a cold-start minimizer at the midpoint, living on
    the sub-range of the grid sized for that speed.
    """
    if not c_tol > 0:
        raise ContractViolationError("c_tol must be positive")

    bounds = compute_bounds(spec, consts, max(1.0, c_tol))
    c_lo, c_hi = bounds.bracket_lo, bounds.bracket_hi
    evaluated: dict[float, GammaResult] = {}
    probes: list[tuple[float, float]] = []
    probe_opts = _probe_opts(opts)
    wells = seed_points(spec, consts)

    def cold(c: float, sub: Grid, run_opts: MinimizeOptions) -> GammaResult:
        params = FunctionalParams(c=c, penalty_kappa=penalty_kappa)
        seeds = [segment_profile(spec, sub, p) for p in wells]
        return minimize_from_seeds(spec, consts, params, sub, seeds, run_opts)

    def gamma_at(c: float, warm_from: Profile | None) -> GammaResult:
        sub = speed_subgrid(grid, consts, c)
        params = FunctionalParams(c=c, penalty_kappa=penalty_kappa)
        if warm_from is not None:
            init = transfer_profile(warm_from, sub, spec.well_b)
            res = minimize_profile(spec, consts, params, sub, init, probe_opts)
            if res.gamma >= 0.0:
                res_cold = cold(c, sub, probe_opts)
                if res_cold.gamma < res.gamma:
                    res = res_cold
        else:
            res = cold(c, sub, probe_opts)
        evaluated[c] = res
        probes.append((c, res.gamma))
        return res

    def nearest_profile(c: float) -> Profile | None:
        if not evaluated:
            return None
        c_near = min(evaluated, key=lambda ck: abs(ck - c))
        return evaluated[c_near].profile

    res_lo = gamma_at(c_lo, None)
    for _ in range(_MAX_EXPANSIONS):
        if res_lo.gamma < 0:
            break
        c_lo /= _EXPAND_FACTOR
        res_lo = gamma_at(c_lo, None)
    else:
        raise BracketFailureError(
            f"no negative minimum energy found down to c={c_lo:g}", probes=probes
        )

    res_hi = gamma_at(c_hi, None)
    for _ in range(_MAX_EXPANSIONS):
        if res_hi.gamma > 0:
            break
        c_hi *= _EXPAND_FACTOR
        res_hi = gamma_at(c_hi, None)
    else:
        raise BracketFailureError(
            f"no positive minimum energy found up to c={c_hi:g}", probes=probes
        )

    g_lo, g_hi = res_lo.gamma, res_hi.gamma
    history = [(c_lo, c_hi, g_lo, g_hi)]
    while c_hi - c_lo > c_tol:
        c_mid = 0.5 * (c_lo + c_hi)
        res_mid = gamma_at(c_mid, nearest_profile(c_mid))
        if res_mid.gamma == 0.0:
            c_lo = c_hi = c_mid
            g_lo = g_hi = 0.0
            history.append((c_lo, c_hi, g_lo, g_hi))
            break
        if res_mid.gamma < 0:
            c_lo, g_lo = c_mid, res_mid.gamma
        else:
            c_hi, g_hi = c_mid, res_mid.gamma
        history.append((c_lo, c_hi, g_lo, g_hi))

    c_star = 0.5 * (c_lo + c_hi)
    sub_star = speed_subgrid(grid, consts, c_star)
    final = cold(c_star, sub_star, opts)
    return SpeedResult(
        c_star=c_star,
        gamma_at_c_star=final.gamma,
        bracket_history=history,
        profile=final.profile,
        gamma_result=final,
    )


def wave_at_speed(
    spec: PotentialSpec,
    consts: PotentialConstants,
    grid: Grid,
    c: float,
    opts: MinimizeOptions,
    penalty_kappa: float = 1e3,
) -> Profile:
    """Minimizer profile at a speed where the minimum energy vanishes.

    Raises NotAWaveError when the converged minimum energy is not zero
    within tolerance; run find_speed first to locate the root speed.
    """
    sub = speed_subgrid(grid, consts, c)
    params = FunctionalParams(c=c, penalty_kappa=penalty_kappa)
    seeds = [segment_profile(spec, sub, p) for p in seed_points(spec, consts)]
    res = minimize_from_seeds(spec, consts, params, sub, seeds, opts)
    tol = gamma_zero_tol(consts, c)
    if abs(res.gamma) > tol:
        raise NotAWaveError(
            f"minimum energy {res.gamma:.4g} at c={c:g} is not zero within {tol:.2g}; "
            "run find_speed to locate the root speed first"
        )
    return res.profile
