"""Potentials for gradient-flow traveling-wave problems.

A potential is a smooth function W: R^n -> R with a reference well b where
W(b) = 0, DW(b) = 0 and the Hessian is positive definite, and whose negative
region {W < 0} is non-empty and bounded.  This module defines the potential
container, the built-in families, the analytic constants used by the energy
bounds, and projection onto the zero level set {W = 0}.

Evaluation callbacks are vectorized: ``value`` maps an array of shape
(..., dim) to (...,), ``gradient`` maps (..., dim) to (..., dim) and
``hessian`` maps a single point (dim,) to a symmetric (dim, dim) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize
from scipy.optimize import minimize_scalar as _scipy_minimize_scalar

from .errors import (
    AssumptionViolationError,
    ContractViolationError,
    DegenerateProjectionError,
    ProjectionConvergenceError,
)

PROJ_TOL = 1e-10
GRADIENT_FLOOR = 1e-8
PROJ_MAX_ITER = 100
# potential values above this magnitude count as properly signed; below it
# they are treated as roundoff noise around the zero level
NEG_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """A potential together with its derivatives and search box.

    ``bounding_box`` has shape (dim, 2) and must contain the negative region
    {W < 0}; the built-in families use [-2, 2]^dim.
    """

    dim: int
    well_b: np.ndarray
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    bounding_box: np.ndarray
    variant: str = "custom"
    params: tuple = ()

    def describe(self) -> dict:
        return {
            "variant": self.variant,
            "dim": self.dim,
            "params": list(self.params),
            "well_b": self.well_b.tolist(),
            "bounding_box": self.bounding_box.tolist(),
        }


@dataclass(frozen=True)
class PotentialConstants:
    """Analytic constants of a potential used by the energy bounds.

    m is the depth of the deepest well (-inf W), attained at ``point_a``;
    M is the largest potential value on the straight segment from a to b;
    d is the distance from b to the negative region; mu is the smallest
    eigenvalue of the Hessian at b.
    """

    m: float
    point_a: np.ndarray
    M: float
    d: float
    mu: float

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "point_a": self.point_a.tolist(),
            "M": self.M,
            "d": self.d,
            "mu": self.mu,
        }


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _quartic_well(u, c):
    # antiderivative of (s^2-1)(2s-c) from 1 to u
    return u**4 / 2 - c * u**3 / 3 - u**2 + c * u + 0.5 - 2.0 * c / 3.0


def _quartic_well_d1(u, c):
    return (u * u - 1.0) * (2.0 * u - c)


def _quartic_well_d2(u, c):
    return 6.0 * u * u - 2.0 * c * u - 2.0


def scalar_cubic(alpha: float) -> PotentialSpec:
    """One-component double-well potential whose gradient is (u^2-1)(2u-alpha)."""
    if not 0.0 < alpha < 2.0:
        raise ContractViolationError(f"scalar_cubic requires 0 < alpha < 2, got {alpha}")

    def value(u):
        u = np.asarray(u, dtype=float)
        return _quartic_well(u[..., 0], alpha)

    def gradient(u):
        u = np.asarray(u, dtype=float)
        return _quartic_well_d1(u, alpha)

    def hessian(u):
        u = np.asarray(u, dtype=float)
        return np.array([[_quartic_well_d2(u[0], alpha)]])

    return PotentialSpec(
        dim=1,
        well_b=np.array([1.0]),
        value=value,
        gradient=gradient,
        hessian=hessian,
        bounding_box=np.array([[-2.0, 2.0]]),
        variant="scalar_cubic",
        params=(alpha,),
    )


def decoupled_quartic(alpha: float, beta: float) -> PotentialSpec:
    """Two-component potential, a sum of independent double wells.

    The four wells sit at (+-1, +-1) with reference well b = (1, 1); the
    well depths order by alpha <= beta.
    """
    if not (0.0 < alpha <= beta < 2.0):
        raise ContractViolationError(
            f"decoupled_quartic requires 0 < alpha <= beta < 2, got ({alpha}, {beta})"
        )

    def value(u):
        u = np.asarray(u, dtype=float)
        return _quartic_well(u[..., 0], alpha) + _quartic_well(u[..., 1], beta)

    def gradient(u):
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        out[..., 0] = _quartic_well_d1(u[..., 0], alpha)
        out[..., 1] = _quartic_well_d1(u[..., 1], beta)
        return out

    def hessian(u):
        u = np.asarray(u, dtype=float)
        return np.diag([
            _quartic_well_d2(u[0], alpha),
            _quartic_well_d2(u[1], beta),
        ])

    return PotentialSpec(
        dim=2,
        well_b=np.array([1.0, 1.0]),
        value=value,
        gradient=gradient,
        hessian=hessian,
        bounding_box=np.array([[-2.0, 2.0], [-2.0, 2.0]]),
        variant="decoupled_quartic",
        params=(alpha, beta),
    )


def user_polynomial(
    dim: int,
    terms: Sequence[tuple[float, Sequence[int]]],
    well_b: Sequence[float],
    bounding_box: Sequence[Sequence[float]],
) -> PotentialSpec:
    """Potential given as a table of monomial terms (coeff, exponents).

    Each term contributes coeff * prod_k u_k**exp_k.  Gradient and Hessian
    are formed analytically from the table.  The bounding box is required:
    boundedness of the negative region is the caller's responsibility.
    """
    coeffs = np.array([float(c) for c, _ in terms])
    expo = np.array([[int(e) for e in exps] for _, exps in terms], dtype=int)
    if expo.ndim != 2 or expo.shape[1] != dim:
        raise ContractViolationError(
            f"user_polynomial exponent rows must have length dim={dim}"
        )
    if np.any(expo < 0):
        raise ContractViolationError("user_polynomial exponents must be nonnegative")
    well = np.asarray(well_b, dtype=float)
    box = np.asarray(bounding_box, dtype=float)
    if well.shape != (dim,) or box.shape != (dim, 2):
        raise ContractViolationError("user_polynomial well_b/bounding_box shape mismatch")

    def _powers(u, exps):
        # prod over components of u_k ** e_k, batched over leading axes
        out = np.ones(u.shape[:-1])
        for k in range(dim):
            e = exps[k]
            if e:
                out = out * u[..., k] ** e
        return out

    def value(u):
        u = np.asarray(u, dtype=float)
        acc = np.zeros(u.shape[:-1])
        for c, exps in zip(coeffs, expo):
            acc = acc + c * _powers(u, exps)
        return acc

    def gradient(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for c, exps in zip(coeffs, expo):
            for k in range(dim):
                if exps[k] == 0:
                    continue
                de = exps.copy()
                de[k] -= 1
                out[..., k] += c * exps[k] * _powers(u, de)
        return out

    def hessian(u):
        u = np.asarray(u, dtype=float)
        H = np.zeros((dim, dim))
        for c, exps in zip(coeffs, expo):
            for k in range(dim):
                if exps[k] == 0:
                    continue
                for l in range(dim):
                    ek = exps.copy()
                    ek[k] -= 1
                    if ek[l] == 0:
                        continue
                    de = ek.copy()
                    de[l] -= 1
                    H[k, l] += c * exps[k] * ek[l] * _powers(u, de)
        return 0.5 * (H + H.T)

    return PotentialSpec(
        dim=dim,
        well_b=well,
        value=value,
        gradient=gradient,
        hessian=hessian,
        bounding_box=box,
        variant="user_polynomial",
        params=tuple(float(c) for c in coeffs),
    )


def finite_difference_hessian(spec_gradient, dim: int, h: float = 1e-5):
    """Build a Hessian callback from centered differences of a gradient callback."""

    def hessian(u):
        u = np.asarray(u, dtype=float)
        H = np.empty((dim, dim))
        for k in range(dim):
            step = np.zeros(dim)
            step[k] = h
            H[:, k] = (spec_gradient(u + step) - spec_gradient(u - step)) / (2 * h)
        return 0.5 * (H + H.T)

    return hessian


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def evaluate(spec: PotentialSpec, point) -> float:
    """Evaluate the potential at one point, checking the dimension."""
    p = np.asarray(point, dtype=float)
    if p.shape != (spec.dim,):
        raise ContractViolationError(
            f"point has shape {p.shape}, expected ({spec.dim},)"
        )
    return float(spec.value(p))


def validate_spec(spec: PotentialSpec, rng=None, n_fd_points: int = 16) -> None:
    """Check the structural assumptions on a potential.

    Raises AssumptionViolationError if the reference well is not a proper
    nondegenerate zero-minimum, if no negative region exists inside the box,
    if the potential dips negative on the box boundary, or if the gradient
    callback disagrees with finite differences of the value callback.
    """
    b = spec.well_b
    if abs(float(spec.value(b))) > 1e-12:
        raise AssumptionViolationError("potential is not zero at the reference well")
    if float(np.linalg.norm(spec.gradient(b))) > 1e-10:
        raise AssumptionViolationError("gradient does not vanish at the reference well")
    eigs = np.linalg.eigvalsh(spec.hessian(b))
    if eigs[0] <= 0:
        raise AssumptionViolationError(
            f"Hessian at the reference well is not positive definite (min eig {eigs[0]:g})"
        )

    pts = _scan_points(spec, per_axis=_scan_resolution(spec.dim))
    w = spec.value(pts)
    if not np.any(w < 0):
        raise AssumptionViolationError("no negative region found inside the bounding box")

    bpts = _boundary_points(spec, per_axis=101)
    if np.any(spec.value(bpts) < 0):
        raise AssumptionViolationError("potential is negative on the bounding-box boundary")

    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = spec.bounding_box[:, 0], spec.bounding_box[:, 1]
    h = 1e-4
    for _ in range(n_fd_points):
        p = lo + (hi - lo) * rng.random(spec.dim)
        g = np.asarray(spec.gradient(p), dtype=float)
        fd = np.empty(spec.dim)
        for k in range(spec.dim):
            e = np.zeros(spec.dim)
            e[k] = h
            fd[k] = (float(spec.value(p + e)) - float(spec.value(p - e))) / (2 * h)
        scale = 1.0 + np.linalg.norm(g)
        if np.linalg.norm(g - fd) > 1e-5 * scale:
            raise AssumptionViolationError(
                "gradient callback disagrees with finite differences of the value"
            )


def _scan_resolution(dim: int) -> int:
    if dim <= 2:
        return 401
    if dim == 3:
        return 161
    return max(21, int(round(2e6 ** (1.0 / dim))))


def _scan_points(spec: PotentialSpec, per_axis: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in spec.bounding_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _boundary_points(spec: PotentialSpec, per_axis: int) -> np.ndarray:
    pts = []
    for k in range(spec.dim):
        axes = [
            np.linspace(lo, hi, per_axis) if j != k else None
            for j, (lo, hi) in enumerate(spec.bounding_box)
        ]
        for side in (0, 1):
            face_axes = [a if a is not None else np.array([spec.bounding_box[k, side]]) for a in axes]
            mesh = np.meshgrid(*face_axes, indexing="ij")
            pts.append(np.stack([m.ravel() for m in mesh], axis=-1))
    return np.concatenate(pts, axis=0)


def compute_constants(spec: PotentialSpec, scan_per_axis: int | None = None) -> PotentialConstants:
    """Locate the analytic constants by grid scan plus local refinement."""
    per_axis = scan_per_axis or _scan_resolution(spec.dim)
    lo, hi = spec.bounding_box[:, 0], spec.bounding_box[:, 1]
    b = spec.well_b

    pts = _scan_points(spec, per_axis)
    w = spec.value(pts)
    neg = w < 0
    if not np.any(neg):
        raise AssumptionViolationError("no negative region found inside the bounding box")

    # deepest well: refine from the best few scan cells
    order = np.argsort(w)
    best_val = np.inf
    best_pt = pts[order[0]]
    tried: list[np.ndarray] = []
    for idx in order[:32]:
        p0 = pts[idx]
        if any(np.linalg.norm(p0 - t) < 0.05 * np.max(hi - lo) for t in tried):
            continue
        tried.append(p0)
        res = _scipy_minimize(
            lambda u: float(spec.value(u)),
            p0,
            jac=lambda u: np.asarray(spec.gradient(u), dtype=float),
            bounds=list(zip(lo, hi)),
            method="L-BFGS-B",
        )
        if res.fun < best_val:
            best_val, best_pt = float(res.fun), np.asarray(res.x)
        if len(tried) >= 5:
            break
    m = -best_val
    point_a = best_pt
    if m <= 0:
        raise AssumptionViolationError("the deepest well is not below zero")

    # largest value of W on the segment from a to b
    seg = lambda t: point_a + np.multiply.outer(np.asarray(t), b - point_a)
    ts = np.linspace(0.0, 1.0, per_axis)
    seg_vals = spec.value(seg(ts))
    i = int(np.argmax(seg_vals))
    t_lo, t_hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    res = _scipy_minimize_scalar(
        lambda t: -float(spec.value(seg(float(t)))),
        bounds=(t_lo, t_hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    M = max(0.0, -float(res.fun), float(seg_vals[i]))

    # distance from b to the negative region: nearest negative scan points,
    # refined by bisecting each segment from b for its first sign change
    dist = np.linalg.norm(pts[neg] - b, axis=1)
    near_order = np.argsort(dist)
    d = float(dist[near_order[0]])
    for idx in near_order[:16]:
        p = pts[neg][idx]
        t_cross = _first_negative_crossing(spec, b, p)
        if t_cross is not None:
            d = min(d, t_cross * float(np.linalg.norm(p - b)))
    if d <= 0:
        raise AssumptionViolationError("negative region touches the reference well")

    eigs = np.linalg.eigvalsh(spec.hessian(b))
    mu = float(eigs[0])
    if mu <= 0:
        raise AssumptionViolationError(
            "Hessian at the reference well is not positive definite"
        )

    return PotentialConstants(m=float(m), point_a=point_a, M=float(M), d=float(d), mu=mu)


def _first_negative_crossing(spec: PotentialSpec, b, p, samples: int = 2001):
    """Smallest t in (0, 1] with W(b + t (p - b)) < 0, bisected to ~1e-14."""
    ts = np.linspace(0.0, 1.0, samples)
    line = b + np.multiply.outer(ts, p - b)
    w = spec.value(line)
    negs = np.nonzero(w < 0)[0]
    if negs.size == 0:
        return None
    j = int(negs[0])
    if j == 0:
        return 0.0
    t_lo, t_hi = ts[j - 1], ts[j]
    for _ in range(80):
        t_mid = 0.5 * (t_lo + t_hi)
        if float(spec.value(b + t_mid * (p - b))) < 0:
            t_hi = t_mid
        else:
            t_lo = t_mid
    return 0.5 * (t_lo + t_hi)


def find_equilibria(
    spec: PotentialSpec,
    per_axis: int = 15,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> list[np.ndarray]:
    """Critical points of the potential with negative value, inside the box.

    Damped Newton on the gradient from a coarse grid of starting points;
    converged roots are deduplicated.  This realizes the equilibria set that
    the left tail of a wave profile can approach.
    """
    lo, hi = spec.bounding_box[:, 0], spec.bounding_box[:, 1]
    per_axis = per_axis if spec.dim <= 2 else max(5, int(round(3000 ** (1 / spec.dim))))
    axes = [np.linspace(a, b, per_axis) for a, b in spec.bounding_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    starts = np.stack([m.ravel() for m in mesh], axis=-1)
    step_cap = 0.25 * float(np.linalg.norm(hi - lo))

    found: list[np.ndarray] = []
    for q0 in starts:
        q = q0.astype(float).copy()
        ok = False
        for _ in range(max_iter):
            g = np.asarray(spec.gradient(q), dtype=float)
            gn = float(np.linalg.norm(g))
            if gn <= tol:
                ok = True
                break
            H = np.asarray(spec.hessian(q), dtype=float)
            try:
                step = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                break
            sl = float(np.linalg.norm(step))
            if sl > step_cap:
                step *= step_cap / sl
            lam = 1.0
            while lam > 1e-6:
                q_new = q + lam * step
                if float(np.linalg.norm(spec.gradient(q_new))) < gn:
                    break
                lam *= 0.5
            else:
                break
            q = q_new
        if not ok:
            continue
        if np.any(q < lo - 1e-9) or np.any(q > hi + 1e-9):
            continue
        if float(spec.value(q)) >= -NEG_TOL:
            continue
        if any(np.linalg.norm(q - p) < 1e-6 for p in found):
            continue
        found.append(q)
    return found


def well_minima(spec: PotentialSpec) -> list[np.ndarray]:
    """Equilibria with negative potential that are local minima (definite Hessian)."""
    wells = []
    for q in find_equilibria(spec):
        if np.linalg.eigvalsh(spec.hessian(q))[0] > 0:
            wells.append(q)
    return wells


def project_to_zero_set(
    spec: PotentialSpec,
    point,
    proj_tol: float = PROJ_TOL,
    gradient_floor: float = GRADIENT_FLOOR,
    max_iter: int = PROJ_MAX_ITER,
) -> np.ndarray:
    """Project a point onto the boundary of the negative region.

    Damped Newton steps along the gradient direction; the result q satisfies
    |W(q)| <= proj_tol and is verified to sit on the boundary of {W < 0}
    (an inward probe must go negative), so the isolated zero at the
    reference well is rejected.  A point already on the boundary is
    returned as is.
    """
    q = np.asarray(point, dtype=float).copy()
    if q.shape != (spec.dim,):
        raise ContractViolationError(f"point has shape {q.shape}, expected ({spec.dim},)")
    lo, hi = spec.bounding_box[:, 0], spec.bounding_box[:, 1]
    if np.any(q < lo) or np.any(q > hi):
        raise ContractViolationError("point to project lies outside the bounding box")
    step_cap = 0.2 * float(np.linalg.norm(hi - lo))

    def on_boundary(qq) -> bool:
        g = np.asarray(spec.gradient(qq), dtype=float)
        gn = float(np.linalg.norm(g))
        if gn < gradient_floor:
            return False
        probe = 1e-3 * float(np.linalg.norm(hi - lo))
        return float(spec.value(qq - probe * g / gn)) < 0.0

    w = float(spec.value(q))
    if abs(w) <= proj_tol:
        if on_boundary(q):
            return q
        raise DegenerateProjectionError(
            "point satisfies |W| <= tol but is not on the negative-region boundary"
        )
    for _ in range(max_iter):
        g = np.asarray(spec.gradient(q), dtype=float)
        gn2 = float(np.dot(g, g))
        if np.sqrt(gn2) < gradient_floor:
            raise DegenerateProjectionError(
                "gradient magnitude fell below the floor during projection"
            )
        step = -(w / gn2) * g
        step_len = float(np.linalg.norm(step))
        if step_len > step_cap:
            step *= step_cap / step_len
        lam = 1.0
        while lam > 1e-8:
            q_new = q + lam * step
            w_new = float(spec.value(q_new))
            if abs(w_new) < abs(w):
                break
            lam *= 0.5
        else:
            raise ProjectionConvergenceError("projection stalled without progress")
        q, w = q_new, w_new
        if abs(w) <= proj_tol:
            if on_boundary(q):
                return q
            raise DegenerateProjectionError(
                "projection converged to a degenerate zero away from the boundary"
            )
    raise ProjectionConvergenceError(
        f"projection did not reach |W| <= {proj_tol:g} in {max_iter} iterations"
    )
