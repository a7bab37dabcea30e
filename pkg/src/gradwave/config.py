"""Run configuration: sectioned key-value files, strictly validated.

The format is INI-style with five sections (potential, grid, solver, mode,
output).  Unknown sections or keys are rejected, every numeric field is
range-checked, and error messages name the offending section and field.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .minimize import MinimizeOptions
from .potential import PotentialSpec, decoupled_quartic, scalar_cubic, user_polynomial

_SECTIONS = {
    "potential": {"variant", "alpha", "beta", "dim", "terms", "well_b", "box"},
    "grid": {"x_left", "x_right", "h", "refinement"},
    "solver": {"opt_tol", "penalty_kappa", "max_iters", "restarts", "seed", "feas_tol"},
    "mode": {"c", "c_list", "c_tol"},
    "output": {"directory", "report"},
}


@dataclass
class RunConfig:
    """Validated run settings, plus the raw echo for reports."""

    variant: str
    alpha: float | None
    beta: float | None
    dim: int | None
    terms: list | None
    well_b: list | None
    box: list | None
    x_left: float | None
    x_right: float | None
    h: float
    refinement: str
    opt_tol: float
    penalty_kappa: float
    max_iters: int
    restarts: int
    seed: int
    feas_tol: float
    c: float | None
    c_list: list | None
    c_tol: float | None
    directory: str
    report: str
    raw: dict = field(default_factory=dict)

    def minimize_options(self) -> MinimizeOptions:
        return MinimizeOptions(
            opt_tol=self.opt_tol,
            max_iters=self.max_iters,
            restarts=self.restarts,
            seed=self.seed,
            feas_tol=self.feas_tol,
        )


def _get_float(cp, section, key, default=None, positive=False, nonnegative=False):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got '{raw}'")
    if positive and not val > 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {val}")
    if nonnegative and val < 0:
        raise ConfigError(f"{section}.{key}: must be nonnegative, got {val}")
    return val


def _get_int(cp, section, key, default=None, positive=False, nonnegative=False):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got '{raw}'")
    if positive and not val > 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {val}")
    if nonnegative and val < 0:
        raise ConfigError(f"{section}.{key}: must be nonnegative, got {val}")
    return val


def _parse_floats(raw, section, key):
    try:
        return [float(v) for v in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected numbers, got '{raw}'")


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp.options(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    if not cp.has_section("potential"):
        raise ConfigError("missing required section [potential]")

    variant = cp.get("potential", "variant", fallback=None)
    if variant is None:
        raise ConfigError("potential.variant is required")
    if variant not in ("scalar_cubic", "decoupled_quartic", "user_polynomial"):
        raise ConfigError(f"potential.variant: unknown variant '{variant}'")

    alpha = _get_float(cp, "potential", "alpha")
    beta = _get_float(cp, "potential", "beta")
    dim = _get_int(cp, "potential", "dim", positive=True)
    terms = None
    well_b = None
    box = None
    if variant == "scalar_cubic":
        if alpha is None:
            raise ConfigError("potential.alpha is required for scalar_cubic")
    elif variant == "decoupled_quartic":
        if alpha is None or beta is None:
            raise ConfigError("potential.alpha and potential.beta are required for decoupled_quartic")
    else:
        if dim is None:
            raise ConfigError("potential.dim is required for user_polynomial")
        raw_terms = cp.get("potential", "terms", fallback=None)
        if raw_terms is None:
            raise ConfigError("potential.terms is required for user_polynomial")
        terms = []
        for chunk in raw_terms.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split()
            if len(parts) != 1 + dim:
                raise ConfigError(
                    f"potential.terms: each term needs a coefficient and {dim} exponents, got '{chunk}'"
                )
            try:
                coeff = float(parts[0])
                exps = [int(p) for p in parts[1:]]
            except ValueError:
                raise ConfigError(f"potential.terms: malformed term '{chunk}'")
            terms.append((coeff, exps))
        raw_well = cp.get("potential", "well_b", fallback=None)
        if raw_well is None:
            raise ConfigError("potential.well_b is required for user_polynomial")
        well_b = _parse_floats(raw_well, "potential", "well_b")
        if len(well_b) != dim:
            raise ConfigError(f"potential.well_b: expected {dim} components")
        raw_box = cp.get("potential", "box", fallback=None)
        if raw_box is None:
            raise ConfigError("potential.box is required for user_polynomial")
        box = []
        for part in raw_box.split(","):
            ends = part.split(":")
            if len(ends) != 2:
                raise ConfigError(f"potential.box: expected lo:hi pairs, got '{part.strip()}'")
            lo, hi = (float(e) for e in ends)
            if not lo < hi:
                raise ConfigError("potential.box: each interval needs lo < hi")
            box.append([lo, hi])
        if len(box) != dim:
            raise ConfigError(f"potential.box: expected {dim} intervals")

    x_left = None
    x_right = None
    if cp.has_option("grid", "x_left") and cp.get("grid", "x_left") != "auto":
        x_left = _get_float(cp, "grid", "x_left")
        if x_left is not None and x_left >= 0:
            raise ConfigError(f"grid.x_left: must be negative, got {x_left}")
    if cp.has_option("grid", "x_right") and cp.get("grid", "x_right") != "auto":
        x_right = _get_float(cp, "grid", "x_right")
        if x_right is not None and x_right <= 0:
            raise ConfigError(f"grid.x_right: must be positive, got {x_right}")
    h = _get_float(cp, "grid", "h", default=0.01, positive=True)
    refinement = cp.get("grid", "refinement", fallback="uniform")
    if refinement not in ("uniform", "geometric"):
        raise ConfigError(f"grid.refinement: expected uniform or geometric, got '{refinement}'")

    opt_tol = _get_float(cp, "solver", "opt_tol", default=1e-8, positive=True)
    penalty_kappa = _get_float(cp, "solver", "penalty_kappa", default=1e3, nonnegative=True)
    max_iters = _get_int(cp, "solver", "max_iters", default=200_000, positive=True)
    restarts = _get_int(cp, "solver", "restarts", default=3, nonnegative=True)
    seed = _get_int(cp, "solver", "seed", default=0, nonnegative=True)
    feas_tol = _get_float(cp, "solver", "feas_tol", default=1e-8, positive=True)

    c = _get_float(cp, "mode", "c", positive=True)
    c_tol = _get_float(cp, "mode", "c_tol", positive=True)
    c_list = None
    if cp.has_option("mode", "c_list"):
        c_list = _parse_floats(cp.get("mode", "c_list"), "mode", "c_list")
        if not c_list:
            raise ConfigError("mode.c_list: must not be empty")
        if any(v <= 0 for v in c_list):
            raise ConfigError("mode.c_list: all speeds must be positive")
        if any(b <= a for a, b in zip(c_list, c_list[1:])):
            raise ConfigError("mode.c_list: must be strictly increasing")

    directory = cp.get("output", "directory", fallback="out")
    report = cp.get("output", "report", fallback="report.json")

    raw = {s: dict(cp.items(s)) for s in cp.sections()}
    return RunConfig(
        variant=variant, alpha=alpha, beta=beta, dim=dim, terms=terms,
        well_b=well_b, box=box,
        x_left=x_left, x_right=x_right, h=h, refinement=refinement,
        opt_tol=opt_tol, penalty_kappa=penalty_kappa, max_iters=max_iters,
        restarts=restarts, seed=seed, feas_tol=feas_tol,
        c=c, c_list=c_list, c_tol=c_tol,
        directory=directory, report=report, raw=raw,
    )


def build_potential(cfg: RunConfig) -> PotentialSpec:
    if cfg.variant == "scalar_cubic":
        return scalar_cubic(cfg.alpha)
    if cfg.variant == "decoupled_quartic":
        return decoupled_quartic(cfg.alpha, cfg.beta)
    return user_polynomial(cfg.dim, cfg.terms, cfg.well_b, cfg.box)


def auto_grid_bounds(consts, c_floor: float) -> tuple:
    """Default truncation: left tail sized by the weight, right by the decay rate."""
    lam = 0.5 * (c_floor + float(np.sqrt(c_floor * c_floor + 4.0 * consts.mu)))
    return -40.0 / c_floor, 40.0 / lam
