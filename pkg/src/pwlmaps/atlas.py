"""Parameter sweeps over both families, one-parameter slices, and simple basin pictures.

Every cell is classified independently with a random stream derived from
(seed, cell index), so the result does not depend on how cells are split over
worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels as K
from .classify import (
    AttractorClass,
    Budgets1D,
    Budgets2D,
    GcdConfig,
    classify_1d,
    classify_2d,
    merging_condition_scan,
    rotation_number,
)
from .cycles import candidate_itineraries, default_initial_points, grow_region
from .errors import ConfigError, DomainError, PreconditionError, PwlError
from .grid import Axis, ParamGrid
from .normal_form import PARAM_NAMES, NormalFormParams, PlanarPoint
from .onedim import ReducedParams, branch_count, delta_invertibility

ONE_D_NAMES = ("eta", "nu", "sigma")

# scan budgets are lighter than the single-point defaults; see SCAN_* below
SCAN_BUDGETS_1D = Budgets1D(orbit_len=200_000)
SCAN_BUDGETS_2D = Budgets2D(burn_in=5_000, gcd=GcdConfig(epsilon=1e-3, orbit_len=30_000, n_refs=500, burn_in=0))


@dataclass(frozen=True)
class CellRecord:
    cls: AttractorClass
    eta: float | None = None
    nu: float | None = None
    N: int | None = None
    delta: float | None = None
    rho: float | None = None


@dataclass(frozen=True)
class ScanConfig:
    family: str
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)
    budgets: Any = None
    rng_seed: int = 0
    n_workers: int = 1
    m: int = 2
    # TwoD only: grow stable-cycle masks from simulated candidates
    grow_cycles: bool = False
    coarse_resolution: int = 12

    def __post_init__(self) -> None:
        if self.family not in ("OneD", "TwoD"):
            raise ConfigError(f"family must be OneD or TwoD, got {self.family!r}")
        names = ONE_D_NAMES if self.family == "OneD" else PARAM_NAMES
        if self.axis1.name == self.axis2.name:
            raise ConfigError("the two axes must name different parameters")
        for ax in (self.axis1, self.axis2):
            if ax.name not in names:
                raise ConfigError(f"{ax.name!r} is not a parameter of the {self.family} family")
        missing = set(names) - {self.axis1.name, self.axis2.name} - set(self.fixed)
        if missing:
            raise ConfigError(f"fixed values missing for {sorted(missing)}")
        extra = set(self.fixed) - set(names)
        if extra:
            raise ConfigError(f"unknown fixed parameters {sorted(extra)}")
        if self.n_workers < 1:
            raise ConfigError("n_workers must be at least 1")
        if self.budgets is None:
            object.__setattr__(self, "budgets", SCAN_BUDGETS_1D if self.family == "OneD" else SCAN_BUDGETS_2D)

    @property
    def grid(self) -> ParamGrid:
        fixed = {k: float(v) for k, v in self.fixed.items() if k not in (self.axis1.name, self.axis2.name)}
        return ParamGrid(self.axis1, self.axis2, fixed)

    def echo(self) -> dict:
        b = self.budgets
        return {
            "family": self.family,
            "axis1": {"name": self.axis1.name, "spec": self.axis1.spec()},
            "axis2": {"name": self.axis2.name, "spec": self.axis2.spec()},
            "fixed": {k: float(v) for k, v in sorted(self.fixed.items())},
            "budgets": _budget_dict(b),
            "m": self.m,
            "n_workers": self.n_workers,
            "grow_cycles": self.grow_cycles,
        }


def _budget_dict(b: Any) -> dict:
    out = {}
    for k, v in vars(b).items():
        out[k] = _budget_dict(v) if hasattr(v, "__dataclass_fields__") else v
    return out


@dataclass
class ScanResult:
    config: ScanConfig
    cells: list[list[CellRecord]]
    runtime_seconds: float
    cycle_masks: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.config.axis1.n, self.config.axis2.n)

    def classes(self) -> list[list[AttractorClass]]:
        return [[c.cls for c in row] for row in self.cells]

    def label_grid(self) -> tuple[np.ndarray, list[tuple]]:
        """Integer label per cell plus the class key of each label."""
        keys: dict[tuple, int] = {}
        lab = np.zeros(self.shape, dtype=np.int64)
        for i, row in enumerate(self.cells):
            for j, c in enumerate(row):
                lab[i, j] = keys.setdefault(c.cls.key(), len(keys))
        return lab, list(keys)


def _cell_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def classify_cell_1d(values: dict, budgets: Budgets1D, rng: np.random.Generator) -> CellRecord:
    try:
        rp = ReducedParams(values["eta"], values["nu"], values["sigma"])
    except DomainError:
        return CellRecord(AttractorClass.undetermined())
    cls = classify_1d(rp, budgets, rng).primary
    N = branch_count(rp) if rp.positive() else None
    delta = delta_invertibility(rp)
    rho = None
    if N == 2:
        try:
            rho = rotation_number(rp).rho
        except PreconditionError:
            rho = None
    return CellRecord(cls, rp.eta, rp.nu, N, delta, rho)


def classify_cell_2d(values: dict, budgets: Budgets2D, rng: np.random.Generator, m: int) -> CellRecord:
    params = NormalFormParams(**values)
    eta = nu = None
    N = delta = None
    if params.in_Xi():
        from .reduction import _fixed_point_reduction

        try:
            rp, _ = _fixed_point_reduction(params, m, check=False)
            eta, nu = rp.eta, rp.nu
            delta = delta_invertibility(rp)
            N = branch_count(rp) if rp.positive() else None
        except (PwlError, ValueError):
            pass
    p0 = default_initial_points(params, 1, rng)[0]
    cls = classify_2d(params, PlanarPoint(*p0), budgets)
    return CellRecord(cls, eta, nu, N, delta, None)


def _run_chunk(args: tuple) -> list[tuple[int, int, CellRecord]]:
    config, cells = args
    grid = config.grid
    out = []
    for i, j in cells:
        idx = i * config.axis2.n + j
        rng = _cell_rng(config.rng_seed, idx)
        values = grid.values_at(i, j)
        if config.family == "OneD":
            rec = classify_cell_1d(values, config.budgets, rng)
        else:
            rec = classify_cell_2d(values, config.budgets, rng, config.m)
        out.append((i, j, rec))
    return out


def scan(config: ScanConfig) -> ScanResult:
    t0 = time.perf_counter()
    n1, n2 = config.axis1.n, config.axis2.n
    all_cells = [(i, j) for i in range(n1) for j in range(n2)]
    n_chunks = max(1, config.n_workers * 8)
    chunks = [all_cells[k::n_chunks] for k in range(n_chunks)]
    chunks = [c for c in chunks if c]
    grid: list[list[CellRecord | None]] = [[None] * n2 for _ in range(n1)]
    if config.n_workers == 1:
        results = map(_run_chunk, [(config, c) for c in chunks])
        for part in results:
            for i, j, rec in part:
                grid[i][j] = rec
    else:
        with ProcessPoolExecutor(max_workers=config.n_workers) as ex:
            for part in ex.map(_run_chunk, [(config, c) for c in chunks]):
                for i, j, rec in part:
                    grid[i][j] = rec
    masks: dict[str, np.ndarray] = {}
    if config.family == "TwoD" and config.grow_cycles:
        cands = candidate_itineraries(config.grid, config.coarse_resolution, config.budgets.burn_in, config.rng_seed)
        for itin in sorted(cands, key=lambda w: (w.period, w.word)):
            masks[itin.pretty()] = grow_region(config.grid, itin, cands[itin])
    return ScanResult(config, grid, time.perf_counter() - t0, masks)  # type: ignore[arg-type]


@dataclass
class SlicePoint:
    t: float
    params: dict
    cls: AttractorClass
    found: tuple[AttractorClass, ...]
    support: np.ndarray
    rho: float | None = None
    N: int | None = None


@dataclass
class SliceResult:
    family: str
    description: dict
    points: list[SlicePoint]


def _support_1d(rp: ReducedParams, z0: float, burn_in: int, n: int) -> np.ndarray:
    z = K.h_iterate(rp.eta, rp.nu, rp.sigma, z0, burn_in)
    if not z > 0:
        return np.empty(0)
    zs, _ = K.h_orbit(rp.eta, rp.nu, rp.sigma, z, n)
    return zs[zs > 0]


def slice_1d(
    sigma: float,
    ratio: float,
    eta_range: tuple[float, float],
    n_points: int,
    budgets: Budgets1D = Budgets1D(orbit_len=200_000, n_initial=5),
    n_support: int = 200,
) -> SliceResult:
    """Bifurcation diagram of h along nu = ratio * eta."""
    if n_points < 2 or not eta_range[1] > eta_range[0]:
        raise ConfigError("need n_points >= 2 and a nonempty eta range")
    pts = []
    for eta in np.linspace(eta_range[0], eta_range[1], n_points):
        rp = ReducedParams(float(eta), float(ratio * eta), sigma)
        c = classify_1d(rp, budgets)
        supp = _support_1d(rp, 0.5 * (rp.eta + rp.nu), budgets.burn_in, n_support)
        rho = None
        N = branch_count(rp) if rp.positive() else None
        if N == 2:
            try:
                rho = rotation_number(rp).rho
            except PreconditionError:
                pass
        pts.append(SlicePoint(float(eta), {"eta": rp.eta, "nu": rp.nu, "sigma": sigma}, c.primary, c.found, supp, rho, N))
    return SliceResult("OneD", {"sigma": sigma, "ratio": ratio, "eta_range": list(eta_range)}, pts)


def slice_2d(
    start: NormalFormParams,
    end: NormalFormParams,
    n_points: int,
    budgets: Budgets2D = SCAN_BUDGETS_2D,
    n_support: int = 400,
    rng_seed: int = 0,
) -> SliceResult:
    """Bifurcation diagram of f along the straight segment from ``start`` to ``end``."""
    if n_points < 2:
        raise ConfigError("need n_points >= 2")
    a, b = np.array(start.as_tuple()), np.array(end.as_tuple())
    pts = []
    for idx, t in enumerate(np.linspace(0.0, 1.0, n_points)):
        params = NormalFormParams(*(a + t * (b - a)))
        rng = _cell_rng(rng_seed, idx)
        p0 = default_initial_points(params, 1, rng)[0]
        cls = classify_2d(params, PlanarPoint(*p0), budgets)
        tl, dl, tr, dr = params.as_tuple()
        x, y, esc = K.iterate_2d(tl, dl, tr, dr, p0[0], p0[1], budgets.burn_in, budgets.escape_radius)
        supp = np.empty((0, 2))
        if esc < 0:
            orb, n_done = K.orbit_2d(tl, dl, tr, dr, x, y, n_support, budgets.escape_radius)
            supp = orb[:n_done]
        pts.append(SlicePoint(float(t), dict(zip(PARAM_NAMES, map(float, params.as_tuple()))), cls, (cls,), supp))
    return SliceResult("TwoD", {"start": list(start.as_tuple()), "end": list(end.as_tuple())}, pts)


def slice_diagram(config: dict) -> SliceResult:
    """Dispatch on ``config['family']``; keys mirror :func:`slice_1d` / :func:`slice_2d`."""
    fam = config.get("family")
    if fam == "OneD":
        return slice_1d(config["sigma"], config["ratio"], tuple(config["eta_range"]), config["n_points"])
    if fam == "TwoD":
        return slice_2d(
            NormalFormParams(*config["start"]), NormalFormParams(*config["end"]), config["n_points"]
        )
    raise ConfigError(f"slice family must be OneD or TwoD, got {fam!r}")


def branch_intervals_on_slice(res: SliceResult) -> dict[int, list[float]]:
    """For each k, the slice parameters where a stable fixed point on branch k was found."""
    out: dict[int, list[float]] = {}
    for p in res.points:
        for c in p.found:
            if c.tag == "Periodic" and c.period == 1 and c.branches:
                out.setdefault(c.branches[0], []).append(p.t)
    return out


def merging_points_on_slice(
    sigma: float,
    ratio: float,
    eta_range: tuple[float, float],
    j_max: int = 4,
    n_grid: int = 400,
    tol: float = 1e-9,
) -> list[tuple[float, Any]]:
    """Parameters on nu = ratio * eta where eta or nu lands on an unstable fixed point within j_max steps.

    Sign changes of h^j(endpoint) - z_k* on a grid are refined by bisection and kept
    only when :func:`merging_condition_scan` confirms the hit, which discards sign
    changes caused by discontinuities of h^j.
    """
    from .onedim import fixed_point

    def residuals(eta: float) -> dict:
        rp = ReducedParams(eta, ratio * eta, sigma)
        out = {}
        from .onedim import branches_over_J

        for k in branches_over_J(rp):
            fp = fixed_point(rp, k)
            if not (fp.admissible and abs(fp.slope) > 1):
                continue
            for name, z in (("eta", rp.eta), ("nu", rp.nu)):
                zs, _ = K.h_orbit(rp.eta, rp.nu, sigma, z, j_max)
                for j, zj in enumerate(zs, 1):
                    out[(name, j, k)] = zj - fp.value
        return out

    xs = np.linspace(eta_range[0], eta_range[1], n_grid)
    rs = [residuals(float(x)) for x in xs]
    found: list[tuple[float, Any]] = []
    for i in range(n_grid - 1):
        for key, g0 in rs[i].items():
            g1 = rs[i + 1].get(key)
            if g1 is None or np.sign(g0) == np.sign(g1) or g0 == 0:
                continue
            lo, hi = float(xs[i]), float(xs[i + 1])
            s_lo = np.sign(g0)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                gm = residuals(mid).get(key)
                if gm is None:
                    break
                if np.sign(gm) == s_lo:
                    lo = mid
                else:
                    hi = mid
            hits = merging_condition_scan(ReducedParams(lo, ratio * lo, sigma), j_max, tol)
            hits = [h for h in hits if (h.endpoint, h.j, h.target_k) == key]
            if hits:
                found.append((lo, hits[0]))
    found.sort(key=lambda t: t[0])
    return found


def bandcount_changes(
    sigma: float,
    ratio: float,
    eta_range: tuple[float, float],
    n_grid: int = 400,
    orbit_len: int = 1_000_000,
    rel_tol: float = 1e-10,
) -> list[tuple[float, int, int]]:
    """Bisected parameters where the chaotic band count of h changes along the slice.

    Only changes between two chaotic samples are reported.
    """
    from .classify import boxcount_bands_1d

    def cls(eta: float) -> AttractorClass:
        return classify_1d(ReducedParams(eta, ratio * eta, sigma), Budgets1D(orbit_len=orbit_len)).primary

    xs = np.linspace(eta_range[0], eta_range[1], n_grid)
    cs = [cls(float(x)) for x in xs]
    out = []
    for i in range(n_grid - 1):
        a, b = cs[i], cs[i + 1]
        if a.tag != "Chaotic" or b.tag != "Chaotic" or a.bands == b.bands:
            continue
        lo, hi = float(xs[i]), float(xs[i + 1])
        ba = boxcount_bands_1d(ReducedParams(lo, ratio * lo, sigma), orbit_len=orbit_len)
        while hi - lo > rel_tol * lo:
            mid = 0.5 * (lo + hi)
            if boxcount_bands_1d(ReducedParams(mid, ratio * mid, sigma), orbit_len=orbit_len) == ba:
                lo = mid
            else:
                hi = mid
        out.append((0.5 * (lo + hi), int(a.bands), int(b.bands)))
    return out


def basin(
    params: NormalFormParams,
    x_axis: Axis,
    y_axis: Axis,
    budgets: Budgets2D = SCAN_BUDGETS_2D,
) -> tuple[np.ndarray, list[AttractorClass]]:
    """Label initial conditions on a grid by the attractor their orbit reaches."""
    labels = np.zeros((x_axis.n, y_axis.n), dtype=np.int64)
    classes: list[AttractorClass] = []
    keys: dict[tuple, int] = {}
    for i, x in enumerate(x_axis.values):
        for j, y in enumerate(y_axis.values):
            c = classify_2d(params, PlanarPoint(float(x), float(y)), budgets)
            k = (c.key(), c.itinerary.word if c.itinerary else None)
            if k not in keys:
                keys[k] = len(classes)
                classes.append(c)
            labels[i, j] = keys[k]
    return labels, classes


def rotation_tongues(
    sigma: float,
    ratio: float,
    eta_range: tuple[float, float],
    n_points: int = 2000,
    q_max: int = 200,
) -> list[tuple[float, float, tuple[int, int]]]:
    """Maximal runs of equal rational rotation number along nu = ratio * eta.

    Each entry is (eta_first, eta_last, (u, q)) over the sampled points.
    """
    runs: list[list] = []
    for eta in np.linspace(eta_range[0], eta_range[1], n_points):
        rp = ReducedParams(float(eta), float(ratio * eta), sigma)
        try:
            rn = rotation_number(rp, q_max=q_max)
        except PreconditionError:
            continue
        if rn.rational is None:
            continue
        if runs and runs[-1][2] == rn.rational:
            runs[-1][1] = float(eta)
        else:
            runs.append([float(eta), float(eta), rn.rational])
    return [(a, b, r) for a, b, r in runs]


def tongue_center(
    sigma: float, ratio: float, bracket: tuple[float, float], target: tuple[int, int], n: int = 200
) -> float:
    """Midpoint of the sampled eta interval inside ``bracket`` where the rotation number equals u/q."""
    hits = [
        t
        for t in np.linspace(bracket[0], bracket[1], n)
        if rotation_number(ReducedParams(float(t), float(ratio * t), sigma)).rational == target
    ]
    if not hits:
        raise DomainError(f"no rotation number {target} in {bracket}")
    return 0.5 * (hits[0] + hits[-1])


def is_finite(v: float | None) -> bool:
    return v is not None and math.isfinite(v)
