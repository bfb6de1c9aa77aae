"""Attractor classification for the planar normal form and for the 1D map h.

Planar orbits are labelled periodic by point recurrence, and chaotic orbits get a
band count from the greatest common divisor of return times to small balls around
reference points (valid for continuous maps).  Orbits of h get a band count by
box counting, since h is discontinuous and return-time arguments break down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels as K
from .cycles import Itinerary
from .errors import DomainError, PreconditionError
from .normal_form import DEFAULT_ESCAPE_RADIUS, NormalFormParams, PlanarPoint
from .onedim import ReducedParams, absorbing_interval, branch_count, branches_over_J, delta_invertibility, fixed_point


@dataclass(frozen=True)
class AttractorClass:
    """One of Periodic(period, itinerary), Chaotic(bands), Divergent, Undetermined."""

    tag: str
    period: int | None = None
    bands: int | None = None
    itinerary: Itinerary | None = None
    # for periodic orbits of h: branch indices along the cycle, minimal rotation first
    branches: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.tag not in ("Periodic", "Chaotic", "Divergent", "Undetermined"):
            raise ValueError(f"unknown class tag {self.tag!r}")
        if self.tag == "Periodic" and not (self.period and self.period >= 1):
            raise ValueError("Periodic needs period >= 1")
        if self.tag == "Chaotic" and not (self.bands and self.bands >= 1):
            raise ValueError("Chaotic needs bands >= 1")

    @classmethod
    def periodic(cls, period: int, itinerary: Itinerary | None = None) -> AttractorClass:
        return cls("Periodic", period=period, itinerary=itinerary)

    @classmethod
    def periodic_1d(cls, ks) -> AttractorClass:
        ks = tuple(int(k) for k in ks)
        rot = min(ks[i:] + ks[:i] for i in range(len(ks)))
        return cls("Periodic", period=len(ks), branches=rot)

    @classmethod
    def chaotic(cls, bands: int) -> AttractorClass:
        return cls("Chaotic", bands=bands)

    @classmethod
    def divergent(cls) -> AttractorClass:
        return cls("Divergent")

    @classmethod
    def undetermined(cls) -> AttractorClass:
        return cls("Undetermined")

    def key(self) -> tuple:
        """Comparable summary: tag with period or band count."""
        return (self.tag, self.period, self.bands)

    def __str__(self) -> str:
        if self.tag == "Periodic":
            return f"Periodic{{{self.period}}}"
        if self.tag == "Chaotic":
            return f"Chaotic{{{self.bands}}}"
        return self.tag


@dataclass(frozen=True)
class GcdConfig:
    epsilon: float = 1e-4
    n_refs: int = 2000
    orbit_len: int = 200_000
    burn_in: int = 10_000

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.n_refs < 1:
            raise ValueError("n_refs must be at least 1")


@dataclass(frozen=True)
class Budgets2D:
    burn_in: int = 10_000
    q_max: int = 200
    period_tol: float = 1e-9
    # recurrence this close but not within period_tol means still converging
    loose_tol: float = 1e-6
    escape_radius: float = DEFAULT_ESCAPE_RADIUS
    min_returns: int = 20
    gcd: GcdConfig = field(default_factory=GcdConfig)


def eckstein_gcd_stats(orbit: np.ndarray, cfg: GcdConfig = GcdConfig()) -> tuple[int, int]:
    """The gcd of return-index differences and how many differences were found.

    ``orbit`` is an (n, d) array; the first ``burn_in`` points are discarded, the
    next ``n_refs`` become references, and every later point within ``epsilon``
    (Euclidean) of a reference contributes its index difference.
    """
    pts = np.asarray(orbit, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    tail = pts[cfg.burn_in :]
    if tail.shape[0] <= cfg.n_refs:
        return 1, 0
    refs = tail[: cfg.n_refs]
    tree = cKDTree(tail)
    g, count = 0, 0
    for i, hits in enumerate(tree.query_ball_point(refs, cfg.epsilon)):
        for j in hits:
            if j > i:
                g = math.gcd(g, j - i)
                count += 1
    return (g if g > 0 else 1), count


def eckstein_gcd(orbit: np.ndarray, cfg: GcdConfig = GcdConfig()) -> int:
    """Band count of a chaotic attractor of a continuous map from one long orbit (1 if no returns)."""
    return eckstein_gcd_stats(orbit, cfg)[0]


def classify_2d(params: NormalFormParams, p0: PlanarPoint, budgets: Budgets2D = Budgets2D()) -> AttractorClass:
    tl, dl, tr, dr = params.as_tuple()
    R = budgets.escape_radius
    x, y, esc = K.iterate_2d(tl, dl, tr, dr, float(p0[0]), float(p0[1]), budgets.burn_in, R)
    if esc >= 0:
        return AttractorClass.divergent()
    q_max = budgets.q_max
    probe, n_done = K.orbit_2d(tl, dl, tr, dr, x, y, 3 * q_max, R)
    if n_done < 3 * q_max:
        return AttractorClass.divergent()
    q = K.find_period_2d(probe, q_max, budgets.period_tol)
    if q:
        word = "".join("L" if px <= 0 else "R" for px in probe[-q:, 0])
        return AttractorClass.periodic(q, Itinerary(word))
    cfg = budgets.gcd
    x, y = probe[-1]
    orbit, n_done = K.orbit_2d(tl, dl, tr, dr, x, y, cfg.orbit_len, R)
    if n_done < cfg.orbit_len:
        return AttractorClass.divergent()
    q = K.find_period_2d(orbit, q_max, budgets.period_tol)
    if q:
        word = "".join("L" if px <= 0 else "R" for px in orbit[-q:, 0])
        return AttractorClass.periodic(q, Itinerary(word))
    if K.find_period_2d(orbit, q_max, budgets.loose_tol):
        return AttractorClass.undetermined()
    burn = min(cfg.burn_in, max(0, cfg.orbit_len - 2 * cfg.n_refs))
    g, count = eckstein_gcd_stats(orbit, GcdConfig(cfg.epsilon, cfg.n_refs, cfg.orbit_len, burn))
    if count < budgets.min_returns:
        # too few returns for the gcd to mean anything
        return AttractorClass.undetermined()
    return AttractorClass.chaotic(g)


def count_runs(marks: np.ndarray) -> int:
    """Number of maximal runs of nonzero entries."""
    occ = np.asarray(marks) > 0
    if not occ.any():
        return 0
    return int(occ[0]) + int(np.count_nonzero(occ[1:] & ~occ[:-1]))


def boxcount_bands_1d(
    rp: ReducedParams,
    n_boxes: int = 1000,
    orbit_len: int = 1_000_000,
    burn_in: int = 10_000,
    z0: float | None = None,
) -> int:
    """Connected clusters of visited boxes among ``n_boxes`` equal boxes spanning J."""
    if not rp.positive():
        raise DomainError("box counting needs eta > 0 and nu > 0")
    if rp.eta == rp.nu:
        return 1
    if z0 is None:
        z0 = 0.5 * (rp.eta + rp.nu)
    z = K.h_iterate(rp.eta, rp.nu, rp.sigma, float(z0), burn_in)
    marks, _ = K.h_boxcount(rp.eta, rp.nu, rp.sigma, z, orbit_len, n_boxes)
    return count_runs(marks)


@dataclass(frozen=True)
class Budgets1D:
    burn_in: int = 10_000
    q_max: int = 200
    period_tol: float = 1e-9
    n_boxes: int = 1000
    orbit_len: int = 1_000_000
    n_initial: int = 1


@dataclass(frozen=True)
class Classification1D:
    """The class seen from the first initial condition, plus every distinct class seen."""

    primary: AttractorClass
    found: tuple[AttractorClass, ...]


def initial_conditions_1d(rp: ReducedParams, n: int, rng: np.random.Generator | None = None) -> list[float]:
    """Midpoint of J first, then interior quantiles, then seeded random points of J."""
    lo, hi = min(rp.eta, rp.nu), max(rp.eta, rp.nu)
    out = [0.5 * (lo + hi)]
    quant = [0.25, 0.75, 0.1, 0.9]
    for qv in quant[: max(0, min(n - 1, len(quant)))]:
        out.append(lo + qv * (hi - lo))
    if n > len(out):
        rng = rng if rng is not None else np.random.default_rng(0)
        out.extend(rng.uniform(lo, hi, n - len(out)).tolist())
    return out[:n]


def _classify_from(rp: ReducedParams, z0: float, b: Budgets1D) -> AttractorClass:
    eta, nu, sig = rp.eta, rp.nu, rp.sigma
    z = K.h_iterate(eta, nu, sig, float(z0), b.burn_in)
    if not z > 0:
        return AttractorClass.divergent()
    zs, ks = K.h_orbit(eta, nu, sig, z, 3 * b.q_max)
    if not zs[-1] > 0:
        return AttractorClass.divergent()
    q = K.find_period(zs, b.q_max, b.period_tol)
    if q:
        return AttractorClass.periodic_1d(ks[-q:])
    marks, zend = K.h_boxcount(eta, nu, sig, zs[-1], b.orbit_len, b.n_boxes)
    if not zend > 0:
        return AttractorClass.divergent()
    zs, ks = K.h_orbit(eta, nu, sig, zend, 3 * b.q_max)
    q = K.find_period(zs, b.q_max, b.period_tol)
    if q:
        return AttractorClass.periodic_1d(ks[-q:])
    return AttractorClass.chaotic(max(1, count_runs(marks)))


def classify_1d(
    rp: ReducedParams,
    budgets: Budgets1D = Budgets1D(),
    rng: np.random.Generator | None = None,
) -> Classification1D:
    """Classify the attractor(s) of h reached from ``budgets.n_initial`` initial conditions.

    With eta or nu non-positive, orbits reaching z <= 0 count as divergent (they
    correspond to planar orbits leaving through the stable line).
    """
    if rp.eta == rp.nu:
        if rp.eta > 0:
            c = AttractorClass.periodic_1d((K.branch_index(rp.eta, rp.sigma),))
        else:
            c = AttractorClass.divergent()
        return Classification1D(c, (c,))
    if not (rp.eta > 0 or rp.nu > 0):
        c = AttractorClass.divergent()
        return Classification1D(c, (c,))
    if rp.positive():
        starts = initial_conditions_1d(rp, budgets.n_initial, rng)
    else:
        hi = max(rp.eta, rp.nu)
        starts = [hi * t for t in np.linspace(0.5, 0.999, budgets.n_initial)]
    found: list[AttractorClass] = []
    for z0 in starts:
        c = _classify_from(rp, z0, budgets)
        if c not in found:
            found.append(c)
    return Classification1D(found[0] if starts else AttractorClass.undetermined(), tuple(found))


@dataclass(frozen=True)
class RotationNumber:
    rho: float
    rational: tuple[int, int] | None
    resolved: bool
    k: int


def _two_branch_k(rp: ReducedParams) -> int:
    if not rp.positive():
        raise PreconditionError("rotation number needs eta > 0 and nu > 0")
    if not rp.eta > rp.nu:
        raise PreconditionError("rotation number needs increasing branches (eta > nu)")
    if branch_count(rp) != 2:
        raise PreconditionError("rotation number needs exactly two branches over J")
    if not delta_invertibility(rp) < 0:
        raise PreconditionError("rotation number needs Delta < 0 (non-overlapping branches)")
    return min(branches_over_J(rp))


def rotation_number(
    rp: ReducedParams,
    n_iter: int = 100_000,
    burn_in: int = 10_000,
    q_max: int = 200,
    tol: float = 1e-9,
    agree_tol: float = 1e-4,
) -> RotationNumber:
    """Fraction of iterates landing in I_k, the upper of the two branch intervals over J."""
    k = _two_branch_k(rp)
    eta, nu, sig = rp.eta, rp.nu, rp.sigma
    z = K.h_iterate(eta, nu, sig, 0.5 * (eta + nu), burn_in)
    zs, ks = K.h_orbit(eta, nu, sig, z, 3 * q_max)
    q = int(K.find_period(zs, q_max, tol))
    if q:
        u = int(np.count_nonzero(K.branch_index_array(zs[-q:], sig) == k))
        g = math.gcd(u, q)
        return RotationNumber(u / q, (u // g, q // g), True, k)
    half = n_iter // 2
    c1, z = K.h_visit_count(eta, nu, sig, zs[-1], half, k)
    c2, _ = K.h_visit_count(eta, nu, sig, z, n_iter - half, k)
    r1, r2 = c1 / half, c2 / (n_iter - half)
    rho = (c1 + c2) / n_iter
    return RotationNumber(rho, None, abs(r1 - r2) <= agree_tol, k)


def farey_parent_check(fractions: list[Fraction]) -> bool:
    """True if, for every pair of Farey neighbours in the sequence, their mediant (when present) sits between them.

    ``fractions`` is taken in parameter order, e.g. the rational tongues met along a slice.
    """
    pos: dict[Fraction, int] = {}
    for i, f in enumerate(fractions):
        pos.setdefault(Fraction(f), i)
    fs = list(pos)
    for a in fs:
        for b in fs:
            if a < b and b.numerator * a.denominator - a.numerator * b.denominator == 1:
                med = Fraction(a.numerator + b.numerator, a.denominator + b.denominator)
                if med in pos and not min(pos[a], pos[b]) < pos[med] < max(pos[a], pos[b]):
                    return False
    return True


@dataclass(frozen=True)
class MergingHit:
    j: int
    endpoint: str
    target_k: int
    distance: float


def merging_condition_scan(rp: ReducedParams, j_max: int = 20, tol: float = 1e-9) -> list[MergingHit]:
    """Report j, endpoint with h^j(endpoint) within ``tol`` (relative to |J|) of an unstable fixed point."""
    if not rp.positive():
        raise DomainError("merging scan needs eta > 0 and nu > 0")
    if rp.eta == rp.nu:
        return []
    targets = []
    for k in branches_over_J(rp):
        fp = fixed_point(rp, k)
        if fp.admissible and abs(fp.slope) > 1 and fp.value in absorbing_interval(rp):
            targets.append(fp)
    width = abs(rp.eta - rp.nu)
    hits: list[MergingHit] = []
    for name, z in (("eta", rp.eta), ("nu", rp.nu)):
        zs, _ = K.h_orbit(rp.eta, rp.nu, rp.sigma, z, j_max)
        for j, zj in enumerate(zs, start=1):
            for fp in targets:
                d = abs(zj - fp.value)
                if d <= tol * width:
                    hits.append(MergingHit(j, name, fp.k, d / width))
    return hits
