"""The three-parameter discontinuous map h(z; eta, nu, sigma) on z > 0.

Branch k lives on I_k = [sigma^-k, sigma^-(k-1)) and is the affine function that
sends the left end of I_k to nu and the right end towards eta.  Every branch has
the same range, so all invariant sets lie in the interval J with endpoints eta
and nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import _kernels as K
from .errors import DomainError, NoFixedPoint


@dataclass(frozen=True)
class ReducedParams:
    """Parameters (eta, nu, sigma) of h; ``m`` and ``lam`` record where they came from."""

    eta: float
    nu: float
    sigma: float
    m: int | None = None
    lam: float | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 1:
            raise DomainError(f"sigma must exceed 1, got {self.sigma}")

    @property
    def epsilon(self) -> float:
        return max(abs(self.eta), abs(self.nu))

    def positive(self) -> bool:
        return self.eta > 0 and self.nu > 0


def _require_positive(rp: ReducedParams) -> None:
    if not rp.positive():
        raise DomainError(f"need eta > 0 and nu > 0, got eta={rp.eta}, nu={rp.nu}")


def power(sigma: float, k: int) -> float:
    """sigma^-k, the left end of I_k."""
    return K.power_neg(sigma, k)


def branch_index(z: float, sigma: float) -> int:
    if not z > 0:
        raise DomainError(f"h is defined for z > 0, got {z}")
    return int(K.branch_index(z, sigma))


def branch_interval(k: int, sigma: float) -> tuple[float, float]:
    return power(sigma, k), power(sigma, k - 1)


def branch_slope(rp: ReducedParams, k: int) -> float:
    return (rp.eta - rp.nu) / (rp.sigma - 1) * rp.sigma**k


def eval_branch(rp: ReducedParams, k: int, z: float) -> float:
    return float(K.h_branch(z, k, rp.eta, rp.nu, rp.sigma))


def eval_h(rp: ReducedParams, z: float) -> float:
    if not z > 0:
        raise DomainError(f"h is defined for z > 0, got {z}")
    return float(K.h_eval(z, rp.eta, rp.nu, rp.sigma))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def __contains__(self, z: float) -> bool:
        above = z >= self.lo if self.lo_closed else z > self.lo
        below = z <= self.hi if self.hi_closed else z < self.hi
        return above and below

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def length(self) -> float:
        return self.hi - self.lo


def absorbing_interval(rp: ReducedParams) -> Interval:
    if rp.eta < rp.nu:
        return Interval(rp.eta, rp.nu, lo_closed=False, hi_closed=True)
    if rp.eta > rp.nu:
        return Interval(rp.nu, rp.eta, lo_closed=True, hi_closed=False)
    return Interval(rp.eta, rp.eta, lo_closed=True, hi_closed=True)


def _log_ratio(z: float, sigma: float) -> tuple[float, bool]:
    """-ln z / ln sigma, snapped to an integer when z sits on a power of sigma."""
    t = -math.log(z) / math.log(sigma)
    j = round(t)
    if abs(z - power(sigma, j)) <= K.SNAP_RTOL * z:
        return float(j), True
    return t, False


def branch_count(rp: ReducedParams) -> int:
    """Number N of intervals I_k meeting J, by the closed form."""
    _require_positive(rp)
    if rp.eta == rp.nu:
        return 1
    t_eta, _ = _log_ratio(rp.eta, rp.sigma)
    t_nu, _ = _log_ratio(rp.nu, rp.sigma)
    if rp.eta < rp.nu:
        return math.ceil(t_eta) - math.ceil(t_nu) + 1
    return math.ceil(t_nu) - math.floor(t_eta)


def branches_over_J(rp: ReducedParams) -> list[int]:
    """The branch indices k with I_k meeting J, largest z first."""
    _require_positive(rp)
    lo, hi = min(rp.eta, rp.nu), max(rp.eta, rp.nu)
    k_lo = branch_index(lo, rp.sigma)
    if rp.eta < rp.nu:
        # J = (eta, nu]; an open left end on a boundary excludes nothing extra
        k_hi = branch_index(hi, rp.sigma)
    else:
        # J = [nu, eta); eta on a boundary sigma^-j means branch j is not reached
        t, exact = _log_ratio(hi, rp.sigma)
        k_hi = int(t) + 1 if exact else branch_index(hi, rp.sigma)
    if rp.eta == rp.nu:
        return [k_lo]
    return list(range(k_hi, k_lo + 1))


@dataclass(frozen=True)
class FixedPoint:
    k: int
    value: float
    slope: float
    admissible: bool
    stable: bool


def fixed_point(rp: ReducedParams, k: int) -> FixedPoint:
    """The solution z_k* of z = h_k(z), its slope s_k, admissibility and stability."""
    lo, hi = branch_interval(k, rp.sigma)
    if rp.eta == rp.nu:
        z = rp.eta
        slope = 0.0
    else:
        slope = branch_slope(rp, k)
        if abs(slope - 1.0) <= 1e-14:
            raise NoFixedPoint(f"branch {k} has slope 1")
        z = (-rp.eta + rp.sigma * rp.nu) / (rp.sigma - 1 - (rp.eta - rp.nu) * rp.sigma**k)
    admissible = lo < z < hi
    return FixedPoint(k=k, value=z, slope=slope, admissible=admissible, stable=admissible and abs(slope) < 1)


@dataclass(frozen=True)
class Triangle:
    """The region P_k where branch k has an asymptotically stable fixed point."""

    sigma: float
    k: int

    @property
    def vertices(self) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
        s, k = self.sigma, self.k
        return (
            (s ** (-k + 1), s ** (-k)),
            (s ** (-k + 1), (2 * s - 1) * s ** (-k)),
            ((2 - s) * s ** (-k), s ** (-k)),
        )

    def contains(self, eta: float, nu: float) -> bool:
        s, k = self.sigma, self.k
        return eta < s ** (-k + 1) and s ** (-k) < nu < eta + s ** (-k + 1) - s ** (-k)

    def flip_edge_nu(self, eta: float) -> float:
        """nu on the edge where the fixed point's multiplier reaches -1."""
        s, k = self.sigma, self.k
        return eta + s ** (-k + 1) - s ** (-k)


def triangle_Pk(sigma: float, k: int) -> Triangle:
    if not sigma > 1:
        raise DomainError("sigma must exceed 1")
    return Triangle(sigma, k)


def triangles_intersect(sigma: float, k1: int, k2: int) -> bool:
    if k1 == k2:
        raise ValueError("k1 and k2 must differ")
    return abs(k1 - k2) == 1


def rescale(rp: ReducedParams) -> ReducedParams:
    """Parameters whose dynamics are those of ``rp`` shrunk by 1/sigma, one branch further left."""
    return replace(rp, eta=rp.eta / rp.sigma, nu=rp.nu / rp.sigma)


def delta_invertibility(rp: ReducedParams) -> float:
    """h_k(eta) - h_{k+1}(nu); negative means the two-branch circle map is one-to-one."""
    return (rp.eta - rp.nu) * (rp.eta - rp.sigma * rp.nu) / (rp.sigma - 1)


def orbit(rp: ReducedParams, z0: float, n: int) -> tuple:
    """Iterates z_1..z_n with the branch index applied at each step (as numpy arrays)."""
    if not z0 > 0:
        raise DomainError(f"h is defined for z > 0, got {z0}")
    return K.h_orbit(rp.eta, rp.nu, rp.sigma, float(z0), int(n))
