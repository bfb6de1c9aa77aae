"""The two-dimensional border-collision normal form.

The map is

    f(x, y) = (tau_L x + y + 1, -delta_L x)   for x <= 0,
              (tau_R x + y + 1, -delta_R x)   for x >= 0,

with the two pieces agreeing on the switching line x = 0.  Near a saddle fixed
point of the left piece we also use affine coordinates (a, b) aligned with its
stable and unstable eigenlines; in those coordinates the switching line is
a + b = 1 and iterating the left piece scales a by lambda and b by sigma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

DEFAULT_ESCAPE_RADIUS = 1e6


class PlanarPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class NormalFormParams:
    """A parameter point (tau_L, delta_L, tau_R, delta_R)."""

    tau_L: float
    delta_L: float
    tau_R: float
    delta_R: float

    def in_Xi(self) -> bool:
        """True where the left piece has a saddle fixed point with 0 <= lambda*sigma < 1."""
        return self.tau_L > self.delta_L + 1 and 0 <= self.delta_L < 1 and self.delta_R > 0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.tau_L, self.delta_L, self.tau_R, self.delta_R)

    def replace(self, **changes: float) -> NormalFormParams:
        values = dict(zip(PARAM_NAMES, self.as_tuple()))
        for name, value in changes.items():
            if name not in values:
                raise KeyError(f"unknown parameter {name!r}")
            values[name] = float(value)
        return NormalFormParams(**values)


PARAM_NAMES = ("tau_L", "delta_L", "tau_R", "delta_R")


@dataclass(frozen=True)
class AffinePiece:
    """P -> M P + t with M = [[m11, m12], [m21, m22]] and t = (b1, b2)."""

    m11: float
    m12: float
    m21: float
    m22: float
    b1: float
    b2: float

    def __call__(self, p: PlanarPoint) -> PlanarPoint:
        x, y = p
        return PlanarPoint(self.m11 * x + self.m12 * y + self.b1, self.m21 * x + self.m22 * y + self.b2)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.b1, self.b2])

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def then(self, other: AffinePiece) -> AffinePiece:
        """The composition ``other(self(P))``."""
        m11 = other.m11 * self.m11 + other.m12 * self.m21
        m12 = other.m11 * self.m12 + other.m12 * self.m22
        m21 = other.m21 * self.m11 + other.m22 * self.m21
        m22 = other.m21 * self.m12 + other.m22 * self.m22
        b1 = other.m11 * self.b1 + other.m12 * self.b2 + other.b1
        b2 = other.m21 * self.b1 + other.m22 * self.b2 + other.b2
        return AffinePiece(m11, m12, m21, m22, b1, b2)


def left_piece(params: NormalFormParams) -> AffinePiece:
    return AffinePiece(params.tau_L, 1.0, -params.delta_L, 0.0, 1.0, 0.0)


def right_piece(params: NormalFormParams) -> AffinePiece:
    return AffinePiece(params.tau_R, 1.0, -params.delta_R, 0.0, 1.0, 0.0)


def piece(params: NormalFormParams, symbol: str) -> AffinePiece:
    if symbol == "L":
        return left_piece(params)
    if symbol == "R":
        return right_piece(params)
    raise ValueError(f"symbol must be 'L' or 'R', got {symbol!r}")


def apply(params: NormalFormParams, p: PlanarPoint) -> PlanarPoint:
    """One iterate of f.  Points on x = 0 use the left piece (both pieces agree there)."""
    x, y = p
    if x <= 0:
        return PlanarPoint(params.tau_L * x + y + 1.0, -params.delta_L * x)
    return PlanarPoint(params.tau_R * x + y + 1.0, -params.delta_R * x)


def symbol_of(p: PlanarPoint) -> str:
    return "L" if p[0] <= 0 else "R"


class Region(enum.Enum):
    OMEGA_L = "OmegaL"
    OMEGA_R = "OmegaR"
    SIGMA = "Sigma"


def region(p: PlanarPoint) -> Region:
    x = p[0]
    if x < 0:
        return Region.OMEGA_L
    if x > 0:
        return Region.OMEGA_R
    return Region.SIGMA


def in_Q3(p: PlanarPoint) -> bool:
    return p[0] <= 0 and p[1] < 0


def eigenvalues_left(tau_L: float, delta_L: float) -> tuple[float, float]:
    """Roots lambda <= sigma of t^2 - tau_L t + delta_L, for real distinct roots with tau_L > 0."""
    disc = tau_L * tau_L - 4.0 * delta_L
    if disc < 0:
        raise DomainError(f"complex multipliers: tau_L^2 - 4 delta_L = {disc}")
    if delta_L == 0:
        return 0.0, tau_L
    sigma = 0.5 * (tau_L + math.copysign(math.sqrt(disc), tau_L))
    lam = delta_L / sigma
    return (lam, sigma) if lam <= sigma else (sigma, lam)


@dataclass(frozen=True)
class SaddleData:
    """The saddle Y of the left piece, its multipliers, and the eigenline crossings S, U of x = 0."""

    Y: PlanarPoint
    lam: float
    sigma: float
    S: PlanarPoint
    U: PlanarPoint

    def ab(self, p: PlanarPoint) -> tuple[float, float]:
        return ab_coords(self, p)

    def from_ab(self, a: float, b: float) -> PlanarPoint:
        Y, S, U = self.Y, self.S, self.U
        return PlanarPoint(
            Y[0] + a * (S[0] - Y[0]) + b * (U[0] - Y[0]),
            Y[1] + a * (S[1] - Y[1]) + b * (U[1] - Y[1]),
        )

    def b_array(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        lam, sig = self.lam, self.sigma
        return (1 - lam) / (sig - lam) * (sig + (sig - 1) * (sig * x + y))

    def a_array(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        lam, sig = self.lam, self.sigma
        return (sig - 1) / (sig - lam) * (lam - (1 - lam) * (lam * x + y))


def saddle_data(params: NormalFormParams) -> SaddleData:
    if not params.in_Xi():
        raise DomainError(f"{params} is not in Xi (need tau_L > delta_L + 1, 0 <= delta_L < 1, delta_R > 0)")
    lam, sigma = eigenvalues_left(params.tau_L, params.delta_L)
    denom = params.tau_L - params.delta_L - 1.0
    Y = PlanarPoint(-1.0 / denom, params.delta_L / denom)
    S = PlanarPoint(0.0, -sigma / (sigma - 1.0))
    U = PlanarPoint(0.0, lam / (1.0 - lam))
    return SaddleData(Y=Y, lam=lam, sigma=sigma, S=S, U=U)


def ab_coords(saddle: SaddleData, p: PlanarPoint) -> tuple[float, float]:
    """Coordinates (a, b) with p = Y + a (S - Y) + b (U - Y)."""
    lam, sig = saddle.lam, saddle.sigma
    x, y = p
    a = (sig - 1) / (sig - lam) * (lam - (1 - lam) * (lam * x + y))
    b = (1 - lam) / (sig - lam) * (sig + (sig - 1) * (sig * x + y))
    return a, b


@dataclass(frozen=True)
class OrbitRecord:
    """Iterates p_1..p_n of an orbit (``points`` excludes p_0).

    When the orbit escapes, ``points`` stops at the first iterate whose max-norm exceeds
    the escape radius and ``escape_index`` is that iterate's index (1-based).
    """

    points: np.ndarray
    diverged: bool
    escape_index: int | None = None


def iterate_orbit(
    params: NormalFormParams,
    p0: PlanarPoint,
    n: int,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
) -> OrbitRecord:
    if n < 1:
        raise ValueError("n must be >= 1")
    if escape_radius <= 0:
        raise ValueError("escape_radius must be positive")
    from ._kernels import orbit_2d

    pts, n_done = orbit_2d(*params.as_tuple(), float(p0[0]), float(p0[1]), n, escape_radius)
    if n_done < n:
        return OrbitRecord(points=pts[: n_done + 1], diverged=True, escape_index=n_done + 1)
    return OrbitRecord(points=pts, diverged=False)
