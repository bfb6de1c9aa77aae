"""Reduced parameters (eta, nu, sigma) of the normal form near a subsumed homoclinic connection.

For a saddle fixed point of the left piece the unstable line meets x = 0 at U, and
eta, nu are the b-coordinates of f_R^(m+1)(U) and f_R^m(U).  Both vanish when
f_R^m(U) = S, i.e. when the right branch of the unstable set lies in the stable
set.  The period-three variant does the same construction around the rightmost
point of an RLR-cycle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, NoConvergence, ValidityError
from .normal_form import (
    PARAM_NAMES,
    NormalFormParams,
    PlanarPoint,
    ab_coords,
    left_piece,
    right_piece,
    saddle_data,
)
from .onedim import ReducedParams


class SaddleKind(enum.Enum):
    FIXED_POINT = "fixed-point"
    PERIOD_THREE = "period-three"


@dataclass(frozen=True)
class ReductionSpec:
    params: NormalFormParams
    kind: SaddleKind = SaddleKind.FIXED_POINT
    m: int = 2

    def __post_init__(self) -> None:
        if self.kind is SaddleKind.FIXED_POINT:
            if self.m < 2:
                raise DomainError("m must be at least 2")
            if not self.params.in_Xi():
                raise DomainError(f"{self.params} is not in Xi")


@dataclass(frozen=True)
class EpsilonRecord:
    eta: float
    nu: float
    epsilon: float
    c: float


def epsilon_record(eta: float, nu: float, lam: float, sigma: float) -> EpsilonRecord:
    c = math.inf if lam == 0 else -math.log(lam) / math.log(sigma)
    return EpsilonRecord(eta=eta, nu=nu, epsilon=max(abs(eta), abs(nu)), c=c)


def right_orbit_of_U(params: NormalFormParams, n: int) -> list[PlanarPoint]:
    """U, f_R(U), ..., f_R^n(U) with the right piece applied regardless of side."""
    U = saddle_data(params).U
    fR = right_piece(params)
    pts = [U]
    for _ in range(n):
        pts.append(fR(pts[-1]))
    return pts


def _fixed_point_reduction(params: NormalFormParams, m: int, check: bool = True) -> tuple[ReducedParams, EpsilonRecord]:
    sd = saddle_data(params)
    pts = right_orbit_of_U(params, m + 1)
    if check:
        for k in range(1, m):
            if not pts[k].x > 0:
                raise ValidityError(f"f_R^{k}(U) = {tuple(pts[k])} is not in the right half-plane")
    _, nu = ab_coords(sd, pts[m])
    _, eta = ab_coords(sd, pts[m + 1])
    rp = ReducedParams(eta=eta, nu=nu, sigma=sd.sigma, m=m, lam=sd.lam)
    return rp, epsilon_record(eta, nu, sd.lam, sd.sigma)


def reduced_params_generic(spec: ReductionSpec) -> tuple[ReducedParams, EpsilonRecord]:
    """(eta, nu, sigma) by iterating the relevant points and reading off b-coordinates."""
    if spec.kind is SaddleKind.FIXED_POINT:
        return _fixed_point_reduction(spec.params, spec.m)
    frame = period3_saddle_frame(spec.params)
    rp = ReducedParams(eta=frame.eta, nu=frame.nu, sigma=frame.sigma, m=None, lam=frame.lam)
    return rp, epsilon_record(frame.eta, frame.nu, frame.lam, frame.sigma)


def reduce_params(params: NormalFormParams, m: int = 2) -> ReducedParams:
    """Shorthand for the fixed-point saddle reduction."""
    return reduced_params_generic(ReductionSpec(params, SaddleKind.FIXED_POINT, m))[0]


def reduced_params_closed_form_m2(params: NormalFormParams) -> tuple[float, float]:
    sd = saddle_data(params)
    lam, sig = sd.lam, sd.sigma
    tR, dR = params.tau_R, params.delta_R
    eta = (
        dR * (tR - lam + 1)
        + ((tR + dR) * lam - tR * (tR + dR + 1)) * sig
        + (tR**2 + tR - dR + 1 - (1 + tR) * lam) * sig**2
    ) / (sig - lam)
    nu = (dR - (dR + tR) * sig + (tR - lam + 1) * sig**2) / (sig - lam)
    return eta, nu


def reduced_params_closed_form_m3_deltaL0(params: NormalFormParams) -> tuple[float, float]:
    if params.delta_L != 0:
        raise DomainError("the m = 3 closed form needs delta_L = 0")
    if not params.tau_L > 1:
        raise DomainError("the m = 3 closed form needs tau_L > 1")
    sig = params.tau_L
    tR, dR = params.tau_R, params.delta_R
    eta = (
        dR * (tR**2 + tR - dR + 1) / sig
        - tR**3
        - tR**2 * (dR + 1)
        + tR * (dR - 1)
        + dR**2
        + (tR**3 + tR**2 + tR - 2 * dR * tR - dR + 1) * sig
    )
    nu = dR * (tR + 1) / sig - tR * (tR + dR + 1) + (tR**2 + tR - dR + 1) * sig
    return eta, nu


@dataclass(frozen=True)
class Period3Frame:
    """Saddle data for the RLR-cycle: tilde points, multipliers, eta, nu and nu'."""

    Ytilde: PlanarPoint
    Stilde: PlanarPoint
    Utilde: PlanarPoint
    Utilde_prime: PlanarPoint
    sigma: float
    lam: float
    eta: float
    nu: float
    nu_prime: float
    cycle: tuple[PlanarPoint, PlanarPoint, PlanarPoint]

    def ab(self, p: PlanarPoint) -> tuple[float, float]:
        Y, S, U = (np.asarray(v) for v in (self.Ytilde, self.Stilde, self.Utilde))
        basis = np.column_stack([S - Y, U - Y])
        a, b = np.linalg.solve(basis, np.asarray(p) - Y)
        return float(a), float(b)


def _line_hits_sigma(Y: np.ndarray, direction: np.ndarray) -> PlanarPoint:
    if direction[0] == 0:
        raise ValidityError("eigenline is parallel to the switching line")
    t = -Y[0] / direction[0]
    p = Y + t * direction
    return PlanarPoint(0.0, float(p[1]))


def _check_side(p: PlanarPoint, symbol: str, what: str, tol: float = 1e-10) -> None:
    ok = p.x <= tol if symbol == "L" else p.x >= -tol
    if not ok:
        raise ValidityError(f"{what} = {tuple(p)} is not on the {symbol} side")


def period3_saddle_frame(params: NormalFormParams) -> Period3Frame:
    fL, fR = left_piece(params), right_piece(params)
    comp = fR.then(fL).then(fR)
    M = comp.matrix
    try:
        Yt = np.linalg.solve(np.eye(2) - M, comp.translation)
    except np.linalg.LinAlgError as exc:
        raise ValidityError("RLR fixed-point system is singular") from exc
    Y0 = PlanarPoint(*map(float, Yt))
    Y1 = fR(Y0)
    Y2 = fL(Y1)
    for p, s, name in ((Y0, "R", "Ytilde"), (Y1, "L", "f_R(Ytilde)"), (Y2, "R", "f_L(f_R(Ytilde))")):
        _check_side(p, s, name)

    w, V = np.linalg.eig(M)
    if np.iscomplexobj(w) and np.any(np.abs(w.imag) > 0):
        raise ValidityError("RLR-cycle has complex multipliers")
    w, V = w.real, V.real
    order = np.argsort(np.abs(w))
    lam_t, sig_t = float(w[order[0]]), float(w[order[1]])
    if not (sig_t > 1 and abs(lam_t) < 1):
        raise ValidityError(f"RLR-cycle is not a saddle with sigma > 1 (multipliers {w})")
    e_s, e_u = V[:, order[0]], V[:, order[1]]

    St = _line_hits_sigma(Yt, e_s)
    Ut = _line_hits_sigma(Yt, e_u)
    basis = np.column_stack([np.subtract(St, Yt), np.subtract(Ut, Yt)])

    def b_of(p: PlanarPoint) -> float:
        return float(np.linalg.solve(basis, np.asarray(p) - Yt)[1])

    # U' is the formal image under the composed affine map, i.e. Y + sigma (U - Y)
    Up = comp(Ut)

    a1 = fL(Up)
    _check_side(Up, "L", "Utilde'")
    _check_side(a1, "R", "f_L(Utilde')")
    # f_L(U) sits on x = 0 at the connection itself, where both pieces agree: not checked
    a2 = fL(Ut)
    eta = b_of(fR(a1))
    nu = b_of(fR(a2))

    # V on E^u with (f_R(V))_x = 0: tau_R Vx + Vy + 1 = 0 along V = Y + t e_u
    denom = params.tau_R * e_u[0] + e_u[1]
    if denom == 0:
        nu_prime = math.nan
    else:
        t = -(params.tau_R * Yt[0] + Yt[1] + 1.0) / denom
        V_pt = PlanarPoint(*map(float, Yt + t * e_u))
        nu_prime = b_of(fL(fR(V_pt)))

    return Period3Frame(
        Ytilde=Y0,
        Stilde=St,
        Utilde=Ut,
        Utilde_prime=Up,
        sigma=sig_t,
        lam=lam_t,
        eta=eta,
        nu=nu,
        nu_prime=nu_prime,
        cycle=(Y0, Y1, Y2),
    )


def _eta_nu_function(fixed: NormalFormParams, free: Sequence[str], m: int, kind: SaddleKind) -> Callable:
    def F(v: np.ndarray) -> np.ndarray:
        params = fixed.replace(**dict(zip(free, map(float, v))))
        if kind is SaddleKind.FIXED_POINT:
            rp, _ = _fixed_point_reduction(params, m, check=False)
            return np.array([rp.eta, rp.nu])
        frame = period3_saddle_frame(params)
        return np.array([frame.eta, frame.nu])

    return F


def locate_reduced(
    fixed: Mapping[str, float],
    guess: Mapping[str, float],
    target: tuple[float, float] = (0.0, 0.0),
    m: int = 2,
    kind: SaddleKind = SaddleKind.FIXED_POINT,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> NormalFormParams:
    """Find the parameter point where (eta, nu) equals ``target`` by damped Newton.

    Two coordinates are fixed and the other two (keys of ``guess``) are solved for.
    The Jacobian is a central finite difference with step 1e-7 (1 + |coordinate|).
    """
    free = list(guess)
    if len(free) != 2 or len(fixed) != 2 or set(free) | set(fixed) != set(PARAM_NAMES):
        raise DomainError("need two fixed and two free coordinates covering all four parameters")
    base = NormalFormParams(**{**{k: float(v) for k, v in fixed.items()}, **{k: float(v) for k, v in guess.items()}})
    F0 = _eta_nu_function(base, free, m, kind)
    tgt = np.asarray(target, dtype=float)

    def F(v: np.ndarray) -> np.ndarray:
        return F0(v) - tgt

    v = np.array([guess[k] for k in free], dtype=float)
    r = F(v)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return base.replace(**dict(zip(free, v)))
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * (1 + abs(v[j]))
            dv = np.zeros(2)
            dv[j] = h
            J[:, j] = (F(v + dv) - F(v - dv)) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian") from exc
        t = 1.0
        while t > 1e-6:
            v_new = v + t * step
            try:
                r_new = F(v_new)
            except (DomainError, ValidityError):
                r_new = None
            if r_new is not None and np.linalg.norm(r_new) < np.linalg.norm(r):
                break
            t *= 0.5
        else:
            raise NoConvergence("line search failed")
        v, r = v_new, r_new
    if np.max(np.abs(r)) < tol:
        return base.replace(**dict(zip(free, v)))
    raise NoConvergence(f"no convergence after {max_iter} iterations, residual {r}")


def locate_codim2(
    fixed: Mapping[str, float],
    guess: Mapping[str, float],
    m: int = 2,
    kind: SaddleKind = SaddleKind.FIXED_POINT,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> NormalFormParams:
    """The subsumed homoclinic connection eta = nu = 0 nearest the guess."""
    return locate_reduced(fixed, guess, (0.0, 0.0), m=m, kind=kind, tol=tol, max_iter=max_iter)
