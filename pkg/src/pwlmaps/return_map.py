"""First return of the normal form to the third quadrant Q3 and the empirical approximation check.

A point P of Q3 above the stable line of the saddle spends ell steps under the left
piece, then r steps under the right piece, and lands back in Q3.  While it is on
the left, iterating f_L only rescales its eigen-coordinates, a -> lam a and
b -> sigma b, so that phase is computed in (a, b) and converted back once the
orbit reaches the switching line.  This keeps z = b(P) exact for tiny z, where
iterating (x, y) directly would amplify rounding by sigma^ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, NotReturned
from .normal_form import (
    DEFAULT_ESCAPE_RADIUS,
    NormalFormParams,
    PlanarPoint,
    SaddleData,
    ab_coords,
    in_Q3,
    saddle_data,
)
from .onedim import ReducedParams

DEFAULT_MAX_STEPS = 10**6

# status codes of the batch routine
RETURNED = 0
DIVERGED = 1
BUDGET = 2
DEGENERATE = 3

_REASONS = {DIVERGED: "diverged", BUDGET: "budget", DEGENERATE: "degenerate"}


@dataclass(frozen=True)
class ReturnRecord:
    start: PlanarPoint
    end: PlanarPoint
    ell: int
    r: int
    z: float
    z_prime: float


@dataclass
class ReturnBatch:
    """Vectorised first-return results for points given in (a, b) coordinates."""

    a: np.ndarray
    b: np.ndarray
    ell: np.ndarray
    r: np.ndarray
    end_x: np.ndarray
    end_y: np.ndarray
    status: np.ndarray

    @property
    def returned(self) -> np.ndarray:
        return self.status == RETURNED


def first_return_ab(
    params: NormalFormParams,
    a: np.ndarray,
    b: np.ndarray,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    saddle: SaddleData | None = None,
) -> ReturnBatch:
    """First return to Q3 for every start point P = Y + a (S - Y) + b (U - Y)."""
    sd = saddle if saddle is not None else saddle_data(params)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = a.shape[0]
    lam, sig = sd.lam, sd.sigma
    status = np.full(n, RETURNED, dtype=np.int64)
    ell = np.zeros(n, dtype=np.int64)
    r = np.zeros(n, dtype=np.int64)

    # b <= 0: the orbit stays left of x = 0 forever (b -> -inf or onto the saddle)
    status[~(b > 0)] = DIVERGED

    ak, bk = a.copy(), b.copy()
    active = status == RETURNED
    while active.any():
        ak[active] *= lam
        bk[active] *= sig
        ell[active] += 1
        active &= ak + bk < 1.0
        if (ell > max_steps).any():
            over = active & (ell > max_steps)
            status[over] = BUDGET
            active &= ~over

    x = sd.Y.x + ak * (sd.S.x - sd.Y.x) + bk * (sd.U.x - sd.Y.x)
    y = sd.Y.y + ak * (sd.S.y - sd.Y.y) + bk * (sd.U.y - sd.Y.y)
    tR, dR = params.tau_R, params.delta_R
    active = status == RETURNED
    while active.any():
        nx = tR * x + y + 1.0
        ny = -dR * x
        x = np.where(active, nx, x)
        y = np.where(active, ny, y)
        r[active] += 1
        back = active & (x <= 0) & (y < 0)
        # left of x = 0 but not in Q3 only happens after a step from exactly x = 0
        stray = active & (x < 0) & ~(y < 0)
        big = active & ((np.abs(x) > escape_radius) | (np.abs(y) > escape_radius))
        status[stray] = DEGENERATE
        status[big & ~back] = DIVERGED
        over = active & ~back & (ell + r >= max_steps)
        status[over & (status == RETURNED)] = BUDGET
        active &= ~back & (status == RETURNED)

    return ReturnBatch(a=a, b=b, ell=ell, r=r, end_x=x, end_y=y, status=status)


def first_return(
    params: NormalFormParams,
    p: PlanarPoint,
    max_steps: int = DEFAULT_MAX_STEPS,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
) -> ReturnRecord:
    """F(P) = f_R^r(f_L^ell(P)) for P in Q3, with its (ell, r) decomposition."""
    if not in_Q3(p):
        raise DomainError(f"{tuple(p)} is not in Q3")
    if params.delta_L < 0 or not params.delta_R > 0:
        raise DomainError("first return needs delta_L >= 0 and delta_R > 0")
    sd = saddle_data(params)
    a, b = ab_coords(sd, p)
    res = first_return_ab(params, np.array([a]), np.array([b]), max_steps, escape_radius, sd)
    st = int(res.status[0])
    steps = int(res.ell[0] + res.r[0])
    if st != RETURNED:
        raise NotReturned(_REASONS[st], steps)
    end = PlanarPoint(float(res.end_x[0]), float(res.end_y[0]))
    return ReturnRecord(
        start=PlanarPoint(float(p[0]), float(p[1])),
        end=end,
        ell=int(res.ell[0]),
        r=int(res.r[0]),
        z=b,
        z_prime=ab_coords(sd, end)[1],
    )


@dataclass(frozen=True)
class Psi0Stats:
    epsilon: float
    fraction_outside: float
    sup_error: float
    c: float
    n_samples: int
    n_psi0: int


@dataclass
class PsiSamples:
    """Per-sample data behind a :class:`Psi0Stats`, for plotting z' against z."""

    z: np.ndarray
    z_prime: np.ndarray
    ell: np.ndarray
    r: np.ndarray
    in_psi0: np.ndarray
    returned: np.ndarray


def _a_bounds_in_Q3(sd: SaddleData, b: float) -> tuple[float, float]:
    """Range of a for which Y + a (S - Y) + b (U - Y) has x <= 0 and y <= 0."""
    base_x = sd.Y.x + b * (sd.U.x - sd.Y.x)
    base_y = sd.Y.y + b * (sd.U.y - sd.Y.y)
    dx, dy = sd.S.x - sd.Y.x, sd.S.y - sd.Y.y
    lo, hi = -math.inf, math.inf
    for base, d in ((base_x, dx), (base_y, dy)):
        # base + a d <= 0
        if d > 0:
            hi = min(hi, -base / d)
        elif d < 0:
            lo = max(lo, -base / d)
        elif base > 0:
            return math.nan, math.nan
    return lo, hi


def sample_psi(
    params: NormalFormParams,
    rp: ReducedParams,
    n_samples: int = 100_000,
    rng_seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    return_samples: bool = False,
) -> Psi0Stats | tuple[Psi0Stats, PsiSamples]:
    """Monte-Carlo estimate of how much of the strip 0 < b < 2 eps of Q3 follows h, and how closely.

    Samples are uniform in area (uniform in (a, b), which is an affine chart) with
    rejection against Q3.  A sample belongs to Psi_0 when it returns after exactly
    m right steps and sigma^ell z lies in [1, sigma).
    """
    eps = rp.epsilon
    if not eps > 0:
        raise DomainError("epsilon is zero: the strip Psi is empty at the connection itself")
    if rp.m is None:
        raise DomainError("reduced parameters carry no m")
    sd = saddle_data(params)
    bounds = [_a_bounds_in_Q3(sd, bb) for bb in (0.0, 2 * eps)]
    a_lo = min(lo for lo, _ in bounds)
    a_hi = max(hi for _, hi in bounds)
    if not (math.isfinite(a_lo) and math.isfinite(a_hi) and a_hi > a_lo):
        raise DomainError("the strip Psi does not meet Q3 in a bounded region")

    rng = np.random.default_rng(rng_seed)
    got_a: list[np.ndarray] = []
    got_b: list[np.ndarray] = []
    total = 0
    while total < n_samples:
        m = max(1024, 2 * (n_samples - total))
        a = rng.uniform(a_lo, a_hi, m)
        b = rng.uniform(0.0, 2 * eps, m)
        x = sd.Y.x + a * (sd.S.x - sd.Y.x) + b * (sd.U.x - sd.Y.x)
        y = sd.Y.y + a * (sd.S.y - sd.Y.y) + b * (sd.U.y - sd.Y.y)
        keep = (x <= 0) & (y < 0) & (b > 0)
        got_a.append(a[keep])
        got_b.append(b[keep])
        total += int(keep.sum())
    a = np.concatenate(got_a)[:n_samples]
    b = np.concatenate(got_b)[:n_samples]

    res = first_return_ab(params, a, b, max_steps=max_steps, saddle=sd)
    ok = res.returned
    z = b
    z_prime = sd.b_array(res.end_x, res.end_y)
    scaled = rp.sigma ** res.ell.astype(float) * z
    in_psi0 = ok & (res.r == rp.m) & (scaled >= 1.0) & (scaled < rp.sigma)
    hz = K.h_eval_array(z, rp.eta, rp.nu, rp.sigma)
    err = np.abs(z_prime - hz)
    n_psi0 = int(in_psi0.sum())
    stats = Psi0Stats(
        epsilon=eps,
        fraction_outside=1.0 - n_psi0 / n_samples,
        sup_error=float(err[in_psi0].max()) if n_psi0 else math.nan,
        c=math.inf if not rp.lam else -math.log(rp.lam) / math.log(rp.sigma),
        n_samples=n_samples,
        n_psi0=n_psi0,
    )
    if return_samples:
        return stats, PsiSamples(z=z, z_prime=z_prime, ell=res.ell, r=res.r, in_psi0=in_psi0, returned=ok)
    return stats


def geometric_ray(
    codim2: NormalFormParams,
    direction: dict[str, float],
    t0: float,
    ratio: float,
    n: int,
) -> list[NormalFormParams]:
    """Points codim2 + t0 ratio^j direction, j = 0..n-1."""
    out = []
    for j in range(n):
        t = t0 * ratio**j
        shift = {k: getattr(codim2, k) + t * v for k, v in direction.items()}
        out.append(codim2.replace(**shift))
    return out


@dataclass
class ScalingFit:
    c_expected: float
    error_slope: float | None
    fraction_slope: float
    epsilons: list[float] = field(default_factory=list)
    sup_errors: list[float] = field(default_factory=list)
    fractions: list[float] = field(default_factory=list)


def verify_theorem1_scaling(
    params_ray: Sequence[NormalFormParams],
    m: int,
    n_samples: int = 100_000,
    rng_seed: int = 0,
    codim2: NormalFormParams | None = None,
) -> ScalingFit:
    """Fit log-log slopes of the approximation error and of the non-Psi_0 fraction against eps.

    With lam = 0 the error should vanish identically, so only the fraction slope is fitted.
    """
    from .reduction import reduce_params

    if len(params_ray) < 5:
        raise DomainError("need at least five ray points")
    ref = codim2 if codim2 is not None else params_ray[-1]
    sd = saddle_data(ref)
    c = math.inf if sd.lam == 0 else -math.log(sd.lam) / math.log(sd.sigma)
    seeds = np.random.SeedSequence(rng_seed).spawn(len(params_ray))
    eps, errs, fracs = [], [], []
    for p, ss in zip(params_ray, seeds):
        rp = reduce_params(p, m)
        st = sample_psi(p, rp, n_samples, int(ss.generate_state(1)[0]))
        eps.append(st.epsilon)
        errs.append(st.sup_error)
        fracs.append(st.fraction_outside)
    le = np.log(eps)
    frac_slope = float(np.polyfit(le, np.log(fracs), 1)[0])
    err_slope = None if math.isinf(c) else float(np.polyfit(le, np.log(errs), 1)[0])
    return ScalingFit(
        c_expected=c,
        error_slope=err_slope,
        fraction_slope=frac_slope,
        epsilons=eps,
        sup_errors=errs,
        fractions=fracs,
    )
