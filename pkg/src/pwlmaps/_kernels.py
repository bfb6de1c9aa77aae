"""Compiled inner loops for orbit iteration.

Everything here is a pure function of its arguments so compiled kernels can be
called from worker processes without shared state.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# A point within this relative distance of sigma^-j is treated as sitting on it.
SNAP_RTOL = 1e-12


@njit(cache=True)
def power_neg(sigma, k):
    """sigma^-k by repeated division (or multiplication for k < 0)."""
    p = 1.0
    if k >= 0:
        for _ in range(k):
            p /= sigma
    else:
        for _ in range(-k):
            p *= sigma
    return p


@njit(cache=True)
def branch_index(z, sigma):
    """The k with z in [sigma^-k, sigma^-(k-1)), boundaries snapped to the lower index."""
    k = int(math.ceil(-math.log(z) / math.log(sigma)))
    # the comparison against powers is authoritative; the log only seeds it
    for _ in range(4):
        lo = power_neg(sigma, k) * (1.0 - SNAP_RTOL)
        if z < lo:
            k += 1
            continue
        hi = power_neg(sigma, k - 1) * (1.0 - SNAP_RTOL)
        if z >= hi:
            k -= 1
            continue
        break
    return k


@njit(cache=True)
def h_branch(z, k, eta, nu, sigma):
    return (eta - nu) / (sigma - 1.0) * math.pow(sigma, k) * z + (-eta + sigma * nu) / (sigma - 1.0)


@njit(cache=True)
def h_eval(z, eta, nu, sigma):
    k = branch_index(z, sigma)
    return h_branch(z, k, eta, nu, sigma)


@njit(cache=True)
def _table(eta, nu, sigma):
    """Thresholds for the branches that can meet J, plus one spare branch each side."""
    lo = min(eta, nu)
    hi = max(eta, nu)
    # the table is only a cache; with a non-positive endpoint cover a few decades below hi
    if not hi > 0.0:
        hi = 1.0
    if not lo > 0.0:
        lo = hi * 1e-6
    kmin = branch_index(hi, sigma) - 1
    kmax = branch_index(lo, sigma) + 1
    n = kmax - kmin + 1
    thr = np.empty(n)
    slopes = np.empty(n)
    for i in range(n):
        k = kmin + i
        thr[i] = power_neg(sigma, k) * (1.0 - SNAP_RTOL)
        slopes[i] = (eta - nu) / (sigma - 1.0) * math.pow(sigma, k)
    return kmin, thr, slopes


@njit(cache=True)
def _step(z, kmin, thr, slopes, offset, eta, nu, sigma):
    # thr decreases with i; branch k = kmin + i owns [thr[i], thr[i-1])
    n = thr.shape[0]
    if z < thr[0]:
        for i in range(n):
            if z >= thr[i]:
                return slopes[i] * z + offset, kmin + i
    k = branch_index(z, sigma)
    return h_branch(z, k, eta, nu, sigma), k


@njit(cache=True)
def h_iterate(eta, nu, sigma, z0, n):
    """z_n after n steps; returns NaN if the orbit reaches z <= 0."""
    kmin, thr, slopes = _table(eta, nu, sigma)
    offset = (-eta + sigma * nu) / (sigma - 1.0)
    z = z0
    for _ in range(n):
        if not z > 0.0:
            return math.nan
        z, _k = _step(z, kmin, thr, slopes, offset, eta, nu, sigma)
    return z


@njit(cache=True)
def h_orbit(eta, nu, sigma, z0, n):
    """The n iterates z_1..z_n together with the branch index used at each step."""
    kmin, thr, slopes = _table(eta, nu, sigma)
    offset = (-eta + sigma * nu) / (sigma - 1.0)
    zs = np.full(n, math.nan)
    ks = np.zeros(n, dtype=np.int64)
    z = z0
    for i in range(n):
        if not z > 0.0:
            break
        z, k = _step(z, kmin, thr, slopes, offset, eta, nu, sigma)
        zs[i] = z
        ks[i] = k
    return zs, ks


@njit(cache=True)
def find_period(buf, qmax, tol):
    """Smallest q <= qmax such that the last qmax+q samples repeat with period q (0 if none)."""
    n = buf.shape[0]
    for q in range(1, qmax + 1):
        ok = True
        for i in range(n - 1, n - 1 - qmax - q, -1):
            if i - q < 0:
                ok = False
                break
            if not abs(buf[i] - buf[i - q]) <= tol:
                ok = False
                break
        if ok:
            return q
    return 0


@njit(cache=True)
def h_boxcount(eta, nu, sigma, z0, n_iter, n_boxes):
    """Mark equal boxes spanning [min(eta,nu), max(eta,nu)] visited by z_1..z_n."""
    kmin, thr, slopes = _table(eta, nu, sigma)
    offset = (-eta + sigma * nu) / (sigma - 1.0)
    lo = min(eta, nu)
    width = (max(eta, nu) - lo) / n_boxes
    marks = np.zeros(n_boxes, dtype=np.int64)
    z = z0
    for _ in range(n_iter):
        if not z > 0.0:
            break
        z, _k = _step(z, kmin, thr, slopes, offset, eta, nu, sigma)
        i = int((z - lo) / width)
        if i < 0:
            i = 0
        elif i >= n_boxes:
            i = n_boxes - 1
        marks[i] += 1
    return marks, z


@njit(cache=True)
def h_visit_count(eta, nu, sigma, z0, n_iter, k_target):
    """How many of z_0..z_{n-1} lie on branch k_target, and the final iterate."""
    kmin, thr, slopes = _table(eta, nu, sigma)
    offset = (-eta + sigma * nu) / (sigma - 1.0)
    z = z0
    count = 0
    for _ in range(n_iter):
        if not z > 0.0:
            return -1, z
        znew, k = _step(z, kmin, thr, slopes, offset, eta, nu, sigma)
        if k == k_target:
            count += 1
        z = znew
    return count, z


@njit(cache=True)
def orbit_2d(tl, dl, tr, dr, x, y, n, radius):
    """Iterates p_1..p_n of f; stops at the first point with max-norm above radius.

    Returns the point array and the 0-based index of the escaping iterate (n if none).
    """
    out = np.empty((n, 2))
    for i in range(n):
        if x <= 0.0:
            x, y = tl * x + y + 1.0, -dl * x
        else:
            x, y = tr * x + y + 1.0, -dr * x
        out[i, 0] = x
        out[i, 1] = y
        if abs(x) > radius or abs(y) > radius or not (x == x and y == y):
            return out, i
    return out, n


@njit(cache=True)
def iterate_2d(tl, dl, tr, dr, x, y, n, radius):
    """Final point after n steps, and the step at which the orbit escaped (-1 if never)."""
    for i in range(n):
        if x <= 0.0:
            x, y = tl * x + y + 1.0, -dl * x
        else:
            x, y = tr * x + y + 1.0, -dr * x
        if abs(x) > radius or abs(y) > radius or not (x == x and y == y):
            return x, y, i
    return x, y, -1


@njit(cache=True)
def h_eval_array(zs, eta, nu, sigma):
    out = np.empty_like(zs)
    for i in range(zs.shape[0]):
        out[i] = h_eval(zs[i], eta, nu, sigma) if zs[i] > 0.0 else math.nan
    return out


@njit(cache=True)
def branch_index_array(zs, sigma):
    out = np.zeros(zs.shape[0], dtype=np.int64)
    for i in range(zs.shape[0]):
        if zs[i] > 0.0:
            out[i] = branch_index(zs[i], sigma)
    return out


@njit(cache=True)
def find_period_2d(pts, qmax, tol):
    """find_period for an (n, 2) point array, using the max-norm distance."""
    n = pts.shape[0]
    for q in range(1, qmax + 1):
        ok = True
        for i in range(n - 1, n - 1 - qmax - q, -1):
            if i - q < 0:
                ok = False
                break
            if not (abs(pts[i, 0] - pts[i - q, 0]) <= tol and abs(pts[i, 1] - pts[i - q, 1]) <= tol):
                ok = False
                break
        if ok:
            return q
    return 0
