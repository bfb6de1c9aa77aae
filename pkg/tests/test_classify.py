from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from pwlmaps.classify import (
    AttractorClass,
    Budgets1D,
    Budgets2D,
    GcdConfig,
    boxcount_bands_1d,
    classify_1d,
    classify_2d,
    count_runs,
    eckstein_gcd,
    eckstein_gcd_stats,
    farey_parent_check,
    merging_condition_scan,
    rotation_number,
)
from pwlmaps.cycles import Itinerary, solve_cycle
from pwlmaps.errors import DomainError, PreconditionError
from pwlmaps.normal_form import NormalFormParams, PlanarPoint
from pwlmaps.onedim import ReducedParams, branch_index, fixed_point, orbit, triangle_Pk

S = 1.5


# ---- AttractorClass ------------------------------------------------------


def test_attractor_class_validation_and_text():
    assert str(AttractorClass.periodic(10)) == "Periodic{10}"
    assert str(AttractorClass.chaotic(14)) == "Chaotic{14}"
    assert str(AttractorClass.divergent()) == "Divergent"
    with pytest.raises(ValueError):
        AttractorClass.chaotic(0)
    with pytest.raises(ValueError):
        AttractorClass.periodic(0)
    c = AttractorClass.periodic_1d([9, 8, 8])
    assert c.period == 3 and c.branches == (8, 8, 9)


def test_gcd_config_validation():
    with pytest.raises(ValueError):
        GcdConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        GcdConfig(n_refs=0)


# ---- Eckstein gcd on synthetic data -------------------------------------


@pytest.mark.parametrize("c", range(1, 9))
def test_gcd_on_synthetic_cluster_orbit(c):
    rng = np.random.default_rng(c)
    centres = rng.uniform(-10, 10, size=(c, 2))
    # spread the centres so that clusters stay disjoint
    centres += 3 * np.arange(c)[:, None]
    n = 40_000
    pts = centres[np.arange(n) % c] + rng.uniform(-0.01, 0.01, size=(n, 2))
    cfg = GcdConfig(epsilon=0.005, n_refs=500, orbit_len=n, burn_in=1000)
    assert eckstein_gcd(pts, cfg) == c


def test_gcd_on_exact_cycle():
    cyc = np.array([[i, i * i] for i in range(10)], dtype=float)
    pts = np.tile(cyc, (3000, 1))
    assert eckstein_gcd(pts, GcdConfig(n_refs=100, orbit_len=len(pts), burn_in=0)) == 10


def test_gcd_without_returns_defaults_to_one():
    pts = np.arange(5000, dtype=float)[:, None] * np.ones((1, 2))
    g, count = eckstein_gcd_stats(pts, GcdConfig(epsilon=1e-3, n_refs=100, orbit_len=5000, burn_in=0))
    assert (g, count) == (1, 0)


# ---- 2D classification ---------------------------------------------------


def test_classify_2d_fourteen_bands():
    c = classify_2d(NormalFormParams(2, 0.75, -0.501, 1.485), PlanarPoint(-1.0, -0.5))
    assert c.key() == ("Chaotic", None, 14)


def test_classify_2d_coexisting_attractors():
    xi = NormalFormParams(2, 0.75, -0.485, 1.455)
    cyc = solve_cycle(xi, "L8R2")
    assert classify_2d(xi, cyc.points[0]).key() == ("Periodic", 10, None)
    assert classify_2d(xi, cyc.points[0]).itinerary == Itinerary.parse("L8R2")
    assert classify_2d(xi, PlanarPoint(-1.0, -0.5)).key() == ("Chaotic", None, 1)


def test_classify_2d_single_band_and_divergent():
    assert classify_2d(NormalFormParams(2, 0.75, -0.45, 1.4), PlanarPoint(-1.0, -0.5)).key() == ("Chaotic", None, 1)
    assert classify_2d(NormalFormParams(2, 0.75, -0.55, 1.6), PlanarPoint(-1.0, -0.5)).tag == "Divergent"


def test_single_band_gcd_agrees_with_boxcount_of_projection():
    """A one-band attractor also shows one connected cluster when its b-projection is box counted."""
    from pwlmaps import _kernels as K
    from pwlmaps.normal_form import saddle_data

    xi = NormalFormParams(2, 0.75, -0.45, 1.4)
    tl, dl, tr, dr = xi.as_tuple()
    x, y, _ = K.iterate_2d(tl, dl, tr, dr, -1.0, -0.5, 10_000, 1e6)
    pts, _ = K.orbit_2d(tl, dl, tr, dr, x, y, 200_000, 1e6)
    assert eckstein_gcd(pts) == 1
    sd = saddle_data(xi)
    bcoord = sd.b_array(pts[:, 0], pts[:, 1])
    marks, _ = np.histogram(bcoord, bins=200)
    assert count_runs(marks) == 1


def test_classify_2d_undetermined_with_tiny_budget():
    b = Budgets2D(burn_in=100, gcd=GcdConfig(epsilon=1e-12, n_refs=10, orbit_len=1000, burn_in=0))
    assert classify_2d(NormalFormParams(2, 0.75, -0.45, 1.4), PlanarPoint(-1.0, -0.5), b).tag == "Undetermined"


# ---- 1D box counting and classification ---------------------------------


def test_count_runs():
    assert count_runs(np.array([0, 1, 1, 0, 1, 0, 0, 1])) == 3
    assert count_runs(np.zeros(5)) == 0
    assert count_runs(np.ones(5)) == 1


@pytest.mark.parametrize("eta, nu", [(0.01236825, 0.00675), (0.01738125, 0.03375)])
def test_boxcount_two_bands_stable_under_refinement(eta, nu):
    rp = ReducedParams(eta, nu, S)
    assert boxcount_bands_1d(rp) == 2
    assert boxcount_bands_1d(rp, n_boxes=2000) == 2


def test_boxcount_fixed_point_is_one_box():
    vs = np.array(triangle_Pk(S, 7).vertices)
    eta, nu = vs.mean(axis=0)
    assert boxcount_bands_1d(ReducedParams(eta, nu, S), orbit_len=10_000) == 1


def test_boxcount_rejects_nonpositive():
    with pytest.raises(DomainError):
        boxcount_bands_1d(ReducedParams(-0.01, 0.02, S))


def test_classify_1d_fixed_point_in_triangle():
    vs = np.array(triangle_Pk(S, 6).vertices)
    eta, nu = vs.mean(axis=0)
    res = classify_1d(ReducedParams(eta, nu, S))
    assert res.primary.key() == ("Periodic", 1, None)
    assert res.primary.branches == (6,)


def test_classify_1d_finds_coexisting_fixed_points():
    from shapely.geometry import Polygon

    both = Polygon(triangle_Pk(S, 8).vertices).intersection(Polygon(triangle_Pk(S, 9).vertices))
    rp = ReducedParams(both.centroid.x, both.centroid.y, S)
    res = classify_1d(rp, Budgets1D(n_initial=5, orbit_len=100_000))
    branches = {c.branches for c in res.found if c.tag == "Periodic"}
    assert {(8,), (9,)} <= branches


def test_classify_1d_degenerate_and_divergent():
    assert classify_1d(ReducedParams(0.02, 0.02, S)).primary.key() == ("Periodic", 1, None)
    assert classify_1d(ReducedParams(-0.02, -0.01, S)).primary.tag == "Divergent"
    assert classify_1d(ReducedParams(-0.02, 0.01, S), Budgets1D(orbit_len=10_000)).primary.tag == "Divergent"


def test_classify_1d_chaos_matches_boxcount():
    rp = ReducedParams(0.01236825, 0.00675, S)
    res = classify_1d(rp)
    assert res.primary.key() == ("Chaotic", None, 2)


# ---- rotation numbers ---------------------------------------------------


K_ROT = 8
LO, HI = S**-K_ROT, S**-K_ROT / 0.7


def _rp(eta: float) -> ReducedParams:
    return ReducedParams(eta, 0.7 * eta, S)


def test_rotation_number_preconditions():
    with pytest.raises(PreconditionError):
        rotation_number(ReducedParams(0.023125, 0.0875, S))  # decreasing branches
    with pytest.raises(PreconditionError):
        rotation_number(ReducedParams(0.03, 0.01, S))  # overlapping or N != 2
    with pytest.raises(PreconditionError):
        rotation_number(ReducedParams(LO * 1.01, LO * 1.005, S))  # N = 1


def test_rotation_number_monotone_and_limits():
    etas = np.linspace(LO, HI, 202)[1:-1]
    rhos = [rotation_number(_rp(e), n_iter=20_000).rho for e in etas]
    assert all(r2 >= r1 - 1e-3 for r1, r2 in zip(rhos, rhos[1:]))
    assert rhos[0] < 0.1 and rhos[-1] > 0.9


def _bisect_rho(target: Fraction) -> float:
    """Bisection on eta for the rational rotation number ``target``."""
    a, b = LO, HI
    for _ in range(60):
        mid = 0.5 * (a + b)
        r = rotation_number(_rp(mid), n_iter=20_000)
        if r.rational is not None and Fraction(*r.rational) == target:
            return mid
        if r.rho < target:
            a = mid
        else:
            b = mid
    raise AssertionError(f"no interval with rho = {target}")


def test_period_two_tongue_has_one_point_per_branch():
    eta = _bisect_rho(Fraction(1, 2))
    rp = _rp(eta)
    zs, ks = orbit(rp, 0.5 * (rp.eta + rp.nu), 20_000)
    assert abs(zs[-1] - zs[-3]) < 1e-12
    assert abs(zs[-1] - zs[-2]) > 1e-6
    assert sorted(ks[-2:]) == [K_ROT, K_ROT + 1]


@pytest.mark.parametrize("target", [Fraction(1, 3), Fraction(2, 5), Fraction(3, 7)])
def test_rational_rotation_agrees_with_direct_periodicity(target):
    eta = _bisect_rho(target)
    rp = _rp(eta)
    r = rotation_number(rp)
    u, q = r.rational
    zs, ks = orbit(rp, 0.5 * (rp.eta + rp.nu), 20_000)
    tail = zs[-3 * q :]
    assert np.allclose(tail[q:], tail[:-q], atol=1e-10)
    assert all(np.max(np.abs(tail[p:] - tail[:-p])) > 1e-9 for p in range(1, q) if q % p == 0)
    assert int(np.count_nonzero(ks[-q:] == r.k)) == u


def test_farey_mediant_between_one_third_and_one_half():
    e13 = _bisect_rho(Fraction(1, 3))
    e12 = _bisect_rho(Fraction(1, 2))
    e25 = _bisect_rho(Fraction(2, 5))
    assert e13 < e25 < e12
    assert farey_parent_check([Fraction(1, 3), Fraction(2, 5), Fraction(1, 2)])


def test_farey_parent_check_detects_misordering():
    assert farey_parent_check([Fraction(0, 1), Fraction(1, 2), Fraction(1, 1)])
    assert farey_parent_check([Fraction(1, 4), Fraction(1, 3)])
    assert not farey_parent_check([Fraction(1, 3), Fraction(1, 2), Fraction(2, 5)])
    # descending parameter order is fine too
    assert farey_parent_check([Fraction(1, 2), Fraction(2, 5), Fraction(1, 3)])


# ---- merging points -----------------------------------------------------

RATIO_D = 0.0262 / 0.05


def _bands(eta: float) -> int:
    return boxcount_bands_1d(ReducedParams(eta, RATIO_D * eta, S), orbit_len=300_000)


def _bisect_band_change(a: float, b: float) -> float:
    ba = _bands(a)
    for _ in range(40):
        mid = 0.5 * (a + b)
        if _bands(mid) == ba:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def test_merging_point_found_by_bisection_is_reported():
    lo, hi = 0.0445, 0.0452
    assert (_bands(lo), _bands(hi)) == (2, 1)
    eta = _bisect_band_change(lo, hi)
    rp = ReducedParams(eta, RATIO_D * eta, S)
    # box counting only sees the gap close once it is narrower than a box, |J| / 1000
    hits = merging_condition_scan(rp, j_max=4, tol=1e-4)
    assert any(h.endpoint == "eta" for h in hits)
    # and the band count differs on either side
    d = 5e-3 * eta
    assert _bands(eta - d) != _bands(eta + d)


def test_no_merging_hits_at_generic_point():
    rp = ReducedParams(0.01236825, 0.00675, S)
    assert merging_condition_scan(rp, j_max=20, tol=1e-12) == []


def test_merging_scan_rejects_nonpositive():
    with pytest.raises(DomainError):
        merging_condition_scan(ReducedParams(-0.1, 0.1, S))


def test_merging_targets_are_unstable_fixed_points():
    rp = ReducedParams(0.041, RATIO_D * 0.041, S)
    for h in merging_condition_scan(rp, j_max=6, tol=0.05):
        fp = fixed_point(rp, h.target_k)
        assert abs(fp.slope) > 1 and fp.admissible
        assert branch_index(fp.value, S) == h.target_k
