"""Periodic orbits of the normal form from symbolic itineraries.

A word over {L, R} is read left to right: the first symbol is the piece applied
to the first cycle point.  Composing the affine pieces gives a single affine map
whose fixed point is the first point of the cycle, so solving a cycle is a 2x2
linear solve.
"""

from __future__ import annotations

import cmath
import csv
import json
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError
from .grid import ParamGrid
from .normal_form import AffinePiece, NormalFormParams, PlanarPoint, piece, saddle_data

BOUNDARY_TOL = 1e-10
SINGULAR_TOL = 1e-12

_TOKEN = re.compile(r"([LR])(?:\^?\{?(\d+)\}?)?")


def _canonical(word: str) -> str:
    return min(word[i:] + word[:i] for i in range(len(word)))


@dataclass(frozen=True)
class Itinerary:
    """A cyclic word over {L, R}, stored in its lexicographically minimal rotation."""

    word: str

    def __post_init__(self) -> None:
        if not self.word or set(self.word) - {"L", "R"}:
            raise DomainError(f"itinerary must be a nonempty word over L, R; got {self.word!r}")
        object.__setattr__(self, "word", _canonical(self.word))

    @classmethod
    def parse(cls, text: str) -> Itinerary:
        """Accepts raw words ("LLR"), exponents ("L^8R^2", "L8R2", "L^{8}R^{2}")."""
        s = text.replace(" ", "")
        pos, out = 0, []
        for mt in _TOKEN.finditer(s):
            if mt.start() != pos:
                break
            out.append(mt.group(1) * int(mt.group(2) or 1))
            pos = mt.end()
        if pos != len(s) or not out:
            raise DomainError(f"cannot parse itinerary {text!r}")
        return cls("".join(out))

    @classmethod
    def power_word(cls, k: int, m: int) -> Itinerary:
        return cls("L" * k + "R" * m)

    @property
    def period(self) -> int:
        return len(self.word)

    def rotations(self) -> list[str]:
        w = self.word
        return [w[i:] + w[:i] for i in range(len(w))]

    def pretty(self) -> str:
        runs = re.findall(r"L+|R+", self.word)
        return "".join(r[0] if len(r) == 1 else f"{r[0]}^{len(r)}" for r in runs)

    def __str__(self) -> str:
        return self.word


@dataclass(frozen=True)
class CycleSolution:
    itinerary: Itinerary
    points: tuple[PlanarPoint, ...]
    multipliers: tuple[complex, complex]
    admissible: bool
    stable: bool
    degenerate: bool

    @property
    def period(self) -> int:
        return self.itinerary.period


def compose_word(params: NormalFormParams, word: str) -> AffinePiece:
    total = piece(params, word[0])
    for s in word[1:]:
        total = total.then(piece(params, s))
    return total


def _multipliers(M: AffinePiece) -> tuple[complex, complex]:
    tr = M.m11 + M.m22
    det = M.det
    disc = cmath.sqrt(tr * tr - 4 * det)
    a, b = (tr + disc) / 2, (tr - disc) / 2
    return (a, b) if abs(a) <= abs(b) else (b, a)


def solve_cycle(params: NormalFormParams, itin: Itinerary | str, word_order: str | None = None) -> CycleSolution:
    """Solve the cycle with the given itinerary.

    ``word_order`` optionally selects a specific rotation of the word, which fixes
    which cycle point is listed first; the canonical rotation is used otherwise.
    """
    if isinstance(itin, str):
        itin = Itinerary.parse(itin)
    word = word_order if word_order is not None else itin.word
    if _canonical(word) != itin.word:
        raise DomainError(f"{word!r} is not a rotation of {itin.word!r}")
    M = compose_word(params, word)
    mults = _multipliers(M)
    a11, a12, a21, a22 = 1 - M.m11, -M.m12, -M.m21, 1 - M.m22
    det = a11 * a22 - a12 * a21
    if abs(det) <= SINGULAR_TOL * max(1.0, abs(a11 * a22), abs(a12 * a21)):
        return CycleSolution(itin, (), mults, admissible=False, stable=False, degenerate=True)
    x = (a22 * M.b1 - a12 * M.b2) / det
    y = (a11 * M.b2 - a21 * M.b1) / det
    pts = [PlanarPoint(x, y)]
    for s in word[:-1]:
        pts.append(piece(params, s)(pts[-1]))
    admissible = all(
        (p.x <= BOUNDARY_TOL) if s == "L" else (p.x >= -BOUNDARY_TOL) for p, s in zip(pts, word)
    )
    stable = admissible and all(abs(mu) < 1 for mu in mults)
    return CycleSolution(itin, tuple(pts), mults, admissible=admissible, stable=stable, degenerate=False)


def is_stable_cycle(params: NormalFormParams, itin: Itinerary) -> bool:
    try:
        return solve_cycle(params, itin).stable
    except DomainError:
        return False


def grow_region(
    grid: ParamGrid,
    itin: Itinerary | str,
    seeds: Sequence[tuple[int, int]],
) -> np.ndarray:
    """Flood fill from ``seeds`` over 4-connected cells that carry a stable admissible cycle.

    Cells that would qualify but are not connected to a qualifying seed stay False.
    """
    if not seeds:
        raise DomainError("grow_region needs at least one seed cell")
    if isinstance(itin, str):
        itin = Itinerary.parse(itin)
    n1, n2 = grid.shape
    mask = np.zeros((n1, n2), dtype=bool)
    seen = np.zeros((n1, n2), dtype=bool)
    queue: deque[tuple[int, int]] = deque()
    for s in seeds:
        i, j = int(s[0]), int(s[1])
        if 0 <= i < n1 and 0 <= j < n2 and not seen[i, j]:
            seen[i, j] = True
            queue.append((i, j))
    while queue:
        i, j = queue.popleft()
        if not is_stable_cycle(NormalFormParams(**grid.values_at(i, j)), itin):
            continue
        mask[i, j] = True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < n1 and 0 <= b < n2 and not seen[a, b]:
                seen[a, b] = True
                queue.append((a, b))
    return mask


def detect_cycle_word(
    params: NormalFormParams,
    p0: PlanarPoint,
    burn_in: int = 10_000,
    q_max: int = 200,
    tol: float = 1e-9,
    escape_radius: float = 1e6,
) -> Itinerary | None:
    """The itinerary of the periodic orbit the forward orbit of ``p0`` settles on, if any."""
    tl, dl, tr, dr = params.as_tuple()
    x, y, esc = K.iterate_2d(tl, dl, tr, dr, float(p0[0]), float(p0[1]), burn_in, escape_radius)
    if esc >= 0:
        return None
    pts, n_done = K.orbit_2d(tl, dl, tr, dr, x, y, 3 * q_max, escape_radius)
    if n_done < 3 * q_max:
        return None
    q = K.find_period_2d(pts, q_max, tol)
    if q == 0:
        return None
    tail = pts[-q:]
    return Itinerary("".join("L" if px <= 0 else "R" for px in tail[:, 0]))


def default_initial_points(params: NormalFormParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Initial conditions: a jittered U first (it lies on the unstable line of the saddle), then random points.

    The random points fill a box covering the saddle geometry when there is one.
    """
    out = np.empty((n, 2))
    try:
        sd = saddle_data(params)
        r = 1.5 * max(1.0, abs(sd.Y.x), abs(sd.Y.y), abs(sd.S.y), abs(sd.U.y))
        start = 0
        if n:
            out[0] = (sd.U.x - 1e-6 * rng.random(), sd.U.y + 1e-6 * rng.random())
            start = 1
    except DomainError:
        r, start = 2.0, 0
    out[start:] = rng.uniform(-r, r, size=(n - start, 2))
    return out


def candidate_itineraries(
    grid: ParamGrid,
    coarse_resolution: int = 20,
    orbit_budget: int = 10_000,
    rng_seed: int = 0,
    n_initial: int = 4,
    q_max: int = 200,
) -> dict[Itinerary, list[tuple[int, int]]]:
    """Itineraries of stable cycles seen by simulation on a coarse sub-grid.

    Returns each itinerary with the fine-grid cells where it was observed; those
    cells seed :func:`grow_region`.
    """
    found: dict[Itinerary, list[tuple[int, int]]] = {}
    n1, n2 = grid.shape
    ii = np.unique(np.linspace(0, n1 - 1, min(coarse_resolution, n1)).round().astype(int))
    jj = np.unique(np.linspace(0, n2 - 1, min(coarse_resolution, n2)).round().astype(int))
    seeds = np.random.SeedSequence(rng_seed)
    cell_seeds = seeds.spawn(len(ii) * len(jj))
    for c, (i, j) in enumerate((i, j) for i in ii for j in jj):
        params = NormalFormParams(**grid.values_at(int(i), int(j)))
        rng = np.random.default_rng(cell_seeds[c])
        for p0 in default_initial_points(params, n_initial, rng):
            w = detect_cycle_word(params, PlanarPoint(*p0), burn_in=orbit_budget, q_max=q_max)
            if w is not None:
                found.setdefault(w, []).append((int(i), int(j)))
    return found


def write_mask_csv(path: str | Path, grid: ParamGrid, mask: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([grid.axis1.name, grid.axis2.name, "flag"])
        v1, v2 = grid.axis1.values, grid.axis2.values
        for i in range(grid.axis1.n):
            for j in range(grid.axis2.n):
                w.writerow([repr(float(v1[i])), repr(float(v2[j])), int(mask[i, j])])


def write_mask_metadata(path: str | Path, grid: ParamGrid, itin: Itinerary, seeds: Iterable, extra: dict | None = None) -> None:
    meta = {
        "itinerary": itin.pretty(),
        "axis1": {"name": grid.axis1.name, "spec": grid.axis1.spec()},
        "axis2": {"name": grid.axis2.name, "spec": grid.axis2.spec()},
        "fixed": grid.fixed,
        "seeds": [list(map(int, s)) for s in seeds],
    }
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2) + "\n")
