"""Complex-plane regions, set distances, and the tau-homotopy separation test.

Distances between pairs with closed forms (disk-disk, disk-line, line-line,
half-plane combinations, anything against a point cloud) are exact. Sampled
perimeters report a certified lower bound instead: the minimum over samples
minus a Lipschitz inflation term, so a "separated" verdict never rests on a
sampling accident. Crossing and containment tests zero the distance when a
filled region is actually penetrated.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError, ParameterError

# ---------------------------------------------------------------------------
# region variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Disk:
    """Filled disk, or just its boundary circle when filled=False."""

    center: complex
    radius: float
    filled: bool = True

    def __post_init__(self):
        if not (self.radius >= 0.0):
            raise ParameterError("disk radius must be nonnegative")

    def distance_to_points(self, zs):
        zs = np.asarray(zs, dtype=complex)
        delta = zs - self.center
        d0 = np.abs(delta)
        unit = np.where(d0 > 0, delta / np.where(d0 > 0, d0, 1.0), 1.0 + 0j)
        on_circle = self.center + self.radius * unit
        if self.filled:
            dist = np.maximum(0.0, d0 - self.radius)
            nearest = np.where(d0 <= self.radius, zs, on_circle)
        else:
            dist = np.abs(d0 - self.radius)
            nearest = on_circle
        return dist, nearest

    def scale_negate(self, tau: float) -> "Disk":
        return Disk(-tau * self.center, tau * self.radius, self.filled)


@dataclass(frozen=True)
class HalfPlane:
    """{z : Re(conj(normal) * z) >= offset}; the normal points into the set."""

    normal: complex
    offset: float

    def __post_init__(self):
        mag = abs(self.normal)
        if mag == 0.0:
            raise ParameterError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", self.normal / mag)

    def project(self, zs):
        zs = np.asarray(zs, dtype=complex)
        return (np.conj(self.normal) * zs).real

    def distance_to_points(self, zs):
        zs = np.asarray(zs, dtype=complex)
        gap = np.maximum(0.0, self.offset - self.project(zs))
        return gap, zs + gap * self.normal

    def scale_negate(self, tau: float) -> "HalfPlane":
        return HalfPlane(-self.normal, tau * self.offset)


@dataclass(frozen=True)
class VerticalLine:
    """{re + j*im : im_lo <= im <= im_hi}; either bound may be infinite."""

    re: float
    im_lo: float = -np.inf
    im_hi: float = np.inf

    def __post_init__(self):
        if self.im_lo > self.im_hi:
            raise EmptyRegionError("vertical line has an empty im-range")

    def distance_to_points(self, zs):
        zs = np.asarray(zs, dtype=complex)
        imc = np.clip(zs.imag, self.im_lo, self.im_hi)
        nearest = self.re + 1j * imc
        return np.abs(zs - nearest), nearest

    def scale_negate(self, tau: float) -> "VerticalLine":
        return VerticalLine(-tau * self.re, -tau * self.im_hi, -tau * self.im_lo)


class ParametricPerimeter:
    """Curve phi -> complex, held as a dense sample set with a Lipschitz bound.

    ``lipschitz`` bounds |d fn / d phi|; distances computed against the samples
    are inflated by lipschitz * step / 2 to certify a lower bound on the true
    set distance. A filled perimeter must describe a closed loop.
    """

    def __init__(self, fn, lo, hi, filled=False, samples=2048, lipschitz=None):
        if samples < 8:
            raise ParameterError("perimeter needs at least 8 samples")
        if not (hi > lo):
            raise ParameterError("perimeter parameter range must be nondegenerate")
        self.fn = fn
        self.lo = float(lo)
        self.hi = float(hi)
        self.filled = bool(filled)
        self.n = int(samples)
        grid = np.linspace(self.lo, self.hi, self.n)
        pts = np.asarray(fn(grid), dtype=complex)
        if pts.shape != grid.shape or not np.all(np.isfinite(pts.view(float))):
            raise ParameterError("perimeter function must map the grid to finite points")
        self.points = pts
        step = (self.hi - self.lo) / (self.n - 1)
        if lipschitz is None:
            seg = np.abs(np.diff(pts)) / step
            lipschitz = 2.0 * float(np.max(seg)) if seg.size else 0.0
        self.lipschitz = float(lipschitz)
        self.inflation = 0.5 * self.lipschitz * step
        if self.filled and abs(pts[0] - pts[-1]) > 10.0 * self.inflation + 1e-12:
            raise ParameterError("a filled perimeter must be a closed loop")

    def contains(self, zs) -> np.ndarray:
        """Even-odd ray cast against the sampled polygon (filled only)."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if not self.filled:
            return np.zeros(zs.shape, dtype=bool)
        px = self.points.real
        py = self.points.imag
        x1, y1 = px[:-1], py[:-1]
        x2, y2 = px[1:], py[1:]
        inside = np.zeros(zs.shape, dtype=bool)
        for i, z in np.ndenumerate(zs):
            x, y = z.real, z.imag
            straddle = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            hits = straddle & (xs > x)
            inside[i] = bool(np.count_nonzero(hits) % 2)
        return inside

    def scale_negate(self, tau: float) -> "ParametricPerimeter":
        out = ParametricPerimeter.__new__(ParametricPerimeter)
        out.fn = None
        out.lo, out.hi, out.filled, out.n = self.lo, self.hi, self.filled, self.n
        out.points = -tau * self.points
        out.lipschitz = tau * self.lipschitz
        out.inflation = tau * self.inflation
        return out


@dataclass(frozen=True)
class CloudRegion:
    """A finite set of complex points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if pts.size == 0:
            raise EmptyRegionError("cloud region has no points")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def distance_to_points(self, zs):
        zs = np.asarray(zs, dtype=complex)
        diffs = np.abs(zs[..., None] - self.points)
        idx = np.argmin(diffs, axis=-1)
        return np.min(diffs, axis=-1), self.points[idx]

    def scale_negate(self, tau: float) -> "CloudRegion":
        return CloudRegion(-tau * self.points)


Region = (Disk, HalfPlane, VerticalLine, ParametricPerimeter, CloudRegion)


def as_region(obj):
    if isinstance(obj, Region):
        return obj
    return CloudRegion(np.asarray(obj, dtype=complex))


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistanceResult:
    """Certified lower bound on the set distance plus the witnessing pair.

    ``observed`` is the raw sampled minimum; ``slack`` is the inflation that
    was subtracted (zero for exact closed forms).
    """

    value: float
    pair: tuple[complex, complex]
    slack: float = 0.0
    observed: float | None = None

    def swapped(self):
        return DistanceResult(self.value, (self.pair[1], self.pair[0]), self.slack, self.observed)


def _min_pairwise(pa: np.ndarray, pb: np.ndarray):
    d = np.abs(pa[:, None] - pb[None, :])
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return float(d[i, j]), complex(pa[i]), complex(pb[j])


def _cloud_vs_analytic(cloud: CloudRegion, other):
    dists, nearest = other.distance_to_points(cloud.points)
    i = int(np.argmin(dists))
    return DistanceResult(float(dists[i]), (complex(cloud.points[i]), complex(nearest[i])))


def _dist_cloud_cloud(a: CloudRegion, b: CloudRegion):
    val, pa, pb = _min_pairwise(a.points, b.points)
    return DistanceResult(val, (pa, pb))


def _dist_disk_disk(a: Disk, b: Disk):
    d = abs(a.center - b.center)
    unit = (b.center - a.center) / d if d > 0 else 1.0 + 0j
    if a.filled and b.filled:
        val = max(0.0, d - a.radius - b.radius)
        pa = a.center + a.radius * unit
        pb = b.center - b.radius * unit
    elif not a.filled and not b.filled:
        if d >= a.radius + b.radius:
            val = d - a.radius - b.radius
            pa = a.center + a.radius * unit
            pb = b.center - b.radius * unit
        elif d <= abs(a.radius - b.radius):
            val = abs(a.radius - b.radius) - d
            pa = a.center + a.radius * unit
            pb = b.center + b.radius * unit
        else:
            val = 0.0
            pa = pb = a.center + a.radius * unit
    else:
        filled, circ = (a, b) if a.filled else (b, a)
        # nearest circle point to the filled disk lies on the center line
        toward = -unit if a.filled else unit
        pc = circ.center + circ.radius * toward
        val = max(0.0, abs(pc - filled.center) - filled.radius)
        alt = circ.center - circ.radius * toward
        if max(0.0, abs(alt - filled.center) - filled.radius) < val:
            pc = alt
            val = max(0.0, abs(pc - filled.center) - filled.radius)
        gap = abs(pc - filled.center)
        pf = filled.center + filled.radius * ((pc - filled.center) / gap) if gap > 0 else pc
        if val == 0.0:
            pf = pc
        pa, pb = (pf, pc) if a.filled else (pc, pf)
    return DistanceResult(float(val), (complex(pa), complex(pb)))


def _dist_disk_halfplane(d: Disk, h: HalfPlane):
    pc = h.project(np.array([d.center]))[0]
    val = max(0.0, h.offset - pc - d.radius)
    pa = d.center + d.radius * h.normal
    pb = pa + val * h.normal
    return DistanceResult(val, (complex(pa), complex(pb)))


def _dist_disk_line(d: Disk, v: VerticalLine):
    imc = min(max(d.center.imag, v.im_lo), v.im_hi)
    nearest_line = complex(v.re, imc)
    dmin = abs(nearest_line - d.center)
    if d.filled:
        val = max(0.0, dmin - d.radius)
    else:
        # |z - c| sweeps [dmin, inf) over an unbounded line, [dmin, dmax] else
        if np.isinf(v.im_lo) or np.isinf(v.im_hi):
            dmax = np.inf
        else:
            dmax = max(
                abs(complex(v.re, v.im_lo) - d.center), abs(complex(v.re, v.im_hi) - d.center)
            )
        if dmin <= d.radius <= dmax:
            val = 0.0
        else:
            val = min(abs(dmin - d.radius), abs(dmax - d.radius))
    unit = (nearest_line - d.center) / dmin if dmin > 0 else 1.0 + 0j
    pa = d.center + d.radius * unit
    return DistanceResult(val, (complex(pa), nearest_line))


def _interval_gap(alo, ahi, blo, bhi):
    return max(0.0, blo - ahi, alo - bhi)


def _dist_line_line(a: VerticalLine, b: VerticalLine):
    dx = abs(a.re - b.re)
    dy = _interval_gap(a.im_lo, a.im_hi, b.im_lo, b.im_hi)
    if b.im_lo > a.im_hi:
        ya = a.im_hi
    elif b.im_hi < a.im_lo:
        ya = a.im_lo
    else:
        lo = max(a.im_lo, b.im_lo)
        hi = min(a.im_hi, b.im_hi)
        ya = min(max(0.0, lo), hi)
    yb = min(max(ya, b.im_lo), b.im_hi)
    return DistanceResult(float(np.hypot(dx, dy)), (complex(a.re, ya), complex(b.re, yb)))


def _dist_halfplane_halfplane(a: HalfPlane, b: HalfPlane):
    cross = (np.conj(a.normal) * b.normal).imag
    dot = (np.conj(a.normal) * b.normal).real
    if abs(cross) > 1e-12 or dot > 0:
        # boundaries intersect, or the sets share a deep direction
        if abs(cross) > 1e-12:
            # intersection of the two boundary lines
            n1, n2 = a.normal, b.normal
            mat = np.array([[n1.real, n1.imag], [n2.real, n2.imag]])
            xy = np.linalg.solve(mat, np.array([a.offset, b.offset]))
            z = complex(xy[0], xy[1])
        else:
            z = max(a.offset, b.offset) * a.normal
        return DistanceResult(0.0, (z, z))
    gap = max(0.0, a.offset + b.offset)
    pa = a.offset * a.normal
    pb = b.offset * b.normal
    return DistanceResult(gap, (complex(pa), complex(pb)))


def _dist_line_halfplane(v: VerticalLine, h: HalfPlane):
    nx, ny = h.normal.real, h.normal.imag
    base = nx * v.re
    if ny > 0:
        y_best, pmax = v.im_hi, base + ny * v.im_hi
    elif ny < 0:
        y_best, pmax = v.im_lo, base + ny * v.im_lo
    else:
        y_best, pmax = min(max(0.0, v.im_lo), v.im_hi), base
    if np.isinf(pmax):
        y_star = (h.offset - base) / ny
        z = complex(v.re, y_star)
        return DistanceResult(0.0, (z, z))
    val = max(0.0, h.offset - pmax)
    pa = complex(v.re, y_best)
    return DistanceResult(val, (pa, pa + val * h.normal))


def _vertical_crossings(points: np.ndarray, v: VerticalLine) -> bool:
    """Does any polyline edge cross the (possibly clipped) vertical line?"""
    x = points.real - v.re
    y = points.imag
    x1, x2 = x[:-1], x[1:]
    y1, y2 = y[:-1], y[1:]
    straddle = (x1 <= 0) != (x2 <= 0)
    cand = np.nonzero(straddle)[0]
    if cand.size == 0:
        exact = np.nonzero(x == 0.0)[0]
        return bool(np.any((y[exact] >= v.im_lo) & (y[exact] <= v.im_hi)))
    t = -x1[cand] / (x2[cand] - x1[cand])
    yc = y1[cand] + t * (y2[cand] - y1[cand])
    return bool(np.any((yc >= v.im_lo) & (yc <= v.im_hi)))


def _dist_perimeter_other(p: ParametricPerimeter, other):
    if isinstance(other, CloudRegion):
        if p.filled:
            mask = p.contains(other.points)
            if np.any(mask):
                inside = complex(other.points[mask][0])
                return DistanceResult(0.0, (inside, inside), slack=0.0, observed=0.0)
        val, pa, pb = _min_pairwise(p.points, other.points)
        return DistanceResult(
            max(0.0, val - p.inflation), (pa, pb), slack=p.inflation, observed=val
        )
    if isinstance(other, VerticalLine):
        if p.filled and _vertical_crossings(p.points, other):
            z = complex(other.re, min(max(0.0, other.im_lo), other.im_hi))
            return DistanceResult(0.0, (z, z), slack=0.0, observed=0.0)
        dists, nearest = other.distance_to_points(p.points)
        i = int(np.argmin(dists))
        return DistanceResult(
            max(0.0, float(dists[i]) - p.inflation),
            (complex(p.points[i]), complex(nearest[i])),
            slack=p.inflation,
            observed=float(dists[i]),
        )
    if isinstance(other, (Disk, HalfPlane)):
        if p.filled:
            probe = other.center if isinstance(other, Disk) else other.offset * other.normal
            if bool(p.contains(np.array([probe]))[0]):
                return DistanceResult(0.0, (complex(probe), complex(probe)), observed=0.0)
        dists, nearest = other.distance_to_points(p.points)
        i = int(np.argmin(dists))
        return DistanceResult(
            max(0.0, float(dists[i]) - p.inflation),
            (complex(p.points[i]), complex(nearest[i])),
            slack=p.inflation,
            observed=float(dists[i]),
        )
    if isinstance(other, ParametricPerimeter):
        if p.filled:
            mask = p.contains(other.points)
            if np.any(mask):
                z = complex(other.points[mask][0])
                return DistanceResult(0.0, (z, z), observed=0.0)
        if other.filled:
            mask = other.contains(p.points)
            if np.any(mask):
                z = complex(p.points[mask][0])
                return DistanceResult(0.0, (z, z), observed=0.0)
        val, pa, pb = _min_pairwise(p.points, other.points)
        slack = p.inflation + other.inflation
        return DistanceResult(max(0.0, val - slack), (pa, pb), slack=slack, observed=val)
    raise ParameterError(f"unsupported region pair: perimeter vs {type(other).__name__}")


_RANK = {CloudRegion: 0, ParametricPerimeter: 1, Disk: 2, VerticalLine: 3, HalfPlane: 4}


def dist(a, b) -> DistanceResult:
    """Set distance with witnesses; exact where closed forms exist.

    Accepts regions or bare arrays of complex points (treated as clouds).
    Symmetric by construction: dist(a, b).value == dist(b, a).value.
    """
    a = as_region(a)
    b = as_region(b)
    if _RANK[type(a)] > _RANK[type(b)]:
        return dist(b, a).swapped()
    if isinstance(a, CloudRegion):
        if isinstance(b, CloudRegion):
            return _dist_cloud_cloud(a, b)
        if isinstance(b, ParametricPerimeter):
            return _dist_perimeter_other(b, a).swapped()
        return _cloud_vs_analytic(a, b)
    if isinstance(a, ParametricPerimeter):
        return _dist_perimeter_other(a, b)
    if isinstance(a, Disk):
        if isinstance(b, Disk):
            return _dist_disk_disk(a, b)
        if isinstance(b, VerticalLine):
            return _dist_disk_line(a, b)
        return _dist_disk_halfplane(a, b)
    if isinstance(a, VerticalLine):
        if isinstance(b, VerticalLine):
            return _dist_line_line(a, b)
        return _dist_line_halfplane(a, b)
    return _dist_halfplane_halfplane(a, b)


# ---------------------------------------------------------------------------
# separation over the tau homotopy
# ---------------------------------------------------------------------------


def default_tau_grid(count: int = 64, tau_min: float = 1e-3) -> np.ndarray:
    """Log-spaced grid on [tau_min, 1] with tau = 1 always included."""
    grid = np.unique(np.concatenate([np.logspace(np.log10(tau_min), 0.0, count), [1.0]]))
    return grid


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a separation sweep over the tau grid.

    The margin is the smallest certified distance over the grid; a finite grid
    cannot certify the continuum of tau values, so the grid itself is part of
    the verdict.
    """

    separated: bool
    margin: float
    worst_tau: float
    worst_pair: tuple[complex, complex]
    r: float
    mode: str
    tau_grid: tuple[float, ...]
    max_slack: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "separated": bool(self.separated),
            "margin": float(self.margin),
            "worst_tau": float(self.worst_tau),
            "worst_pair": [
                [self.worst_pair[0].real, self.worst_pair[0].imag],
                [self.worst_pair[1].real, self.worst_pair[1].imag],
            ],
            "mode": self.mode,
            "r": float(self.r),
            "tau_grid": {
                "count": len(self.tau_grid),
                "min": float(min(self.tau_grid)),
                "max": float(max(self.tau_grid)),
            },
            "max_sampling_slack": float(self.max_slack),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def separation_check(
    region_a,
    b_of_tau,
    r: float,
    tau_grid=None,
    mode: str = "signed",
    jobs: int = 1,
) -> StabilityVerdict:
    """Evaluate dist(A, B(tau)) over the grid and fold into a verdict.

    ``region_a`` is a region or point array; ``b_of_tau`` maps tau in (0, 1]
    to the opposing region. Separated means the certified margin meets ``r``
    at every grid point. Ties in the minimum resolve toward smaller tau, so
    the verdict does not depend on evaluation order.
    """
    if not (r > 0.0):
        raise ParameterError("separation radius r must be positive")
    taus = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    if taus.size == 0 or np.any(taus <= 0.0) or np.any(taus > 1.0):
        raise ParameterError("tau grid must lie in (0, 1]")
    taus = np.sort(taus)
    A = as_region(region_a)

    def one(tau):
        return dist(A, b_of_tau(float(tau)))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, taus))
    else:
        results = [one(t) for t in taus]

    best = 0
    for i in range(1, len(results)):
        if results[i].value < results[best].value:
            best = i
    worst = results[best]
    margin = worst.value
    return StabilityVerdict(
        separated=bool(margin >= r),
        margin=float(margin),
        worst_tau=float(taus[best]),
        worst_pair=worst.pair,
        r=float(r),
        mode=mode,
        tau_grid=tuple(float(t) for t in taus),
        max_slack=float(max(res.slack for res in results)),
    )
