"""Monte Carlo oracle for the stationary landing densities.

Particles are simulated in fixed-size batches. Batch ``i`` draws from its
own generator seeded with ``SeedSequence(seed, spawn_key=(i,))``, so the
sample set depends only on ``(seed, n)`` and never on how many workers
ran the batches.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .errors import DomainError
from .flight import FlightParams, VonMises, simulate_endpoints
from .lifetime import LifetimeSpec
from .stationary import DEFAULT_SETTINGS, QuadratureSettings, StationaryModel, radial_mass

logger = logging.getLogger(__name__)

BATCH_SIZE = 65_536
COUNT_FLOOR = 100
Z_THRESHOLD = 4.0
HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "empirical_mass", "analytic_mass", "std_err", "z")


@dataclass(frozen=True)
class LandingSample:
    landing: tuple[float, float]
    lifetime: float
    switches: int


@dataclass(frozen=True)
class LandingBatch:
    """Column storage for many landings; iterate to get LandingSample records."""

    flight: FlightParams
    lifetime_spec: LifetimeSpec
    x1: np.ndarray
    x2: np.ndarray
    lifetimes: np.ndarray
    switches: np.ndarray
    seed: int

    def __len__(self) -> int:
        return self.x1.size

    def __iter__(self) -> Iterator[LandingSample]:
        for a, b, t, s in zip(self.x1, self.x2, self.lifetimes, self.switches):
            yield LandingSample((float(a), float(b)), float(t), int(s))

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.x1, self.x2)

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.x2, self.x1)

    def zero_switch_fraction(self) -> tuple[float, float]:
        """Fraction of paths that never turned, with its binomial standard error."""
        n = len(self)
        p = float(np.count_nonzero(self.switches == 0)) / n
        return p, math.sqrt(p * (1.0 - p) / n)


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("FLIGHTFALL_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, os.cpu_count() or 1))


def _run_batch(flight, lifetime, seed, index, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    t = np.asarray(lifetime.sample(rng, size), dtype=float)
    x1, x2, sw = simulate_endpoints(flight, t, rng)
    return x1, x2, t, sw


def simulate_landings(
    flight: FlightParams,
    lifetime: LifetimeSpec,
    n: int,
    seed: int,
    workers: int | None = None,
) -> LandingBatch:
    """Simulate ``n`` particles to their death time and record where they land."""
    if n < 1:
        raise DomainError(f"need at least one path, got n={n!r}")
    sizes = [BATCH_SIZE] * (n // BATCH_SIZE)
    if n % BATCH_SIZE:
        sizes.append(n % BATCH_SIZE)
    jobs = [(flight, lifetime, seed, i, size) for i, size in enumerate(sizes)]
    nw = _worker_count(workers)
    if nw == 1 or len(jobs) == 1:
        results = [_run_batch(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(lambda j: _run_batch(*j), jobs))
    cols = [np.concatenate(c) for c in zip(*results)]
    return LandingBatch(flight, lifetime, cols[0], cols[1], cols[2], cols[3], seed)


@dataclass(frozen=True)
class RadialHistogram:
    bin_edges: np.ndarray
    masses: np.ndarray
    standard_errors: np.ndarray
    n_paths: int
    filter: str

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.masses * self.n_paths).astype(np.int64)


def radial_histogram(
    samples: LandingBatch,
    bin_edges,
    filter: Literal["all", "switched_only"] = "all",
) -> RadialHistogram:
    """Per-bin landing fractions over all ``n`` simulated paths.

    With ``switched_only`` the paths that never turned still count in the
    denominator, so bin masses estimate 2 pi r p(r) integrated over the bin
    for the stationary density p, whose total mass is 1 - L_q(lam).
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or edges[0] != 0 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing and start at 0")
    if filter not in ("all", "switched_only"):
        raise DomainError(f"unknown filter {filter!r}")
    n = len(samples)
    radii = samples.radii
    if filter == "switched_only":
        radii = radii[samples.switches > 0]
    idx = np.searchsorted(edges, radii, side="right") - 1
    inside = (idx >= 0) & (idx < edges.size - 1)
    counts = np.bincount(idx[inside], minlength=edges.size - 1)
    masses = counts / n if n else np.zeros(edges.size - 1)
    se = np.sqrt(masses * (1.0 - masses) / n) if n else np.zeros_like(masses)
    return RadialHistogram(edges, masses, se, n, filter)


@dataclass(frozen=True)
class ComparisonReport:
    bin_edges: np.ndarray
    empirical: np.ndarray
    analytic: np.ndarray
    std_err: np.ndarray
    z: np.ndarray
    compared: np.ndarray
    max_z: float
    n_paths: int

    @property
    def inconclusive(self) -> bool:
        return not self.compared.any()

    @property
    def passed(self) -> bool:
        return not self.inconclusive and self.max_z <= Z_THRESHOLD

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.passed else "fail"

    def rows(self):
        for i in range(self.empirical.size):
            yield (
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.empirical[i],
                self.analytic[i],
                self.std_err[i],
                self.z[i],
            )

    def to_csv(self, precision: int = 10) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HISTOGRAM_COLUMNS)
        for row in self.rows():
            w.writerow([_fmt(v, precision) for v in row])
        return buf.getvalue()


def _fmt(v: float, precision: int) -> str:
    if math.isinf(v):
        return "inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.{precision}g}"


def analytic_bin_masses(
    model: StationaryModel, bin_edges, settings: QuadratureSettings = DEFAULT_SETTINGS
) -> np.ndarray:
    edges = np.asarray(bin_edges, dtype=float)
    return np.array([radial_mass(model, a, b, settings) for a, b in zip(edges[:-1], edges[1:])])


def compare_to_analytic(
    hist: RadialHistogram,
    model: StationaryModel,
    samples: LandingBatch | None = None,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> ComparisonReport:
    """Standardised per-bin deviations between a histogram and the analytic density.

    The standard error of each bin is the binomial one under the analytic
    mass. Only bins expecting at least ``COUNT_FLOOR`` landings enter the
    pass/fail decision. When ``samples`` is given, its parameters must match
    ``model``.
    """
    if hist.n_paths == 0:
        raise DomainError("histogram holds no paths")
    if hist.filter != "switched_only":
        raise DomainError("analytic comparison needs a switched_only histogram")
    if samples is not None:
        if samples.flight != model.flight or samples.lifetime_spec != model.lifetime:
            raise DomainError("samples were simulated with different parameters than the model")
    expected = analytic_bin_masses(model, hist.bin_edges, settings)
    n = hist.n_paths
    se = np.sqrt(np.clip(expected * (1.0 - expected), 0.0, None) / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(hist.masses - expected) / se, np.inf)
    compared = expected * n >= COUNT_FLOOR
    max_z = float(z[compared].max()) if compared.any() else 0.0
    return ComparisonReport(hist.bin_edges, hist.masses, expected, se, z, compared, max_z, n)


@dataclass(frozen=True)
class PlanarGrid:
    """Landing masses on a polar grid of radial rings and angular sectors.

    Sector edges run from -pi to pi; with an even sector count the grid is
    symmetric under the reflection theta -> pi - theta.
    """

    radial_edges: np.ndarray
    angle_edges: np.ndarray
    masses: np.ndarray  # shape (rings, sectors)
    n_paths: int

    @property
    def cell_areas(self) -> np.ndarray:
        r = self.radial_edges
        ring = 0.5 * (r[1:] ** 2 - r[:-1] ** 2)
        return ring[:, None] * np.diff(self.angle_edges)[None, :]

    @property
    def densities(self) -> np.ndarray:
        return self.masses / self.cell_areas

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(self.masses * (1.0 - self.masses) / self.n_paths)

    def radialize(self) -> RadialHistogram:
        m = self.masses.sum(axis=1)
        se = np.sqrt(m * (1.0 - m) / self.n_paths)
        return RadialHistogram(self.radial_edges, m, se, self.n_paths, "switched_only")

    def mirrored(self) -> "PlanarGrid":
        """Grid reflected about the x2 axis (theta -> pi - theta)."""
        # reversing the sectors gives theta -> -theta; a half turn then gives pi - theta
        n = self.masses.shape[1]
        flipped = np.roll(self.masses[:, ::-1], n // 2, axis=1)
        return PlanarGrid(self.radial_edges, self.angle_edges, flipped, self.n_paths)

    def to_csv(self, precision: int = 10) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("r_lo", "r_hi", "theta_lo", "theta_hi", "x1_center", "x2_center", "mass", "density"))
        dens = self.densities
        for i in range(self.masses.shape[0]):
            r_lo, r_hi = self.radial_edges[i], self.radial_edges[i + 1]
            rc = 0.5 * (r_lo + r_hi)
            for j in range(self.masses.shape[1]):
                a_lo, a_hi = self.angle_edges[j], self.angle_edges[j + 1]
                ac = 0.5 * (a_lo + a_hi)
                w.writerow(
                    [_fmt(v, precision) for v in (r_lo, r_hi, a_lo, a_hi, rc * math.cos(ac), rc * math.sin(ac), self.masses[i, j], dens[i, j])]
                )
        return buf.getvalue()


def planar_density_grid(samples: LandingBatch, radial_edges, n_sectors: int = 36) -> PlanarGrid:
    """Polar 2-D histogram of the landings of paths that changed direction.

    Zero-switch paths are left out (they still count in the denominator) so
    that, for a symmetric flight, the ring sums estimate the same masses as
    the analytic stationary density.
    """
    if n_sectors < 2 or n_sectors % 2:
        raise DomainError("n_sectors must be an even integer >= 2")
    edges = np.asarray(radial_edges, dtype=float)
    if edges[0] != 0 or np.any(np.diff(edges) <= 0):
        raise DomainError("radial edges must be strictly increasing and start at 0")
    keep = samples.switches > 0
    r = samples.radii[keep]
    theta = samples.angles[keep]
    angle_edges = np.linspace(-math.pi, math.pi, n_sectors + 1)
    ri = np.searchsorted(edges, r, side="right") - 1
    ai = np.clip(((theta + math.pi) / (2 * math.pi) * n_sectors).astype(np.int64), 0, n_sectors - 1)
    ok = (ri >= 0) & (ri < edges.size - 1)
    flat = np.bincount(ri[ok] * n_sectors + ai[ok], minlength=(edges.size - 1) * n_sectors)
    masses = flat.reshape(edges.size - 1, n_sectors) / len(samples)
    return PlanarGrid(edges, angle_edges, masses, len(samples))


def mean_displacement(samples: LandingBatch) -> tuple[np.ndarray, np.ndarray]:
    """Mean landing point and its standard error, per coordinate."""
    pts = np.stack([samples.x1, samples.x2])
    n = pts.shape[1]
    return pts.mean(axis=1), pts.std(axis=1, ddof=1) / math.sqrt(n)


def mirror_z(a: PlanarGrid, b: PlanarGrid) -> np.ndarray:
    """Two-sample z-scores between ``a`` and the mirror image of ``b``."""
    bm = b.mirrored()
    se = np.sqrt(a.standard_errors**2 + bm.standard_errors**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, np.abs(a.masses - bm.masses) / se, 0.0)


def is_von_mises(flight: FlightParams) -> bool:
    return isinstance(flight.direction_law, VonMises) and flight.direction_law.k != 0
