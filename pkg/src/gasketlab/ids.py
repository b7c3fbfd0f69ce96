"""Monte-Carlo integrated density of states and spectral-tail fits.

The IDS of H = -Laplacian + V is approximated by the trial average of
#{eigenvalues <= E} / |region| on a triangle (one-sided) or ball
(two-sided) region.  Near the bottom of the spectrum two regimes are
fitted: the free operator vanishes like a power E^tau, the random one
like a stretched exponential whose double logarithm is again a power law
with the same exponent tau = log3/log5.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .lattice import TriangleSpec, build_ball, build_triangle
from .operators import NEUMANN, PotentialSpec, assemble, sample_potential
from .spectra import DENSE_THRESHOLD, counting_curve, eigenvalues_dense

#: Volume growth exponent (base 2) of the gasket.
ALPHA = math.log(3.0) / math.log(2.0)
#: Random-walk/space-time scaling exponent (base 2).
BETA = math.log(5.0) / math.log(2.0)
#: Their ratio: the tail exponent of both fitted regimes.
TAU = math.log(3.0) / math.log(5.0)

#: Neumann gap constant: first nonzero eigenvalue >= TEMPLE_C0 * 5^-level.
TEMPLE_C0 = 15.0 / 2.0

DEFAULT_WINDOW = (1e-3, 5e-2)


@dataclass
class IdsCurve:
    """Normalized averaged counting function with per-point standard errors."""

    energies: np.ndarray
    mean_counts: np.ndarray
    std_errors: np.ndarray
    trials: int
    level: int
    bc: str
    region_kind: str
    region_size: int

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("E,mean,stderr,trials\n")
            for e, m, s in zip(self.energies, self.mean_counts, self.std_errors):
                fh.write(f"{e:.17g},{m:.17g},{s:.17g},{self.trials}\n")

    def min_usable_count(self) -> float:
        """Smallest trustworthy mean count: at least 3 raw eigenvalues."""
        if self.region_size <= 0:
            return 0.0
        return 3.0 / (self.trials * self.region_size)


def read_curve_csv(path) -> IdsCurve:
    """Load a curve written by :meth:`IdsCurve.to_csv` (metadata unknown)."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    trials = int(rows[0, 3]) if rows.size else 1
    return IdsCurve(rows[:, 0], rows[:, 1], rows[:, 2], trials,
                    level=-1, bc="", region_kind="", region_size=0)


def tail_grid(lo: float = 1e-4, hi: float = 1e-1, n: int = 33) -> np.ndarray:
    """Geometric energy grid for tail work."""
    return np.geomspace(lo, hi, n)


def global_grid(potential_spec: PotentialSpec, n: int = 129) -> np.ndarray:
    """Uniform grid covering the whole spectrum of any boundary condition."""
    _, hi = potential_spec.support()
    return np.linspace(0.0, 16.0 + max(hi, 0.0), n)


def _region_for(level, region_kind):
    if region_kind == "half":
        return build_triangle(TriangleSpec(level), half_lattice=True)
    if region_kind == "full":
        return build_ball(level)
    raise ValidationError(f"region kind must be 'half' or 'full', got {region_kind!r}")


def estimate_ids(level, bc, potential_spec, trials, grid, *,
                 region_kind: str = "half", method: str = "auto",
                 threads: int = 1,
                 threshold: int = DENSE_THRESHOLD) -> IdsCurve:
    """Average the normalized counting function over independent trials.

    Trials are keyed by (seed, trial index) and reduced in fixed order, so
    the result does not depend on scheduling or ``threads``.
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    grid = np.sort(np.asarray(grid, dtype=float))
    region = _region_for(level, region_kind)
    n = len(region)

    def one_trial(t):
        values = sample_potential(region, potential_spec, t)
        ham = assemble(region, bc, values)
        return counting_curve(ham, grid, method=method,
                              threshold=threshold).counts / n

    if threads > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_trial, range(trials)))
    else:
        results = [one_trial(t) for t in range(trials)]
    stacked = np.vstack(results)
    mean = stacked.mean(axis=0)
    if trials > 1:
        stderr = stacked.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        stderr = np.zeros_like(mean)
    return IdsCurve(grid, mean, stderr, trials, level, bc, region_kind, n)


def bc_independence_report(level, potential_spec, trials, grid, *,
                           region_kind: str = "half", method: str = "auto",
                           threads: int = 1) -> dict:
    """Compare the estimated curves across boundary conditions.

    The same potential samples are used for every boundary condition, so
    pointwise curve differences must stay within 9/|region| plus four
    combined standard errors.
    """
    from .operators import BOUNDARY_CONDITIONS

    curves = {bc: estimate_ids(level, bc, potential_spec, trials, grid,
                               region_kind=region_kind, method=method,
                               threads=threads)
              for bc in BOUNDARY_CONDITIONS}
    n = next(iter(curves.values())).region_size
    pairs = []
    ok = True
    names = list(curves)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ca, cb = curves[a], curves[b]
            bound = 9.0 / n + 4.0 * (ca.std_errors + cb.std_errors)
            excess = np.abs(ca.mean_counts - cb.mean_counts) - bound
            worst = float(np.max(excess))
            pairs.append({"pair": f"{a}/{b}", "max_excess": worst,
                          "passed": bool(worst <= 0.0)})
            ok = ok and worst <= 0.0
    return {"level": level, "region_size": n, "pairs": pairs, "passed": ok}


def truncated_potential(sample, level: int) -> np.ndarray:
    """Halve the potential and cap it at (c0/3) 5^-level."""
    cap = TEMPLE_C0 / 3.0 * 5.0 ** (-level)
    return np.minimum(0.5 * np.asarray(sample, dtype=float), cap)


@dataclass
class TempleBound:
    """Ground-state lower bound from the truncated-potential mean."""

    value: float
    mean_truncated: float
    cap: float
    hypothesis_ok: bool


def temple_lower_bound(level, potential_sample) -> TempleBound:
    """Lower bound for the ground state of the Neumann operator with the
    half potential: half the mean of the truncated potential.

    The trial-vector hypothesis needs the truncated mean strictly below
    the cap (c0/3) 5^-level; a capped-out sample is flagged, not rejected.
    """
    sample = np.asarray(potential_sample, dtype=float)
    trunc = truncated_potential(sample, level)
    cap = TEMPLE_C0 / 3.0 * 5.0 ** (-level)
    mean = float(np.mean(trunc))
    return TempleBound(value=0.5 * mean, mean_truncated=mean, cap=cap,
                       hypothesis_ok=mean < cap)


def temple_check(level, potential_spec, trial: int = 0) -> dict:
    """Compare the bound against the dense ground state on one sample."""
    region = build_triangle(level)
    values = sample_potential(region, potential_spec, trial)
    bound = temple_lower_bound(level, values)
    ham = assemble(region, NEUMANN, 0.5 * values)
    ground = float(eigenvalues_dense(ham)[0])
    return {
        "level": level,
        "trial": trial,
        "bound": bound.value,
        "ground_state": ground,
        "hypothesis_ok": bound.hypothesis_ok,
        "passed": bool(bound.value <= ground + 1e-12),
    }


def _usable_points(curve: IdsCurve, window):
    lo, hi = window
    if not lo < hi:
        raise ValidationError("window must satisfy lo < hi")
    floor = max(curve.min_usable_count(), 0.0)
    mask = ((curve.energies >= lo) & (curve.energies <= hi)
            & (curve.mean_counts > floor) & (curve.mean_counts > 0.0)
            & (curve.mean_counts < 1.0))
    return curve.energies[mask], curve.mean_counts[mask]


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass
class LifshitzFit:
    """Least-squares slope of log|log N| against log E."""

    window: tuple[float, float]
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    target: float = -TAU

    @property
    def deviation(self) -> float:
        return abs(self.slope - self.target)


def lifshitz_fit(curve: IdsCurve, window=DEFAULT_WINDOW) -> LifshitzFit:
    """Fit the double-log tail exponent on the usable window points."""
    energies, counts = _usable_points(curve, window)
    if len(energies) < 5:
        raise InsufficientDataError(
            f"only {len(energies)} usable points in window {window}")
    slope, intercept, r2 = _linear_fit(np.log(energies),
                                       np.log(np.abs(np.log(counts))))
    return LifshitzFit(tuple(window), slope, intercept, r2, len(energies))


@dataclass
class PowerLawFit:
    """Least-squares fit of log N against log E."""

    window: tuple[float, float]
    slope: float
    prefactor: float
    r_squared: float
    n_points: int
    target: float = TAU


def free_ids_exponent(curve: IdsCurve, window=DEFAULT_WINDOW) -> PowerLawFit:
    """Power-law fit of the zero-potential curve near the bottom."""
    energies, counts = _usable_points(curve, window)
    if len(energies) < 5:
        raise InsufficientDataError(
            f"only {len(energies)} usable points in window {window}")
    slope, intercept, r2 = _linear_fit(np.log(energies), np.log(counts))
    return PowerLawFit(tuple(window), slope, math.exp(intercept), r2,
                       len(energies))


def exponential_tail_fit(curve: IdsCurve, window=DEFAULT_WINDOW,
                         exponent: float = TAU) -> dict:
    """Two-parameter stretched-exponential reference fit
    log N = m1 + m2 * E^-exponent.  Diagnostic only."""
    energies, counts = _usable_points(curve, window)
    if len(energies) < 5:
        raise InsufficientDataError(
            f"only {len(energies)} usable points in window {window}")
    design = np.column_stack([np.ones_like(energies), energies ** -exponent])
    coef, *_ = np.linalg.lstsq(design, np.log(counts), rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((np.log(counts) - fitted) ** 2))
    ss_tot = float(np.sum((np.log(counts) - np.mean(np.log(counts))) ** 2))
    return {"m1": float(coef[0]), "m2": float(coef[1]),
            "exponent": exponent,
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
            "n_points": len(energies)}


def bracketing_scale(energy: float, p1: float, c0: float = TEMPLE_C0) -> int:
    """Fundamental-domain size exponent used by the tail upper bound:
    floor of log5(c0 p1 / (16 E)).  Diagnostic helper."""
    if energy <= 0 or not 0 < p1 <= 1:
        raise ValidationError("need energy > 0 and p1 in (0, 1]")
    return math.floor(math.log(c0 * p1 / (16.0 * energy), 5.0))


def bracketing_scale_upper(energy: float, c1: float = 40.0) -> int:
    """Ceiling counterpart used by the tail lower bound:
    ceil of log5(2 c1 / E)."""
    if energy <= 0 or c1 <= 0:
        raise ValidationError("need energy > 0 and c1 > 0")
    return math.ceil(math.log(2.0 * c1 / energy, 5.0))
