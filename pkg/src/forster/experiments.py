"""Measurement campaigns: Stark map, spectroscopy map, distance scans, blockade report."""
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import DataSeries, fit_damped_sine, fit_double_gaussian, fit_power_law
from .dynamics import DEFAULT_F_PREP, DEFAULT_OMEGA
from .errors import DataError, DomainError, RegimeError
from .pair import (R_MAX_UM, R_MIN_UM, dipole_coupling, forster_defect,
                   pair_eigensplitting, vdw_shift)
from .stochastic import NoiseModel, monte_carlo_spectrum, monte_carlo_trace


def grid(start, stop, step):
    """Inclusive evenly spaced grid; the count is rounded so stop is hit exactly."""
    if step <= 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if stop < start:
        raise DomainError(f"grid stop {stop} is below start {start}")
    n = int(round((stop - start) / step)) + 1
    return np.linspace(start, start + (n - 1) * step, n)


@dataclass
class ScanSpec:
    deltas: np.ndarray = field(default_factory=lambda: grid(-20.0, 20.0, 0.5))
    fields: np.ndarray = field(default_factory=lambda: grid(0.0, 60.0, 2.0))
    times: np.ndarray = field(default_factory=lambda: grid(0.0, 0.6, 0.005))
    r_list: np.ndarray = field(default_factory=lambda: np.array([8.1, 9.0, 10.0, 12.0, 15.0]))
    noisy: bool = False
    noise: NoiseModel = field(default_factory=NoiseModel)
    finite_statistics: bool = True
    seed: int = 0
    omega: float = DEFAULT_OMEGA
    f_prep: float = DEFAULT_F_PREP
    workers: int = 1

    def __post_init__(self):
        for name in ("deltas", "fields", "times", "r_list"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if arr.size == 0 or not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} grid must be non-empty and finite")
            setattr(self, name, arr)
        if np.any(self.fields < 0):
            raise DomainError("field grid must be non-negative")
        if np.any(self.times < 0):
            raise DomainError("time grid must be non-negative")
        if np.any((self.r_list < R_MIN_UM) | (self.r_list > R_MAX_UM)):
            raise DomainError(f"distances must lie in [{R_MIN_UM}, {R_MAX_UM}] um")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")

    @property
    def active_noise(self):
        return self.noise if self.noisy else None


@dataclass
class CampaignResult:
    name: str
    raw: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    excluded: list = field(default_factory=list)
    manifest: str = None


def stark_map(fields, r, params):
    """Defect, dressed energies, splitting and mixing angle versus field."""
    rows = []
    for f in np.asarray(fields, dtype=float):
        es = pair_eigensplitting(f, r, params)
        rows.append((f, forster_defect(f, params), es.eigenvalues[0],
                     es.eigenvalues[1], es.splitting, es.mixing_angle))
    return np.array(rows)


def spectrum(spec, f, r, params, key=()):
    """(P_gg, P_1r, P_rr) over ``spec.deltas`` at field ``f``; shape (n, 3)."""
    mean, _ = monte_carlo_spectrum(spec.deltas, f, r, params, spec.omega,
                                   spec.active_noise, spec.seed,
                                   spec.noisy and spec.finite_statistics,
                                   spec.workers, key)
    return mean


def spectroscopy_map(spec, r, params):
    """P_rr on the (field, detuning) grid, shape (len(fields), len(deltas))."""
    ff, dd = np.meshgrid(spec.fields, spec.deltas, indexing="ij")
    mean, _ = monte_carlo_spectrum(dd.ravel(), ff.ravel(), r, params, spec.omega,
                                   spec.active_noise, spec.seed,
                                   spec.noisy and spec.finite_statistics,
                                   spec.workers, key=(0,))
    return mean[:, 2].reshape(ff.shape)


def locate_resonance(spec, r, params, p_rr=None):
    """Field whose double-Gaussian fit has the most symmetric peak centers."""
    p_rr = spectroscopy_map(spec, r, params) if p_rr is None else p_rr
    best, best_f = math.inf, math.nan
    for f, row in zip(spec.fields, p_rr):
        try:
            fit = fit_double_gaussian(DataSeries(spec.deltas, row))
        except DataError:
            continue
        if not fit.resolved:
            continue
        asym = abs(abs(fit.centers[0]) - abs(fit.centers[1]))
        if asym < best:
            best, best_f = asym, f
    return best_f


def trace(spec, r, params, key=(), times=None):
    times = spec.times if times is None else times
    return monte_carlo_trace(times, r, params, spec.omega, spec.active_noise,
                             spec.seed, f_prep=spec.f_prep,
                             finite_statistics=spec.noisy and spec.finite_statistics,
                             workers=spec.workers, key=key)


def splitting_vs_distance(r_list, spec, params):
    """Peak splitting at resonance for each R, then a log-log power law."""
    result = CampaignResult("splitting_vs_distance")
    rs, splits = [], []
    for i, r in enumerate(np.asarray(r_list, dtype=float)):
        row = spectrum(spec, params.f_res, r, params, key=(10, i))[:, 2]
        result.raw[f"spectrum_r{r:g}"] = row
        try:
            fit = fit_double_gaussian(DataSeries(spec.deltas, row))
        except DataError as exc:
            result.excluded.append((float(r), str(exc)))
            continue
        if not fit.resolved:
            result.excluded.append((float(r), "peaks unresolved"))
            continue
        result.fits[f"double_gaussian_r{r:g}"] = fit.fit
        rs.append(float(r))
        splits.append(fit.splitting)
    result.derived["r"] = np.array(rs)
    result.derived["splitting"] = np.array(splits)
    _power_laws(result, rs, splits, "splitting")
    return result


def _power_laws(result, rs, ys, kind):
    pl = fit_power_law(rs, ys, kind=kind)
    fixed = fit_power_law(rs, ys, fix_exponent=-3.0, kind=kind)
    result.fits["power_law"] = pl.fit
    result.fits["power_law_fixed"] = fixed.fit
    result.derived.update(exponent=pl.exponent, exponent_err=pl.exponent_err,
                          prefactor=pl.prefactor, c3=pl.c3, c3_fixed=fixed.c3)


def _times_for(spec, r, params, periods=3.0):
    # the grid must span >= 1.5 oscillation periods; stretch it when it does not
    f_expected = 2.0 * dipole_coupling(r, params)
    span = spec.times[-1] - spec.times[0]
    if span * f_expected >= 1.5:
        return spec.times
    step = float(np.median(np.diff(spec.times))) if spec.times.size > 1 else 0.005
    return grid(spec.times[0], spec.times[0] + periods / f_expected, step)


def oscillation_vs_distance(r_list, spec, params):
    """Pump-probe oscillation frequency for each R, then a log-log power law."""
    result = CampaignResult("oscillation_vs_distance")
    rs, freqs = [], []
    for i, r in enumerate(np.asarray(r_list, dtype=float)):
        times = _times_for(spec, r, params)
        tr = trace(spec, r, params, key=(20, i), times=times)
        result.raw[f"trace_r{r:g}"] = (tr.t, tr.p_gg, tr.stderr)
        try:
            fit = fit_damped_sine(DataSeries(tr.t, tr.p_gg))
        except DataError as exc:
            result.excluded.append((float(r), str(exc)))
            continue
        result.fits[f"damped_sine_r{r:g}"] = fit.fit
        rs.append(float(r))
        freqs.append(fit.frequency)
    result.derived["r"] = np.array(rs)
    result.derived["frequency"] = np.array(freqs)
    _power_laws(result, rs, freqs, "frequency")
    return result


@dataclass(frozen=True)
class BlockadeReport:
    u_off: float
    u_on: float
    enhancement: float
    radius_ratio: float
    r_blockade_on: float
    r_blockade_off: float


def blockade_report(r, f_off, params, omega=DEFAULT_OMEGA):
    """Blockade shift away from and at resonance, and the blockade-radius ratio.

    Off resonance the shift is the exact dd-like level shift; at resonance it
    is half the splitting. Radii solve sqrt(2) C3 / R^3 = omega and
    V(R)^2 / |defect| = omega respectively.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    d_off = forster_defect(f_off, params)
    v = dipole_coupling(r, params)
    if not abs(d_off) > 10.0 * v:
        raise RegimeError(
            f"|defect({f_off})| = {abs(d_off):.4g} MHz is not > 10 V = {10 * v:.4g} MHz; "
            "choose a field further from resonance")
    u_off = abs(vdw_shift(f_off, r, params, mode="exact"))
    u_on = pair_eigensplitting(params.f_res, r, params).splitting / 2.0
    r_on = (math.sqrt(2.0) * params.c3 / omega) ** (1.0 / 3.0)
    r_off = (2.0 * params.c3**2 / (abs(d_off) * omega)) ** (1.0 / 6.0)
    return BlockadeReport(u_off, u_on, u_on / u_off, r_on / r_off, r_on, r_off)
