"""Shot-to-shot fluctuations and projective-measurement sampling.

Randomness is counter-based: every work unit (one interaction time, one
spectral point) owns a Philox stream keyed by ``(seed, *key, unit_index)``.
Units can therefore be evaluated in any order, on any number of threads,
and still reproduce the same numbers.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import DEFAULT_F_PREP, DEFAULT_OMEGA, pi_pulse_duration
from .errors import DomainError
from .pair import dipole_coupling, forster_defect

R_FLOOR_UM = 1.0
_MAX_REDRAWS = 1000

# stream-key namespaces, so distinct campaigns never share random numbers
KEY_TRACE = 1
KEY_SPECTRUM = 2
KEY_SHOT = 3


@dataclass(frozen=True)
class NoiseModel:
    sigma_r: float = 0.2
    sigma_f: float = 1.0
    shots: int = 100

    def __post_init__(self):
        if not self.sigma_r >= 0:
            raise DomainError(f"sigma_r must be >= 0, got {self.sigma_r}")
        if not self.sigma_f >= 0:
            raise DomainError(f"sigma_f must be >= 0, got {self.sigma_f}")
        if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
            raise DomainError(f"shots must be a positive integer, got {self.shots}")
        object.__setattr__(self, "shots", int(self.shots))

    @property
    def is_silent(self):
        return self.sigma_r == 0 and self.sigma_f == 0


def stream(seed, *key):
    """Independent generator for the work unit identified by ``key``."""
    if seed < 0 or seed >= 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def shot_stream(seed, index):
    return stream(seed, KEY_SHOT, index)


def _truncated_normal(rng, mean, sigma, n, lower, inclusive):
    x = rng.normal(mean, sigma, n) if sigma > 0 else np.full(n, float(mean))
    bad = (x < lower) if inclusive else (x <= lower)
    redrawn = int(bad.sum())
    for _ in range(_MAX_REDRAWS):
        if not bad.any():
            break
        x[bad] = rng.normal(mean, sigma, int(bad.sum()))
        bad = (x < lower) if inclusive else (x <= lower)
        redrawn += int(bad.sum())
    else:
        x[bad] = lower if inclusive else np.nextafter(lower, np.inf)
    return x, redrawn


def sample_shots(nominal, noise, rng, n=None):
    """Draw ``n`` (default ``noise.shots``) quasi-static (r', f') pairs.

    Returns ``(r, f, truncated)`` where ``truncated`` counts redraws caused by
    r' <= 1 um or f' < 0.
    """
    r0, f0 = nominal
    n = noise.shots if n is None else n
    r, tr = _truncated_normal(rng, r0, noise.sigma_r, n, R_FLOOR_UM, inclusive=False)
    f, tf = _truncated_normal(rng, f0, noise.sigma_f, n, 0.0, inclusive=True)
    return r, f, tr + tf


def sample_shot(nominal, noise, rng):
    """Single-shot version of :func:`sample_shots`."""
    r, f, _ = sample_shots(nominal, noise, rng, 1)
    return float(r[0]), float(f[0])


def sample_counts(probabilities, n, rng):
    """Multinomial outcome counts (n_gg, n_one_r, n_rr)."""
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (3,) or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DomainError(f"invalid 3-category distribution {probabilities}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
    if int(n) != n or n < 0:
        raise DomainError(f"shot count must be a non-negative integer, got {n}")
    counts = rng.multinomial(int(n), p / p.sum())
    return tuple(int(c) for c in counts)


@dataclass
class Trace:
    t: np.ndarray
    p_gg: np.ndarray
    stderr: np.ndarray
    truncated: int = 0


def _map_units(func, n_units, workers):
    if workers is None or workers <= 1 or n_units <= 1:
        return [func(i) for i in range(n_units)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so aggregation is index-ordered
        return list(pool.map(func, range(n_units)))


def _shot_mean(values):
    n = values.shape[0]
    mean = float(np.mean(values))
    err = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, err


def monte_carlo_trace(t_grid, r, params, omega=DEFAULT_OMEGA, noise=None, seed=0,
                      f_int=None, f_prep=DEFAULT_F_PREP, delta=0.0,
                      finite_statistics=False, workers=1, key=()):
    """Shot-averaged pump-probe P_gg on ``t_grid``.

    Each interaction time gets ``noise.shots`` fresh (r', f') draws; f' is the
    field during free evolution, the pi pulses stay at ``f_prep``. With
    ``finite_statistics`` every shot is reduced to one 0/1 outcome.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise DomainError("t_grid must be a non-empty 1-D sequence")
    if np.any(t_grid < 0) or not np.all(np.isfinite(t_grid)):
        raise DomainError("interaction times must be finite and >= 0")
    noise = NoiseModel(0.0, 0.0, 1) if noise is None else noise
    f_int = params.f_res if f_int is None else f_int
    forster_defect(f_int, params)
    forster_defect(f_prep, params)
    dipole_coupling(r, params)
    t_pi = pi_pulse_duration(omega)
    args = params.kernel_args()

    def unit(i):
        rng = stream(seed, KEY_TRACE, *key, i)
        rs, fs, trunc = sample_shots((r, f_int), noise, rng)
        p = kernels.pump_probe(rs, fs, np.full(rs.shape, t_grid[i]), omega, delta,
                               f_prep, t_pi, *args)
        if finite_statistics:
            p = (rng.random(p.shape[0]) < p).astype(float)
        mean, err = _shot_mean(p)
        return mean, err, trunc

    results = _map_units(unit, t_grid.size, workers)
    mean = np.array([res[0] for res in results])
    err = np.array([res[1] for res in results])
    return Trace(t_grid, mean, err, sum(res[2] for res in results))


def monte_carlo_spectrum(deltas, fields, r, params, omega=DEFAULT_OMEGA, noise=None,
                         seed=0, finite_statistics=False, workers=1, key=()):
    """Shot-averaged (P_gg, P_1r, P_rr) at the points ``zip(deltas, fields)``.

    Returns ``(mean, stderr)`` arrays of shape (n, 3). The field noise acts on
    the spectroscopy field itself.
    """
    deltas, fields = np.broadcast_arrays(np.atleast_1d(np.asarray(deltas, float)),
                                         np.atleast_1d(np.asarray(fields, float)))
    noise = NoiseModel(0.0, 0.0, 1) if noise is None else noise
    forster_defect(fields, params)
    dipole_coupling(r, params)
    t_pi = pi_pulse_duration(omega)
    args = params.kernel_args()

    def unit(i):
        rng = stream(seed, KEY_SPECTRUM, *key, i)
        rs, fs, trunc = sample_shots((r, fields[i]), noise, rng)
        p = kernels.excitation(np.full(rs.shape, deltas[i]), fs, rs, omega, t_pi, *args)
        if finite_statistics:
            # one projective outcome per shot: categorical draw over 3 classes
            u = rng.random(p.shape[0])[:, None]
            cum = np.cumsum(p, axis=1)
            cls = np.minimum((u > cum).sum(axis=1), 2)
            p = np.eye(3)[cls]
        n = p.shape[0]
        mean = p.mean(axis=0)
        err = p.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(3)
        return mean, err, trunc

    results = _map_units(unit, deltas.size, workers)
    mean = np.array([res[0] for res in results])
    err = np.array([res[1] for res in results])
    return mean, err
