"""Pair-state model: Stark-tuned Forster defect, dipolar coupling, 4-state Hamiltonian.

Units throughout: energies as E/h in MHz, distances in um, fields in mV/cm,
C3 in MHz um^3 (multiply a GHz um^3 figure by 1000).
"""
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonanceNotFoundError, SingularityError
from .kernels import hamiltonians

R_MIN_UM = 5.0
R_MAX_UM = 20.0


class PairBasis(enum.IntEnum):
    """Fixed ordering of the pair basis; values double as matrix indices."""

    GG = 0
    DG_SYM = 1
    DD = 2
    PF_SYM = 3


@dataclass(frozen=True)
class PhysicalParams:
    c3: float = 2540.0
    delta0: float = 8.5
    f_res: float = 32.0
    stark_exponent: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.c3) and self.c3 > 0):
            raise DomainError(f"c3 must be positive, got {self.c3}")
        if not math.isfinite(self.delta0):
            raise DomainError(f"delta0 must be finite, got {self.delta0}")
        if not (math.isfinite(self.f_res) and self.f_res > 0):
            raise DomainError(f"f_res must be positive, got {self.f_res}")
        p = self.stark_exponent
        if isinstance(p, bool) or int(p) != p or p < 2:
            raise DomainError(f"stark_exponent must be an integer >= 2, got {p}")
        object.__setattr__(self, "stark_exponent", int(p))

    def kernel_args(self):
        return (self.c3, self.delta0, self.f_res, self.stark_exponent)


@dataclass(frozen=True)
class Geometry:
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"distance must be positive, got {self.r}")

    @property
    def in_documented_range(self):
        return R_MIN_UM <= self.r <= R_MAX_UM


def forster_defect(f, params):
    """Defect (E_pf - E_dd)/h in MHz at field ``f``: delta0 * (1 - (f/f_res)**p)."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0) or not np.all(np.isfinite(f_arr)):
        raise DomainError(f"field must be finite and non-negative, got {f}")
    out = params.delta0 * (1.0 - (f_arr / params.f_res) ** params.stark_exponent)
    return float(out) if out.ndim == 0 else out


def dipole_coupling(r, params):
    """<dd|V|pf~> = sqrt(2) C3 / r^3 in MHz."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)) or not np.all(np.isfinite(r_arr)):
        raise DomainError(f"distance must be positive, got {r}")
    out = math.sqrt(2.0) * params.c3 / r_arr**3
    return float(out) if out.ndim == 0 else out


def build_hamiltonian(delta, omega, f, r, params):
    """Real symmetric 4x4 matrix (MHz) in basis order ``PairBasis``.

    ``delta`` is the two-atom laser detuning from the bare |dd> line and
    ``omega`` the single-atom Rabi frequency; each ladder link carries the
    collective factor sqrt(2).
    """
    if not omega >= 0:
        raise DomainError(f"omega must be non-negative, got {omega}")
    forster_defect(f, params)
    dipole_coupling(r, params)
    return hamiltonians(delta, omega, f, r, *params.kernel_args())[0]


@dataclass(frozen=True)
class Eigensplitting:
    eigenvalues: tuple
    splitting: float
    mixing_angle: float


def pair_eigensplitting(f, r, params):
    """Diagonalize the {DD, PF_SYM} block at field ``f`` (delta = 0).

    Returns eigenvalues in ascending order, the splitting sqrt(D^2 + 4V^2) and
    the mixing angle theta with tan(2 theta) = 2V/D (pi/4 at resonance).
    """
    d = forster_defect(f, params)
    v = dipole_coupling(r, params)
    half = math.hypot(d / 2.0, v)
    mean = d / 2.0
    theta = 0.5 * math.atan2(2.0 * v, d) if (v or d) else 0.0
    if theta > math.pi / 4:
        # keep theta in [0, pi/4]: the dd-like branch is the one closer to |dd>
        theta = math.pi / 2 - theta
    return Eigensplitting((mean - half, mean + half), 2.0 * half, theta)


def vdw_shift(f, r, params, mode="exact"):
    """Energy shift (MHz) of the dd-like eigenstate relative to bare |dd>.

    ``perturbative`` gives -V^2/D, ``exact`` the two-level eigenvalue
    D/2 - sign(D) sqrt(D^2/4 + V^2).
    """
    d = forster_defect(f, params)
    v = dipole_coupling(r, params)
    if mode == "perturbative":
        if d == 0:
            raise SingularityError(
                "perturbative shift is singular at resonance; use mode='exact'")
        if abs(v) >= abs(d):
            warnings.warn(
                f"|V|={v:.3g} MHz >= |defect|={abs(d):.3g} MHz: "
                "perturbative shift is outside its validity range",
                RuntimeWarning, stacklevel=2)
        return -v * v / d
    if mode == "exact":
        if d == 0:
            # degenerate: the branch is ambiguous, return the lower (-V)
            return -v
        return d / 2.0 - math.copysign(math.sqrt(d * d / 4.0 + v * v), d)
    raise ValueError(f"unknown mode {mode!r}")


def find_resonance_field(params, defect=None, tol=1e-9, max_iter=200):
    """Bisect for the field where the defect vanishes, on [0, 4 f_res].

    ``defect(f)`` defaults to :func:`forster_defect` with ``params``.
    """
    if defect is None:
        def defect(f):
            return forster_defect(f, params)
    lo, hi = 0.0, 4.0 * params.f_res
    d_lo, d_hi = defect(lo), defect(hi)
    if d_lo == 0 and d_hi == 0:
        raise ResonanceNotFoundError("defect vanishes at both ends; no isolated root")
    if d_lo == 0:
        return lo
    if d_hi == 0:
        return hi
    if np.sign(d_lo) == np.sign(d_hi):
        raise ResonanceNotFoundError(
            f"defect does not change sign on [0, {hi}] mV/cm")
    mid = lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        d_mid = defect(mid)
        if abs(d_mid) < tol or mid in (lo, hi):
            break
        if np.sign(d_mid) == np.sign(d_lo):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    return mid
