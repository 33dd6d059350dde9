"""Unitary evolution through piecewise-constant control sequences."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractError, DomainError
from .pair import PairBasis, build_hamiltonian, dipole_coupling, forster_defect

NORM_TOL = 1e-6
DEFAULT_OMEGA = 1.0
DEFAULT_F_PREP = 64.0
DEFAULT_RISETIME = 0.010


def basis_state(label):
    psi = np.zeros(4, dtype=np.complex128)
    psi[PairBasis(label)] = 1.0
    return psi


@dataclass(frozen=True)
class PulseSegment:
    omega: float
    delta: float
    field: float
    duration: float

    def __post_init__(self):
        if not self.duration >= 0:
            raise DomainError(f"segment duration must be >= 0, got {self.duration}")
        if not self.omega >= 0:
            raise DomainError(f"segment omega must be >= 0, got {self.omega}")
        if not self.field >= 0:
            raise DomainError(f"segment field must be >= 0, got {self.field}")


@dataclass
class Sequence:
    segments: list = field(default_factory=list)

    def __post_init__(self):
        self.segments = list(self.segments)
        if not self.segments:
            raise ContractError("a sequence needs at least one segment")
        if not math.isfinite(self.duration):
            raise ContractError("sequence duration is not finite")

    @property
    def duration(self):
        return sum(s.duration for s in self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


def _check_normalized(state):
    state = np.asarray(state, dtype=np.complex128)
    if state.shape != (4,):
        raise ContractError(f"state must have 4 amplitudes, got shape {state.shape}")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"state is not normalized (norm={norm:.9g})")
    return state


def propagate_segment(state, seg, r, params):
    """Apply exp(-2 pi i H t) for one segment, via exact eigendecomposition."""
    state = _check_normalized(state)
    if seg.duration == 0:
        return state.copy()
    h = build_hamiltonian(seg.delta, seg.omega, seg.field, r, params)
    return kernels.evolve(h[None], np.array([seg.duration]), state[None])[0]


def run_sequence(seq, r, params, initial):
    """Left-fold of :func:`propagate_segment`; returns (final, trajectory)."""
    if not isinstance(seq, Sequence):
        seq = Sequence(seq)
    state = _check_normalized(initial)
    trajectory = []
    for seg in seq:
        state = propagate_segment(state, seg, r, params)
        trajectory.append(state)
    return state, trajectory


def pi_pulse_duration(omega):
    """Single-atom pi time 1/(2 omega) in us for omega in MHz."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    return 1.0 / (2.0 * omega)


def ramp_segments(f_from, f_to, risetime, omega=0.0, delta=0.0, steps=10):
    """Staircase approximation of a linear field ramp lasting ``risetime``."""
    if risetime <= 0:
        return []
    dt = risetime / steps
    # field sampled at the midpoint of each step
    return [PulseSegment(omega, delta, f_from + (f_to - f_from) * (k + 0.5) / steps, dt)
            for k in range(steps)]


def pump_probe_sequence(T, params, omega=DEFAULT_OMEGA, f_prep=DEFAULT_F_PREP,
                        delta=0.0, f_int=None, risetime=0.0):
    """Pi pulse at f_prep, free evolution at the resonance field, pi pulse."""
    if not T >= 0:
        raise DomainError(f"interaction time must be >= 0, got {T}")
    f_int = params.f_res if f_int is None else f_int
    t_pi = pi_pulse_duration(omega)
    segs = [PulseSegment(omega, delta, f_prep, t_pi)]
    segs += ramp_segments(f_prep, f_int, risetime, delta=delta)
    segs.append(PulseSegment(0.0, delta, f_int, T))
    segs += ramp_segments(f_int, f_prep, risetime, delta=delta)
    segs.append(PulseSegment(omega, delta, f_prep, t_pi))
    return Sequence(segs)


def pump_probe_pgg(T, r, params, omega=DEFAULT_OMEGA, f_prep=DEFAULT_F_PREP,
                   delta=0.0, f_int=None, risetime=0.0):
    """Probability of returning to |gg> after the excite / interact / deexcite protocol.

    With ``risetime`` > 0 the field switches are linear ramps, each inserted
    around the free-evolution window; otherwise switches are instantaneous.
    """
    if not T >= 0:
        raise DomainError(f"interaction time must be >= 0, got {T}")
    f_int = params.f_res if f_int is None else f_int
    forster_defect(f_int, params)
    forster_defect(f_prep, params)
    dipole_coupling(r, params)
    if risetime > 0:
        seq = pump_probe_sequence(T, params, omega, f_prep, delta, f_int, risetime)
        final, _ = run_sequence(seq, r, params, basis_state(PairBasis.GG))
        return float(abs(final[PairBasis.GG]) ** 2)
    t_pi = pi_pulse_duration(omega)
    return float(kernels.pump_probe(r, f_int, T, omega, delta, f_prep, t_pi,
                                    *params.kernel_args())[0])


def spectrum_point(delta, f, r, params, omega=DEFAULT_OMEGA):
    """(P_gg, P_gr + P_rg, P_rr) after one pi-duration pulse from |gg>."""
    forster_defect(f, params)
    dipole_coupling(r, params)
    t = pi_pulse_duration(omega) if omega > 0 else 0.0
    p = kernels.excitation(delta, f, r, omega, t, *params.kernel_args())[0]
    return float(p[0]), float(p[1]), float(p[2])


def spectrum_scan(deltas, f, r, params, omega=DEFAULT_OMEGA):
    """Vectorized :func:`spectrum_point` over a detuning grid; shape (n, 3)."""
    forster_defect(f, params)
    dipole_coupling(r, params)
    t = pi_pulse_duration(omega) if omega > 0 else 0.0
    return kernels.excitation(np.asarray(deltas, dtype=float), f, r, omega, t,
                              *params.kernel_args())
