"""Two Rydberg atoms at a Stark-tuned Forster resonance: simulation and fitting."""

__version__ = "0.1.0"

from .errors import (ConfigError, ContractError, DataError, DomainError,  # noqa: E402
                     ForsterError, NoOscillationError, RegimeError,
                     ResonanceNotFoundError, SingularityError)
from .pair import (Geometry, PairBasis, PhysicalParams, build_hamiltonian,  # noqa: E402
                   dipole_coupling, find_resonance_field, forster_defect,
                   pair_eigensplitting, vdw_shift)
from .dynamics import (PulseSegment, Sequence, basis_state, pi_pulse_duration,  # noqa: E402
                       propagate_segment, pump_probe_pgg, run_sequence, spectrum_point)
from .stochastic import (NoiseModel, monte_carlo_trace, sample_counts,  # noqa: E402
                         sample_shot)
from .analysis import (DataSeries, FitResult, fit_damped_sine,  # noqa: E402
                       fit_double_gaussian, fit_power_law, nlls_fit)
from .experiments import (ScanSpec, blockade_report, oscillation_vs_distance,  # noqa: E402
                          spectroscopy_map, splitting_vs_distance)
