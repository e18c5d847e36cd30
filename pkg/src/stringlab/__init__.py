"""Numerical laboratory for the 1+1d relativistic string.

Pointwise null-frame geometry, admissible initial-data families, a 4th-order
method-of-lines evolver with blow-up detection, weighted energy/flux
diagnostics, discrete verification of the geometric identities behind the
energy method, and a deterministic experiment CLI (`stringlab`).
"""

from .config import ExperimentConfig, parse_config, serialize_config
from .energy import (DerivativeTower, EnergyReport, EnergyTracker, build_tower,
                     fit_hierarchy, monitor, order_energy, row_energy,
                     stress_contraction, stress_density)
from .errors import (BlowupDetected, HyperbolicityLoss, InsufficientHistory,
                     NonIntegrable, ParseError, StringLabError, TimelikeViolation,
                     ValidationError)
from .evolve import (CharPath, FieldState, Grid1D, RunResult, exact_travelling,
                     exact_travelling_fields, init_state, rhs, run_evolution, step,
                     trace_characteristics)
from .initialdata import (CriterionReport, DataFamily, TraceTable, blowup_fixture,
                          build_data, check_kong_tsuji, criterion_for_family,
                          data_eigenvalues, higher_order_traces)
from .nullgeom import (MetricScalars, MultiplierCoeffs, NullGradientPair, NullPoint,
                       causal_norm, eigenvalues, metric_scalars, multiplier,
                       null_coords, null_gradient, weight_a, weight_a_prime)
from .profiles import ProfileSpec, profile_antiderivative, profile_derivative, weighted_norm

__version__ = "0.1.0"
