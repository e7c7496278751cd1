"""Numerical laboratory for reaction-diffusion fronts in time-varying
environments: least-mean calculus, exponential barrier pairs, front
construction by remote starts, spreading experiments, and random
stationary environments, tied together by a reproducible run harness.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConstructionError, DomainError,
                     KppLabError, MeasurementError, NumericalError,
                     RejectionError)
from .signals import (Affine, BlockRandom, Constant, Corrector,
                      LeastMeanReport, PiecewiseConstant, Shifted, Sinusoid,
                      TimeSignal, build_corrector, least_mean,
                      no_uniform_mean_signal)
from .reactions import (CubicPerturbed, ExactWaveFamily, KppCertificate,
                        Logistic, PulledReaction, Reaction, TableReaction,
                        build_pulled_reaction, exact_wave_oracle,
                        homogeneous_wave_profile, load_tabulated_reaction,
                        validate_kpp)
from .barriers import (BarrierPair, BumpProfile, CompactSubsolution,
                       MovingExponentialSupersolution, SpeedLaw,
                       build_barriers, build_bump,
                       build_compact_subsolution, build_speed,
                       halton_triples)
from .solver import (ComparisonReport, Grid1D, StabilityCertificate,
                     Trajectory, comparison_check, solve_cauchy,
                     solve_profile_frame)
from .waves import (WaveBundle, WaveDiagnostics, construct_wave,
                    front_decay_rate, wave_diagnostics)
from .spreading import (FrontTrace, OverlayReport, SpreadingReport,
                        empirical_speed_least_mean, plateau_datum,
                        spreading_experiment, track_front)
from .randomenv import (ConcentrationReport, CovarianceReport,
                        RandomEnvironmentModel, least_mean_concentration,
                        shift_covariance_check)
from .harness import (RunConfig, RunManifest, parse_config,
                      reaction_from_config, run, signal_from_config)
