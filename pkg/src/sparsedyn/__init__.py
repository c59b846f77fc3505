"""Sparse regime identification and reduced-order reconstruction for the
cubic-quintic Ginzburg-Landau equation."""

from .classify import BlockProjection, Classification, classify, project_onto_block
from .config import ExperimentConfig, default_config, load_config, write_config
from .errors import (AllZero, ConfigError, DegenerateData, DimensionMismatch, DuplicateRegime,
                     DuplicateSensor, EigenFailure, FormatError, NonFiniteField, OutOfDomain,
                     OutOfRange, SparseDynError)
from .harness import (SwitchingReport, TrialStats, build_all, emit_report, run_monte_carlo,
                      run_switching_experiment, simulate_reference)
from .library import ModalLibrary, build_library, load_library, save_library
from .pde import (REGIMES, BetaSchedule, CqgleParams, FieldState, GridSpec, initial_condition,
                  linear_symbol, nonlinear_term, simulate, simulate_schedule, step_etdrk4)
from .pod import PodBasis, SnapshotMatrix, method_of_snapshots, pod_basis, truncation_rank
from .rom import (CoefficientTrajectory, GalerkinModel, build_galerkin, integrate_rom,
                  reconstruct_field, rom_rhs)
from .sensing import (Measurement, SensorSet, compressed_dictionary, measure,
                      place_sensors)
from .sparse import (SparseSolution, soft_threshold_complex, solve_l1, solve_l1_continuation,
                     solve_least_squares, solve_omp)

__version__ = "0.1.0"
