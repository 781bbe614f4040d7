"""rdimlab: rate distortion functions, dimensions, and metric mean dimension
for shift systems over finite metric alphabets."""

from .alphabets import ClusterAlphabet, GapSchedule, GappedAlphabet, ScheduleError
from .certificates import (GAPPED_SERIES_CONSTANT, FeasibilityReport,
                           InfeasibleCertificateError, LowerBoundCertificate,
                           UnverifiedCertificateError, certificate_envelope,
                           certified_lower_bound, check_feasibility,
                           cluster_shift_certificate, gapped_shift_certificate,
                           grid_shift_certificate, mixture_certified_lower)
from .constructions import (ClusterMixtureParams, DiscontinuityDemo,
                            build_cluster_shift, build_gapped_shift,
                            build_interleaved_pair, build_periodic_discontinuity_demo,
                            cluster_mixture, cluster_mixture_certificates,
                            cluster_mixture_report, desk_gap_schedule,
                            desk_interleaved_base, gapped_certificates,
                            glued_cluster_mixture, interleaved_experiment)
from .dimension import (CoveringInexactError, DimensionReport, ScaleEntropy,
                        TailEstimate, covering_bounds, covering_number,
                        dimension_report, entropy_at_scale, full_shift_window_count,
                        metric_mean_dim_upper, rdim_estimates, separation_number)
from .information import (InfeasibleWitnessError, binary_entropy,
                          conditional_mutual_information, entropy_bits,
                          markov_chain_gaps, mutual_information,
                          sample_markov_triple, shannon_entropy,
                          variational_mi_lower_bound)
from .metricspace import (Distribution, FiniteMetricSpace, InvalidDistributionError,
                          InvalidMetricError, JointDistribution, discrete_space,
                          grid_space, joint_from_channel, load_space_json, new_space,
                          wasserstein, wasserstein_exhaustive)
from .mixture import (Allocation, MeasureMixture, MixtureCheckReport,
                      NonConvexCurveError, PiecewiseLinearCurve, allocate,
                      allocate_exhaustive, component_curves,
                      decomposition_experiment, mixture_formula_check)
from .ratedistortion import (BAConvergenceError, BlockCapError, BlockSource,
                             CurveSample, IIDModel, MarkovModel, MixtureModel,
                             PeriodicModel, RDCurve, ShiftSystem, attach_certificates,
                             blahut_arimoto_slope, build_block_source, r_window,
                             rate_at_distortion, rd_curve, sample_curve_by_slope)

__version__ = "0.1.0"
