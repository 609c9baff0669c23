"""Desk-scale machinery for slow-training lower bounds of shallow networks.

Subpackages by concern: torus geometry, fooling-function construction,
ball-average quadrature operators, exact sequence arithmetic, adversarial
targets, mean-field particle flow, and the experiment harness.
"""

from .geometry import (ProjectedBall, in_projected_ball,
                       nearest_torus_distances, sample_projected_ball,
                       sample_uniform_ball, torus_distance, unit_ball_volume)
from .fooling import (FoolingFunction, FoolingSpec, eval_fooling, h_cut,
                      k_const, k_theta, tau, verify_cr_norm, verify_integral,
                      verify_vanishing)
from .quadrature import (GapCertificate, QuadratureRule, apply_A, apply_An,
                         barron_ball_sampler, representativeness,
                         select_points, shift_average_check, worst_case_gap_cr)
from .sequences import (RateConstants, SuperExpSeq, default_seq, m_of,
                        time_scales_global, time_scales_local, verify_superexp)
from .adversary import (AdversarialTarget, GapLowerBound, build_witness,
                        choose_sign, gap_lower_bound, partial_target,
                        verify_gap)
from .meanfield import (Activation, ParticleMeasure, RiskSpec, Trajectory,
                        barron_bound, barron_direct, check_second_moment_growth,
                        empirical_rademacher, flow_integrate, forward,
                        lipschitz_bound, local_lipschitz_measure,
                        rademacher_bound, relu, risk, second_moment, square,
                        tanh_act)
from .harness import (ExperimentConfig, RateFit, barron_growth_check,
                      emit_plots, fit_rate, floor_exponent, run)

__version__ = "0.1.0"
