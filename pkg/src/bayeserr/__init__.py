"""Estimation-error distributions and small-noise limits for additive-noise
Bayesian estimation.

The observation model is Y = X + sigma * Z with X independent of Z and the
conditional mean as the estimator.  The package computes the posterior mean
and variance, the functional inverse of the estimator map, the exact density
of the estimation error W = X - E[X|Y], the normalized-error scaling, and
verifies the pointwise small-noise limits of W/sigma against a seeded
Monte-Carlo oracle.
"""

from .convergence import (DecompositionReport, DoobRecord, SweepReport,
                          decomposition_check, decomposition_paths,
                          default_sigma_grid, deviation_envelope,
                          doob_registry_lookup, envelope_tail_nonincreasing,
                          load_calibration, mmse_dimension_estimate,
                          mmse_dimension_mc, pathwise_sweep, sweep_paths,
                          table1_prediction)
from .distributions import (ContinuousPrior, DiscretePrior, MixturePrior,
                            NoiseFlags, NoiseSpec, RealizationPath, beta_prior,
                            binary_prior, check_strict_log_concavity,
                            discrete_prior, draw_path, draw_paths,
                            gaussian_noise, gaussian_prior, laplace_noise,
                            make_noise, mixture_components_disjoint,
                            mixture_prior, moments, noise_registry,
                            point_mass, polynomial_tail_bound, sample,
                            student_t_noise, uniform_noise, uniform_prior)
from .error_density import (ErrorDensity, binary_error_density,
                            closed_form_binary, closed_form_binary_symmetric,
                            closed_form_gaussian_gaussian, emit_density_curve,
                            error_pdf_gaussian_specialized, error_pdf_general,
                            error_pdf_mmse, gaussian_gaussian_error_density,
                            gaussian_specialized_error_density,
                            general_error_density, mmse_error_density,
                            normalized_error_pdf)
from .errors import (ConfigError, DivergentMomentError, EstimationModelError,
                     InvalidSpecError, NonInvertibleError, OutOfRangeError,
                     SlopeUnderflowError, UnreachableInputError,
                     UnsupportedModeError)
from .inversion import (InverseMap, build_inverse, curve_from_function,
                        inverse_derivative, inverse_derivative_via_variance,
                        invert, range_of)
from .mc_oracle import EmpiricalDistribution, ks_distance, simulate_errors
from .posterior import (CurveInterpolator, PosteriorBatch, PosteriorCurve,
                        build_curve, posterior_eval_batch, posterior_mean,
                        posterior_mean_quad_naive, posterior_mean_z,
                        posterior_variance)

__version__ = "0.1.0"
