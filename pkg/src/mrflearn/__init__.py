"""Structure and parameter learning for discrete pairwise graphical models.

Binary models are fit with l1-constrained logistic regressions (one per
node), general-alphabet models with l2,1-constrained regressions (one per
node and ordered symbol pair); both solve their programs with geometry-aware
mirror descent and threshold the estimated weights at half the minimum edge
weight. The package also ships exact/Gibbs samplers, an online
multiplicative-weights baseline, an incoherence diagnostic, and a
reproducible experiment harness.
"""

from .models import (IsingModel, ModelBounds, NoEdgesError, PairwiseModel,
                     center_weight_matrix, ising_to_pairwise, ising_width,
                     load_model, min_edge_weight, model_bounds, model_digest,
                     model_from_dict, model_to_dict, pairwise_width,
                     save_model, unbiasedness_bound, width)
from .sampling import (SampleSet, StateSpaceError, UnbiasednessError,
                       as_symbols, check_delta_unbiased,
                       conditional_distribution, exact_distribution,
                       load_samples, min_site_conditional,
                       pair_conditional_probability, sample_exact,
                       sample_gibbs, save_samples)
from .logreg import (NonFiniteError, ReferenceSolveError, RegressionProblem,
                     SolveReport, UnsupportedDimensionError, logistic_gradient,
                     logistic_loss, mirror_descent_l1, mirror_descent_l21,
                     project_l1_ball, project_l21_ball, reference_minimizer)
from .learning import (EmptyPairError, LearnConfig, LearnResult,
                       center_regression_solution, default_iteration_count,
                       learn_ising, learn_pairwise, threshold_graph,
                       transform_pair_samples)
from .sparsitron import (InsufficientSamplesError, SparsitronConfig,
                         sparsitron_learn, sparsitron_learn_pairwise)
from .experiments import (ExperimentConfig, ExperimentResult, build_diamond,
                          build_grid, build_random, emit_plot_data,
                          incoherence, run_recovery_experiment)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
