"""Functional data classification: k-NN, depth, PLS, RKHS and plug-in Bayes rules.

Curves are stored as their values on a shared grid of nodes.  The classifiers
follow the scikit-learn estimator API (``fit`` / ``predict`` /
``get_params``); the functional helpers in each submodule expose the same
rules without the estimator wrapper.
"""

from .bayes import (
    EqualCovPair,
    EqualMeansPair,
    GeneralPair,
    PluginBayesClassifier,
    PluginClassifier,
    bayes_classify,
    eta,
    grid_density_log_ratio,
    log_rn_equal_cov,
    log_rn_equal_means,
    log_rn_general,
    rn_equal_cov,
    rn_equal_means,
    rn_general,
)
from .bench import RunConfig, SummaryStats, monte_carlo, run_replication
from .core import (
    Grid,
    LabeledSample,
    MetricKind,
    SplineSmoother,
    l2_distance,
    pairwise_distance_percentile,
    smooth_spline,
    sup_distance,
)
from .depth import HModeDepthClassifier, RPDepthClassifier, depth_classify, hmode_depth, rp_depth
from .exceptions import FDAError
from .gp import (
    GPModel,
    TriangularCovariance,
    brownian_model,
    covariance_matrix,
    model1_population,
    model2_sample,
    ou_model,
    sample_gaussian_paths,
)
from .io import load_csv, save_csv
from .neighbors import KNeighborsCurveClassifier, MovingWindowClassifier, knn_classify, knn_eta, mwr_classify
from .project import PLSDAClassifier, RKHSClassifier, pls_classify, pls_fit, rkhs_classify, rkhs_fit
from .selection import loo_cv_select

__version__ = "0.1.0"
