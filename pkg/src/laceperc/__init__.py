"""Site-percolation threshold expansion toolkit.

Exact rational series for the critical-density expansion in inverse degree,
combinatorial counting oracles on Z^d, and reproducible Monte Carlo
estimators for connection probabilities and expansion coefficients.
"""

from .errors import DomainError, ResourceBudgetError
from .lattice import TorusGeometry, ball, l1_norm, linf_norm, neighbors, origin
from .series import (
    BOND_PC_IN_SIGMA,
    SITE_PC_IN_SIGMA,
    TruncatedSeries,
    expansion,
    substitute_2d_to_sigma,
    substitute_sigma_to_2d,
)
from .enumeration import (
    class_count,
    double_connection_polynomial,
    enumerate_cycles,
    pi0_small_p_polynomial,
    polynomial_in_omega,
    union_occupation_probability,
    walk_count_single,
    walk_counts,
)
from .percolation import (
    Configuration,
    Estimate,
    TriangleDiagrams,
    chemical_distance,
    connected,
    critical_point,
    double_connected,
    double_connection,
    sample_configuration,
    theta_proxy,
    triangle_diagrams,
    two_point,
)
from .lace import (
    OzeResidual,
    eprime,
    modified_cluster,
    oze_residual,
    pi0_short_cycle_estimate,
    pi_hat_estimate,
    pivotal_points,
    susceptibility,
    thicken,
    through_connection,
)

__version__ = "0.1.0"

__all__ = [
    "BOND_PC_IN_SIGMA",
    "Configuration",
    "DomainError",
    "Estimate",
    "OzeResidual",
    "ResourceBudgetError",
    "SITE_PC_IN_SIGMA",
    "TorusGeometry",
    "TriangleDiagrams",
    "TruncatedSeries",
    "ball",
    "chemical_distance",
    "class_count",
    "connected",
    "critical_point",
    "double_connected",
    "double_connection",
    "double_connection_polynomial",
    "enumerate_cycles",
    "eprime",
    "expansion",
    "l1_norm",
    "linf_norm",
    "modified_cluster",
    "neighbors",
    "origin",
    "oze_residual",
    "pi0_short_cycle_estimate",
    "pi0_small_p_polynomial",
    "pi_hat_estimate",
    "pivotal_points",
    "polynomial_in_omega",
    "sample_configuration",
    "substitute_2d_to_sigma",
    "substitute_sigma_to_2d",
    "susceptibility",
    "theta_proxy",
    "thicken",
    "through_connection",
    "triangle_diagrams",
    "two_point",
    "union_occupation_probability",
    "walk_count_single",
    "walk_counts",
]
