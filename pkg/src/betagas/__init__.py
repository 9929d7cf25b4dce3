"""betagas: equilibrium measures, escape costs, and log-gas Monte Carlo."""

__version__ = "0.1.0"

from .measure import DiscreteMeasure
from .potential import (CriticalPotentialSpec, Domain, Potential,
                        build_critical_potential, convexity_audit,
                        log_potential_field)
from .equilibrium import (EquilibriumSolution, GridConfig,
                          check_edge_regularity, detect_support, energy,
                          euler_lagrange_residual, solve_equilibrium)
from .ratefn import CriticalityReport, RateFunction, scan_criticality
from .sampler import (ChainConfig, EnsembleState, ObservableRecord,
                      estimate_correlator, log_density, mcmc_sweep, run_chain,
                      run_chain_group, tridiagonal_sample)
from .experiments import (ChainBudget, EscapeTable, ExponentFit,
                          concentration_diagnostic, escape_probability,
                          fit_escape_exponent, laplace_ratio,
                          noncritical_control, phase_transition_report)

__all__ = [
    "DiscreteMeasure", "Domain", "Potential", "CriticalPotentialSpec",
    "build_critical_potential", "convexity_audit", "log_potential_field",
    "EquilibriumSolution", "GridConfig", "energy", "solve_equilibrium",
    "detect_support", "euler_lagrange_residual", "check_edge_regularity",
    "RateFunction", "CriticalityReport", "scan_criticality",
    "ChainConfig", "EnsembleState", "ObservableRecord", "log_density",
    "mcmc_sweep", "run_chain", "run_chain_group", "tridiagonal_sample",
    "estimate_correlator",
    "ChainBudget", "EscapeTable", "ExponentFit", "escape_probability",
    "fit_escape_exponent", "laplace_ratio", "concentration_diagnostic",
    "phase_transition_report", "noncritical_control",
]
