"""Policy priority inference.

Spillover-network estimation, the adaptive resource-allocation game,
corruption-matching calibration and the coherence-of-priorities index,
backed by the C++ core in ``ppi._core``.
"""

from ._core import (
    CalibrationResult,
    CoherenceResult,
    CountryGroups,
    CountryMeta,
    IndicatorInfo,
    IndicatorPanel,
    PpiError,
    SimulationConfig,
    SimulationTrace,
    SpilloverNetwork,
    allocative_inefficiencies,
    classify_groups,
    coherence_index,
    coherence_with_significance,
    config_for_country,
    consistent_profile,
    distance,
    empirical_corruption,
    estimate_network,
    expected_profile,
    first_differences,
    fit_gamma,
    generate_synthetic_panel,
    governance_map,
    inconsistent_profile,
    indicator_similarity,
    load_panel,
    load_panel_json,
    orient_edge,
    retrospective_profile,
    run_simulation,
    save_panel,
    simulated_corruption,
    similarity_matrix,
    tmfg_filter,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
