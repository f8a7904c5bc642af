"""Benchmark fixing reproduction and panel-submission surveillance."""

from ._ratefix import (
    AnomalyReport,
    Dendrogram,
    FixingConfig,
    FixingResult,
    GeneratedPanel,
    IsolationScore,
    PanelWindow,
    RatefixError,
    ScenarioConfig,
    Submission,
    WindowPolicy,
    agglomerate,
    annual_windows,
    average_daily_rates,
    build_window,
    collusion_caveat,
    compute_fixing,
    cut,
    distance_matrix,
    euclidean_distance,
    fixing_series,
    flag_anomalies,
    generate,
    influence_envelope,
    isolation_scores,
    read_submissions_csv,
    single_bank_impact,
    write_submissions_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
