"""Phase retrieval of real signals in shift-invariant spaces.

Thin wrapper over the C++ core. Signals carry their coefficients as a dict
mapping integer shift tuples to floats; reports and campaign summaries are
plain dicts with the same layout as the JSON written by the ``siv`` tool.
"""

from ._core import (
    Generator,
    PatchSystem,
    PhaseConflictError,
    Region,
    Samples,
    Signal,
    SivError,
    amplitude_error,
    brute_force_separable,
    build_patch_system,
    consecutive_zero_check_1d,
    default_config,
    graph_connected,
    is_nonseparable,
    is_phase_retrievable_frame,
    k_set,
    local_minimize,
    magnitude_gap,
    mapset_reconstruct,
    outer_products_span,
    outer_space_dim,
    overlap_shifts,
    phi_inverse_norm,
    random_signal,
    run_campaign,
    sample,
    shift_box,
    stability_bound,
    sup_distance_up_to_sign,
)

__all__ = [
    "Generator",
    "PatchSystem",
    "PhaseConflictError",
    "Region",
    "Samples",
    "Signal",
    "SivError",
    "amplitude_error",
    "brute_force_separable",
    "build_patch_system",
    "consecutive_zero_check_1d",
    "default_config",
    "graph_connected",
    "is_nonseparable",
    "is_phase_retrievable_frame",
    "k_set",
    "local_minimize",
    "magnitude_gap",
    "mapset_reconstruct",
    "outer_products_span",
    "outer_space_dim",
    "overlap_shifts",
    "phi_inverse_norm",
    "random_signal",
    "run_campaign",
    "sample",
    "shift_box",
    "stability_bound",
    "sup_distance_up_to_sign",
]
