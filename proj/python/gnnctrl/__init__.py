"""Distributed graph-filter and GNN controllers for networked LQ systems.

Thin wrapper over the compiled _gnnctrl module; everything lives in C++.
"""

from _gnnctrl import (  # noqa: F401
    CampaignResult,
    Controller,
    CostSpec,
    DeviationReport,
    DistributedSystem,
    EvalSummary,
    FilterBank,
    GnnctrlError,
    Graph,
    IssResult,
    Matrix,
    RiccatiSolution,
    RngStream,
    StabilityChangeReport,
    StabilityReport,
    TrainConfig,
    TrainResult,
    TrajectoryRecord,
    apply_filter,
    build_support,
    classify_stable,
    code_version,
    config_hash,
    controller_from_json_string,
    controller_to_json_string,
    default_interval,
    deviation_bound,
    dmlp_controller,
    evaluate,
    filter_lipschitz,
    filter_size,
    freq_response,
    generate_geometric_graph,
    generate_system,
    gf_controller,
    gnn_controller,
    inf_norm,
    is_connected,
    iss_check,
    l21_norm,
    make_cost_spec,
    mlp_controller,
    open_loop_controller,
    optimal_controller,
    perturb_system,
    rollout,
    run_experiment,
    run_verify_campaigns,
    sample_initial_states,
    solve_dare,
    solve_linear,
    spectral_norm,
    stability_change_bound,
    stability_constant,
    sym_eig,
    sym_sqrt,
    system_distance,
    train,
)

# code_version is "<name> <semver>"; keep just the number here.
__version__ = code_version.split()[-1]
