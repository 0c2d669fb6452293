//! Oracle separation experiments: p-uniform sampling, the coherent and
//! dephasing oracles, the interactive protocol, and the query-gap estimates.

pub mod estimates;
pub mod oracle;
pub mod sampling;

pub use estimates::{
    envelope, expected_norm, hybrid_bound, per_query_gap, plug_in_norm, scaling_sweep, GapEstimate, McEstimate,
    ScalingRow,
};
pub use oracle::{
    honest_prover, oracle_apply, protocol_accept, reset_control_prover, search_prover, OracleInput, OracleKind,
    ProverSearch,
};
pub use sampling::{
    event_probability, haar_sample, p_uniform_invariance_check, p_uniform_sample, InvarianceReport, PUniformSpec,
    UnitaryMeasure,
};
