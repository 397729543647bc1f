//! The generalized integral-type Hilbert operator and its boundedness tests.

pub mod criteria;
pub mod gamma;
pub mod operator;
pub mod probe;

pub use criteria::{
    criterion_bloch_to_gamma, criterion_beta_spaces, criterion_general, criterion_log_spaces, criterion_moment,
    index_ladder, CriterionResult, FormResult, GammaMode, Resolution, N_MAX,
};
pub use gamma::{gamma_coefficient, GammaWeightTable};
pub use operator::{
    apply_coefficient, apply_quadrature, apply_sublinear, hankel_apply, hankel_apply_series, shared_moments,
    well_defined_check, MeasureRule, MomentIndices, OperatorConfig, OperatorConfigSpec, QuadPolicy, WellDefined,
};
pub use probe::{
    operator_norm_probe, probe_catalog, probe_growth, classify_probe, ProbeCase, ProbeClass, ProbeGrowth, ProbeReport,
    PROBE_TRUNCATIONS,
};
