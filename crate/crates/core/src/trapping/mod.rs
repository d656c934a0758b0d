//! Trapping regions: construction from the growth hypotheses, membership,
//! and sampled certification that the vector field points inward.

mod certify;
mod region;

pub use certify::{
    certify_inward, sample_interior, Certificate, Certifier, Facet, ProjectionInfo, SampleOutcome,
    SkippedFacet,
    Verdict,
};
pub use region::{
    build_smalldata_3d, build_trap1, build_trap2, build_trap3, check_conditions,
    check_region_conditions, ConditionsReport, Constraint, Containment, Envelope, EnvelopeKind,
    ExpRegion, PolyRegion, Slack, SmallDataRegion, TimeExpRegion, TrapRegion, CONTAINS_TOL,
};
