/// Every numerical threshold used by the crate, in one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative threshold (times `‖x‖_∞`) below which a singular value or
    /// eigenvalue counts as zero.
    pub rank_rel: f64,
    /// Slack for verifying selfadjoint / positive / unitary flags.
    pub flag: f64,
    /// Slack for projection idempotence `‖e² − e‖_∞` and range intersections.
    pub projection: f64,
    /// Relative slack (times `max(1, F_x(s))`) when comparing integrals of
    /// singular-value functions.
    pub integral_slack: f64,
    /// Slack for the Dunford–Schwartz verdict `c ≤ 1 + slack`.
    pub ds_slack: f64,
    /// Slack for sampled commutativity `‖T_iT_j y − T_jT_i y‖_∞`.
    pub commutation: f64,
    /// Absolute slack added to trace-budget comparisons.
    pub trace_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            flag: 1e-10,
            projection: 1e-10,
            integral_slack: 1e-12,
            ds_slack: 1e-9,
            commutation: 1e-9,
            trace_slack: 1e-12,
        }
    }
}
