//! Cell-level events: acceptable and good cells, good points and the event
//! that a whole super cell consists of good points, plus the closed-form
//! bounds and the Monte Carlo estimator of an event's probability under
//! conditioned displacements.

mod bounds;
mod cells;
mod nu;
mod points;

pub use bounds::{
    bound_acceptable, bound_e_tilde_complement, bound_good, check_hypotheses, good_point_probability,
    omega_lower_bound, BoundInputs, HypothesisCheck,
};
pub use cells::{
    is_acceptable, is_good_cell, sample_distinguished_path, CellCheckContext, DistinguishedPath, GOOD_RADIUS,
};
pub use nu::{estimate_nu_e, NuSpec, MAX_REJECTION_ATTEMPTS};
pub use points::{e_tilde_points, holds_e_tilde, is_good_point, transit_counts, TransitCounts};

use crate::dynamics::Trajectory;

/// Whether two paths occupy the same site at a common instant of `[t0, t1)`.
pub(crate) fn meets(a: &Trajectory, b: &Trajectory, t0: f64, t1: f64) -> bool {
    let pa: Vec<_> = a.pieces_in(t0, t1).filter(|p| p.0 < p.1 && p.0 < t1).collect();
    let pb: Vec<_> = b.pieces_in(t0, t1).filter(|p| p.0 < p.1 && p.0 < t1).collect();
    let (mut i, mut j) = (0, 0);
    while i < pa.len() && j < pb.len() {
        let (sa, ea, xa) = pa[i];
        let (sb, eb, xb) = pb[j];
        if xa == xb && sa.max(sb) < ea.min(eb) {
            return true;
        }
        if ea <= eb {
            i += 1;
        } else {
            j += 1;
        }
    }
    false
}
