//! Per-row mass diagnostics of a flow run over a set of null directions:
//! pairings `m . zeta`, their analytic derivatives, the sign of the
//! integrand `B` and the slack in the geodesic inequalities.

use serde::Serialize;

use crate::error::Result;
use crate::flow::FlowState;
use crate::hyperbolic::MinkowskiVector;
use crate::mass::{
    check_geodesic_inequalities, integrand_b_field, mass_derivative_analytic, mass_vector, MassContext,
    NullDirection,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicSlack<T> {
    pub angle: T,
    pub radial: T,
    pub combined: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorRow<T> {
    pub rho: T,
    pub mass: MinkowskiVector<T>,
    /// `m . zeta` per direction.
    pub pairings: Vec<T>,
    /// `d(m . zeta)/drho` from the integrand, per direction.
    pub derivatives: Vec<T>,
    /// Largest `B` over nodes and directions.
    pub max_b: T,
    /// Largest `|B|` over nodes and directions.
    pub max_abs_b: T,
    /// Smallest slack over nodes and directions, on rows where it was
    /// evaluated.
    pub geodesic: Option<GeodesicSlack<T>>,
}

/// How often the geodesic inequalities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorOptions {
    /// Every `geodesic_every`-th recorded row; `0` disables the check.
    pub geodesic_every: usize,
    /// `k drho` between the two leaves of the difference quotient.
    pub geodesic_delta: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self { geodesic_every: 1, geodesic_delta: 1e-4 }
    }
}

/// Aggregated outcome; ratios are relative to the scales listed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSummary<T> {
    /// `max |m|` over rows.
    pub mass_scale: T,
    /// `max |d(m . zeta)/drho|` over rows and directions.
    pub derivative_scale: T,
    /// `max |B|` over rows, nodes and directions.
    pub b_scale: T,
    /// Most negative analytic derivative.
    pub min_derivative: T,
    /// Most negative increment of `m . zeta` between consecutive rows.
    pub min_increment: T,
    /// Largest `B`.
    pub max_b: T,
    /// Largest `|fd - analytic|` on interior rows over the derivative scale
    /// of the same direction, maximized over directions.
    pub fd_mismatch: T,
    /// Largest `m . zeta` at the first row.
    pub max_initial_pairing: T,
    /// Largest `m . zeta` at the last row.
    pub max_final_pairing: T,
    pub min_geodesic: Option<GeodesicSlack<T>>,
}

pub struct Monitor<T> {
    ctx: MassContext<T>,
    directions: Vec<NullDirection<T>>,
    options: MonitorOptions,
    rows: Vec<MonitorRow<T>>,
}

impl<T: Real> Monitor<T> {
    pub fn new(ctx: MassContext<T>, directions: Vec<NullDirection<T>>, options: MonitorOptions) -> Self {
        Self { ctx, directions, options, rows: Vec::new() }
    }

    pub fn directions(&self) -> &[NullDirection<T>] {
        &self.directions
    }

    pub fn rows(&self) -> &[MonitorRow<T>] {
        &self.rows
    }

    pub fn observe(&mut self, state: &FlowState<T>) -> Result<()> {
        let ctx = &self.ctx;
        let mass = mass_vector(state, ctx);
        let mut pairings = Vec::with_capacity(self.directions.len());
        let mut derivatives = Vec::with_capacity(self.directions.len());
        let mut max_b = T::neg_infinity();
        let mut max_abs_b = T::zero();
        for z in &self.directions {
            pairings.push(mass.lorentz_dot(z.vector())?);
            derivatives.push(mass_derivative_analytic(state, ctx, z)?);
            for b in integrand_b_field(state, ctx, z)? {
                max_b = max_b.max(b);
                max_abs_b = max_abs_b.max(b.abs());
            }
        }
        let every = self.options.geodesic_every;
        let geodesic = if every > 0 && self.rows.len().is_multiple_of(every) {
            let leaf = state.leaf();
            let delta = T::lit(self.options.geodesic_delta) / leaf.k();
            let next = leaf.at(leaf.rho() + delta)?;
            let mut slack = GeodesicSlack { angle: T::infinity(), radial: T::infinity(), combined: T::infinity() };
            for z in &self.directions {
                let r = check_geodesic_inequalities(leaf, &next, ctx, z)?;
                slack.angle = slack.angle.min(r.min_slack_angle());
                slack.radial = slack.radial.min(r.min_slack_radial());
                slack.combined = slack.combined.min(r.min_slack_combined());
            }
            Some(slack)
        } else {
            None
        };
        self.rows.push(MonitorRow { rho: state.rho(), mass, pairings, derivatives, max_b, max_abs_b, geodesic });
        Ok(())
    }

    pub fn summary(&self) -> MonitorSummary<T> {
        let rows = &self.rows;
        let fold_max = |it: &mut dyn Iterator<Item = T>| it.fold(T::zero(), T::max);
        let mass_scale = fold_max(&mut rows.iter().map(|r| r.mass.euclidean_norm()));
        let derivative_scale = fold_max(&mut rows.iter().flat_map(|r| r.derivatives.iter().map(|d| d.abs())));
        let b_scale = fold_max(&mut rows.iter().map(|r| r.max_abs_b));
        let min_derivative =
            rows.iter().flat_map(|r| r.derivatives.iter().copied()).fold(T::infinity(), T::min);
        let max_b = rows.iter().map(|r| r.max_b).fold(T::neg_infinity(), T::max);
        let mut min_increment = T::infinity();
        let mut fd_mismatch = T::zero();
        for d in 0..self.directions.len() {
            for w in rows.windows(2) {
                min_increment = min_increment.min(w[1].pairings[d] - w[0].pairings[d]);
            }
            let scale = rows.iter().fold(T::zero(), |m, r| m.max(r.derivatives[d].abs()));
            if scale == T::zero() {
                continue;
            }
            for w in rows.windows(3) {
                let fd = (w[2].pairings[d] - w[0].pairings[d]) / (w[2].rho - w[0].rho);
                fd_mismatch = fd_mismatch.max((fd - w[1].derivatives[d]).abs() / scale);
            }
        }
        let max_pairing = |r: Option<&MonitorRow<T>>| {
            r.map(|r| r.pairings.iter().copied().fold(T::neg_infinity(), T::max)).unwrap_or(T::nan())
        };
        let min_geodesic = rows.iter().filter_map(|r| r.geodesic).reduce(|a, b| GeodesicSlack {
            angle: a.angle.min(b.angle),
            radial: a.radial.min(b.radial),
            combined: a.combined.min(b.combined),
        });
        MonitorSummary {
            mass_scale,
            derivative_scale,
            b_scale,
            min_derivative,
            min_increment: if rows.len() < 2 { T::zero() } else { min_increment },
            max_b,
            fd_mismatch,
            max_initial_pairing: max_pairing(rows.first()),
            max_final_pairing: max_pairing(rows.last()),
            min_geodesic,
        }
    }
}
