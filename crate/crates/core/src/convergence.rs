//! Convergence tables: one residual per refinement level and the observed
//! order log2(r_{k-1} / r_k) between neighbouring levels.

use std::fmt;
use std::str::FromStr;

use crate::curvature::curvature_bundle;
use crate::diff::{DifferentiationStrategy, FdOrder};
use crate::error::{Error, Result};
use crate::expansion::expansion_study;
use crate::geodesic::{integrate_geodesic, IntegratorSettings, NormalChart};
use crate::report::{study_inputs, StudyInputs};
use crate::scenario::Scenario;

/// Residuals below this are treated as round-off; no order is reported.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyParameter {
    /// Fourth-order stencil step, halved per level; Riemann tensor against
    /// dual-number derivatives.
    FdStep,
    /// RK4 steps per unit, doubled per level; geodesic endpoint against a
    /// run with 8x the finest step count.
    OdeSteps,
    /// Normal-coordinate radius, halved per level; order-2 expansion
    /// residual against the integrated pullback.
    Radius,
}

impl StudyParameter {
    pub fn name(self) -> &'static str {
        match self {
            StudyParameter::FdStep => "fd_step",
            StudyParameter::OdeSteps => "ode_steps",
            StudyParameter::Radius => "radius",
        }
    }
}

impl fmt::Display for StudyParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [StudyParameter::FdStep, StudyParameter::OdeSteps, StudyParameter::Radius]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter `{s}` (fd_step, ode_steps, radius)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub parameter: f64,
    pub residual: f64,
    /// `None` on the first level.
    pub observed_order: Option<ObservedOrder>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObservedOrder {
    Value(f64),
    /// One of the two residuals sits at the floating-point floor.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub parameter: StudyParameter,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    fn from_residuals(parameter: StudyParameter, values: &[f64], residuals: &[f64]) -> Self {
        let rows = values
            .iter()
            .zip(residuals)
            .enumerate()
            .map(|(level, (&p, &r))| ConvergenceRow {
                level,
                parameter: p,
                residual: r,
                observed_order: (level > 0).then(|| {
                    let prev = residuals[level - 1];
                    if prev < RESIDUAL_FLOOR || r < RESIDUAL_FLOOR {
                        ObservedOrder::Indeterminate
                    } else {
                        ObservedOrder::Value((prev / r).log2())
                    }
                }),
            })
            .collect();
        ConvergenceTable { parameter, rows }
    }

    /// True when any level pair hit the residual floor.
    pub fn indeterminate(&self) -> bool {
        self.rows.iter().any(|r| r.observed_order == Some(ObservedOrder::Indeterminate))
    }

    /// Observed order of the last level pair, if determinate.
    pub fn final_order(&self) -> Option<f64> {
        match self.rows.last()?.observed_order? {
            ObservedOrder::Value(v) => Some(v),
            ObservedOrder::Indeterminate => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,parameter,residual,observed_order\n");
        for r in &self.rows {
            let order = match r.observed_order {
                None => String::new(),
                Some(ObservedOrder::Value(v)) => format!("{v:.6}"),
                Some(ObservedOrder::Indeterminate) => "indeterminate".into(),
            };
            s.push_str(&format!("{},{:e},{:e},{}\n", r.level, r.parameter, r.residual, order));
        }
        s
    }
}

pub fn convergence_study(s: &Scenario, parameter: StudyParameter, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("levels must be >= 3, got {levels}")));
    }
    let StudyInputs { m, origin, direction, radii } = study_inputs(s)?;
    let halving = |start: f64| (0..levels).map(|k| start / 2f64.powi(k as i32)).collect::<Vec<_>>();
    match parameter {
        StudyParameter::FdStep => {
            if !m.source().is_expression() {
                return Err(Error::DualUnavailable);
            }
            let exact = curvature_bundle(&m, &origin, DifferentiationStrategy::DualForward, false)?;
            let steps = halving(0.1);
            let res = steps
                .iter()
                .map(|&h| {
                    let b = curvature_bundle(&m, &origin, DifferentiationStrategy::fd(FdOrder::Fourth, h), false)?;
                    Ok(b.riemann_up.max_abs_diff(&exact.riemann_up))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ConvergenceTable::from_residuals(parameter, &steps, &res))
        }
        StudyParameter::OdeSteps => {
            let r = radii.last().copied().unwrap_or(1.0);
            let v: Vec<f64> = direction.iter().map(|x| r * x).collect();
            let settings = |n: usize| IntegratorSettings { monitor_conjugate: false, ..IntegratorSettings::with_steps(n) };
            let counts: Vec<usize> = (0..levels).map(|k| 8 << k).collect();
            let reference = integrate_geodesic(&m, &origin, &v, 1.0, &settings(8 * counts[levels - 1]))?;
            let res = counts
                .iter()
                .map(|&n| {
                    let sol = integrate_geodesic(&m, &origin, &v, 1.0, &settings(n))?;
                    Ok(sol.end().x.iter().zip(&reference.end().x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                })
                .collect::<Result<Vec<f64>>>()?;
            let values: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
            Ok(ConvergenceTable::from_residuals(parameter, &values, &res))
        }
        StudyParameter::Radius => {
            let start = radii.first().copied().unwrap_or(0.4);
            let rs = halving(start);
            let chart = NormalChart::new(m.clone(), &origin, IntegratorSettings::default())?;
            let bundle = curvature_bundle(&m, &origin, DifferentiationStrategy::Auto, false)?;
            let rep = expansion_study(&chart, &bundle, &direction, &rs, 2)?;
            Ok(ConvergenceTable::from_residuals(parameter, &rs, &rep.residuals))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> Scenario {
        Scenario::parse(r#"{"dim": 2, "signature": [1,1], "catalog": {"name": "sphere_polar"}, "origin": [1.1, 0.2], "radii": [0.4]}"#).unwrap()
    }

    #[test]
    fn rk4_order_on_sphere() {
        let t = convergence_study(&sphere(), StudyParameter::OdeSteps, 4).unwrap();
        let p = t.final_order().unwrap();
        assert!((p - 4.0).abs() < 0.3, "{}", t.to_csv());
    }

    #[test]
    fn fd4_order_on_sphere() {
        let t = convergence_study(&sphere(), StudyParameter::FdStep, 3).unwrap();
        let p = t.final_order().unwrap();
        assert!((p - 4.0).abs() < 0.3, "{}", t.to_csv());
    }

    #[test]
    fn radius_study_reports_truncation_order() {
        let t = convergence_study(&sphere(), StudyParameter::Radius, 4).unwrap();
        // S^2 has no odd terms beyond the quadratic one, so order-2
        // truncation leaves the quartic term
        let p = t.final_order().unwrap();
        assert!((p - 4.0).abs() < 0.3, "{}", t.to_csv());
    }

    #[test]
    fn flat_metric_is_indeterminate() {
        let s = Scenario::parse(r#"{"dim": 3, "signature": [1,1,1], "catalog": {"name": "euclidean", "params": {"n": 3}}}"#).unwrap();
        let t = convergence_study(&s, StudyParameter::Radius, 3).unwrap();
        assert!(t.indeterminate());
        assert!(t.to_csv().contains("indeterminate"));
        assert!(convergence_study(&s, StudyParameter::Radius, 2).is_err());
    }

    #[test]
    fn csv_header_and_parse() {
        assert_eq!("ode_steps".parse::<StudyParameter>().unwrap(), StudyParameter::OdeSteps);
        assert!("dt".parse::<StudyParameter>().is_err());
        let t = ConvergenceTable::from_residuals(StudyParameter::Radius, &[1.0, 0.5, 0.25], &[1.0, 0.0625, 0.00390625]);
        let csv = t.to_csv();
        assert!(csv.starts_with("level,parameter,residual,observed_order\n"));
        assert_eq!(t.final_order(), Some(4.0));
    }
}
