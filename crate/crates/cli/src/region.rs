//! Phase-diagram regions of the Dyson potential that can be decided from
//! computable quantities alone. The only quantitative gate is `beta_DU`.

use ruelle_core::model::beta_du;
use ruelle_core::series::zeta;
use ruelle_core::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    A,
    BKnown,
    DKnown,
    OutsideProven,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionChecks {
    pub alpha_above_two: bool,
    pub alpha_above_three_halves: bool,
    pub beta_du: f64,
    /// `2 beta zeta(alpha)`.
    pub bar_c: f64,
    pub in_uniqueness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub alpha: f64,
    pub beta: f64,
    pub region: Region,
    pub label: String,
    pub citation: String,
    pub checks: RegionChecks,
}

pub fn classify_region(alpha: f64, beta: f64) -> Result<RegionReport> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be > 1, got {alpha}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let threshold = beta_du(alpha)?;
    let checks = RegionChecks {
        alpha_above_two: alpha > 2.0,
        alpha_above_three_halves: alpha > 1.5,
        beta_du: threshold,
        bar_c: 2.0 * beta * zeta(alpha)?.value,
        in_uniqueness: beta < threshold,
    };
    let (region, label, citation) = if checks.alpha_above_two {
        (
            Region::A,
            "(a): continuous eigenfunction at every beta (summable variation)",
            "summable variation gives a continuous eigenfunction and a unique equilibrium state (Walters)",
        )
    } else if checks.alpha_above_three_halves && checks.in_uniqueness {
        (
            Region::BKnown,
            "(b): continuous eigenfunction (uniqueness-regime decoupling)",
            "Dobrushin uniqueness with square-summable crossing bonds gives a continuous eigenfunction",
        )
    } else if checks.in_uniqueness {
        (
            Region::DKnown,
            "(d): integrable eigenfunction (uniqueness-regime decoupling); continuity conjectured absent",
            "Dobrushin uniqueness with summable crossing bonds gives an integrable eigenfunction",
        )
    } else {
        (
            Region::OutsideProven,
            "outside proven regime: conjectural regions (c)/(e)/(f)/(g); beta_c(alpha) not computable here",
            "no quantitative gate beyond the Dobrushin threshold is available",
        )
    };
    Ok(RegionReport { alpha, beta, region, label: label.into(), citation: citation.into(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(classify_region(3.0, 5.0).unwrap().region, Region::A);
        assert_eq!(classify_region(1.8, 0.1).unwrap().region, Region::BKnown);
        let d = classify_region(1.4, 0.05).unwrap();
        assert_eq!(d.region, Region::DKnown);
        assert!(d.label.starts_with("(d)") && d.label.contains("conjectur"));
        let out = classify_region(1.2, 10.0).unwrap();
        assert_eq!(out.region, Region::OutsideProven);
        assert!(out.label.contains("conjectur"));
        assert!(classify_region(1.0, 0.1).is_err());
    }
}
