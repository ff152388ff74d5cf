//! Computed lower and upper certificates for σ_min(U_N).

mod lower;
mod upper;

pub use lower::*;
pub use upper::*;

use serde::Serialize;

use crate::error::Result;
use crate::model::{ClusterParams, NodeVector};
use crate::numeric::Dd;
use crate::vandermonde::{confluent_rect, sigma_min};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub kappa: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub sigma_min: f64,
    pub lower_certificate: Option<f64>,
    pub upper_certificate: Option<f64>,
    pub m: usize,
    pub lambda: f64,
    pub admissible: bool,
    pub constants: Constants,
}

/// σ_min(U_N(ξ)) in double-double precision.
pub fn sigma_min_dd(x: &NodeVector, n: usize) -> Result<f64> {
    let u = confluent_rect::<Dd>(x, n);
    Ok(sigma_min(&u)?.to_f64())
}

/// Both certificates and the exact σ_min for one configuration; certificates that
/// do not apply are reported as `None`.
pub fn certify(x: &NodeVector, params: &ClusterParams, omega: f64, n: usize) -> Result<CertificateReport> {
    let sigma = sigma_min_dd(x, n)?;
    let dec = decimation_search(x, params, omega, n);
    let lower = certified_lower_bound(x, params, omega, n).ok();
    let upper = upper_bound_certificate_detail(x, n, params).ok();
    Ok(CertificateReport {
        sigma_min: sigma,
        lower_certificate: lower,
        upper_certificate: upper.as_ref().map(|u| u.value),
        m: dec.m,
        lambda: dec.lambda,
        admissible: dec.admissible,
        constants: Constants {
            kappa: kappa(x.len()),
            c1: c1(x.len()),
            c2: upper.map(|u| u.c2),
        },
    })
}
