//! JSON design artifact written by `design` and read by `schedule`,
//! `simulate` and `check-cycle`.

use std::path::Path;

use ncs_sched::certificates::{CertificateScalars, DesignGrid, ModeCertificate};
use ncs_sched::cycles::{Cycle, TFactors};
use ncs_sched::design::DesignResult;
use ncs_sched::matops::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignArtifact {
    pub num_plants: usize,
    pub capacity: usize,
    pub grid: GridRecord,
    pub t_max: u64,
    /// Stable sets of the cycle vertices, in order.
    pub cycle: Vec<Vec<usize>>,
    pub t_factors: Vec<u64>,
    pub period: u64,
    pub xi: Vec<f64>,
    /// `−Ξ_i`: how far each plant is from the contractivity boundary.
    pub margins: Vec<f64>,
    pub certificates: Vec<CertificateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub h_s: f64,
    pub h_u: f64,
    pub kappa_min: f64,
    pub lmi_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub plant: usize,
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub mu_su: f64,
    pub mu_us: f64,
    pub kappa_s: f64,
    pub kappa_u: f64,
    pub p_s: Vec<Vec<f64>>,
    pub p_u: Vec<Vec<f64>>,
}

impl DesignArtifact {
    pub fn from_result(r: &DesignResult<f64>, grid: &DesignGrid, t_max: u64) -> Self {
        Self {
            num_plants: r.cycle.num_plants(),
            capacity: r.cycle.capacity(),
            grid: GridRecord { h_s: grid.h_s, h_u: grid.h_u, kappa_min: grid.kappa_min, lmi_tol: grid.lmi_tol },
            t_max,
            cycle: r.cycle.vertices().iter().map(|v| v.stable_set().to_vec()).collect(),
            t_factors: r.t_factors.as_slice().to_vec(),
            period: r.t_factors.period(),
            xi: r.contractivity.xi.clone(),
            margins: r.contractivity.margins.clone(),
            certificates: r
                .certificates
                .iter()
                .map(|c| CertificateRecord {
                    plant: c.plant,
                    lambda_s: c.lambda_s,
                    lambda_u: c.lambda_u,
                    mu_su: c.mu_su,
                    mu_us: c.mu_us,
                    kappa_s: c.kappa_s,
                    kappa_u: c.kappa_u,
                    p_s: c.p_s.to_rows(),
                    p_u: c.p_u.to_rows(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let a: DesignArtifact =
            serde_json::from_str(&text).map_err(|e| CliError::Config { path: path.into(), message: e.to_string() })?;
        if a.certificates.len() != a.num_plants || a.t_factors.len() != a.cycle.len() {
            return Err(CliError::Config { path: path.into(), message: "inconsistent design artifact".into() });
        }
        Ok(a)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes") + "\n"
    }

    pub fn cycle(&self) -> Result<(Cycle, TFactors), CliError> {
        let e = |e: ncs_sched::cycles::CycleError| CliError::Input(e.to_string());
        Ok((Cycle::from_stable_sets(self.num_plants, &self.cycle).map_err(e)?, TFactors::new(self.t_factors.clone()).map_err(e)?))
    }

    pub fn scalars(&self) -> Result<Vec<CertificateScalars<f64>>, CliError> {
        self.certificates
            .iter()
            .map(|c| {
                CertificateScalars::new(c.plant, c.lambda_s, c.lambda_u, c.mu_su, c.mu_us)
                    .map_err(|e| CliError::Input(e.to_string()))
            })
            .collect()
    }

    pub fn certificates(&self) -> Result<Vec<ModeCertificate<f64>>, CliError> {
        let m = |rows: &Vec<Vec<f64>>| Matrix::from_rows(rows).map_err(|e| CliError::Input(e.to_string()));
        self.certificates
            .iter()
            .map(|c| {
                Ok(ModeCertificate {
                    plant: c.plant,
                    p_s: m(&c.p_s)?,
                    lambda_s: c.lambda_s,
                    p_u: m(&c.p_u)?,
                    lambda_u: c.lambda_u,
                    mu_su: c.mu_su,
                    mu_us: c.mu_us,
                    kappa_s: c.kappa_s,
                    kappa_u: c.kappa_u,
                })
            })
            .collect()
    }
}
