use serde::Serialize;

use super::{
    cheng_yang_bound, cheng_yang_constant, gap_bound, lp_check, yang_bound, yang_check, yang_root_gap,
    RhsCoefficients, RhsMode,
};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    Yang,
    Gap,
    LevitinParnovski,
    ChengYang,
}

impl Inequality {
    pub fn as_str(self) -> &'static str {
        match self {
            Inequality::Yang => "yang",
            Inequality::Gap => "gap",
            Inequality::LevitinParnovski => "levitin-parnovski",
            Inequality::ChengYang => "cheng-yang",
        }
    }
}

/// How much negative slack is tolerated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// `1e-9 · max(1, scale)`, for closed-form spectra.
    Analytic,
    /// `τ · scale`, with `τ` the relative discretization error.
    Mesh(f64),
}

impl Tolerance {
    pub fn value(self, scale: f64) -> f64 {
        match self {
            Tolerance::Analytic => 1e-9 * scale.max(1.0),
            Tolerance::Mesh(tau) => tau * scale,
        }
    }
}

/// Constants and readings behind every row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub m: usize,
    pub p: usize,
    pub g_max: f64,
    pub min_xsq: f64,
    /// Coefficient on the maximum in the geometric Levitin–Parnovski
    /// right-hand side.
    pub lp_max_factor: f64,
    pub cheng_yang_c0: f64,
    pub gap_form: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub inequality: Inequality,
    pub p: usize,
    /// `k` for Yang, gap and Cheng–Yang rows, `i` for Levitin–Parnovski.
    pub index: usize,
    pub bound: f64,
    pub observed: f64,
    pub slack: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub mode: RhsMode,
    pub provenance: Provenance,
}

/// Every inequality for `k, i ≤ k_max`, as far as the spectrum and the
/// right-hand sides reach.
pub fn evaluate_suite(
    spectrum: &Spectrum,
    rhs: &RhsCoefficients,
    k_max: usize,
    tolerance: Tolerance,
) -> Result<Vec<BoundReport>> {
    let lam = &spectrum.eigenvalues;
    let d = &rhs.values;
    let consts = rhs.constants;
    let m = consts.m;
    let mf = m as f64;
    let provenance = Provenance {
        m,
        p: spectrum.degree,
        g_max: consts.g_max,
        min_xsq: consts.min_xsq,
        lp_max_factor: 4.0,
        cheng_yang_c0: cheng_yang_constant(m),
        gap_form: match rhs.mode {
            RhsMode::GeometricMax => "2[((2/m)mean + 1 + 2/m + (2/m)G)^2 - (1+4/m)var]^(1/2)",
            RhsMode::ExactIntegral => "root spacing of the quadratic",
        },
    };
    let row = |inequality, index, bound: f64, observed: f64, slack: f64, scale: f64| {
        let tol = tolerance.value(scale);
        BoundReport {
            inequality,
            p: spectrum.degree,
            index,
            bound,
            observed,
            slack,
            pass: slack >= -tol,
            tolerance: tol,
            mode: rhs.mode,
            provenance: provenance.clone(),
        }
    };

    let k_top = k_max.min(lam.len().saturating_sub(1)).min(d.len());
    let mut yang = Vec::new();
    let mut gap = Vec::new();
    let mut cheng = Vec::new();
    for k in 1..=k_top {
        let head = &lam[..k];
        let next = lam[k];

        let bound = or_nan(yang_bound(head, &d[..k], m))?;
        let slack = yang_check(lam, d, m, k)?;
        let scale: f64 = head
            .iter()
            .zip(d)
            .map(|(l, di)| (next + l) * (di.abs() + 2.0 * mf * (next - l).abs()) + (next - l).abs() * di.abs())
            .sum();
        yang.push(row(Inequality::Yang, k, bound, next, slack, scale));

        let bound = match rhs.mode {
            RhsMode::GeometricMax => or_nan(gap_bound(head, m, consts.g_max))?,
            RhsMode::ExactIntegral => or_nan(yang_root_gap(head, &d[..k], m))?,
        };
        let observed = next - lam[k - 1];
        gap.push(row(Inequality::Gap, k, bound, observed, bound - observed, next + lam[k - 1] + bound));

        let c = match rhs.mode {
            RhsMode::GeometricMax => mf / 2.0 + 1.0 + consts.g_max,
            RhsMode::ExactIntegral => head
                .iter()
                .zip(d)
                .map(|(l, di)| (di - 4.0 * l) / 4.0)
                .fold(f64::NEG_INFINITY, f64::max),
        };
        let bound = cheng_yang_bound(lam[0] + c, m, k)?;
        let observed = next + c;
        cheng.push(row(Inequality::ChengYang, k, bound, observed, bound - observed, observed + bound));
    }

    let mut lp = Vec::new();
    let i_top = k_max.min(lam.len().saturating_sub(m)).min(d.len());
    for i in 1..=i_top {
        let slack = lp_check(lam, d[i - 1], m, i)?;
        let observed = d[i - 1] - slack;
        let scale: f64 = lam[i..i + m].iter().map(|l| l + lam[i - 1]).sum::<f64>() + d[i - 1].abs();
        lp.push(row(Inequality::LevitinParnovski, i, d[i - 1], observed, slack, scale));
    }

    Ok(yang.into_iter().chain(gap).chain(lp).chain(cheng).collect())
}

/// Inputs the bound cannot be formed from (an unsorted or infeasible head)
/// give a NaN bound, so the row fails instead of aborting the suite.
fn or_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Infeasible(_) | Error::Input(_)) => Ok(f64::NAN),
        other => other,
    }
}

pub fn reports_to_json(reports: &[BoundReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// CSV with columns `inequality,p,index,bound,observed,slack,pass,mode`.
pub fn reports_to_csv(reports: &[BoundReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["inequality", "p", "index", "bound", "observed", "slack", "pass", "mode"])
        .map_err(csv_error)?;
    for r in reports {
        w.write_record([
            r.inequality.as_str().to_string(),
            r.p.to_string(),
            r.index.to_string(),
            r.bound.to_string(),
            r.observed.to_string(),
            r.slack.to_string(),
            r.pass.to_string(),
            r.mode.as_str().to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    std::io::Error::other(e.to_string()).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rhs_exact_all;
    use crate::manifold::sphere_backend;
    use crate::spectrum::analytic_sphere_spectrum;

    #[test]
    fn two_sphere_exact_suite_passes_with_equalities() {
        let b = sphere_backend(2, 3, 2).unwrap();
        let s = analytic_sphere_spectrum(2, 0, 12).unwrap();
        let rhs = rhs_exact_all(&s, &b, None, 11).unwrap();
        let rows = evaluate_suite(&s, &rhs, 10, Tolerance::Analytic).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        let yang_zero: Vec<usize> = rows
            .iter()
            .filter(|r| r.inequality == Inequality::Yang && r.slack.abs() < 1e-9)
            .map(|r| r.index)
            .collect();
        assert!(yang_zero.contains(&1) && yang_zero.contains(&4));
    }

    #[test]
    fn corrupted_spectrum_fails_rows_without_aborting() {
        let b = sphere_backend(2, 3, 2).unwrap();
        let mut s = analytic_sphere_spectrum(2, 0, 13).unwrap();
        s.eigenvalues[4] *= 2.0;
        let rhs = rhs_exact_all(&s, &b, None, 12).unwrap();
        let rows = evaluate_suite(&s, &rhs, 10, Tolerance::Analytic).unwrap();
        assert!(rows.iter().any(|r| r.inequality == Inequality::Yang && r.index == 4 && r.slack < 0.0 && !r.pass));
        assert!(rows.iter().any(|r| r.bound.is_nan() && !r.pass));
    }

    #[test]
    fn csv_header_and_rows() {
        let b = sphere_backend(1, 2, 16).unwrap();
        let s = analytic_sphere_spectrum(1, 0, 4).unwrap();
        let rhs = rhs_exact_all(&s, &b, None, 3).unwrap();
        let rows = evaluate_suite(&s, &rhs, 3, Tolerance::Analytic).unwrap();
        let text = reports_to_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "inequality,p,index,bound,observed,slack,pass,mode");
        assert_eq!(lines.count(), rows.len());
    }
}
