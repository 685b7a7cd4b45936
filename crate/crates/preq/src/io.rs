//! Plot-ready output: trajectory and table CSVs, equilibrium JSON.
//!
//! Floats are printed with 17 significant digits so every value
//! round-trips exactly.

use std::io::{self, Write};

use preq_core::drift::{DriftMeasurement, DriftRate};
use preq_core::releq::RelativeEquilibrium;
use preq_core::stability::{StabilityReport, Verdict};
use preq_core::{Complex64, Domain, Plane, Se2Algebra, Sphere, Vec3};
use serde::Serialize;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column layout of a trajectory file for one domain.
pub trait CsvDomain: Domain {
    const POINT_COLUMNS: &'static [&'static str];
    const MOMENTUM_COLUMNS: [&'static str; 3];
    fn point_values(p: &Self::Point) -> Vec<f64>;
}

impl CsvDomain for Sphere {
    const POINT_COLUMNS: &'static [&'static str] = &["x", "y", "z"];
    const MOMENTUM_COLUMNS: [&'static str; 3] = ["Jx", "Jy", "Jz"];
    fn point_values(p: &Vec3) -> Vec<f64> {
        vec![p.x, p.y, p.z]
    }
}

impl CsvDomain for Plane {
    const POINT_COLUMNS: &'static [&'static str] = &["re", "im"];
    const MOMENTUM_COLUMNS: [&'static str; 3] = ["Jmu", "Jnu_re", "Jnu_im"];
    fn point_values(p: &Complex64) -> Vec<f64> {
        vec![p.re, p.im]
    }
}

pub fn trajectory_header<D: CsvDomain>(n: usize) -> String {
    let prefix = if D::POINT_COLUMNS.len() == 3 { 'x' } else { 'z' };
    let mut cols = vec!["t".to_string()];
    for i in 1..=n {
        cols.extend(D::POINT_COLUMNS.iter().map(|c| format!("{prefix}{i}{c}")));
    }
    cols.push("H".into());
    cols.extend(D::MOMENTUM_COLUMNS.iter().map(|c| c.to_string()));
    cols.join(",")
}

/// Streams trajectory rows to any writer.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    rows: usize,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new<D: CsvDomain>(mut out: W, n: usize) -> io::Result<Self> {
        writeln!(out, "{}", trajectory_header::<D>(n))?;
        Ok(Self { out, rows: 0 })
    }

    pub fn write_row<D: CsvDomain>(&mut self, t: f64, state: &[D::Point], energy: f64, momentum: [f64; 3]) -> io::Result<()> {
        let mut line = fmt_f64(t);
        for p in state {
            for v in D::point_values(p) {
                line.push(',');
                line.push_str(&fmt_f64(v));
            }
        }
        for v in std::iter::once(energy).chain(momentum) {
            line.push(',');
            line.push_str(&fmt_f64(v));
        }
        self.rows += 1;
        writeln!(self.out, "{line}")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::FormallyStable => "formally_stable",
        Verdict::Indefinite => "indefinite",
        Verdict::Degenerate => "degenerate",
    }
}

/// `alpha,lambda_min,lambda_max,verdict` rows. An empty admissible
/// subspace prints `nan` extremes.
pub fn write_stability_csv<W: Write>(mut out: W, rows: &[(f64, StabilityReport)]) -> io::Result<()> {
    writeln!(out, "alpha,lambda_min,lambda_max,verdict")?;
    for (alpha, r) in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(*alpha),
            fmt_f64(r.lambda_min().unwrap_or(f64::NAN)),
            fmt_f64(r.lambda_max().unwrap_or(f64::NAN)),
            verdict_name(r.verdict)
        )?;
    }
    Ok(())
}

/// `dmu_norm,rate,rate_over_dmu` rows of a drift sweep.
pub fn write_drift_sweep_csv<W: Write>(mut out: W, rows: &[DriftMeasurement]) -> io::Result<()> {
    writeln!(out, "dmu_norm,rate,rate_over_dmu")?;
    for m in rows {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(m.dmu.norm()),
            fmt_f64(m.rate.mean_rate),
            fmt_f64(m.rate_over_dmu())
        )?;
    }
    Ok(())
}

/// `window_index,rate` rows of one drift measurement.
pub fn write_drift_windows_csv<W: Write>(mut out: W, rate: &DriftRate) -> io::Result<()> {
    writeln!(out, "window_index,rate")?;
    for (i, r) in rate.window_rates.iter().enumerate() {
        writeln!(out, "{i},{}", fmt_f64(*r))?;
    }
    Ok(())
}

/// Serialized relative equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReleqJson {
    pub domain: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub positions: Vec<Vec<f64>>,
    pub strengths: Vec<f64>,
    /// Sphere: angular velocity vector. Plane: `[θ̇, ȧ_re, ȧ_im]`.
    pub generator: Vec<f64>,
    /// Per-vortex multipliers (sphere only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

impl From<&RelativeEquilibrium<Sphere>> for ReleqJson {
    fn from(re: &RelativeEquilibrium<Sphere>) -> Self {
        Self {
            domain: "sphere",
            n: re.n,
            alpha: re.alpha,
            gamma: re.gamma,
            radius: Some(re.radius()),
            positions: re.state.iter().map(Sphere::point_values).collect(),
            strengths: re.system.strengths().to_vec(),
            generator: vec![re.generator.x, re.generator.y, re.generator.z],
            lambdas: re.multipliers.map(|_| re.multiplier_list()),
        }
    }
}

impl From<&RelativeEquilibrium<Plane>> for ReleqJson {
    fn from(re: &RelativeEquilibrium<Plane>) -> Self {
        let g: &Se2Algebra = &re.generator;
        Self {
            domain: "plane",
            n: re.n,
            alpha: re.alpha,
            gamma: re.gamma,
            radius: None,
            positions: re.state.iter().map(Plane::point_values).collect(),
            strengths: re.system.strengths().to_vec(),
            generator: vec![g.rate, g.velocity.re, g.velocity.im],
            lambdas: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use preq_core::releq::{build_planar_releq, build_sphere_releq};

    #[test]
    fn headers() {
        assert_eq!(
            trajectory_header::<Sphere>(2),
            "t,x1x,x1y,x1z,x2x,x2y,x2z,H,Jx,Jy,Jz"
        );
        assert_eq!(trajectory_header::<Plane>(1), "t,z1re,z1im,H,Jmu,Jnu_re,Jnu_im");
    }

    #[test]
    fn rows_round_trip() {
        let mut w = TrajectoryWriter::new::<Plane>(Vec::new(), 1).unwrap();
        let v = 0.1 + 0.2;
        w.write_row::<Plane>(1.0 / 3.0, &[Complex64::new(v, -1e-300)], 2.0, [0.0, 1.0, -1.0])
            .unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row[0], 1.0 / 3.0);
        assert_eq!(row[1], v);
        assert_eq!(row[2], -1e-300);
        assert_eq!(row.len(), 7);
    }

    #[test]
    fn releq_json_fields() {
        let re = build_sphere_releq(4, 0.5, 1.0, 2.0).unwrap();
        let j = serde_json::to_value(ReleqJson::from(&re)).unwrap();
        for key in ["domain", "N", "alpha", "Gamma", "R", "positions", "strengths", "generator", "lambdas"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["positions"].as_array().unwrap().len(), 4);
        let p = build_planar_releq(3, 0.5, 1.0).unwrap();
        let j = serde_json::to_value(ReleqJson::from(&p)).unwrap();
        assert!(j.get("R").is_none());
        assert_eq!(j["domain"], "plane");
    }
}
