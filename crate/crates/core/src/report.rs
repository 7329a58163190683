//! Run reports and CSV emitters.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagnostics::CurvatureError;
use crate::geometry::Metric;

/// One CSV line, every value with 17 significant digits.
pub fn csv_row(values: &[f64]) -> String {
    let mut line = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v:.16e}");
    }
    line.push('\n');
    line
}

/// Two-column CSV with a header.
pub fn csv_columns(header: (&str, &str), a: &[f64], b: &[f64]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in a.iter().zip(b) {
        out.push_str(&csv_row(&[*x, *y]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub solver: String,
    pub bc: String,
    pub metric: Metric,
    pub c0: f64,
    pub length: f64,
    /// Subinterval count (uniform grid) or polynomial degree (Chebyshev grid).
    pub nodes: usize,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_threshold: Option<f64>,
}

/// Observables recorded at one probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub t: f64,
    pub s: Vec<f64>,
    pub curvature: Vec<f64>,
    pub c_origin: f64,
    pub energy: f64,
    pub error: CurvatureError,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front: Option<f64>,
}

impl ProbeRecord {
    pub fn curvature_csv(&self) -> String {
        csv_columns(("s", "c"), &self.s, &self.curvature)
    }

    pub fn spectrum_csv(&self) -> Option<String> {
        self.spectrum.as_ref().map(|sp| {
            let k: Vec<f64> = (0..sp.len()).map(|k| k as f64).collect();
            csv_columns(("k", "abs_a"), &k, sp)
        })
    }
}

/// Scalar time series sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub c_origin: f64,
    pub energy: f64,
    pub max_curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub t: f64,
    pub degree: usize,
    pub dt: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RunEvent {
    StabilityWarning { dt: f64, limit: f64 },
    CurvatureClamped { t: f64, nodes: usize },
    BoundaryTouch { t: f64 },
    StageSwitch { t: f64, length: f64, degree: usize },
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub params: RunParams,
    pub probes: Vec<ProbeRecord>,
    pub series: Vec<SeriesPoint>,
    pub refinements: Vec<Refinement>,
    pub events: Vec<RunEvent>,
    pub final_t: f64,
    pub steps: u64,
}

impl RunReport {
    pub fn new(params: RunParams) -> Self {
        let t = params.t_start;
        Self {
            params,
            probes: Vec::new(),
            series: Vec::new(),
            refinements: Vec::new(),
            events: Vec::new(),
            final_t: t,
            steps: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn energy_csv(&self) -> String {
        let t: Vec<f64> = self.series.iter().map(|p| p.t).collect();
        let e: Vec<f64> = self.series.iter().map(|p| p.energy).collect();
        csv_columns(("t", "energy"), &t, &e)
    }

    pub fn origin_csv(&self) -> String {
        let t: Vec<f64> = self.series.iter().map(|p| p.t).collect();
        let c: Vec<f64> = self.series.iter().map(|p| p.c_origin).collect();
        csv_columns(("t", "c_origin"), &t, &c)
    }

    /// Time of the first boundary-touch event, if any.
    pub fn boundary_touch(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e {
            RunEvent::BoundaryTouch { t } => Some(*t),
            _ => None,
        })
    }

    pub fn probe_near(&self, t: f64) -> Option<&ProbeRecord> {
        self.probes.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_precision() {
        assert_eq!(csv_row(&[1.0, -0.5]), "1.0000000000000000e0,-5.0000000000000000e-1\n");
        let v = 0.1f64 + 0.2;
        let parsed: f64 = csv_row(&[v]).trim().parse().unwrap();
        assert_eq!(parsed, v);
    }

    #[test]
    fn columns_have_header() {
        let csv = csv_columns(("s", "c"), &[0.0], &[2.0]);
        assert!(csv.starts_with("s,c\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
