use serde::Serialize;

/// One residual norm at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub point: Vec<f64>,
    /// Free index, or `None` for summed equations.
    pub index: Option<usize>,
    pub norm: f64,
}

/// Residual norms over a set of sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: String,
    pub index_note: String,
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn new(equation: impl Into<String>, index_note: impl Into<String>, entries: Vec<ResidualEntry>) -> Self {
        let max = entries.iter().map(|e| e.norm).fold(0.0, f64::max);
        let mean = if entries.is_empty() {
            0.0
        } else {
            entries.iter().map(|e| e.norm).sum::<f64>() / entries.len() as f64
        };
        let mut points: Vec<&Vec<f64>> = entries.iter().map(|e| &e.point).collect();
        points.dedup();
        ResidualReport {
            equation: equation.into(),
            index_note: index_note.into(),
            samples: points.len(),
            max,
            mean,
            entries,
        }
    }

    /// `point;...,index,norm` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,index,norm\n");
        for e in &self.entries {
            let point: Vec<String> = e.point.iter().map(|v| format!("{v:e}")).collect();
            let index = e.index.map(|i| i.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{:e}\n", point.join(";"), index, e.norm));
        }
        out
    }
}
