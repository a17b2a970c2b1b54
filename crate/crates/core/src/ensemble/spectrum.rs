use serde::{Deserialize, Serialize};

use super::build::GammaWeights;
use super::rng::RngSeed;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64};

/// Sorted eigenvalues of one matrix together with where they came from.
///
/// `scaled` records whether the values belong to `M/√n` rather than `M`.
/// Root sets of deterministic matrices carry no seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    pub n: usize,
    pub weights: GammaWeights,
    pub seed: Option<RngSeed>,
    pub scaled: bool,
    pub values: Vec<f64>,
}

/// JSON sidecar written next to a spectrum CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub n: usize,
    pub p: usize,
    pub gamma: Vec<f64>,
    pub seed: Option<RngSeed>,
    pub scaled: bool,
}

impl EmpiricalSpectrum {
    pub fn new(
        n: usize,
        weights: GammaWeights,
        seed: Option<RngSeed>,
        scaled: bool,
        mut values: Vec<f64>,
    ) -> Result<Self> {
        weights.check_size(n)?;
        if values.len() != n {
            return Err(Error::invalid(format!("expected {n} eigenvalues, got {}", values.len())));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSpectrum { n, weights, seed, scaled, values })
    }

    pub fn p(&self) -> usize {
        self.weights.p()
    }

    /// Same spectrum divided by `√n`; exact per value.
    pub fn to_scaled(&self) -> EmpiricalSpectrum {
        if self.scaled {
            return self.clone();
        }
        let root = (self.n as f64).sqrt();
        EmpiricalSpectrum { values: self.values.iter().map(|v| v / root).collect(), scaled: true, ..self.clone() }
    }

    pub fn meta(&self) -> SpectrumMeta {
        SpectrumMeta {
            n: self.n,
            p: self.p(),
            gamma: self.weights.as_slice().to_vec(),
            seed: self.seed,
            scaled: self.scaled,
        }
    }

    /// CSV with header `index,value`, one-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.values.len() + 1));
        out.push_str("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
        }
        out
    }

    pub fn meta_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.meta()).expect("metadata serializes");
        s.push('\n');
        s
    }

    /// Rebuilds a spectrum from its CSV body and JSON sidecar.
    pub fn from_csv(csv: &str, meta_json: &str) -> Result<Self> {
        let meta: SpectrumMeta =
            serde_json::from_str(meta_json).map_err(|e| Error::Parse(format!("spectrum sidecar: {e}")))?;
        let mut lines = csv.lines();
        match lines.next() {
            Some("index,value") => {}
            other => return Err(Error::Parse(format!("unexpected spectrum header {other:?}"))),
        }
        let values = lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let (_, v) = line.split_once(',').ok_or_else(|| Error::Parse(format!("malformed row {line:?}")))?;
                parse_f64(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        let weights = GammaWeights::new(meta.gamma)?;
        if weights.p() != meta.p {
            return Err(Error::Parse("sidecar p does not match gamma length".into()));
        }
        EmpiricalSpectrum::new(meta.n, weights, meta.seed, meta.scaled, values)
    }
}
