//! Text formats.
//!
//! All documents are JSON. Matrices are square and stored row-major as
//! `{"n": n, "data": [...]}`; complex entries are `[re, im]` pairs. Stochastic
//! matrices follow the column convention: `data[i*n + j]` is the weight of the
//! transition `j → i`, and every column sums to one. Floats are written in shortest
//! round-trip form, so a document re-read and re-written is byte-identical.
//!
//! Trajectory and ensemble outputs are comma-separated tables.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::birkhoff::BirkhoffDecomposition;
use crate::dilation::UnitaryDilation;
use crate::entropy::{Alpha, MonotonicityReport};
use crate::error::{Error, Result};
use crate::kraus::KrausSet;
use crate::linalg::{CMatrix, CVector, DensityMatrix};
use crate::process::{ChainSource, EnsembleReport, InitialState, ProcessConfig, TrajectoryRecord};
use crate::simplex::{DsMethod, ProbabilityVector, StochasticMatrix};

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub n: usize,
    pub data: Vec<f64>,
}

impl MatrixDoc {
    pub fn from_stochastic(m: &StochasticMatrix) -> Self {
        Self { n: m.dim(), data: m.as_row_major().to_vec() }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self { n, data: (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect() }
    }

    pub fn to_stochastic(&self, tol: f64) -> Result<StochasticMatrix> {
        StochasticMatrix::from_row_major(self.n, self.data.clone(), tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixDoc {
    pub n: usize,
    pub data: Vec<[f64; 2]>,
}

fn complex_row_major(m: &CMatrix) -> Vec<[f64; 2]> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]).collect()
}

fn complex_from_row_major(n: usize, data: &[[f64; 2]]) -> Result<CMatrix> {
    if data.len() != n * n {
        return Err(Error::Format(format!("expected {} entries, found {}", n * n, data.len())));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = data[i * n + j];
        Complex64::new(re, im)
    }))
}

impl ComplexMatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self { n: m.nrows(), data: complex_row_major(m) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        complex_from_row_major(self.n, &self.data)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub n: usize,
    pub p: Vec<f64>,
}

impl VectorDoc {
    pub fn from_probability(p: &ProbabilityVector) -> Self {
        Self { n: p.len(), p: p.as_slice().to_vec() }
    }

    pub fn to_probability(&self) -> Result<ProbabilityVector> {
        if self.p.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: self.p.len() });
        }
        ProbabilityVector::new(self.p.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausDoc {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub operators: Vec<Vec<[f64; 2]>>,
}

impl KrausDoc {
    pub fn from_kraus(k: &KrausSet) -> Self {
        Self { n: k.dim(), count: k.len(), operators: k.operators().iter().map(complex_row_major).collect() }
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        if self.operators.len() != self.count {
            return Err(Error::Format(format!("N = {} but {} operators given", self.count, self.operators.len())));
        }
        let ops = self.operators.iter().map(|op| complex_from_row_major(self.n, op)).collect::<Result<Vec<_>>>()?;
        KrausSet::new(ops)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationDoc {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    #[serde(rename = "U")]
    pub unitary: Vec<[f64; 2]>,
    pub bath_state: Vec<[f64; 2]>,
}

impl DilationDoc {
    pub fn from_dilation(d: &UnitaryDilation) -> Self {
        Self {
            n: d.system_dim(),
            count: d.kraus_count(),
            unitary: complex_row_major(d.unitary()),
            bath_state: d.bath_state().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_dilation(&self) -> Result<UnitaryDilation> {
        let dim = 2 * self.n * self.count;
        let u = complex_from_row_major(dim, &self.unitary)?;
        let bath = CVector::from_iterator(
            self.bath_state.len(),
            self.bath_state.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        UnitaryDilation::from_parts(self.n, self.count, u, bath)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffDoc {
    pub n: usize,
    pub weights: Vec<f64>,
    pub permutations: Vec<Vec<usize>>,
}

impl BirkhoffDoc {
    pub fn from_decomposition(d: &BirkhoffDecomposition) -> Self {
        Self { n: d.dim(), weights: d.weights().to_vec(), permutations: d.permutations().to_vec() }
    }

    pub fn to_decomposition(&self) -> Result<BirkhoffDecomposition> {
        BirkhoffDecomposition::new(self.n, self.weights.clone(), self.permutations.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub step: usize,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityDoc {
    pub alphas: Vec<String>,
    pub steps: usize,
    /// One row per step, one column per order.
    pub entropies: Vec<Vec<f64>>,
    pub min_delta: f64,
    pub witness: Option<WitnessDoc>,
}

impl MonotonicityDoc {
    pub fn from_report(r: &MonotonicityReport) -> Self {
        Self {
            alphas: r.alphas.iter().map(Alpha::to_string).collect(),
            steps: r.steps,
            entropies: r.entropies.clone(),
            min_delta: r.min_delta,
            witness: r.witness.as_ref().map(|(step, p)| WitnessDoc { step: *step, p: p.as_slice().to_vec() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub chain: Vec<MatrixDoc>,
}

impl ChainDoc {
    pub fn to_chain(&self, tol: f64) -> Result<Vec<StochasticMatrix>> {
        self.chain.iter().map(|m| m.to_stochastic(tol)).collect()
    }

    pub fn from_chain(chain: &[StochasticMatrix]) -> Self {
        Self { chain: chain.iter().map(MatrixDoc::from_stochastic).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainSourceDoc {
    Fixed(MatrixDoc),
    Sampled(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateDoc {
    Basis(usize),
    Distribution(Vec<f64>),
}

/// Process configuration, e.g.
/// `{"n": 3, "chain_source": {"sampled": "sinkhorn"}, "rate": 2.0, "horizon": 10.0,
///   "initial_state": {"basis": 0}, "seed": 7, "alphas": ["1", "2", "inf"]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfigDoc {
    pub n: usize,
    pub chain_source: ChainSourceDoc,
    pub rate: f64,
    pub horizon: f64,
    pub initial_state: InitialStateDoc,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
}

impl ProcessConfigDoc {
    pub fn to_config(&self, tol: f64) -> Result<ProcessConfig> {
        let chain_source = match &self.chain_source {
            ChainSourceDoc::Fixed(m) => ChainSource::FixedMatrix(m.to_stochastic(tol)?),
            ChainSourceDoc::Sampled(method) => ChainSource::PerStepSampled(method.parse::<DsMethod>()?),
        };
        let initial_state = match &self.initial_state {
            InitialStateDoc::Basis(i) => InitialState::Basis(*i),
            InitialStateDoc::Distribution(p) => InitialState::Distribution(ProbabilityVector::new(p.clone())?),
        };
        let alphas = match &self.alphas {
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<Alpha>>>()?,
            None => Alpha::defaults(),
        };
        let cfg = ProcessConfig {
            n: self.n,
            chain_source,
            rate: self.rate,
            horizon: self.horizon,
            initial_state,
            seed: self.seed,
            alphas,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn entropy_headers(alphas: &[Alpha]) -> Vec<String> {
    alphas.iter().map(|a| format!("H_{a}")).collect()
}

/// Columns: `step,time,state,H_<α>…,l1_dist_uniform,dobrushin_bound`. Row 0 is the
/// initial state at time 0 with no entropy data.
pub fn trajectory_csv(rec: &TrajectoryRecord) -> String {
    let mut header = vec!["step".to_string(), "time".into(), "state".into()];
    header.extend(entropy_headers(&rec.alphas));
    header.extend(["l1_dist_uniform".to_string(), "dobrushin_bound".into()]);
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..rec.times.len() {
        let mut row = vec![(k + 1).to_string(), rec.times[k].to_string(), rec.states[k].to_string()];
        row.extend(rec.entropies[k].iter().map(f64::to_string));
        row.push(rec.distances[k].to_string());
        row.push(rec.dobrushin_bounds[k].to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Columns: `step,time,H_<α>…,l1_dist_uniform,dobrushin_bound,empirical_l1_dev` then
/// one `freq_<i>` column per state. Step 0 is the initial distribution.
pub fn ensemble_csv(report: &EnsembleReport) -> String {
    let n = report.counts.first().map_or(0, Vec::len);
    let mut header = vec!["step".to_string(), "time".into()];
    header.extend(entropy_headers(&report.trace.alphas));
    header.extend(["l1_dist_uniform".to_string(), "dobrushin_bound".into(), "empirical_l1_dev".into()]);
    header.extend((0..n).map(|i| format!("freq_{i}")));
    let mut out = header.join(",");
    out.push('\n');
    let deviation = report.empirical_deviation();
    let total = report.trajectories as f64;
    for (k, dev) in deviation.iter().enumerate() {
        let time = if k == 0 { 0.0 } else { report.times[k - 1] };
        let mut row = vec![k.to_string(), time.to_string()];
        row.extend(report.trace.entropies[k].iter().map(f64::to_string));
        row.push(report.trace.distances[k].to_string());
        row.push(report.trace.predicted_bounds[k].to_string());
        row.push(dev.to_string());
        row.extend(report.counts[k].iter().map(|&c| (c as f64 / total).to_string()));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a numeric table written by [`trajectory_csv`] or [`ensemble_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> =
        lines.next().ok_or_else(|| Error::Format("empty table".into()))?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let row = l
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Format(format!("`{c}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != header.len() {
                return Err(Error::Format(format!("row has {} cells, header has {}", row.len(), header.len())));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kraus::random_unital_channel;
    use crate::simplex::sample_ds;

    #[test]
    fn matrix_doc_is_byte_stable() {
        let m = sample_ds(4, DsMethod::Sinkhorn, 1).unwrap();
        let text = to_json(&MatrixDoc::from_stochastic(&m)).unwrap();
        let back: MatrixDoc = from_json(&text).unwrap();
        let m2 = back.to_stochastic(1e-12).unwrap();
        assert_eq!(m2.as_row_major(), m.as_row_major());
        assert_eq!(to_json(&MatrixDoc::from_stochastic(&m2)).unwrap(), text);
    }

    #[test]
    fn kraus_doc_round_trip() {
        let k = random_unital_channel(3, 2, 4).unwrap();
        let text = to_json(&KrausDoc::from_kraus(&k)).unwrap();
        assert!(text.contains("\"N\": 2"));
        let back = from_json::<KrausDoc>(&text).unwrap().to_kraus().unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn config_doc_parses() {
        let text = r#"{"n": 3, "chain_source": {"sampled": "sinkhorn"}, "rate": 2.0, "horizon": 10.0,
                       "initial_state": {"basis": 0}, "seed": 7}"#;
        let cfg = from_json::<ProcessConfigDoc>(text).unwrap().to_config(1e-10).unwrap();
        assert_eq!(cfg.alphas, Alpha::defaults());
        assert_eq!(cfg.chain_source, ChainSource::PerStepSampled(DsMethod::Sinkhorn));
        let fixed = r#"{"n": 2, "chain_source": {"fixed": {"n": 2, "data": [0.5, 0.5, 0.5, 0.5]}}, "rate": 1.0,
                        "horizon": 1.0, "initial_state": {"distribution": [0.25, 0.75]}, "seed": 1, "alphas": ["2"]}"#;
        let cfg = from_json::<ProcessConfigDoc>(fixed).unwrap().to_config(1e-10).unwrap();
        assert_eq!(cfg.alphas, vec![Alpha::new(2.0).unwrap()]);
        let bad = r#"{"n": 2, "chain_source": {"sampled": "nope"}, "rate": 1.0, "horizon": 1.0, "initial_state": {"basis": 0}, "seed": 1}"#;
        assert!(from_json::<ProcessConfigDoc>(bad).unwrap().to_config(1e-10).is_err());
    }

    #[test]
    fn malformed_documents() {
        assert!(from_json::<MatrixDoc>("{\"n\": 2}").is_err());
        let doc = ComplexMatrixDoc { n: 2, data: vec![[1.0, 0.0]] };
        assert!(doc.to_matrix().is_err());
        let k = KrausDoc { n: 1, count: 2, operators: vec![vec![[1.0, 0.0]]] };
        assert!(k.to_kraus().is_err());
    }
}
