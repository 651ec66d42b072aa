use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{FeatureVector, FEATURE_LEN};
use crate::error::{Error, Result};

/// Layer widths of the policy network, input first.
pub const ARCHITECTURE: [usize; 5] = [FEATURE_LEN, 512, 256, 128, 15];

const FORMAT_HEADER: &str = "lanefree-mlp 1";

/// Fully connected layer; `weights` is `inputs × outputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }
}

/// Feed-forward classifier: ReLU hidden layers and a softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Dense>,
    /// Per-feature divisors applied to raw inputs, when enabled.
    input_scale: Option<Vec<f64>>,
}

/// `c = a·b + beta·c` for row-major `a` (m×k) and `b` (k×n). With `a_t` the
/// slice holds aᵀ (k×m); with `b_t` it holds bᵀ (n×k).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    beta: f64,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above guarantee every strided access stays in bounds.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub(crate) fn softmax_rows(z: &mut [f64], width: usize) {
    for row in z.chunks_exact_mut(width) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// `z = x·W + b` for every row of `x`.
pub(crate) fn affine(layer: &Dense, x: &[f64], rows: usize) -> Vec<f64> {
    let mut z = vec![0.0; rows * layer.outputs];
    gemm(rows, layer.inputs, layer.outputs, x, false, &layer.weights, false, &mut z, 0.0);
    for row in z.chunks_exact_mut(layer.outputs) {
        for (v, b) in row.iter_mut().zip(&layer.bias) {
            *v += b;
        }
    }
    z
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::config(format!(
            "need at least two non-zero layer widths, got {widths:?}"
        )));
    }
    Ok(())
}

impl MlpModel {
    /// All weights and biases zero; every output is uniform.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        check_widths(widths)?;
        Ok(MlpModel {
            layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            input_scale: None,
        })
    }

    /// He-uniform weights, U(±sqrt(6 / fan_in)), zero biases.
    pub fn he_uniform(widths: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut model.layers {
            let limit = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(model)
    }

    pub fn with_input_scale(mut self, scale: Vec<f64>) -> Result<Self> {
        if scale.len() != self.input_width() || scale.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::config(format!(
                "input scale needs {} positive entries",
                self.input_width()
            )));
        }
        self.input_scale = Some(scale);
        Ok(self)
    }

    pub fn input_scale(&self) -> Option<&[f64]> {
        self.input_scale.as_deref()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Checks the batch shape and returns the scaled inputs and row count.
    pub(crate) fn prepare_inputs(&self, batch: &[f64]) -> Result<(Vec<f64>, usize)> {
        let width = self.input_width();
        if batch.is_empty() || !batch.len().is_multiple_of(width) {
            return Err(Error::contract(format!(
                "batch of {} values is not a non-empty multiple of the input width {width}",
                batch.len()
            )));
        }
        let mut x = batch.to_vec();
        if let Some(scale) = &self.input_scale {
            for row in x.chunks_exact_mut(width) {
                for (v, s) in row.iter_mut().zip(scale) {
                    *v /= s;
                }
            }
        }
        Ok((x, batch.len() / width))
    }

    /// Pre-softmax outputs for a row-major batch.
    pub fn logits(&self, batch: &[f64]) -> Result<Vec<f64>> {
        let (mut x, rows) = self.prepare_inputs(batch)?;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            x = affine(layer, &x, rows);
            if i < last {
                x.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(x)
    }

    /// Class probabilities for a row-major batch; row `i` of the result does
    /// not depend on the other rows.
    pub fn forward(&self, batch: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.logits(batch)?;
        softmax_rows(&mut z, self.output_width());
        Ok(z)
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<Vec<f64>> {
        self.forward(features)
    }

    pub fn predict_batch(&self, features: &[FeatureVector]) -> Result<Vec<f64>> {
        self.forward(features.as_flattened())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let widths: Vec<String> = self.widths().iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "widths {}", widths.join(" "));
        match &self.input_scale {
            None => out.push_str("scale none\n"),
            Some(s) => {
                let _ = writeln!(out, "scale {}", join(s));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "weight {i} {}", join(&layer.weights));
            let _ = writeln!(out, "bias {i} {}", join(&layer.bias));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }

    /// Parses the text produced by [`MlpModel::to_text`]; `origin` names the
    /// source in error messages.
    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let fail = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| fail(0, format!("unexpected end of file, expected {what}")))
        };

        let (n, header) = next("header")?;
        if header != FORMAT_HEADER {
            return Err(fail(n, format!("expected `{FORMAT_HEADER}`, found `{header}`")));
        }

        let (n, line) = next("widths")?;
        let widths = line
            .strip_prefix("widths ")
            .ok_or_else(|| fail(n, "expected `widths`".into()))?
            .split_whitespace()
            .map(|w| w.parse::<usize>().map_err(|e| fail(n, format!("bad width `{w}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut model = Self::zeros(&widths).map_err(|e| fail(n, e.to_string()))?;

        let parse_floats = |n: usize, body: &str, expected: usize| -> Result<Vec<f64>> {
            let v = body
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| fail(n, format!("bad number `{x}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != expected {
                return Err(fail(n, format!("expected {expected} values, found {}", v.len())));
            }
            Ok(v)
        };

        let (n, line) = next("scale")?;
        match line.strip_prefix("scale ") {
            Some("none") => {}
            Some(body) => {
                let s = parse_floats(n, body, model.input_width())?;
                model = model.with_input_scale(s).map_err(|e| fail(n, e.to_string()))?;
            }
            None => return Err(fail(n, "expected `scale`".into())),
        }

        for i in 0..model.layers.len() {
            for kind in ["weight", "bias"] {
                let (n, line) = next(kind)?;
                let prefix = format!("{kind} {i} ");
                let body = line
                    .strip_prefix(&prefix)
                    .ok_or_else(|| fail(n, format!("expected `{kind} {i}`")))?;
                let layer = &mut model.layers[i];
                if kind == "weight" {
                    layer.weights = parse_floats(n, body, layer.inputs * layer.outputs)?;
                } else {
                    layer.bias = parse_floats(n, body, layer.outputs)?;
                }
            }
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_inputs(rows: usize, width: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows * width).map(|_| rng.random_range(-40.0..100.0)).collect()
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MlpModel::zeros(&ARCHITECTURE).unwrap();
        let p = m.forward(&random_inputs(3, 62, 1)).unwrap();
        assert!(p.iter().all(|&v| v == 1.0 / 15.0));
    }

    #[test]
    fn rows_are_distributions() {
        let m = MlpModel::he_uniform(&ARCHITECTURE, 4).unwrap();
        let p = m.forward(&random_inputs(50, 62, 2)).unwrap();
        for row in p.chunks(15) {
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn batch_rows_equal_single_rows_exactly() {
        let m = MlpModel::he_uniform(&ARCHITECTURE, 5).unwrap();
        let x = random_inputs(100, 62, 3);
        let batch = m.forward(&x).unwrap();
        for (i, row) in x.chunks(62).enumerate() {
            assert_eq!(m.forward(row).unwrap(), batch[i * 15..(i + 1) * 15]);
        }
        let same: Vec<f64> = x[..62].repeat(7);
        let out = m.forward(&same).unwrap();
        assert!(out.chunks(15).all(|r| r == &out[..15]));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let m = MlpModel::zeros(&ARCHITECTURE).unwrap();
        assert!(matches!(m.forward(&[0.0; 61]), Err(Error::Contract(_))));
        assert!(matches!(m.forward(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = MlpModel::he_uniform(&[62, 9, 15], 6)
            .unwrap()
            .with_input_scale(super::super::features::feature_scale().to_vec())
            .unwrap();
        let back = MlpModel::from_text(&m.to_text(), Path::new("m.txt")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let m = MlpModel::zeros(&[3, 2]).unwrap();
        let text = m.to_text().replace("bias 0 0.0000000000000000e0 0.0000000000000000e0", "bias 0 1");
        match MlpModel::from_text(&text, Path::new("m.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }
}
