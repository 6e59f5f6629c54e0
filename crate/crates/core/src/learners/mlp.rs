//! One-hidden-layer network of logistic units trained by per-example
//! gradient descent on squared error.
//!
//! Training holds out `validation_fraction` of the examples, measures
//! validation mean squared error after every epoch (and before the first),
//! and returns the weights from the best epoch. It stops once `patience`
//! epochs pass without a strict improvement. Weight initialization and the
//! per-epoch presentation order both come from the seed.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::{derive_tagged, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpOptions {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub patience: usize,
    /// Initial weights are uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    pub seed: u64,
}

impl Default for MlpOptions {
    fn default() -> Self {
        MlpOptions {
            hidden_units: 16,
            learning_rate: 0.1,
            max_epochs: 200,
            validation_fraction: 0.2,
            patience: 20,
            init_range: 0.5,
            seed: 0,
        }
    }
}

impl MlpOptions {
    fn check(&self) -> Result<()> {
        if self.hidden_units == 0 {
            return Err(Error::invalid("hidden_units must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("bad learning rate {}", self.learning_rate)));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "validation fraction {} outside (0, 1)",
                self.validation_fraction
            )));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(Error::invalid("bad init_range"));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights are row-major: `w1[h * inputs + i]`, `w2[o * hidden + h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradient of the loss, shaped like the model's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MlpReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_validation_mse: f64,
    pub validation_mse: Vec<f64>,
}

impl MlpModel {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> MlpModel {
        MlpModel {
            inputs,
            hidden,
            outputs,
            w1: vec![0.0; hidden * inputs],
            b1: vec![0.0; hidden],
            w2: vec![0.0; outputs * hidden],
            b2: vec![0.0; outputs],
        }
    }

    pub fn random(inputs: usize, hidden: usize, outputs: usize, range: f64, seed: u64) -> MlpModel {
        let mut rng = rng_from_seed(seed);
        let mut m = MlpModel::zeros(inputs, hidden, outputs);
        for w in
            m.w1.iter_mut()
                .chain(m.b1.iter_mut())
                .chain(m.w2.iter_mut())
                .chain(m.b2.iter_mut())
        {
            *w = if range > 0.0 {
                rng.gen_range(-range..=range)
            } else {
                0.0
            };
        }
        m
    }

    fn forward_unchecked(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h: Vec<f64> = (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * self.inputs..(j + 1) * self.inputs];
                sigmoid(self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            })
            .collect();
        let o: Vec<f64> = (0..self.outputs)
            .map(|k| {
                let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
                sigmoid(self.b2[k] + row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>())
            })
            .collect();
        (h, o)
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::invalid(format!(
                "input of length {} for a network with {} inputs",
                x.len(),
                self.inputs
            )));
        }
        Ok(())
    }

    /// Output activations, each in (0, 1).
    pub fn outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        Ok(self.forward_unchecked(x).1)
    }

    /// `0.5 * sum_k (o_k - t_k)^2` for one example.
    pub fn loss(&self, x: &[f64], t: &[f64]) -> Result<f64> {
        let o = self.outputs(x)?;
        if t.len() != self.outputs {
            return Err(Error::invalid("target length differs from output count"));
        }
        Ok(0.5 * o.iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>())
    }

    /// Backpropagated gradient of [`MlpModel::loss`].
    pub fn gradient(&self, x: &[f64], t: &[f64]) -> Result<MlpGradient> {
        self.check_arity(x)?;
        if t.len() != self.outputs {
            return Err(Error::invalid("target length differs from output count"));
        }
        Ok(self.gradient_unchecked(x, t))
    }

    fn gradient_unchecked(&self, x: &[f64], t: &[f64]) -> MlpGradient {
        let (h, o) = self.forward_unchecked(x);
        let d_out: Vec<f64> = o.iter().zip(t).map(|(o, t)| (o - t) * o * (1.0 - o)).collect();
        let mut w2 = vec![0.0; self.w2.len()];
        for (k, d) in d_out.iter().enumerate() {
            for (j, hv) in h.iter().enumerate() {
                w2[k * self.hidden + j] = d * hv;
            }
        }
        let d_hid: Vec<f64> = (0..self.hidden)
            .map(|j| {
                let back: f64 = (0..self.outputs).map(|k| self.w2[k * self.hidden + j] * d_out[k]).sum();
                back * h[j] * (1.0 - h[j])
            })
            .collect();
        let mut w1 = vec![0.0; self.w1.len()];
        for (j, d) in d_hid.iter().enumerate() {
            for (i, xv) in x.iter().enumerate() {
                w1[j * self.inputs + i] = d * xv;
            }
        }
        MlpGradient {
            w1,
            b1: d_hid,
            w2,
            b2: d_out,
        }
    }

    fn step(&mut self, g: &MlpGradient, lr: f64) {
        for (w, d) in self.w1.iter_mut().zip(&g.w1) {
            *w -= lr * d;
        }
        for (w, d) in self.b1.iter_mut().zip(&g.b1) {
            *w -= lr * d;
        }
        for (w, d) in self.w2.iter_mut().zip(&g.w2) {
            *w -= lr * d;
        }
        for (w, d) in self.b2.iter_mut().zip(&g.b2) {
            *w -= lr * d;
        }
    }

    /// Mean over examples and outputs of the squared error.
    pub fn mse(&self, xs: &[Vec<f64>], ts: &[Vec<f64>]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let total: f64 = xs
            .iter()
            .zip(ts)
            .map(|(x, t)| {
                let o = self.forward_unchecked(x).1;
                o.iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>()
            })
            .sum();
        total / (xs.len() * self.outputs) as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mlp 1");
        let _ = writeln!(out, "layers {} {} {}", self.inputs, self.hidden, self.outputs);
        let line = |out: &mut String, v: &[f64]| {
            let s: Vec<String> = v.iter().map(|w| format!("{w:.16e}")).collect();
            let _ = writeln!(out, "{}", s.join(" "));
        };
        let _ = writeln!(out, "w1");
        for row in self.w1.chunks(self.inputs.max(1)) {
            line(&mut out, row);
        }
        let _ = writeln!(out, "b1");
        line(&mut out, &self.b1);
        let _ = writeln!(out, "w2");
        for row in self.w2.chunks(self.hidden) {
            line(&mut out, row);
        }
        let _ = writeln!(out, "b2");
        line(&mut out, &self.b2);
        out
    }

    pub fn from_text(text: &str) -> Result<MlpModel> {
        let bad = |m: &str| Error::Bundle(format!("network: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("mlp 1") {
            return Err(bad("missing `mlp 1` header"));
        }
        let sizes: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("layers "))
            .ok_or_else(|| bad("missing layers line"))?
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_>>()?;
        let [inputs, hidden, outputs] = sizes[..] else {
            return Err(bad("expected three layer sizes"));
        };
        let mut m = MlpModel::zeros(inputs, hidden, outputs);
        let mut section = |name: &str, rows: usize, width: usize| -> Result<Vec<f64>> {
            if lines.next().map(str::trim) != Some(name) {
                return Err(bad(&format!("missing `{name}` section")));
            }
            let mut v = Vec::with_capacity(rows * width);
            for _ in 0..rows {
                let l = lines.next().ok_or_else(|| bad("truncated weights"))?;
                let row: Vec<f64> = l
                    .split_whitespace()
                    .map(|w| w.parse().map_err(|_| bad("bad weight")))
                    .collect::<Result<_>>()?;
                if row.len() != width {
                    return Err(bad(&format!("`{name}` row of width {} (want {width})", row.len())));
                }
                v.extend(row);
            }
            Ok(v)
        };
        m.w1 = section("w1", if inputs == 0 { 0 } else { hidden }, inputs)?;
        if inputs == 0 {
            m.w1.clear();
        }
        m.b1 = section("b1", 1, hidden)?;
        m.w2 = section("w2", outputs, hidden)?;
        m.b2 = section("b2", 1, outputs)?;
        Ok(m)
    }
}

/// Train on raw vectors. `targets[i]` has one entry per output, in [0, 1].
pub fn train_mlp_vectors(xs: &[Vec<f64>], targets: &[Vec<f64>], opts: &MlpOptions) -> Result<(MlpModel, MlpReport)> {
    opts.check()?;
    if xs.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} targets for {} examples",
            targets.len(),
            xs.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("a network needs at least 2 examples"));
    }
    let inputs = xs[0].len();
    let outputs = targets[0].len();
    if outputs == 0 {
        return Err(Error::invalid("targets have no outputs"));
    }
    if xs.iter().any(|x| x.len() != inputs) || targets.iter().any(|t| t.len() != outputs) {
        return Err(Error::invalid("ragged inputs or targets"));
    }
    if targets.iter().flatten().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::invalid("targets must lie in [0, 1]"));
    }

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(&mut rng_from_seed(derive_tagged(opts.seed, 1, 0)));
    let n_val = ((xs.len() as f64 * opts.validation_fraction).round() as usize).clamp(1, xs.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut val_idx = val_idx.to_vec();
    val_idx.sort_unstable();
    let mut train_idx = train_idx.to_vec();
    train_idx.sort_unstable();
    let vx: Vec<Vec<f64>> = val_idx.iter().map(|&i| xs[i].clone()).collect();
    let vt: Vec<Vec<f64>> = val_idx.iter().map(|&i| targets[i].clone()).collect();

    let mut model = MlpModel::random(
        inputs,
        opts.hidden_units,
        outputs,
        opts.init_range,
        derive_tagged(opts.seed, 2, 0),
    );
    let mut shuffle_rng = rng_from_seed(derive_tagged(opts.seed, 3, 0));
    let mut best = model.clone();
    let mut best_mse = model.mse(&vx, &vt);
    if !best_mse.is_finite() {
        return Err(Error::TrainingDiverged { epoch: 0 });
    }
    let mut report = MlpReport {
        epochs_run: 0,
        best_epoch: 0,
        best_validation_mse: best_mse,
        validation_mse: vec![best_mse],
    };
    let mut since_best = 0;
    let mut epoch_order = train_idx.clone();
    for epoch in 1..=opts.max_epochs {
        epoch_order.shuffle(&mut shuffle_rng);
        for &i in &epoch_order {
            let g = model.gradient_unchecked(&xs[i], &targets[i]);
            model.step(&g, opts.learning_rate);
        }
        let mse = model.mse(&vx, &vt);
        let mut params = model.w1.iter().chain(&model.b1).chain(&model.w2).chain(&model.b2);
        if !mse.is_finite() || params.any(|w| !w.is_finite()) {
            return Err(Error::TrainingDiverged { epoch });
        }
        report.epochs_run = epoch;
        report.validation_mse.push(mse);
        if mse < best_mse {
            best_mse = mse;
            best = model.clone();
            report.best_epoch = epoch;
            report.best_validation_mse = mse;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.patience {
                break;
            }
        }
    }
    Ok((best, report))
}

/// Train on a dataset whose features are all numeric (see
/// [`crate::data::encode_numeric`]).
pub fn train_mlp(data: &Dataset, targets: &[Vec<f64>], opts: &MlpOptions) -> Result<(MlpModel, MlpReport)> {
    if !data.schema.is_numeric() {
        return Err(Error::invalid(
            "the network learner needs numeric features; encode categorical features first",
        ));
    }
    train_mlp_vectors(&data.rows, targets, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_problem() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut xs = Vec::new();
        let mut ts = Vec::new();
        for _ in 0..10 {
            for (a, b) in [(0., 0.), (0., 1.), (1., 0.), (1., 1.)] {
                xs.push(vec![a, b]);
                ts.push(vec![if a == 1.0 && b == 1.0 { 1.0 } else { 0.0 }]);
            }
        }
        (xs, ts)
    }

    #[test]
    fn learns_and() {
        let (xs, ts) = and_problem();
        let opts = MlpOptions {
            hidden_units: 2,
            learning_rate: 0.5,
            max_epochs: 2000,
            patience: 2000,
            seed: 3,
            ..MlpOptions::default()
        };
        let (m, _) = train_mlp_vectors(&xs, &ts, &opts).unwrap();
        for (x, t) in xs.iter().zip(&ts) {
            let o = m.outputs(x).unwrap()[0];
            assert_eq!(o > 0.5, t[0] > 0.5, "{x:?} -> {o}");
        }
    }

    #[test]
    fn zero_rate_keeps_initial_weights() {
        let (xs, ts) = and_problem();
        let opts = MlpOptions {
            learning_rate: 0.0,
            max_epochs: 5,
            seed: 9,
            ..MlpOptions::default()
        };
        let (m, r) = train_mlp_vectors(&xs, &ts, &opts).unwrap();
        let init = MlpModel::random(2, opts.hidden_units, 1, opts.init_range, derive_tagged(9, 2, 0));
        assert_eq!(m, init);
        assert_eq!(r.best_epoch, 0);
    }

    #[test]
    fn zero_weights_give_half() {
        let m = MlpModel::zeros(3, 4, 2);
        assert_eq!(m.outputs(&[1.0, -2.0, 3.0]).unwrap(), [0.5, 0.5]);
        assert!(m.outputs(&[1.0]).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let (mut xs, ts) = and_problem();
        for x in xs.iter_mut() {
            x[0] = f64::INFINITY;
        }
        match train_mlp_vectors(&xs, &ts, &MlpOptions::default()) {
            Err(Error::TrainingDiverged { epoch }) => assert!(epoch <= 1),
            other => panic!("{other:?}"),
        }
        // a single non-finite example poisons the weights during an epoch
        let (mut xs, ts) = and_problem();
        xs[0][0] = f64::INFINITY;
        let opts = MlpOptions {
            validation_fraction: 0.1,
            ..MlpOptions::default()
        };
        assert!(matches!(
            train_mlp_vectors(&xs, &ts, &opts),
            Err(Error::TrainingDiverged { .. })
        ));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let m = MlpModel::random(3, 4, 2, 1.3, 77);
        let back = MlpModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(MlpModel::from_text("mlp 1\nlayers 1 1 1\nw1\n0\n").is_err());
    }
}
