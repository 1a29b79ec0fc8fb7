use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::bernoulli_nll;
use crate::rng::rng_from_seed;
use crate::types::{FrameObservation, SinrVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative; the ReLU kink at 0 takes slope 0.
    fn slope(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Affine map `(x − offset) / scale` on the sorted dB SINRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNormalizer {
    pub offset: f64,
    pub scale: f64,
}

impl Default for InputNormalizer {
    fn default() -> Self {
        Self {
            offset: 5.0,
            scale: 15.0,
        }
    }
}

/// Network parameters stored flat, layer by layer: the `d_out × d_in`
/// weight matrix (row-major) followed by the `d_out` bias vector. Hidden
/// layers use `hidden`; the output layer is always a sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    dims: Vec<usize>,
    hidden: Activation,
    normalizer: InputNormalizer,
    params: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl MlpModel {
    /// Zero-initialized model with layer widths `dims = [M, hidden.., K]`.
    pub fn zeros(dims: &[usize], hidden: Activation, normalizer: InputNormalizer) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer dims must list at least input and output widths, all positive: {dims:?}"
            )));
        }
        if !(normalizer.scale.is_finite()
            && normalizer.scale != 0.0
            && normalizer.offset.is_finite())
        {
            return Err(Error::InvalidArgument(
                "normalizer scale must be finite and non-zero".into(),
            ));
        }
        Ok(Self {
            dims: dims.to_vec(),
            hidden,
            normalizer,
            params: vec![0.0; param_count(dims)],
        })
    }

    /// He initialization: weights ~ N(0, 2/fan_in), zero biases.
    pub fn new_random(
        dims: &[usize],
        hidden: Activation,
        normalizer: InputNormalizer,
        seed: u64,
    ) -> Result<Self> {
        let mut model = Self::zeros(dims, hidden, normalizer)?;
        let mut rng = rng_from_seed(seed);
        let mut offset = 0;
        for w in dims.windows(2) {
            let (d_in, d_out) = (w[0], w[1]);
            let sd = (2.0 / d_in as f64).sqrt();
            for p in &mut model.params[offset..offset + d_in * d_out] {
                let z: f64 = StandardNormal.sample(&mut rng);
                *p = sd * z;
            }
            offset += d_in * d_out + d_out;
        }
        Ok(model)
    }

    pub fn from_parts(
        dims: &[usize],
        hidden: Activation,
        normalizer: InputNormalizer,
        params: Vec<f64>,
    ) -> Result<Self> {
        let mut model = Self::zeros(dims, hidden, normalizer)?;
        if params.len() != model.params.len() {
            return Err(Error::Dimension {
                expected: model.params.len(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("non-finite model parameter".into()));
        }
        model.params = params;
        Ok(model)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn normalizer(&self) -> InputNormalizer {
        self.normalizer
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `(weights, biases)` of layer `l` (0-based).
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (off, d_in, d_out) = self.layer_offset(l);
        let w = &self.params[off..off + d_in * d_out];
        let b = &self.params[off + d_in * d_out..off + d_in * d_out + d_out];
        (w, b)
    }

    fn layer_offset(&self, l: usize) -> (usize, usize, usize) {
        let off = param_count(&self.dims[..=l]);
        (off, self.dims[l], self.dims[l + 1])
    }

    /// Network input for a channel state: ascending dB SINRs, normalized.
    pub fn features(&self, sinr: &SinrVector) -> Result<Vec<f64>> {
        if sinr.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: sinr.len(),
            });
        }
        let n = self.normalizer;
        Ok(sinr
            .sorted()
            .to_db()
            .into_iter()
            .map(|d| (d - n.offset) / n.scale)
            .collect())
    }

    /// Output probabilities for a prepared feature vector.
    pub fn forward_features(&self, x: &[f64]) -> Vec<f64> {
        let mut act = x.to_vec();
        let last = self.num_layers() - 1;
        for l in 0..=last {
            let (w, b) = self.layer(l);
            let d_in = self.dims[l];
            act = b
                .iter()
                .enumerate()
                .map(|(i, bi)| {
                    let z = bi + dot(&w[i * d_in..(i + 1) * d_in], &act);
                    if l == last {
                        sigmoid(z)
                    } else {
                        self.hidden.apply(z)
                    }
                })
                .collect();
        }
        act
    }

    pub fn predict(&self, sinr: &SinrVector) -> Result<Vec<f64>> {
        Ok(self.forward_features(&self.features(sinr)?))
    }

    /// Masked mean cross-entropy of one feature vector against its events;
    /// adds `scale ×` the parameter gradient into `grad`. Returns the loss.
    /// Frames with no observed event contribute nothing.
    pub(crate) fn accumulate(
        &self,
        x: &[f64],
        events: &[Option<bool>],
        scale: f64,
        grad: &mut [f64],
    ) -> f64 {
        let layers = self.num_layers();
        let observed = events.iter().filter(|e| e.is_some()).count();
        if observed == 0 {
            return 0.0;
        }
        // Forward, keeping pre-activations and activations.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        let mut pres: Vec<Vec<f64>> = Vec::with_capacity(layers);
        acts.push(x.to_vec());
        for l in 0..layers {
            let (w, b) = self.layer(l);
            let d_in = self.dims[l];
            let input = &acts[l];
            let z: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(i, bi)| bi + dot(&w[i * d_in..(i + 1) * d_in], input))
                .collect();
            let a = if l == layers - 1 {
                z.iter().map(|v| sigmoid(*v)).collect()
            } else {
                z.iter().map(|v| self.hidden.apply(*v)).collect()
            };
            pres.push(z);
            acts.push(a);
        }

        let out = &acts[layers];
        let per = 1.0 / observed as f64;
        let mut loss = 0.0;
        // dLoss/dz at the output; sigmoid + log-loss gives (p − e).
        let mut delta: Vec<f64> = out
            .iter()
            .zip(events)
            .map(|(p, e)| match e {
                Some(err) => {
                    loss += per * bernoulli_nll(*err, *p);
                    per * (p - if *err { 1.0 } else { 0.0 })
                }
                None => 0.0,
            })
            .collect();

        for l in (0..layers).rev() {
            let (off, d_in, d_out) = self.layer_offset(l);
            let input = &acts[l];
            {
                let (gw, gb) = grad[off..off + d_in * d_out + d_out].split_at_mut(d_in * d_out);
                for i in 0..d_out {
                    let di = scale * delta[i];
                    if di == 0.0 {
                        continue;
                    }
                    gb[i] += di;
                    for (g, a) in gw[i * d_in..(i + 1) * d_in].iter_mut().zip(input) {
                        *g += di * a;
                    }
                }
            }
            if l > 0 {
                let (w, _) = self.layer(l);
                let z_prev = &pres[l - 1];
                let mut next = vec![0.0; d_in];
                for (i, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    for (n, wv) in next.iter_mut().zip(&w[i * d_in..(i + 1) * d_in]) {
                        *n += d * wv;
                    }
                }
                for (n, z) in next.iter_mut().zip(z_prev) {
                    *n *= self.hidden.slope(*z);
                }
                delta = next;
            }
        }
        loss
    }

    /// Masked mean loss over a batch of prepared samples, and its gradient.
    pub(crate) fn batch_loss_grad(&self, samples: &[(&[f64], &[Option<bool>])]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / samples.len() as f64;
        let mut loss = 0.0;
        for (x, e) in samples {
            loss += self.accumulate(x, e, scale, &mut grad);
        }
        (loss * scale, grad)
    }

    /// Masked mean loss without gradients.
    pub(crate) fn batch_loss(&self, samples: &[(&[f64], &[Option<bool>])]) -> f64 {
        let mut total = 0.0;
        for (x, events) in samples {
            let p = self.forward_features(x);
            let observed = events.iter().filter(|e| e.is_some()).count();
            if observed == 0 {
                continue;
            }
            let s: f64 = p
                .iter()
                .zip(events.iter())
                .filter_map(|(p, e)| e.map(|err| bernoulli_nll(err, *p)))
                .sum();
            total += s / observed as f64;
        }
        total / samples.len() as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mlp_forward(model: &MlpModel, sinr: &SinrVector) -> Result<Vec<f64>> {
    model.predict(sinr)
}

fn prepare(model: &MlpModel, batch: &[FrameObservation]) -> Result<Vec<Vec<f64>>> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let k = model.output_dim();
    batch
        .iter()
        .map(|o| {
            if o.events.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    got: o.events.len(),
                });
            }
            model.features(&o.sinr)
        })
        .collect()
}

/// Mean over frames of the masked per-frame cross-entropy, and the exact
/// gradient with respect to every parameter (flat layout of
/// [`MlpModel::params`]).
pub fn loss_and_gradients(model: &MlpModel, batch: &[FrameObservation]) -> Result<(f64, Vec<f64>)> {
    let feats = prepare(model, batch)?;
    let samples: Vec<(&[f64], &[Option<bool>])> = feats
        .iter()
        .zip(batch)
        .map(|(f, o)| (f.as_slice(), o.events.as_slice()))
        .collect();
    Ok(model.batch_loss_grad(&samples))
}

/// Largest relative gap between the analytic gradient and central finite
/// differences with step `eps`, over all parameters:
/// `|a − c| / max(1e−8, |a| + |c|)`.
pub fn grad_check(model: &MlpModel, batch: &[FrameObservation], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(
            "finite-difference step must be positive".into(),
        ));
    }
    let feats = prepare(model, batch)?;
    let samples: Vec<(&[f64], &[Option<bool>])> = feats
        .iter()
        .zip(batch)
        .map(|(f, o)| (f.as_slice(), o.events.as_slice()))
        .collect();
    let (_, analytic) = model.batch_loss_grad(&samples);
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (i, a) in analytic.iter().enumerate() {
        let orig = probe.params[i];
        probe.params[i] = orig + eps;
        let up = probe.batch_loss(&samples);
        probe.params[i] = orig - eps;
        let down = probe.batch_loss(&samples);
        probe.params[i] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
