//! Discrete memoryless source/channel model.
//!
//! A [`DmsSpec`] couples a joint law over the binary auxiliary input `V` and
//! the binary channel input `X` with three component channels `X -> Y1`,
//! `X -> Y2` and `X -> Z`. The outputs are conditionally independent given
//! `X`, so every quantity the coding scheme needs is a function of the
//! per-receiver marginals.
//!
//! Every conditioning used by the set construction reduces to a per-symbol
//! joint law of one binary "source" bit and a finite side observation. That
//! reduction lives in [`SymbolLaw`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("probability {value} at {location} is outside [0, 1]")]
    InvalidProbability { location: String, value: f64 },
    #[error("{location} sums to {sum}, expected 1")]
    NotNormalized { location: String, sum: f64 },
    #[error("{location} has an empty output alphabet")]
    EmptyAlphabet { location: String },
    #[error(
        "degenerate channel: H(V|Z) = {h_v_given_z:.6} must exceed H(V|Y1) = {h_v_given_y1:.6}"
    )]
    DegenerateChannel {
        h_v_given_z: f64,
        h_v_given_y1: f64,
    },
}

/// One binary-input component channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentChannel {
    /// Binary erasure channel; output symbol 2 is the erasure.
    Bec { erasure: f64 },
    /// Binary symmetric channel.
    Bsc { crossover: f64 },
    /// Arbitrary row-stochastic matrix, one row per input bit.
    Matrix { rows: [Vec<f64>; 2] },
}

impl ComponentChannel {
    pub const ERASURE: usize = 2;

    /// Noiseless copy of the input.
    pub fn identity() -> Self {
        ComponentChannel::Bsc { crossover: 0.0 }
    }

    /// Channel whose output does not depend on the input.
    pub fn useless() -> Self {
        ComponentChannel::Bec { erasure: 1.0 }
    }

    pub fn output_size(&self) -> usize {
        match self {
            ComponentChannel::Bec { .. } => 3,
            ComponentChannel::Bsc { .. } => 2,
            ComponentChannel::Matrix { rows } => rows[0].len(),
        }
    }

    /// p(y | x).
    pub fn transition(&self, x: u8, y: usize) -> f64 {
        match *self {
            ComponentChannel::Bec { erasure } => {
                if y == Self::ERASURE {
                    erasure
                } else if y == x as usize {
                    1.0 - erasure
                } else {
                    0.0
                }
            }
            ComponentChannel::Bsc { crossover } => {
                if y > 1 {
                    0.0
                } else if y == x as usize {
                    1.0 - crossover
                } else {
                    crossover
                }
            }
            ComponentChannel::Matrix { ref rows } => rows[x as usize].get(y).copied().unwrap_or(0.0),
        }
    }

    pub fn validate(&self, location: &str) -> Result<(), ChannelError> {
        match self {
            ComponentChannel::Bec { erasure: p } | ComponentChannel::Bsc { crossover: p } => {
                check_probability(*p, location)
            }
            ComponentChannel::Matrix { rows } => {
                if rows[0].is_empty() || rows[0].len() != rows[1].len() {
                    return Err(ChannelError::EmptyAlphabet {
                        location: location.to_string(),
                    });
                }
                for (x, row) in rows.iter().enumerate() {
                    let loc = format!("{location} row {x}");
                    for &p in row {
                        check_probability(p, &loc)?;
                    }
                    check_sum(row.iter().sum(), &loc)?;
                }
                Ok(())
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for y in 0..self.output_size() {
            let p = self.transition(x, y);
            if p > 0.0 {
                acc += p;
                last = y;
                if u < acc {
                    return y;
                }
            }
        }
        last
    }
}

fn check_probability(p: f64, location: &str) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(ChannelError::InvalidProbability {
            location: location.to_string(),
            value: p,
        });
    }
    Ok(())
}

fn check_sum(sum: f64, location: &str) -> Result<(), ChannelError> {
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(ChannelError::NotNormalized {
            location: location.to_string(),
            sum,
        });
    }
    Ok(())
}

/// Which channel output a party observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observer {
    Y1,
    Y2,
    Z,
}

/// The six conditionings that define the polarized index sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    V,
    VGivenY1,
    VGivenY2,
    VGivenZ,
    XGivenV,
    XGivenVZ,
}

impl Conditioning {
    pub const ALL: [Conditioning; 6] = [
        Conditioning::V,
        Conditioning::VGivenY1,
        Conditioning::VGivenY2,
        Conditioning::VGivenZ,
        Conditioning::XGivenV,
        Conditioning::XGivenVZ,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Conditioning::V => "V",
            Conditioning::VGivenY1 => "V|Y1",
            Conditioning::VGivenY2 => "V|Y2",
            Conditioning::VGivenZ => "V|Z",
            Conditioning::XGivenV => "X|V",
            Conditioning::XGivenVZ => "X|VZ",
        }
    }

    /// True for the conditionings whose source bit is `X` rather than `V`.
    pub fn is_x_layer(self) -> bool {
        matches!(self, Conditioning::XGivenV | Conditioning::XGivenVZ)
    }
}

/// Per-symbol joint law `q[s][b] = P(B = b, S = s)` of a binary source bit and
/// a finite side observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLaw {
    pub joint: Vec<[f64; 2]>,
}

impl SymbolLaw {
    pub fn side_size(&self) -> usize {
        self.joint.len()
    }

    pub fn source_marginal(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for row in &self.joint {
            m[0] += row[0];
            m[1] += row[1];
        }
        m
    }

    /// H(B | S) in bits.
    pub fn conditional_entropy(&self) -> f64 {
        self.joint
            .iter()
            .map(|row| {
                let total = row[0] + row[1];
                if total <= 0.0 {
                    0.0
                } else {
                    total * binary_entropy(row[0] / total)
                }
            })
            .sum()
    }

    /// H(B) in bits.
    pub fn source_entropy(&self) -> f64 {
        binary_entropy(self.source_marginal()[0])
    }

    /// Samples `(b, s)` from the joint law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u8, usize) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = (0, 0);
        for (s, row) in self.joint.iter().enumerate() {
            for b in 0..2 {
                if row[b] > 0.0 {
                    acc += row[b];
                    last = (b as u8, s);
                    if u < acc {
                        return last;
                    }
                }
            }
        }
        last
    }
}

/// Entropy of a Bernoulli law with `P(0) = p0`, in bits.
pub fn binary_entropy(p0: f64) -> f64 {
    entropy_bits(&[p0, 1.0 - p0])
}

/// Shannon entropy in bits of a (not necessarily normalized) weight vector;
/// zero weights contribute nothing.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

/// Channel outputs for one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockOutputs {
    pub y1: Vec<usize>,
    pub y2: Vec<usize>,
    pub z: Vec<usize>,
}

impl BlockOutputs {
    pub fn observed(&self, observer: Observer) -> &[usize] {
        match observer {
            Observer::Y1 => &self.y1,
            Observer::Y2 => &self.y2,
            Observer::Z => &self.z,
        }
    }
}

/// The joint source/channel law over binary `(V, X)` and three outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmsSpec {
    /// `P(V = v, X = x)` in the order 00, 01, 10, 11.
    pub input_law: [f64; 4],
    pub y1: ComponentChannel,
    pub y2: ComponentChannel,
    pub z: ComponentChannel,
}

/// Result of checking the degradedness-style ordering assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelOrderReport {
    pub h_v_given_z: f64,
    pub h_v_given_y1: f64,
    pub h_v_given_y2: f64,
    pub satisfies_assumption: bool,
    pub swapped: bool,
}

/// Target rates of the implemented corner point, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerRates {
    pub private: f64,
    pub confidential: f64,
    pub randomization: f64,
}

impl DmsSpec {
    /// `V = X` uniform, each output an erasure channel.
    pub fn bec_triple(eps_y1: f64, eps_y2: f64, eps_z: f64) -> Self {
        DmsSpec {
            input_law: [0.5, 0.0, 0.0, 0.5],
            y1: ComponentChannel::Bec { erasure: eps_y1 },
            y2: ComponentChannel::Bec { erasure: eps_y2 },
            z: ComponentChannel::Bec { erasure: eps_z },
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for (i, &p) in self.input_law.iter().enumerate() {
            check_probability(p, &format!("input_law[{i}]"))?;
        }
        check_sum(self.input_law.iter().sum(), "input_law")?;
        self.y1.validate("y1")?;
        self.y2.validate("y2")?;
        self.z.validate("z")?;
        Ok(())
    }

    pub fn channel(&self, observer: Observer) -> &ComponentChannel {
        match observer {
            Observer::Y1 => &self.y1,
            Observer::Y2 => &self.y2,
            Observer::Z => &self.z,
        }
    }

    /// `P(V = v, X = x)`.
    pub fn p_vx(&self, v: u8, x: u8) -> f64 {
        self.input_law[2 * v as usize + x as usize]
    }

    /// True when `X = V` with probability one.
    pub fn x_equals_v(&self) -> bool {
        self.input_law[1] == 0.0 && self.input_law[2] == 0.0
    }

    /// Number of side symbols for a conditioning.
    pub fn side_size(&self, cond: Conditioning) -> usize {
        match cond {
            Conditioning::V => 1,
            Conditioning::VGivenY1 => self.y1.output_size(),
            Conditioning::VGivenY2 => self.y2.output_size(),
            Conditioning::VGivenZ => self.z.output_size(),
            Conditioning::XGivenV => 2,
            Conditioning::XGivenVZ => 2 * self.z.output_size(),
        }
    }

    /// Side-symbol index of one channel use for a conditioning.
    pub fn side_symbol(&self, cond: Conditioning, v: u8, y1: usize, y2: usize, z: usize) -> usize {
        match cond {
            Conditioning::V => 0,
            Conditioning::VGivenY1 => y1,
            Conditioning::VGivenY2 => y2,
            Conditioning::VGivenZ => z,
            Conditioning::XGivenV => v as usize,
            Conditioning::XGivenVZ => v as usize * self.z.output_size() + z,
        }
    }

    /// Per-symbol joint law of the source bit and side observation.
    pub fn symbol_law(&self, cond: Conditioning) -> SymbolLaw {
        let size = self.side_size(cond);
        let mut joint = vec![[0.0; 2]; size];
        let observed = match cond {
            Conditioning::VGivenY1 => Some(&self.y1),
            Conditioning::VGivenY2 => Some(&self.y2),
            Conditioning::VGivenZ | Conditioning::XGivenVZ => Some(&self.z),
            _ => None,
        };
        for v in 0..2u8 {
            for x in 0..2u8 {
                let pvx = self.p_vx(v, x);
                if pvx == 0.0 {
                    continue;
                }
                let source = if cond.is_x_layer() { x } else { v } as usize;
                match observed {
                    None => {
                        let s = self.side_symbol(cond, v, 0, 0, 0);
                        joint[s][source] += pvx;
                    }
                    Some(ch) => {
                        for y in 0..ch.output_size() {
                            let s = self.side_symbol(cond, v, y, y, y);
                            joint[s][source] += pvx * ch.transition(x, y);
                        }
                    }
                }
            }
        }
        SymbolLaw { joint }
    }

    pub fn conditional_entropy(&self, cond: Conditioning) -> f64 {
        self.symbol_law(cond).conditional_entropy()
    }

    pub fn h_v(&self) -> f64 {
        self.symbol_law(Conditioning::V).source_entropy()
    }

    /// Exchanges the roles of the two legitimate receivers.
    pub fn swapped(&self) -> Self {
        DmsSpec {
            input_law: self.input_law,
            y1: self.y2.clone(),
            y2: self.y1.clone(),
            z: self.z.clone(),
        }
    }

    /// Draws one `(v, x)` pair from the input law.
    pub fn sample_input<R: Rng + ?Sized>(&self, rng: &mut R) -> (u8, u8) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = (0, 0);
        for idx in 0..4 {
            let p = self.input_law[idx];
            if p > 0.0 {
                acc += p;
                last = ((idx / 2) as u8, (idx % 2) as u8);
                if u < acc {
                    return last;
                }
            }
        }
        last
    }

    /// Passes one block of channel inputs through the three component channels.
    pub fn sample_outputs<R: Rng + ?Sized>(&self, x_block: &[u8], rng: &mut R) -> BlockOutputs {
        let mut out = BlockOutputs {
            y1: Vec::with_capacity(x_block.len()),
            y2: Vec::with_capacity(x_block.len()),
            z: Vec::with_capacity(x_block.len()),
        };
        for &x in x_block {
            out.y1.push(self.y1.sample(x, rng));
            out.y2.push(self.y2.sample(x, rng));
            out.z.push(self.z.sample(x, rng));
        }
        out
    }
}

/// Checks the law, orders the legitimate receivers so that receiver 1 is the
/// weaker one, and verifies that the eavesdropper is strictly worse than both.
pub fn validate_and_order(spec: &DmsSpec) -> Result<(DmsSpec, ChannelOrderReport), ChannelError> {
    spec.validate()?;
    let h_z = spec.conditional_entropy(Conditioning::VGivenZ);
    let mut h1 = spec.conditional_entropy(Conditioning::VGivenY1);
    let mut h2 = spec.conditional_entropy(Conditioning::VGivenY2);
    let swapped = h1 < h2;
    let ordered = if swapped {
        std::mem::swap(&mut h1, &mut h2);
        spec.swapped()
    } else {
        spec.clone()
    };
    if h_z <= h1 {
        return Err(ChannelError::DegenerateChannel {
            h_v_given_z: h_z,
            h_v_given_y1: h1,
        });
    }
    let report = ChannelOrderReport {
        h_v_given_z: h_z,
        h_v_given_y1: h1,
        h_v_given_y2: h2,
        satisfies_assumption: true,
        swapped,
    };
    Ok((ordered, report))
}

/// `(I(V;Z), I(V;Y1) - I(V;Z), I(X;Z|V))` computed from the joint law.
pub fn corner_point_rates(spec: &DmsSpec) -> CornerRates {
    let h_v = spec.h_v();
    let i_vz = h_v - spec.conditional_entropy(Conditioning::VGivenZ);
    let i_vy1 = h_v - spec.conditional_entropy(Conditioning::VGivenY1);
    let i_xz_v = spec.conditional_entropy(Conditioning::XGivenV)
        - spec.conditional_entropy(Conditioning::XGivenVZ);
    CornerRates {
        private: i_vz.max(0.0),
        confidential: (i_vy1 - i_vz).max(0.0),
        randomization: i_xz_v.max(0.0),
    }
}
