//! One-dimensional feedforward networks and their exact compilation to
//! piecewise-affine form.
//!
//! A [`NetworkSpec`] describes an ℝ → ℝ network: layers of neurons, each
//! computing an affine combination of the previous layer followed by a shared
//! scalar activation. [`NetworkSpec::compile`] folds the whole network into a
//! single canonical [`PwlFunction`] using only exact rational arithmetic, so
//! piece counts of compiled networks are exact, not estimates.
//! [`NetworkSpec::forward_eval`] evaluates the same network numerically
//! without building any piecewise representation; the two must agree at every
//! rational input, which the test suites exploit as an oracle.
//!
//! The mirror map `f_m` (the "tent" that folds `[0,1]` onto itself) and its
//! iterates get dedicated constructors here because they are the extremal
//! family for piece growth: `k` iterations yield `2^k + 2` pieces from a
//! two-layer, width-two ReLU network.

use crate::pwl::{AffinePiece, PwlFunction};
use crate::rational::{one_half, parse_rational, pow2, rat, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("a network needs at least one layer")]
    NoLayers,
    #[error("layer {0} has no neurons")]
    EmptyLayer(usize),
    #[error("layer {layer}, neuron {neuron}: got {got} weights, expected {expected}")]
    WeightCountMismatch {
        layer: usize,
        neuron: usize,
        expected: usize,
        got: usize,
    },
    #[error("the final layer must have exactly one neuron, found {0}")]
    WideOutput(usize),
    #[error("a recurrent network needs at least one iteration")]
    ZeroIterations,
}

/// The shared scalar activation applied after each affine combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// `1[x >= threshold]`.
    Stump(Rational),
    /// Any piecewise-affine activation.
    Custom(PwlFunction),
}

impl Activation {
    pub fn to_pwl(&self) -> PwlFunction {
        match self {
            Activation::Relu => PwlFunction::relu(),
            Activation::Stump(t) => PwlFunction::stump(t.clone()),
            Activation::Custom(f) => f.clone(),
        }
    }

    /// Direct evaluation; for `Relu` and `Stump` this bypasses the piecewise
    /// machinery entirely so forward passes stay independent of it.
    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            Activation::Relu => {
                if x.is_positive() {
                    x.clone()
                } else {
                    Rational::zero()
                }
            }
            Activation::Stump(t) => {
                if x >= t {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            }
            Activation::Custom(f) => f.eval(x),
        }
    }

    /// Piece count `t` of the activation, the base of the `(tm)^l` bound.
    pub fn piece_count(&self) -> usize {
        match self {
            Activation::Relu | Activation::Stump(_) => 2,
            Activation::Custom(f) => f.piece_count(),
        }
    }
}

/// One neuron: `x -> activation(bias + sum_i weights[i] * input_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neuron {
    pub bias: Rational,
    pub weights: Vec<Rational>,
}

impl Neuron {
    pub fn new(bias: Rational, weights: Vec<Rational>) -> Self {
        Neuron { bias, weights }
    }
}

/// A feedforward network on one real input with one real output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    /// `layers[0]` reads the scalar input (all weight vectors have length 1);
    /// layer `i > 0` reads the outputs of layer `i - 1`.
    pub layers: Vec<Vec<Neuron>>,
    pub activation: Activation,
    /// Whether the activation is applied after the final affine combination.
    pub output_activation: bool,
}

impl NetworkSpec {
    pub fn new(layers: Vec<Vec<Neuron>>, activation: Activation) -> Self {
        NetworkSpec {
            layers,
            activation,
            output_activation: true,
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.layers.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.layers.is_empty() {
            return Err(NetworkError::NoLayers);
        }
        let mut fan_in = 1;
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(NetworkError::EmptyLayer(li));
            }
            for (ni, neuron) in layer.iter().enumerate() {
                if neuron.weights.len() != fan_in {
                    return Err(NetworkError::WeightCountMismatch {
                        layer: li,
                        neuron: ni,
                        expected: fan_in,
                        got: neuron.weights.len(),
                    });
                }
            }
            fan_in = layer.len();
        }
        let out_width = self.layers.last().unwrap().len();
        if out_width != 1 {
            return Err(NetworkError::WideOutput(out_width));
        }
        Ok(())
    }

    /// Folds the network into one canonical piecewise-affine function.
    pub fn compile(&self) -> Result<PwlFunction, NetworkError> {
        self.validate()?;
        let sigma = self.activation.to_pwl();
        let mut prev = vec![PwlFunction::identity()];
        for (li, layer) in self.layers.iter().enumerate() {
            let skip_activation = !self.output_activation && li + 1 == self.layers.len();
            let mut next = Vec::with_capacity(layer.len());
            for neuron in layer {
                let mut pre = PwlFunction::constant(neuron.bias.clone());
                for (weight, parent) in neuron.weights.iter().zip(&prev) {
                    if weight.is_zero() {
                        continue;
                    }
                    pre = pre.add(&parent.scale_shift(weight, &Rational::zero()));
                }
                next.push(if skip_activation {
                    pre
                } else {
                    sigma.compose(&pre)
                });
            }
            prev = next;
        }
        Ok(prev.pop().expect("validated output layer"))
    }

    /// Numeric forward pass; agrees with `compile()?.eval(x)` at every input.
    ///
    /// Panics on a spec that fails [`NetworkSpec::validate`].
    pub fn forward_eval(&self, x: &Rational) -> Rational {
        let mut values = vec![x.clone()];
        for (li, layer) in self.layers.iter().enumerate() {
            let skip_activation = !self.output_activation && li + 1 == self.layers.len();
            let mut next = Vec::with_capacity(layer.len());
            for neuron in layer {
                assert_eq!(neuron.weights.len(), values.len(), "invalid network spec");
                let mut pre = neuron.bias.clone();
                for (weight, value) in neuron.weights.iter().zip(&values) {
                    pre += weight * value;
                }
                next.push(if skip_activation {
                    pre
                } else {
                    self.activation.eval(&pre)
                });
            }
            values = next;
        }
        values.pop().expect("at least one layer")
    }

    /// The a priori piece bound `(t m)^l` for depth `l`, width `m`, and a
    /// t-sawtooth activation. `compile` never exceeds it.
    pub fn piece_bound(&self) -> BigInt {
        let base = BigInt::from(self.activation.piece_count() * self.width());
        base.pow(self.depth() as u32)
    }
}

/// A network iterated as a map: `g` composed with itself `iterations` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrentSpec {
    pub base: NetworkSpec,
    pub iterations: u32,
}

impl RecurrentSpec {
    pub fn new(base: NetworkSpec, iterations: u32) -> Self {
        RecurrentSpec { base, iterations }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.iterations == 0 {
            return Err(NetworkError::ZeroIterations);
        }
        self.base.validate()
    }

    /// Compiles the base once and composes the result with itself.
    pub fn compile(&self) -> Result<PwlFunction, NetworkError> {
        self.validate()?;
        let g = self.base.compile()?;
        let mut acc = g.clone();
        for _ in 1..self.iterations {
            acc = acc.compose(&g);
        }
        Ok(acc)
    }

    /// `(t m)^{l k}`: the feedforward bound compounded over `k` iterations.
    pub fn piece_bound(&self) -> BigInt {
        let base = BigInt::from(self.base.activation.piece_count() * self.base.width());
        base.pow(self.base.depth() as u32 * self.iterations)
    }

    pub fn forward_eval(&self, x: &Rational) -> Rational {
        let mut value = x.clone();
        for _ in 0..self.iterations {
            value = self.base.forward_eval(&value);
        }
        value
    }
}

// --- the mirror family -------------------------------------------------------

/// The mirror map `f_m`: 0 for `x < 0`, `2x` on `[0, 1/2)`, `2 - 2x` on
/// `[1/2, 1)`, 0 for `x >= 1`. Four canonical pieces, breakpoints 0, 1/2, 1.
pub fn mirror_map() -> PwlFunction {
    PwlFunction::new(
        vec![Rational::zero(), one_half(), Rational::from_integer(1.into())],
        vec![
            AffinePiece::constant(Rational::zero()),
            AffinePiece::new(rat(2, 1), Rational::zero()),
            AffinePiece::new(rat(-2, 1), rat(2, 1)),
            AffinePiece::constant(Rational::zero()),
        ],
    )
    .expect("mirror map parts are canonical")
}

/// The two-layer, width-two ReLU network computing `f_m` exactly:
/// `relu(2 relu(x) - 4 relu(x - 1/2))`.
pub fn mirror_network() -> NetworkSpec {
    NetworkSpec::new(
        vec![
            vec![
                Neuron::new(Rational::zero(), vec![rat(1, 1)]),
                Neuron::new(rat(-1, 2), vec![rat(1, 1)]),
            ],
            vec![Neuron::new(Rational::zero(), vec![rat(2, 1), rat(-4, 1)])],
        ],
        Activation::Relu,
    )
}

/// The unique splitting `x = (index + fraction) 2^{1-k}` with integer index
/// and fraction in `[0, 1)`; reconstruction is exact by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorDecomposition {
    /// `floor(x 2^{k-1})`, in `{0, ..., 2^{k-1}}` for `x in [0, 1]`.
    pub index: BigInt,
    pub fraction: Rational,
}

impl MirrorDecomposition {
    /// Recovers the decomposed input: `(index + fraction) 2^{1-k}`.
    pub fn reconstruct(&self, k: u32) -> Rational {
        (Rational::from_integer(self.index.clone()) + &self.fraction) * pow2(1 - i64::from(k))
    }
}

/// Splits `x in [0, 1]` at scale `k`: `index = floor(x 2^{k-1})` and
/// `fraction` the remainder (so `x = 1` yields index `2^{k-1}`, fraction 0).
/// The fraction drives the closed form of the k-th mirror iterate.
pub fn mirror_decompose(x: &Rational, k: u32) -> MirrorDecomposition {
    debug_assert!(!x.is_negative() && *x <= Rational::from_integer(1.into()));
    let scaled = x * pow2(i64::from(k) - 1);
    let whole = scaled.floor();
    let frac = &scaled - &whole;
    MirrorDecomposition {
        index: whole.to_integer(),
        fraction: frac,
    }
}

/// The k-th iterate of the mirror map in closed form:
/// `f_m^k(x) = 2r` if `r <= 1/2` else `2(1 - r)` where `r` is the fractional
/// part from [`mirror_decompose`]; 0 outside `[0, 1]`. Requires `k >= 1`.
pub fn mirror_closed_form(x: &Rational, k: u32) -> Rational {
    assert!(k >= 1, "the closed form covers k >= 1");
    let one = Rational::from_integer(1.into());
    if x.is_negative() || *x > one {
        return Rational::zero();
    }
    let r = mirror_decompose(x, k).fraction;
    if r <= one_half() {
        rat(2, 1) * r
    } else {
        rat(2, 1) * (one - r)
    }
}

/// The k-th mirror iterate built directly as a piecewise function, without
/// composing: `2^k + 2` pieces alternating slope `+2^k` / `-2^k` on the
/// dyadic grid `j 2^{-k}`, constant 0 outside `[0, 1]`. Requires `k >= 1`.
pub fn mirror_closed_form_pwl(k: u32) -> PwlFunction {
    assert!(k >= 1, "the closed form covers k >= 1");
    let teeth = 1usize << (k - 1);
    let step = pow2(-i64::from(k));
    let up_slope = pow2(i64::from(k));
    let down_slope = -&up_slope;
    let mut breakpoints = Vec::with_capacity(2 * teeth + 1);
    let mut pieces = Vec::with_capacity(2 * teeth + 2);
    pieces.push(AffinePiece::constant(Rational::zero()));
    for j in 0..teeth {
        let left = Rational::from_integer((2 * j).into()) * &step;
        let mid = Rational::from_integer((2 * j + 1).into()) * &step;
        breakpoints.push(left);
        pieces.push(AffinePiece::new(
            up_slope.clone(),
            Rational::from_integer(-BigInt::from(2 * j)),
        ));
        breakpoints.push(mid);
        pieces.push(AffinePiece::new(
            down_slope.clone(),
            Rational::from_integer((2 * j + 2).into()),
        ));
    }
    breakpoints.push(Rational::from_integer(1.into()));
    pieces.push(AffinePiece::constant(Rational::zero()));
    PwlFunction::new(breakpoints, pieces).expect("dyadic grid is strictly increasing")
}

// --- serialization -----------------------------------------------------------
//
// Wire form:
// {"activation": "relu" | "stump:p/q" | {inline piecewise function},
//  "output_activation": true,
//  "layers": [[{"bias": "p/q", "weights": ["p/q", ...]}, ...], ...]}
// A recurrent spec is the same object plus "iterations": k.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActivationDto {
    Name(String),
    Inline(PwlFunction),
}

#[derive(Serialize, Deserialize)]
struct NeuronDto {
    bias: String,
    weights: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDto {
    activation: ActivationDto,
    #[serde(default = "default_output_activation")]
    output_activation: bool,
    layers: Vec<Vec<NeuronDto>>,
}

#[derive(Serialize, Deserialize)]
struct RecurrentDto {
    #[serde(flatten)]
    network: NetworkDto,
    #[serde(default = "default_iterations")]
    iterations: u32,
}

fn default_output_activation() -> bool {
    true
}

fn default_iterations() -> u32 {
    1
}

impl Activation {
    fn to_dto(&self) -> ActivationDto {
        match self {
            Activation::Relu => ActivationDto::Name("relu".into()),
            Activation::Stump(t) => ActivationDto::Name(format!("stump:{t}")),
            Activation::Custom(f) => ActivationDto::Inline(f.clone()),
        }
    }

    fn from_dto(dto: ActivationDto) -> Result<Self, String> {
        match dto {
            ActivationDto::Inline(f) => Ok(Activation::Custom(f)),
            ActivationDto::Name(name) if name == "relu" => Ok(Activation::Relu),
            ActivationDto::Name(name) => match name.strip_prefix("stump:") {
                Some(t) => parse_rational(t)
                    .map(Activation::Stump)
                    .map_err(|e| format!("bad stump threshold: {e}")),
                None => Err(format!("unknown activation {name:?}")),
            },
        }
    }
}

impl NetworkSpec {
    fn to_dto(&self) -> NetworkDto {
        NetworkDto {
            activation: self.activation.to_dto(),
            output_activation: self.output_activation,
            layers: self
                .layers
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|n| NeuronDto {
                            bias: n.bias.to_string(),
                            weights: n.weights.iter().map(|w| w.to_string()).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn from_dto(dto: NetworkDto) -> Result<Self, String> {
        let activation = Activation::from_dto(dto.activation)?;
        let layers = dto
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|n| {
                        let bias = parse_rational(&n.bias).map_err(|e| e.to_string())?;
                        let weights = n
                            .weights
                            .iter()
                            .map(|w| parse_rational(w).map_err(|e| e.to_string()))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Neuron::new(bias, weights))
                    })
                    .collect::<Result<Vec<_>, String>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let spec = NetworkSpec {
            layers,
            activation,
            output_activation: dto.output_activation,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl Serialize for NetworkSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_dto().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NetworkSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        NetworkSpec::from_dto(NetworkDto::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

impl Serialize for RecurrentSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RecurrentDto {
            network: self.base.to_dto(),
            iterations: self.iterations,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RecurrentSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let dto = RecurrentDto::deserialize(deserializer)?;
        let spec = RecurrentSpec {
            base: NetworkSpec::from_dto(dto.network).map_err(D::Error::custom)?,
            iterations: dto.iterations,
        };
        spec.validate().map_err(D::Error::custom)?;
        Ok(spec)
    }
}
