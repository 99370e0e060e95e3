//! Discrete memoryless channels and their output decomposition.
//!
//! A [`Channel`] from `X = 0..input_size` to `Y = 0..output_size` is a dense
//! row-stochastic matrix stored row-major: row `x` is the conditional
//! distribution `W(.|x)`. Everything downstream (parameters, operations,
//! Blackwell measures) is built on this one type; there are no special-cased
//! channel classes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::{EPS_STOCH, EPS_ZERO};

/// A channel `W(y|x)` between finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_size: usize,
    output_size: usize,
    /// Row-major, `matrix[x * output_size + y] = W(y|x)`.
    matrix: Vec<f64>,
}

impl Channel {
    /// Validates a matrix given as one row per input symbol.
    ///
    /// Entries must lie in `[-EPS_STOCH, 1 + EPS_STOCH]` and every row must
    /// sum to 1 within `EPS_STOCH`. Accepted rows are clamped to `[0, 1]`
    /// and divided by their exact sum, so the stored matrix is stochastic up
    /// to a single rounding step per entry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch(
                "channel matrix must be nonempty".into(),
            ));
        }
        let output_size = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::DimensionMismatch(format!(
                    "row {x} has length {}, expected {output_size}",
                    row.len()
                )));
            }
        }
        let mut matrix = Vec::with_capacity(rows.len() * output_size);
        for (x, row) in rows.iter().enumerate() {
            let mut deviation = 0.0f64;
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonStochastic {
                        row: x,
                        deviation: f64::INFINITY,
                    });
                }
                if v < 0.0 {
                    deviation = deviation.max(-v);
                } else if v > 1.0 {
                    deviation = deviation.max(v - 1.0);
                }
            }
            let clamped: Vec<f64> = row.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
            let sum: f64 = clamped.iter().sum();
            deviation = deviation.max((sum - 1.0).abs());
            if deviation > EPS_STOCH {
                return Err(Error::NonStochastic { row: x, deviation });
            }
            matrix.extend(crate::dist::renormalize(clamped));
        }
        Ok(Self {
            input_size: rows.len(),
            output_size,
            matrix,
        })
    }

    /// As [`Channel::from_rows`], for a flat row-major buffer.
    pub fn from_flat(input_size: usize, output_size: usize, data: &[f64]) -> Result<Self> {
        if input_size == 0 || output_size == 0 || data.len() != input_size * output_size {
            return Err(Error::DimensionMismatch(format!(
                "flat matrix of length {} does not fill {input_size} x {output_size}",
                data.len()
            )));
        }
        let rows: Vec<Vec<f64>> = data.chunks(output_size).map(|c| c.to_vec()).collect();
        Self::from_rows(&rows)
    }

    /// The deterministic channel of a function: `W(y|x) = 1` iff `y = map[x]`.
    pub fn deterministic(map: &[usize], output_size: usize) -> Result<Self> {
        if map.is_empty() || output_size == 0 {
            return Err(Error::DimensionMismatch(
                "deterministic channel needs nonempty alphabets".into(),
            ));
        }
        let mut matrix = vec![0.0; map.len() * output_size];
        for (x, &y) in map.iter().enumerate() {
            if y >= output_size {
                return Err(Error::DimensionMismatch(format!(
                    "map sends {x} to {y}, outside 0..{output_size}"
                )));
            }
            matrix[x * output_size + y] = 1.0;
        }
        Ok(Self {
            input_size: map.len(),
            output_size,
            matrix,
        })
    }

    /// The noiseless channel on `0..n`.
    pub fn identity(n: usize) -> Self {
        let map: Vec<usize> = (0..n).collect();
        Self::deterministic(&map, n).expect("identity channel is always valid")
    }

    /// Binary symmetric channel with crossover probability `delta`.
    pub fn binary_symmetric(delta: f64) -> Result<Self> {
        Self::from_rows(&[vec![1.0 - delta, delta], vec![delta, 1.0 - delta]])
    }

    /// Binary erasure channel with erasure probability `eps`, as a 2x3
    /// channel whose third output is the erasure symbol.
    pub fn binary_erasure(eps: f64) -> Result<Self> {
        Self::from_rows(&[vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `W(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.output_size + y]
    }

    /// The conditional distribution `W(.|x)` as a slice over outputs.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks(self.output_size)
    }

    /// Output distribution `q(y) = sum_x p(x) W(y|x)` under input prior `p`.
    pub fn output_distribution(&self, p: &Distribution) -> Result<Distribution> {
        if p.len() != self.input_size {
            return Err(Error::DimensionMismatch(format!(
                "prior over {} inputs applied to a channel with {} inputs",
                p.len(),
                self.input_size
            )));
        }
        let mut q = vec![0.0; self.output_size];
        for x in 0..self.input_size {
            let px = p.get(x);
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += px * self.prob(x, y);
            }
        }
        Ok(Distribution::new(q).expect("image of a prior under a channel is a distribution"))
    }

    /// Splits the channel into its output distribution under the uniform
    /// input, the image (outputs of positive probability), and the posterior
    /// of the uniform input given each output in the image.
    pub fn decompose(&self) -> ChannelDecomposition {
        let n = self.input_size as f64;
        let mut output_weights = vec![0.0; self.output_size];
        for x in 0..self.input_size {
            for (y, w) in output_weights.iter_mut().enumerate() {
                *w += self.prob(x, y) / n;
            }
        }
        let mut image = Vec::new();
        let mut posteriors = Vec::new();
        for (y, &py) in output_weights.iter().enumerate() {
            if py > EPS_ZERO {
                image.push(y);
                let post: Vec<f64> = (0..self.input_size)
                    .map(|x| self.prob(x, y) / (n * py))
                    .collect();
                posteriors.push(Distribution::normalized(post));
            }
        }
        ChannelDecomposition {
            output_dist: Distribution::normalized(output_weights),
            image,
            posteriors,
        }
    }
}

/// The `(P_W^o, image, posteriors)` decomposition of a channel.
///
/// Reconstruction: `W(y|x) = |X| * output_dist(y) * posterior_y(x)` for `y`
/// in the image, and column `y` of `W` is zero for `y` outside it.
#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    output_dist: Distribution,
    image: Vec<usize>,
    posteriors: Vec<Distribution>,
}

impl ChannelDecomposition {
    /// Output distribution of the uniform input.
    pub fn output_dist(&self) -> &Distribution {
        &self.output_dist
    }

    /// Outputs with probability above `EPS_ZERO`, ascending.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Posteriors parallel to [`ChannelDecomposition::image`].
    pub fn posteriors(&self) -> &[Distribution] {
        &self.posteriors
    }

    /// Posterior of the uniform input given output `y`, when `y` is in the
    /// image.
    pub fn posterior(&self, y: usize) -> Option<&Distribution> {
        let idx = self.image.binary_search(&y).ok()?;
        Some(&self.posteriors[idx])
    }
}

/// Composition `(V o W)(z|x) = sum_y V(z|y) W(y|x)`; `W` feeds `V`.
pub fn compose(v: &Channel, w: &Channel) -> Result<Channel> {
    if w.output_size() != v.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "compose: inner channel emits {} symbols, outer consumes {}",
            w.output_size(),
            v.input_size()
        )));
    }
    let mut rows = Vec::with_capacity(w.input_size());
    for x in 0..w.input_size() {
        let mut row = vec![0.0; v.output_size()];
        for y in 0..w.output_size() {
            let wyx = w.prob(x, y);
            if wyx == 0.0 {
                continue;
            }
            for (z, r) in row.iter_mut().enumerate() {
                *r += v.prob(y, z) * wyx;
            }
        }
        rows.push(row);
    }
    Channel::from_rows(&rows)
}

/// The metric `d(W, W') = (1/2) max_x sum_y |W'(y|x) - W(y|x)|`.
pub fn channel_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.input_size() != b.input_size() || a.output_size() != b.output_size() {
        return Err(Error::DimensionMismatch(format!(
            "distance between a {}x{} and a {}x{} channel",
            a.input_size(),
            a.output_size(),
            b.input_size(),
            b.output_size()
        )));
    }
    let mut worst = 0.0f64;
    for x in 0..a.input_size() {
        let l1: f64 = a
            .row(x)
            .iter()
            .zip(b.row(x))
            .map(|(p, q)| (p - q).abs())
            .sum();
        worst = worst.max(l1);
    }
    Ok(0.5 * worst)
}

/// A channel whose rows are independent flat-Dirichlet samples, produced by
/// normalizing exponentials of a ChaCha stream. Deterministic given `seed`.
pub fn random_channel(input_size: usize, output_size: usize, seed: u64) -> Channel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_channel_with(&mut rng, input_size, output_size)
}

/// As [`random_channel`], drawing from a caller-owned generator so that
/// suites can produce sequences of channels from one seed.
pub fn random_channel_with<R: Rng>(rng: &mut R, input_size: usize, output_size: usize) -> Channel {
    assert!(input_size > 0 && output_size > 0, "alphabets must be nonempty");
    let mut rows = Vec::with_capacity(input_size);
    for _ in 0..input_size {
        rows.push(random_simplex_point(rng, output_size));
    }
    Channel::from_rows(&rows).expect("normalized exponentials form a stochastic row")
}

/// A flat-Dirichlet sample on the simplex of dimension `n`.
pub(crate) fn random_simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            let mut u: f64 = rng.random();
            while u <= 0.0 {
                u = rng.random();
            }
            -u.ln()
        })
        .collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}
