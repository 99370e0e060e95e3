//! Scalar channel parameters.
//!
//! Everything is computed in nats. The capacity solver is an alternating
//! maximization with a certified dual gap: the returned interval
//! `[lower_bound, upper_bound]` always contains the true capacity, and the
//! iteration stops once the gap is below the requested tolerance.

use rand::Rng;

use crate::channel::{random_simplex_point, Channel};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::{COMB_CAP, ENUM_CAP, EPS_STOCH, MAX_CAPACITY_ITER};

/// A joint prior on `[m] x X`: the label `u` to be guessed and the channel
/// input `x`, stored row-major by `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrior {
    m: usize,
    input_size: usize,
    weights: Vec<f64>,
}

impl JointPrior {
    /// Validates nonnegative weights of shape `m x input_size` summing to 1
    /// within `EPS_STOCH`, then renormalizes exactly.
    pub fn new(m: usize, input_size: usize, weights: Vec<f64>) -> Result<Self> {
        if m == 0 || input_size == 0 || weights.len() != m * input_size {
            return Err(Error::DimensionMismatch(format!(
                "joint prior of length {} does not fill {m} x {input_size}",
                weights.len()
            )));
        }
        let mut deviation = 0.0f64;
        for &w in &weights {
            if !w.is_finite() {
                return Err(Error::NonStochastic {
                    row: 0,
                    deviation: f64::INFINITY,
                });
            }
            if w < 0.0 {
                deviation = deviation.max(-w);
            }
        }
        let clamped: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        deviation = deviation.max((sum - 1.0).abs());
        if deviation > EPS_STOCH {
            return Err(Error::NonStochastic { row: 0, deviation });
        }
        Ok(Self {
            m,
            input_size,
            weights: crate::dist::renormalize(clamped),
        })
    }

    /// Point mass at the pair `(u, x)`.
    pub fn vertex(m: usize, input_size: usize, u: usize, x: usize) -> Self {
        assert!(u < m && x < input_size);
        let mut weights = vec![0.0; m * input_size];
        weights[u * input_size + x] = 1.0;
        Self {
            m,
            input_size,
            weights,
        }
    }

    /// The uniform-over-matching prior of an injection `sigma: [m] -> X`:
    /// `p(u, x) = 1/m` iff `x = sigma[u]`.
    pub fn injection(input_size: usize, sigma: &[usize]) -> Result<Self> {
        let m = sigma.len();
        if m == 0 {
            return Err(Error::DimensionMismatch("empty injection".into()));
        }
        let mut seen = vec![false; input_size];
        let mut weights = vec![0.0; m * input_size];
        for (u, &x) in sigma.iter().enumerate() {
            if x >= input_size || seen[x] {
                return Err(Error::DimensionMismatch(format!(
                    "sigma is not an injection into 0..{input_size}"
                )));
            }
            seen[x] = true;
            weights[u * input_size + x] = 1.0 / m as f64;
        }
        Ok(Self {
            m,
            input_size,
            weights,
        })
    }

    /// A flat-Dirichlet sample on the simplex over `[m] x X`.
    pub fn random<R: Rng>(rng: &mut R, m: usize, input_size: usize) -> Self {
        let weights = random_simplex_point(rng, m * input_size);
        Self {
            m,
            input_size,
            weights,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// `p(u, x)`.
    pub fn weight(&self, u: usize, x: usize) -> f64 {
        self.weights[u * self.input_size + x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A set of distinct length-`n` words over the channel input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    blocklength: usize,
    words: Vec<Vec<usize>>,
}

impl Code {
    /// Validates word lengths and distinctness; words are kept sorted.
    pub fn new(blocklength: usize, mut words: Vec<Vec<usize>>) -> Result<Self> {
        if blocklength == 0 || words.is_empty() {
            return Err(Error::DimensionMismatch(
                "a code needs a positive blocklength and at least one word".into(),
            ));
        }
        for w in &words {
            if w.len() != blocklength {
                return Err(Error::DimensionMismatch(format!(
                    "codeword of length {} in a blocklength-{blocklength} code",
                    w.len()
                )));
            }
        }
        words.sort();
        if words.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DimensionMismatch("duplicate codeword".into()));
        }
        Ok(Self { blocklength, words })
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    /// Number of codewords `M`.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    fn max_symbol(&self) -> usize {
        self.words
            .iter()
            .flat_map(|w| w.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Certified output of the capacity solver.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Midpoint of the final bracket.
    pub value: f64,
    /// `I(p_k, W)` at the final iterate: a true lower bound.
    pub lower_bound: f64,
    /// `max_x D(W(.|x) || q_k)` at the final iterate: a true upper bound.
    pub upper_bound: f64,
    pub iterations: u64,
    /// The input distribution attaining the lower bound.
    pub maximizing_input: Distribution,
}

fn check_prior(p: &Distribution, w: &Channel) -> Result<()> {
    if p.len() != w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "prior over {} inputs, channel has {}",
            p.len(),
            w.input_size()
        )));
    }
    Ok(())
}

/// Mutual information `I(X; Y)` in nats when `X ~ p` feeds `W`.
///
/// Conventions: `0 ln 0 = 0`; terms with `W(y|x) = 0` contribute nothing.
pub fn mutual_information(p: &Distribution, w: &Channel) -> Result<f64> {
    check_prior(p, w)?;
    let q = w.output_distribution(p)?;
    let mut total = 0.0;
    for x in 0..w.input_size() {
        let px = p.get(x);
        if px == 0.0 {
            continue;
        }
        total += px * row_divergence(w.row(x), &q);
    }
    Ok(total.max(0.0))
}

/// `D(W(.|x) || q)`, skipping zero channel entries; `+inf` when the row puts
/// mass where `q` has none.
fn row_divergence(row: &[f64], q: &Distribution) -> f64 {
    let mut d = 0.0;
    for (y, &wyx) in row.iter().enumerate() {
        if wyx == 0.0 {
            continue;
        }
        let qy = q.get(y);
        if qy == 0.0 {
            return f64::INFINITY;
        }
        d += wyx * (wyx / qy).ln();
    }
    d
}

/// Capacity `C(W) = sup_p I(p, W)` by alternating maximization from the
/// uniform input, with the dual upper bound `max_x D(W(.|x) || q_k)`.
///
/// Stops when the bracket width drops below `tol`; errors with
/// [`Error::NoConvergence`] after [`MAX_CAPACITY_ITER`] iterations.
pub fn capacity(w: &Channel, tol: f64) -> Result<CapacityResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadWeights(format!(
            "capacity tolerance must be positive, got {tol}"
        )));
    }
    let n = w.input_size();
    let mut p = vec![1.0 / n as f64; n];
    let mut divergences = vec![0.0f64; n];
    let mut gap = f64::INFINITY;
    for iteration in 1..=MAX_CAPACITY_ITER {
        let prior = Distribution::new(p.clone()).expect("iterate stays on the simplex");
        let q = w.output_distribution(&prior)?;
        for (x, d) in divergences.iter_mut().enumerate() {
            *d = row_divergence(w.row(x), &q);
        }
        let lower: f64 = p
            .iter()
            .zip(&divergences)
            .map(|(&px, &dx)| if px > 0.0 { px * dx } else { 0.0 })
            .sum();
        let upper = divergences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gap = upper - lower;
        if !gap.is_finite() {
            // Unreachable from the uniform start: q then dominates every row.
            return Err(Error::NoConvergence {
                iterations: iteration,
                gap,
            });
        }
        if gap <= tol {
            return Ok(CapacityResult {
                value: 0.5 * (lower + upper),
                lower_bound: lower.max(0.0),
                upper_bound: upper,
                iterations: iteration,
                maximizing_input: prior,
            });
        }
        // Multiplicative update p(x) <- p(x) exp(D_x), renormalized.
        let mut sum = 0.0;
        for (px, &dx) in p.iter_mut().zip(&divergences) {
            *px *= dx.exp();
            sum += *px;
        }
        for px in &mut p {
            *px /= sum;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_CAPACITY_ITER,
        gap,
    })
}

/// Error probability of the MAP decoder:
/// `P_e(p, W) = 1 - sum_y max_x p(x) W(y|x)`.
pub fn map_error(p: &Distribution, w: &Channel) -> Result<f64> {
    check_prior(p, w)?;
    let mut correct = 0.0;
    for y in 0..w.output_size() {
        let best = (0..w.input_size())
            .map(|x| p.get(x) * w.prob(x, y))
            .fold(0.0f64, f64::max);
        correct += best;
    }
    Ok((1.0 - correct).max(0.0))
}

/// Bhattacharyya parameter
/// `Z(W) = 1/(|X| (|X|-1)) sum_{x1 != x2} sum_y sqrt(W(y|x1) W(y|x2))`,
/// and 0 for a single-input channel.
pub fn bhattacharyya(w: &Channel) -> f64 {
    let n = w.input_size();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for x1 in 0..n {
        for x2 in 0..n {
            if x1 == x2 {
                continue;
            }
            total += w
                .row(x1)
                .iter()
                .zip(w.row(x2))
                .map(|(a, b)| (a * b).sqrt())
                .sum::<f64>();
        }
    }
    total / (n as f64 * (n - 1) as f64)
}

/// Optimal probability of correctly guessing the label `U` from the channel
/// output, `P_c(p, W) = sum_y max_u sum_x p(u, x) W(y|x)`.
///
/// The supremum over decoders in the definition is attained by the
/// deterministic MAP rule, which is what this closed form evaluates.
pub fn correct_guess_prob(p: &JointPrior, w: &Channel) -> Result<f64> {
    if p.input_size() != w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "joint prior over {} inputs, channel has {}",
            p.input_size(),
            w.input_size()
        )));
    }
    if p.m() == 1 {
        // The decoder can only answer the one label.
        return Ok(1.0);
    }
    let mut total = 0.0;
    for y in 0..w.output_size() {
        let mut best = 0.0f64;
        for u in 0..p.m() {
            let score: f64 = (0..w.input_size())
                .map(|x| p.weight(u, x) * w.prob(x, y))
                .sum();
            best = best.max(score);
        }
        total += best;
    }
    Ok(total.min(1.0))
}

fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Exact ML-decoding error probability of `code` over `w`, by enumerating
/// all `|Y|^n` output sequences. Errors with [`Error::TooLarge`] when the
/// enumeration would exceed [`ENUM_CAP`].
pub fn code_error(code: &Code, w: &Channel) -> Result<f64> {
    if code.max_symbol() >= w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "codeword symbol {} outside the channel input alphabet 0..{}",
            code.max_symbol(),
            w.input_size()
        )));
    }
    let n = code.blocklength();
    let outputs = checked_pow(w.output_size(), n);
    if outputs > ENUM_CAP as u128 {
        return Err(Error::TooLarge {
            size: outputs,
            cap: ENUM_CAP,
        });
    }
    let mut correct = 0.0;
    let mut y = vec![0usize; n];
    loop {
        let best = code
            .words()
            .iter()
            .map(|word| {
                word.iter()
                    .zip(&y)
                    .map(|(&x, &yi)| w.prob(x, yi))
                    .product::<f64>()
            })
            .fold(0.0f64, f64::max);
        correct += best;
        // Odometer over Y^n, last position fastest.
        let mut i = n;
        loop {
            if i == 0 {
                let pe = 1.0 - correct / code.size() as f64;
                return Ok(pe.max(0.0));
            }
            i -= 1;
            y[i] += 1;
            if y[i] < w.output_size() {
                break;
            }
            y[i] = 0;
        }
    }
}

/// The number of `m`-subsets of a `k`-set, saturating above `cap`.
fn binomial_capped(k: u128, m: u128, cap: u128) -> u128 {
    if m > k {
        return 0;
    }
    let m = m.min(k - m);
    let mut num: u128 = 1;
    for i in 0..m {
        num = num.saturating_mul(k - i);
        num /= i + 1;
        if num > cap {
            return cap + 1;
        }
    }
    num
}

/// Optimal `(n, M)`-code error probability, by exhaustive search over all
/// codes. Errors with [`Error::TooLarge`] when there are more than
/// [`COMB_CAP`] candidate codes (or the inner enumeration exceeds
/// [`ENUM_CAP`]).
pub fn optimal_code_error(n: usize, m: usize, w: &Channel) -> Result<f64> {
    let words_total = checked_pow(w.input_size(), n);
    if n == 0 || m == 0 || (m as u128) > words_total {
        return Err(Error::DimensionMismatch(format!(
            "no ({n}, {m})-codes over an alphabet of size {}",
            w.input_size()
        )));
    }
    let candidates = binomial_capped(words_total, m as u128, COMB_CAP as u128);
    if candidates > COMB_CAP as u128 {
        return Err(Error::TooLarge {
            size: candidates,
            cap: COMB_CAP,
        });
    }
    // All length-n words in lexicographic order.
    let total = words_total as usize;
    let mut words = Vec::with_capacity(total);
    let mut word = vec![0usize; n];
    for _ in 0..total {
        words.push(word.clone());
        let mut i = n;
        while i > 0 {
            i -= 1;
            word[i] += 1;
            if word[i] < w.input_size() {
                break;
            }
            word[i] = 0;
        }
    }
    // Walk the m-combinations of indices in lexicographic order.
    let mut choice: Vec<usize> = (0..m).collect();
    let mut best = f64::INFINITY;
    loop {
        let code = Code::new(n, choice.iter().map(|&i| words[i].clone()).collect())?;
        best = best.min(code_error(&code, w)?);
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if choice[i] < total - m + i {
                choice[i] += 1;
                for j in i + 1..m {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_channel, random_channel_with, random_simplex_point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bsc(delta: f64) -> Channel {
        Channel::binary_symmetric(delta).unwrap()
    }

    fn binary_entropy(delta: f64) -> f64 {
        -delta * delta.ln() - (1.0 - delta) * (1.0 - delta).ln()
    }

    #[test]
    fn mutual_information_noiseless_and_constant() {
        let uniform = Distribution::uniform(2);
        let i = mutual_information(&uniform, &Channel::identity(2)).unwrap();
        assert!((i - std::f64::consts::LN_2).abs() < 1e-12);

        let constant = Channel::from_rows(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let p = Distribution::new(vec![0.2, 0.8]).unwrap();
        assert!(mutual_information(&p, &constant).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mutual_information_bsc_closed_form() {
        let i = mutual_information(&Distribution::uniform(2), &bsc(0.11)).unwrap();
        let expected = std::f64::consts::LN_2 - binary_entropy(0.11);
        assert!((i - expected).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w = random_channel_with(&mut rng, 3, 4);
            let p = Distribution::new(random_simplex_point(&mut rng, 3)).unwrap();
            let i = mutual_information(&p, &w).unwrap();
            assert!(i >= 0.0);
            assert!(i <= 3.0f64.ln() + 1e-12);
        }
    }

    #[test]
    fn capacity_bsc_and_identity() {
        let r = capacity(&bsc(0.11), 1e-9).unwrap();
        let expected = std::f64::consts::LN_2 - binary_entropy(0.11);
        assert!((r.value - expected).abs() < 1e-6);
        assert!(r.upper_bound - r.lower_bound <= 1e-9);
        assert!(r.lower_bound <= r.value && r.value <= r.upper_bound);

        for k in 2..=4usize {
            let r = capacity(&Channel::identity(k), 1e-9).unwrap();
            assert!((r.value - (k as f64).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn capacity_dominates_sampled_mutual_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_channel_with(&mut rng, 3, 5);
        let c = capacity(&w, 1e-9).unwrap();
        for _ in 0..30 {
            let p = Distribution::new(random_simplex_point(&mut rng, 3)).unwrap();
            let i = mutual_information(&p, &w).unwrap();
            assert!(i <= c.value + 1e-9 + 1e-12);
        }
    }

    #[test]
    fn capacity_maximizer_attains_the_lower_bound() {
        let w = random_channel(3, 4, 33);
        let c = capacity(&w, 1e-9).unwrap();
        let i = mutual_information(&c.maximizing_input, &w).unwrap();
        assert!((i - c.lower_bound).abs() <= 1e-12);
        assert!(c.lower_bound <= c.value && c.value <= c.upper_bound);
    }

    #[test]
    fn capacity_rejects_bad_tolerance() {
        assert!(capacity(&bsc(0.1), 0.0).is_err());
        assert!(capacity(&bsc(0.1), -1e-3).is_err());
    }

    #[test]
    fn map_error_examples() {
        let uniform = Distribution::uniform(2);
        assert!((map_error(&uniform, &bsc(0.11)).unwrap() - 0.11).abs() < 1e-12);
        assert!(map_error(&uniform, &Channel::identity(2)).unwrap().abs() < 1e-15);
        let point = Distribution::point_mass(2, 0);
        assert!(map_error(&point, &bsc(0.37)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn bhattacharyya_examples() {
        let z = bhattacharyya(&bsc(0.11));
        assert!((z - 2.0 * (0.11f64 * 0.89).sqrt()).abs() < 1e-12);
        assert_eq!(bhattacharyya(&Channel::identity(2)), 0.0);
        let constant = Channel::from_rows(&[vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        assert!((bhattacharyya(&constant) - 1.0).abs() < 1e-12);
        let single = Channel::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(bhattacharyya(&single), 0.0);
    }

    #[test]
    fn guess_prob_single_label_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = random_channel_with(&mut rng, 3, 4);
            let p = JointPrior::random(&mut rng, 1, 3);
            assert!((correct_guess_prob(&p, &w).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn guess_prob_matched_pairs_on_bsc() {
        let p = JointPrior::injection(2, &[0, 1]).unwrap();
        let pc = correct_guess_prob(&p, &bsc(0.11)).unwrap();
        assert!((pc - 0.89).abs() < 1e-12);
    }

    #[test]
    fn guess_prob_beats_blind_guessing() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let w = random_channel_with(&mut rng, 3, 4);
            let p = JointPrior::random(&mut rng, 3, 3);
            let pc = correct_guess_prob(&p, &w).unwrap();
            let blind = (0..3)
                .map(|u| (0..3).map(|x| p.weight(u, x)).sum::<f64>())
                .fold(0.0f64, f64::max);
            assert!(pc >= blind - 1e-12);
            assert!(pc <= 1.0);
        }
    }

    #[test]
    fn code_error_examples() {
        let two_words = Code::new(1, vec![vec![0], vec![1]]).unwrap();
        let pe = code_error(&two_words, &bsc(0.11)).unwrap();
        let direct = map_error(&Distribution::uniform(2), &bsc(0.11)).unwrap();
        assert!((pe - direct).abs() < 1e-15);

        let singleton = Code::new(2, vec![vec![1, 0]]).unwrap();
        assert!(code_error(&singleton, &random_channel(2, 3, 3)).unwrap() < 1e-12);

        let repetition = Code::new(2, vec![vec![0, 0], vec![1, 1]]).unwrap();
        assert!((code_error(&repetition, &bsc(0.11)).unwrap() - 0.11).abs() < 1e-12);
    }

    #[test]
    fn code_error_guards() {
        let code = Code::new(1, vec![vec![5]]).unwrap();
        assert!(matches!(
            code_error(&code, &bsc(0.1)),
            Err(Error::DimensionMismatch(_))
        ));
        let long = Code::new(30, vec![vec![0; 30]]).unwrap();
        assert!(matches!(
            code_error(&long, &bsc(0.1)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn code_rejects_duplicates_and_ragged_words() {
        assert!(Code::new(2, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(Code::new(2, vec![vec![0, 1, 0]]).is_err());
        assert!(Code::new(2, vec![]).is_err());
    }

    #[test]
    fn optimal_code_error_examples() {
        // M = 1: a single word is always decoded correctly.
        assert!(optimal_code_error(2, 1, &random_channel(2, 3, 17)).unwrap() < 1e-12);
        // n = 1, M = 2 on a BSC: the only code is {0, 1}.
        assert!((optimal_code_error(1, 2, &bsc(0.11)).unwrap() - 0.11).abs() < 1e-12);
        // Perfect channel, full rate: still error-free.
        assert!(optimal_code_error(1, 3, &Channel::identity(3)).unwrap() < 1e-12);
        // M > |X|^n is out of range.
        assert!(optimal_code_error(1, 5, &bsc(0.11)).is_err());
    }

    #[test]
    fn optimal_code_error_guard() {
        // C(4^10, 5) blows past the cap.
        assert!(matches!(
            optimal_code_error(10, 5, &random_channel(4, 2, 1)),
            Err(Error::TooLarge { .. })
        ));
    }
}
