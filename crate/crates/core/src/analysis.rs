//! Order and distance structure on equivalence classes: LP-based
//! degradation testing, a certified lower bound on the noisiness distance,
//! the total-variation class distance, and empirical continuity probes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{channel_distance, Channel};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::measure::{tv_distance, BlackwellMeasure};
use crate::params::{bhattacharyya, capacity, correct_guess_prob, map_error, mutual_information, JointPrior};
use crate::simplex::phase_one;
use crate::LP_TOL;

/// A feasible garbling for a degradation query: a channel `V` with
/// `W' = V o W` up to `residual`.
#[derive(Debug, Clone)]
pub struct DegradationWitness {
    /// The intermediate channel `V` from the outputs of `W` to those of `W'`.
    pub intermediate: Channel,
    /// Largest absolute violation of `sum_y V(z|y) W(y|x) = W'(z|x)`.
    pub residual: f64,
}

/// Outcome of a degradation query. `NotDegraded` is a result, not an error.
#[derive(Debug, Clone)]
pub enum Degradation {
    Degraded(DegradationWitness),
    NotDegraded,
}

impl Degradation {
    pub fn is_degraded(&self) -> bool {
        matches!(self, Degradation::Degraded(_))
    }

    pub fn witness(&self) -> Option<&DegradationWitness> {
        match self {
            Degradation::Degraded(w) => Some(w),
            Degradation::NotDegraded => None,
        }
    }
}

/// Decides whether `w_prime` is degraded from `w` (same input alphabet):
/// whether some channel `V` satisfies `W'(z|x) = sum_y V(z|y) W(y|x)`.
///
/// Solved as a phase-1 feasibility LP in the variables `V(z|y) >= 0` with
/// row-sum and composition equality constraints; feasible iff the optimal
/// artificial slack is at most [`LP_TOL`].
pub fn is_degraded(w_prime: &Channel, w: &Channel) -> Result<Degradation> {
    if w_prime.input_size() != w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "degradation between channels with {} and {} inputs",
            w_prime.input_size(),
            w.input_size()
        )));
    }
    let ny = w.output_size();
    let nz = w_prime.output_size();
    let vars = ny * nz; // V(z|y) at index y * nz + z
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(ny + w.input_size() * nz);
    let mut b: Vec<f64> = Vec::with_capacity(a.capacity());
    for y in 0..ny {
        let mut row = vec![0.0; vars];
        for z in 0..nz {
            row[y * nz + z] = 1.0;
        }
        a.push(row);
        b.push(1.0);
    }
    for x in 0..w.input_size() {
        for z in 0..nz {
            let mut row = vec![0.0; vars];
            for y in 0..ny {
                row[y * nz + z] = w.prob(x, y);
            }
            a.push(row);
            b.push(w_prime.prob(x, z));
        }
    }
    let sol = phase_one(&a, &b)?;
    if sol.objective > LP_TOL {
        return Ok(Degradation::NotDegraded);
    }
    let rows: Vec<Vec<f64>> = (0..ny)
        .map(|y| {
            let raw: Vec<f64> = (0..nz).map(|z| sol.x[y * nz + z].max(0.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    let intermediate = Channel::from_rows(&rows)?;
    let residual = composition_residual(&intermediate, w, w_prime);
    Ok(Degradation::Degraded(DegradationWitness {
        intermediate,
        residual,
    }))
}

/// `max_{x,z} |sum_y V(z|y) W(y|x) - W'(z|x)|`.
pub fn composition_residual(v: &Channel, w: &Channel, w_prime: &Channel) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..w.input_size() {
        for z in 0..w_prime.output_size() {
            let got: f64 = (0..w.output_size())
                .map(|y| v.prob(y, z) * w.prob(x, y))
                .sum();
            worst = worst.max((got - w_prime.prob(x, z)).abs());
        }
    }
    worst
}

/// Search budget of [`noisiness_lower_bound`].
#[derive(Debug, Clone)]
pub struct NoisinessBudget {
    /// Largest label-alphabet size `m` tried.
    pub m_max: usize,
    /// Dirichlet draws per `m`.
    pub samples: usize,
    pub seed: u64,
}

impl NoisinessBudget {
    /// Default budget for channels with `input_size` inputs: `m` up to
    /// `input_size + 2` and 200 random priors per `m`.
    pub fn for_input(input_size: usize) -> Self {
        Self {
            m_max: input_size + 2,
            samples: 200,
            seed: 0,
        }
    }
}

/// A certified lower bound on the noisiness distance, with its witness.
#[derive(Debug, Clone)]
pub struct NoisinessEstimate {
    /// `|P_c(p, W1) - P_c(p, W2)|` at the witness prior: a lower bound on
    /// the supremum over all priors, not the exact distance.
    pub lower_bound: f64,
    pub m_max_used: usize,
    /// Total priors evaluated.
    pub priors_sampled: usize,
    pub witness_prior: JointPrior,
}

/// Evaluates the guessing-probability gap `|P_c(p, W1) - P_c(p, W2)|` over a
/// deterministic prior family (all vertex priors, all uniform-over-matching
/// injection priors, plus seeded Dirichlet draws, for each `m` up to the
/// budget) and returns the largest gap found together with its witness.
pub fn noisiness_lower_bound(
    w1: &Channel,
    w2: &Channel,
    budget: &NoisinessBudget,
) -> Result<NoisinessEstimate> {
    if w1.input_size() != w2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "noisiness between channels with {} and {} inputs",
            w1.input_size(),
            w2.input_size()
        )));
    }
    let n = w1.input_size();
    let mut best_gap = -1.0;
    let mut best_prior = None;
    let mut sampled = 0usize;
    let mut consider = |p: JointPrior| -> Result<()> {
        let gap = (correct_guess_prob(&p, w1)? - correct_guess_prob(&p, w2)?).abs();
        sampled += 1;
        if gap > best_gap {
            best_gap = gap;
            best_prior = Some(p);
        }
        Ok(())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for m in 1..=budget.m_max.max(1) {
        for u in 0..m {
            for x in 0..n {
                consider(JointPrior::vertex(m, n, u, x))?;
            }
        }
        if m <= n {
            for sigma in injections(m, n) {
                consider(JointPrior::injection(n, &sigma)?)?;
            }
        }
        for _ in 0..budget.samples {
            consider(JointPrior::random(&mut rng, m, n))?;
        }
    }
    Ok(NoisinessEstimate {
        lower_bound: best_gap.max(0.0),
        m_max_used: budget.m_max.max(1),
        priors_sampled: sampled,
        witness_prior: best_prior.expect("at least one prior is always evaluated"),
    })
}

/// All injections `[m] -> 0..n`, in lexicographic order.
fn injections(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; n];
    fn rec(
        m: usize,
        n: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == m {
            out.push(current.clone());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                current.push(x);
                rec(m, n, current, used, out);
                current.pop();
                used[x] = false;
            }
        }
    }
    rec(m, n, &mut current, &mut used, &mut out);
    out
}

/// Total-variation distance between equivalence classes: the TV distance of
/// the Blackwell measures.
pub fn tv_class_distance(w1: &Channel, w2: &Channel) -> Result<f64> {
    if w1.input_size() != w2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "class distance between channels with {} and {} inputs",
            w1.input_size(),
            w2.input_size()
        )));
    }
    tv_distance(
        &BlackwellMeasure::from_channel(w1),
        &BlackwellMeasure::from_channel(w2),
    )
}

/// Parameter evaluated by [`continuity_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeParam {
    /// Capacity, solved to a 1e-9 gap.
    Capacity,
    /// Mutual information under the uniform input.
    SymmetricMutualInformation,
    /// MAP error under the uniform input.
    SymmetricMapError,
    Bhattacharyya,
}

fn eval_param(param: ProbeParam, w: &Channel) -> Result<f64> {
    let uniform = Distribution::uniform(w.input_size());
    match param {
        ProbeParam::Capacity => Ok(capacity(w, 1e-9)?.value),
        ProbeParam::SymmetricMutualInformation => mutual_information(&uniform, w),
        ProbeParam::SymmetricMapError => map_error(&uniform, w),
        ProbeParam::Bhattacharyya => Ok(bhattacharyya(w)),
    }
}

/// Result of a perturbation probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    /// Largest `|param(W') - param(W)|` over the sampled perturbations.
    pub max_param_deviation: f64,
    /// Largest channel distance actually reached (at most the radius).
    pub max_channel_distance: f64,
    pub samples: usize,
}

/// Samples channels within `radius` of `w` (zero-sum noise per row, clipped
/// back onto the simplex, shrunk to the radius) and reports the largest
/// parameter deviation observed. An empirical probe, not a proved modulus
/// of continuity.
pub fn continuity_probe(
    w: &Channel,
    param: ProbeParam,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::BadWeights(format!(
            "probe radius must be nonnegative, got {radius}"
        )));
    }
    let base = eval_param(param, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    let mut max_dist = 0.0f64;
    for _ in 0..samples {
        let perturbed = perturb(w, radius, &mut rng)?;
        let d = channel_distance(w, &perturbed)?;
        let dev = (eval_param(param, &perturbed)? - base).abs();
        max_dev = max_dev.max(dev);
        max_dist = max_dist.max(d);
    }
    Ok(ProbeReport {
        max_param_deviation: max_dev,
        max_channel_distance: max_dist,
        samples,
    })
}

/// One perturbation: scaled zero-sum noise per row, clipped to the simplex,
/// then pulled back toward `w` if the clip left it beyond `radius`.
fn perturb<R: rand::Rng>(w: &Channel, radius: f64, rng: &mut R) -> Result<Channel> {
    let noise: Vec<Vec<f64>> = (0..w.input_size())
        .map(|_| {
            let mut g: Vec<f64> = (0..w.output_size())
                .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                .collect();
            let mean: f64 = g.iter().sum::<f64>() / g.len() as f64;
            for v in &mut g {
                *v -= mean;
            }
            g
        })
        .collect();
    if radius == 0.0 {
        return Ok(w.clone());
    }
    let max_l1 = noise
        .iter()
        .map(|g| g.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if max_l1 == 0.0 {
        return Ok(w.clone());
    }
    let scale = 2.0 * radius / max_l1;
    let rows: Vec<Vec<f64>> = (0..w.input_size())
        .map(|x| {
            let raw: Vec<f64> = w
                .row(x)
                .iter()
                .zip(&noise[x])
                .map(|(&p, &g)| (p + scale * g).max(0.0))
                .collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    let candidate = Channel::from_rows(&rows)?;
    let d = channel_distance(w, &candidate)?;
    if d <= radius {
        return Ok(candidate);
    }
    // The distance scales linearly along the segment toward w, so one pull
    // lands exactly on the radius.
    let t = radius / d;
    let rows: Vec<Vec<f64>> = (0..w.input_size())
        .map(|x| {
            w.row(x)
                .iter()
                .zip(candidate.row(x))
                .map(|(&p, &q)| p + t * (q - p))
                .collect()
        })
        .collect();
    Channel::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{compose, random_channel, random_channel_with};
    use crate::measure::equivalent;
    use crate::ops::channel_sum;

    fn bsc(delta: f64) -> Channel {
        Channel::binary_symmetric(delta).unwrap()
    }

    #[test]
    fn every_channel_degrades_to_itself() {
        let w = random_channel(3, 4, 2);
        let outcome = is_degraded(&w, &w).unwrap();
        let witness = outcome.witness().expect("identity garbling is feasible");
        assert!(witness.residual <= LP_TOL);
    }

    #[test]
    fn bsc_degradation_order() {
        // BSC(0.2) = BSC(1/8) o BSC(0.1): hand-checkable witness.
        let hand = compose(&bsc(0.125), &bsc(0.1)).unwrap();
        assert!(channel_distance(&hand, &bsc(0.2)).unwrap() < 1e-12);

        let forward = is_degraded(&bsc(0.2), &bsc(0.1)).unwrap();
        let witness = forward.witness().expect("noisier BSC is degraded");
        assert!(witness.residual <= LP_TOL);

        let reverse = is_degraded(&bsc(0.1), &bsc(0.2)).unwrap();
        assert!(!reverse.is_degraded());
    }

    #[test]
    fn erasure_degradation_order() {
        let clean = Channel::binary_erasure(0.25).unwrap();
        let noisy = Channel::binary_erasure(0.75).unwrap();
        assert!(is_degraded(&noisy, &clean).unwrap().is_degraded());
        assert!(!is_degraded(&clean, &noisy).unwrap().is_degraded());
    }

    #[test]
    fn witnesses_compose_transitively() {
        let w = random_channel(3, 5, 8);
        let v1 = random_channel(5, 4, 9);
        let v2 = random_channel(4, 3, 10);
        let w1 = compose(&v1, &w).unwrap();
        let w2 = compose(&v2, &w1).unwrap();
        let first = is_degraded(&w1, &w).unwrap();
        let second = is_degraded(&w2, &w1).unwrap();
        let (a, b) = (first.witness().unwrap(), second.witness().unwrap());
        let chained = compose(&b.intermediate, &a.intermediate).unwrap();
        assert!(composition_residual(&chained, &w, &w2) <= 2.0 * LP_TOL);
    }

    #[test]
    fn sum_preserves_degradation() {
        let w1p = random_channel(2, 3, 20);
        let w2p = random_channel(2, 4, 21);
        let w1 = compose(&random_channel(3, 3, 22), &w1p).unwrap();
        let w2 = compose(&random_channel(4, 2, 23), &w2p).unwrap();
        let a = is_degraded(&w1, &w1p).unwrap();
        let b = is_degraded(&w2, &w2p).unwrap();
        let (va, vb) = (a.witness().unwrap(), b.witness().unwrap());
        let joint = channel_sum(&va.intermediate, &vb.intermediate);
        let residual = composition_residual(
            &joint,
            &channel_sum(&w1p, &w2p),
            &channel_sum(&w1, &w2),
        );
        assert!(residual <= 2.0 * LP_TOL);
        assert!(is_degraded(&channel_sum(&w1, &w2), &channel_sum(&w1p, &w2p))
            .unwrap()
            .is_degraded());
    }

    #[test]
    fn degradation_agrees_with_blackwell_equivalence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for i in 0..40 {
            let w1 = random_channel_with(&mut rng, 2 + i % 2, 2 + i % 3);
            // Half the pairs are genuine equivalents (output permutation).
            let w2 = if i % 2 == 0 {
                let rows: Vec<Vec<f64>> = (0..w1.input_size())
                    .map(|x| {
                        let mut r: Vec<f64> = w1.row(x).to_vec();
                        r.rotate_left(1);
                        r
                    })
                    .collect();
                Channel::from_rows(&rows).unwrap()
            } else {
                random_channel_with(&mut rng, w1.input_size(), w1.output_size())
            };
            let blackwell = equivalent(&w1, &w2).unwrap();
            let lp = is_degraded(&w1, &w2).unwrap().is_degraded()
                && is_degraded(&w2, &w1).unwrap().is_degraded();
            assert_eq!(blackwell, lp);
        }
    }

    #[test]
    fn noisiness_zero_on_equal_channels() {
        let w = random_channel(2, 3, 60);
        let est = noisiness_lower_bound(&w, &w, &NoisinessBudget::for_input(2)).unwrap();
        assert_eq!(est.lower_bound, 0.0);
        assert!(est.priors_sampled > 0);
    }

    #[test]
    fn noisiness_separates_clean_from_useless() {
        let est = noisiness_lower_bound(
            &bsc(0.0),
            &bsc(0.5),
            &NoisinessBudget::for_input(2),
        )
        .unwrap();
        assert!(est.lower_bound >= 0.5 - 1e-12);
        // The witness gap is recomputable.
        let p = &est.witness_prior;
        let gap = (correct_guess_prob(p, &bsc(0.0)).unwrap()
            - correct_guess_prob(p, &bsc(0.5)).unwrap())
        .abs();
        assert!((gap - est.lower_bound).abs() < 1e-15);
    }

    #[test]
    fn noisiness_is_symmetric_under_the_same_seed() {
        let w1 = random_channel(3, 4, 61);
        let w2 = random_channel(3, 4, 62);
        let budget = NoisinessBudget::for_input(3);
        let a = noisiness_lower_bound(&w1, &w2, &budget).unwrap();
        let b = noisiness_lower_bound(&w2, &w1, &budget).unwrap();
        assert_eq!(a.lower_bound, b.lower_bound);
        assert!(a.lower_bound <= 1.0);
    }

    #[test]
    fn tv_and_noisiness_disagree_on_nearby_bscs() {
        // The TV class distance jumps to 1 on an atom-level mismatch, while
        // the guessing-probability gap stays at the perturbation scale.
        let w1 = bsc(0.1);
        let w2 = bsc(0.1 + 1e-6);
        assert!((tv_class_distance(&w1, &w2).unwrap() - 1.0).abs() < 1e-15);
        let est = noisiness_lower_bound(&w1, &w2, &NoisinessBudget::for_input(2)).unwrap();
        assert!(est.lower_bound <= 1e-5);
        assert_eq!(tv_class_distance(&w1, &bsc(0.1)).unwrap(), 0.0);
    }

    #[test]
    fn probe_with_zero_radius_reports_zero() {
        let report = continuity_probe(&bsc(0.11), ProbeParam::Capacity, 0.0, 8, 0).unwrap();
        assert_eq!(report.max_param_deviation, 0.0);
        assert_eq!(report.max_channel_distance, 0.0);
    }

    #[test]
    fn probe_respects_radius_and_shrinks_with_it() {
        let w = random_channel(2, 3, 70);
        let mut last = f64::INFINITY;
        for level in 0..4 {
            let radius = 1e-2 / f64::powi(2.0, level);
            let report =
                continuity_probe(&w, ProbeParam::SymmetricMutualInformation, radius, 16, 5)
                    .unwrap();
            assert!(report.max_channel_distance <= radius + 1e-12);
            assert!(report.max_param_deviation <= last);
            last = report.max_param_deviation;
        }
    }

    #[test]
    fn probe_capacity_envelope_on_bsc() {
        let report = continuity_probe(&bsc(0.11), ProbeParam::Capacity, 1e-4, 16, 1).unwrap();
        assert!(report.max_param_deviation < 1e-2);
    }
}
