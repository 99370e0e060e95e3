//! Built-in invariant suites.
//!
//! [`run`] executes every cross-module identity and property the library
//! relies on, against seeded random instances, and returns a deterministic
//! report: same seed, same build, byte-identical rendering. The CLI exposes
//! this as the `selftest` command.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    composition_residual, is_degraded, noisiness_lower_bound, NoisinessBudget,
};
use crate::channel::{channel_distance, compose, random_channel_with, Channel};
use crate::dist::Distribution;
use crate::measure::{
    equivalent, measures_equal, minus_convolve, mixture, plus_convolve, tensor, BlackwellMeasure,
};
use crate::ops::{channel_product, channel_sum, interpolate, polar_minus, polar_plus, BinaryOp};
use crate::params::{
    bhattacharyya, capacity, code_error, correct_guess_prob, map_error, mutual_information, Code,
    JointPrior,
};
use crate::{EPS_RECON, LP_TOL};

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: u32,
    pub failed: u32,
    pub failures: Vec<String>,
}

/// Outcome of a full selftest run.
#[derive(Debug, Clone)]
pub struct SelfTestReport {
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }

    /// Fixed-format rendering; byte-identical for identical runs.
    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        let mut passed = 0;
        let mut failed = 0;
        for suite in &self.suites {
            out.push_str(&format!(
                "suite {}: {} passed, {} failed\n",
                suite.name, suite.passed, suite.failed
            ));
            for f in &suite.failures {
                out.push_str(&format!("  FAIL {f}\n"));
            }
            passed += suite.passed;
            failed += suite.failed;
        }
        out.push_str(&format!("total: {passed} passed, {failed} failed\n"));
        out
    }
}

struct Suite {
    name: &'static str,
    passed: u32,
    failed: u32,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.failures.push(label.to_string());
        }
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            name: self.name,
            passed: self.passed,
            failed: self.failed,
            failures: self.failures,
        }
    }
}

fn rng_for(seed: u64, lane: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(lane.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn random_prior<R: Rng>(rng: &mut R, n: usize) -> Distribution {
    Distribution::new(crate::channel::random_simplex_point(rng, n))
        .expect("simplex samples are distributions")
}

/// Runs every suite and collects the report.
pub fn run(seed: u64) -> SelfTestReport {
    SelfTestReport {
        seed,
        suites: vec![
            channel_core_suite(seed),
            parameters_suite(seed),
            operations_suite(seed),
            blackwell_suite(seed),
            analysis_suite(seed),
        ],
    }
}

fn channel_core_suite(seed: u64) -> SuiteOutcome {
    let mut s = Suite::new("channel-core");
    let mut rng = rng_for(seed, 1);

    for i in 0..50 {
        let w = random_channel_with(&mut rng, 2 + i % 3, 2 + i % 5);
        let dec = w.decompose();
        let n = w.input_size() as f64;
        let ok = dec.image().iter().enumerate().all(|(k, &y)| {
            (0..w.input_size()).all(|x| {
                (n * dec.output_dist().get(y) * dec.posteriors()[k].get(x) - w.prob(x, y)).abs()
                    <= EPS_RECON
            })
        });
        s.check(&format!("reconstruction identity #{i}"), ok);
    }
    // A dead output column stays out of the image.
    let dead = Channel::from_rows(&[vec![0.7, 0.0, 0.3], vec![0.4, 0.0, 0.6]]).unwrap();
    s.check("dead column excluded from image", dead.decompose().image() == [0, 2]);

    for i in 0..30 {
        let a = random_channel_with(&mut rng, 3, 4);
        let b = random_channel_with(&mut rng, 3, 4);
        let c = random_channel_with(&mut rng, 3, 4);
        let dab = channel_distance(&a, &b).unwrap();
        let dba = channel_distance(&b, &a).unwrap();
        let dac = channel_distance(&a, &c).unwrap();
        let dbc = channel_distance(&b, &c).unwrap();
        let ok = dab >= 0.0
            && dab == dba
            && channel_distance(&a, &a).unwrap() == 0.0
            && dab > 0.0
            && dac <= dab + dbc + 1e-12;
        s.check(&format!("metric axioms #{i}"), ok);
    }

    for i in 0..20 {
        let a = random_channel_with(&mut rng, 4, 3);
        let b = random_channel_with(&mut rng, 3, 4);
        let c = random_channel_with(&mut rng, 2, 3);
        let left = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        let right = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        s.check(
            &format!("composition associativity #{i}"),
            channel_distance(&left, &right).unwrap() <= 1e-12,
        );
    }

    for i in 0..20 {
        let f: Vec<usize> = (0..3).map(|_| rng.random_range(0..4)).collect();
        let g: Vec<usize> = (0..4).map(|_| rng.random_range(0..3)).collect();
        let df = Channel::deterministic(&f, 4).unwrap();
        let dg = Channel::deterministic(&g, 3).unwrap();
        let gof: Vec<usize> = f.iter().map(|&x| g[x]).collect();
        s.check(
            &format!("deterministic composition #{i}"),
            compose(&dg, &df).unwrap() == Channel::deterministic(&gof, 3).unwrap(),
        );
    }
    s.finish()
}

fn parameters_suite(seed: u64) -> SuiteOutcome {
    let mut s = Suite::new("parameters");
    let mut rng = rng_for(seed, 2);

    let mut bound_violations = 0u32;
    for _ in 0..1000 {
        let nx = rng.random_range(2..=5);
        let ny = rng.random_range(2..=6);
        let w = random_channel_with(&mut rng, nx, ny);
        let z = bhattacharyya(&w);
        let pe = map_error(&Distribution::uniform(nx), &w).unwrap();
        if !(0.25 * z * z <= pe + 1e-12 && pe <= (nx - 1) as f64 * z + 1e-12) {
            bound_violations += 1;
        }
    }
    s.check(
        &format!("bhattacharyya bounds on 1000 channels ({bound_violations} violations)"),
        bound_violations == 0,
    );

    for i in 0..10 {
        let w = random_channel_with(&mut rng, 3, 4);
        let c = capacity(&w, 1e-9).unwrap();
        let ok = (0..10).all(|_| {
            let p = random_prior(&mut rng, 3);
            mutual_information(&p, &w).unwrap() <= c.value + 1e-9 + 1e-12
        });
        s.check(&format!("capacity dominates I #{i}"), ok);
    }

    for i in 0..50 {
        let w = random_channel_with(&mut rng, 3, 4);
        let p1 = random_prior(&mut rng, 3);
        let p2 = random_prior(&mut rng, 3);
        let mid = Distribution::new(
            p1.weights()
                .iter()
                .zip(p2.weights())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
        .unwrap();
        let concave_i = mutual_information(&mid, &w).unwrap()
            >= 0.5 * mutual_information(&p1, &w).unwrap()
                + 0.5 * mutual_information(&p2, &w).unwrap()
                - 1e-12;
        let concave_pe = map_error(&mid, &w).unwrap()
            >= 0.5 * map_error(&p1, &w).unwrap() + 0.5 * map_error(&p2, &w).unwrap() - 1e-12;
        s.check(&format!("I and P_e concave in p #{i}"), concave_i && concave_pe);
    }

    for i in 0..50 {
        let p = random_prior(&mut rng, 3);
        let w1 = random_channel_with(&mut rng, 3, 4);
        let w2 = random_channel_with(&mut rng, 3, 4);
        let mid_rows: Vec<Vec<f64>> = (0..3)
            .map(|x| {
                w1.row(x)
                    .iter()
                    .zip(w2.row(x))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            })
            .collect();
        let mid = Channel::from_rows(&mid_rows).unwrap();
        let convex_i = mutual_information(&p, &mid).unwrap()
            <= 0.5 * mutual_information(&p, &w1).unwrap()
                + 0.5 * mutual_information(&p, &w2).unwrap()
                + 1e-12;
        let concave_pe = map_error(&p, &mid).unwrap()
            >= 0.5 * map_error(&p, &w1).unwrap() + 0.5 * map_error(&p, &w2).unwrap() - 1e-12;
        s.check(
            &format!("I convex / P_e concave in W #{i}"),
            convex_i && concave_pe,
        );
    }

    for i in 0..10 {
        let w = random_channel_with(&mut rng, 3, 4);
        let p = JointPrior::random(&mut rng, 1, 3);
        s.check(
            &format!("single-label guessing is certain #{i}"),
            correct_guess_prob(&p, &w).unwrap() == 1.0,
        );
    }
    let noiseless = correct_guess_prob(
        &JointPrior::injection(3, &[0, 1, 2]).unwrap(),
        &Channel::identity(3),
    )
    .unwrap();
    s.check(
        "matched labels over a noiseless channel",
        (noiseless - 1.0).abs() <= 1e-12,
    );

    for i in 0..10 {
        let w1 = random_channel_with(&mut rng, 2, 3);
        let w2 = random_channel_with(&mut rng, 3, 2);
        let c1 = capacity(&w1, 1e-7).unwrap().value;
        let c2 = capacity(&w2, 1e-7).unwrap().value;
        let c_sum = capacity(&channel_sum(&w1, &w2), 1e-7).unwrap().value;
        let c_prod = capacity(&channel_product(&w1, &w2), 1e-7).unwrap().value;
        let sum_ok = (c_sum.exp() - c1.exp() - c2.exp()).abs() <= 1e-5;
        let prod_ok = (c_prod - c1 - c2).abs() <= 1e-5;
        s.check(&format!("capacity identities for sum/product #{i}"), sum_ok && prod_ok);
    }
    s.finish()
}

fn operations_suite(seed: u64) -> SuiteOutcome {
    let mut s = Suite::new("operations");
    let mut rng = rng_for(seed, 3);
    let xor = BinaryOp::xor();
    let add3 = BinaryOp::modular_add(3);

    for i in 0..30 {
        let w1 = random_channel_with(&mut rng, 2, 3);
        let w2 = random_channel_with(&mut rng, 2, 4);
        let outputs = [
            channel_sum(&w1, &w2),
            channel_product(&w1, &w2),
            interpolate(0.3, &w1, &w2).unwrap(),
            polar_minus(&w1, &xor).unwrap(),
            polar_plus(&w1, &xor).unwrap(),
        ];
        let ok = outputs.iter().all(|w| {
            (0..w.input_size()).all(|x| (w.row(x).iter().sum::<f64>() - 1.0).abs() <= 1e-12)
        });
        s.check(&format!("operation outputs are channels #{i}"), ok);
    }

    for i in 0..10 {
        let w1p = random_channel_with(&mut rng, 2, 3);
        let w2p = random_channel_with(&mut rng, 3, 2);
        let v1 = random_channel_with(&mut rng, 3, 2);
        let v2 = random_channel_with(&mut rng, 2, 3);
        let lhs = channel_sum(&compose(&v1, &w1p).unwrap(), &compose(&v2, &w2p).unwrap());
        let rhs = compose(&channel_sum(&v1, &v2), &channel_sum(&w1p, &w2p)).unwrap();
        s.check(&format!("sum of garblings factors exactly #{i}"), lhs == rhs);
    }

    for (op, nx, count) in [(&xor, 2usize, 30usize), (&add3, 3, 20)] {
        for i in 0..count {
            let ny = rng.random_range(2..=4);
            let w = random_channel_with(&mut rng, nx, ny);
            let uniform = Distribution::uniform(nx);
            let i_w = mutual_information(&uniform, &w).unwrap();
            let i_minus =
                mutual_information(&uniform, &polar_minus(&w, op).unwrap()).unwrap();
            let i_plus = mutual_information(&uniform, &polar_plus(&w, op).unwrap()).unwrap();
            let conserved = (i_minus + i_plus - 2.0 * i_w).abs() <= 1e-9;
            let ordered = i_plus >= i_w - 1e-12 && i_w >= i_minus - 1e-12;
            s.check(
                &format!("polar chain rule and ordering on {nx} inputs #{i}"),
                conserved && ordered,
            );
        }
    }

    for i in 0..10 {
        let w1 = random_channel_with(&mut rng, 3, 2);
        let w2 = random_channel_with(&mut rng, 3, 4);
        let alpha = rng.random::<f64>();
        let w = interpolate(alpha, &w1, &w2).unwrap();
        let ok = (0..3).all(|x| {
            (w.row(x)[..2].iter().sum::<f64>() - alpha).abs() <= 1e-12
        });
        s.check(&format!("interpolation block mass #{i}"), ok);
    }
    s.finish()
}

fn blackwell_suite(seed: u64) -> SuiteOutcome {
    let mut s = Suite::new("blackwell");
    let mut rng = rng_for(seed, 4);

    for i in 0..100 {
        let w = random_channel_with(&mut rng, 2 + i % 3, 2 + i % 5);
        let m = BlackwellMeasure::from_channel(&w);
        let balanced = m.balance_deviation() <= 1e-10;
        let sorted = m
            .atoms()
            .windows(2)
            .all(|p| p[0].posterior().weights() <= p[1].posterior().weights());
        let separated = m.atoms().iter().enumerate().all(|(a, x)| {
            m.atoms()
                .iter()
                .skip(a + 1)
                .all(|y| x.posterior().l1_distance(y.posterior()) > crate::ATOM_TOL)
        });
        let in_range = m.rank() <= w.decompose().image().len()
            && w.decompose().image().len() <= w.output_size();
        s.check(
            &format!("measure canonical, balanced, rank-bounded #{i}"),
            balanced && sorted && separated && in_range,
        );

        let rebuilt = m.to_channel().unwrap();
        let m2 = BlackwellMeasure::from_channel(&rebuilt);
        let round_trip = m.rank() == m2.rank()
            && m.atoms().iter().zip(m2.atoms()).all(|(a, b)| {
                a.posterior().l1_distance(b.posterior()) <= 1e-10
                    && (a.weight() - b.weight()).abs() <= 1e-10
            });
        s.check(&format!("measure/channel round trip #{i}"), round_trip);

        let atoms = m
            .atoms()
            .iter()
            .map(|a| (a.posterior().clone(), a.weight()))
            .collect();
        let recanon = BlackwellMeasure::from_atoms(m.alphabet_size(), atoms).unwrap();
        s.check(&format!("canonicalization idempotent #{i}"), recanon == m);
    }

    for i in 0..200 {
        let nx = 2 + i % 3;
        let w = random_channel_with(&mut rng, nx, 2 + i % 4);
        let p = random_prior(&mut rng, nx);
        let m = BlackwellMeasure::from_channel(&w);
        let uniform = Distribution::uniform(nx);
        let ok = (mutual_information(&p, &w).unwrap() - m.mutual_information(&p).unwrap()).abs()
            <= 1e-9
            && (map_error(&p, &w).unwrap() - m.map_error(&p).unwrap()).abs() <= 1e-9
            && (bhattacharyya(&w) - m.bhattacharyya().unwrap()).abs() <= 1e-9
            && (map_error(&uniform, &w).unwrap() - m.map_error(&uniform).unwrap()).abs() <= 1e-9;
        s.check(&format!("parameters agree on both routes #{i}"), ok);
    }

    for i in 0..200 {
        let nx = 2 + i % 2;
        let w = random_channel_with(&mut rng, nx, 2 + i % 2);
        let m = BlackwellMeasure::from_channel(&w);
        let mut words = Vec::new();
        while words.len() < 2 + i % 2 {
            let cand: Vec<usize> = (0..2).map(|_| rng.random_range(0..nx)).collect();
            if !words.contains(&cand) {
                words.push(cand);
            }
        }
        let code = Code::new(2, words).unwrap();
        let ok = (code_error(&code, &w).unwrap() - m.code_error(&code).unwrap()).abs() <= 1e-9;
        s.check(&format!("code error agrees on both routes #{i}"), ok);
    }

    for (op, nx) in [(BinaryOp::xor(), 2usize), (BinaryOp::modular_add(3), 3)] {
        for i in 0..10 {
            let ny1 = rng.random_range(2..=4);
            let ny2 = rng.random_range(2..=4);
            let w1 = random_channel_with(&mut rng, nx, ny1);
            let w2 = random_channel_with(&mut rng, nx, ny2);
            let m1 = BlackwellMeasure::from_channel(&w1);
            let m2 = BlackwellMeasure::from_channel(&w2);

            let n1 = w1.input_size();
            let n2 = w2.input_size();
            let inj1: Vec<usize> = (0..n1).collect();
            let inj2: Vec<usize> = (n1..n1 + n2).collect();
            let lifted1 = m1.push_forward(&inj1, n1 + n2).unwrap();
            let lifted2 = m2.push_forward(&inj2, n1 + n2).unwrap();
            let frac = n1 as f64 / (n1 + n2) as f64;
            let sum_formula = mixture(&[(frac, &lifted1), (1.0 - frac, &lifted2)]).unwrap();
            let sum_direct = BlackwellMeasure::from_channel(&channel_sum(&w1, &w2));
            s.check(
                &format!("sum formula on measures ({nx} inputs) #{i}"),
                measures_equal(&sum_formula, &sum_direct).unwrap(),
            );

            let prod_direct = BlackwellMeasure::from_channel(&channel_product(&w1, &w2));
            s.check(
                &format!("tensor formula on measures ({nx} inputs) #{i}"),
                measures_equal(&tensor(&m1, &m2).unwrap(), &prod_direct).unwrap(),
            );

            let interp_ok = [0.0, 0.3, 1.0].iter().all(|&alpha| {
                let direct =
                    BlackwellMeasure::from_channel(&interpolate(alpha, &w1, &w2).unwrap());
                let formula = mixture(&[(alpha, &m1), (1.0 - alpha, &m2)]).unwrap();
                measures_equal(&direct, &formula).unwrap()
            });
            s.check(&format!("interpolation formula on measures ({nx} inputs) #{i}"), interp_ok);

            let minus_direct = BlackwellMeasure::from_channel(&polar_minus(&w1, &op).unwrap());
            s.check(
                &format!("minus convolution matches polar ({nx} inputs) #{i}"),
                measures_equal(&minus_convolve(&m1, &m1, &op).unwrap(), &minus_direct).unwrap(),
            );
            let plus_direct = BlackwellMeasure::from_channel(&polar_plus(&w1, &op).unwrap());
            s.check(
                &format!("plus convolution matches polar ({nx} inputs) #{i}"),
                measures_equal(&plus_convolve(&m1, &m1, &op).unwrap(), &plus_direct).unwrap(),
            );
        }
    }
    s.finish()
}

fn analysis_suite(seed: u64) -> SuiteOutcome {
    let mut s = Suite::new("analysis");
    let mut rng = rng_for(seed, 5);

    let mut mismatches = 0u32;
    for i in 0..200 {
        let nx = 2 + i % 2;
        let w1 = random_channel_with(&mut rng, nx, 2 + i % 3);
        let w2 = if i % 3 == 0 {
            // A genuine equivalent: permute outputs and split a column.
            let rows: Vec<Vec<f64>> = (0..nx)
                .map(|x| {
                    let mut r: Vec<f64> = w1.row(x).to_vec();
                    r.rotate_left(1);
                    let head = r[0];
                    r[0] = 0.5 * head;
                    r.push(0.5 * head);
                    r
                })
                .collect();
            Channel::from_rows(&rows).unwrap()
        } else {
            random_channel_with(&mut rng, nx, 2 + i % 3)
        };
        let blackwell = equivalent(&w1, &w2).unwrap();
        let lp = is_degraded(&w1, &w2).unwrap().is_degraded()
            && is_degraded(&w2, &w1).unwrap().is_degraded();
        if blackwell != lp {
            mismatches += 1;
        }
    }
    s.check(
        &format!("Blackwell equivalence matches two-sided LP on 200 pairs ({mismatches} mismatches)"),
        mismatches == 0,
    );

    for i in 0..20 {
        let w = random_channel_with(&mut rng, 3, 4);
        let w1 = compose(&random_channel_with(&mut rng, 4, 3), &w).unwrap();
        let w2 = compose(&random_channel_with(&mut rng, 3, 3), &w1).unwrap();
        let a = is_degraded(&w1, &w).unwrap();
        let b = is_degraded(&w2, &w1).unwrap();
        let ok = match (a.witness(), b.witness()) {
            (Some(a), Some(b)) => {
                let chained = compose(&b.intermediate, &a.intermediate).unwrap();
                composition_residual(&chained, &w, &w2) <= 2.0 * LP_TOL
            }
            _ => false,
        };
        s.check(&format!("degradation witnesses chain #{i}"), ok);
    }

    for i in 0..10 {
        let w1p = random_channel_with(&mut rng, 2, 3);
        let w2p = random_channel_with(&mut rng, 2, 3);
        let w1 = compose(&random_channel_with(&mut rng, 3, 2), &w1p).unwrap();
        let w2 = compose(&random_channel_with(&mut rng, 3, 4), &w2p).unwrap();
        let ok = is_degraded(&channel_sum(&w1, &w2), &channel_sum(&w1p, &w2p))
            .unwrap()
            .is_degraded();
        s.check(&format!("sums preserve degradation #{i}"), ok);
    }

    let budget = NoisinessBudget {
        m_max: 4,
        samples: 50,
        seed,
    };
    for i in 0..5 {
        let w1 = random_channel_with(&mut rng, 2, 3);
        // An equivalent copy by output permutation.
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|x| {
                let mut r = w1.row(x).to_vec();
                r.reverse();
                r
            })
            .collect();
        let w2 = Channel::from_rows(&rows).unwrap();
        let est = noisiness_lower_bound(&w1, &w2, &budget).unwrap();
        s.check(
            &format!("noisiness vanishes on equivalents #{i}"),
            est.lower_bound <= 1e-12,
        );
        let other = random_channel_with(&mut rng, 2, 3);
        let est = noisiness_lower_bound(&w1, &other, &budget).unwrap();
        s.check(&format!("noisiness bounded by one #{i}"), est.lower_bound <= 1.0);
    }

    for i in 0..20 {
        let w = random_channel_with(&mut rng, 3, 4);
        let garbled = compose(&random_channel_with(&mut rng, 4, 3), &w).unwrap();
        let ok = (0..10).all(|_| {
            let p = JointPrior::random(&mut rng, 3, 3);
            correct_guess_prob(&p, &garbled).unwrap()
                <= correct_guess_prob(&p, &w).unwrap() + LP_TOL
        });
        s.check(&format!("garbling cannot help guessing #{i}"), ok);
    }
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_is_deterministic() {
        let a = run(0);
        assert!(a.all_passed(), "failures:\n{}", a.render());
        let b = run(0);
        assert_eq!(a.render(), b.render());
    }
}
