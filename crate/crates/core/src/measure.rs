//! Blackwell measures: canonical finite representations of channel
//! equivalence classes, and the measure-level arithmetic matching every
//! channel operation.
//!
//! The Blackwell measure of a channel places mass `P_o(y)` on the posterior
//! of the uniform input given output `y`. Two channels with the same input
//! alphabet are equivalent (mutually degradable) exactly when their
//! Blackwell measures coincide, so a canonical atom list — zero weights
//! dropped, nearby posteriors merged, atoms sorted — is a decidable
//! representation of the equivalence class. A measure is `balanced` when its
//! mean posterior is uniform; the balanced finitely-supported measures are
//! precisely those that arise from channels, and [`BlackwellMeasure::to_channel`]
//! inverts the construction.

use std::cmp::Ordering;

use crate::channel::Channel;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::ops::BinaryOp;
use crate::params::Code;
use crate::{ATOM_TOL, ENUM_CAP, EPS_BAL, EPS_STOCH, RANK_CAP};

/// One atom of a finitely supported meta-probability measure: a posterior
/// over the input alphabet carrying a positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    posterior: Distribution,
    weight: f64,
}

impl Atom {
    pub fn posterior(&self) -> &Distribution {
        &self.posterior
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// A canonical finitely supported meta-probability measure on the simplex
/// over `0..alphabet_size`.
///
/// Canonical form: no zero-weight atoms, no two posteriors within
/// [`ATOM_TOL`] of each other in L1, atoms sorted lexicographically by
/// posterior vector, weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackwellMeasure {
    alphabet_size: usize,
    atoms: Vec<Atom>,
}

/// Diagnostics from a canonicalization pass.
#[derive(Debug, Clone)]
pub struct MeasureOpReport {
    pub result: BlackwellMeasure,
    /// Atom count entering the merge, after zero-weight atoms are dropped.
    pub atom_count_before_merge: usize,
    /// Number of atoms absorbed into an earlier representative.
    pub merged: usize,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("posterior entries are finite") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl BlackwellMeasure {
    /// The Blackwell measure of a channel: one atom `(posterior_y, P_o(y))`
    /// per output in the image, canonicalized. Always balanced.
    pub fn from_channel(w: &Channel) -> Self {
        let dec = w.decompose();
        let raw: Vec<(Distribution, f64)> = dec
            .image()
            .iter()
            .zip(dec.posteriors())
            .map(|(&y, p)| (p.clone(), dec.output_dist().get(y)))
            .collect();
        Self::from_atoms(w.input_size(), raw)
            .expect("decomposition of a valid channel yields a valid measure")
    }

    /// Canonicalizes raw atoms with the [`ATOM_TOL`] merge tolerance.
    pub fn from_atoms(alphabet_size: usize, raw: Vec<(Distribution, f64)>) -> Result<Self> {
        Ok(Self::canonicalize(alphabet_size, raw, ATOM_TOL)?.result)
    }

    /// Strict canonicalization: only exactly equal posteriors merge. Meant
    /// for rational-valued inputs where no float noise needs absorbing.
    pub fn from_atoms_exact(alphabet_size: usize, raw: Vec<(Distribution, f64)>) -> Result<Self> {
        Ok(Self::canonicalize(alphabet_size, raw, 0.0)?.result)
    }

    /// Full canonicalization with merge diagnostics.
    ///
    /// Drops zero-weight atoms, then walks atoms in lexicographic order and
    /// merges each into the earliest representative whose posterior is
    /// within `merge_tol` in L1 (weights added, posteriors weight-averaged),
    /// and finally sorts the representatives.
    pub fn canonicalize(
        alphabet_size: usize,
        raw: Vec<(Distribution, f64)>,
        merge_tol: f64,
    ) -> Result<MeasureOpReport> {
        if alphabet_size == 0 {
            return Err(Error::DimensionMismatch("empty input alphabet".into()));
        }
        let mut total = 0.0;
        for (p, w) in &raw {
            if p.len() != alphabet_size {
                return Err(Error::DimensionMismatch(format!(
                    "atom posterior over {} symbols in a measure over {alphabet_size}",
                    p.len()
                )));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::BadWeights(format!("atom weight {w}")));
            }
            total += *w;
        }
        if (total - 1.0).abs() > EPS_STOCH {
            return Err(Error::BadWeights(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        let mut live: Vec<(Distribution, f64)> =
            raw.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let atom_count_before_merge = live.len();
        live.sort_by(|a, b| lex_cmp(a.0.weights(), b.0.weights()));

        // Each group keeps running weighted sums so a merged atom's posterior
        // is the weight-average of everything it absorbed; a group that never
        // merges keeps its original atom bit-for-bit, which makes
        // canonicalization idempotent.
        struct Group {
            sum: Vec<f64>,
            weight: f64,
            single: Option<Distribution>,
        }
        let mut groups: Vec<Group> = Vec::new();
        for (p, w) in live {
            let mut target = None;
            for (i, g) in groups.iter().enumerate() {
                let rep_l1: f64 = g
                    .sum
                    .iter()
                    .zip(p.weights())
                    .map(|(s, q)| (s / g.weight - q).abs())
                    .sum();
                if rep_l1 <= merge_tol {
                    target = Some(i);
                    break;
                }
            }
            match target {
                Some(i) => {
                    let g = &mut groups[i];
                    for (s, q) in g.sum.iter_mut().zip(p.weights()) {
                        *s += w * q;
                    }
                    g.weight += w;
                    g.single = None;
                }
                None => groups.push(Group {
                    sum: p.weights().iter().map(|q| w * q).collect(),
                    weight: w,
                    single: Some(p),
                }),
            }
        }
        let merged = atom_count_before_merge - groups.len();
        let mut atoms: Vec<Atom> = groups
            .into_iter()
            .map(|g| Atom {
                posterior: match g.single {
                    Some(p) => p,
                    None => Distribution::normalized(g.sum),
                },
                weight: g.weight,
            })
            .collect();
        atoms.sort_by(|a, b| lex_cmp(a.posterior.weights(), b.posterior.weights()));
        Ok(MeasureOpReport {
            result: BlackwellMeasure {
                alphabet_size,
                atoms,
            },
            atom_count_before_merge,
            merged,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of atoms: the rank of the equivalence class, i.e. the minimal
    /// output-alphabet size of a representative channel.
    pub fn rank(&self) -> usize {
        self.atoms.len()
    }

    /// Largest coordinate deviation of the mean posterior from uniform.
    pub fn balance_deviation(&self) -> f64 {
        let n = self.alphabet_size;
        let target = 1.0 / n as f64;
        let mut worst = 0.0f64;
        for x in 0..n {
            let mean: f64 = self
                .atoms
                .iter()
                .map(|a| a.weight * a.posterior.get(x))
                .sum();
            worst = worst.max((mean - target).abs());
        }
        worst
    }

    /// Whether the mean posterior is uniform within [`EPS_BAL`]; exactly the
    /// measures arising from channels.
    pub fn is_balanced(&self) -> bool {
        self.balance_deviation() <= EPS_BAL
    }

    /// The canonical representative channel: one output per atom, with
    /// `W(y_j | x) = |X| * w_j * p_j(x)`. Errors when the measure is not
    /// balanced, since no channel then exists.
    pub fn to_channel(&self) -> Result<Channel> {
        let deviation = self.balance_deviation();
        if deviation > EPS_BAL {
            return Err(Error::NotBalanced { deviation });
        }
        let n = self.alphabet_size as f64;
        let mut rows = Vec::with_capacity(self.alphabet_size);
        for x in 0..self.alphabet_size {
            let row: Vec<f64> = self
                .atoms
                .iter()
                .map(|a| n * a.weight * a.posterior.get(x))
                .collect();
            // Balance puts each row sum within |X| * EPS_BAL of 1; sweep the
            // remainder out here so validation sees an exact row.
            let sum: f64 = row.iter().sum();
            rows.push(row.into_iter().map(|v| v / sum).collect());
        }
        Channel::from_rows(&rows)
    }

    /// Meta-push-forward along `map: 0..alphabet_size -> 0..target`: every
    /// atom's posterior is pushed forward, weights are kept, and the result
    /// is canonicalized.
    pub fn push_forward(&self, map: &[usize], target: usize) -> Result<Self> {
        let raw: Result<Vec<(Distribution, f64)>> = self
            .atoms
            .iter()
            .map(|a| Ok((a.posterior.push_forward(map, target)?, a.weight)))
            .collect();
        Self::from_atoms(target, raw?)
    }

    fn check_same_alphabet(&self, other: &Self) -> Result<()> {
        if self.alphabet_size != other.alphabet_size {
            return Err(Error::DimensionMismatch(format!(
                "measures over alphabets of size {} and {}",
                self.alphabet_size, other.alphabet_size
            )));
        }
        Ok(())
    }

    /// Error probability of the MAP decoder under prior `p`, evaluated on
    /// the measure: `1 - |X| sum_j w_j max_x p(x) p_j(x)`.
    pub fn map_error(&self, p: &Distribution) -> Result<f64> {
        self.check_prior(p)?;
        self.check_balanced()?;
        let n = self.alphabet_size as f64;
        let integral: f64 = self
            .atoms
            .iter()
            .map(|a| {
                let best = (0..self.alphabet_size)
                    .map(|x| p.get(x) * a.posterior.get(x))
                    .fold(0.0f64, f64::max);
                a.weight * best
            })
            .sum();
        Ok((1.0 - n * integral).max(0.0))
    }

    /// Bhattacharyya parameter evaluated on the measure:
    /// `1/(|X|-1) sum_{x != x'} sum_j w_j sqrt(p_j(x) p_j(x'))`.
    pub fn bhattacharyya(&self) -> Result<f64> {
        self.check_balanced()?;
        let n = self.alphabet_size;
        if n < 2 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for x1 in 0..n {
            for x2 in 0..n {
                if x1 == x2 {
                    continue;
                }
                total += self
                    .atoms
                    .iter()
                    .map(|a| a.weight * (a.posterior.get(x1) * a.posterior.get(x2)).sqrt())
                    .sum::<f64>();
            }
        }
        Ok(total / (n - 1) as f64)
    }

    /// Mutual information under prior `p`, evaluated on the measure as
    /// `H(p) - H(X|Y)` with
    /// `H(X|Y) = -|X| sum_j w_j sum_x a_x ln(a_x / A)` where
    /// `a_x = p(x) p_j(x)` and `A = sum_x a_x`, using `0 ln(0/0) = 0`.
    pub fn mutual_information(&self, p: &Distribution) -> Result<f64> {
        self.check_prior(p)?;
        self.check_balanced()?;
        let n = self.alphabet_size as f64;
        let mut conditional_entropy = 0.0;
        for atom in &self.atoms {
            let a: Vec<f64> = (0..self.alphabet_size)
                .map(|x| p.get(x) * atom.posterior.get(x))
                .collect();
            let total: f64 = a.iter().sum();
            if total == 0.0 {
                continue;
            }
            let inner: f64 = a
                .iter()
                .filter(|&&ax| ax > 0.0)
                .map(|&ax| ax * (ax / total).ln())
                .sum();
            conditional_entropy -= n * atom.weight * inner;
        }
        Ok((p.entropy() - conditional_entropy).max(0.0))
    }

    /// ML-decoding error probability of `code`, evaluated on the n-fold
    /// product measure:
    /// `1 - (|X|^n / |C|) sum_{atom tuples} prod_i w_{j_i} max_{word} prod_i p_{j_i}(word_i)`.
    pub fn code_error(&self, code: &Code) -> Result<f64> {
        self.check_balanced()?;
        for word in code.words() {
            if word.iter().any(|&x| x >= self.alphabet_size) {
                return Err(Error::DimensionMismatch(format!(
                    "codeword symbol outside 0..{}",
                    self.alphabet_size
                )));
            }
        }
        let n = code.blocklength();
        let tuples = (self.rank() as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX);
        if tuples > ENUM_CAP as u128 {
            return Err(Error::TooLarge {
                size: tuples,
                cap: ENUM_CAP,
            });
        }
        let mut integral = 0.0;
        let mut idx = vec![0usize; n];
        loop {
            let weight: f64 = idx.iter().map(|&j| self.atoms[j].weight).product();
            let best = code
                .words()
                .iter()
                .map(|word| {
                    word.iter()
                        .zip(&idx)
                        .map(|(&x, &j)| self.atoms[j].posterior.get(x))
                        .product::<f64>()
                })
                .fold(0.0f64, f64::max);
            integral += weight * best;
            let mut i = n;
            loop {
                if i == 0 {
                    let scale = (self.alphabet_size as f64).powi(n as i32) / code.size() as f64;
                    return Ok((1.0 - scale * integral).max(0.0));
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < self.rank() {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    fn check_prior(&self, p: &Distribution) -> Result<()> {
        if p.len() != self.alphabet_size {
            return Err(Error::DimensionMismatch(format!(
                "prior over {} symbols, measure over {}",
                p.len(),
                self.alphabet_size
            )));
        }
        Ok(())
    }

    fn check_balanced(&self) -> Result<()> {
        let deviation = self.balance_deviation();
        if deviation > EPS_BAL {
            return Err(Error::NotBalanced { deviation });
        }
        Ok(())
    }
}

/// Matches atoms of `a` to atoms of `b` by posterior proximity (L1 within
/// [`ATOM_TOL`]). Returns, for each atom of `a`, the matched index in `b`.
fn match_atoms(a: &BlackwellMeasure, b: &BlackwellMeasure) -> Vec<Option<usize>> {
    let mut taken = vec![false; b.atoms.len()];
    a.atoms
        .iter()
        .map(|atom| {
            for (j, other) in b.atoms.iter().enumerate() {
                if !taken[j] && atom.posterior.l1_distance(&other.posterior) <= ATOM_TOL {
                    taken[j] = true;
                    return Some(j);
                }
            }
            None
        })
        .collect()
}

/// Whether two canonical measures are equal atom-for-atom: posteriors within
/// [`ATOM_TOL`] in L1 and weights within [`EPS_STOCH`].
pub fn measures_equal(a: &BlackwellMeasure, b: &BlackwellMeasure) -> Result<bool> {
    a.check_same_alphabet(b)?;
    if a.rank() != b.rank() {
        return Ok(false);
    }
    let matching = match_atoms(a, b);
    Ok(matching.iter().enumerate().all(|(i, m)| match m {
        Some(j) => (a.atoms[i].weight - b.atoms[*j].weight).abs() <= EPS_STOCH,
        None => false,
    }))
}

/// Total variation distance between two finitely supported measures: atoms
/// are aligned by posterior proximity across the union of supports, and the
/// distance is half the L1 gap of the aligned weights.
pub fn tv_distance(a: &BlackwellMeasure, b: &BlackwellMeasure) -> Result<f64> {
    a.check_same_alphabet(b)?;
    let matching = match_atoms(a, b);
    let mut gap = 0.0;
    let mut hit = vec![false; b.atoms.len()];
    for (i, m) in matching.iter().enumerate() {
        match m {
            Some(j) => {
                gap += (a.atoms[i].weight - b.atoms[*j].weight).abs();
                hit[*j] = true;
            }
            None => gap += a.atoms[i].weight,
        }
    }
    for (j, atom) in b.atoms.iter().enumerate() {
        if !hit[j] {
            gap += atom.weight;
        }
    }
    Ok(0.5 * gap)
}

/// Whether two channels with the same input alphabet are equivalent, i.e.
/// degradable into each other: true exactly when their Blackwell measures
/// coincide.
pub fn equivalent(w1: &Channel, w2: &Channel) -> Result<bool> {
    if w1.input_size() != w2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "equivalence of channels with {} and {} inputs",
            w1.input_size(),
            w2.input_size()
        )));
    }
    measures_equal(
        &BlackwellMeasure::from_channel(w1),
        &BlackwellMeasure::from_channel(w2),
    )
}

/// Convex mixture of measures over a common alphabet. Coefficients must be
/// nonnegative and sum to 1.
pub fn mixture(parts: &[(f64, &BlackwellMeasure)]) -> Result<BlackwellMeasure> {
    if parts.is_empty() {
        return Err(Error::BadWeights("empty mixture".into()));
    }
    let alphabet = parts[0].1.alphabet_size;
    let mut total = 0.0;
    for (lambda, m) in parts {
        if !lambda.is_finite() || *lambda < 0.0 {
            return Err(Error::BadWeights(format!("mixture coefficient {lambda}")));
        }
        if m.alphabet_size != alphabet {
            return Err(Error::DimensionMismatch(
                "mixture of measures over different alphabets".into(),
            ));
        }
        total += *lambda;
    }
    if (total - 1.0).abs() > EPS_STOCH {
        return Err(Error::BadWeights(format!(
            "mixture coefficients sum to {total}, expected 1"
        )));
    }
    let mut raw = Vec::new();
    for (lambda, m) in parts {
        for atom in &m.atoms {
            raw.push((atom.posterior.clone(), lambda * atom.weight));
        }
    }
    check_rank_cap(raw.len())?;
    BlackwellMeasure::from_atoms(alphabet, raw)
}

/// Tensor product: all pairwise atoms `(p_i x q_j, w_i v_j)` over the
/// row-major product alphabet.
pub fn tensor(a: &BlackwellMeasure, b: &BlackwellMeasure) -> Result<BlackwellMeasure> {
    check_rank_cap(a.rank() * b.rank())?;
    let mut raw = Vec::with_capacity(a.rank() * b.rank());
    for a1 in &a.atoms {
        for a2 in &b.atoms {
            raw.push((a1.posterior.product(&a2.posterior), a1.weight * a2.weight));
        }
    }
    BlackwellMeasure::from_atoms(a.alphabet_size * b.alphabet_size, raw)
}

fn check_rank_cap(atoms: usize) -> Result<()> {
    if atoms > RANK_CAP {
        return Err(Error::TooLarge {
            size: atoms as u128,
            cap: RANK_CAP as u64,
        });
    }
    Ok(())
}

fn check_measure_op(a: &BlackwellMeasure, b: &BlackwellMeasure, op: &BinaryOp) -> Result<()> {
    a.check_same_alphabet(b)?;
    if a.alphabet_size != op.size() {
        return Err(Error::DimensionMismatch(format!(
            "operation on 0..{} applied to measures over {}",
            op.size(),
            a.alphabet_size
        )));
    }
    Ok(())
}

/// The minus kernel `C-(p1, p2)(u1) = sum_{u2} p1(u1 * u2) p2(u2)`: the
/// distribution of `u1` when independent `x1 ~ p1`, `x2 ~ p2` are written as
/// `x1 = u1 * u2`, `x2 = u2`.
pub fn minus_kernel(p1: &Distribution, p2: &Distribution, op: &BinaryOp) -> Distribution {
    let n = op.size();
    assert_eq!(p1.len(), n);
    assert_eq!(p2.len(), n);
    let weights: Vec<f64> = (0..n)
        .map(|u1| {
            (0..n)
                .map(|u2| p1.get(op.apply(u1, u2)) * p2.get(u2))
                .sum()
        })
        .collect();
    Distribution::normalized(weights)
}

/// The plus kernel `C+(p1, p2, u1)(u2) = p1(u1 * u2) p2(u2) / C-(p1, p2)(u1)`:
/// the conditional distribution of `u2` given `u1`. `None` when `u1` is
/// outside the support of the minus kernel.
pub fn plus_kernel(
    p1: &Distribution,
    p2: &Distribution,
    u1: usize,
    op: &BinaryOp,
) -> Option<Distribution> {
    let n = op.size();
    assert!(u1 < n, "u1 outside the operation's alphabet");
    let weights: Vec<f64> = (0..n)
        .map(|u2| p1.get(op.apply(u1, u2)) * p2.get(u2))
        .collect();
    if weights.iter().sum::<f64>() > 0.0 {
        Some(Distribution::normalized(weights))
    } else {
        None
    }
}

/// The `(-, *)`-convolution: push-forward of the product measure under the
/// minus kernel. Mirrors the minus polar transform at the measure level.
pub fn minus_convolve(
    a: &BlackwellMeasure,
    b: &BlackwellMeasure,
    op: &BinaryOp,
) -> Result<BlackwellMeasure> {
    check_measure_op(a, b, op)?;
    check_rank_cap(a.rank() * b.rank())?;
    let mut raw = Vec::with_capacity(a.rank() * b.rank());
    for a1 in &a.atoms {
        for a2 in &b.atoms {
            raw.push((
                minus_kernel(&a1.posterior, &a2.posterior, op),
                a1.weight * a2.weight,
            ));
        }
    }
    BlackwellMeasure::from_atoms(a.alphabet_size, raw)
}

/// The `(+, *)`-convolution: for every atom pair and every `u1` in the
/// support of the minus kernel, one atom at the plus kernel with weight
/// `w1 w2 C-(p1, p2)(u1)`. Mirrors the plus polar transform.
pub fn plus_convolve(
    a: &BlackwellMeasure,
    b: &BlackwellMeasure,
    op: &BinaryOp,
) -> Result<BlackwellMeasure> {
    check_measure_op(a, b, op)?;
    let n = op.size();
    check_rank_cap(a.rank().saturating_mul(b.rank()).saturating_mul(n))?;
    let mut raw = Vec::new();
    for a1 in &a.atoms {
        for a2 in &b.atoms {
            let pair_weight = a1.weight * a2.weight;
            for u1 in 0..n {
                // Shares its arithmetic with the minus kernel: the raw plus
                // weights sum to exactly C-(p1, p2)(u1).
                let weights: Vec<f64> = (0..n)
                    .map(|u2| a1.posterior.get(op.apply(u1, u2)) * a2.posterior.get(u2))
                    .collect();
                let mass: f64 = weights.iter().sum();
                if mass > 0.0 {
                    raw.push((Distribution::normalized(weights), pair_weight * mass));
                }
            }
        }
    }
    BlackwellMeasure::from_atoms(a.alphabet_size, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_channel, random_channel_with};
    use crate::ops::{interpolate, polar_minus, polar_plus};
    use crate::params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bsc(delta: f64) -> Channel {
        Channel::binary_symmetric(delta).unwrap()
    }

    fn bec(eps: f64) -> Channel {
        Channel::binary_erasure(eps).unwrap()
    }

    fn mp(w: &Channel) -> BlackwellMeasure {
        BlackwellMeasure::from_channel(w)
    }

    #[test]
    fn bsc_measure_atoms() {
        let m = mp(&bsc(0.11));
        assert_eq!(m.rank(), 2);
        let a = &m.atoms()[0];
        assert!((a.posterior().get(0) - 0.11).abs() < 1e-12);
        assert!((a.weight() - 0.5).abs() < 1e-12);
        let b = &m.atoms()[1];
        assert!((b.posterior().get(0) - 0.89).abs() < 1e-12);
    }

    #[test]
    fn identity_and_constant_measures() {
        let m = mp(&Channel::identity(3));
        assert_eq!(m.rank(), 3);
        for atom in m.atoms() {
            assert!((atom.weight() - 1.0 / 3.0).abs() < 1e-12);
            let max = atom.posterior().weights().iter().cloned().fold(0.0, f64::max);
            assert_eq!(max, 1.0);
        }
        let constant = Channel::from_rows(&[vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        let m = mp(&constant);
        assert_eq!(m.rank(), 1);
        assert!((m.atoms()[0].posterior().get(0) - 0.5).abs() < 1e-12);
        assert!((m.atoms()[0].weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonicalize_merges_duplicate_columns() {
        // Two proportional output columns carry the same posterior.
        let w = Channel::from_rows(&[vec![0.6, 0.3, 0.1], vec![0.2, 0.1, 0.7]]).unwrap();
        let m = mp(&w);
        assert_eq!(m.rank(), 2);
        let direct = Channel::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        assert!(measures_equal(&m, &mp(&direct)).unwrap());
    }

    #[test]
    fn canonicalize_drops_zero_weight_and_reports() {
        let p = Distribution::uniform(2);
        let v = Distribution::point_mass(2, 0);
        let report = BlackwellMeasure::canonicalize(
            2,
            vec![(p.clone(), 0.5), (v, 0.0), (p, 0.5)],
            ATOM_TOL,
        )
        .unwrap();
        assert_eq!(report.atom_count_before_merge, 2);
        assert_eq!(report.merged, 1);
        assert_eq!(report.result.rank(), 1);
    }

    #[test]
    fn canonicalize_rejects_bad_weights() {
        let p = Distribution::uniform(2);
        assert!(BlackwellMeasure::from_atoms(2, vec![(p.clone(), -0.2), (p.clone(), 1.2)]).is_err());
        assert!(BlackwellMeasure::from_atoms(2, vec![(p, 0.4)]).is_err());
    }

    #[test]
    fn canonicalize_is_idempotent_on_random_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for i in 0..100 {
            let w = random_channel_with(&mut rng, 2 + i % 3, 2 + i % 5);
            let m = mp(&w);
            let again = BlackwellMeasure::from_atoms(
                m.alphabet_size(),
                m.atoms()
                    .iter()
                    .map(|a| (a.posterior().clone(), a.weight()))
                    .collect(),
            )
            .unwrap();
            assert_eq!(m, again);
        }
    }

    #[test]
    fn balance_and_rank() {
        assert!(mp(&bsc(0.11)).is_balanced());
        assert_eq!(mp(&bsc(0.11)).rank(), 2);
        let constant = Channel::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(mp(&constant).rank(), 1);

        let vertex =
            BlackwellMeasure::from_atoms(2, vec![(Distribution::point_mass(2, 0), 1.0)]).unwrap();
        assert!(!vertex.is_balanced());
        assert!((vertex.balance_deviation() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equivalence_examples() {
        let w = random_channel(2, 4, 51);
        // Permuting output columns does not change the class.
        let permuted: Vec<Vec<f64>> = (0..2)
            .map(|x| vec![w.prob(x, 2), w.prob(x, 0), w.prob(x, 3), w.prob(x, 1)])
            .collect();
        let wp = Channel::from_rows(&permuted).unwrap();
        assert!(equivalent(&w, &wp).unwrap());

        assert!(!equivalent(&bsc(0.1), &bsc(0.2)).unwrap());

        // Splitting one output into two proportional halves re-merges.
        let split: Vec<Vec<f64>> = (0..2)
            .map(|x| {
                vec![
                    0.5 * w.prob(x, 0),
                    0.5 * w.prob(x, 0),
                    w.prob(x, 1),
                    w.prob(x, 2),
                    w.prob(x, 3),
                ]
            })
            .collect();
        let ws = Channel::from_rows(&split).unwrap();
        assert!(equivalent(&w, &ws).unwrap());

        assert!(equivalent(&w, &Channel::identity(3)).is_err());
    }

    #[test]
    fn tv_distance_examples() {
        let m = mp(&bsc(0.1));
        assert_eq!(tv_distance(&m, &m).unwrap(), 0.0);
        assert!((tv_distance(&m, &mp(&bsc(0.3))).unwrap() - 1.0).abs() < 1e-15);
        // BSC(d) and BSC(1 - d) have the same atom set.
        assert!(tv_distance(&mp(&bsc(0.11)), &mp(&bsc(0.89))).unwrap() < 1e-15);
        // Partial overlap: interpolations sharing one endpoint.
        let w1 = interpolate(0.4, &bsc(0.1), &bsc(0.3)).unwrap();
        let w2 = interpolate(0.4, &bsc(0.1), &bsc(0.2)).unwrap();
        let d = tv_distance(&mp(&w1), &mp(&w2)).unwrap();
        assert!((d - 0.6).abs() < 1e-12);
    }

    #[test]
    fn measure_channel_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for i in 0..100 {
            let w = random_channel_with(&mut rng, 2 + i % 3, 2 + i % 5);
            let m = mp(&w);
            assert!(m.balance_deviation() <= 1e-10);
            let rebuilt = m.to_channel().unwrap();
            let m2 = mp(&rebuilt);
            assert_eq!(m.rank(), m2.rank());
            for (a, b) in m.atoms().iter().zip(m2.atoms()) {
                assert!(a.posterior().l1_distance(b.posterior()) <= 1e-10);
                assert!((a.weight() - b.weight()).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn to_channel_of_bsc_measure_is_bsc() {
        let rebuilt = mp(&bsc(0.11)).to_channel().unwrap();
        assert!(equivalent(&rebuilt, &bsc(0.11)).unwrap());
        assert!((rebuilt.prob(0, 0) - 0.11).abs() < 1e-12);
        assert!((rebuilt.prob(0, 1) - 0.89).abs() < 1e-12);
    }

    #[test]
    fn to_channel_rejects_unbalanced() {
        let vertex =
            BlackwellMeasure::from_atoms(2, vec![(Distribution::point_mass(2, 0), 1.0)]).unwrap();
        assert!(matches!(
            vertex.to_channel(),
            Err(Error::NotBalanced { .. })
        ));
    }

    #[test]
    fn push_forward_examples() {
        let m = mp(&bsc(0.11));
        let same = m.push_forward(&[0, 1], 2).unwrap();
        assert!(measures_equal(&m, &same).unwrap());
        let collapsed = m.push_forward(&[0, 0], 2).unwrap();
        assert_eq!(collapsed.rank(), 1);
        assert_eq!(collapsed.atoms()[0].posterior().get(0), 1.0);
        assert!((collapsed.atoms()[0].weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_identity_and_guards() {
        let m = mp(&bsc(0.11));
        let same = mixture(&[(1.0, &m)]).unwrap();
        assert!(measures_equal(&m, &same).unwrap());
        assert!(mixture(&[(0.5, &m)]).is_err());
        assert!(mixture(&[(-0.5, &m), (1.5, &m)]).is_err());
        let other = mp(&Channel::identity(3));
        assert!(mixture(&[(0.5, &m), (0.5, &other)]).is_err());
    }

    #[test]
    fn interpolation_endpoints_collapse_to_the_operands() {
        let w1 = random_channel(2, 3, 81);
        let w2 = random_channel(2, 4, 82);
        let at_one = interpolate(1.0, &w1, &w2).unwrap();
        assert!(equivalent(&at_one, &w1).unwrap());
        let at_zero = interpolate(0.0, &w1, &w2).unwrap();
        assert!(equivalent(&at_zero, &w2).unwrap());
        // Mixing a channel with itself does not move the class.
        let half = interpolate(0.5, &bsc(0.11), &bsc(0.11)).unwrap();
        assert!(equivalent(&half, &bsc(0.11)).unwrap());
        assert_eq!(mp(&half).rank(), 2);
    }

    #[test]
    fn convolutions_fix_the_uniform_point() {
        // delta at the uniform posterior is a fixed point of both
        // convolutions, for any uniformity-preserving operation.
        for op in [BinaryOp::xor(), BinaryOp::modular_add(3)] {
            let n = op.size();
            let uniform_atom = BlackwellMeasure::from_atoms(
                n,
                vec![(Distribution::uniform(n), 1.0)],
            )
            .unwrap();
            let minus = minus_convolve(&uniform_atom, &uniform_atom, &op).unwrap();
            assert!(measures_equal(&minus, &uniform_atom).unwrap());
            let plus = plus_convolve(&uniform_atom, &uniform_atom, &op).unwrap();
            assert!(measures_equal(&plus, &uniform_atom).unwrap());
        }
    }

    #[test]
    fn convolutions_fix_the_noiseless_measure() {
        let vertex = mp(&Channel::identity(2));
        let op = BinaryOp::xor();
        let minus = minus_convolve(&vertex, &vertex, &op).unwrap();
        assert!(measures_equal(&minus, &vertex).unwrap());
        let plus = plus_convolve(&vertex, &vertex, &op).unwrap();
        assert!(measures_equal(&plus, &vertex).unwrap());
    }

    #[test]
    fn polar_oracles_on_erasure_and_symmetric_channels() {
        let op = BinaryOp::xor();
        let w = bec(0.5);
        let minus = polar_minus(&w, &op).unwrap();
        assert!(equivalent(&minus, &bec(0.75)).unwrap());
        let plus = polar_plus(&w, &op).unwrap();
        assert!(equivalent(&plus, &bec(0.25)).unwrap());

        let minus_bsc = polar_minus(&bsc(0.11), &op).unwrap();
        assert!(equivalent(&minus_bsc, &bsc(0.1958)).unwrap());
    }

    #[test]
    fn convolutions_match_polar_transforms_on_fixtures() {
        let op = BinaryOp::xor();
        let m_bsc = mp(&bsc(0.11));
        let lhs = minus_convolve(&m_bsc, &m_bsc, &op).unwrap();
        let rhs = mp(&polar_minus(&bsc(0.11), &op).unwrap());
        assert!(measures_equal(&lhs, &rhs).unwrap());

        let m_bec = mp(&bec(0.5));
        let lhs = plus_convolve(&m_bec, &m_bec, &op).unwrap();
        let rhs = mp(&polar_plus(&bec(0.5), &op).unwrap());
        assert!(measures_equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn parameters_from_measure_match_hand_values() {
        let m = mp(&bsc(0.11));
        let uniform = Distribution::uniform(2);
        assert!((m.map_error(&uniform).unwrap() - 0.11).abs() < 1e-12);
        let z = m.bhattacharyya().unwrap();
        assert!((z - 2.0 * (0.11f64 * 0.89).sqrt()).abs() < 1e-12);

        let vertex_measure = mp(&Channel::identity(2));
        let i = vertex_measure.mutual_information(&uniform).unwrap();
        assert!((i - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn parameters_from_measure_require_balance() {
        let vertex =
            BlackwellMeasure::from_atoms(2, vec![(Distribution::point_mass(2, 0), 1.0)]).unwrap();
        assert!(vertex.map_error(&Distribution::uniform(2)).is_err());
        assert!(vertex.bhattacharyya().is_err());
    }

    #[test]
    fn measure_operations_refuse_combinatorial_blowups() {
        // Two rank-400 measures would tensor into 160k raw atoms.
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let raw: Vec<(Distribution, f64)> = (0..400)
            .map(|_| {
                let w: Vec<f64> = (0..2).map(|_| rng.random::<f64>() + 1e-3).collect();
                (Distribution::normalized(w), 1.0 / 400.0)
            })
            .collect();
        let big = BlackwellMeasure::from_atoms(2, raw).unwrap();
        assert!(big.rank() > 300);
        assert!(matches!(
            tensor(&big, &big),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            plus_convolve(&big, &big, &BinaryOp::xor()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn code_error_from_measure_matches_direct() {
        let w = bsc(0.11);
        let m = mp(&w);
        let code = Code::new(2, vec![vec![0, 0], vec![1, 1]]).unwrap();
        let direct = params::code_error(&code, &w).unwrap();
        let via_measure = m.code_error(&code).unwrap();
        assert!((direct - via_measure).abs() < 1e-12);
        assert!((via_measure - 0.11).abs() < 1e-12);
    }
}
