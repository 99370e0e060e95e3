//! Channel operations: sums, products, interpolations, and the generalized
//! polar transforms driven by a uniformity-preserving binary operation.
//!
//! Index conventions are fixed so that results are reproducible matrices:
//! disjoint unions place the left operand's block first, and pair/triple
//! alphabets are flattened row-major (`(a, b) -> a * |B| + b`).

use crate::channel::Channel;
use crate::error::{Error, Result};

/// A binary operation `*` on `0..size` whose sections `a -> a * b` are all
/// permutations, i.e. `(a, b) -> (a * b, b)` is a bijection. Operations
/// without this property do not preserve the symmetric capacity and are
/// rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryOp {
    size: usize,
    /// Row-major, `table[a * size + b] = a * b`.
    table: Vec<usize>,
}

impl BinaryOp {
    /// Validates a square table as a uniformity-preserving operation.
    ///
    /// Rejection names the first column `b` for which `a -> a * b` fails to
    /// be a permutation.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self> {
        let size = table.len();
        if size == 0 {
            return Err(Error::DimensionMismatch("empty operation table".into()));
        }
        for row in table {
            if row.len() != size {
                return Err(Error::DimensionMismatch(format!(
                    "operation table row of length {}, expected {size}",
                    row.len()
                )));
            }
        }
        for b in 0..size {
            let mut seen = vec![false; size];
            for row in table {
                let v = row[b];
                if v >= size || seen[v] {
                    return Err(Error::NotUniformityPreserving { column: b });
                }
                seen[v] = true;
            }
        }
        let flat = table.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Self { size, table: flat })
    }

    /// XOR on `{0, 1}`.
    pub fn xor() -> Self {
        Self::from_table(&[vec![0, 1], vec![1, 0]]).expect("xor is uniformity preserving")
    }

    /// Addition modulo `n`.
    pub fn modular_add(n: usize) -> Self {
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(&table).expect("modular addition is uniformity preserving")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `a * b`.
    pub fn apply(&self, a: usize, b: usize) -> usize {
        self.table[a * self.size + b]
    }

    /// The right-inverse `/`, with `(a / b) * b = a` for all `a, b`.
    pub fn right_inverse(&self) -> RightInverse {
        let mut table = vec![0usize; self.size * self.size];
        for c in 0..self.size {
            for b in 0..self.size {
                let a = self.apply(c, b);
                table[a * self.size + b] = c;
            }
        }
        RightInverse {
            size: self.size,
            table,
        }
    }
}

/// The right-inverse of a uniformity-preserving operation.
#[derive(Debug, Clone, PartialEq)]
pub struct RightInverse {
    size: usize,
    table: Vec<usize>,
}

impl RightInverse {
    pub fn size(&self) -> usize {
        self.size
    }

    /// `a / b`: the unique `c` with `c * b = a`.
    pub fn apply(&self, a: usize, b: usize) -> usize {
        self.table[a * self.size + b]
    }
}

/// Channel sum `W1 (+) W2`: the transmitter picks which of the two channels
/// to use, the receiver sees which one produced the output. Block-diagonal
/// matrix with `W1`'s alphabets first.
pub fn channel_sum(w1: &Channel, w2: &Channel) -> Channel {
    let inputs = w1.input_size() + w2.input_size();
    let outputs = w1.output_size() + w2.output_size();
    let mut rows = vec![vec![0.0; outputs]; inputs];
    for (x, row) in rows.iter_mut().enumerate() {
        if x < w1.input_size() {
            row[..w1.output_size()].copy_from_slice(w1.row(x));
        } else {
            row[w1.output_size()..].copy_from_slice(w2.row(x - w1.input_size()));
        }
    }
    Channel::from_rows(&rows).expect("block-diagonal of stochastic matrices is stochastic")
}

/// Channel product `W1 (x) W2`: both channels used at once.
/// `(W1 (x) W2)(y1, y2 | x1, x2) = W1(y1|x1) W2(y2|x2)`, indices row-major.
pub fn channel_product(w1: &Channel, w2: &Channel) -> Channel {
    let inputs = w1.input_size() * w2.input_size();
    let outputs = w1.output_size() * w2.output_size();
    let mut rows = Vec::with_capacity(inputs);
    for x1 in 0..w1.input_size() {
        for x2 in 0..w2.input_size() {
            let mut row = Vec::with_capacity(outputs);
            for y1 in 0..w1.output_size() {
                let a = w1.prob(x1, y1);
                for y2 in 0..w2.output_size() {
                    row.push(a * w2.prob(x2, y2));
                }
            }
            rows.push(row);
        }
    }
    Channel::from_rows(&rows).expect("product of stochastic rows is stochastic")
}

/// The `alpha`-interpolation `[alpha W1, (1 - alpha) W2]`: the channel acts
/// as `W1` with probability `alpha` and as `W2` otherwise, and the receiver
/// learns which. Output alphabet is `Y1` then `Y2`.
pub fn interpolate(alpha: f64, w1: &Channel, w2: &Channel) -> Result<Channel> {
    if w1.input_size() != w2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "interpolating channels with {} and {} inputs",
            w1.input_size(),
            w2.input_size()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadAlpha(alpha));
    }
    let outputs = w1.output_size() + w2.output_size();
    let mut rows = Vec::with_capacity(w1.input_size());
    for x in 0..w1.input_size() {
        let mut row = Vec::with_capacity(outputs);
        row.extend(w1.row(x).iter().map(|&v| alpha * v));
        row.extend(w2.row(x).iter().map(|&v| (1.0 - alpha) * v));
        rows.push(row);
    }
    Channel::from_rows(&rows)
}

fn check_op(w: &Channel, op: &BinaryOp) -> Result<()> {
    if op.size() != w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "operation on 0..{} applied to a channel with {} inputs",
            op.size(),
            w.input_size()
        )));
    }
    Ok(())
}

/// The minus polar transform:
/// `W-(y1, y2 | u1) = (1/|X|) sum_{u2} W(y1 | u1 * u2) W(y2 | u2)`.
///
/// Output pairs `(y1, y2)` are flattened row-major.
pub fn polar_minus(w: &Channel, op: &BinaryOp) -> Result<Channel> {
    check_op(w, op)?;
    let n = w.input_size();
    let ysz = w.output_size();
    let mut rows = Vec::with_capacity(n);
    for u1 in 0..n {
        let mut row = vec![0.0; ysz * ysz];
        for u2 in 0..n {
            let x1 = op.apply(u1, u2);
            for y1 in 0..ysz {
                let a = w.prob(x1, y1);
                if a == 0.0 {
                    continue;
                }
                for y2 in 0..ysz {
                    row[y1 * ysz + y2] += a * w.prob(u2, y2) / n as f64;
                }
            }
        }
        rows.push(row);
    }
    Channel::from_rows(&rows)
}

/// The plus polar transform:
/// `W+(y1, y2, u1 | u2) = (1/|X|) W(y1 | u1 * u2) W(y2 | u2)`.
///
/// Output triples `(y1, y2, u1)` are flattened row-major.
pub fn polar_plus(w: &Channel, op: &BinaryOp) -> Result<Channel> {
    check_op(w, op)?;
    let n = w.input_size();
    let ysz = w.output_size();
    let mut rows = Vec::with_capacity(n);
    for u2 in 0..n {
        let mut row = vec![0.0; ysz * ysz * n];
        for u1 in 0..n {
            let x1 = op.apply(u1, u2);
            for y1 in 0..ysz {
                let a = w.prob(x1, y1);
                if a == 0.0 {
                    continue;
                }
                for y2 in 0..ysz {
                    row[(y1 * ysz + y2) * n + u1] = a * w.prob(u2, y2) / n as f64;
                }
            }
        }
        rows.push(row);
    }
    Channel::from_rows(&rows)
}
