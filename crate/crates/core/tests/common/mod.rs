//! Reference implementations shared by the integration suites. They are
//! deliberately naive and share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Minimum accumulated squared distance over every monotone, continuous path
/// from the first to the last pair of two scalar sequences.
pub fn brute_force_dtw(q: &[f64], c: &[f64]) -> f64 {
    fn walk(q: &[f64], c: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (q[i] - c[j]) * (q[i] - c[j]);
        if i + 1 == q.len() && j + 1 == c.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < q.len() && j + 1 < c.len() {
            walk(q, c, i + 1, j + 1, acc, best);
        }
        if i + 1 < q.len() {
            walk(q, c, i + 1, j, acc, best);
        }
        if j + 1 < c.len() {
            walk(q, c, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(q, c, 0, 0, 0.0, &mut best);
    best
}

/// Direct O(N²) DFT returning (re, im) per bin.
pub fn dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, &v)| {
                let theta = -2.0 * PI * (k * i) as f64 / n;
                (re + v * theta.cos(), im + v * theta.sin())
            })
        })
        .collect()
}

/// Simple deterministic generator so oracles do not depend on library RNG use.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_f64() * (hi_inclusive - lo + 1) as f64) as usize
    }
}
