//! Multivariate trigonometric polynomials as sparse coefficient maps.
//!
//! A polynomial is a finite map from integer frequency vectors to complex
//! amplitudes, `f(x) = sum_lambda c_lambda e^{2 pi i <lambda, x>}`. The
//! folding operator re-indexes those modes onto single integer frequencies
//! `beta = sum_k tau_k lambda_k`; the chain polynomials `w_1, ..., w_n`
//! interpolate between the folded univariate polynomial and the original
//! one, unfolding one axis at a time from the top.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{FoldingSeq, MultiIndex};

/// What `apply_t` does when two box frequencies fold onto the same integer.
///
/// The theorem lives entirely in the collision-free regime; `Merge` exists
/// to study what happens when the hypothesis fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CollisionPolicy {
    #[default]
    Strict,
    Merge,
}

/// Sparse trigonometric polynomial on the `dim`-torus.
///
/// Stored amplitudes are never exactly zero, and every key has length
/// exactly `dim`; both invariants are maintained by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPoly {
    /// The zero polynomial in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        TrigPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// Constant polynomial `c`.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = TrigPoly::zero(dim);
        let zero = MultiIndex::new(vec![0; dim]).unwrap();
        p.add_term(&zero, c).unwrap();
        p
    }

    /// Single mode `c e^{2 pi i <lambda, x>}`.
    pub fn mode(lambda: &MultiIndex, c: Complex64) -> Self {
        let mut p = TrigPoly::zero(lambda.len());
        p.add_term(lambda, c).unwrap();
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = TrigPoly::zero(dim);
        for (lambda, c) in terms {
            p.add_term(&lambda, c)?;
        }
        Ok(p)
    }

    /// Adds `c` to the amplitude at `lambda`, dropping the term if the sum
    /// is exactly zero.
    pub fn add_term(&mut self, lambda: &MultiIndex, c: Complex64) -> Result<()> {
        if lambda.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: lambda.len(),
            });
        }
        if c == Complex64::ZERO {
            return Ok(());
        }
        let entry = self.coeffs.entry(lambda.clone()).or_insert(Complex64::ZERO);
        *entry += c;
        if *entry == Complex64::ZERO {
            self.coeffs.remove(lambda);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, lambda: &MultiIndex) -> Complex64 {
        self.coeffs.get(lambda).copied().unwrap_or(Complex64::ZERO)
    }

    /// Terms in lexicographic key order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Sum of coefficient magnitudes, `sum |c_lambda|`.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Max of `|lambda_axis|` over stored keys; 0 for the zero polynomial.
    pub fn partial_degree(&self, axis: usize) -> u64 {
        assert!(axis < self.dim, "axis {axis} out of range for dim {}", self.dim);
        self.coeffs
            .keys()
            .map(|l| l.entries()[axis].unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Per-axis partial degrees.
    pub fn degrees(&self) -> Vec<u64> {
        (0..self.dim).map(|a| self.partial_degree(a)).collect()
    }

    /// Evaluates the polynomial at `x` with compensated accumulation.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut sum = Complex64::ZERO;
        let mut comp = Complex64::ZERO;
        for (lambda, &c) in &self.coeffs {
            // Reduce the phase mod 1 per term to keep large frequencies sane.
            let mut phase = 0.0f64;
            for (&l, &xi) in lambda.entries().iter().zip(x) {
                phase += (l as f64 * xi).rem_euclid(1.0);
            }
            let term = c * Complex64::from_polar(1.0, TAU * phase.rem_euclid(1.0));
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        Ok(sum)
    }

    /// Derivative along `axis`: the amplitude at `lambda` becomes
    /// `2 pi i lambda_axis c_lambda`.
    pub fn partial_derivative(&self, axis: usize) -> TrigPoly {
        assert!(axis < self.dim, "axis {axis} out of range for dim {}", self.dim);
        let mut out = TrigPoly::zero(self.dim);
        for (lambda, &c) in &self.coeffs {
            let l = lambda.entries()[axis];
            if l != 0 {
                let factor = Complex64::new(0.0, TAU * l as f64);
                out.coeffs.insert(lambda.clone(), c * factor);
            }
        }
        out
    }

    /// The folding operator: each mode `lambda` moves to the single
    /// frequency `sum_k tau_k lambda_k`.
    ///
    /// Under `Strict` any two modes folding onto the same frequency are an
    /// error; under `Merge` their amplitudes are summed (outside the
    /// theorem's regime).
    pub fn apply_t(&self, taus: &FoldingSeq, policy: CollisionPolicy) -> Result<TrigPoly> {
        let chain = self.partial_fold(taus, 1, policy)?;
        Ok(chain)
    }

    /// Chain polynomial `w_d`: the top `d - 1` axes unfolded into explicit
    /// variables `(lambda_n, lambda_{n-1}, ...)`, the remaining bottom
    /// frequencies folded into the last axis via
    /// `sum_{j=1}^{n-d+1} tau_j lambda_j`.
    fn partial_fold(&self, taus: &FoldingSeq, d: usize, policy: CollisionPolicy) -> Result<TrigPoly> {
        let n = self.dim;
        if taus.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: taus.len(),
            });
        }
        assert!(d >= 1 && d <= n);
        let t = taus.taus();
        let folded = n - d + 1; // how many bottom axes fold into z

        let mut out: BTreeMap<MultiIndex, (Complex64, MultiIndex)> = BTreeMap::new();
        for (lambda, &c) in &self.coeffs {
            let e = lambda.entries();
            let mut beta: i128 = 0;
            for j in 0..folded {
                let term = (e[j] as i128)
                    .checked_mul(t[j] as i128)
                    .ok_or(Error::Overflow("fold term"))?;
                beta = beta.checked_add(term).ok_or(Error::Overflow("fold sum"))?;
            }
            let z = i64::try_from(beta).map_err(|_| Error::Overflow("folded frequency"))?;
            let mut key: Vec<i64> = (folded..n).rev().map(|i| e[i]).collect();
            key.push(z);
            let key = MultiIndex::new(key).unwrap();
            match out.get_mut(&key) {
                None => {
                    out.insert(key, (c, lambda.clone()));
                }
                Some((acc, first)) => match policy {
                    CollisionPolicy::Strict => {
                        return Err(Error::Collision {
                            beta,
                            a: first.clone(),
                            b: lambda.clone(),
                        });
                    }
                    CollisionPolicy::Merge => *acc += c,
                },
            }
        }

        let mut poly = TrigPoly::zero(d);
        for (key, (c, _)) in out {
            if c != Complex64::ZERO {
                poly.coeffs.insert(key, c);
            }
        }
        Ok(poly)
    }

    /// The telescoping chain `[w_1, ..., w_n]`; `w_1 = Tf` and `w_n` is `f`
    /// up to a permutation of variables and the measure-preserving
    /// substitution `z -> tau_1 z` on the last axis.
    pub fn chain_polys(&self, taus: &FoldingSeq, policy: CollisionPolicy) -> Result<Vec<TrigPoly>> {
        (1..=self.dim)
            .map(|d| self.partial_fold(taus, d, policy))
            .collect()
    }

    /// Piecewise-constant approximation in the last variable with `n_slabs`
    /// slabs, each slice obtained by substituting `z = j / n_slabs` exactly.
    pub fn step_approx(&self, n_slabs: usize) -> StepApprox {
        assert!(n_slabs >= 1);
        let d = self.dim;
        let n = n_slabs;
        if d == 1 {
            let mut values = vec![Complex64::ZERO; n];
            for (lambda, &c) in &self.coeffs {
                let l = lambda.entries()[0];
                for (j, v) in values.iter_mut().enumerate() {
                    *v += c * unit_root(l, j, n);
                }
            }
            return StepApprox {
                base: self.clone(),
                n_slabs: n,
                slices: Slices::Values(values),
            };
        }

        let mut slices = vec![TrigPoly::zero(d - 1); n];
        for (lambda, &c) in &self.coeffs {
            let e = lambda.entries();
            let head = MultiIndex::new(e[..d - 1].to_vec()).unwrap();
            let l = e[d - 1];
            for (j, slice) in slices.iter_mut().enumerate() {
                slice.add_term(&head, c * unit_root(l, j, n)).unwrap();
            }
        }
        StepApprox {
            base: self.clone(),
            n_slabs: n,
            slices: Slices::Polys(slices),
        }
    }

    /// Serializes to the line format `lambda_1 ... lambda_d : re im`, one
    /// term per line in lexicographic key order. Round-trips bit-exactly.
    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        for (lambda, c) in &self.coeffs {
            for (i, l) in lambda.entries().iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{l}");
            }
            let _ = writeln!(out, " : {} {}", c.re, c.im);
        }
        out
    }

    /// Parses the line format produced by [`to_literal`](Self::to_literal).
    pub fn from_literal(text: &str) -> Result<TrigPoly> {
        let mut poly: Option<TrigPoly> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (freqs, amp) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: missing ':'", lineno + 1)))?;
            let lambda: Vec<i64> = freqs
                .split_whitespace()
                .map(|s| {
                    s.parse::<i64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            let parts: Vec<&str> = amp.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected 're im' after ':'",
                    lineno + 1
                )));
            }
            let re: f64 = parts[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let im: f64 = parts[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let lambda = MultiIndex::new(lambda)
                .map_err(|_| Error::Parse(format!("line {}: empty frequency vector", lineno + 1)))?;
            let p = match &mut poly {
                None => poly.insert(TrigPoly::zero(lambda.len())),
                Some(p) => p,
            };
            p.add_term(&lambda, Complex64::new(re, im))?;
        }
        poly.ok_or_else(|| Error::Parse("no terms found".into()))
    }
}

/// `e^{2 pi i l j / n}` with the exponent reduced mod `n` exactly first.
fn unit_root(l: i64, j: usize, n: usize) -> Complex64 {
    let n_i = n as i128;
    let r = ((l as i128 * j as i128) % n_i + n_i) % n_i;
    Complex64::from_polar(1.0, TAU * r as f64 / n as f64)
}

impl Add<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;

    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in polynomial sum");
        let mut out = self.clone();
        for (lambda, &c) in &rhs.coeffs {
            out.add_term(lambda, c).unwrap();
        }
        out
    }
}

impl Mul<Complex64> for &TrigPoly {
    type Output = TrigPoly;

    fn mul(self, rhs: Complex64) -> TrigPoly {
        let mut out = TrigPoly::zero(self.dim);
        if rhs == Complex64::ZERO {
            return out;
        }
        for (lambda, &c) in &self.coeffs {
            out.coeffs.insert(lambda.clone(), c * rhs);
        }
        out
    }
}

/// Slice table of a step approximation: plain values when the base is
/// univariate, `(d-1)`-variate polynomials otherwise.
#[derive(Clone, Debug)]
pub enum Slices {
    Values(Vec<Complex64>),
    Polys(Vec<TrigPoly>),
}

/// Piecewise-constant-in-the-last-variable approximation of a polynomial,
/// sampling slices at `z = j / n_slabs`.
#[derive(Clone, Debug)]
pub struct StepApprox {
    base: TrigPoly,
    n_slabs: usize,
    slices: Slices,
}

impl StepApprox {
    pub fn base(&self) -> &TrigPoly {
        &self.base
    }

    pub fn n_slabs(&self) -> usize {
        self.n_slabs
    }

    pub fn slices(&self) -> &Slices {
        &self.slices
    }

    /// Value of the approximation at `(y', z)`; constant in `z` on each
    /// slab `[j/N, (j+1)/N)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.base.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base.dim(),
                got: x.len(),
            });
        }
        let z = x[x.len() - 1].rem_euclid(1.0);
        let j = ((z * self.n_slabs as f64) as usize).min(self.n_slabs - 1);
        match &self.slices {
            Slices::Values(v) => Ok(v[j]),
            Slices::Polys(p) => p[j].evaluate(&x[..x.len() - 1]),
        }
    }
}
