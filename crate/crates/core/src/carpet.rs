//! Bedford–McMullen carpets: column statistics, approximate squares, the
//! Minkowski dimension of Bernoulli measures, and the closed-form vector that
//! minimises it.
//!
//! Maps are indexed column-major (by column, then row). Columns are the
//! nonempty ones only, numbered left to right. Height classes `k` are
//! numbered `0..M0` in ascending height; the regime index `K` of `q_K`/`Q_K`
//! is 1-based as in the usual statement of the result.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::check_probability_vector;
use crate::symbolic::{AffineMap, IfsModel};

/// Tolerance for classifying `A_K` against the heights.
const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarpetSpec {
    m: usize,
    n: usize,
    digits: Vec<(usize, usize)>,
}

impl CarpetSpec {
    pub fn new(m: usize, n: usize, digits: Vec<(usize, usize)>) -> Result<Self> {
        if m < 2 || n <= m {
            return Err(invalid(format!("need n > m >= 2, got m={m}, n={n}")));
        }
        if digits.is_empty() {
            return Err(invalid("digit set is empty"));
        }
        let mut digits = digits;
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("digits must be distinct"));
        }
        if let Some(&(i, j)) = digits.iter().find(|&&(i, j)| i >= m || j >= n) {
            return Err(invalid(format!("digit ({i},{j}) outside the {m}x{n} grid")));
        }
        Ok(CarpetSpec { m, n, digits })
    }

    /// Column `c` receives the top `heights[c]` cells; a zero height leaves
    /// the column empty.
    pub fn from_column_heights(m: usize, n: usize, heights: &[usize]) -> Result<Self> {
        if heights.len() > m {
            return Err(invalid("more column heights than columns"));
        }
        if heights.iter().any(|&h| h > n) {
            return Err(invalid("column height exceeds n"));
        }
        let digits = heights
            .iter()
            .enumerate()
            .flat_map(|(c, &h)| (n - h..n).map(move |j| (c, j)))
            .collect();
        CarpetSpec::new(m, n, digits)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column-major digit list; position in this list is the map index.
    pub fn digits(&self) -> &[(usize, usize)] {
        &self.digits
    }

    /// The IFS `(x, y) ↦ (x/m + i/m, y/n + j/n)`, with diameter `√2`.
    pub fn ifs(&self) -> IfsModel {
        let (m, n) = (self.m as f64, self.n as f64);
        let maps = self
            .digits
            .iter()
            .map(|&(i, j)| {
                AffineMap::diagonal(&[1.0 / m, 1.0 / n], vec![i as f64 / m, j as f64 / n])
                    .expect("carpet maps contract")
            })
            .collect();
        IfsModel::new(maps)
            .and_then(|ifs| ifs.with_diameter_bound(std::f64::consts::SQRT_2))
            .expect("carpet IFS is valid")
    }
}

/// Convention for the number `L(K)` of full symbols in a level-`K` square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelConvention {
    /// Largest `L` with `n^L <= m^K`, i.e. `⌊K log m / log n⌋`.
    #[default]
    Floor,
    /// Smallest `L` with `n^L >= m^K`, i.e. `⌈K log m / log n⌉`.
    Ceil,
}

impl fmt::Display for LevelConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelConvention::Floor => "floor",
            LevelConvention::Ceil => "ceil",
        })
    }
}

/// Column statistics of a carpet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub m: usize,
    pub n: usize,
    /// Distinct column heights `N_1 < … < N_{M0}`.
    pub heights: Vec<usize>,
    /// `R_k`: number of columns of height `N_k`.
    pub multiplicities: Vec<usize>,
    /// `φ`: map index → column index.
    pub column_of: Vec<usize>,
    /// `ψ`: map index → height class.
    pub class_of: Vec<usize>,
    /// Height class of each column.
    pub column_class: Vec<usize>,
}

impl ReducedParams {
    /// Number of height classes `M0`.
    pub fn classes(&self) -> usize {
        self.heights.len()
    }

    /// Number of nonempty columns `M`.
    pub fn columns(&self) -> usize {
        self.column_class.len()
    }

    /// Number of maps `N`.
    pub fn maps(&self) -> usize {
        self.column_of.len()
    }

    /// `log m / log n`.
    pub fn theta(&self) -> f64 {
        (self.m as f64).ln() / (self.n as f64).ln()
    }

    pub fn has_uniform_fibres(&self) -> bool {
        self.heights.len() == 1
    }

    /// `|R_K| = R_1 + … + R_K`.
    pub fn head_columns(&self, k: usize) -> usize {
        self.multiplicities[..k].iter().sum()
    }

    /// `‖R^C_K‖ = Σ_{k>K} R_k N_k`.
    pub fn tail_maps(&self, k: usize) -> usize {
        self.multiplicities[k..]
            .iter()
            .zip(&self.heights[k..])
            .map(|(r, h)| r * h)
            .sum()
    }

    /// Column masses `q_{p,j}`.
    pub fn column_masses(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.columns()];
        for (i, &pi) in p.iter().enumerate() {
            q[self.column_of[i]] += pi;
        }
        q
    }

    fn check_map_vector(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.maps() {
            return Err(invalid(format!(
                "expected {} map weights, got {}",
                self.maps(),
                p.len()
            )));
        }
        check_probability_vector(p)
    }

    fn check_class_vector(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.classes() {
            return Err(invalid(format!(
                "expected {} class weights, got {}",
                self.classes(),
                q.len()
            )));
        }
        if q.iter().any(|&x| !(x > 0.0)) {
            return Err(invalid("class weights must be positive"));
        }
        let s: f64 = q
            .iter()
            .zip(&self.multiplicities)
            .map(|(q, r)| q * *r as f64)
            .sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("Σ R_k q_k = {s}, not 1")));
        }
        Ok(())
    }

    fn check_regime_index(&self, k: usize, max: usize) -> Result<()> {
        if k == 0 || k > max {
            return Err(Error::OutOfRange { index: k, max });
        }
        Ok(())
    }

    /// `x/(−log n) + (1 − θ)·y/(−log m)` for `x = log p`, `y = log q`.
    fn exponent(&self, log_p: f64, log_q: f64) -> f64 {
        let (lm, ln) = ((self.m as f64).ln(), (self.n as f64).ln());
        log_p / -ln + (1.0 - lm / ln) * log_q / -lm
    }
}

pub fn reduce_params(c: &CarpetSpec) -> Result<ReducedParams> {
    if c.digits.is_empty() {
        return Err(invalid("digit set is empty"));
    }
    let mut col_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(i, _) in &c.digits {
        *col_sizes.entry(i).or_default() += 1;
    }
    let mut heights: Vec<usize> = col_sizes.values().copied().collect();
    heights.sort_unstable();
    heights.dedup();
    let multiplicities = heights
        .iter()
        .map(|h| col_sizes.values().filter(|&&s| s == *h).count())
        .collect();
    let col_index: BTreeMap<usize, usize> = col_sizes.keys().enumerate().map(|(k, &i)| (i, k)).collect();
    let column_class: Vec<usize> = col_sizes
        .values()
        .map(|s| heights.binary_search(s).unwrap())
        .collect();
    let column_of: Vec<usize> = c.digits.iter().map(|(i, _)| col_index[i]).collect();
    let class_of = column_of.iter().map(|&j| column_class[j]).collect();
    Ok(ReducedParams {
        m: c.m,
        n: c.n,
        heights,
        multiplicities,
        column_of,
        class_of,
        column_class,
    })
}

/// `L(K)` computed exactly in integers.
pub fn level_height(m: usize, n: usize, k: usize, conv: LevelConvention) -> usize {
    let target = BigUint::from(m).pow(k as u32);
    let base = BigUint::from(n);
    let mut l = 0usize;
    let mut pow = BigUint::from(1u32);
    // largest l with n^l <= m^K
    while &pow * &base <= target {
        pow *= &base;
        l += 1;
    }
    match conv {
        LevelConvention::Floor => l,
        LevelConvention::Ceil if pow == target => l,
        LevelConvention::Ceil => l + 1,
    }
}

/// Number of level-`K` approximate squares, `N^{L(K)} · M^{K−L(K)}`.
pub fn square_count(rp: &ReducedParams, k: usize, conv: LevelConvention) -> BigUint {
    let l = level_height(rp.m, rp.n, k, conv);
    BigUint::from(rp.maps()).pow(l as u32) * BigUint::from(rp.columns()).pow((k - l) as u32)
}

/// A symbolic approximate square `(i_1 … i_L ; φ(i_{L+1}) … φ(i_K))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApproxSquare {
    pub level: usize,
    pub full_prefix: Vec<usize>,
    pub column_suffix: Vec<usize>,
}

impl ApproxSquare {
    pub fn new(full_prefix: Vec<usize>, column_suffix: Vec<usize>) -> Self {
        ApproxSquare {
            level: full_prefix.len() + column_suffix.len(),
            full_prefix,
            column_suffix,
        }
    }

    /// The square containing the sequence `word` (at least `K` long).
    pub fn of_word(rp: &ReducedParams, word: &[usize], level: usize, conv: LevelConvention) -> Self {
        let l = level_height(rp.m, rp.n, level, conv);
        ApproxSquare::new(
            word[..l].to_vec(),
            word[l..level].iter().map(|&i| rp.column_of[i]).collect(),
        )
    }

    pub fn check(&self, rp: &ReducedParams) -> Result<()> {
        if self.full_prefix.iter().any(|&i| i >= rp.maps())
            || self.column_suffix.iter().any(|&j| j >= rp.columns())
        {
            return Err(invalid("approximate square symbol out of range"));
        }
        Ok(())
    }
}

/// `∏ p_{prefix} · ∏ q_{p,suffix}`, multiplied left to right.
pub fn square_measure(rp: &ReducedParams, p: &[f64], s: &ApproxSquare) -> Result<f64> {
    rp.check_map_vector(p)?;
    s.check(rp)?;
    let q = rp.column_masses(p);
    Ok(square_measure_unchecked(p, &q, s))
}

pub(crate) fn square_measure_unchecked(p: &[f64], q: &[f64], s: &ApproxSquare) -> f64 {
    let mut acc = 1.0;
    for &i in &s.full_prefix {
        acc *= p[i];
    }
    for &j in &s.column_suffix {
        acc *= q[j];
    }
    acc
}

/// `(min p)^{L(K)} · (min q_p)^{K−L(K)}`, the smallest level-`K` square.
pub fn min_square_measure(rp: &ReducedParams, p: &[f64], k: usize, conv: LevelConvention) -> Result<f64> {
    rp.check_map_vector(p)?;
    let l = level_height(rp.m, rp.n, k, conv);
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let q_min = rp.column_masses(p).into_iter().fold(f64::INFINITY, f64::min);
    let mut acc = 1.0;
    for _ in 0..l {
        acc *= p_min;
    }
    for _ in l..k {
        acc *= q_min;
    }
    Ok(acc)
}

/// Minkowski dimension of the self-affine measure `ν_p`.
pub fn dim_measure(rp: &ReducedParams, p: &[f64]) -> Result<f64> {
    rp.check_map_vector(p)?;
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let q_min = rp.column_masses(p).into_iter().fold(f64::INFINITY, f64::min);
    Ok(rp.exponent(p_min.ln(), q_min.ln()))
}

/// Minkowski dimension of the carpet itself.
pub fn dim_set(rp: &ReducedParams) -> f64 {
    let (lm, ln) = ((rp.m as f64).ln(), (rp.n as f64).ln());
    (rp.maps() as f64).ln() / ln + (1.0 - lm / ln) * (rp.columns() as f64).ln() / lm
}

/// Top of the local-dimension spectrum: like [`dim_measure`] but the column
/// term is tied to the column of the map.
pub fn max_local_dimension(rp: &ReducedParams, p: &[f64]) -> Result<f64> {
    rp.check_map_vector(p)?;
    let q = rp.column_masses(p);
    Ok(p.iter()
        .enumerate()
        .map(|(i, &pi)| rp.exponent(pi.ln(), q[rp.column_of[i]].ln()))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `α(q)` for a height-class vector.
pub fn alpha_of_q(rp: &ReducedParams, q: &[f64]) -> Result<f64> {
    rp.check_class_vector(q)?;
    Ok(alpha_of_q_unchecked(rp, q))
}

pub(crate) fn alpha_of_q_unchecked(rp: &ReducedParams, q: &[f64]) -> f64 {
    // the max over (k, l) decouples into min q_k/N_k and min q_l
    let ratio_min = q
        .iter()
        .zip(&rp.heights)
        .map(|(q, &h)| q / h as f64)
        .fold(f64::INFINITY, f64::min);
    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    rp.exponent(ratio_min.ln(), q_min.ln())
}

/// The vertex vector `q_K`, `1 <= K <= M0`.
pub fn vector_q_k(rp: &ReducedParams, k: usize) -> Result<Vec<f64>> {
    rp.check_regime_index(k, rp.classes())?;
    let nk = rp.heights[k - 1] as f64;
    let denom = nk * rp.head_columns(k) as f64 + rp.tail_maps(k) as f64;
    Ok((0..rp.classes())
        .map(|c| {
            if c < k {
                nk / denom
            } else {
                rp.heights[c] as f64 / denom
            }
        })
        .collect())
}

/// The interior vector `Q_K`, `1 <= K <= M0 − 1`.
pub fn vector_big_q_k(rp: &ReducedParams, k: usize) -> Result<Vec<f64>> {
    rp.check_regime_index(k, rp.classes().saturating_sub(1))?;
    let theta = rp.theta();
    let head = rp.head_columns(k) as f64;
    let tail = rp.tail_maps(k) as f64;
    Ok((0..rp.classes())
        .map(|c| {
            if c < k {
                (1.0 - theta) / head
            } else {
                theta * rp.heights[c] as f64 / tail
            }
        })
        .collect())
}

/// `A_K = (log n / log m − 1)·‖R^C_K‖ / |R_K|`.
pub fn threshold_a_k(rp: &ReducedParams, k: usize) -> Result<f64> {
    rp.check_regime_index(k, rp.classes().saturating_sub(1))?;
    Ok((1.0 / rp.theta() - 1.0) * rp.tail_maps(k) as f64 / rp.head_columns(k) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// A vertex vector `q_K`.
    #[serde(rename = "qK")]
    Vertex,
    /// An interior vector `Q_K`.
    #[serde(rename = "QK")]
    Interior,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Vertex => "q",
            Regime::Interior => "Q",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// 1-based regime index.
    pub k: usize,
    pub regime: Regime,
    pub q_star: Vec<f64>,
    pub alpha: f64,
    pub p_star: Vec<f64>,
}

impl OptimizationResult {
    /// `q_1`, `Q_2`, … as a label.
    pub fn label(&self) -> String {
        format!("{}_{}", self.regime, self.k)
    }
}

/// The vector minimising `dim_M ν_p`, found by classifying each `A_K`.
pub fn optimize(rp: &ReducedParams) -> OptimizationResult {
    let m0 = rp.classes();
    if m0 == 1 {
        let q = vector_q_k(rp, 1).expect("K = 1 is in range");
        return OptimizationResult {
            k: 1,
            regime: Regime::Vertex,
            alpha: dim_set(rp),
            p_star: lift_q_to_p(rp, &q),
            q_star: q,
        };
    }
    let mut best: Option<(usize, Regime, Vec<f64>, f64)> = None;
    for k in 1..m0 {
        let a_k = threshold_a_k(rp, k).expect("K in range");
        let (n_k, n_next) = (rp.heights[k - 1] as f64, rp.heights[k] as f64);
        let tol = THRESHOLD_TOL * n_next;
        let (idx, regime, q) = if a_k < n_k - tol {
            (k, Regime::Vertex, vector_q_k(rp, k))
        } else if a_k > n_next + tol {
            (k + 1, Regime::Vertex, vector_q_k(rp, k + 1))
        } else {
            (k, Regime::Interior, vector_big_q_k(rp, k))
        };
        let q = q.expect("K in range");
        let alpha = alpha_of_q_unchecked(rp, &q);
        if best.as_ref().is_none_or(|b| alpha < b.3) {
            best = Some((idx, regime, q, alpha));
        }
    }
    let (k, regime, q_star, alpha) = best.expect("M0 >= 2 gives at least one candidate");
    OptimizationResult {
        k,
        regime,
        p_star: lift_q_to_p(rp, &q_star),
        q_star,
        alpha,
    }
}

/// Distribute each class mass uniformly over the maps of its columns.
pub fn lift_q_to_p(rp: &ReducedParams, q: &[f64]) -> Vec<f64> {
    rp.class_of.iter().map(|&k| q[k] / rp.heights[k] as f64).collect()
}

/// The weights maximising the Hausdorff dimension of `ν_p`.
pub fn mcmullen_vector(rp: &ReducedParams) -> Vec<f64> {
    let theta = rp.theta();
    let norm: f64 = rp
        .column_class
        .iter()
        .map(|&k| (rp.heights[k] as f64).powf(theta))
        .sum();
    rp.class_of
        .iter()
        .map(|&k| (rp.heights[k] as f64).powf(theta - 1.0) / norm)
        .collect()
}

/// Exponent of the two-dimensional game with independent map and column draws.
pub fn alpha_pq(rp: &ReducedParams, p: &[f64], qc: &[f64]) -> Result<f64> {
    rp.check_map_vector(p)?;
    if qc.len() != rp.columns() {
        return Err(invalid("column vector has wrong length"));
    }
    check_probability_vector(qc)?;
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let q_min = qc.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(rp.exponent(p_min.ln(), q_min.ln()))
}

/// The threshold index `K` (1-based) if `q` has the optimiser shape: equal
/// `q` on classes `..K`, equal `q/N` on `K..`, each side no larger than the
/// other's minimum.
pub fn threshold_structure(rp: &ReducedParams, q: &[f64], tol: f64) -> Option<usize> {
    let m0 = rp.classes();
    let ratio = |c: usize| q[c] / rp.heights[c] as f64;
    (1..m0).find(|&k| {
        let head_equal = q[..k].iter().all(|&x| (x - q[0]).abs() <= tol);
        let tail_equal = (k..m0).all(|c| (ratio(c) - ratio(k)).abs() <= tol);
        let head_min = q[k..].iter().all(|&x| q[0] <= x + tol);
        let tail_min = (0..k).all(|c| ratio(k) <= ratio(c) + tol);
        head_equal && tail_equal && head_min && tail_min
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn carpet(m: usize, n: usize, heights: &[usize]) -> ReducedParams {
        reduce_params(&CarpetSpec::from_column_heights(m, n, heights).unwrap()).unwrap()
    }

    #[test]
    fn reduction_examples() {
        let rp = carpet(2, 3, &[1, 2]);
        assert_eq!(rp.heights, vec![1, 2]);
        assert_eq!(rp.multiplicities, vec![1, 1]);
        assert_eq!((rp.columns(), rp.maps()), (2, 3));
        assert_eq!(rp.class_of, vec![0, 1, 1]);

        let uni = carpet(2, 3, &[2, 2]);
        assert_eq!(uni.heights, vec![2]);
        assert_eq!(uni.multiplicities, vec![2]);

        let rp = carpet(2, 3, &[2, 3]);
        assert_eq!((rp.columns(), rp.maps()), (2, 5));
    }

    #[test]
    fn spec_validation() {
        assert!(CarpetSpec::new(2, 2, vec![(0, 0)]).is_err());
        assert!(CarpetSpec::new(1, 3, vec![(0, 0)]).is_err());
        assert!(CarpetSpec::new(2, 3, vec![]).is_err());
        assert!(CarpetSpec::new(2, 3, vec![(0, 0), (0, 0)]).is_err());
        assert!(CarpetSpec::new(2, 3, vec![(2, 0)]).is_err());
    }

    #[test]
    fn level_heights() {
        assert_eq!(level_height(2, 3, 6, LevelConvention::Floor), 3);
        assert_eq!(level_height(2, 3, 9, LevelConvention::Floor), 5);
        assert_eq!(level_height(2, 4, 4, LevelConvention::Floor), 2);
        assert_eq!(level_height(2, 4, 4, LevelConvention::Ceil), 2);
        assert_eq!(level_height(2, 3, 6, LevelConvention::Ceil), 4);
        assert_eq!(level_height(2, 3, 1, LevelConvention::Floor), 0);
        // floor is the largest L with m^-K <= n^-L
        for k in 1..40 {
            let l = level_height(2, 3, k, LevelConvention::Floor);
            assert!((l as f64) * 3f64.ln() <= k as f64 * 2f64.ln() + 1e-9);
            assert!(((l + 1) as f64) * 3f64.ln() > k as f64 * 2f64.ln());
        }
    }

    #[test]
    fn square_counts() {
        let rp = carpet(2, 3, &[1, 2]);
        assert_eq!(
            square_count(&rp, 6, LevelConvention::Floor),
            BigUint::from(216u32)
        );
        assert_eq!(square_count(&rp, 1, LevelConvention::Floor), BigUint::from(2u32));
        let uni = carpet(2, 3, &[2, 2]);
        assert_eq!(
            square_count(&uni, 6, LevelConvention::Floor),
            BigUint::from(512u32)
        );
        // far beyond u64
        assert!(square_count(&rp, 200, LevelConvention::Floor).bits() > 64);
    }

    #[test]
    fn square_measures() {
        let rp = carpet(2, 3, &[1, 2]);
        let p = vec![1.0 / 3.0; 3];
        let heavy = ApproxSquare::new(vec![0, 1, 2], vec![1, 1, 1]);
        let v = square_measure(&rp, &p, &heavy).unwrap();
        assert_abs_diff_eq!(
            v,
            (1.0f64 / 3.0).powi(3) * (2.0f64 / 3.0).powi(3),
            epsilon = 1e-15
        );
        let light = ApproxSquare::new(vec![2, 2, 2], vec![0, 0, 0]);
        assert_abs_diff_eq!(
            square_measure(&rp, &p, &light).unwrap(),
            3f64.powi(-6),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            min_square_measure(&rp, &p, 6, LevelConvention::Floor).unwrap(),
            3f64.powi(-6),
            epsilon = 1e-15
        );
        assert_eq!(
            min_square_measure(&rp, &p, 0, LevelConvention::Floor).unwrap(),
            1.0
        );
    }

    #[test]
    fn dimension_formulas() {
        let rp = carpet(2, 3, &[1, 2]);
        let uniform = vec![1.0 / 3.0; 3];
        assert_abs_diff_eq!(dim_measure(&rp, &uniform).unwrap(), 1.58496, epsilon = 5e-6);
        let big_q1 = vec![0.36907, 0.315465, 0.315465];
        assert_abs_diff_eq!(dim_measure(&rp, &big_q1).unwrap(), 1.58089, epsilon = 2e-5);
        assert_abs_diff_eq!(dim_set(&rp), 1.36907, epsilon = 5e-6);
        assert_abs_diff_eq!(dim_set(&carpet(2, 3, &[2, 3])), 1.83404, epsilon = 5e-6);
        assert_abs_diff_eq!(dim_set(&carpet(2, 5, &[2, 3])), 1.56932, epsilon = 5e-6);

        let uni = carpet(2, 3, &[2, 2]);
        assert_abs_diff_eq!(
            dim_measure(&uni, &[0.25; 4]).unwrap(),
            dim_set(&uni),
            epsilon = 1e-14
        );
    }

    #[test]
    fn local_dimension() {
        let rp = carpet(2, 3, &[1, 2]);
        let uniform = vec![1.0 / 3.0; 3];
        assert_abs_diff_eq!(
            max_local_dimension(&rp, &uniform).unwrap(),
            dim_measure(&rp, &uniform).unwrap(),
            epsilon = 1e-14
        );
        let p = lift_q_to_p(&rp, &vector_big_q_k(&rp, 1).unwrap());
        assert!(max_local_dimension(&rp, &p).unwrap() < dim_measure(&rp, &p).unwrap() - 1e-6);
    }

    #[test]
    fn alpha_values() {
        let rp = carpet(2, 3, &[1, 2]);
        assert_abs_diff_eq!(
            alpha_of_q(&rp, &[1.0 / 3.0, 2.0 / 3.0]).unwrap(),
            1.58496,
            epsilon = 5e-6
        );
        let theta = rp.theta();
        assert_abs_diff_eq!(
            alpha_of_q(&rp, &[1.0 - theta, theta]).unwrap(),
            1.58089,
            epsilon = 5e-6
        );
        let row3 = carpet(2, 5, &[2, 3]);
        assert_abs_diff_eq!(alpha_of_q(&row3, &[0.5, 0.5]).unwrap(), 1.68261, epsilon = 5e-6);
        assert!(alpha_of_q(&rp, &[0.5, 0.6]).is_err());
    }

    #[test]
    fn candidate_vectors() {
        let rp = carpet(2, 3, &[1, 2]);
        let q1 = vector_q_k(&rp, 1).unwrap();
        assert_abs_diff_eq!(q1[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q1[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(vector_q_k(&rp, 2).unwrap(), vec![0.5, 0.5]);
        let big = vector_big_q_k(&rp, 1).unwrap();
        assert_abs_diff_eq!(big[0], 0.36907, epsilon = 5e-6);
        assert_abs_diff_eq!(big[1], 0.63093, epsilon = 5e-6);
        assert!(vector_q_k(&rp, 0).is_err());
        assert!(vector_q_k(&rp, 3).is_err());
        assert!(vector_big_q_k(&rp, 2).is_err());

        let flat = carpet(2, 4, &[2, 4]);
        assert_eq!(vector_q_k(&flat, 2).unwrap(), vec![0.5, 0.5]);
        let b = vector_big_q_k(&flat, 1).unwrap();
        assert_abs_diff_eq!(b[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn thresholds() {
        assert_abs_diff_eq!(
            threshold_a_k(&carpet(2, 3, &[2, 3]), 1).unwrap(),
            1.75488,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            threshold_a_k(&carpet(2, 3, &[1, 2]), 1).unwrap(),
            1.16992,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            threshold_a_k(&carpet(2, 4, &[2, 4]), 1).unwrap(),
            4.0,
            epsilon = 1e-12
        );
        assert!(threshold_a_k(&carpet(2, 3, &[1, 2]), 2).is_err());
    }

    #[test]
    fn optimizer_regimes() {
        let r1 = optimize(&carpet(2, 3, &[2, 3]));
        assert_eq!((r1.regime, r1.k), (Regime::Vertex, 1));
        assert_abs_diff_eq!(r1.alpha, 1.95286, epsilon = 5e-6);
        let r2 = optimize(&carpet(2, 3, &[1, 2]));
        assert_eq!((r2.regime, r2.k), (Regime::Interior, 1));
        assert_abs_diff_eq!(r2.alpha, 1.58089, epsilon = 5e-6);
        let r3 = optimize(&carpet(2, 5, &[2, 3]));
        assert_eq!((r3.regime, r3.k), (Regime::Vertex, 2));
        assert_abs_diff_eq!(r3.alpha, 1.68261, epsilon = 5e-6);

        let tie = optimize(&carpet(2, 4, &[2, 4]));
        assert_eq!((tie.regime, tie.k), (Regime::Interior, 1));
        assert_abs_diff_eq!(tie.alpha, 2.0, epsilon = 1e-12);

        let uni = carpet(2, 3, &[2, 2]);
        let u = optimize(&uni);
        assert_abs_diff_eq!(u.alpha, dim_set(&uni), epsilon = 1e-15);
        assert_eq!(u.p_star, vec![0.25; 4]);
    }

    #[test]
    fn lifts() {
        let rp = carpet(2, 3, &[1, 2]);
        let p = lift_q_to_p(&rp, &vector_big_q_k(&rp, 1).unwrap());
        assert_abs_diff_eq!(p[0], 0.36907, epsilon = 5e-6);
        assert_abs_diff_eq!(p[1], 0.315465, epsilon = 5e-6);
        assert_abs_diff_eq!(p[2], 0.315465, epsilon = 5e-6);
        let q = vector_big_q_k(&rp, 1).unwrap();
        assert_abs_diff_eq!(
            dim_measure(&rp, &p).unwrap(),
            alpha_of_q(&rp, &q).unwrap(),
            epsilon = 1e-14
        );
        let row1 = carpet(2, 3, &[2, 3]);
        assert!(lift_q_to_p(&row1, &vector_q_k(&row1, 1).unwrap())
            .iter()
            .all(|&x| (x - 0.2).abs() < 1e-15));
        let coord = lift_q_to_p(&rp, &vector_q_k(&rp, 2).unwrap());
        assert_eq!(coord, vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn mcmullen_weights() {
        let rp = carpet(2, 3, &[1, 2]);
        let p = mcmullen_vector(&rp);
        let two_theta = 2f64.powf(rp.theta());
        assert_abs_diff_eq!(p[0], 1.0 / (1.0 + two_theta), epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], two_theta / 2.0 / (1.0 + two_theta), epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.30382, epsilon = 2e-5);
        for heights in [&[2, 3][..], &[1, 2], &[2, 3]] {
            let s: f64 = mcmullen_vector(&carpet(2, 3, heights)).iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
        let uni = carpet(2, 3, &[2, 2]);
        assert!(mcmullen_vector(&uni).iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn two_dimensional_exponent() {
        let rp = carpet(2, 3, &[1, 2]);
        let a = alpha_pq(&rp, &[1.0 / 3.0; 3], &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(a, dim_set(&rp), epsilon = 1e-14);
        assert_abs_diff_eq!(a, 1.36907, epsilon = 5e-6);
        let p = vec![0.2, 0.5, 0.3];
        let coupled = alpha_pq(&rp, &p, &rp.column_masses(&p)).unwrap();
        assert_abs_diff_eq!(coupled, dim_measure(&rp, &p).unwrap(), epsilon = 1e-14);
    }
}
