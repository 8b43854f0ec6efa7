//! Shift-invariant driver measures: i.i.d. (Bernoulli) and positive Markov
//! chains, with cylinder evaluation, reversal and seeded sampling.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbolic::{natural_project, IfsModel, Word};

const SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
/// Words longer than this are evaluated in log space.
const LOG_DOMAIN_LEN: usize = 64;

/// Probability vector with strictly positive entries summing to one.
pub fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(invalid("probability vector is empty"));
    }
    if p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid("probability entries must be strictly positive"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(invalid(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// The i.i.d. measure `p^ℕ`.
#[derive(Clone, Debug)]
pub struct BernoulliDriver {
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl BernoulliDriver {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_probability_vector(&weights)?;
        let sampler = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
        Ok(BernoulliDriver { weights, sampler })
    }

    pub fn uniform(n: usize) -> Self {
        BernoulliDriver::new(vec![1.0 / n as f64; n]).expect("uniform vector is valid")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Stationary Markov measure of a strictly positive row-stochastic matrix.
#[derive(Clone, Debug)]
pub struct MarkovDriver {
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl MarkovDriver {
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self> {
        let n = transition.len();
        if n == 0 || transition.iter().any(|r| r.len() != n) {
            return Err(invalid("transition matrix must be square and nonempty"));
        }
        for row in &transition {
            check_probability_vector(row)?;
        }
        let stationary = stationary_vector(&transition)?;
        let initial = WeightedIndex::new(&stationary).map_err(|e| invalid(e.to_string()))?;
        let rows = transition
            .iter()
            .map(|r| WeightedIndex::new(r).map_err(|e| invalid(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkovDriver {
            transition,
            stationary,
            initial,
            rows,
        })
    }

    /// A chain whose rows all equal `p`; its measure is `p^ℕ`.
    pub fn from_bernoulli(p: &BernoulliDriver) -> Self {
        let rows = vec![p.weights().to_vec(); p.weights().len()];
        MarkovDriver::new(rows).expect("rows of a valid probability vector")
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `(P^k)_{a,b}`.
    pub fn power_entry(&self, k: usize, a: usize, b: usize) -> f64 {
        let p = self.matrix();
        let mut row = DVector::from_element(p.nrows(), 0.0);
        row[a] = 1.0;
        let mut row = row.transpose();
        for _ in 0..k {
            row = &row * &p;
        }
        row[b]
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.transition.len();
        DMatrix::from_fn(n, n, |i, j| self.transition[i][j])
    }

    /// Largest modulus among eigenvalues other than the Perron root 1.
    pub fn second_eigenvalue_modulus(&self) -> f64 {
        let mut moduli: Vec<f64> = self
            .matrix()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
        moduli.get(1).copied().unwrap_or(0.0)
    }
}

fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // Solve π(P − I) = 0 with Σπ = 1 by replacing one balance equation.
    let mut a = DMatrix::from_fn(n, n, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| invalid("transition matrix has no unique stationary vector"))?;
    let pi: Vec<f64> = pi.iter().copied().collect();
    for j in 0..n {
        let v: f64 = (0..n).map(|i| pi[i] * p[i][j]).sum();
        if (v - pi[j]).abs() > STATIONARY_TOL {
            return Err(invalid("stationary solve did not converge"));
        }
    }
    if pi.iter().any(|&x| !(x > 0.0)) {
        return Err(invalid("stationary vector must be strictly positive"));
    }
    Ok(pi)
}

/// A shift-invariant measure on sequences.
#[derive(Clone, Debug)]
pub enum Driver {
    Bernoulli(BernoulliDriver),
    Markov(MarkovDriver),
}

impl Driver {
    pub fn bernoulli(weights: Vec<f64>) -> Result<Self> {
        BernoulliDriver::new(weights).map(Driver::Bernoulli)
    }

    pub fn markov(transition: Vec<Vec<f64>>) -> Result<Self> {
        MarkovDriver::new(transition).map(Driver::Markov)
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Driver::Bernoulli(b) => b.weights.len(),
            Driver::Markov(m) => m.transition.len(),
        }
    }

    pub fn log_cylinder_measure(&self, w: &Word) -> f64 {
        let s = w.symbols();
        match self {
            Driver::Bernoulli(b) => s.iter().map(|&i| b.weights[i].ln()).sum(),
            Driver::Markov(m) => match s.first() {
                None => 0.0,
                Some(&first) => {
                    m.stationary[first].ln()
                        + s.windows(2).map(|p| m.transition[p[0]][p[1]].ln()).sum::<f64>()
                }
            },
        }
    }

    /// `μ([w])`; the empty word has measure one.
    pub fn cylinder_measure(&self, w: &Word) -> f64 {
        if w.len() > LOG_DOMAIN_LEN {
            return self.log_cylinder_measure(w).exp();
        }
        let s = w.symbols();
        match self {
            Driver::Bernoulli(b) => s.iter().map(|&i| b.weights[i]).product(),
            Driver::Markov(m) => match s.first() {
                None => 1.0,
                Some(&first) => {
                    m.stationary[first] * s.windows(2).map(|p| m.transition[p[0]][p[1]]).product::<f64>()
                }
            },
        }
    }

    /// `μ([reverse(w)])`, the reversed measure of `[w]`.
    pub fn reversed_cylinder_measure(&self, w: &Word) -> f64 {
        match self {
            Driver::Bernoulli(_) => self.cylinder_measure(w),
            Driver::Markov(_) => self.cylinder_measure(&w.reversed()),
        }
    }

    /// A streaming sampler for successive symbols `i_1, i_2, …`.
    pub fn stream(&self) -> SymbolStream<'_> {
        SymbolStream {
            driver: self,
            prev: None,
        }
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Word {
        let mut s = self.stream();
        Word::new((0..length).map(|_| s.next_symbol(rng)).collect())
    }
}

/// Draws `i_1, i_2, …` from a driver; Markov streams remember the last draw.
#[derive(Clone, Debug)]
pub struct SymbolStream<'a> {
    driver: &'a Driver,
    prev: Option<usize>,
}

impl SymbolStream<'_> {
    pub fn next_symbol<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let s = match (self.driver, self.prev) {
            (Driver::Bernoulli(b), _) => b.sampler.sample(rng),
            (Driver::Markov(m), None) => m.initial.sample(rng),
            (Driver::Markov(m), Some(p)) => m.rows[p].sample(rng),
        };
        self.prev = Some(s);
        s
    }
}

/// Constants `(ε, κ)` of the one-sided decay inequality, with the enumeration
/// bounds they were certified on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub epsilon: f64,
    pub kappa: f64,
    pub gap_max: usize,
    pub word_len_max: usize,
}

impl DecayConstants {
    /// `1 + κ·2^{−ε·gap}`, where `gap = n − |u|`.
    pub fn factor(&self, gap: usize) -> f64 {
        if gap == 0 || self.kappa == 0.0 {
            1.0 + self.kappa
        } else {
            1.0 + self.kappa * (-self.epsilon * gap as f64).exp2()
        }
    }
}

/// `μ([u] ∩ σ^{−(|u|+gap)}[v])` for a Markov driver.
pub fn joint_cylinder_measure(drv: &MarkovDriver, u: &Word, gap: usize, v: &Word) -> f64 {
    let d = Driver::Markov(drv.clone());
    match (u.symbols().last(), v.symbols().first()) {
        (Some(&a), Some(&b)) => {
            d.cylinder_measure(u) * drv.power_entry(gap + 1, a, b) / drv.stationary[b] * d.cylinder_measure(v)
        }
        _ => d.cylinder_measure(u) * d.cylinder_measure(v),
    }
}

/// Fit `(ε, κ)`: ε from the spectral gap, κ as the smallest constant making
/// the decay inequality hold on every word pair up to `word_len_max` and every
/// gap `n − |u|` in `0..=gap_max`.
pub fn estimate_decay_constants(
    drv: &MarkovDriver,
    gap_max: usize,
    word_len_max: usize,
) -> Result<DecayConstants> {
    let lambda2 = drv.second_eigenvalue_modulus();
    if lambda2 >= 1.0 - 1e-12 {
        return Err(Error::NotMixing(lambda2));
    }
    let epsilon = if lambda2 <= 1e-15 {
        f64::INFINITY
    } else {
        -lambda2.log2()
    };
    let n = drv.transition.len();
    let d = Driver::Markov(drv.clone());
    let words: Vec<Word> = (1..=word_len_max)
        .flat_map(|len| Word::all_of_length(n, len))
        .collect();
    let powers: Vec<DMatrix<f64>> = {
        let p = drv.matrix();
        let mut acc = p.clone();
        let mut out = Vec::with_capacity(gap_max + 1);
        for _ in 0..=gap_max {
            out.push(acc.clone());
            acc = &acc * &p;
        }
        out
    };
    let mut kappa = 0.0f64;
    for u in &words {
        let mu_u = d.cylinder_measure(u);
        let a = *u.symbols().last().unwrap();
        for v in &words {
            let mu_v = d.cylinder_measure(v);
            let b = v.symbols()[0];
            for (gap, pw) in powers.iter().enumerate() {
                let joint = mu_u * pw[(a, b)] / drv.stationary[b] * mu_v;
                let excess = joint / (mu_u * mu_v) - 1.0;
                if excess <= 1e-12 {
                    continue;
                }
                let scale = if gap == 0 {
                    1.0
                } else {
                    (epsilon * gap as f64).exp2()
                };
                kappa = kappa.max(excess * scale);
            }
        }
    }
    Ok(DecayConstants {
        epsilon,
        kappa,
        gap_max,
        word_len_max,
    })
}

/// `count` points of `π_*(reversed μ)`, each the projection of a reversed
/// driver path of length `depth`.
pub fn pushforward_sample<R: Rng + ?Sized>(
    ifs: &IfsModel,
    drv: &Driver,
    depth: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if drv.alphabet_size() != ifs.len() {
        return Err(invalid("driver alphabet must match the number of maps"));
    }
    if depth == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    let base = ifs.base_point();
    (0..count)
        .map(|_| {
            let path = drv.sample_path(depth, rng);
            natural_project(ifs, &path.reversed(), &base).map(|(x, _)| x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_chain() -> MarkovDriver {
        MarkovDriver::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn bernoulli_cylinders() {
        let fair = Driver::bernoulli(vec![0.5, 0.5]).unwrap();
        assert_eq!(fair.cylinder_measure(&Word::new(vec![0, 1, 0])), 0.125);
        let d = Driver::bernoulli(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((d.cylinder_measure(&Word::new(vec![1, 1])) - 4.0 / 9.0).abs() < 1e-15);
        let w = Word::new(vec![0, 1]);
        assert_eq!(d.reversed_cylinder_measure(&w), d.cylinder_measure(&w));
        assert!((d.cylinder_measure(&w) - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(d.cylinder_measure(&Word::empty()), 1.0);
    }

    #[test]
    fn markov_cylinders() {
        let m = example_chain();
        // balance: 0.1 π0 = 0.2 π1
        assert!((m.stationary()[0] - 2.0 / 3.0).abs() < 1e-12);
        let d = Driver::Markov(m);
        let w = Word::new(vec![0, 1]);
        assert!((d.cylinder_measure(&w) - 2.0 / 3.0 * 0.1).abs() < 1e-12);
        assert!((d.reversed_cylinder_measure(&w) - 1.0 / 3.0 * 0.2).abs() < 1e-12);
        assert_eq!(d.reversed_cylinder_measure(&Word::empty()), 1.0);
    }

    #[test]
    fn long_words_use_log_domain() {
        let d = Driver::bernoulli(vec![0.5, 0.5]).unwrap();
        let w = Word::constant(0, 100);
        let v = d.cylinder_measure(&w);
        assert!((v.ln() - 100.0 * 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(BernoulliDriver::new(vec![1.0, 0.0]).is_err());
        assert!(BernoulliDriver::new(vec![0.5, 0.6]).is_err());
        assert!(MarkovDriver::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn near_degenerate_path() {
        let d = Driver::bernoulli(vec![1.0 - 1e-9, 1e-9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = d.sample_path(10_000, &mut rng);
        assert!(w.symbols().iter().filter(|&&s| s == 0).count() >= 9_999);
    }

    #[test]
    fn decay_of_example_chain() {
        let m = example_chain();
        assert!((m.second_eigenvalue_modulus() - 0.7).abs() < 1e-12);
        let dc = estimate_decay_constants(&m, 10, 3).unwrap();
        assert!((dc.epsilon - (-(0.7f64).log2())).abs() < 1e-12);
        assert!((dc.epsilon - 0.5146).abs() < 1e-4);
    }

    #[test]
    fn bernoulli_equivalent_chain_has_zero_kappa() {
        let b = BernoulliDriver::new(vec![0.3, 0.7]).unwrap();
        let dc = estimate_decay_constants(&MarkovDriver::from_bernoulli(&b), 6, 3).unwrap();
        assert_eq!(dc.kappa, 0.0);
    }
}
