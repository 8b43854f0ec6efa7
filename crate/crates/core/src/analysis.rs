//! Estimators, evaluators for the expected-cover-time bounds, and brute-force
//! oracles for the closed forms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::carpet::{
    alpha_of_q_unchecked, level_height, optimize, square_count, square_measure_unchecked, ApproxSquare,
    LevelConvention, ReducedParams,
};
use crate::engine::PointIndex;
use crate::error::{invalid, Error, Result};
use crate::measures::{check_probability_vector, pushforward_sample, BernoulliDriver, Driver};
use crate::symbolic::{distance, word_length_bound, IfsModel, SymbolicPacking, Word};

/// Enumeration budget of [`oracle_min_square`].
pub const SQUARE_BUDGET: u128 = 10_000_000;
/// Evaluation budget of [`oracle_grid_alpha`].
pub const GRID_BUDGET: u128 = 10_000_000;
/// State-space budget (cells × visited subsets) of the exact cover oracle.
pub const CHAIN_BUDGET: u128 = 1_000_000;
pub const MAX_EXACT_CELLS: usize = 12;

/// Ball counts below this are flagged as unreliable.
pub const MIN_RELIABLE_COUNT: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `(log(1/r), log T)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(log(1/r), log T_r)`.
pub fn slope_fit(samples: &[(f64, f64)]) -> Result<SlopeFit> {
    if samples.len() < 3 {
        return Err(invalid("slope fit needs at least 3 samples"));
    }
    if samples.iter().any(|&(r, t)| !(r > 0.0) || !(t > 0.0)) {
        return Err(invalid("radii and times must be positive"));
    }
    if samples.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(invalid("radii must be strictly decreasing"));
    }
    let points: Vec<(f64, f64)> = samples.iter().map(|&(r, t)| (-r.ln(), t.ln())).collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SlopeFit {
        exponent,
        intercept,
        residual,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub radius: f64,
    /// `max_y log ν̂(B(y, r)) / log r` over the probes.
    pub value: f64,
    /// Smallest ball count over the probes.
    pub min_count: usize,
    pub reliable: bool,
}

/// Sample depth so that projection errors stay well below `r`.
fn sample_depth(ifs: &IfsModel, r: f64) -> Result<usize> {
    Ok(word_length_bound(ifs, r * 1e-3)?.ceil().max(1.0) as usize)
}

/// Empirical `log ν(B(y, r)) / log r`, maximised over probes drawn from a
/// pilot pushforward sample.
pub fn minkowski_dim_estimate<R: Rng + ?Sized>(
    ifs: &IfsModel,
    drv: &Driver,
    radii: &[f64],
    samples: usize,
    probes: usize,
    rng: &mut R,
) -> Result<Vec<DimEstimate>> {
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let depth = sample_depth(ifs, r_min)?;
    let probe_points = pushforward_sample(ifs, drv, depth, probes, rng)?;
    minkowski_dim_estimate_at(ifs, drv, radii, &probe_points, samples, rng)
}

/// As [`minkowski_dim_estimate`] with caller-chosen probe points.
pub fn minkowski_dim_estimate_at<R: Rng + ?Sized>(
    ifs: &IfsModel,
    drv: &Driver,
    radii: &[f64],
    probes: &[Vec<f64>],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<DimEstimate>> {
    if radii.is_empty() || probes.is_empty() || samples == 0 {
        return Err(invalid("need radii, probes and samples"));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(invalid("radii must lie in (0, 1)"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be decreasing"));
    }
    let r_min = radii[radii.len() - 1];
    let depth = sample_depth(ifs, r_min)?;
    let sample = pushforward_sample(ifs, drv, depth, samples, rng)?;
    let index = PointIndex::new(sample, r_min)?;
    Ok(radii
        .iter()
        .map(|&r| {
            let min_count = probes
                .iter()
                .map(|y| index.count_within(y, r))
                .min()
                .expect("probes nonempty");
            let value = (min_count as f64 / samples as f64).ln() / r.ln();
            DimEstimate {
                radius: r,
                value,
                min_count,
                reliable: min_count >= MIN_RELIABLE_COUNT,
            }
        })
        .collect())
}

/// `H_n = 1 + 1/2 + … + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatthewsBounds {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub harmonic: f64,
}

/// `[c·t·H_count, C·T·H_count]`.
pub fn matthews_bounds(t_inf: f64, t_sup: f64, count: usize, c: f64, big_c: f64) -> Result<MatthewsBounds> {
    if count < 1 {
        return Err(invalid("count must be at least 1"));
    }
    if !(t_inf > 0.0 && t_inf <= t_sup) {
        return Err(invalid("need 0 < t <= T"));
    }
    let h = harmonic(count);
    Ok(MatthewsBounds {
        lower: c * t_inf * h,
        upper: big_c * t_sup * h,
        count,
        harmonic: h,
    })
}

/// `(log(4/r))² · (r/4)^{−ᾱ−ō}`, the upper bound without its constant.
pub fn expected_upper_main_term(r: f64, alpha_upper: f64, o_upper: f64) -> Result<f64> {
    if !(r > 0.0 && r < 4.0) {
        return Err(invalid("radius must lie in (0, 4)"));
    }
    if !(o_upper.abs() < alpha_upper / 2.0) {
        return Err(Error::Applicability(format!(
            "|ō| = {} is not below ᾱ/2 = {}",
            o_upper.abs(),
            alpha_upper / 2.0
        )));
    }
    Ok((4.0 / r).ln().powi(2) * (r / 4.0).powf(-alpha_upper - o_upper))
}

/// Constants entering the upper-bound constant `C_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub kappa: f64,
    pub epsilon: f64,
    /// Largest contraction ratio.
    pub a: f64,
    pub diameter: f64,
    /// `N_r(Λ) <= C_0 r^{−2D}`.
    pub c0_box: f64,
    pub d_box: f64,
    /// Quasi-Bernoulli constant `μ([uv]) <= C μ([u]) μ([v])`.
    pub quasi_bernoulli: f64,
}

/// `C_1 = C·C_1'·(2D + ᾱ(1 + log C_0)/(2 log 2κ))` with
/// `C_1' = 4ᾱ/(ε log 2) − 2/log a − ᾱ log(|Λ|/a)/(log a · log 2κ)`.
pub fn upper_bound_constant(k: &BoundConstants, alpha_upper: f64) -> Result<f64> {
    if !(2.0 * k.kappa > 1.0) {
        return Err(Error::Applicability(format!(
            "the constant needs 2κ > 1, got κ = {}",
            k.kappa
        )));
    }
    let ln2k = (2.0 * k.kappa).ln();
    let la = k.a.ln();
    let c1p = 4.0 * alpha_upper / (k.epsilon * std::f64::consts::LN_2)
        - 2.0 / la
        - alpha_upper * (k.diameter / k.a).ln() / (la * ln2k);
    Ok(k.quasi_bernoulli * c1p * (2.0 * k.d_box + alpha_upper * (1.0 + k.c0_box.ln()) / (2.0 * ln2k)))
}

/// `R_r = 2r((L(r) + 2)/c_0)^{2/d}`, the radius the lower bound is taken at.
pub fn lower_bound_radius(ifs: &IfsModel, r: f64, c0: f64, d: f64) -> Result<f64> {
    if !(c0 > 0.0 && d > 0.0) {
        return Err(invalid("c_0 and d must be positive"));
    }
    let l = word_length_bound(ifs, r)?;
    Ok(2.0 * r * ((l + 2.0) / c0).powf(2.0 / d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerMainTerm {
    pub radius: f64,
    /// `R_r^{−α̲−o̲(R_r)}`.
    pub value: f64,
    /// Multiplies `value` in the bound.
    pub factor: f64,
}

impl LowerMainTerm {
    pub fn bound(&self) -> f64 {
        self.factor * self.value
    }
}

/// Lower bound main term. `o_lower` is `o̲` evaluated at `R_r`, defined by
/// `min_y ν(B(y, R)) = R^{α̲ + o̲(R)}`.
pub fn expected_lower_main_term(
    ifs: &IfsModel,
    r: f64,
    alpha_lower: f64,
    o_lower: f64,
    c0: f64,
    d: f64,
) -> Result<LowerMainTerm> {
    let radius = lower_bound_radius(ifs, r, c0, d)?;
    if radius >= ifs.diameter_bound() {
        return Err(Error::Applicability(format!(
            "R_r = {radius} is not below the diameter {}",
            ifs.diameter_bound()
        )));
    }
    Ok(LowerMainTerm {
        radius,
        value: radius.powf(-alpha_lower - o_lower),
        factor: 0.25,
    })
}

/// `o(ρ)` such that `ν_min(ρ) = ρ^{α + o(ρ)}`.
pub fn dimension_offset(alpha: f64, nu_min: f64, rho: f64) -> f64 {
    nu_min.ln() / rho.ln() - alpha
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Bracket `ν(B(y, ρ))` by descending cylinders: `π[w]` lies in the ball of
/// radius `a^{|w|}|Λ|` around `f_w(base)`.
pub fn ball_measure_bounds(
    ifs: &IfsModel,
    drv: &Driver,
    y: &[f64],
    rho: f64,
    max_depth: usize,
) -> Result<MeasureBracket> {
    if drv.alphabet_size() != ifs.len() {
        return Err(invalid("driver alphabet does not match the IFS"));
    }
    if y.len() != ifs.dim() {
        return Err(invalid("point has wrong dimension"));
    }
    let base = ifs.base_point();
    let a = ifs.contraction();
    let mut bracket = MeasureBracket {
        lower: 0.0,
        upper: 0.0,
    };
    // (word, image of base, radius)
    let mut stack = vec![(Vec::new(), base.clone(), ifs.diameter_bound())];
    while let Some((w, c, rad)) = stack.pop() {
        let dist = distance(&c, y);
        if dist - rad > rho {
            continue;
        }
        let mass = || drv.reversed_cylinder_measure(&Word::new(w.clone()));
        if dist + rad <= rho {
            let m = mass();
            bracket.lower += m;
            bracket.upper += m;
            continue;
        }
        if w.len() == max_depth {
            bracket.upper += mass();
            continue;
        }
        for s in 0..ifs.len() {
            // f_{w s}(base) = f_w(f_s(base))
            let mut word = w.clone();
            word.push(s);
            let (img, _) = crate::symbolic::natural_project(ifs, &Word::new(word.clone()), &base)?;
            stack.push((word, img, rad * a));
        }
    }
    Ok(bracket)
}

/// Bracket of `min_y ν(B(y, ρ))` over the given probes.
pub fn min_ball_measure(
    ifs: &IfsModel,
    drv: &Driver,
    probes: &[Vec<f64>],
    rho: f64,
    max_depth: usize,
) -> Result<MeasureBracket> {
    if probes.is_empty() {
        return Err(invalid("need at least one probe"));
    }
    let mut out = MeasureBracket {
        lower: f64::INFINITY,
        upper: f64::INFINITY,
    };
    for y in probes {
        let b = ball_measure_bounds(ifs, drv, y, rho, max_depth)?;
        out.lower = out.lower.min(b.lower);
        out.upper = out.upper.min(b.upper);
    }
    Ok(out)
}

/// `f_w(base)` for every word of length `depth`.
pub fn cylinder_probes(ifs: &IfsModel, depth: usize) -> Result<Vec<Vec<f64>>> {
    let count = (ifs.len() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if count > SQUARE_BUDGET {
        return Err(Error::Budget {
            needed: count,
            budget: SQUARE_BUDGET,
        });
    }
    let base = ifs.base_point();
    if depth == 0 {
        return Ok(vec![base]);
    }
    Word::all_of_length(ifs.len(), depth)
        .iter()
        .map(|w| crate::symbolic::natural_project(ifs, w, &base).map(|(x, _)| x))
        .collect()
}

/// `min(log p_1, log p_2) / log λ` for the overlapping pair `λx ∓ 1`.
pub fn bernoulli_convolution_dim_lower(p: &[f64], lambda: f64) -> Result<f64> {
    if p.len() != 2 {
        return Err(invalid("need a 2-vector"));
    }
    check_probability_vector(p)?;
    if !(lambda > 0.5 && lambda < 1.0) {
        return Err(invalid(format!("λ = {lambda} outside (1/2, 1)")));
    }
    Ok(p[0].ln().min(p[1].ln()) / lambda.ln())
}

/// The lightest level-`K` square by exhaustive enumeration.
pub fn oracle_min_square(
    rp: &ReducedParams,
    p: &[f64],
    k: usize,
    conv: LevelConvention,
) -> Result<(ApproxSquare, f64)> {
    if p.len() != rp.maps() {
        return Err(invalid("wrong number of map weights"));
    }
    check_probability_vector(p)?;
    let count = square_count(rp, k, conv);
    if count > SQUARE_BUDGET.into() {
        return Err(Error::Budget {
            needed: num_traits::ToPrimitive::to_u128(&count).unwrap_or(u128::MAX),
            budget: SQUARE_BUDGET,
        });
    }
    let l = level_height(rp.m, rp.n, k, conv);
    let q = rp.column_masses(p);
    let (n, m) = (rp.maps(), rp.columns());
    // odometer over prefix digits then suffix digits
    let mut digits = vec![0usize; k];
    let radix = |pos: usize| if pos < l { n } else { m };
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let sq = ApproxSquare::new(digits[..l].to_vec(), digits[l..].to_vec());
        let v = square_measure_unchecked(p, &q, &sq);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((digits.clone(), v));
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                let (d, v) = best.expect("at least one square");
                return Ok((ApproxSquare::new(d[..l].to_vec(), d[l..].to_vec()), v));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radix(pos) {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOracle {
    pub q: Vec<f64>,
    pub alpha: f64,
    /// Bound on `alpha − min α` from the grid spacing.
    pub slack: f64,
    pub evaluations: u64,
}

/// Minimise `α(q)` over `{Σ R_k q_k = 1, q_k >= δ}` with the first `M0 − 1`
/// coordinates on multiples of `δ` and the last solved from the constraint.
pub fn oracle_grid_alpha(rp: &ReducedParams, delta: f64) -> Result<GridOracle> {
    let m0 = rp.classes();
    if m0 > 4 {
        return Err(invalid("grid oracle supports at most 4 height classes"));
    }
    if !(1e-4..1.0).contains(&delta) {
        return Err(invalid("grid step must lie in [1e-4, 1)"));
    }
    let steps = (1.0 / delta).floor() as u128;
    let needed = steps.saturating_pow(m0 as u32 - 1);
    if needed > GRID_BUDGET {
        return Err(Error::Budget {
            needed,
            budget: GRID_BUDGET,
        });
    }
    let r: Vec<f64> = rp.multiplicities.iter().map(|&x| x as f64).collect();
    let last = m0 - 1;
    let mut idx = vec![1u64; last];
    let mut q = vec![0.0; m0];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0u64;
    'outer: loop {
        let mut used = 0.0;
        for (c, &i) in idx.iter().enumerate() {
            q[c] = i as f64 * delta;
            used += r[c] * q[c];
        }
        q[last] = (1.0 - used) / r[last];
        if q[last] >= delta {
            evaluations += 1;
            let a = alpha_of_q_unchecked(rp, &q);
            if best.as_ref().is_none_or(|b| a < b.1) {
                best = Some((q.clone(), a));
            }
        }
        // odometer; a coordinate resets once the constraint is exhausted
        let mut pos = 0;
        loop {
            if pos == last {
                break 'outer;
            }
            idx[pos] += 1;
            let partial: f64 = (0..last).map(|c| r[c] * idx[c] as f64 * delta).sum();
            if partial + r[last] * delta <= 1.0 + 1e-12 {
                break;
            }
            idx[pos] = 1;
            pos += 1;
        }
    }
    let (q, alpha) = best.ok_or_else(|| invalid("grid step leaves no feasible point"))?;
    Ok(GridOracle {
        slack: grid_slack(rp, delta),
        q,
        alpha,
        evaluations,
    })
}

/// Bound on how far the best grid point can sit above the true minimum: the
/// optimiser moves by at most `Δ` in each coordinate when snapped to the grid,
/// and `α` is Lipschitz in `log q` with the two coefficient weights.
pub fn grid_slack(rp: &ReducedParams, delta: f64) -> f64 {
    let opt = optimize(rp);
    let m0 = rp.classes();
    let r_last = rp.multiplicities[m0 - 1] as f64;
    let r_head: f64 = rp.multiplicities[..m0 - 1].iter().map(|&x| x as f64).sum();
    let shift = (delta / 2.0).max(delta * r_head / (2.0 * r_last)) + delta;
    let q_min = opt.q_star.iter().copied().fold(f64::INFINITY, f64::min);
    let (lm, ln) = ((rp.m as f64).ln(), (rp.n as f64).ln());
    let lip = 1.0 / ln + (1.0 - lm / ln) / lm;
    if q_min <= shift {
        return f64::INFINITY;
    }
    shift * lip / (q_min - shift)
}

/// Exact cover and hitting expectations of a Bernoulli-driven packing chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCover {
    /// Expected cover time under the tracker convention (marking from
    /// `max(burn_in, 1)`).
    pub expectation: f64,
    pub burn_in: usize,
    /// Cell index of the start.
    pub start_cell: usize,
    /// `E_x τ_y`, `τ_y = inf{t >= 0 : X_t = y}`.
    pub hitting: Vec<Vec<f64>>,
    /// Expected time to visit every cell from `x`, counting `x` at time 0.
    pub cover_from: Vec<f64>,
    /// Distribution of the cell at the first marking time.
    pub marked_start: Vec<f64>,
}

impl ExactCover {
    /// `min_{x≠y} E_x τ_y` and `max_{x,y} E_x τ_y`.
    pub fn hitting_extremes(&self) -> (f64, f64) {
        let n = self.hitting.len();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                hi = hi.max(self.hitting[x][y]);
                if x != y {
                    lo = lo.min(self.hitting[x][y]);
                }
            }
        }
        (lo, hi)
    }

    /// Expected first `t >= max(burn_in, 1)` at which the chain is in `y`.
    pub fn hitting_expectation(&self, y: usize) -> f64 {
        self.burn_in.max(1) as f64
            + self
                .marked_start
                .iter()
                .enumerate()
                .map(|(x, w)| w * self.hitting[x][y])
                .sum::<f64>()
    }
}

fn cell_chain(drv: &BernoulliDriver, pk: &SymbolicPacking) -> Result<DMatrix<f64>> {
    let n = pk.len();
    let mut p = DMatrix::zeros(n, n);
    for (x, w) in pk.words().iter().enumerate() {
        for (s, &ps) in drv.weights().iter().enumerate() {
            let y = pk
                .locate(std::iter::once(s).chain(w.symbols().iter().copied()))
                .ok_or_else(|| invalid("packing is not closed under prepending a symbol"))?;
            p[(x, y)] += ps;
        }
    }
    Ok(p)
}

/// Exact expected cover time by solving the (cell, visited set) chain.
pub fn oracle_exact_cover_expectation(
    drv: &BernoulliDriver,
    pk: &SymbolicPacking,
    x0: &Word,
) -> Result<ExactCover> {
    let n = pk.len();
    if drv.weights().len() != pk.alphabet() {
        return Err(invalid("driver alphabet does not match the packing"));
    }
    let states = (n as u128) << n.min(120);
    if n > MAX_EXACT_CELLS || states > CHAIN_BUDGET {
        return Err(Error::Budget {
            needed: states,
            budget: CHAIN_BUDGET,
        });
    }
    let p = cell_chain(drv, pk)?;
    let full = (1usize << n) - 1;

    // g[S][x]: expected remaining steps from x with visited set S ∋ x
    let mut g = vec![Vec::<f64>::new(); 1 << n];
    let mut order: Vec<usize> = (1..=full).collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for s in order {
        let members: Vec<usize> = (0..n).filter(|&x| s >> x & 1 == 1).collect();
        g[s] = vec![0.0; n];
        if s == full {
            continue;
        }
        let k = members.len();
        let mut a = DMatrix::<f64>::identity(k, k);
        let mut b = DVector::<f64>::from_element(k, 1.0);
        for (i, &x) in members.iter().enumerate() {
            for y in 0..n {
                let pxy = p[(x, y)];
                if pxy == 0.0 {
                    continue;
                }
                if s >> y & 1 == 1 {
                    let j = members.iter().position(|&m| m == y).expect("member");
                    a[(i, j)] -= pxy;
                } else {
                    b[i] += pxy * g[s | 1 << y][y];
                }
            }
        }
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| invalid("cover chain is singular: some cell is unreachable"))?;
        for (i, &x) in members.iter().enumerate() {
            g[s][x] = sol[i];
        }
    }

    let mut hitting = vec![vec![0.0; n]; n];
    // filled column by column
    #[allow(clippy::needless_range_loop)]
    for y in 0..n {
        let others: Vec<usize> = (0..n).filter(|&x| x != y).collect();
        if others.is_empty() {
            continue;
        }
        let k = others.len();
        let mut a = DMatrix::<f64>::identity(k, k);
        for (i, &x) in others.iter().enumerate() {
            for (j, &z) in others.iter().enumerate() {
                a[(i, j)] -= p[(x, z)];
            }
        }
        let sol = a
            .lu()
            .solve(&DVector::from_element(k, 1.0))
            .ok_or_else(|| invalid("hitting system is singular"))?;
        for (i, &x) in others.iter().enumerate() {
            hitting[x][y] = sol[i];
        }
    }

    let burn_in = pk.max_word_len();
    let first = burn_in.max(1);
    let last = x0.symbols().last().copied().unwrap_or(0);
    let start_cell = pk
        .locate(x0.symbols().iter().copied().chain(std::iter::repeat(last)))
        .ok_or_else(|| invalid("start coding has no packing prefix"))?;
    let mut dist = DVector::<f64>::zeros(n);
    dist[start_cell] = 1.0;
    let pt = p.transpose();
    for _ in 0..first {
        dist = &pt * dist;
    }
    let cover_from: Vec<f64> = (0..n).map(|x| g[1 << x][x]).collect();
    let expectation = first as f64 + (0..n).map(|x| dist[x] * cover_from[x]).sum::<f64>();
    Ok(ExactCover {
        expectation,
        burn_in,
        start_cell,
        hitting,
        cover_from,
        marked_start: dist.iter().copied().collect(),
    })
}
