//! Chaos-game orbits and cover/hitting-time measurement.
//!
//! A tracker maps the orbit to cells of a packing. At time `t` the orbit
//! point is `π(i_t … i_1 · c)` where `c` codes `x_0`, so every tracker reads
//! the reversed history with the new symbol in front. Visits are only marked
//! once the tracker's word memory has been overwritten by drawn symbols, at
//! `t >= max(burn_in, 1)`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carpet::{level_height, square_count, ApproxSquare, LevelConvention, ReducedParams};
use crate::error::{invalid, Error, Result};
use crate::measures::Driver;
use crate::symbolic::{natural_project, word_length_bound, IfsModel, SymbolicPacking, Word};

pub const DEFAULT_STEP_CEILING: u64 = 1_000_000_000;

/// Largest number of cells a tracker will allocate a visited set for.
pub const CELL_BUDGET: u128 = 1 << 32;

/// Per-trial seed derived from the master seed and the trial index.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, index))
}

/// `x_0`'s coding, padded by repeating its last symbol (0 if empty).
fn padded_coding(x0: &Word, len: usize) -> impl Iterator<Item = usize> + '_ {
    let last = x0.symbols().last().copied().unwrap_or(0);
    x0.symbols()
        .iter()
        .copied()
        .chain(std::iter::repeat(last))
        .take(len.max(x0.len()))
}

/// Maps an orbit, one symbol at a time, to cell indices.
pub trait CellTracker: Sync {
    type State: Clone;

    fn cell_count(&self) -> usize;

    fn alphabet(&self) -> usize;

    /// Steps after which the current cell no longer depends on `x_0`.
    fn burn_in(&self) -> usize;

    fn start(&self, x0: &Word) -> Result<Self::State>;

    /// Prepend `symbol` and return the new cell, if it is one of the tracked
    /// cells.
    fn step(&self, state: &mut Self::State, symbol: usize) -> Option<usize>;
}

/// Level-`K` approximate squares, encoded mixed-radix as
/// `prefix · M^{K−L} + suffix` with the first symbol most significant.
#[derive(Clone, Debug)]
pub struct CarpetSquareTracker {
    column_of: Vec<usize>,
    level: usize,
    prefix_len: usize,
    maps: usize,
    columns: usize,
    prefix_top: usize,
    suffix_top: usize,
    suffix_size: usize,
    total: usize,
}

impl CarpetSquareTracker {
    pub fn new(rp: &ReducedParams, level: usize, conv: LevelConvention) -> Result<Self> {
        if level == 0 {
            return Err(invalid("level must be at least 1"));
        }
        let count = square_count(rp, level, conv);
        let budget = BigUint::from(CELL_BUDGET);
        if count > budget {
            return Err(Error::Budget {
                needed: count.to_u128().unwrap_or(u128::MAX),
                budget: CELL_BUDGET,
            });
        }
        let l = level_height(rp.m, rp.n, level, conv);
        let (n, m) = (rp.maps(), rp.columns());
        let suffix_len = level - l;
        Ok(CarpetSquareTracker {
            column_of: rp.column_of.clone(),
            level,
            prefix_len: l,
            maps: n,
            columns: m,
            prefix_top: if l == 0 { 0 } else { n.pow(l as u32 - 1) },
            suffix_top: if suffix_len == 0 {
                0
            } else {
                m.pow(suffix_len as u32 - 1)
            },
            suffix_size: m.pow(suffix_len as u32),
            total: count.to_usize().expect("within budget"),
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn encode(&self, s: &ApproxSquare) -> usize {
        let prefix = s.full_prefix.iter().fold(0, |acc, &i| acc * self.maps + i);
        let suffix = s.column_suffix.iter().fold(0, |acc, &j| acc * self.columns + j);
        prefix * self.suffix_size + suffix
    }

    pub fn decode(&self, code: usize) -> ApproxSquare {
        let (mut prefix, mut suffix) = (code / self.suffix_size, code % self.suffix_size);
        let mut full = vec![0; self.prefix_len];
        for slot in full.iter_mut().rev() {
            *slot = prefix % self.maps;
            prefix /= self.maps;
        }
        let mut cols = vec![0; self.level - self.prefix_len];
        for slot in cols.iter_mut().rev() {
            *slot = suffix % self.columns;
            suffix /= self.columns;
        }
        ApproxSquare::new(full, cols)
    }

    /// One chaos-game step on the code.
    #[inline]
    pub fn advance_code(&self, code: usize, j: usize) -> usize {
        let (prefix, suffix) = (code / self.suffix_size, code % self.suffix_size);
        let (new_prefix, dropped) = if self.prefix_len == 0 {
            (0, j)
        } else {
            (j * self.prefix_top + prefix / self.maps, prefix % self.maps)
        };
        let new_suffix = if self.suffix_size == 1 {
            0
        } else {
            self.column_of[dropped] * self.suffix_top + suffix / self.columns
        };
        new_prefix * self.suffix_size + new_suffix
    }

    /// One step of the two-dimensional game: map `k` enters the prefix and
    /// column `l` enters the suffix; the dropped prefix symbol is discarded.
    #[inline]
    pub fn advance_code_two_dim(&self, code: usize, k: usize, l: usize) -> usize {
        let (prefix, suffix) = (code / self.suffix_size, code % self.suffix_size);
        let new_prefix = if self.prefix_len == 0 {
            0
        } else {
            k * self.prefix_top + prefix / self.maps
        };
        let new_suffix = if self.suffix_size == 1 {
            0
        } else {
            l * self.suffix_top + suffix / self.columns
        };
        new_prefix * self.suffix_size + new_suffix
    }
}

impl CellTracker for CarpetSquareTracker {
    type State = usize;

    fn cell_count(&self) -> usize {
        self.total
    }

    fn alphabet(&self) -> usize {
        self.maps
    }

    fn burn_in(&self) -> usize {
        self.level
    }

    fn start(&self, x0: &Word) -> Result<usize> {
        x0.check_alphabet(self.maps)?;
        let w: Vec<usize> = padded_coding(x0, self.level).collect();
        let square = ApproxSquare::new(
            w[..self.prefix_len].to_vec(),
            w[self.prefix_len..self.level]
                .iter()
                .map(|&i| self.column_of[i])
                .collect(),
        );
        Ok(self.encode(&square))
    }

    #[inline]
    fn step(&self, state: &mut usize, symbol: usize) -> Option<usize> {
        *state = self.advance_code(*state, symbol);
        Some(*state)
    }
}

/// The square reached from `state` when map `j` is drawn.
pub fn carpet_square_transition(rp: &ReducedParams, state: &ApproxSquare, j: usize) -> Result<ApproxSquare> {
    state.check(rp)?;
    if j >= rp.maps() {
        return Err(invalid("map index out of range"));
    }
    let mut prefix = state.full_prefix.clone();
    let mut suffix = state.column_suffix.clone();
    let dropped = if prefix.is_empty() {
        j
    } else {
        prefix.insert(0, j);
        prefix.pop().expect("nonempty")
    };
    if !suffix.is_empty() {
        suffix.insert(0, rp.column_of[dropped]);
        suffix.pop();
    }
    Ok(ApproxSquare::new(prefix, suffix))
}

/// Cells of a symbolic packing, located from the reversed history.
#[derive(Clone, Debug)]
pub struct PackingTracker {
    packing: SymbolicPacking,
}

impl PackingTracker {
    pub fn new(packing: SymbolicPacking) -> Self {
        PackingTracker { packing }
    }

    pub fn packing(&self) -> &SymbolicPacking {
        &self.packing
    }
}

impl CellTracker for PackingTracker {
    type State = VecDeque<usize>;

    fn cell_count(&self) -> usize {
        self.packing.len()
    }

    fn alphabet(&self) -> usize {
        self.packing.alphabet()
    }

    fn burn_in(&self) -> usize {
        self.packing.max_word_len()
    }

    fn start(&self, x0: &Word) -> Result<VecDeque<usize>> {
        x0.check_alphabet(self.packing.alphabet())?;
        Ok(padded_coding(x0, self.packing.max_word_len())
            .take(self.packing.max_word_len())
            .collect())
    }

    fn step(&self, history: &mut VecDeque<usize>, symbol: usize) -> Option<usize> {
        history.push_front(symbol);
        history.truncate(self.packing.max_word_len());
        self.packing.locate(history.iter().copied())
    }
}

/// Grid cells of side `r` that a long pilot orbit visited.
#[derive(Clone, Debug)]
pub struct GridTracker {
    ifs: IfsModel,
    side: f64,
    origin: Vec<f64>,
    cells: HashMap<Vec<i64>, usize>,
    burn_in: usize,
}

impl GridTracker {
    pub fn from_pilot<R: Rng + ?Sized>(
        ifs: &IfsModel,
        drv: &Driver,
        side: f64,
        pilot_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if !(side > 0.0) {
            return Err(invalid("cell side must be positive"));
        }
        if drv.alphabet_size() != ifs.len() {
            return Err(invalid("driver alphabet does not match the IFS"));
        }
        let burn_in = word_length_bound(ifs, side)?.ceil().max(0.0) as usize;
        let points: Vec<Vec<f64>> = ChaosGame::new(ifs, drv, ifs.base_point(), rng)
            .skip(burn_in)
            .take(pilot_len)
            .collect();
        if points.is_empty() {
            return Err(invalid("pilot orbit is empty"));
        }
        let mut origin = points[0].clone();
        for p in &points {
            for (o, &x) in origin.iter_mut().zip(p) {
                *o = o.min(x);
            }
        }
        let mut cells = HashMap::new();
        let mut g = GridTracker {
            ifs: ifs.clone(),
            side,
            origin,
            cells: HashMap::new(),
            burn_in,
        };
        for p in &points {
            let key = g.key(p);
            let next = cells.len();
            cells.entry(key).or_insert(next);
        }
        g.cells = cells;
        Ok(g)
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.origin)
            .map(|(x, o)| ((x - o) / self.side).floor() as i64)
            .collect()
    }

    pub fn side(&self) -> f64 {
        self.side
    }
}

impl CellTracker for GridTracker {
    type State = Vec<f64>;

    fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn alphabet(&self) -> usize {
        self.ifs.len()
    }

    fn burn_in(&self) -> usize {
        self.burn_in
    }

    fn start(&self, x0: &Word) -> Result<Vec<f64>> {
        x0.check_alphabet(self.ifs.len())?;
        let len = x0.len().max(self.burn_in).max(1) + 32;
        let w = Word::new(padded_coding(x0, len).collect());
        Ok(natural_project(&self.ifs, &w, &self.ifs.base_point())?.0)
    }

    fn step(&self, x: &mut Vec<f64>, symbol: usize) -> Option<usize> {
        *x = self.ifs.maps()[symbol].apply(x);
        self.cells.get(&self.key(x)).copied()
    }
}

/// Any of the three trackers, for callers that pick one at run time.
#[derive(Clone, Debug)]
pub enum Tracker {
    CarpetSquares(CarpetSquareTracker),
    Packing(PackingTracker),
    Grid(GridTracker),
}

#[derive(Clone, Debug)]
pub enum TrackerState {
    CarpetSquares(usize),
    Packing(VecDeque<usize>),
    Grid(Vec<f64>),
}

impl CellTracker for Tracker {
    type State = TrackerState;

    fn cell_count(&self) -> usize {
        match self {
            Tracker::CarpetSquares(t) => t.cell_count(),
            Tracker::Packing(t) => t.cell_count(),
            Tracker::Grid(t) => t.cell_count(),
        }
    }

    fn alphabet(&self) -> usize {
        match self {
            Tracker::CarpetSquares(t) => t.alphabet(),
            Tracker::Packing(t) => t.alphabet(),
            Tracker::Grid(t) => t.alphabet(),
        }
    }

    fn burn_in(&self) -> usize {
        match self {
            Tracker::CarpetSquares(t) => t.burn_in(),
            Tracker::Packing(t) => t.burn_in(),
            Tracker::Grid(t) => t.burn_in(),
        }
    }

    fn start(&self, x0: &Word) -> Result<TrackerState> {
        Ok(match self {
            Tracker::CarpetSquares(t) => TrackerState::CarpetSquares(t.start(x0)?),
            Tracker::Packing(t) => TrackerState::Packing(t.start(x0)?),
            Tracker::Grid(t) => TrackerState::Grid(t.start(x0)?),
        })
    }

    fn step(&self, state: &mut TrackerState, symbol: usize) -> Option<usize> {
        match (self, state) {
            (Tracker::CarpetSquares(t), TrackerState::CarpetSquares(s)) => t.step(s, symbol),
            (Tracker::Packing(t), TrackerState::Packing(s)) => t.step(s, symbol),
            (Tracker::Grid(t), TrackerState::Grid(s)) => t.step(s, symbol),
            _ => panic!("tracker state does not belong to this tracker"),
        }
    }
}

/// Flat bit set over cell indices.
#[derive(Clone, Debug)]
pub struct VisitedSet {
    bits: Vec<u64>,
    remaining: usize,
}

impl VisitedSet {
    pub fn new(total: usize) -> Self {
        VisitedSet {
            bits: vec![0; total.div_ceil(64)],
            remaining: total,
        }
    }

    /// Mark `cell`; returns whether it was new.
    #[inline]
    pub fn mark(&mut self, cell: usize) -> bool {
        let (w, b) = (cell / 64, 1u64 << (cell % 64));
        let fresh = self.bits[w] & b == 0;
        if fresh {
            self.bits[w] |= b;
            self.remaining -= 1;
        }
        fresh
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell / 64] & (1 << (cell % 64)) != 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }
}

fn check_alphabet(drv: &Driver, alphabet: usize) -> Result<()> {
    if drv.alphabet_size() != alphabet {
        return Err(invalid(format!(
            "driver has {} symbols, tracker expects {alphabet}",
            drv.alphabet_size()
        )));
    }
    Ok(())
}

/// Steps until every cell has been marked.
pub fn cover_time_trial<T: CellTracker, R: Rng + ?Sized>(
    drv: &Driver,
    tracker: &T,
    x0: &Word,
    ceiling: u64,
    rng: &mut R,
) -> Result<u64> {
    check_alphabet(drv, tracker.alphabet())?;
    let mut state = tracker.start(x0)?;
    let mut visited = VisitedSet::new(tracker.cell_count());
    let mark_from = tracker.burn_in().max(1) as u64;
    let mut stream = drv.stream();
    for t in 1..=ceiling {
        let cell = tracker.step(&mut state, stream.next_symbol(rng));
        if t >= mark_from {
            if let Some(c) = cell {
                if visited.mark(c) && visited.remaining() == 0 {
                    return Ok(t);
                }
            }
        }
    }
    Err(Error::StepCeiling {
        ceiling,
        remaining: visited.remaining(),
    })
}

/// Cover time of the game that draws a map from `p` and a column from `qc`
/// independently at every step.
pub fn two_dim_cover_time_trial<R: Rng + ?Sized>(
    tracker: &CarpetSquareTracker,
    p: &Driver,
    qc: &Driver,
    x0: &Word,
    ceiling: u64,
    rng: &mut R,
) -> Result<u64> {
    check_alphabet(p, tracker.alphabet())?;
    check_alphabet(qc, tracker.columns())?;
    let mut code = tracker.start(x0)?;
    let mut visited = VisitedSet::new(tracker.cell_count());
    let mark_from = tracker.burn_in().max(1) as u64;
    let (mut maps, mut cols) = (p.stream(), qc.stream());
    for t in 1..=ceiling {
        let k = maps.next_symbol(rng);
        let l = cols.next_symbol(rng);
        code = tracker.advance_code_two_dim(code, k, l);
        if t >= mark_from && visited.mark(code) && visited.remaining() == 0 {
            return Ok(t);
        }
    }
    Err(Error::StepCeiling {
        ceiling,
        remaining: visited.remaining(),
    })
}

/// First step `t >= max(burn_in, 1)` at which the tracker is in `target`.
pub fn hitting_time_trial<T: CellTracker, R: Rng + ?Sized>(
    drv: &Driver,
    tracker: &T,
    target: usize,
    x0: &Word,
    ceiling: u64,
    rng: &mut R,
) -> Result<u64> {
    check_alphabet(drv, tracker.alphabet())?;
    if target >= tracker.cell_count() {
        return Err(Error::OutOfRange {
            index: target,
            max: tracker.cell_count(),
        });
    }
    let mut state = tracker.start(x0)?;
    let mark_from = tracker.burn_in().max(1) as u64;
    let mut stream = drv.stream();
    for t in 1..=ceiling {
        let cell = tracker.step(&mut state, stream.next_symbol(rng));
        if t >= mark_from && cell == Some(target) {
            return Ok(t);
        }
    }
    Err(Error::StepCeiling {
        ceiling,
        remaining: 1,
    })
}

/// First step `t >= 1` at which the orbit lies in the closed ball.
pub fn ball_hitting_time_trial<R: Rng + ?Sized>(
    ifs: &IfsModel,
    drv: &Driver,
    center: &[f64],
    radius: f64,
    x0: &[f64],
    ceiling: u64,
    rng: &mut R,
) -> Result<u64> {
    check_alphabet(drv, ifs.len())?;
    if center.len() != ifs.dim() || x0.len() != ifs.dim() {
        return Err(invalid("point dimension does not match the IFS"));
    }
    let game = ChaosGame::new(ifs, drv, x0.to_vec(), rng);
    for (t, x) in (1..=ceiling).zip(game) {
        if crate::symbolic::distance(&x, center) <= radius {
            return Ok(t);
        }
    }
    Err(Error::StepCeiling {
        ceiling,
        remaining: 1,
    })
}

/// Summary of a batch of trials, in trial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub min: u64,
    pub max: u64,
    pub seeds: Vec<u64>,
    pub steps: Vec<u64>,
}

impl TrialStats {
    pub fn from_steps(seeds: Vec<u64>, steps: Vec<u64>) -> Self {
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, &s) in steps.iter().enumerate() {
            let x = s as f64;
            let d = x - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (x - mean);
        }
        let n = steps.len();
        let stderr = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        TrialStats {
            trials: n,
            mean,
            stderr,
            min: steps.iter().copied().min().unwrap_or(0),
            max: steps.iter().copied().max().unwrap_or(0),
            seeds,
            steps,
        }
    }
}

/// Run `trials` independent trials in parallel, each with its own seeded RNG.
pub fn run_trials<F>(trials: usize, master_seed: u64, trial: F) -> Result<TrialStats>
where
    F: Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
{
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let outcomes: Vec<Result<u64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| trial(&mut trial_rng(master_seed, i)))
        .collect();
    let completed = outcomes.iter().filter(|o| o.is_ok()).count();
    let mut steps = Vec::with_capacity(trials);
    for o in outcomes {
        match o {
            Ok(s) => steps.push(s),
            Err(e) => {
                return Err(Error::TrialsAborted {
                    completed,
                    requested: trials,
                    source: Box::new(e),
                })
            }
        }
    }
    let seeds = (0..trials as u64).map(|i| trial_seed(master_seed, i)).collect();
    Ok(TrialStats::from_steps(seeds, steps))
}

pub fn cover_time_mc<T: CellTracker>(
    drv: &Driver,
    tracker: &T,
    x0: &Word,
    trials: usize,
    master_seed: u64,
    ceiling: u64,
) -> Result<TrialStats> {
    run_trials(trials, master_seed, |rng| {
        cover_time_trial(drv, tracker, x0, ceiling, rng)
    })
}

pub fn two_dim_cover_time_mc(
    tracker: &CarpetSquareTracker,
    p: &Driver,
    qc: &Driver,
    x0: &Word,
    trials: usize,
    master_seed: u64,
    ceiling: u64,
) -> Result<TrialStats> {
    run_trials(trials, master_seed, |rng| {
        two_dim_cover_time_trial(tracker, p, qc, x0, ceiling, rng)
    })
}

pub fn hitting_time_mc<T: CellTracker>(
    drv: &Driver,
    tracker: &T,
    target: usize,
    x0: &Word,
    trials: usize,
    master_seed: u64,
    ceiling: u64,
) -> Result<TrialStats> {
    run_trials(trials, master_seed, |rng| {
        hitting_time_trial(drv, tracker, target, x0, ceiling, rng)
    })
}

#[allow(clippy::too_many_arguments)]
pub fn ball_hitting_time_mc(
    ifs: &IfsModel,
    drv: &Driver,
    center: &[f64],
    radius: f64,
    x0: &[f64],
    trials: usize,
    master_seed: u64,
    ceiling: u64,
) -> Result<TrialStats> {
    run_trials(trials, master_seed, |rng| {
        ball_hitting_time_trial(ifs, drv, center, radius, x0, ceiling, rng)
    })
}

/// The orbit `x_1, x_2, …` of the chaos game started at `x_0`.
pub struct ChaosGame<'a, R: Rng + ?Sized> {
    ifs: &'a IfsModel,
    stream: crate::measures::SymbolStream<'a>,
    x: Vec<f64>,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> ChaosGame<'a, R> {
    pub fn new(ifs: &'a IfsModel, drv: &'a Driver, x0: Vec<f64>, rng: &'a mut R) -> Self {
        ChaosGame {
            ifs,
            stream: drv.stream(),
            x: x0,
            rng,
        }
    }
}

impl<R: Rng + ?Sized> Iterator for ChaosGame<'_, R> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let s = self.stream.next_symbol(self.rng);
        self.x = self.ifs.maps()[s].apply(&self.x);
        Some(self.x.clone())
    }
}

pub fn orbit_points<R: Rng + ?Sized>(
    ifs: &IfsModel,
    drv: &Driver,
    x0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check_alphabet(drv, ifs.len())?;
    if x0.len() != ifs.dim() {
        return Err(invalid("start point dimension does not match the IFS"));
    }
    Ok(ChaosGame::new(ifs, drv, x0.to_vec(), rng).take(steps).collect())
}

/// Uniform grid over a point set for near-neighbour queries.
#[derive(Clone, Debug)]
pub struct PointIndex {
    side: f64,
    dim: usize,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Vec<f64>>,
}

impl PointIndex {
    pub fn new(points: Vec<Vec<f64>>, side: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("point set is empty"));
        }
        if !(side > 0.0) {
            return Err(invalid("grid side must be positive"));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(invalid("points have mixed dimensions"));
        }
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key_of(p, side)).or_default().push(i);
        }
        Ok(PointIndex {
            side,
            dim,
            cells,
            points,
        })
    }

    fn key_of(x: &[f64], side: f64) -> Vec<i64> {
        x.iter().map(|v| (v / side).floor() as i64).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Visit all cells at Chebyshev ring distance exactly `ring` from `base`.
    fn for_ring(&self, base: &[i64], ring: i64, f: &mut impl FnMut(&[usize])) {
        let mut offset = vec![-ring; self.dim];
        let mut key = vec![0; self.dim];
        loop {
            if offset.iter().any(|o| o.abs() == ring) {
                for ((k, b), o) in key.iter_mut().zip(base).zip(&offset) {
                    *k = b + o;
                }
                if let Some(ids) = self.cells.get(&key) {
                    f(ids);
                }
            }
            let mut d = 0;
            loop {
                if d == self.dim {
                    return;
                }
                offset[d] += 1;
                if offset[d] <= ring {
                    break;
                }
                offset[d] = -ring;
                d += 1;
            }
        }
    }

    pub fn nearest_distance(&self, y: &[f64]) -> f64 {
        let base = Self::key_of(y, self.side);
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            self.for_ring(&base, ring, &mut |ids| {
                for &i in ids {
                    best = best.min(crate::symbolic::distance(&self.points[i], y));
                }
            });
            // points in later rings are at least `ring · side` away
            if best <= ring as f64 * self.side {
                return best;
            }
            ring += 1;
            if ring > 1 << 20 {
                return best;
            }
        }
    }

    /// Number of points within closed distance `r` of `y`.
    pub fn count_within(&self, y: &[f64], r: f64) -> usize {
        let base = Self::key_of(y, self.side);
        let reach = (r / self.side).ceil() as i64;
        let mut count = 0;
        for ring in 0..=reach {
            self.for_ring(&base, ring, &mut |ids| {
                count += ids
                    .iter()
                    .filter(|&&i| crate::symbolic::distance(&self.points[i], y) <= r)
                    .count();
            });
        }
        count
    }
}

/// `max_{y ∈ sample} min_{x ∈ orbit} |x − y|`.
pub fn hausdorff_distance_estimate(orbit: &[Vec<f64>], attractor_sample: &[Vec<f64>]) -> Result<f64> {
    if orbit.is_empty() || attractor_sample.is_empty() {
        return Err(invalid("point sets must be nonempty"));
    }
    let (lo, hi) = crate::symbolic::bounding_box(orbit);
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let side = if extent > 0.0 {
        extent / (orbit.len() as f64).powf(1.0 / lo.len() as f64).max(1.0)
    } else {
        1.0
    };
    let index = PointIndex::new(orbit.to_vec(), side)?;
    Ok(attractor_sample
        .iter()
        .map(|y| index.nearest_distance(y))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::{reduce_params, CarpetSpec};
    use crate::symbolic::build_packing;

    fn row2() -> ReducedParams {
        reduce_params(&CarpetSpec::from_column_heights(2, 3, &[1, 2]).unwrap()).unwrap()
    }

    #[test]
    fn displayed_transition() {
        let rp = row2();
        let s = ApproxSquare::new(vec![0, 1, 2], vec![1, 0, 1]);
        let t = carpet_square_transition(&rp, &s, 1).unwrap();
        assert_eq!(t, ApproxSquare::new(vec![1, 0, 1], vec![rp.column_of[2], 1, 0]));
        let tr = CarpetSquareTracker::new(&rp, 6, LevelConvention::Floor).unwrap();
        assert_eq!(tr.decode(tr.advance_code(tr.encode(&s), 1)), t);
    }

    #[test]
    fn encode_roundtrip() {
        let rp = row2();
        for k in 1..=7 {
            let tr = CarpetSquareTracker::new(&rp, k, LevelConvention::Floor).unwrap();
            for code in 0..tr.cell_count() {
                assert_eq!(tr.encode(&tr.decode(code)), code);
            }
        }
    }

    #[test]
    fn constant_symbol_is_absorbing() {
        let rp = row2();
        let tr = CarpetSquareTracker::new(&rp, 6, LevelConvention::Floor).unwrap();
        let target = tr.encode(&ApproxSquare::of_word(&rp, &[2; 6], 6, LevelConvention::Floor));
        for start in [0, 17, tr.cell_count() - 1] {
            let mut code = start;
            for _ in 0..rp.maps() * 6 {
                code = tr.advance_code(code, 2);
            }
            assert_eq!(code, target);
        }
    }

    #[test]
    fn transitions_forget_start_after_k_steps() {
        let rp = row2();
        let tr = CarpetSquareTracker::new(&rp, 5, LevelConvention::Floor).unwrap();
        let mut rng = trial_rng(3, 0);
        for _ in 0..50 {
            let symbols: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
            let ends: Vec<usize> = (0..tr.cell_count())
                .map(|c| symbols.iter().fold(c, |s, &j| tr.advance_code(s, j)))
                .collect();
            assert!(ends.iter().all(|&e| e == ends[0]));
        }
    }

    #[test]
    fn single_cell_packing() {
        let pk = SymbolicPacking::from_words(2, vec![Word::empty()]).unwrap();
        let tr = PackingTracker::new(pk);
        let drv = Driver::bernoulli(vec![0.5, 0.5]).unwrap();
        let mut rng = trial_rng(1, 0);
        let t = cover_time_trial(&drv, &tr, &Word::empty(), 10, &mut rng).unwrap();
        assert_eq!(t, 1);
        assert_eq!(
            hitting_time_trial(&drv, &tr, 0, &Word::empty(), 10, &mut rng).unwrap(),
            1
        );
    }

    #[test]
    fn step_ceiling_reports_remaining() {
        let ifs = IfsModel::middle_thirds_cantor();
        let tr = PackingTracker::new(build_packing(&ifs, 1.0 / 81.0).unwrap());
        let drv = Driver::bernoulli(vec![0.5, 0.5]).unwrap();
        let err = cover_time_trial(&drv, &tr, &Word::empty(), 5, &mut trial_rng(0, 0)).unwrap_err();
        // burn-in is 4, so at most two cells get marked
        assert!(matches!(
            err,
            Error::StepCeiling {
                ceiling: 5,
                remaining: 14..=15
            }
        ));
        let agg = cover_time_mc(&drv, &tr, &Word::empty(), 3, 0, 5).unwrap_err();
        assert!(matches!(
            agg,
            Error::TrialsAborted {
                completed: 0,
                requested: 3,
                ..
            }
        ));
    }

    #[test]
    fn single_trial_stats() {
        let s = TrialStats::from_steps(vec![9], vec![42]);
        assert_eq!((s.mean, s.stderr, s.min, s.max), (42.0, 0.0, 42, 42));
        let s = TrialStats::from_steps(vec![0; 4], vec![1, 2, 3, 4]);
        assert!((s.mean - 2.5).abs() < 1e-15);
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_column_driver_hits_ceiling() {
        let rp = row2();
        let tr = CarpetSquareTracker::new(&rp, 3, LevelConvention::Floor).unwrap();
        let p = Driver::bernoulli(vec![1.0 / 3.0; 3]).unwrap();
        let qc = Driver::bernoulli(vec![1.0 - 1e-300, 1e-300]).unwrap();
        let err = two_dim_cover_time_trial(&tr, &p, &qc, &Word::empty(), 10_000, &mut trial_rng(0, 0));
        assert!(matches!(err, Err(Error::StepCeiling { .. })));
    }

    #[test]
    fn hausdorff_small_cases() {
        let a = vec![vec![0.0], vec![1.0]];
        assert_eq!(hausdorff_distance_estimate(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance_estimate(&[vec![0.0]], &a).unwrap(), 1.0);
        assert!(hausdorff_distance_estimate(&[], &a).is_err());
    }

    #[test]
    fn point_index_counts() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 100.0, 0.0]).collect();
        let idx = PointIndex::new(pts.clone(), 0.03).unwrap();
        let brute = pts.iter().filter(|p| (p[0] - 0.5).abs() <= 0.1 + 1e-12).count();
        assert_eq!(idx.count_within(&[0.5, 0.0], 0.1 + 1e-12), brute);
        assert!((idx.nearest_distance(&[0.505, 0.3]) - (0.005f64.powi(2) + 0.09).sqrt()).abs() < 1e-12);
    }
}
