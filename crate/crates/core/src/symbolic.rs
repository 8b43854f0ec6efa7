//! Finite words over an IFS alphabet, affine maps, the natural projection and
//! symbolic r-packings.
//!
//! A chaos-game orbit point after `t` steps is `f_{i_t} ∘ … ∘ f_{i_1}(x0)`, so
//! it lies in the cylinder of the *reversed* word `i_t i_{t-1} … i_1`. Packings
//! here are sets of such reversed words, and a new draw is prepended.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative slack used when comparing cylinder diameters against a radius.
const RADIUS_REL_TOL: f64 = 1e-12;

/// A finite word over the alphabet `0..N`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(symbols: Vec<usize>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// The constant word `s s … s` of length `len`.
    pub fn constant(symbol: usize, len: usize) -> Self {
        Word(vec![symbol; len])
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// `symbol · self`.
    pub fn prepended(&self, symbol: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(symbol);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &[usize]) -> bool {
        other.len() >= self.0.len() && other[..self.0.len()] == self.0[..]
    }

    pub fn check_alphabet(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s >= alphabet) {
            Some(s) => Err(invalid(format!("symbol {s} outside alphabet of size {alphabet}"))),
            None => Ok(()),
        }
    }

    /// All words of length `len` over `0..alphabet`, lexicographically.
    pub fn all_of_length(alphabet: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| (0..alphabet).map(move |s| w.concat(&Word(vec![s]))))
                .collect();
        }
        out
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `x ↦ linear·x + translation` on R^d, with its operator-norm contraction.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    dim: usize,
    /// Row-major d×d.
    linear: Vec<f64>,
    translation: Vec<f64>,
    contraction: f64,
}

impl AffineMap {
    pub fn new(linear: Vec<Vec<f64>>, translation: Vec<f64>) -> Result<Self> {
        let dim = translation.len();
        if dim == 0 {
            return Err(invalid("affine map needs dimension >= 1"));
        }
        if linear.len() != dim || linear.iter().any(|row| row.len() != dim) {
            return Err(invalid(format!("linear part must be {dim}x{dim}")));
        }
        let flat: Vec<f64> = linear.into_iter().flatten().collect();
        if flat.iter().chain(&translation).any(|v| !v.is_finite()) {
            return Err(invalid("affine map entries must be finite"));
        }
        let contraction = DMatrix::from_row_slice(dim, dim, &flat).singular_values().max();
        if !(contraction < 1.0) {
            return Err(invalid(format!(
                "map is not a strict contraction (operator norm {contraction})"
            )));
        }
        Ok(AffineMap {
            dim,
            linear: flat,
            translation,
            contraction,
        })
    }

    /// Diagonal linear part.
    pub fn diagonal(diag: &[f64], translation: Vec<f64>) -> Result<Self> {
        let d = diag.len();
        let linear = (0..d)
            .map(|i| (0..d).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        AffineMap::new(linear, translation)
    }

    /// One-dimensional `x ↦ scale·x + shift`.
    pub fn scalar(scale: f64, shift: f64) -> Result<Self> {
        AffineMap::new(vec![vec![scale]], vec![shift])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn linear_entry(&self, row: usize, col: usize) -> f64 {
        self.linear[row * self.dim + col]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.linear[i * self.dim..(i + 1) * self.dim];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.translation[i];
        }
    }

    /// `Some(λ)` when the linear part is λ times an orthogonal matrix.
    pub fn similarity_ratio(&self) -> Option<f64> {
        let a = DMatrix::from_row_slice(self.dim, self.dim, &self.linear);
        let ata = a.transpose() * &a;
        let c2 = ata[(0, 0)];
        let tol = 1e-12 * c2.max(1e-300);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let want = if i == j { c2 } else { 0.0 };
                if (ata[(i, j)] - want).abs() > tol {
                    return None;
                }
            }
        }
        Some(c2.sqrt())
    }

    pub fn fixed_point(&self) -> Vec<f64> {
        let d = self.dim;
        let a = DMatrix::from_row_slice(d, d, &self.linear);
        let lhs = DMatrix::<f64>::identity(d, d) - a;
        let rhs = nalgebra::DVector::from_column_slice(&self.translation);
        // I - A is invertible because the operator norm of A is < 1.
        let x = lhs.lu().solve(&rhs).expect("I - A invertible for a contraction");
        x.iter().copied().collect()
    }
}

/// `linear·x + translation`.
pub fn apply_map(m: &AffineMap, x: &[f64]) -> Vec<f64> {
    m.apply(x)
}

/// How the attractor diameter bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterSource {
    /// `(1+a)/(1−a)` times the largest distance between map fixed points.
    FixedPointEstimate,
    UserSupplied,
}

/// A strictly contracting affine IFS.
#[derive(Clone, Debug)]
pub struct IfsModel {
    maps: Vec<AffineMap>,
    contraction: f64,
    diameter_bound: f64,
    diameter_source: DiameterSource,
    ratios: Option<Vec<f64>>,
}

impl IfsModel {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(invalid("IFS needs at least one map"));
        }
        let d = maps[0].dim();
        if maps.iter().any(|m| m.dim() != d) {
            return Err(invalid("all maps must act on the same dimension"));
        }
        let contraction = maps.iter().map(AffineMap::contraction).fold(0.0, f64::max);
        if !(contraction > 0.0) {
            return Err(invalid("global contraction must be positive"));
        }
        let fixed: Vec<Vec<f64>> = maps.iter().map(AffineMap::fixed_point).collect();
        let mut spread = 0.0f64;
        for (i, x) in fixed.iter().enumerate() {
            for y in &fixed[i + 1..] {
                spread = spread.max(distance(x, y));
            }
        }
        let mut diameter_bound = spread * (1.0 + contraction) / (1.0 - contraction);
        if diameter_bound == 0.0 {
            // every map shares one fixed point: the attractor is a point
            diameter_bound = f64::MIN_POSITIVE;
        }
        let ratios = maps
            .iter()
            .map(AffineMap::similarity_ratio)
            .collect::<Option<Vec<f64>>>();
        Ok(IfsModel {
            maps,
            contraction,
            diameter_bound,
            diameter_source: DiameterSource::FixedPointEstimate,
            ratios,
        })
    }

    /// Replace the computed diameter bound by a known one.
    pub fn with_diameter_bound(mut self, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(invalid("diameter bound must be positive and finite"));
        }
        self.diameter_bound = diameter;
        self.diameter_source = DiameterSource::UserSupplied;
        Ok(self)
    }

    /// Override the similarity ratios used for packings.
    pub fn with_ratios(mut self, ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() != self.maps.len() {
            return Err(invalid("one ratio per map required"));
        }
        if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(invalid("ratios must lie in (0,1)"));
        }
        self.ratios = Some(ratios);
        Ok(self)
    }

    /// Two 1-d maps `x/3` and `x/3 + 2/3` with diameter 1.
    pub fn middle_thirds_cantor() -> Self {
        let maps = vec![
            AffineMap::scalar(1.0 / 3.0, 0.0).unwrap(),
            AffineMap::scalar(1.0 / 3.0, 2.0 / 3.0).unwrap(),
        ];
        IfsModel::new(maps).unwrap().with_diameter_bound(1.0).unwrap()
    }

    /// `{λx − 1, λx + 1}` for λ in (1/2, 1); attractor `[−1/(1−λ), 1/(1−λ)]`.
    pub fn bernoulli_convolution(lambda: f64) -> Result<Self> {
        if !(lambda > 0.5 && lambda < 1.0) {
            return Err(invalid("Bernoulli convolution needs λ in (1/2, 1)"));
        }
        let maps = vec![AffineMap::scalar(lambda, -1.0)?, AffineMap::scalar(lambda, 1.0)?];
        IfsModel::new(maps)?.with_diameter_bound(2.0 / (1.0 - lambda))
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn diameter_source(&self) -> DiameterSource {
        self.diameter_source
    }

    pub fn ratios(&self) -> Option<&[f64]> {
        self.ratios.as_deref()
    }

    /// A point of the attractor: the fixed point of the first map.
    pub fn base_point(&self) -> Vec<f64> {
        self.maps[0].fixed_point()
    }

    /// True when no pair of sample points is further apart than the bound.
    pub fn diameter_bound_covers(&self, samples: &[Vec<f64>]) -> bool {
        let (lo, hi) = bounding_box(samples);
        let box_diag = distance(&lo, &hi);
        if box_diag <= self.diameter_bound {
            return true;
        }
        samples.iter().enumerate().all(|(i, x)| {
            samples[i + 1..]
                .iter()
                .all(|y| distance(x, y) <= self.diameter_bound * (1.0 + 1e-12))
        })
    }
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn bounding_box(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = points.first().map_or(0, Vec::len);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// `f_{w_1} ∘ … ∘ f_{w_k}(base)` together with `a^k · |Λ|`.
pub fn natural_project(ifs: &IfsModel, w: &Word, base: &[f64]) -> Result<(Vec<f64>, f64)> {
    if w.is_empty() {
        return Err(invalid("natural projection needs a nonempty word"));
    }
    w.check_alphabet(ifs.len())?;
    if base.len() != ifs.dim() {
        return Err(invalid("base point has wrong dimension"));
    }
    let mut x = base.to_vec();
    let mut buf = vec![0.0; x.len()];
    for &s in w.symbols().iter().rev() {
        ifs.maps[s].apply_into(&x, &mut buf);
        std::mem::swap(&mut x, &mut buf);
    }
    let err = ifs.contraction.powi(w.len() as i32) * ifs.diameter_bound;
    Ok((x, err))
}

/// Upper bound on the length of any packing word at radius `r`.
pub fn word_length_bound(ifs: &IfsModel, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let la = ifs.contraction.ln();
    Ok(r.ln() / la - (ifs.diameter_bound / ifs.contraction).ln() / la)
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Branch(Vec<u32>),
}

/// A complete prefix-free set of words, stored as a radix tree.
#[derive(Clone, Debug)]
pub struct SymbolicPacking {
    alphabet: usize,
    radius: Option<f64>,
    words: Vec<Word>,
    nodes: Vec<Node>,
    max_len: usize,
}

impl SymbolicPacking {
    /// Validate and index an explicit word set.
    pub fn from_words(alphabet: usize, words: Vec<Word>) -> Result<Self> {
        if alphabet == 0 {
            return Err(invalid("alphabet must be nonempty"));
        }
        if words.is_empty() {
            return Err(invalid("packing needs at least one word"));
        }
        for w in &words {
            w.check_alphabet(alphabet)?;
        }
        // Build with u32::MAX as the "missing child" sentinel.
        let mut nodes = vec![Node::Branch(vec![u32::MAX; alphabet])];
        for (id, w) in words.iter().enumerate() {
            let mut at = 0usize;
            for (depth, &s) in w.symbols().iter().enumerate() {
                let next = match &nodes[at] {
                    Node::Leaf(_) => return Err(invalid(format!("{} has a proper prefix in the set", w))),
                    Node::Branch(ch) => ch[s],
                };
                let next = if next == u32::MAX {
                    let fresh = nodes.len();
                    let node = if depth + 1 == w.len() {
                        Node::Leaf(id)
                    } else {
                        Node::Branch(vec![u32::MAX; alphabet])
                    };
                    nodes.push(node);
                    if let Node::Branch(ch) = &mut nodes[at] {
                        ch[s] = fresh as u32;
                    }
                    fresh
                } else {
                    if depth + 1 == w.len() {
                        return Err(invalid(format!("{} is a prefix of another word", w)));
                    }
                    next as usize
                };
                at = next;
            }
            if w.is_empty() {
                if words.len() > 1 {
                    return Err(invalid("empty word must be the only word"));
                }
                nodes[0] = Node::Leaf(id);
            }
        }
        let incomplete = nodes.iter().any(|n| match n {
            Node::Branch(ch) => ch.contains(&u32::MAX),
            Node::Leaf(_) => false,
        });
        if incomplete {
            return Err(invalid(
                "word set is not complete: some sequence has no prefix in it",
            ));
        }
        let max_len = words.iter().map(Word::len).max().unwrap_or(0);
        Ok(SymbolicPacking {
            alphabet,
            radius: None,
            words,
            nodes,
            max_len,
        })
    }

    /// All words of length `len`.
    pub fn uniform(alphabet: usize, len: usize) -> Result<Self> {
        SymbolicPacking::from_words(alphabet, Word::all_of_length(alphabet, len))
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, id: usize) -> &Word {
        &self.words[id]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.max_len
    }

    pub fn id_of(&self, w: &Word) -> Option<usize> {
        match self.locate(w.symbols().iter().copied()) {
            Some(id) if self.words[id] == *w => Some(id),
            _ => None,
        }
    }

    /// Id of the unique packing word that prefixes `symbols`, or `None` if the
    /// sequence ends first.
    pub fn locate(&self, symbols: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut at = 0usize;
        let mut it = symbols.into_iter();
        loop {
            match &self.nodes[at] {
                Node::Leaf(id) => return Some(*id),
                Node::Branch(ch) => {
                    let s = it.next()?;
                    at = *ch.get(s)? as usize;
                }
            }
        }
    }

    /// Id of the packing word prefixing `next · word(state)`.
    pub fn transition(&self, state: usize, next: usize) -> usize {
        let tail = self.words[state].symbols().iter().copied();
        self.locate(std::iter::once(next).chain(tail))
            .expect("prepending a symbol never shortens the packing prefix")
    }
}

/// The r-packing of a similarity IFS, built by depth-first extension.
pub fn build_packing(ifs: &IfsModel, r: f64) -> Result<SymbolicPacking> {
    let ratios = ifs
        .ratios()
        .ok_or_else(|| invalid("packing needs similarity ratios for every map"))?;
    let diam = ifs.diameter_bound();
    if !(r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    if r >= diam {
        return Err(invalid(format!(
            "radius {r} >= attractor diameter {diam}: packing would be the empty word"
        )));
    }
    let hit = |size: f64| size <= r * (1.0 + RADIUS_REL_TOL);
    let mut words = Vec::new();
    let mut stack: Vec<(Vec<usize>, f64)> = (0..ratios.len())
        .rev()
        .map(|s| (vec![s], ratios[s] * diam))
        .collect();
    while let Some((w, size)) = stack.pop() {
        if hit(size) {
            words.push(Word::new(w));
        } else {
            for s in (0..ratios.len()).rev() {
                let mut child = w.clone();
                child.push(s);
                stack.push((child, size * ratios[s]));
            }
        }
    }
    let mut pk = SymbolicPacking::from_words(ratios.len(), words)?;
    pk.radius = Some(r);
    Ok(pk)
}

/// The packing word that prefixes `next_symbol · state`.
pub fn packing_transition(pk: &SymbolicPacking, state: &Word, next_symbol: usize) -> Result<Word> {
    let id = pk
        .id_of(state)
        .ok_or_else(|| invalid(format!("{state} is not a packing word")))?;
    if next_symbol >= pk.alphabet() {
        return Err(invalid("symbol outside alphabet"));
    }
    Ok(pk.word(pk.transition(id, next_symbol)).clone())
}
