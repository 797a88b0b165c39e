//! Random choices: which rows, which blocks, and how they are scaled.
//!
//! Every randomized function takes a [`Generator`] explicitly. Plans record
//! the generator seed and stream position at the moment drawing began, so
//! any plan can be replayed from its JSON form.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::leverage::BlockPartition;
use crate::matcore::DenseMatrix;
use crate::{Error, Result, Scalar};

/// Seedable, splittable generator (ChaCha8).
#[derive(Debug, Clone)]
pub struct Generator {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Re-creates a generator at a recorded stream position.
    pub fn resume(seed: u64, position: u128) -> Self {
        let mut g = Self::from_seed(seed);
        g.rng.set_word_pos(position);
        g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Current stream position in 32-bit words.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Independent child generator, seeded from this generator's output.
    pub fn split(&mut self) -> Generator {
        Generator::from_seed(self.rng.next_u64())
    }

    fn origin(&self) -> StreamOrigin {
        StreamOrigin {
            seed: self.seed,
            position: self.position(),
        }
    }
}

impl RngCore for Generator {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Where in a generator's stream a plan began.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamOrigin {
    pub seed: u64,
    pub position: u128,
}

const DISTRIBUTION_TOL: f64 = 1e-10;

/// Probability distribution over blocks (non-negative, sums to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDistribution(Vec<f64>);

impl BlockDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::DistributionInvalid("no blocks".into()));
        }
        if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::DistributionInvalid(format!("entry {i} is {}", p[i])));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::DistributionInvalid(format!("sums to {total}")));
        }
        Ok(Self(p))
    }

    pub fn uniform(g: usize) -> Result<Self> {
        Self::new(vec![1.0 / g as f64; g])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|&&p| p > 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    WithReplacement,
    WithoutReplacement,
    /// Every block once with unit scale; not a random plan.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDraw {
    pub block: usize,
    pub probability: f64,
    pub scale: f64,
}

/// Ordered block draws with their `1/√(g·p)` scales; the sparse form of `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub draws: Vec<BlockDraw>,
    pub mode: SamplingMode,
    pub origin: Option<StreamOrigin>,
}

impl SamplingPlan {
    pub fn g(&self) -> usize {
        self.draws.len()
    }

    pub fn blocks(&self) -> Vec<usize> {
        self.draws.iter().map(|d| d.block).collect()
    }

    /// Number of sampled columns `c = Σ width(j_t)`.
    pub fn column_count(&self, part: &BlockPartition) -> usize {
        self.draws.iter().map(|d| part.width(d.block)).sum()
    }

    /// Source column and scale for every column of `A·S`, in order.
    pub fn column_map(&self, part: &BlockPartition) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(self.column_count_checked(part)?);
        for d in &self.draws {
            out.extend(part.block(d.block).map(|j| (j, d.scale)));
        }
        Ok(out)
    }

    fn column_count_checked(&self, part: &BlockPartition) -> Result<usize> {
        if let Some(d) = self.draws.iter().find(|d| d.block >= part.len()) {
            return Err(Error::UnknownIndex {
                kind: "block",
                index: d.block,
                limit: part.len(),
            });
        }
        Ok(self.column_count(part))
    }
}

/// Deterministic plan taking every block once at unit scale.
pub fn identity_plan(part: &BlockPartition) -> SamplingPlan {
    let g = part.len() as f64;
    SamplingPlan {
        draws: (0..part.len())
            .map(|block| BlockDraw {
                block,
                probability: 1.0 / g,
                scale: 1.0,
            })
            .collect(),
        mode: SamplingMode::Identity,
        origin: None,
    }
}

fn pick(weights: &[f64], total: f64, rng: &mut Generator) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draws `g` blocks from `probs`.
///
/// With replacement the draws are i.i.d.; without replacement each draw
/// renormalizes over the blocks not yet taken. Scales always use the
/// original probabilities.
pub fn draw_blocks(probs: &BlockDistribution, g: usize, mode: SamplingMode, rng: &mut Generator) -> Result<SamplingPlan> {
    if g == 0 {
        return Err(Error::invalid("g must be at least 1"));
    }
    let p = probs.probabilities();
    let origin = Some(rng.origin());
    let blocks: Vec<usize> = match mode {
        SamplingMode::WithReplacement => (0..g).map(|_| pick(p, 1.0, rng)).collect(),
        SamplingMode::WithoutReplacement => {
            let available = probs.positive_count();
            if g > available {
                return Err(Error::NotEnoughBlocks { requested: g, available });
            }
            let mut weights = p.to_vec();
            let mut out = Vec::with_capacity(g);
            for _ in 0..g {
                let total: f64 = weights.iter().sum();
                let b = pick(&weights, total, rng);
                weights[b] = 0.0;
                out.push(b);
            }
            out
        }
        SamplingMode::Identity => {
            return Err(Error::invalid("identity plans are built with identity_plan"));
        }
    };
    let gf = g as f64;
    Ok(SamplingPlan {
        draws: blocks
            .into_iter()
            .map(|block| BlockDraw {
                block,
                probability: p[block],
                scale: 1.0 / (gf * p[block]).sqrt(),
            })
            .collect(),
        mode,
        origin,
    })
}

/// How a row sample was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowScheme {
    /// i.i.d. uniform, `p = 1/m`.
    Uniform,
    /// Uniform without repeats.
    UniformDistinct,
    /// i.i.d. from caller-supplied probabilities (row leverage).
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowDraw {
    pub row: usize,
    pub probability: f64,
    pub scale: f64,
}

/// Ordered row draws with `1/√(r·p)` scales; the sparse form of `S_R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPlan {
    pub m: usize,
    pub draws: Vec<RowDraw>,
    pub scheme: RowScheme,
    pub origin: Option<StreamOrigin>,
}

impl RowPlan {
    pub fn rows(&self) -> Vec<usize> {
        self.draws.iter().map(|d| d.row).collect()
    }

    pub fn r(&self) -> usize {
        self.draws.len()
    }

    fn uniform(m: usize, rows: Vec<usize>, scheme: RowScheme, origin: StreamOrigin) -> Self {
        let r = rows.len() as f64;
        let p = 1.0 / m as f64;
        let scale = (m as f64 / r).sqrt();
        Self {
            m,
            draws: rows
                .into_iter()
                .map(|row| RowDraw {
                    row,
                    probability: p,
                    scale,
                })
                .collect(),
            scheme,
            origin: Some(origin),
        }
    }
}

fn check_rows(m: usize, r: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    Ok(())
}

/// `r` rows drawn i.i.d. uniformly from `[0, m)`.
pub fn draw_rows(m: usize, r: usize, rng: &mut Generator) -> Result<RowPlan> {
    check_rows(m, r)?;
    let origin = rng.origin();
    let rows = (0..r).map(|_| rng.random_range(0..m)).collect();
    Ok(RowPlan::uniform(m, rows, RowScheme::Uniform, origin))
}

/// `r` distinct rows drawn uniformly from `[0, m)`, in draw order.
pub fn draw_rows_distinct(m: usize, r: usize, rng: &mut Generator) -> Result<RowPlan> {
    check_rows(m, r)?;
    if r > m {
        return Err(Error::invalid(format!("cannot draw {r} distinct rows from {m}")));
    }
    let origin = rng.origin();
    let rows = index::sample(rng, m, r).into_vec();
    Ok(RowPlan::uniform(m, rows, RowScheme::UniformDistinct, origin))
}

/// `r` rows drawn i.i.d. from `probs` (e.g. row leverage scores).
pub fn draw_rows_weighted(probs: &BlockDistribution, r: usize, rng: &mut Generator) -> Result<RowPlan> {
    let m = probs.len();
    check_rows(m, r)?;
    let origin = rng.origin();
    let p = probs.probabilities();
    let rf = r as f64;
    let draws = (0..r)
        .map(|_| {
            let row = pick(p, 1.0, rng);
            RowDraw {
                row,
                probability: p[row],
                scale: 1.0 / (rf * p[row]).sqrt(),
            }
        })
        .collect();
    Ok(RowPlan {
        m,
        draws,
        scheme: RowScheme::Weighted,
        origin: Some(origin),
    })
}

/// `C = A·S`: the planned column blocks of `A`, each scaled, in draw order.
pub fn materialize_columns<T: Scalar>(a: &DenseMatrix<T>, part: &BlockPartition, plan: &SamplingPlan) -> Result<DenseMatrix<T>> {
    part.check_columns(a.cols(), "materialize_columns")?;
    let map = plan.column_map(part)?;
    let scales: Vec<T> = map.iter().map(|&(_, s)| T::of(s)).collect();
    Ok(DenseMatrix::from_fn(a.rows(), map.len(), |i, c| a.get(i, map[c].0) * scales[c]))
}

/// `Sᵀ·B`: the planned row blocks of `B` (rows partitioned by `part`).
pub fn materialize_row_blocks<T: Scalar>(b: &DenseMatrix<T>, part: &BlockPartition, plan: &SamplingPlan) -> Result<DenseMatrix<T>> {
    part.check_columns(b.rows(), "materialize_row_blocks")?;
    let map = plan.column_map(part)?;
    let scales: Vec<T> = map.iter().map(|&(_, s)| T::of(s)).collect();
    Ok(DenseMatrix::from_fn(map.len(), b.cols(), |c, j| b.get(map[c].0, j) * scales[c]))
}

/// `R = S_Rᵀ·A`. Scaled mode multiplies each row by its plan scale; raw mode
/// copies the rows unchanged.
pub fn materialize_rows<T: Scalar>(a: &DenseMatrix<T>, plan: &RowPlan, scaled: bool) -> Result<DenseMatrix<T>> {
    if plan.m != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "materialize_rows",
            left: a.shape(),
            right: (plan.m, plan.r()),
        });
    }
    if let Some(d) = plan.draws.iter().find(|d| d.row >= a.rows()) {
        return Err(Error::UnknownIndex {
            kind: "row",
            index: d.row,
            limit: a.rows(),
        });
    }
    let n = a.cols();
    Ok(DenseMatrix::from_fn(plan.r(), n, |t, j| {
        let d = plan.draws[t];
        let x = a.get(d.row, j);
        if scaled {
            x * T::of(d.scale)
        } else {
            x
        }
    }))
}
