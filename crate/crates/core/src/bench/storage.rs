//! Partitioned-storage access simulator.
//!
//! Every column block lives on exactly one executor. Fetching a set of
//! items costs one round trip ("contact") per distinct executor involved
//! plus a per-element transfer charge:
//! `cost = contacts·per_contact_latency + elements·per_element_cost`.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::write_table;
use crate::leverage::BlockPartition;
use crate::sampler::{Generator, SamplingPlan};
use crate::sketch::check_unit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    RoundRobin,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageLayout {
    executors: usize,
    /// `placement[b]` is the executor holding block `b`.
    placement: Vec<usize>,
    pub per_contact_latency: f64,
    pub per_element_cost: f64,
}

impl StorageLayout {
    pub fn new(executors: usize, placement: Vec<usize>, per_contact_latency: f64, per_element_cost: f64) -> Result<Self> {
        if executors == 0 {
            return Err(Error::invalid("layout needs at least one executor"));
        }
        if let Some(&e) = placement.iter().find(|&&e| e >= executors) {
            return Err(Error::UnknownIndex {
                kind: "executor",
                index: e,
                limit: executors,
            });
        }
        for c in [per_contact_latency, per_element_cost] {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid("costs must be finite and non-negative"));
            }
        }
        Ok(Self {
            executors,
            placement,
            per_contact_latency,
            per_element_cost,
        })
    }

    /// Block `b` on executor `b mod E`.
    pub fn round_robin(blocks: usize, executors: usize, per_contact_latency: f64, per_element_cost: f64) -> Result<Self> {
        Self::new(executors, (0..blocks).map(|b| b % executors.max(1)).collect(), per_contact_latency, per_element_cost)
    }

    /// Round-robin assignment shuffled across blocks, so loads stay balanced.
    pub fn random(blocks: usize, executors: usize, per_contact_latency: f64, per_element_cost: f64, rng: &mut Generator) -> Result<Self> {
        let mut layout = Self::round_robin(blocks, executors, per_contact_latency, per_element_cost)?;
        layout.placement.shuffle(rng);
        Ok(layout)
    }

    pub fn build(
        placement: Placement,
        blocks: usize,
        executors: usize,
        per_contact_latency: f64,
        per_element_cost: f64,
        rng: &mut Generator,
    ) -> Result<Self> {
        match placement {
            Placement::RoundRobin => Self::round_robin(blocks, executors, per_contact_latency, per_element_cost),
            Placement::Random => Self::random(blocks, executors, per_contact_latency, per_element_cost, rng),
        }
    }

    pub fn executors(&self) -> usize {
        self.executors
    }

    pub fn blocks(&self) -> usize {
        self.placement.len()
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }

    pub fn executor_of(&self, block: usize) -> Result<usize> {
        self.placement.get(block).copied().ok_or(Error::UnknownIndex {
            kind: "block",
            index: block,
            limit: self.placement.len(),
        })
    }

    fn check_partition(&self, part: &BlockPartition) -> Result<()> {
        if part.len() != self.placement.len() {
            return Err(Error::InvalidPartition(format!(
                "layout places {} blocks but the partition has {}",
                self.placement.len(),
                part.len()
            )));
        }
        Ok(())
    }

    fn cost(&self, contacts: usize, elements: usize) -> f64 {
        contacts as f64 * self.per_contact_latency + elements as f64 * self.per_element_cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    Block,
    Column,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessReport {
    pub mode: AccessMode,
    /// Blocks drawn (block mode) or columns requested (column mode).
    pub items_fetched: usize,
    /// Columns transferred.
    pub columns: usize,
    /// Matrix entries transferred, `columns · rows`.
    pub elements: usize,
    pub executors_contacted: usize,
    pub synthetic_cost: f64,
}

/// Fetches the drawn blocks whole. Repeated draws of a block are counted as
/// items but transfer nothing new.
pub fn simulate_block_access(layout: &StorageLayout, part: &BlockPartition, plan: &SamplingPlan, rows: usize) -> Result<AccessReport> {
    layout.check_partition(part)?;
    let mut executors = BTreeSet::new();
    let mut distinct = BTreeSet::new();
    for b in plan.blocks() {
        executors.insert(layout.executor_of(b)?);
        distinct.insert(b);
    }
    let columns: usize = distinct.iter().map(|&b| part.width(b)).sum();
    let elements = columns * rows;
    Ok(AccessReport {
        mode: AccessMode::Block,
        items_fetched: plan.g(),
        columns,
        elements,
        executors_contacted: executors.len(),
        synthetic_cost: layout.cost(executors.len(), elements),
    })
}

/// Fetches individual columns, contacting the owner of each column's block.
pub fn simulate_column_access(layout: &StorageLayout, part: &BlockPartition, columns: &[usize], rows: usize) -> Result<AccessReport> {
    layout.check_partition(part)?;
    let mut executors = BTreeSet::new();
    let mut distinct = BTreeSet::new();
    for &j in columns {
        let b = part.block_of(j)?;
        executors.insert(layout.executor_of(b)?);
        distinct.insert(j);
    }
    let elements = distinct.len() * rows;
    Ok(AccessReport {
        mode: AccessMode::Column,
        items_fetched: columns.len(),
        columns: distinct.len(),
        elements,
        executors_contacted: executors.len(),
        synthetic_cost: layout.cost(executors.len(), elements),
    })
}

/// Block access against column access for the same fetched columns, plus
/// a traditional draw of as many uniformly random columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheck {
    pub block: AccessReport,
    /// Column requests for exactly the columns the blocks cover.
    pub same_columns: AccessReport,
    /// Column requests for the same number of columns drawn uniformly.
    pub random_columns: AccessReport,
    /// `block.executors_contacted ≤ same_columns.executors_contacted`
    pub dominates: bool,
    /// Each drawn block is on its own executor and the random column draw
    /// hit pairwise distinct executors.
    pub distinct_placement: bool,
}

pub fn compare_access(
    layout: &StorageLayout,
    part: &BlockPartition,
    plan: &SamplingPlan,
    rows: usize,
    rng: &mut Generator,
) -> Result<DominanceCheck> {
    let block = simulate_block_access(layout, part, plan, rows)?;
    let mut fetched: BTreeSet<usize> = BTreeSet::new();
    for b in plan.blocks() {
        fetched.extend(part.block(b));
    }
    let fetched: Vec<usize> = fetched.into_iter().collect();
    let same_columns = simulate_column_access(layout, part, &fetched, rows)?;
    let random: Vec<usize> = rand::seq::index::sample(rng, part.n(), fetched.len()).into_vec();
    let random_columns = simulate_column_access(layout, part, &random, rows)?;
    let distinct_blocks: BTreeSet<usize> = plan.blocks().into_iter().collect();
    let block_executors: BTreeSet<usize> = distinct_blocks.iter().map(|&b| layout.placement[b]).collect();
    let distinct_placement = block_executors.len() == distinct_blocks.len() && random_columns.executors_contacted == random.len();
    Ok(DominanceCheck {
        dominates: block.executors_contacted <= same_columns.executors_contacted,
        block,
        same_columns,
        random_columns,
        distinct_placement,
    })
}

/// Sample-complexity formulas with unit constants (natural logarithm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpsCount {
    /// `k²/ε²·ln(1/δ) + k⁴/ε⁶·ln³(1/δ)`
    pub traditional: f64,
    /// `k²/ε²·ln(1/δ) + k⁴/(α ε⁶)·ln³(1/δ)`
    pub block: f64,
}

impl OpsCount {
    pub fn ratio(&self) -> f64 {
        self.block / self.traditional
    }
}

pub fn ops_count_formulas(k: usize, eps: f64, delta: f64, alpha: f64) -> Result<OpsCount> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::invalid(format!("alpha must be >= 1, got {alpha}")));
    }
    let k = k as f64;
    let l = (1.0 / delta).ln();
    let rows = k * k / (eps * eps) * l;
    let cols = k.powi(4) / eps.powi(6) * l.powi(3);
    Ok(OpsCount {
        traditional: rows + cols,
        block: rows + cols / alpha,
    })
}

/// CSV with header `mode,items_fetched,columns,elements,executors_contacted,synthetic_cost`.
pub fn write_access_csv<W: Write>(reports: &[AccessReport], w: W) -> Result<()> {
    write_table(
        w,
        &["mode", "items_fetched", "columns", "elements", "executors_contacted", "synthetic_cost"],
        reports.iter().map(|r| {
            vec![
                match r.mode {
                    AccessMode::Block => "block".into(),
                    AccessMode::Column => "column".into(),
                },
                r.items_fetched.to_string(),
                r.columns.to_string(),
                r.elements.to_string(),
                r.executors_contacted.to_string(),
                r.synthetic_cost.to_string(),
            ]
        }),
    )
}

/// Uniform column draw without replacement, for the traditional baseline.
pub fn random_columns(n: usize, c: usize, rng: &mut Generator) -> Result<Vec<usize>> {
    if c > n {
        return Err(Error::invalid(format!("cannot draw {c} distinct columns out of {n}")));
    }
    let mut cols = rand::seq::index::sample(rng, n, c).into_vec();
    cols.sort_unstable();
    Ok(cols)
}

/// Random execution plan for simulator sweeps: `g` blocks drawn uniformly
/// with replacement.
pub fn random_block_plan(part: &BlockPartition, g: usize, rng: &mut Generator) -> Result<SamplingPlan> {
    let uniform = crate::sampler::BlockDistribution::uniform(part.len())?;
    crate::sampler::draw_blocks(&uniform, g, crate::sampler::SamplingMode::WithReplacement, rng)
}
