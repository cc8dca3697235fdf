//! The cutting procedure: short intervals are coloured and sent through `S`
//! directly; long ones are shifted to start at 1, cut by `R`, sorted into ten
//! classes by `k mod 10`, and the leftover top pieces are re-cut from the
//! right end with the mirrored family.
//!
//! Plans hold frequency metadata only. Execution evaluates each stage on a
//! grid twice as fine as the input so that no shift or dyadic padding can
//! leave the window.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{build_beta_family, build_phi_family, hats_at, passband, BetaFamily, PhiFamily, DEFAULT_XI};
use super::operators::{r_cut, s_term};
use crate::circle::{from_spectrum, to_spectrum, FreqInterval, Partition, SampledFunction, Spectrum};
use crate::error::{Error, Result};
use crate::multipliers::FunctionSequence;
use crate::weights::Weight;

/// Intervals up to this length skip the `R` cut.
pub const SHORT_MAX: u64 = 11;
/// Colour budget for the short pool.
pub const MAX_COLORS: usize = 100;
/// Number of residue classes for cut pieces.
pub const CLASSES: usize = 10;

/// `2^{1/10}`.
pub fn default_a() -> f64 {
    2f64.powf(0.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Reversed,
}

/// What a plan item carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    /// `M_{Δ_j}(u f_j)` in full.
    Whole { interval: usize },
    /// The `β_index` piece of interval `interval`.
    Piece {
        interval: usize,
        direction: Direction,
        index: usize,
    },
}

impl Source {
    pub fn interval(&self) -> usize {
        match *self {
            Source::Whole { interval } | Source::Piece { interval, .. } => interval,
        }
    }
}

/// One summand of an `S` group: the spectral hull it occupies and the
/// dyadic interval whose left end is the `S` shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub source: Source,
    pub hull: FreqInterval,
    pub padded: FreqInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupKind {
    Color { color: usize },
    Class { direction: Direction, residue: usize },
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Color { color } => write!(f, "color {color}"),
            GroupKind::Class { direction: Direction::Forward, residue } => write!(f, "forward class {residue}"),
            GroupKind::Class { direction: Direction::Reversed, residue } => write!(f, "reversed class {residue}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub kind: GroupKind,
    pub items: Vec<Item>,
}

/// Cut metadata for one long interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongCut {
    pub interval: usize,
    /// Largest forward index with a nonempty piece.
    pub top: usize,
    /// Forward pieces handed to the reversed pass.
    pub rerouted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPlan {
    pub partition: Partition,
    pub a: f64,
    pub xi: f64,
    pub branches: Vec<Branch>,
    pub cuts: Vec<LongCut>,
    pub groups: Vec<Group>,
    /// Pieces that met every class condition but collided inside their class.
    pub class_conflicts: usize,
}

fn check_params(a: f64, xi: f64) -> Result<()> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("A must exceed 1, got {a}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(format!("ξ must lie in (0, 1), got {xi}")));
    }
    Ok(())
}

/// Smallest `k` whose pass band holds `len` integers, and the dyadic
/// interval `[a', a' + 2^k − 1]` that puts `hull` in the middle of it.
pub(crate) fn placement(hull: FreqInterval, xi: f64) -> FreqInterval {
    let len = hull.len();
    let mut k = 0;
    let band = loop {
        if let Some(b) = passband(k, xi).filter(|b| b.len() >= len) {
            break b;
        }
        k += 1;
    };
    let slack = (band.len() - len) as i64;
    let shift = hull.lo() - (band.lo() + slack / 2);
    FreqInterval::new(shift, shift + (1i64 << k) - 1).expect("nonempty")
}

fn separated(x: &FreqInterval, y: &FreqInterval) -> bool {
    !x.dilate(3).intersects(&y.dilate(3))
}

fn color_conflict(x: &FreqInterval, y: &FreqInterval) -> bool {
    x.dilate(9).intersects(y) || y.dilate(9).intersects(x)
}

/// Hull of each index's support, from `(index, position)` observations.
fn hulls(points: impl Iterator<Item = (usize, i64)>) -> BTreeMap<usize, FreqInterval> {
    let mut out: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for (i, n) in points {
        let e = out.entry(i).or_insert((n, n));
        e.0 = e.0.min(n);
        e.1 = e.1.max(n);
    }
    out.into_iter()
        .map(|(i, (lo, hi))| (i, FreqInterval::new(lo, hi).expect("ordered")))
        .collect()
}

/// Forward hats alive at `n ∈ Δ` after moving the left end to 1.
fn forward_hats(iv: &FreqInterval, a: f64, n: i64) -> impl Iterator<Item = (usize, f64)> {
    hats_at(a, (n - iv.lo() + 1) as u64).into_iter().filter(|&(_, v)| v != 0.0)
}

/// Mirrored hats alive at `n ∈ Δ` after moving the right end to −1.
fn reversed_hats(iv: &FreqInterval, a: f64, n: i64) -> impl Iterator<Item = (usize, f64)> {
    hats_at(a, (iv.hi() + 1 - n) as u64).into_iter().filter(|&(_, v)| v != 0.0)
}

/// Total forward mass of the rerouted pieces at `n`.
fn rerouted_mass(iv: &FreqInterval, a: f64, rerouted: &[usize], n: i64) -> f64 {
    forward_hats(iv, a, n)
        .filter(|(i, _)| rerouted.contains(i))
        .map(|(_, v)| v)
        .sum()
}

pub fn regularize_partition(p: &Partition, a: f64) -> Result<DecompositionPlan> {
    regularize_partition_with(p, a, DEFAULT_XI)
}

pub fn regularize_partition_with(p: &Partition, a: f64, xi: f64) -> Result<DecompositionPlan> {
    check_params(a, xi)?;
    if let Some(iv) = p.intervals().iter().find(|iv| iv.lo() < 0) {
        return Err(Error::SignMixed { lo: iv.lo(), hi: iv.hi() });
    }
    let mut branches = Vec::with_capacity(p.len());
    let mut pool: Vec<(Source, FreqInterval)> = vec![];
    let mut classes: [Vec<Vec<(Source, FreqInterval)>>; 2] = [vec![vec![]; CLASSES], vec![vec![]; CLASSES]];
    let mut cuts = vec![];
    let mut class_conflicts = 0;

    let admit = |classes: &mut [Vec<Vec<(Source, FreqInterval)>>; 2], dir: usize, src: Source, hull: FreqInterval| {
        let class = &mut classes[dir][match src {
            Source::Piece { index, .. } => index % CLASSES,
            Source::Whole { .. } => unreachable!(),
        }];
        if class.iter().all(|(_, h)| separated(h, &hull)) {
            class.push((src, hull));
            true
        } else {
            false
        }
    };

    for (j, iv) in p.intervals().iter().enumerate() {
        if iv.len() <= SHORT_MAX {
            branches.push(Branch::Short);
            pool.push((Source::Whole { interval: j }, *iv));
            continue;
        }
        branches.push(Branch::Long);
        let forward = hulls((iv.lo()..=iv.hi()).flat_map(|n| forward_hats(iv, a, n).map(move |(i, _)| (i, n))));
        let top = *forward.keys().last().expect("long interval has pieces");
        let mut rerouted = vec![];
        for (&i, &hull) in &forward {
            let src = Source::Piece {
                interval: j,
                direction: Direction::Forward,
                index: i,
            };
            if hull.len() <= SHORT_MAX {
                pool.push((src, hull));
            } else if i + 1 >= top || !iv.contains_interval(&hull.dilate(3)) {
                rerouted.push(i);
            } else if !admit(&mut classes, 0, src, hull) {
                class_conflicts += 1;
                rerouted.push(i);
            }
        }
        if !rerouted.is_empty() {
            let reversed = hulls(
                (iv.lo()..=iv.hi())
                    .filter(|&n| rerouted_mass(iv, a, &rerouted, n) > 0.0)
                    .flat_map(|n| reversed_hats(iv, a, n).map(move |(i, _)| (i, n))),
            );
            for (&i, &hull) in &reversed {
                let src = Source::Piece {
                    interval: j,
                    direction: Direction::Reversed,
                    index: i,
                };
                if hull.len() <= SHORT_MAX || !iv.contains_interval(&hull.dilate(3)) {
                    pool.push((src, hull));
                } else if !admit(&mut classes, 1, src, hull) {
                    class_conflicts += 1;
                    pool.push((src, hull));
                }
            }
        }
        cuts.push(LongCut {
            interval: j,
            top,
            rerouted,
        });
    }

    // First-fit colouring, longest hulls first.
    pool.sort_by(|x, y| y.1.len().cmp(&x.1.len()).then(x.1.lo().cmp(&y.1.lo())).then(x.0.cmp(&y.0)));
    let mut colors: Vec<Vec<(Source, FreqInterval)>> = vec![];
    for (src, hull) in pool {
        match colors
            .iter_mut()
            .find(|c| c.iter().all(|(_, h)| !color_conflict(h, &hull)))
        {
            Some(c) => c.push((src, hull)),
            None => colors.push(vec![(src, hull)]),
        }
    }

    let item = |(source, hull): (Source, FreqInterval)| Item {
        source,
        hull,
        padded: placement(hull, xi),
    };
    let mut groups: Vec<Group> = colors
        .into_iter()
        .enumerate()
        .map(|(color, members)| Group {
            kind: GroupKind::Color { color },
            items: members.into_iter().map(item).collect(),
        })
        .collect();
    for (d, direction) in [Direction::Forward, Direction::Reversed].into_iter().enumerate() {
        for (residue, members) in std::mem::take(&mut classes[d]).into_iter().enumerate() {
            if !members.is_empty() {
                groups.push(Group {
                    kind: GroupKind::Class { direction, residue },
                    items: members.into_iter().map(item).collect(),
                });
            }
        }
    }

    Ok(DecompositionPlan {
        partition: p.clone(),
        a,
        xi,
        branches,
        cuts,
        groups,
        class_conflicts,
    })
}

/// Outcome of [`DecompositionPlan::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport {
    /// Item masks sum to one on every interval and vanish off their hulls.
    pub coverage: bool,
    /// Every hull lies inside its interval.
    pub pieces_inside: bool,
    /// `3H` pairwise disjoint inside every group.
    pub separation: bool,
    /// `9H` of a coloured item meets no other member of its colour.
    pub coloring: bool,
    pub colors: usize,
    pub colors_within_budget: bool,
    pub classes_within_budget: bool,
    /// Dyadic paddings hold their hulls in the pass band, are pairwise
    /// disjoint inside every group, and fit the execution grid.
    pub padding: bool,
    pub failures: Vec<String>,
}

impl PlanReport {
    pub fn pass(&self) -> bool {
        self.coverage
            && self.pieces_inside
            && self.separation
            && self.coloring
            && self.colors_within_budget
            && self.classes_within_budget
            && self.padding
    }
}

/// Counts for display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSummary {
    pub intervals: usize,
    pub short: usize,
    pub long: usize,
    pub colors: usize,
    pub forward_classes: usize,
    pub reversed_classes: usize,
    pub forward_pieces: usize,
    pub reversed_pieces: usize,
    pub pooled_pieces: usize,
    pub rerouted: usize,
    pub class_conflicts: usize,
    pub group_sizes: Vec<(String, usize)>,
}

impl fmt::Display for PlanSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "intervals        {}", self.intervals)?;
        writeln!(f, "  short          {}", self.short)?;
        writeln!(f, "  long           {}", self.long)?;
        writeln!(f, "colors used      {}", self.colors)?;
        writeln!(f, "forward classes  {}", self.forward_classes)?;
        writeln!(f, "reversed classes {}", self.reversed_classes)?;
        writeln!(f, "pieces           forward {} / reversed {} / pooled {}", self.forward_pieces, self.reversed_pieces, self.pooled_pieces)?;
        writeln!(f, "rerouted         {} (class conflicts {})", self.rerouted, self.class_conflicts)?;
        for (label, size) in &self.group_sizes {
            writeln!(f, "  {label:<18} {size}")?;
        }
        Ok(())
    }
}

impl DecompositionPlan {
    pub fn items(&self) -> impl Iterator<Item = (usize, &Item)> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, grp)| grp.items.iter().map(move |it| (g, it)))
    }

    fn cut_of(&self, interval: usize) -> Option<&LongCut> {
        self.cuts.iter().find(|c| c.interval == interval)
    }

    /// Largest dyadic exponent used by any item.
    pub fn max_scale(&self) -> u32 {
        self.items()
            .map(|(_, it)| it.padded.len().trailing_zeros())
            .max()
            .unwrap_or(0)
    }

    /// Multiplier that an item applies to frequency `n` of its interval's
    /// band-limited input.
    pub fn item_mask(&self, source: &Source, n: i64) -> f64 {
        let iv = self.partition.intervals()[source.interval()];
        if !iv.contains(n) {
            return 0.0;
        }
        match *source {
            Source::Whole { .. } => 1.0,
            Source::Piece {
                direction: Direction::Forward,
                index,
                ..
            } => forward_hats(&iv, self.a, n)
                .find(|(i, _)| *i == index)
                .map_or(0.0, |(_, v)| v),
            Source::Piece {
                direction: Direction::Reversed,
                index,
                interval,
            } => {
                let rerouted = self.cut_of(interval).map_or(&[][..], |c| &c.rerouted[..]);
                let mass = rerouted_mass(&iv, self.a, rerouted, n);
                if mass == 0.0 {
                    return 0.0;
                }
                reversed_hats(&iv, self.a, n)
                    .find(|(i, _)| *i == index)
                    .map_or(0.0, |(_, v)| mass * v)
            }
        }
    }

    /// Checks the structural invariants. `n` is the input grid size;
    /// execution runs on `2n`.
    pub fn validate(&self, n: usize) -> PlanReport {
        let mut failures = vec![];
        let intervals = self.partition.intervals();

        let mut by_interval: BTreeMap<usize, Vec<&Item>> = BTreeMap::new();
        for (_, it) in self.items() {
            by_interval.entry(it.source.interval()).or_default().push(it);
        }
        let mut coverage = true;
        let mut pieces_inside = true;
        for (j, iv) in intervals.iter().enumerate() {
            let items = by_interval.get(&j).map_or(&[][..], |v| &v[..]);
            for it in items {
                if !iv.contains_interval(&it.hull) {
                    pieces_inside = false;
                    failures.push(format!("item {:?} hull {} leaves {iv}", it.source, it.hull));
                }
            }
            for k in iv.lo()..=iv.hi() {
                let mut total = 0.0;
                for it in items {
                    let m = self.item_mask(&it.source, k);
                    if m != 0.0 && !it.hull.contains(k) {
                        coverage = false;
                        failures.push(format!("item {:?} is alive at {k} outside hull {}", it.source, it.hull));
                    }
                    total += m;
                }
                if (total - 1.0).abs() > 1e-12 {
                    coverage = false;
                    failures.push(format!("interval {iv}: masks sum to {total} at {k}"));
                    break;
                }
            }
        }

        let mut separation = true;
        let mut coloring = true;
        let mut padding = true;
        let fine_half = n as i64;
        for grp in &self.groups {
            for (x, it) in grp.items.iter().enumerate() {
                let band = passband(it.padded.len().trailing_zeros(), self.xi);
                let shifted = it.hull.shifted(-it.padded.lo());
                if !it.padded.len().is_power_of_two() || band.map_or(true, |b| !b.contains_interval(&shifted)) {
                    padding = false;
                    failures.push(format!("{}: hull {} not in the pass band of {}", grp.kind, it.hull, it.padded));
                }
                if it.padded.lo() < -fine_half || it.padded.hi() >= fine_half {
                    padding = false;
                    failures.push(format!("{}: padding {} exceeds the execution grid", grp.kind, it.padded));
                }
                for other in &grp.items[x + 1..] {
                    if !separated(&it.hull, &other.hull) {
                        separation = false;
                        failures.push(format!("{}: 3H overlap of {} and {}", grp.kind, it.hull, other.hull));
                    }
                    if matches!(grp.kind, GroupKind::Color { .. }) && color_conflict(&it.hull, &other.hull) {
                        coloring = false;
                        failures.push(format!("{}: 9H conflict of {} and {}", grp.kind, it.hull, other.hull));
                    }
                    if it.padded.intersects(&other.padded) {
                        padding = false;
                        failures.push(format!("{}: paddings {} and {} overlap", grp.kind, it.padded, other.padded));
                    }
                }
            }
        }

        let colors = self.groups.iter().filter(|g| matches!(g.kind, GroupKind::Color { .. })).count();
        let colors_within_budget = colors <= MAX_COLORS;
        if !colors_within_budget {
            failures.push(format!("{colors} colors exceed the budget of {MAX_COLORS}"));
        }
        let mut classes_within_budget = true;
        for grp in &self.groups {
            if let GroupKind::Class { residue, .. } = grp.kind {
                let ok = residue < CLASSES
                    && grp.items.iter().all(|it| {
                        matches!(it.source, Source::Piece { index, .. } if index % CLASSES == residue)
                    });
                if !ok {
                    classes_within_budget = false;
                    failures.push(format!("{} holds a piece of another residue", grp.kind));
                }
            }
        }
        failures.truncate(50);
        PlanReport {
            coverage,
            pieces_inside,
            separation,
            coloring,
            colors,
            colors_within_budget,
            classes_within_budget,
            padding,
            failures,
        }
    }

    pub fn summary(&self) -> PlanSummary {
        let count = |pred: &dyn Fn(&GroupKind) -> bool| self.groups.iter().filter(|g| pred(&g.kind)).count();
        let mut forward_pieces = 0;
        let mut reversed_pieces = 0;
        let mut pooled_pieces = 0;
        for grp in &self.groups {
            for it in &grp.items {
                if let Source::Piece { direction, .. } = it.source {
                    match grp.kind {
                        GroupKind::Color { .. } => pooled_pieces += 1,
                        _ if direction == Direction::Forward => forward_pieces += 1,
                        _ => reversed_pieces += 1,
                    }
                }
            }
        }
        PlanSummary {
            intervals: self.partition.len(),
            short: self.branches.iter().filter(|b| **b == Branch::Short).count(),
            long: self.branches.iter().filter(|b| **b == Branch::Long).count(),
            colors: count(&|k| matches!(k, GroupKind::Color { .. })),
            forward_classes: count(&|k| matches!(k, GroupKind::Class { direction: Direction::Forward, .. })),
            reversed_classes: count(&|k| matches!(k, GroupKind::Class { direction: Direction::Reversed, .. })),
            forward_pieces,
            reversed_pieces,
            pooled_pieces,
            rerouted: self.cuts.iter().map(|c| c.rerouted.len()).sum(),
            class_conflicts: self.class_conflicts,
            group_sizes: self.groups.iter().map(|g| (g.kind.to_string(), g.items.len())).collect(),
        }
    }
}

/// Zero-pads the spectrum of `f` onto a grid twice as fine.
fn pad(f: &SampledFunction) -> Result<Spectrum> {
    let mut fine = Spectrum::zeros(2 * f.len())?;
    for (k, c) in to_spectrum(f).iter() {
        fine.set(k, c);
    }
    Ok(fine)
}

fn unpad(s: &Spectrum) -> Result<SampledFunction> {
    let n = s.len() / 2;
    let mut coarse = Spectrum::zeros(n)?;
    for (k, c) in s.iter() {
        if crate::circle::in_window(n, k) {
            coarse.set(k, c);
        } else if c.norm() > 0.0 {
            return Err(Error::WindowOverflow { freq: k, n });
        }
    }
    Ok(from_spectrum(&coarse))
}

struct Families {
    forward: BetaFamily,
    reversed: BetaFamily,
    phi: PhiFamily,
}

impl DecompositionPlan {
    fn families(&self, fine: usize) -> Result<Families> {
        let forward = build_beta_family(self.a, FreqInterval::new(1, fine as i64 / 2)?)?;
        let reversed = forward.mirrored();
        let phi = build_phi_family(self.max_scale().max(1), self.xi, fine)?;
        Ok(Families { forward, reversed, phi })
    }

    /// Item contents for interval `j`, given the band-limited input on the
    /// fine grid.
    fn pieces(&self, j: usize, g: &Spectrum, fam: &Families) -> Result<Vec<(Source, Spectrum)>> {
        let iv = self.partition.intervals()[j];
        let cut = match self.cut_of(j) {
            None => return Ok(vec![(Source::Whole { interval: j }, g.clone())]),
            Some(c) => c,
        };
        let mut out = vec![];
        // Shift the left end to 1, cut, shift back.
        let forward = r_cut(&g.shifted(1 - iv.lo())?, &fam.forward)?;
        let mut leftover = Spectrum::zeros(g.len())?;
        for (slot, piece) in forward.into_iter().enumerate() {
            let index = slot + 1;
            let piece = piece.shifted(iv.lo() - 1)?;
            if cut.rerouted.contains(&index) {
                leftover.add_assign(&piece);
            } else if index <= cut.top {
                out.push((
                    Source::Piece {
                        interval: j,
                        direction: Direction::Forward,
                        index,
                    },
                    piece,
                ));
            }
        }
        if !cut.rerouted.is_empty() {
            // Shift the right end to −1, cut with the mirrored family, shift back.
            let reversed = r_cut(&leftover.shifted(-1 - iv.hi())?, &fam.reversed)?;
            for (slot, piece) in reversed.into_iter().enumerate() {
                out.push((
                    Source::Piece {
                        interval: j,
                        direction: Direction::Reversed,
                        index: slot + 1,
                    },
                    piece.shifted(iv.hi() + 1)?,
                ));
            }
        }
        Ok(out)
    }

    /// Runs the plan on `u`-intertwined inputs already band-limited and
    /// padded to the fine grid; returns the fine-grid spectrum of the sum.
    fn run_fine(&self, inputs: &[Spectrum], fam: &Families) -> Result<Spectrum> {
        let fine = inputs.first().map_or(0, Spectrum::len);
        let mut placed: BTreeMap<Source, (usize, &Item)> = BTreeMap::new();
        for (g, it) in self.items() {
            if placed.insert(it.source, (g, it)).is_some() {
                return Err(Error::PlanMismatch(format!("{:?} appears twice", it.source)));
            }
        }
        let contributions: Vec<Vec<(usize, Spectrum)>> = inputs
            .par_iter()
            .enumerate()
            .map(|(j, g)| {
                let mut out = vec![];
                for (source, content) in self.pieces(j, g, fam)? {
                    match placed.get(&source) {
                        Some(&(group, it)) => {
                            let h = content.shifted(-it.padded.lo())?;
                            out.push((group, s_term(&h, it.padded.lo(), it.padded.len(), &fam.phi)?));
                        }
                        None if content.max_abs() == 0.0 => {}
                        None => return Err(Error::PlanMismatch(format!("{source:?} carries mass but has no group"))),
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut groups = vec![Spectrum::zeros(fine)?; self.groups.len()];
        for per_interval in contributions {
            for (g, s) in per_interval {
                groups[g].add_assign(&s);
            }
        }
        let mut total = Spectrum::zeros(fine)?;
        for g in &groups {
            total.add_assign(g);
        }
        Ok(total)
    }
}

fn band_limited_inputs(p: &Partition, fs: &FunctionSequence, u: &Weight, conjugate: bool) -> Result<Vec<Spectrum>> {
    fs.entries()
        .iter()
        .zip(p.intervals())
        .map(|(f, iv)| {
            // Conjugate after padding: on the coarse grid the Nyquist
            // frequency is its own mirror image.
            let mut fine = pad(&f.scale_by(u.values()))?;
            if conjugate {
                fine = fine.reflected()?;
            }
            Ok(fine.masked(|k| if iv.contains(k) { 1.0 } else { 0.0 }))
        })
        .collect()
}

fn check_inputs(p: &Partition, fs: &FunctionSequence, u: &Weight) -> Result<usize> {
    if fs.len() != p.len() {
        return Err(Error::PlanMismatch(format!("{} functions for {} intervals", fs.len(), p.len())));
    }
    let n = fs.grid().unwrap_or(u.len());
    if n != u.len() {
        return Err(Error::PlanMismatch(format!("functions on {n} points, weight on {}", u.len())));
    }
    Ok(n)
}

/// Evaluates `u^{-1} Σ_groups S(…)` as prescribed by the plan.
pub fn execute_plan(plan: &DecompositionPlan, fs: &FunctionSequence, u: &Weight) -> Result<SampledFunction> {
    let n = check_inputs(&plan.partition, fs, u)?;
    plan.partition
        .check_window(n)
        .map_err(|e| Error::PlanMismatch(e.to_string()))?;
    let fam = plan.families(2 * n)?;
    let inputs = band_limited_inputs(&plan.partition, fs, u, false)?;
    if inputs.is_empty() {
        return SampledFunction::zeros(n);
    }
    Ok(unpad(&plan.run_fine(&inputs, &fam)?)?.divide_by(u.values()))
}

/// Plans for both halves of a partition that may have negative
/// frequencies. The negative half is planned in mirror image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedPlan {
    pub positive: DecompositionPlan,
    pub positive_source: Vec<usize>,
    pub negative_mirrored: DecompositionPlan,
    pub negative_source: Vec<usize>,
}

pub fn regularize_signed(p: &Partition, a: f64, xi: f64) -> Result<SignedPlan> {
    let (neg, neg_src, pos, pos_src) = p.split_by_sign();
    let mirrored = Partition::new(
        neg.intervals()
            .iter()
            .map(|iv| FreqInterval::new(-iv.hi(), -iv.lo()))
            .collect::<Result<_>>()?,
    )?;
    Ok(SignedPlan {
        positive: regularize_partition_with(&pos, a, xi)?,
        positive_source: pos_src,
        negative_mirrored: regularize_partition_with(&mirrored, a, xi)?,
        negative_source: neg_src,
    })
}

/// [`execute_plan`] for a [`SignedPlan`]. The negative half runs on
/// conjugated inputs: `M_Δ h = conj(M_{−Δ} conj h)` for real `u`.
pub fn execute_signed(plan: &SignedPlan, fs: &FunctionSequence, u: &Weight) -> Result<SampledFunction> {
    let n = fs.grid().unwrap_or(u.len());
    let pick = |src: &[usize]| -> Result<FunctionSequence> {
        FunctionSequence::new(
            src.iter()
                .map(|&j| {
                    fs.entries()
                        .get(j)
                        .cloned()
                        .ok_or_else(|| Error::PlanMismatch(format!("no function for interval {j}")))
                })
                .collect::<Result<_>>()?,
        )
    };
    let pos_fs = pick(&plan.positive_source)?;
    let neg_fs = pick(&plan.negative_source)?;
    let mut total = Spectrum::zeros(2 * n)?;
    if !pos_fs.is_empty() {
        check_inputs(&plan.positive.partition, &pos_fs, u)?;
        let fam = plan.positive.families(2 * n)?;
        let inputs = band_limited_inputs(&plan.positive.partition, &pos_fs, u, false)?;
        total.add_assign(&plan.positive.run_fine(&inputs, &fam)?);
    }
    if !neg_fs.is_empty() {
        check_inputs(&plan.negative_mirrored.partition, &neg_fs, u)?;
        let fam = plan.negative_mirrored.families(2 * n)?;
        let inputs = band_limited_inputs(&plan.negative_mirrored.partition, &neg_fs, u, true)?;
        total.add_assign(&plan.negative_mirrored.run_fine(&inputs, &fam)?.reflected()?);
    }
    Ok(unpad(&total)?.divide_by(u.values()))
}
