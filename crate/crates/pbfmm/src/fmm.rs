//! Adaptive octrees, upward/downward passes, and orchestration of the
//! free-space FMM plus the per-component reaction FMMs.
//!
//! The free-space part is a classic scaled Yukawa FMM. Each reaction
//! component gets its own tree whose root is bisected exactly by the
//! governing interface, so every box from level 1 down lies entirely on one
//! side: polarized sources below (or above) the interface, targets on the
//! other side. Upward passes are plain free-space P2M/M2M in the source
//! layer's screening; the crossing happens in a single reaction M2L (or a
//! direct near-field kernel), after which the downward pass is free-space
//! L2L in the target layer's screening.

use crate::expansion::{
    eval_local, l2l_matrix, m2l_matrix, m2m_matrix, p2m, physical_prefactor, Expansion,
    ExpansionKind, TranslationMatrix,
};
use crate::medium::LayeredMedium;
use crate::oracle::admissible_components;
use crate::polarization::{polarize, reaction_direct, reaction_m2l_with_table, PolarizationSource};
use crate::sommerfeld::{ProductCoeffTable, SommerfeldTable, SpectralKernel};
use crate::special_fn::{mod_bessel_k, GauntTable};
use crate::{PbfmmError, Result};
use std::collections::HashMap;

/// Runtime knobs for a single solve.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Truncation order of all expansions.
    pub p: usize,
    /// Maximum number of points (sources + targets) in an undivided box.
    pub leaf_capacity: usize,
    /// Absolute tolerance for the adaptive Sommerfeld quadratures.
    pub tol: f64,
    /// Well-separation multiplier of the dual-tree acceptance criterion:
    /// a box pair is translated through expansions once the center distance
    /// reaches `mac_sep · max(size_src, size_tgt)`. `2.0` reproduces the
    /// classic one-box-gap interaction list.
    pub mac_sep: f64,
    /// Worker threads for the component-level parallel loop (`0` or `1`
    /// runs serially).
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { p: 8, leaf_capacity: 60, tol: 1e-12, mac_sep: 3.0, workers: 0 }
    }
}

/// Operation counters for one run (or one component).
#[derive(Debug, Clone, Copy, Default)]
pub struct OpCounters {
    pub p2m: usize,
    pub m2m: usize,
    pub m2l: usize,
    pub l2l: usize,
    pub p2p_pairs: usize,
    pub table_builds: usize,
    pub matrix_builds: usize,
}

impl OpCounters {
    pub fn merge(&mut self, o: &OpCounters) {
        self.p2m += o.p2m;
        self.m2m += o.m2m;
        self.m2l += o.m2l;
        self.l2l += o.l2l;
        self.p2p_pairs += o.p2p_pairs;
        self.table_builds += o.table_builds;
        self.matrix_builds += o.matrix_builds;
    }
}

/// One octree box.
#[derive(Debug, Clone)]
pub struct BoxNode {
    pub level: usize,
    pub center: [f64; 3],
    pub size: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Range into `Tree::src_order`.
    pub src_range: (usize, usize),
    /// Range into `Tree::tgt_order`.
    pub tgt_range: (usize, usize),
}

impl BoxNode {
    pub fn n_src(&self) -> usize {
        self.src_range.1 - self.src_range.0
    }
    pub fn n_tgt(&self) -> usize {
        self.tgt_range.1 - self.tgt_range.0
    }
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Adaptive octree over a source point set and a target point set (which may
/// be the same set).
#[derive(Debug, Clone)]
pub struct Tree {
    pub nodes: Vec<BoxNode>,
    pub src_order: Vec<usize>,
    pub tgt_order: Vec<usize>,
}

const MAX_DEPTH: usize = 48;

/// Build an adaptive octree. With `interface = Some(z*)` (reaction trees)
/// the root cube's horizontal mid-plane is placed exactly on `z*`, all
/// sources must lie strictly on one side of it and all targets strictly on
/// the other.
pub fn build_tree(
    src: &[[f64; 3]],
    tgt: &[[f64; 3]],
    interface: Option<f64>,
    leaf_capacity: usize,
    mac_sep: f64,
) -> Result<Tree> {
    if src.is_empty() && tgt.is_empty() {
        return Err(PbfmmError::EmptyInput("build_tree requires points".into()));
    }
    let cap = leaf_capacity.max(1);
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for pt in src.iter().chain(tgt) {
        for d in 0..3 {
            lo[d] = lo[d].min(pt[d]);
            hi[d] = hi[d].max(pt[d]);
        }
    }
    let mut max_leaf_size = f64::INFINITY;
    let (center, size) = match interface {
        None => {
            let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])];
            let s = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(hi[2] - lo[2]).max(1e-12);
            (c, s * (1.0 + 1e-9))
        }
        Some(zs) => {
            let src_side = side_of(src, zs, "sources")?;
            let tgt_side = side_of(tgt, zs, "targets")?;
            if src_side == tgt_side {
                return Err(PbfmmError::MixedSides(
                    "sources and targets on the same side of the interface".into(),
                ));
            }
            let dz = (hi[2] - zs).abs().max((lo[2] - zs).abs());
            let s = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(2.0 * dz).max(1e-12) * (1.0 + 1e-9);
            // Force occupied boxes down to sizes small enough that every
            // cross-interface leaf pair is accepted by the separation
            // criterion: with clearance c = min |z - z*| over all points and
            // leaves no larger than T = 2c/(mac+1), the vertical gap between
            // any source and target box is at least mac * max(sizes), so the
            // reaction near field is empty (points closer to the interface
            // than the depth cap allows still fall back to direct pairs).
            let cmin = src
                .iter()
                .chain(tgt)
                .map(|p| (p[2] - zs).abs())
                .fold(f64::INFINITY, f64::min);
            max_leaf_size = 2.0 * cmin / (mac_sep.max(1.0) + 1.0);
            ([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), zs], s)
        }
    };
    let mut tree = Tree {
        nodes: vec![BoxNode {
            level: 0,
            center,
            size,
            parent: None,
            children: Vec::new(),
            src_range: (0, src.len()),
            tgt_range: (0, tgt.len()),
        }],
        src_order: (0..src.len()).collect(),
        tgt_order: (0..tgt.len()).collect(),
    };
    subdivide(&mut tree, 0, src, tgt, cap, max_leaf_size);
    Ok(tree)
}

fn side_of(pts: &[[f64; 3]], zs: f64, what: &str) -> Result<bool> {
    let mut side: Option<bool> = None;
    for pt in pts {
        if pt[2] == zs {
            return Err(PbfmmError::MixedSides(format!("{what} contain a point on the interface")));
        }
        let s = pt[2] > zs;
        if *side.get_or_insert(s) != s {
            return Err(PbfmmError::MixedSides(format!("{what} straddle the interface")));
        }
    }
    Ok(side.unwrap_or(true))
}

fn octant(center: [f64; 3], pt: [f64; 3]) -> usize {
    ((pt[0] >= center[0]) as usize)
        | (((pt[1] >= center[1]) as usize) << 1)
        | (((pt[2] >= center[2]) as usize) << 2)
}

/// Stable 8-way bucket partition of `order[range]` by octant; returns the
/// per-octant sub-ranges.
fn partition(
    order: &mut [usize],
    range: (usize, usize),
    pts: &[[f64; 3]],
    center: [f64; 3],
) -> [(usize, usize); 8] {
    let slice = &mut order[range.0..range.1];
    let mut buckets: [Vec<usize>; 8] = Default::default();
    for &i in slice.iter() {
        buckets[octant(center, pts[i])].push(i);
    }
    let mut ranges = [(0, 0); 8];
    let mut at = range.0;
    let mut k = 0;
    for (o, b) in buckets.iter().enumerate() {
        ranges[o] = (at, at + b.len());
        at += b.len();
        for &i in b {
            slice[k] = i;
            k += 1;
        }
    }
    ranges
}

fn subdivide(
    tree: &mut Tree,
    node: usize,
    src: &[[f64; 3]],
    tgt: &[[f64; 3]],
    cap: usize,
    max_size: f64,
) {
    let (level, center, size, src_range, tgt_range) = {
        let n = &tree.nodes[node];
        (n.level, n.center, n.size, n.src_range, n.tgt_range)
    };
    let total = src_range.1 - src_range.0 + tgt_range.1 - tgt_range.0;
    if (total <= cap && size <= max_size) || level >= MAX_DEPTH {
        return;
    }
    let src_parts = partition(&mut tree.src_order, src_range, src, center);
    let tgt_parts = partition(&mut tree.tgt_order, tgt_range, tgt, center);
    let half = 0.5 * size;
    let quarter = 0.25 * size;
    for o in 0..8 {
        let ns = src_parts[o].1 - src_parts[o].0;
        let nt = tgt_parts[o].1 - tgt_parts[o].0;
        if ns + nt == 0 {
            continue;
        }
        let ccenter = [
            center[0] + if o & 1 != 0 { quarter } else { -quarter },
            center[1] + if o & 2 != 0 { quarter } else { -quarter },
            center[2] + if o & 4 != 0 { quarter } else { -quarter },
        ];
        let child = tree.nodes.len();
        tree.nodes.push(BoxNode {
            level: level + 1,
            center: ccenter,
            size: half,
            parent: Some(node),
            children: Vec::new(),
            src_range: src_parts[o],
            tgt_range: tgt_parts[o],
        });
        tree.nodes[node].children.push(child);
        subdivide(tree, child, src, tgt, cap, max_size);
    }
}

/// Interaction plan produced by the dual-tree traversal: far pairs are
/// handled through expansions (M2L), near pairs directly (P2P).
#[derive(Debug, Default)]
pub struct InteractionPlan {
    /// `(source box, target box)` pairs accepted by the separation criterion.
    pub far: Vec<(usize, usize)>,
    /// Leaf `(source box, target box)` pairs that must interact directly.
    pub near: Vec<(usize, usize)>,
}

fn box_dist(a: &BoxNode, b: &BoxNode) -> f64 {
    let dx = a.center[0] - b.center[0];
    let dy = a.center[1] - b.center[1];
    let dz = a.center[2] - b.center[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Dual-tree traversal with a multipole acceptance criterion: a pair is far
/// once the center distance reaches `mac_sep · max(sizes)` (minus a relative
/// epsilon so exact lattice distances are accepted). For interface trees,
/// level-0 boxes are never accepted (their centers sit on the interface).
pub fn plan_interactions(tree: &Tree, mac_sep: f64, interface: bool) -> InteractionPlan {
    let mut plan = InteractionPlan::default();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((ia, ib)) = stack.pop() {
        let a = &tree.nodes[ia];
        let b = &tree.nodes[ib];
        if a.n_src() == 0 || b.n_tgt() == 0 {
            continue;
        }
        let sep_ok = !(interface && (a.level == 0 || b.level == 0))
            && box_dist(a, b) >= mac_sep * a.size.max(b.size) * (1.0 - 1e-12);
        if sep_ok {
            plan.far.push((ia, ib));
            continue;
        }
        match (a.is_leaf(), b.is_leaf()) {
            (true, true) => plan.near.push((ia, ib)),
            (false, true) => stack.extend(a.children.iter().map(|&c| (c, ib))),
            (true, false) => stack.extend(b.children.iter().map(|&c| (ia, c))),
            (false, false) => {
                if a.size >= b.size {
                    stack.extend(a.children.iter().map(|&c| (c, ib)));
                } else {
                    stack.extend(b.children.iter().map(|&c| (ia, c)));
                }
            }
        }
    }
    plan
}

/// Bottom-up P2M/M2M sweep. Returns one optional ME per box (boxes without
/// sources carry `None`). Translation matrices are cached per
/// `(level, child octant)` since the child-to-parent geometry repeats.
fn upward_pass(
    tree: &Tree,
    charges: &[(f64, [f64; 3])],
    lam: f64,
    p: usize,
    gaunt: &GauntTable,
    counters: &mut OpCounters,
) -> Result<Vec<Option<Expansion>>> {
    let mut mes: Vec<Option<Expansion>> = vec![None; tree.nodes.len()];
    let mut m2m_cache: HashMap<(usize, u8), TranslationMatrix> = HashMap::new();
    // nodes are stored parent-before-child; reverse order is bottom-up
    for i in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[i];
        if node.n_src() == 0 {
            continue;
        }
        if node.is_leaf() {
            let pts: Vec<(f64, [f64; 3])> = tree.src_order[node.src_range.0..node.src_range.1]
                .iter()
                .map(|&j| charges[j])
                .collect();
            mes[i] = Some(p2m(&pts, node.center, node.size, lam, p)?);
            counters.p2m += 1;
        } else {
            let mut acc = Expansion::zero(ExpansionKind::Multipole, node.center, node.size, lam, p);
            for &c in &node.children {
                let Some(cme) = &mes[c] else { continue };
                let child = &tree.nodes[c];
                let key = (child.level, rel_octant(node.center, child.center));
                let mat = match m2m_cache.get(&key) {
                    Some(m) => m,
                    None => {
                        let m = m2m_matrix(
                            gaunt,
                            child.center,
                            node.center,
                            child.size,
                            node.size,
                            lam,
                            p,
                        )?;
                        counters.matrix_builds += 1;
                        m2m_cache.entry(key).or_insert(m)
                    }
                };
                let shifted = mat.apply(&cme.coeffs);
                for (a, s) in acc.coeffs.iter_mut().zip(&shifted) {
                    *a += s;
                }
                counters.m2m += 1;
            }
            mes[i] = Some(acc);
        }
    }
    Ok(mes)
}

fn rel_octant(parent_center: [f64; 3], child_center: [f64; 3]) -> u8 {
    (((child_center[0] > parent_center[0]) as u8)
        | (((child_center[1] > parent_center[1]) as u8) << 1)
        | (((child_center[2] > parent_center[2]) as u8) << 2)) as u8
}

/// Quantize a displacement to half-units of the finest participating box
/// size (box centers live on that lattice).
fn quantize(delta: f64, unit: f64) -> i64 {
    (2.0 * delta / unit).round() as i64
}

/// Free-space screened-Coulomb potentials of one layer's charges at their
/// own positions, self term excluded. Output is in physical units,
/// `Σ_{j≠i} qⱼ e^{−λr}/(4πεr)`.
pub fn run_free_space(
    medium: &LayeredMedium,
    l: usize,
    charges: &[(f64, [f64; 3])],
    config: &RunConfig,
) -> Result<(Vec<f64>, OpCounters)> {
    let mut counters = OpCounters::default();
    let n = charges.len();
    let mut out = vec![0.0; n];
    if n <= 1 {
        return Ok((out, counters));
    }
    let lam = medium.lam(l);
    let p = config.p;
    let gaunt = GauntTable::new(p);
    let pts: Vec<[f64; 3]> = charges.iter().map(|c| c.1).collect();
    let tree = build_tree(&pts, &pts, None, config.leaf_capacity, config.mac_sep)?;
    let plan = plan_interactions(&tree, config.mac_sep, false);
    let mes = upward_pass(&tree, charges, lam, p, &gaunt, &mut counters)?;

    // far field: M2L into per-box local expansions, matrices cached by
    // quantized displacement and level pair
    let mut les: Vec<Option<Expansion>> = vec![None; tree.nodes.len()];
    let mut m2l_cache: HashMap<(usize, usize, i64, i64, i64), TranslationMatrix> = HashMap::new();
    for &(is, it) in &plan.far {
        let (src, tgt) = (&tree.nodes[is], &tree.nodes[it]);
        let unit = src.size.min(tgt.size);
        let key = (
            src.level,
            tgt.level,
            quantize(tgt.center[0] - src.center[0], unit),
            quantize(tgt.center[1] - src.center[1], unit),
            quantize(tgt.center[2] - src.center[2], unit),
        );
        let mat = match m2l_cache.get(&key) {
            Some(m) => m,
            None => {
                let m = m2l_matrix(&gaunt, src.center, tgt.center, src.size, tgt.size, lam, p)?;
                counters.matrix_builds += 1;
                m2l_cache.entry(key).or_insert(m)
            }
        };
        let me = mes[is].as_ref().expect("far source box has an ME");
        let le = les[it].get_or_insert_with(|| {
            Expansion::zero(ExpansionKind::Local, tgt.center, tgt.size, lam, p)
        });
        let shifted = mat.apply(&me.coeffs);
        for (a, s) in le.coeffs.iter_mut().zip(&shifted) {
            *a += s;
        }
        counters.m2l += 1;
    }

    downward_and_eval(&tree, &mut les, lam, p, &gaunt, charges, &mut out, &mut counters)?;

    // near field: direct k0 sums, self term excluded
    for &(is, it) in &plan.near {
        let (src, tgt) = (&tree.nodes[is], &tree.nodes[it]);
        for &ti in &tree.tgt_order[tgt.tgt_range.0..tgt.tgt_range.1] {
            let rt = charges[ti].1;
            let mut acc = 0.0;
            for &si in &tree.src_order[src.src_range.0..src.src_range.1] {
                if si == ti {
                    continue;
                }
                let (q, rs) = charges[si];
                let d = ((rt[0] - rs[0]).powi(2) + (rt[1] - rs[1]).powi(2) + (rt[2] - rs[2]).powi(2))
                    .sqrt();
                if d == 0.0 {
                    return Err(PbfmmError::Domain(format!(
                        "coincident particles {ti} and {si}"
                    )));
                }
                acc += q * mod_bessel_k(0, lam * d)?;
            }
            out[ti] += acc;
            counters.p2p_pairs += src.n_src();
        }
    }

    let pre = physical_prefactor(lam, medium.eps(l));
    for v in &mut out {
        *v *= pre;
    }
    Ok((out, counters))
}

/// Top-down L2L sweep followed by local-expansion evaluation at the targets
/// of every leaf. Evaluated values are in `k₀` kernel units and added to
/// `out` (indexed like `targets`).
#[allow(clippy::too_many_arguments)]
fn downward_and_eval(
    tree: &Tree,
    les: &mut [Option<Expansion>],
    lam: f64,
    p: usize,
    gaunt: &GauntTable,
    targets: &[(f64, [f64; 3])],
    out: &mut [f64],
    counters: &mut OpCounters,
) -> Result<()> {
    let mut l2l_cache: HashMap<(usize, u8), TranslationMatrix> = HashMap::new();
    for i in 0..tree.nodes.len() {
        let node = &tree.nodes[i];
        if node.n_tgt() == 0 {
            continue;
        }
        if let Some(parent) = node.parent {
            if let Some(ple) = les[parent].clone() {
                let key = (node.level, rel_octant(tree.nodes[parent].center, node.center));
                let mat = match l2l_cache.get(&key) {
                    Some(m) => m,
                    None => {
                        let m = l2l_matrix(
                            gaunt,
                            tree.nodes[parent].center,
                            node.center,
                            tree.nodes[parent].size,
                            node.size,
                            lam,
                            p,
                        )?;
                        counters.matrix_builds += 1;
                        l2l_cache.entry(key).or_insert(m)
                    }
                };
                let shifted = mat.apply(&ple.coeffs);
                let le = les[i].get_or_insert_with(|| {
                    Expansion::zero(ExpansionKind::Local, node.center, node.size, lam, p)
                });
                for (a, s) in le.coeffs.iter_mut().zip(&shifted) {
                    *a += s;
                }
                counters.l2l += 1;
            }
        }
        if node.is_leaf() {
            if let Some(le) = &les[i] {
                for &ti in &tree.tgt_order[node.tgt_range.0..node.tgt_range.1] {
                    out[ti] += eval_local(le, targets[ti].1)?;
                }
            }
        }
    }
    let _ = p;
    Ok(())
}

/// One reaction component `Φ^{𝔞𝔟}_{ℓℓ′}` at the targets: potentials of the
/// source layer's charges seen through the layered reaction kernel,
/// including the self term. Output is in physical units.
pub fn run_reaction_component(
    medium: &LayeredMedium,
    targets: &[[f64; 3]],
    sources: &[(f64, [f64; 3])],
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
    config: &RunConfig,
) -> Result<(Vec<f64>, OpCounters)> {
    let mut counters = OpCounters::default();
    let mut out = vec![0.0; targets.len()];
    if targets.is_empty() || sources.is_empty() {
        return Ok((out, counters));
    }
    let kernel = SpectralKernel::new(medium, a, b, l, lp)?;
    let p = config.p;
    let lam_t = medium.lam(l);
    let lam_s = medium.lam(lp);
    let gaunt = GauntTable::new(p);
    let coeffs = ProductCoeffTable::new(p, lam_t, lam_s);

    let pol: Vec<PolarizationSource> = sources
        .iter()
        .map(|&(q, pos)| polarize(medium, q, pos, l, lp, a, b))
        .collect::<Result<_>>()?;
    let pol_charges: Vec<(f64, [f64; 3])> = pol.iter().map(|s| (s.q, s.position)).collect();
    let pol_pts: Vec<[f64; 3]> = pol.iter().map(|s| s.position).collect();
    let zstar = if a == 1 { medium.interface(l) } else { medium.interface(l - 1) };
    let tree = build_tree(&pol_pts, targets, Some(zstar), config.leaf_capacity, config.mac_sep)?;
    let plan = plan_interactions(&tree, config.mac_sep, true);

    let mes = upward_pass(&tree, &pol_charges, lam_s, p, &gaunt, &mut counters)?;

    // far field through reaction M2L; Sommerfeld tables cached by the
    // quantized horizontal offset and the absolute box heights
    let mut les: Vec<Option<Expansion>> = vec![None; tree.nodes.len()];
    let mut table_cache: HashMap<(i64, i64, u64, u64, u64), SommerfeldTable> = HashMap::new();
    for &(is, it) in &plan.far {
        let (src, tgt) = (&tree.nodes[is], &tree.nodes[it]);
        let unit = src.size.min(tgt.size);
        let mut qx = quantize((tgt.center[0] - src.center[0]).abs(), unit);
        let mut qy = quantize((tgt.center[1] - src.center[1]).abs(), unit);
        if qx > qy {
            std::mem::swap(&mut qx, &mut qy);
        }
        let key =
            (qx, qy, tgt.center[2].to_bits(), src.center[2].to_bits(), tgt.size.to_bits());
        if !table_cache.contains_key(&key) {
            let rho =
                (tgt.center[0] - src.center[0]).hypot(tgt.center[1] - src.center[1]);
            let table = SommerfeldTable::build(
                &kernel,
                rho,
                tgt.center[2],
                src.center[2],
                tgt.size,
                p,
                config.tol,
            )?;
            counters.table_builds += 1;
            table_cache.insert(key, table);
        }
        let table = &table_cache[&key];
        let me = mes[is].as_ref().expect("far source box has an ME");
        let add = reaction_m2l_with_table(&kernel, &coeffs, me, tgt.center, tgt.size, table)?;
        match &mut les[it] {
            Some(le) => le.accumulate(&add),
            slot => *slot = Some(add),
        }
        counters.m2l += 1;
    }

    let tgt_charges: Vec<(f64, [f64; 3])> = targets.iter().map(|&r| (0.0, r)).collect();
    downward_and_eval(&tree, &mut les, lam_t, p, &gaunt, &tgt_charges, &mut out, &mut counters)?;

    // near field: direct reaction kernel per pair
    for &(is, it) in &plan.near {
        let (src, tgt) = (&tree.nodes[is], &tree.nodes[it]);
        for &ti in &tree.tgt_order[tgt.tgt_range.0..tgt.tgt_range.1] {
            let mut acc = 0.0;
            for &si in &tree.src_order[src.src_range.0..src.src_range.1] {
                acc += pol[si].q
                    * reaction_direct(&kernel, targets[ti], pol[si].position, config.tol)?;
            }
            out[ti] += acc;
            counters.p2p_pairs += src.n_src();
        }
    }
    Ok((out, counters))
}

/// Full result of [`compute_all`].
#[derive(Debug, Clone)]
pub struct PotentialReport {
    /// Total physical potential per particle.
    pub phi_total: Vec<f64>,
    /// Free-space (same-layer, screened Coulomb) part.
    pub phi_free: Vec<f64>,
    /// Sum of all reaction components (includes the self term).
    pub phi_react: Vec<f64>,
    /// Per-particle layer assignment.
    pub layers: Vec<usize>,
    pub counters_free: OpCounters,
    pub counters_react: OpCounters,
    /// Wall-clock seconds spent in the free-space and reaction parts.
    pub seconds_free: f64,
    pub seconds_react: f64,
}

/// Total potential of every particle: free part plus all admissible reaction
/// components across every (target layer, source layer) pair.
pub fn compute_all(
    medium: &LayeredMedium,
    charges: &[(f64, [f64; 3])],
    config: &RunConfig,
) -> Result<PotentialReport> {
    let n = charges.len();
    if n == 0 {
        return Err(PbfmmError::EmptyInput("compute_all requires particles".into()));
    }
    let nl = medium.n_layers();
    let mut layers = Vec::with_capacity(n);
    let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); nl];
    for (i, &(_, pos)) in charges.iter().enumerate() {
        let l = medium.layer_of(pos[2])?;
        layers.push(l);
        by_layer[l].push(i);
    }

    let mut phi_free = vec![0.0; n];
    let mut counters_free = OpCounters::default();
    let t0 = std::time::Instant::now();
    for (l, idx) in by_layer.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let layer_charges: Vec<(f64, [f64; 3])> = idx.iter().map(|&i| charges[i]).collect();
        let (phi, c) = run_free_space(medium, l, &layer_charges, config)?;
        counters_free.merge(&c);
        for (k, &i) in idx.iter().enumerate() {
            phi_free[i] = phi[k];
        }
    }
    let seconds_free = t0.elapsed().as_secs_f64();

    // enumerate every admissible component job
    let mut jobs: Vec<(usize, usize, usize, usize)> = Vec::new();
    for l in 0..nl {
        if by_layer[l].is_empty() {
            continue;
        }
        for lp in 0..nl {
            if by_layer[lp].is_empty() {
                continue;
            }
            for (a, b) in admissible_components(medium, l, lp) {
                jobs.push((l, lp, a, b));
            }
        }
    }

    let t1 = std::time::Instant::now();
    let run_job = |&(l, lp, a, b): &(usize, usize, usize, usize)| -> Result<(usize, Vec<f64>, OpCounters)> {
        let tgt: Vec<[f64; 3]> = by_layer[l].iter().map(|&i| charges[i].1).collect();
        let src: Vec<(f64, [f64; 3])> = by_layer[lp].iter().map(|&j| charges[j]).collect();
        let (phi, c) = run_reaction_component(medium, &tgt, &src, l, lp, a, b, config)?;
        Ok((l, phi, c))
    };
    let results: Vec<(usize, Vec<f64>, OpCounters)> = if config.workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| PbfmmError::Config(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_job).collect::<Result<Vec<_>>>())?
    } else {
        jobs.iter().map(run_job).collect::<Result<Vec<_>>>()?
    };
    let mut phi_react = vec![0.0; n];
    let mut counters_react = OpCounters::default();
    for (l, phi, c) in results {
        counters_react.merge(&c);
        for (k, &i) in by_layer[l].iter().enumerate() {
            phi_react[i] += phi[k];
        }
    }
    let seconds_react = t1.elapsed().as_secs_f64();

    let phi_total = phi_free.iter().zip(&phi_react).map(|(f, r)| f + r).collect();
    Ok(PotentialReport {
        phi_total,
        phi_free,
        phi_react,
        layers,
        counters_free,
        counters_react,
        seconds_free,
        seconds_react,
    })
}
