use pbfmm::config::generate_particles;
use pbfmm::fmm::{build_tree, plan_interactions};
use pbfmm::medium::benchmark_medium;
use pbfmm::oracle::admissible_components;
use pbfmm::polarization::polarize;

fn main() {
    let med = benchmark_medium();
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(25000);
    let n0 = n * 912 / 2848;
    let n1 = n * 640 / 2848;
    let n2 = n - n0 - n1;
    let particles = generate_particles(&[n0, n1, n2], 5150).unwrap();
    let mut by_layer: Vec<Vec<(f64, [f64; 3])>> = vec![Vec::new(); 3];
    for &(q, pos) in &particles {
        by_layer[med.layer_of(pos[2]).unwrap()].push((q, pos));
    }
    let leaf_capacity = 60;
    let mac = 3.0;
    let mut tot_near_work = 0u64;
    for l in 0..3 {
        for lp in 0..3 {
            for (a, b) in admissible_components(&med, l, lp) {
                let srcs = &by_layer[lp];
                let tgts: Vec<[f64; 3]> = by_layer[l].iter().map(|p| p.1).collect();
                if srcs.is_empty() || tgts.is_empty() {
                    continue;
                }
                let pol_pts: Vec<[f64; 3]> = srcs
                    .iter()
                    .map(|&(q, pos)| polarize(&med, q, pos, l, lp, a, b).unwrap().position)
                    .collect();
                let zstar = if a == 1 { med.interface(l) } else { med.interface(l - 1) };
                let tree = build_tree(&pol_pts, &tgts, Some(zstar), leaf_capacity, mac).unwrap();
                let plan = plan_interactions(&tree, mac, true);
                let near_work: u64 = plan
                    .near
                    .iter()
                    .map(|&(is, it)| (tree.nodes[is].n_src() * tree.nodes[it].n_tgt()) as u64)
                    .sum();
                tot_near_work += near_work;
                println!(
                    "l={l} lp={lp} ab={a}{b}: boxes={} far={} near={} near_pairs={}",
                    tree.nodes.len(),
                    plan.far.len(),
                    plan.near.len(),
                    near_work
                );
            }
        }
    }
    println!("total near source-target pairs: {tot_near_work}");
}
