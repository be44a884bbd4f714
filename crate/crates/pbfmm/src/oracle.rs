//! Brute-force reference implementation: O(N²) direct summation with the
//! free-space closed form and adaptive Sommerfeld quadrature for every
//! reaction kernel.
//!
//! The quadrature here deliberately uses a different panelization from
//! [`crate::sommerfeld`] and no recurrences, so the two code paths validate
//! each other.

use crate::expansion::physical_prefactor;
use crate::medium::LayeredMedium;
use crate::sommerfeld::gauss_legendre;
use crate::special_fn::bessel_j;
use crate::{PbfmmError, Result};

const ORACLE_NODES: usize = 24;
const ORACLE_MAX_REFINEMENTS: usize = 8;

/// Free-space screened potentials within one layer:
/// `Φᵢ = Σ_{j≠i} qⱼ e^{−λ_ℓ r_{ij}} / (4π ε_ℓ r_{ij})`.
pub fn direct_free(
    medium: &LayeredMedium,
    l: usize,
    charges: &[(f64, [f64; 3])],
) -> Result<Vec<f64>> {
    let lam = medium.lam(l);
    let eps = medium.eps(l);
    let pre = 1.0 / (4.0 * std::f64::consts::PI * eps);
    let mut out = vec![0.0; charges.len()];
    for i in 0..charges.len() {
        for j in 0..charges.len() {
            if j == i {
                continue;
            }
            let d = dist(charges[i].1, charges[j].1);
            if d == 0.0 {
                return Err(PbfmmError::Domain(format!(
                    "coincident particles {i} and {j} in direct_free"
                )));
            }
            out[i] += charges[j].0 * pre * (-lam * d).exp() / d;
        }
    }
    Ok(out)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Vertical exponents `(u, v)` of component `𝔞𝔟` in terms of the *original*
/// source coordinate: `𝒵 = e^{−λ_{ℓz}u − λ_{ℓ′z}v}` with
/// `u = z − d_ℓ` (𝔞=1) or `d_{ℓ−1} − z` (𝔞=2), and
/// `v = z′ − d_{ℓ′}` (𝔟=1) or `d_{ℓ′−1} − z′` (𝔟=2).
fn exponents(
    medium: &LayeredMedium,
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
    z: f64,
    zp: f64,
) -> Result<(f64, f64)> {
    let u = if a == 1 { z - medium.interface(l) } else { medium.interface(l - 1) - z };
    let v = if b == 1 { zp - medium.interface(lp) } else { medium.interface(lp - 1) - zp };
    if u < 0.0 || v < 0.0 || u + v <= 0.0 {
        return Err(PbfmmError::DivergentIntegral(u.min(v).min(u + v)));
    }
    Ok((u, v))
}

fn check_component(
    medium: &LayeredMedium,
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
) -> Result<()> {
    if !(1..=2).contains(&a) || !(1..=2).contains(&b) {
        return Err(PbfmmError::Domain(format!("component indices ({a},{b}) out of range")));
    }
    let ab: &'static str = match (a, b) {
        (1, 1) => "11",
        (1, 2) => "12",
        (2, 1) => "21",
        _ => "22",
    };
    if (a == 1 && l >= medium.n_interfaces())
        || (a == 2 && l == 0)
        || (b == 1 && lp >= medium.n_interfaces())
        || (b == 2 && lp == 0)
    {
        return Err(PbfmmError::InadmissibleComponent { ab, l, lp });
    }
    Ok(())
}

/// Truncation point: past `x`, the integrand envelope `e^{−δx}(1+x)` has
/// dropped below `tol/100`.
fn oracle_xmax(delta: f64, tol: f64) -> f64 {
    let target = 0.01 * tol;
    let mut x = 1.0_f64;
    while (-delta * x).exp() * (1.0 + x) > target {
        x *= 2.0;
    }
    x
}

/// One composite Gauss–Legendre pass of the reduced single integral of the
/// reaction kernel for a batch of sources sharing one target and component.
/// Returns `Σ_nodes w · λρ J₀(λρ ρ_k) e^{−λ_{ℓz}u − λ_{ℓ′z}v_k} σ / λ_{ℓz}`
/// per source.
#[allow(clippy::too_many_arguments)]
fn reaction_pass(
    medium: &LayeredMedium,
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
    u: f64,
    geom: &[(f64, f64)], // per source: (ρ, v)
    xmax: f64,
    panel_len: f64,
) -> Result<Vec<f64>> {
    let (gx, gw) = gauss_legendre(ORACLE_NODES);
    let lam_t = medium.lam(l);
    let lam_s = medium.lam(lp);
    let n_panels = (xmax / panel_len).ceil() as usize;
    let mut acc = vec![0.0; geom.len()];
    for ip in 0..n_panels {
        let a0 = ip as f64 * panel_len;
        let b0 = (a0 + panel_len).min(xmax);
        let half = 0.5 * (b0 - a0);
        let mid = 0.5 * (a0 + b0);
        for k in 0..ORACLE_NODES {
            let x = mid + half * gx[k];
            let lz_t = lam_t.hypot(x);
            let lz_s = lam_s.hypot(x);
            let sig = medium.densities(lp, x)?.get(a, b, l);
            let base = half * gw[k] * x * sig / lz_t * (-lz_t * u).exp();
            if base == 0.0 {
                continue;
            }
            for (s, &(rho, v)) in geom.iter().enumerate() {
                acc[s] += base * (-lz_s * v).exp() * bessel_j(0, x * rho)?;
            }
        }
    }
    Ok(acc)
}

/// Batched reaction kernel values `u^{𝔞𝔟}_{ℓℓ′}(r, r′ⱼ)` for one target and
/// many original source positions, by adaptive composite quadrature on a
/// shared grid (absolute tolerance `tol`).
pub fn direct_reaction_batch(
    medium: &LayeredMedium,
    r: [f64; 3],
    sources: &[[f64; 3]],
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    check_component(medium, l, lp, a, b)?;
    if sources.is_empty() {
        return Ok(Vec::new());
    }
    let mut geom = Vec::with_capacity(sources.len());
    let mut delta = f64::INFINITY;
    let mut rho_max = 0.0_f64;
    let mut u0 = 0.0;
    for &rp in sources {
        let (u, v) = exponents(medium, l, lp, a, b, r[2], rp[2])?;
        u0 = u;
        let rho = (r[0] - rp[0]).hypot(r[1] - rp[1]);
        delta = delta.min(u + v);
        rho_max = rho_max.max(rho);
        geom.push((rho, v));
    }
    let xmax = oracle_xmax(delta, tol);
    // deliberately different panelization from the table-building quadrature
    let mut panel_len = (1.1 / (1.0 + rho_max)).min(0.37);
    let inv4pi = 1.0 / (4.0 * std::f64::consts::PI);
    let mut prev = reaction_pass(medium, l, lp, a, b, u0, &geom, xmax, panel_len)?;
    for _ in 0..ORACLE_MAX_REFINEMENTS {
        panel_len *= 0.5;
        let next = reaction_pass(medium, l, lp, a, b, u0, &geom, xmax, panel_len)?;
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(p, n)| (p - n).abs())
            .fold(0.0_f64, f64::max);
        if diff <= tol {
            return Ok(next.iter().map(|v| v * inv4pi).collect());
        }
        prev = next;
    }
    Err(PbfmmError::ToleranceNotMet(format!(
        "oracle reaction quadrature did not reach {tol} within {ORACLE_MAX_REFINEMENTS} refinements"
    )))
}

/// Single reaction kernel value `u^{𝔞𝔟}_{ℓℓ′}(r, r′)` (Sommerfeld integral
/// of the transmission density, reduced to a single `J₀` integral).
pub fn direct_reaction(
    medium: &LayeredMedium,
    r: [f64; 3],
    rp: [f64; 3],
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<f64> {
    Ok(direct_reaction_batch(medium, r, &[rp], l, lp, a, b, tol)?[0])
}

/// Admissible component list `(𝔞, 𝔟)` for target layer `ℓ` and source layer
/// `ℓ′` in the given medium.
pub fn admissible_components(medium: &LayeredMedium, l: usize, lp: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(4);
    for a in 1..=2 {
        for b in 1..=2 {
            if check_component(medium, l, lp, a, b).is_ok() {
                out.push((a, b));
            }
        }
    }
    out
}

/// Full O(N²) oracle: per-particle total potential (free + all admissible
/// reaction components, reaction including the self term).
pub fn direct_all(
    medium: &LayeredMedium,
    charges: &[(f64, [f64; 3])],
    tol: f64,
) -> Result<Vec<f64>> {
    let n = charges.len();
    if n == 0 {
        return Err(PbfmmError::EmptyInput("direct_all requires particles".into()));
    }
    let nl = medium.n_layers();
    let mut layer_idx: Vec<Vec<usize>> = vec![Vec::new(); nl];
    for (i, &(_, pos)) in charges.iter().enumerate() {
        layer_idx[medium.layer_of(pos[2])?].push(i);
    }
    let mut out = vec![0.0; n];
    // free part, layer by layer
    for (_, idx) in layer_idx.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let layer_charges: Vec<(f64, [f64; 3])> = idx.iter().map(|&i| charges[i]).collect();
        let phi = direct_free(medium, medium.layer_of(layer_charges[0].1[2])?, &layer_charges)?;
        for (k, &i) in idx.iter().enumerate() {
            out[i] += phi[k];
        }
    }
    // reaction parts: every (target layer, source layer, component)
    for l in 0..nl {
        for lp in 0..nl {
            if layer_idx[lp].is_empty() {
                continue;
            }
            let src_pos: Vec<[f64; 3]> = layer_idx[lp].iter().map(|&j| charges[j].1).collect();
            for (a, b) in admissible_components(medium, l, lp) {
                for &i in &layer_idx[l] {
                    let vals =
                        direct_reaction_batch(medium, charges[i].1, &src_pos, l, lp, a, b, tol)?;
                    for (k, &j) in layer_idx[lp].iter().enumerate() {
                        out[i] += charges[j].0 * vals[k];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sanity hook for the free normalization: a unit charge at distance `r` in
/// layer `ℓ` contributes `physical_prefactor(λ, ε)·k₀(λr)`.
pub fn free_pair_value(medium: &LayeredMedium, l: usize, r: f64) -> f64 {
    let lam = medium.lam(l);
    physical_prefactor(lam, medium.eps(l)) * std::f64::consts::FRAC_PI_2 * (-lam * r).exp()
        / (lam * r)
}
