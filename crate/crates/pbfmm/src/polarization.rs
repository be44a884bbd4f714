//! Equivalent polarization sources and the reaction-field operators.
//!
//! Each reaction component `𝔞𝔟` of the layered Green's function can be
//! rewritten as an interaction between the target and an *equivalent
//! polarization source*: the original charge moved to a mirrored vertical
//! position `z′_{𝔞𝔟}` on the other side of the governing interface, with
//! `x, y` unchanged. In those coordinates the component admits multipole and
//! local expansions of exactly the free-space form, so the standard FMM
//! skeleton (P2M, M2M, L2L) applies unchanged; only the evaluation (`F̃`),
//! source-to-local (`L`), and multipole-to-local (`T`) operators are new,
//! and all reduce to the real Sommerfeld integrals `Ĩ` assembled in
//! [`crate::sommerfeld`].

use crate::expansion::{p2m, Expansion, ExpansionKind};
use crate::medium::LayeredMedium;
use crate::sommerfeld::{assemble_i, quad_s, ProductCoeffTable, SommerfeldTable, SpectralKernel};
use crate::special_fn::nm_index;
use crate::{PbfmmError, Result};
use num_complex::Complex64;

/// A point charge re-expressed in the equivalent polarization coordinates of
/// one reaction component.
#[derive(Debug, Clone, Copy)]
pub struct PolarizationSource {
    /// Charge strength of the original particle.
    pub q: f64,
    /// Original position.
    pub original: [f64; 3],
    /// Polarized position (`x, y` unchanged, `z` mirrored).
    pub position: [f64; 3],
    /// Component indices `𝔞, 𝔟 ∈ {1, 2}`.
    pub a: usize,
    pub b: usize,
    /// Target layer `ℓ` and source layer `ℓ′`.
    pub l: usize,
    pub lp: usize,
}

/// Polarized vertical coordinate `z′_{𝔞𝔟}` for a source at height `z` in
/// layer `ℓ′`, interacting with targets in layer `ℓ`:
/// `z′₁𝔟 = d_ℓ − off`, `z′₂𝔟 = d_{ℓ−1} + off`, with
/// `off = z − d_{ℓ′}` (𝔟 = 1) or `off = d_{ℓ′−1} − z` (𝔟 = 2).
pub fn polarized_z(medium: &LayeredMedium, l: usize, lp: usize, a: usize, b: usize, z: f64) -> f64 {
    let off = if b == 1 { z - medium.interface(lp) } else { medium.interface(lp - 1) - z };
    if a == 1 {
        medium.interface(l) - off
    } else {
        medium.interface(l - 1) + off
    }
}

/// Construct the equivalent polarization source of charge `q` at `pos` for
/// the reaction component `𝔞𝔟` and layer pair `(ℓ, ℓ′)`.
pub fn polarize(
    medium: &LayeredMedium,
    q: f64,
    pos: [f64; 3],
    l: usize,
    lp: usize,
    a: usize,
    b: usize,
) -> Result<PolarizationSource> {
    // component admissibility shares the kernel's rules
    SpectralKernel::new(medium, a, b, l, lp)?;
    if medium.layer_of(pos[2])? != lp {
        return Err(PbfmmError::Domain(format!(
            "source z = {} is not strictly inside layer {lp}",
            pos[2]
        )));
    }
    let zp = polarized_z(medium, l, lp, a, b, pos[2]);
    Ok(PolarizationSource { q, original: pos, position: [pos[0], pos[1], zp], a, b, l, lp })
}

fn check_me_center(medium: &LayeredMedium, a: usize, l: usize, zc: f64) -> Result<()> {
    let ok = if a == 1 { zc < medium.interface(l) } else { zc > medium.interface(l - 1) };
    if !ok {
        return Err(PbfmmError::CenterSideViolation(format!(
            "reaction ME center z = {zc} on the target side for component a = {a}"
        )));
    }
    Ok(())
}

fn check_le_center(medium: &LayeredMedium, a: usize, l: usize, zc: f64) -> Result<()> {
    let ok = if a == 1 { zc > medium.interface(l) } else { zc < medium.interface(l - 1) };
    if !ok {
        return Err(PbfmmError::CenterSideViolation(format!(
            "reaction LE center z = {zc} on the polarized side for component a = {a}"
        )));
    }
    Ok(())
}

/// In-plane polar displacement `(ρ, φ)` between two points; `φ = 0` at
/// `ρ = 0` (all `m ≠ 0` terms vanish there).
fn polar_xy(to: [f64; 3], from: [f64; 3]) -> (f64, f64) {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    let rho = dx.hypot(dy);
    let phi = if rho > 0.0 { dy.atan2(dx) } else { 0.0 };
    (rho, phi)
}

/// Multipole expansion of polarized sources about `center` (free-space form
/// with the *source layer's* screening `λ_{ℓ′}`). All sources must share one
/// component and layer pair; the center must sit on the polarized side of
/// the governing interface.
pub fn reaction_p2m(
    medium: &LayeredMedium,
    sources: &[PolarizationSource],
    center: [f64; 3],
    s: f64,
    p: usize,
) -> Result<Expansion> {
    let first = sources
        .first()
        .ok_or_else(|| PbfmmError::EmptyInput("reaction_p2m requires at least one source".into()))?;
    check_me_center(medium, first.a, first.l, center[2])?;
    let charges: Vec<(f64, [f64; 3])> = sources.iter().map(|s| (s.q, s.position)).collect();
    p2m(&charges, center, s, medium.lam(first.lp), p)
}

/// Component-dependent real sign of the reaction operator entries (the
/// residue of the spectral plane-wave phases after reduction to real `Ĩ`).
fn f_sign(a: usize, n: usize, m: i64) -> f64 {
    // a = 1: (-1)^m ; a = 2: (-1)^n
    let e = if a == 1 { m.rem_euclid(2) } else { (n % 2) as i64 };
    if e == 1 {
        -1.0
    } else {
        1.0
    }
}

fn l_sign(a: usize, n: usize, m: i64) -> f64 {
    // a = 1: (-1)^n ; a = 2: (-1)^m
    let e = if a == 1 { (n % 2) as i64 } else { m.rem_euclid(2) };
    if e == 1 {
        -1.0
    } else {
        1.0
    }
}

fn t_sign(a: usize, n: usize, m: i64, nu: usize, mu: i64) -> f64 {
    // a = 1: (-1)^{n+μ} ; a = 2: (-1)^{ν+m}
    let e = if a == 1 { n as i64 + mu } else { nu as i64 + m };
    if e.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Evaluate a reaction multipole expansion at a target `r` in layer `ℓ`
/// through the Sommerfeld-type evaluation operators `F̃ₙₘ`:
/// `u ≈ Σₙₘ Mₙₘ F̃ₙₘ` with `F̃ₙₘ ∝ e^{imφ_s} Ĩ₀₀,ₙₘ(ρ_s, z, z_c)`.
pub fn reaction_eval_me(
    kernel: &SpectralKernel,
    coeffs_cache: &ProductCoeffTable,
    exp: &Expansion,
    r: [f64; 3],
    tol: f64,
) -> Result<f64> {
    let (a, _) = kernel.component();
    let p = exp.p;
    let (rho, phi) = polar_xy(r, exp.center);
    let table = SommerfeldTable::build(kernel, rho, r[2], exp.center[2], exp.s, p, tol)?;
    let inv_sqrt4pi = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    let mut acc = Complex64::default();
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            let iv = assemble_i(coeffs_cache.get(0, 0, n, m), &table)?;
            let phase = Complex64::from_polar(1.0, m as f64 * phi);
            let f = f_sign(a, n, m) * inv_sqrt4pi * iv;
            acc += exp.coeffs[nm_index(n, m)] * phase * f;
        }
    }
    Ok(acc.re)
}

/// Local expansion of the reaction field of polarized sources about a target
/// center (source-to-local): `Lₙₘ ∝ e^{−imφ_t} Ĩₙₘ,₀₀(ρ_t, z_c^t, z′_{𝔞𝔟})`.
/// The returned LE evaluates with the free-space [`crate::expansion::eval_local`]
/// using the *target layer's* screening `λ_ℓ`.
pub fn reaction_p2l(
    kernel: &SpectralKernel,
    coeffs_cache: &ProductCoeffTable,
    sources: &[PolarizationSource],
    center: [f64; 3],
    s: f64,
    p: usize,
    tol: f64,
) -> Result<Expansion> {
    let first = sources
        .first()
        .ok_or_else(|| PbfmmError::EmptyInput("reaction_p2l requires at least one source".into()))?;
    let medium = kernel.medium();
    check_le_center(medium, first.a, first.l, center[2])?;
    let (a, _) = kernel.component();
    let (l, _) = kernel.layers();
    let mut exp = Expansion::zero(ExpansionKind::Local, center, s, medium.lam(l), p);
    let sqrt4pi = (4.0 * std::f64::consts::PI).sqrt();
    for src in sources {
        let (rho, phi) = polar_xy(center, src.position);
        let table = SommerfeldTable::build(kernel, rho, center[2], src.position[2], s, p, tol)?;
        for n in 0..=p {
            for m in -(n as i64)..=(n as i64) {
                let iv = assemble_i(coeffs_cache.get(n, m, 0, 0), &table)?;
                let phase = Complex64::from_polar(1.0, -(m as f64) * phi);
                exp.coeffs[nm_index(n, m)] +=
                    src.q * l_sign(a, n, m) * sqrt4pi * iv * phase;
            }
        }
    }
    Ok(exp)
}

/// Translate a reaction multipole expansion into a local expansion about a
/// target center: `Lₙₘ = Σ_{νμ} Tₙₘ,νμ M_{νμ}` with
/// `Tₙₘ,νμ ∝ e^{i(μ−m)φ_st} Ĩₙₘ,νμ(ρ_st, z_c^t, z_c^{𝔞𝔟})`.
pub fn reaction_m2l(
    kernel: &SpectralKernel,
    coeffs_cache: &ProductCoeffTable,
    exp: &Expansion,
    target_center: [f64; 3],
    s_tgt: f64,
    tol: f64,
) -> Result<Expansion> {
    let (rho, _) = polar_xy(target_center, exp.center);
    let table =
        SommerfeldTable::build(kernel, rho, target_center[2], exp.center[2], s_tgt, exp.p, tol)?;
    reaction_m2l_with_table(kernel, coeffs_cache, exp, target_center, s_tgt, &table)
}

/// [`reaction_m2l`] with a caller-supplied Sommerfeld table, so one table can
/// serve every translation sharing the same `(ρ_st, z_c^t, z_c^{𝔞𝔟}, S)`
/// geometry (translational invariance in the horizontal plane).
pub fn reaction_m2l_with_table(
    kernel: &SpectralKernel,
    coeffs_cache: &ProductCoeffTable,
    exp: &Expansion,
    target_center: [f64; 3],
    s_tgt: f64,
    table: &SommerfeldTable,
) -> Result<Expansion> {
    let medium = kernel.medium();
    let (a, _) = kernel.component();
    let (l, _) = kernel.layers();
    check_le_center(medium, a, l, target_center[2])?;
    check_me_center(medium, a, l, exp.center[2])?;
    let p = exp.p;
    let (_, phi) = polar_xy(target_center, exp.center);
    // residual source-scale ratio when ME and LE scales differ
    let ratio = exp.s / s_tgt;
    let mut ratio_pow = Vec::with_capacity(p + 1);
    let mut v = 1.0;
    for _ in 0..=p {
        ratio_pow.push(v);
        v *= ratio;
    }
    let mut out = Expansion::zero(ExpansionKind::Local, target_center, s_tgt, medium.lam(l), p);
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            let mut acc = Complex64::default();
            for nu in 0..=p {
                for mu in -(nu as i64)..=(nu as i64) {
                    let mc = exp.coeffs[nm_index(nu, mu)];
                    if mc == Complex64::default() {
                        continue;
                    }
                    let iv = assemble_i(coeffs_cache.get(n, m, nu, mu), table)?;
                    let phase = Complex64::from_polar(1.0, (mu - m) as f64 * phi);
                    acc += mc * (t_sign(a, n, m, nu, mu) * iv * ratio_pow[nu]) * phase;
                }
            }
            out.coeffs[nm_index(n, m)] = acc;
        }
    }
    Ok(out)
}

/// Direct reaction kernel `ũ^{𝔞𝔟}(r, r′_{𝔞𝔟})` between a target and one
/// polarized source position (unit charge):
/// `(1/4π) ∫ λ_ρ J₀(λ_ρ|ρ − ρ′|) 𝒵^± σ^{𝔞𝔟}/λ_{ℓz} dλ_ρ`.
pub fn reaction_direct(
    kernel: &SpectralKernel,
    r: [f64; 3],
    polarized_pos: [f64; 3],
    tol: f64,
) -> Result<f64> {
    let (rho, _) = polar_xy(r, polarized_pos);
    let v = quad_s(1, 0, 0, 0, kernel, rho, r[2], polarized_pos[2], 1.0, tol)?;
    Ok(v / (4.0 * std::f64::consts::PI))
}
