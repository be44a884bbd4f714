//! Free-space Yukawa multipole/local expansions and their translations.
//!
//! The working kernel is `k₀(λ|r − r′|)` (modified spherical Bessel function
//! of the second kind); the physical screened-Coulomb potential
//! `e^{−λr}/(4περ)` is recovered by one global factor
//! [`physical_prefactor`]. A multipole expansion (ME) about a source center
//! collects `M_{nm} = 4π iₙ(λ r′) conj(Yₙᵐ)` and is evaluated through
//! `kₙ(λr)Yₙᵐ`; a local expansion (LE) swaps the roles. Translations use the
//! two addition-theorem matrix families: `Ŝ` (inner-to-inner, used by both
//! M2M and L2L) and `S` (outer-to-inner, used by M2L), both finite sums over
//! Gaunt coefficients.
//!
//! To keep coefficients well-conditioned across octree levels, stored
//! coefficients are *scaled*: `M̂_{nm} = M_{nm}/Sⁿ` and `L̂_{nm} = L_{nm}Sⁿ`
//! for a box-size scale `S`. The translation-matrix builders absorb the
//! corresponding `S` powers, so FMM code only ever moves scaled vectors.

use crate::special_fn::{
    mod_bessel_i_seq, mod_bessel_k_seq, nm_index, spherical_coords, ynm_all, GauntTable,
};
use crate::{PbfmmError, Result};
use num_complex::Complex64;

/// Expansion family: multipole (sources inside, evaluated outside) or local
/// (sources outside, evaluated inside).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    Multipole,
    Local,
}

/// A truncated expansion with scaled coefficients in the flat
/// [`nm_index`] layout (`(p+1)²` entries).
#[derive(Debug, Clone)]
pub struct Expansion {
    pub kind: ExpansionKind,
    pub center: [f64; 3],
    /// Box-size scale `S` of the stored (scaled) coefficients.
    pub s: f64,
    /// Screening parameter `λ` of the kernel.
    pub lam: f64,
    pub p: usize,
    pub coeffs: Vec<Complex64>,
}

/// Conversion from `k₀(λr)` kernel units to the physical potential
/// `e^{−λr}/(4πεr)`: multiply evaluated sums by `λ/(2π²ε)`.
pub fn physical_prefactor(lam: f64, eps: f64) -> f64 {
    lam / (2.0 * std::f64::consts::PI * std::f64::consts::PI * eps)
}

impl Expansion {
    pub fn zero(kind: ExpansionKind, center: [f64; 3], s: f64, lam: f64, p: usize) -> Self {
        Expansion { kind, center, s, lam, p, coeffs: vec![Complex64::default(); (p + 1) * (p + 1)] }
    }

    /// Accumulate another expansion with identical frame (kind, center,
    /// scale, screening, truncation).
    pub fn accumulate(&mut self, other: &Expansion) {
        debug_assert_eq!(self.kind, other.kind);
        debug_assert_eq!(self.p, other.p);
        debug_assert_eq!(self.center, other.center);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()))
    }
}

fn rel(r: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    [r[0] - c[0], r[1] - c[1], r[2] - c[2]]
}

/// Multipole expansion of point charges about `center`:
/// `M̂_{nm} = Σ_j Q_j 4π iₙ(λ r_j′) conj(Yₙᵐ(θ_j′, φ_j′)) / Sⁿ`.
pub fn p2m(
    charges: &[(f64, [f64; 3])],
    center: [f64; 3],
    s: f64,
    lam: f64,
    p: usize,
) -> Result<Expansion> {
    let mut exp = Expansion::zero(ExpansionKind::Multipole, center, s, lam, p);
    let four_pi = 4.0 * std::f64::consts::PI;
    for &(q, pos) in charges {
        let (r, th, ph) = spherical_coords(rel(pos, center));
        let iv = mod_bessel_i_seq(p, lam * r)?;
        let ys = ynm_all(p, th, ph);
        let mut s_pow = 1.0;
        for n in 0..=p {
            let w = four_pi * q * iv[n] / s_pow;
            for m in -(n as i64)..=(n as i64) {
                let idx = nm_index(n, m);
                exp.coeffs[idx] += w * ys[idx].conj();
            }
            s_pow *= s;
        }
    }
    Ok(exp)
}

/// Evaluate a multipole expansion at `r` (in `k₀` kernel units):
/// `Σ M̂_{nm} Sⁿ kₙ(λ r) Yₙᵐ`.
pub fn eval_multipole(exp: &Expansion, r: [f64; 3]) -> Result<f64> {
    debug_assert_eq!(exp.kind, ExpansionKind::Multipole);
    let (rr, th, ph) = spherical_coords(rel(r, exp.center));
    let kv = mod_bessel_k_seq(exp.p, exp.lam * rr)?;
    let ys = ynm_all(exp.p, th, ph);
    let mut acc = Complex64::default();
    let mut s_pow = 1.0;
    for n in 0..=exp.p {
        let w = kv[n] * s_pow;
        for m in -(n as i64)..=(n as i64) {
            let idx = nm_index(n, m);
            acc += exp.coeffs[idx] * ys[idx] * w;
        }
        s_pow *= exp.s;
    }
    Ok(acc.re)
}

/// Local expansion of distant point charges about `center`:
/// `L̂_{nm} = Σ_j Q_j 4π kₙ(λ r_j′) Yₙ^{−m}(θ_j′, φ_j′) · Sⁿ`.
pub fn p2l(
    charges: &[(f64, [f64; 3])],
    center: [f64; 3],
    s: f64,
    lam: f64,
    p: usize,
) -> Result<Expansion> {
    let mut exp = Expansion::zero(ExpansionKind::Local, center, s, lam, p);
    let four_pi = 4.0 * std::f64::consts::PI;
    for &(q, pos) in charges {
        let (r, th, ph) = spherical_coords(rel(pos, center));
        let kv = mod_bessel_k_seq(p, lam * r)?;
        let ys = ynm_all(p, th, ph);
        let mut s_pow = 1.0;
        for n in 0..=p {
            let w = four_pi * q * kv[n] * s_pow;
            for m in -(n as i64)..=(n as i64) {
                exp.coeffs[nm_index(n, m)] += w * ys[nm_index(n, m)].conj();
            }
            s_pow *= s;
        }
    }
    Ok(exp)
}

/// Evaluate a local expansion at `r` (in `k₀` kernel units):
/// `Σ L̂_{nm} S^{−n} iₙ(λ r) Yₙᵐ`.
pub fn eval_local(exp: &Expansion, r: [f64; 3]) -> Result<f64> {
    debug_assert_eq!(exp.kind, ExpansionKind::Local);
    let (rr, th, ph) = spherical_coords(rel(r, exp.center));
    let iv = mod_bessel_i_seq(exp.p, exp.lam * rr)?;
    let ys = ynm_all(exp.p, th, ph);
    let mut acc = Complex64::default();
    let mut s_pow = 1.0;
    for n in 0..=exp.p {
        let w = iv[n] / s_pow;
        for m in -(n as i64)..=(n as i64) {
            let idx = nm_index(n, m);
            acc += exp.coeffs[idx] * ys[idx] * w;
        }
        s_pow *= exp.s;
    }
    Ok(acc.re)
}

/// Dense translation operator on scaled coefficient vectors.
#[derive(Debug, Clone)]
pub struct TranslationMatrix {
    p: usize,
    /// Row-major, `entries[row * dim + col]`, `dim = (p+1)²`.
    entries: Vec<Complex64>,
}

impl TranslationMatrix {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let dim = (self.p + 1) * (self.p + 1);
        debug_assert_eq!(coeffs.len(), dim);
        let mut out = vec![Complex64::default(); dim];
        for (row, o) in out.iter_mut().enumerate() {
            let base = row * dim;
            let mut acc = Complex64::default();
            for (col, c) in coeffs.iter().enumerate() {
                acc += self.entries[base + col] * c;
            }
            *o = acc;
        }
        out
    }

    /// Accumulate `self · coeffs` into `out`.
    pub fn apply_into(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let dim = (self.p + 1) * (self.p + 1);
        for row in 0..dim {
            let base = row * dim;
            let mut acc = Complex64::default();
            for (col, c) in coeffs.iter().enumerate() {
                acc += self.entries[base + col] * c;
            }
            out[row] += acc;
        }
    }
}

/// Scale-power column/row weights: `w[n] = base^n`.
fn powers(base: f64, p: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(p + 1);
    let mut v = 1.0;
    for _ in 0..=p {
        out.push(v);
        v *= base;
    }
    out
}

const ZERO_SHIFT_TOL: f64 = 1e-300;

/// Inner-to-inner addition matrix
/// `Ŝ_{nν}^{mμ}(b) = 4π Σ_q (−1)^{ν−n+m+q} i_q(λb) conj(Y_q^{μ−m}(α,β)) 𝒢(n,m;ν,−μ;q)`
/// for the shift vector `b = (b, α, β)`.
fn shat_entries(gaunt: &GauntTable, b: [f64; 3], lam: f64, p: usize) -> Result<Vec<Complex64>> {
    let dim = (p + 1) * (p + 1);
    let mut out = vec![Complex64::default(); dim * dim];
    let (rb, al, be) = spherical_coords(b);
    if rb < ZERO_SHIFT_TOL {
        for d in 0..dim {
            out[d * dim + d] = Complex64::new(1.0, 0.0);
        }
        return Ok(out);
    }
    let iv = mod_bessel_i_seq(2 * p, lam * rb)?;
    let ys = ynm_all(2 * p, al, be);
    let four_pi = 4.0 * std::f64::consts::PI;
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            for nu in 0..=p {
                for mu in -(nu as i64)..=(nu as i64) {
                    let ladder = gaunt.ladder(n, m, nu, mu);
                    let qlo = n.abs_diff(nu);
                    let mut acc = Complex64::default();
                    for (k, &g) in ladder.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let q = qlo + 2 * k;
                        if (mu - m).unsigned_abs() as usize > q {
                            continue;
                        }
                        let phase = (nu as i64 - n as i64 + m + q as i64).rem_euclid(2);
                        let sgn = if phase == 1 { -1.0 } else { 1.0 };
                        acc += sgn * iv[q] * g * ys[nm_index(q, mu - m)].conj();
                    }
                    out[nm_index(n, m) * dim + nm_index(nu, mu)] = four_pi * acc;
                }
            }
        }
    }
    Ok(out)
}

/// Outer-to-inner addition matrix
/// `S_{nν}^{mμ}(b) = 4π (−1)^{m+ν} Σ_q k_q(λb) conj(Y_q^{μ−m}(α,β)) 𝒢(n,m;ν,−μ;q)`.
fn smat_entries(gaunt: &GauntTable, b: [f64; 3], lam: f64, p: usize) -> Result<Vec<Complex64>> {
    let dim = (p + 1) * (p + 1);
    let mut out = vec![Complex64::default(); dim * dim];
    let (rb, al, be) = spherical_coords(b);
    if rb < ZERO_SHIFT_TOL {
        return Err(PbfmmError::Domain("outer-to-inner translation requires a non-zero shift".into()));
    }
    let kv = mod_bessel_k_seq(2 * p, lam * rb)?;
    let ys = ynm_all(2 * p, al, be);
    let four_pi = 4.0 * std::f64::consts::PI;
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            for nu in 0..=p {
                for mu in -(nu as i64)..=(nu as i64) {
                    let ladder = gaunt.ladder(n, m, nu, mu);
                    let qlo = n.abs_diff(nu);
                    let mut acc = Complex64::default();
                    for (k, &g) in ladder.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let q = qlo + 2 * k;
                        if (mu - m).unsigned_abs() as usize > q {
                            continue;
                        }
                        acc += kv[q] * g * ys[nm_index(q, mu - m)].conj();
                    }
                    let sgn = if (m + nu as i64).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                    out[nm_index(n, m) * dim + nm_index(nu, mu)] = four_pi * sgn * acc;
                }
            }
        }
    }
    Ok(out)
}

/// M2M matrix moving a scaled ME from `(old_center, s_old)` to
/// `(new_center, s_new)`: `M̃̂_{nm} = Σ conj(Ŝ_{nν}^{mμ}(r_old − r_new)) M̂_{νμ} s_old^ν / s_new^n`.
pub fn m2m_matrix(
    gaunt: &GauntTable,
    old_center: [f64; 3],
    new_center: [f64; 3],
    s_old: f64,
    s_new: f64,
    lam: f64,
    p: usize,
) -> Result<TranslationMatrix> {
    let dim = (p + 1) * (p + 1);
    let mut entries = shat_entries(gaunt, rel(old_center, new_center), lam, p)?;
    let col_pow = powers(s_old, p);
    let row_pow = powers(1.0 / s_new, p);
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            for nu in 0..=p {
                for mu in -(nu as i64)..=(nu as i64) {
                    let e = &mut entries[nm_index(n, m) * dim + nm_index(nu, mu)];
                    *e = e.conj() * (col_pow[nu] * row_pow[n]);
                }
            }
        }
    }
    Ok(TranslationMatrix { p, entries })
}

/// L2L matrix moving a scaled LE from `(old_center, s_old)` to
/// `(new_center, s_new)`: `L̃̂_{nm} = Σ Ŝ_{νn}^{μm}(r_new − r_old) L̂_{νμ} s_new^n / s_old^ν`.
pub fn l2l_matrix(
    gaunt: &GauntTable,
    old_center: [f64; 3],
    new_center: [f64; 3],
    s_old: f64,
    s_new: f64,
    lam: f64,
    p: usize,
) -> Result<TranslationMatrix> {
    let dim = (p + 1) * (p + 1);
    let shat = shat_entries(gaunt, rel(new_center, old_center), lam, p)?;
    let row_pow = powers(s_new, p);
    let col_pow = powers(1.0 / s_old, p);
    let mut entries = vec![Complex64::default(); dim * dim];
    for n in 0..=p {
        for m in -(n as i64)..=(n as i64) {
            for nu in 0..=p {
                for mu in -(nu as i64)..=(nu as i64) {
                    // transposed index order: row (n,m) pulls Ŝ_{νn}^{μm}
                    entries[nm_index(n, m) * dim + nm_index(nu, mu)] =
                        shat[nm_index(nu, mu) * dim + nm_index(n, m)] * (row_pow[n] * col_pow[nu]);
                }
            }
        }
    }
    Ok(TranslationMatrix { p, entries })
}

/// M2L matrix converting a scaled ME at `(src_center, s_src)` into a scaled
/// LE at `(tgt_center, s_tgt)`. The outer-to-inner theorem applies in
/// transposed index order — the ME index pairs with the *first* index pair
/// of `S`:
/// `L̂_{νμ} = Σ_{nm} S_{nν}^{mμ}(r_tgt − r_src) M̂_{nm} · s_tgt^ν s_src^n`.
pub fn m2l_matrix(
    gaunt: &GauntTable,
    src_center: [f64; 3],
    tgt_center: [f64; 3],
    s_src: f64,
    s_tgt: f64,
    lam: f64,
    p: usize,
) -> Result<TranslationMatrix> {
    let dim = (p + 1) * (p + 1);
    let smat = smat_entries(gaunt, rel(tgt_center, src_center), lam, p)?;
    let row_pow = powers(s_tgt, p);
    let col_pow = powers(s_src, p);
    let mut entries = vec![Complex64::default(); dim * dim];
    for nu in 0..=p {
        for mu in -(nu as i64)..=(nu as i64) {
            for n in 0..=p {
                let w = row_pow[nu] * col_pow[n];
                for m in -(n as i64)..=(n as i64) {
                    entries[nm_index(nu, mu) * dim + nm_index(n, m)] =
                        smat[nm_index(n, m) * dim + nm_index(nu, mu)] * w;
                }
            }
        }
    }
    Ok(TranslationMatrix { p, entries })
}

/// Re-center a multipole expansion (convenience wrapper over [`m2m_matrix`]).
pub fn m2m(exp: &Expansion, new_center: [f64; 3], s_new: f64, gaunt: &GauntTable) -> Result<Expansion> {
    debug_assert_eq!(exp.kind, ExpansionKind::Multipole);
    let mat = m2m_matrix(gaunt, exp.center, new_center, exp.s, s_new, exp.lam, exp.p)?;
    Ok(Expansion {
        kind: ExpansionKind::Multipole,
        center: new_center,
        s: s_new,
        lam: exp.lam,
        p: exp.p,
        coeffs: mat.apply(&exp.coeffs),
    })
}

/// Re-center a local expansion (convenience wrapper over [`l2l_matrix`]).
pub fn l2l(exp: &Expansion, new_center: [f64; 3], s_new: f64, gaunt: &GauntTable) -> Result<Expansion> {
    debug_assert_eq!(exp.kind, ExpansionKind::Local);
    let mat = l2l_matrix(gaunt, exp.center, new_center, exp.s, s_new, exp.lam, exp.p)?;
    Ok(Expansion {
        kind: ExpansionKind::Local,
        center: new_center,
        s: s_new,
        lam: exp.lam,
        p: exp.p,
        coeffs: mat.apply(&exp.coeffs),
    })
}

/// Convert a multipole expansion into a local expansion about
/// `target_center` (convenience wrapper over [`m2l_matrix`]).
pub fn m2l(
    exp: &Expansion,
    target_center: [f64; 3],
    s_tgt: f64,
    gaunt: &GauntTable,
) -> Result<Expansion> {
    debug_assert_eq!(exp.kind, ExpansionKind::Multipole);
    let mat = m2l_matrix(gaunt, exp.center, target_center, exp.s, s_tgt, exp.lam, exp.p)?;
    Ok(Expansion {
        kind: ExpansionKind::Local,
        center: target_center,
        s: s_tgt,
        lam: exp.lam,
        p: exp.p,
        coeffs: mat.apply(&exp.coeffs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::mod_bessel_k;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_k0(charges: &[(f64, [f64; 3])], r: [f64; 3], lam: f64) -> f64 {
        charges
            .iter()
            .map(|&(q, pos)| {
                let d = ((r[0] - pos[0]).powi(2) + (r[1] - pos[1]).powi(2) + (r[2] - pos[2]).powi(2))
                    .sqrt();
                q * mod_bessel_k(0, lam * d).unwrap()
            })
            .sum()
    }

    fn random_cluster(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<(f64, [f64; 3])> {
        (0..n)
            .map(|_| {
                let q: f64 = rng.gen_range(-1.0..1.0);
                let pos = [
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                ];
                (q, pos)
            })
            .collect()
    }

    #[test]
    fn p2m_point_at_center() {
        let exp = p2m(&[(1.0, [0.0, 0.0, 0.0])], [0.0, 0.0, 0.0], 1.0, 0.8, 4).unwrap();
        let sqrt4pi = (4.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(exp.coeffs[0].re, sqrt4pi, max_relative = 1e-14);
        for idx in 1..exp.coeffs.len() {
            assert!(exp.coeffs[idx].norm() < 1e-300);
        }
        // opposite charges symmetric about center cancel the monopole
        let exp2 = p2m(
            &[(1.0, [0.1, 0.0, 0.05]), (-1.0, [-0.1, 0.0, -0.05])],
            [0.0, 0.0, 0.0],
            1.0,
            0.8,
            4,
        )
        .unwrap();
        assert!(exp2.coeffs[0].norm() < 1e-15);
    }

    #[test]
    fn me_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let charges = random_cluster(&mut rng, 20, 0.3);
        let lam = 0.8;
        let exp = p2m(&charges, [0.0; 3], 0.6, lam, 15).unwrap();
        for target in [[1.6, 0.3, 0.2], [-0.9, 1.2, -0.8], [0.0, 0.0, 1.7]] {
            let got = eval_multipole(&exp, target).unwrap();
            let ex = direct_k0(&charges, target, lam);
            assert_relative_eq!(got, ex, max_relative = 1e-10);
        }
    }

    #[test]
    fn me_rotational_symmetry() {
        // ring of charges symmetric under 90° azimuthal rotation
        let charges: Vec<(f64, [f64; 3])> = (0..4)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 * k as f64;
                (1.0, [0.2 * a.cos(), 0.2 * a.sin(), 0.1])
            })
            .collect();
        let exp = p2m(&charges, [0.0; 3], 1.0, 1.1, 12).unwrap();
        let v1 = eval_multipole(&exp, [1.5, 0.0, 0.3]).unwrap();
        let v2 = eval_multipole(&exp, [0.0, 1.5, 0.3]).unwrap();
        assert_relative_eq!(v1, v2, max_relative = 1e-12);
    }

    #[test]
    fn me_geometric_error_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let charges = random_cluster(&mut rng, 10, 0.4);
        let lam = 1.0;
        let target = [1.3, -0.4, 0.6];
        let ex = direct_k0(&charges, target, lam);
        let errs: Vec<f64> = [4, 8, 12]
            .iter()
            .map(|&p| {
                let exp = p2m(&charges, [0.0; 3], 1.0, lam, p).unwrap();
                (eval_multipole(&exp, target).unwrap() - ex).abs() / ex.abs()
            })
            .collect();
        assert!(errs[1] < 0.2 * errs[0], "{errs:?}");
        assert!(errs[2] < 0.2 * errs[1], "{errs:?}");
    }

    #[test]
    fn le_axisymmetric_and_closed_form() {
        let lam = 0.9;
        // source on +z axis: only m = 0 coefficients survive
        let exp = p2l(&[(1.0, [0.0, 0.0, 2.0])], [0.0; 3], 0.5, lam, 8).unwrap();
        for n in 0..=8_usize {
            for m in -(n as i64)..=(n as i64) {
                if m != 0 {
                    assert!(exp.coeffs[nm_index(n, m)].norm() < 1e-14);
                }
            }
        }
        // closed-form check at 3x box-radius separation
        let src = [(0.7, [1.4, -0.9, 1.1])];
        let exp = p2l(&src, [0.0; 3], 0.4, lam, 15).unwrap();
        for r in [[0.1, 0.05, -0.12], [-0.15, 0.1, 0.02]] {
            let got = eval_local(&exp, r).unwrap();
            let ex = direct_k0(&src, r, lam);
            assert_relative_eq!(got, ex, max_relative = 1e-10);
        }
        // linearity: LE of superposition = sum of LEs
        let a = p2l(&[(1.0, [2.0, 0.0, 0.0])], [0.0; 3], 0.4, lam, 6).unwrap();
        let b = p2l(&[(0.5, [0.0, 2.0, 0.0])], [0.0; 3], 0.4, lam, 6).unwrap();
        let both = p2l(
            &[(1.0, [2.0, 0.0, 0.0]), (0.5, [0.0, 2.0, 0.0])],
            [0.0; 3],
            0.4,
            lam,
            6,
        )
        .unwrap();
        for i in 0..both.coeffs.len() {
            assert!((both.coeffs[i] - a.coeffs[i] - b.coeffs[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn m2m_identity_shift_and_oracle() {
        let gaunt = GauntTable::new(15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let charges = random_cluster(&mut rng, 8, 0.2);
        let lam = 0.8;
        let exp = p2m(&charges, [0.0; 3], 0.5, lam, 15).unwrap();
        // zero shift is the identity
        let same = m2m(&exp, [0.0; 3], 0.5, &gaunt).unwrap();
        for i in 0..exp.coeffs.len() {
            assert!((same.coeffs[i] - exp.coeffs[i]).norm() < 1e-14);
        }
        // shifted ME evaluates identically far away
        let shifted = m2m(&exp, [0.2, -0.1, 0.15], 1.0, &gaunt).unwrap();
        let target = [2.1, 0.4, -0.6];
        let v0 = eval_multipole(&exp, target).unwrap();
        let v1 = eval_multipole(&shifted, target).unwrap();
        assert_relative_eq!(v0, v1, max_relative = 1e-9);
        // two successive shifts equal one combined shift
        let two = m2m(&shifted, [0.3, 0.1, 0.3], 2.0, &gaunt).unwrap();
        let one = m2m(&exp, [0.3, 0.1, 0.3], 2.0, &gaunt).unwrap();
        for i in 0..one.coeffs.len() {
            assert!(
                (two.coeffs[i] - one.coeffs[i]).norm() <= 1e-9 * one.coeffs[i].norm().max(1e-6),
                "idx {i}: {} vs {}",
                two.coeffs[i],
                one.coeffs[i]
            );
        }
    }

    #[test]
    fn m2l_pipeline_matches_closed_form() {
        let gaunt = GauntTable::new(15);
        let lam = 0.8;
        let src_pos = [0.1, 0.05, 0.12];
        let charges = [(1.0, src_pos)];
        let me = p2m(&charges, [0.0; 3], 0.5, lam, 15).unwrap();
        let le = m2l(&me, [1.3, 0.6, 0.9], 0.5, &gaunt).unwrap();
        let le2 = l2l(&le, [1.25, 0.55, 0.95], 0.25, &gaunt).unwrap();
        let target = [1.35, 0.5, 1.0];
        let ex = direct_k0(&charges, target, lam);
        assert_relative_eq!(eval_local(&le, target).unwrap(), ex, max_relative = 1e-8);
        assert_relative_eq!(eval_local(&le2, target).unwrap(), ex, max_relative = 1e-8);
        // zero expansion translates to zero
        let zero = Expansion::zero(ExpansionKind::Multipole, [0.0; 3], 0.5, lam, 15);
        let lz = m2l(&zero, [1.3, 0.6, 0.9], 0.5, &gaunt).unwrap();
        assert!(lz.max_abs() == 0.0);
    }

    #[test]
    fn m2l_reciprocity() {
        // swapping source and target reproduces the reciprocal interaction
        let gaunt = GauntTable::new(12);
        let lam = 1.1;
        let a_pos = [0.1, -0.05, 0.02];
        let b_pos = [2.2, 0.3, -0.4];
        let pipeline = |src: [f64; 3], tgt_box: [f64; 3], tgt: [f64; 3], src_box: [f64; 3]| {
            let me = p2m(&[(1.0, src)], src_box, 0.5, lam, 12).unwrap();
            let le = m2l(&me, tgt_box, 0.5, &gaunt).unwrap();
            eval_local(&le, tgt).unwrap()
        };
        let v_ab = pipeline(a_pos, [2.0, 0.25, -0.3], b_pos, [0.0; 3]);
        let v_ba = pipeline(b_pos, [0.0; 3], a_pos, [2.0, 0.25, -0.3]);
        assert_relative_eq!(v_ab, v_ba, max_relative = 1e-9);
    }

    #[test]
    fn scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let charges = random_cluster(&mut rng, 6, 0.2);
        let lam = 0.9;
        let gaunt = GauntTable::new(10);
        let target = [2.0, -0.3, 0.5];
        let run = |s: f64| {
            let me = p2m(&charges, [0.0; 3], s, lam, 10).unwrap();
            let le = m2l(&me, [1.9, -0.2, 0.4], s, &gaunt).unwrap();
            eval_local(&le, target).unwrap()
        };
        let v1 = run(0.5);
        let v2 = run(1.0);
        assert_relative_eq!(v1, v2, max_relative = 1e-12);
    }

    #[test]
    fn translation_entries_reference_values() {
        // frozen reference entries for the two matrix families
        let gaunt = GauntTable::new(3);
        let b = [-0.2, 0.1, -0.15];
        let sh = shat_entries(&gaunt, b, 0.8, 3).unwrap();
        let dim = 16;
        let pick = |e: &Vec<Complex64>, n: usize, m: i64, nu: usize, mu: i64| {
            e[nm_index(n, m) * dim + nm_index(nu, mu)]
        };
        let refs = [
            (0, 0_i64, 0, 0_i64, Complex64::new(1.0077512945003468, 0.0)),
            (1, 0, 0, 0, Complex64::new(-0.0696040341100692, 0.0)),
            (2, 1, 3, -2, Complex64::new(-1.0787783670660827e-05, 5.9332810188635006e-05)),
            (3, -2, 2, 1, Complex64::new(-1.0787783670660827e-05, -5.9332810188635006e-05)),
            (1, 1, 1, 1, Complex64::new(1.0078583151467966, 0.0)),
        ];
        // reference values were generated in a convention without the
        // Condon-Shortley phase; ours differs by exactly (-1)^{m+mu}
        let conv = |m: i64, mu: i64| if (m + mu).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        for &(n, m, nu, mu, ex) in &refs {
            let got = pick(&sh, n, m, nu, mu);
            let ex = ex * conv(m, mu);
            assert!((got - ex).norm() < 1e-12 * ex.norm().max(1e-8), "Shat({n},{m},{nu},{mu}): {got} vs {ex}");
        }
        let sm = smat_entries(&gaunt, [1.3, 0.6, 0.9], 0.8, 3).unwrap();
        let refs_s = [
            (0, 0_i64, 0, 0_i64, Complex64::new(0.3001096659867072, 0.0)),
            (2, 1, 3, -2, Complex64::new(-62.36787737931201, -222.25929567961637)),
            (1, -1, 2, 0, Complex64::new(-1.332820145493427, 0.6151477594585048)),
        ];
        for &(n, m, nu, mu, ex) in &refs_s {
            let got = pick(&sm, n, m, nu, mu);
            let ex = ex * conv(m, mu);
            assert!((got - ex).norm() < 1e-11 * ex.norm(), "Smat({n},{m},{nu},{mu}): {got} vs {ex}");
        }
    }

    #[test]
    fn gaunt_sum_terminates_exactly() {
        // the q = n+ν+1 term of every translation ladder vanishes exactly
        use crate::special_fn::gaunt;
        for (n, m, nu, mu) in [(2, 1_i64, 3, -2_i64), (4, 0, 4, 3), (5, -4, 2, 1)] {
            assert_eq!(gaunt(n, m, nu, -mu, n + nu + 1), 0.0);
        }
    }
}
