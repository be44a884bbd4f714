//! Scaled Sommerfeld-type integral tables for the reaction-field operators.
//!
//! Every reaction translation operator reduces to real integrals
//!
//! ```text
//! Ĩ_{nm,νμ}^{𝔞𝔟}(ρ, z, z′) = ∫₀^∞ λ_ρ J_{μ−m}(λ_ρ ρ) 𝒵^±(z, z′)
//!                              σ^{𝔞𝔟}(λ_ρ)/λ_{ℓz}
//!                              R_n^{|m|}(λ_{ℓz}/λ_ℓ) R_ν^{|μ|}(λ_{ℓ′z}/λ_{ℓ′}) dλ_ρ ,
//! ```
//!
//! where `R_n^k` is the spectral-argument normalized Legendre function and
//! `𝒵^±` the exponentially decaying vertical kernel. Rather than evaluating
//! one oscillatory integral per `(n, m, ν, μ)`, the Legendre product is
//! expanded into powers of `λ_ρ`, reducing all of them to the much smaller
//! family of *scaled Sommerfeld-type integrals*
//!
//! ```text
//! Sⁿ𝒮_{n,m,ij}(ρ, z, z′) = ∫₀^∞ (λ_ρ S)ⁿ/√((n+m)!(n−m)!) · J_m(λ_ρ ρ)
//!                           𝒵^± σ/λ_{ℓz} (λ_ℓ/λ_{ℓz})ⁱ(λ_{ℓ′}/λ_{ℓ′z})ʲ dλ_ρ ,
//! ```
//!
//! computed by composite Gauss–Legendre quadrature for two initial rows and
//! then propagated over the whole `(n, m)` triangle by the Bessel three-term
//! recurrence — forward where it is stable (large `ρ/S`), backward from a
//! quadrature top row elsewhere.

use crate::medium::LayeredMedium;
use crate::special_fn::{bessel_j_seq, ln_factorial, tri_index};
use crate::{PbfmmError, Result};

/// Spectral integrand family for one reaction component and layer pair.
///
/// `a = 1` selects the downward-decaying kernel `𝒵⁺` anchored at the
/// interface below the target layer `l`; `a = 2` selects `𝒵⁻` anchored at
/// the interface above. `b` selects which source trace drives the density
/// `σ^{𝔞𝔟}_{ℓℓ′}`.
#[derive(Debug, Clone)]
pub struct SpectralKernel<'a> {
    medium: &'a LayeredMedium,
    a: usize,
    b: usize,
    /// Target layer `ℓ`.
    l: usize,
    /// Source layer `ℓ′`.
    lp: usize,
}

impl<'a> SpectralKernel<'a> {
    pub fn new(medium: &'a LayeredMedium, a: usize, b: usize, l: usize, lp: usize) -> Result<Self> {
        let ab = match (a, b) {
            (1, 1) => "11",
            (1, 2) => "12",
            (2, 1) => "21",
            (2, 2) => "22",
            _ => return Err(PbfmmError::Domain(format!("component indices ({a},{b}) out of range"))),
        };
        if l >= medium.n_layers() || lp >= medium.n_layers() {
            return Err(PbfmmError::Domain(format!("layer pair ({l},{lp}) out of range")));
        }
        // a=1 needs the interface below layer l; a=2 the one above.
        // b likewise constrains the source layer.
        if (a == 1 && l >= medium.n_interfaces())
            || (a == 2 && l == 0)
            || (b == 1 && lp >= medium.n_interfaces())
            || (b == 2 && lp == 0)
        {
            return Err(PbfmmError::InadmissibleComponent { ab, l, lp });
        }
        Ok(SpectralKernel { medium, a, b, l, lp })
    }

    pub fn medium(&self) -> &LayeredMedium {
        self.medium
    }

    pub fn component(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn layers(&self) -> (usize, usize) {
        (self.l, self.lp)
    }

    /// Vertical offsets `(u, v)` such that `𝒵^± = e^{−λ_{ℓz}u − λ_{ℓ′z}v}`.
    /// Both must be non-negative with positive sum for convergence.
    pub fn offsets(&self, z: f64, zp: f64) -> Result<(f64, f64)> {
        let (u, v) = if self.a == 1 {
            let d = self.medium.interface(self.l);
            (z - d, d - zp)
        } else {
            let d = self.medium.interface(self.l - 1);
            (d - z, zp - d)
        };
        if u < 0.0 || v < 0.0 || u + v <= 0.0 {
            return Err(PbfmmError::DivergentIntegral(u.min(v).min(u + v)));
        }
        Ok((u, v))
    }

    /// Exponential decay rate of the integrand as `λ_ρ → ∞`.
    pub fn decay_exponent(&self, z: f64, zp: f64) -> Result<f64> {
        let (u, v) = self.offsets(z, zp)?;
        Ok(u + v)
    }

    /// Density value `σ^{𝔞𝔟}_{ℓℓ′}(λ_ρ)`.
    fn sigma(&self, lambda_rho: f64) -> Result<f64> {
        Ok(self.medium.densities(self.lp, lambda_rho)?.get(self.a, self.b, self.l))
    }
}

/// Upper quadrature limit such that the integrand envelope
/// `e^{−δ·x}(1+x)^deg` has dropped below `tol` for all `x ≥ Xmax`.
fn xmax_for(delta: f64, poly_deg: usize, tol: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(PbfmmError::DivergentIntegral(delta));
    }
    let deg = poly_deg as f64;
    let target = tol.ln();
    let env = |x: f64| -delta * x + deg * (1.0 + x).ln();
    // env is eventually decreasing; bracket the crossing by doubling.
    let mut hi = (-target / delta).max(1.0);
    while env(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if env(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Upper quadrature limit for `kernel` at the vertical geometry `(z, z′)`.
/// The polynomial margin covers integrand degrees up to 31 (enough for
/// truncation numbers up to `p = 14`).
pub fn choose_xmax(kernel: &SpectralKernel, z: f64, zp: f64, tol: f64) -> Result<f64> {
    xmax_for(kernel.decay_exponent(z, zp)?, 31, tol)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(t) and its derivative by upward recurrence.
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

const NODES_PER_PANEL: usize = 16;
const MAX_REFINEMENTS: usize = 7;

/// Evaluate a batch of scaled Sommerfeld integrals sharing one geometry on
/// one composite grid. `entries` lists the `(n, m)` pairs; the result holds
/// all four `(i, j)` parity variants per entry, indexed `j + 2i`.
fn quad_batch_once(
    kernel: &SpectralKernel,
    entries: &[(usize, usize)],
    rho: f64,
    u: f64,
    v: f64,
    s: f64,
    xmax: f64,
    panel_len: f64,
) -> Result<Vec<[f64; 4]>> {
    let (gx, gw) = gauss_legendre(NODES_PER_PANEL);
    let nmax = entries.iter().map(|&(n, _)| n).max().unwrap_or(0);
    let mmax = entries.iter().map(|&(_, m)| m).max().unwrap_or(0);
    let inv_norm: Vec<f64> = entries
        .iter()
        .map(|&(n, m)| (-0.5 * (ln_factorial(n + m) + ln_factorial(n - m))).exp())
        .collect();
    let lam_t = kernel.medium.lam(kernel.l);
    let lam_s = kernel.medium.lam(kernel.lp);
    let n_panels = (xmax / panel_len).ceil() as usize;
    let mut acc = vec![[0.0; 4]; entries.len()];
    let mut powers = vec![0.0; nmax + 1];
    for ip in 0..n_panels {
        let a0 = ip as f64 * panel_len;
        let b0 = (a0 + panel_len).min(xmax);
        let half = 0.5 * (b0 - a0);
        let mid = 0.5 * (a0 + b0);
        for k in 0..NODES_PER_PANEL {
            let lr = mid + half * gx[k];
            let wt = half * gw[k];
            let lz_t = lam_t.hypot(lr);
            let lz_s = lam_s.hypot(lr);
            let sig = kernel.sigma(lr)?;
            let q = wt * sig / lz_t * (-lz_t * u - lz_s * v).exp();
            if q == 0.0 {
                continue;
            }
            let js = bessel_j_seq(mmax, lr * rho)?;
            let pi_ = lam_t / lz_t;
            let pj_ = lam_s / lz_s;
            let facs = [1.0, pj_, pi_, pi_ * pj_];
            let x = lr * s;
            if nmax as f64 * x.ln() < 650.0 {
                powers[0] = 1.0;
                for n in 1..=nmax {
                    powers[n] = powers[n - 1] * x;
                }
                for (e, &(n, m)) in entries.iter().enumerate() {
                    let t0 = q * powers[n] * inv_norm[e] * js[m];
                    for (slot, &f) in facs.iter().enumerate() {
                        acc[e][slot] += t0 * f;
                    }
                }
            } else {
                // log-space fallback against overflow of the bare power
                let ln_q = q.abs().ln();
                let sq = q.signum();
                for (e, &(n, m)) in entries.iter().enumerate() {
                    let mag = (ln_q + n as f64 * x.ln() + inv_norm[e].ln()).exp();
                    let t0 = sq * mag * js[m];
                    for (slot, &f) in facs.iter().enumerate() {
                        acc[e][slot] += t0 * f;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Batch quadrature with adaptive panel halving until two successive
/// refinements agree to `tol` (absolute, relative to the table magnitude).
fn quad_batch(
    kernel: &SpectralKernel,
    entries: &[(usize, usize)],
    rho: f64,
    z: f64,
    zp: f64,
    s: f64,
    tol: f64,
) -> Result<Vec<[f64; 4]>> {
    let (u, v) = kernel.offsets(z, zp)?;
    let nmax = entries.iter().map(|&(n, _)| n).max().unwrap_or(0);
    let xmax = xmax_for(u + v, nmax + 1, tol)?;
    let mut panel_len = (std::f64::consts::PI / (rho + 1e-9)).min(1.0);
    let mut prev = quad_batch_once(kernel, entries, rho, u, v, s, xmax, panel_len)?;
    for _ in 0..MAX_REFINEMENTS {
        panel_len *= 0.5;
        let next = quad_batch_once(kernel, entries, rho, u, v, s, xmax, panel_len)?;
        let mut diff = 0.0_f64;
        let mut scale = 0.0_f64;
        for (a, b) in prev.iter().zip(&next) {
            for slot in 0..4 {
                diff = diff.max((a[slot] - b[slot]).abs());
                scale = scale.max(b[slot].abs());
            }
        }
        if diff <= tol * (1.0 + scale) {
            return Ok(next);
        }
        prev = next;
    }
    Err(PbfmmError::ToleranceNotMet(format!(
        "Sommerfeld quadrature did not converge to {tol} within {MAX_REFINEMENTS} refinements"
    )))
}

/// Batch of scaled Sommerfeld integrals `Sⁿ𝒮_{n,m,ij}` by direct
/// quadrature: one `[i j]`-indexed quadruple per requested `(n, m)` entry,
/// all evaluated on one shared adaptive grid.
pub fn quad_s_all(
    kernel: &SpectralKernel,
    entries: &[(usize, usize)],
    rho: f64,
    z: f64,
    zp: f64,
    s: f64,
    tol: f64,
) -> Result<Vec<[f64; 4]>> {
    quad_batch(kernel, entries, rho, z, zp, s, tol)
}

/// Single scaled Sommerfeld integral `Sⁿ𝒮_{n,m,ij}` by direct quadrature.
pub fn quad_s(
    n: usize,
    m: usize,
    i: usize,
    j: usize,
    kernel: &SpectralKernel,
    rho: f64,
    z: f64,
    zp: f64,
    s: f64,
    tol: f64,
) -> Result<f64> {
    if m > n {
        return Err(PbfmmError::Domain(format!("order m={m} exceeds degree n={n}")));
    }
    let vals = quad_batch(kernel, &[(n, m)], rho, z, zp, s, tol)?;
    Ok(vals[0][j + 2 * i])
}

/// Table of scaled Sommerfeld integrals `Sⁿ𝒮_{n,m,ij}` for one translation
/// geometry, covering `0 ≤ m ≤ n ≤ 2p+3` and all four parity variants.
#[derive(Debug, Clone)]
pub struct SommerfeldTable {
    nmax: usize,
    s: f64,
    rho: f64,
    /// Entry layout: `vals[tri_index(n, m)][j + 2i]`.
    vals: Vec<[f64; 4]>,
}

fn a_rec(n: usize) -> f64 {
    ((n * (n + 1)) as f64).sqrt()
}

/// Forward recurrence stability predicate for computing the `(n, m+1)` entry
/// from `(n-1, m)` and `(n, m-1)` at relative offset `S_ρ = ρ/S`.
pub fn forward_stable(n: usize, m: usize, s_rho: f64) -> bool {
    let mf = m as f64;
    (n as f64) > 2.0 * (mf * mf / (s_rho * s_rho) + 1.0).sqrt() - mf - 0.5
}

impl SommerfeldTable {
    /// Build the full table: quadrature for the initial rows (`m ≤ 1` and the
    /// top row `n = 2p+3`), then the backward recurrence everywhere, then the
    /// forward recurrence overwriting entries inside its stability region.
    pub fn build(
        kernel: &SpectralKernel,
        rho: f64,
        z: f64,
        zp: f64,
        s: f64,
        p: usize,
        tol: f64,
    ) -> Result<Self> {
        if s <= 0.0 || rho < 0.0 {
            return Err(PbfmmError::Domain(format!("invalid table geometry rho={rho} S={s}")));
        }
        let nmax = 2 * p + 3;
        let mut entries: Vec<(usize, usize)> = (0..=nmax).map(|n| (n, 0)).collect();
        entries.extend((1..=nmax).map(|n| (n, 1)));
        entries.extend((2..=nmax).map(|m| (nmax, m)));
        let init = quad_batch(kernel, &entries, rho, z, zp, s, tol)?;
        let mut table = SommerfeldTable {
            nmax,
            s,
            rho,
            vals: vec![[0.0; 4]; tri_index(nmax, nmax) + 1],
        };
        for (&(n, m), v) in entries.iter().zip(&init) {
            table.vals[tri_index(n, m)] = *v;
        }
        if rho > 0.0 {
            table.fill_backward();
            table.fill_forward()?;
        } else {
            // J_m(0) = 0 for m > 0: enforce the exact zeros.
            for n in 0..=nmax {
                for m in 1..=n {
                    table.vals[tri_index(n, m)] = [0.0; 4];
                }
            }
        }
        for v in &table.vals {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(PbfmmError::StabilityViolation(
                    "non-finite Sommerfeld table entry".into(),
                ));
            }
        }
        Ok(table)
    }

    /// Backward recurrence from the quadrature top row, filling the whole
    /// triangle without ever dividing by `ρ` (stable as `ρ → 0`). Quadrature
    /// initials (rows `m ≤ 1`, top row) are left untouched.
    pub fn fill_backward(&mut self) {
        let r = self.rho / self.s;
        for n in (1..=self.nmax).rev() {
            for m in 1..n {
                if m <= 1 {
                    continue; // initial data
                }
                let up = self.vals[tri_index(n, m + 1)];
                let dn = self.vals[tri_index(n, m - 1)];
                let cu = a_rec(n + m) / (2.0 * m as f64) * r;
                let cd = a_rec(n - m) / (2.0 * m as f64) * r;
                let dst = &mut self.vals[tri_index(n - 1, m)];
                for slot in 0..4 {
                    dst[slot] = cu * up[slot] + cd * dn[slot];
                }
            }
        }
    }

    /// Forward recurrence in increasing `m`, overwriting entries for which
    /// the stability predicate holds. Errors when `ρ = 0` (the formula
    /// divides by `ρ`).
    pub fn fill_forward(&mut self) -> Result<()> {
        if self.rho <= 0.0 {
            return Err(PbfmmError::StabilityViolation(
                "forward Sommerfeld recurrence requires rho > 0".into(),
            ));
        }
        let s_rho = self.rho / self.s;
        for m in 1..self.nmax {
            for n in (m + 1)..self.nmax {
                // target entry (n, m+1); skip the quadrature top row
                if !forward_stable(n, m, s_rho) {
                    continue;
                }
                let lo = self.vals[tri_index(n - 1, m)];
                let prev = self.vals[tri_index(n, m - 1)];
                let c1 = 2.0 * m as f64 / a_rec(n + m) / s_rho;
                let c2 = a_rec(n - m) / a_rec(n + m);
                let dst = &mut self.vals[tri_index(n, m + 1)];
                for slot in 0..4 {
                    dst[slot] = c1 * lo[slot] - c2 * prev[slot];
                }
            }
        }
        Ok(())
    }

    /// Largest degree stored, `2p + 3`.
    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Scale `S` the table was built with.
    pub fn scale(&self) -> f64 {
        self.s
    }

    /// `Sⁿ𝒮_{n,m,ij}` with `i, j ∈ {0, 1}`.
    pub fn get(&self, n: usize, m: usize, i: usize, j: usize) -> Result<f64> {
        if n > self.nmax || m > n || i > 1 || j > 1 {
            return Err(PbfmmError::TableUnderflow(format!(
                "(n={n}, m={m}, i={i}, j={j}) outside table extent nmax={}",
                self.nmax
            )));
        }
        Ok(self.vals[tri_index(n, m)][j + 2 * i])
    }

    #[cfg(test)]
    pub(crate) fn scale_values(&mut self, c: f64) {
        for v in &mut self.vals {
            for slot in v.iter_mut() {
                *slot *= c;
            }
        }
    }
}

/// Coefficients of the Legendre-product expansion
/// `R_n^{|m|}(λ_{ℓz}/λ_ℓ) R_ν^{|μ|}(λ_{ℓ′z}/λ_{ℓ′})
///  = Σ_s D^s λ_ρ^{|m|+|μ|+2s} (λ_ℓ/λ_{ℓz})ⁱ (λ_{ℓ′}/λ_{ℓ′z})ʲ`,
/// together with the assembled weights pairing each power with the matching
/// normalized Sommerfeld table entry.
#[derive(Debug, Clone)]
pub struct LegendreProductCoeffs {
    pub n: usize,
    pub m: i64,
    pub nu: usize,
    pub mu: i64,
    /// Parity exponents `i = (n+|m|) mod 2`, `j = (ν+|μ|) mod 2`.
    pub i: usize,
    pub j: usize,
    /// Bessel order `μ − m` of the paired Sommerfeld entries.
    pub m_prime: i64,
    /// Raw power-series coefficients `D^s`, `s = 0 … n−r+ν−r′`.
    pub d: Vec<f64>,
    /// Assembly weights `C̃^s` (absorbing the √-factorial normalization and
    /// the negative-order Bessel sign), pairing with
    /// `𝒮_{|m|+|μ|+2s+1, |μ−m|, ij}`.
    pub ctil: Vec<f64>,
}

/// Expansion coefficient `a_{nm}^j` of the normalized Legendre polynomial
/// part; zero when `2j − n − m < 0`.
fn a_coef(n: usize, m: usize, j: usize) -> f64 {
    if 2 * j < n + m || j > n {
        return 0.0;
    }
    let ln_c = 0.5
        * (((2 * n + 1) as f64).ln() - (4.0 * std::f64::consts::PI).ln() + ln_factorial(n - m)
            - ln_factorial(n + m));
    let ln_mag = ln_factorial(2 * j) + ln_c
        - n as f64 * std::f64::consts::LN_2
        - ln_factorial(j)
        - ln_factorial(n - j)
        - ln_factorial(2 * j - n - m);
    let sgn = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
    sgn * ln_mag.exp()
}

/// Binomial-resummed coefficient `β_t(n, m; λ)` of `λ_ρ^{m+2t}` in the
/// spectral Legendre function (with the parity factor split off).
fn beta_coef(n: usize, m: usize, t: usize, lam: f64) -> f64 {
    let r = (n + m) / 2;
    let mut sum = 0.0;
    for j in (n + m).div_ceil(2).max(r + t)..=n {
        sum += a_coef(n, m, j) * binom(j - r, t);
    }
    sum / lam.powi((m + 2 * t) as i32)
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}

/// Legendre-product expansion coefficients for degrees `(n, m)` (target,
/// screening `λ_ℓ`) and `(ν, μ)` (source, screening `λ_{ℓ′}`).
pub fn legendre_product(
    n: usize,
    m: i64,
    nu: usize,
    mu: i64,
    lam_t: f64,
    lam_s: f64,
) -> LegendreProductCoeffs {
    let am = m.unsigned_abs() as usize;
    let amu = mu.unsigned_abs() as usize;
    let r = (n + am) / 2;
    let rp = (nu + amu) / 2;
    let i = (n + am) % 2;
    let j = (nu + amu) % 2;
    let m_prime = mu - m;
    let len = n - r + nu - rp + 1;
    let mut d = Vec::with_capacity(len);
    let mut ctil = Vec::with_capacity(len);
    let sgn = if m_prime < 0 && m_prime.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    for s in 0..len {
        let t_lo = (s + rp).saturating_sub(nu);
        let t_hi = s.min(n - r);
        let mut d0 = 0.0;
        for t in t_lo..=t_hi {
            d0 += beta_coef(n, am, t, lam_t) * beta_coef(nu, amu, s - t, lam_s);
        }
        d.push(d0);
        let npr = am + amu + 2 * s + 1;
        let mp = m_prime.unsigned_abs() as usize;
        let lf = 0.5 * (ln_factorial(npr + mp) + ln_factorial(npr - mp));
        ctil.push(sgn * d0 * lf.exp());
    }
    LegendreProductCoeffs { n, m, nu, mu, i, j, m_prime, d, ctil }
}

/// Assemble the scaled translation integral `S^{n+ν}·Ĩ_{nm,νμ}` from a
/// Sommerfeld table and the matching Legendre-product coefficients.
///
/// The `S^{n+ν}` factor is exactly what pairs a scaled multipole coefficient
/// `M̂_{nm} = M_{nm}/Sⁿ` with a scaled local coefficient `L̂_{νμ} = L_{νμ}Sᵛ`;
/// the table stores `S^{n′}𝒮_{n′}` with a per-term degree `n′`, so each term
/// carries the residual power `S^{n+ν−n′}`.
pub fn assemble_i(coeffs: &LegendreProductCoeffs, table: &SommerfeldTable) -> Result<f64> {
    let am = coeffs.m.unsigned_abs() as usize;
    let amu = coeffs.mu.unsigned_abs() as usize;
    let mp = coeffs.m_prime.unsigned_abs() as usize;
    let target_pow = (coeffs.n + coeffs.nu) as i32;
    let mut sum = 0.0;
    for (s, &c) in coeffs.ctil.iter().enumerate() {
        let npr = am + amu + 2 * s + 1;
        let residual = table.scale().powi(target_pow - npr as i32);
        sum += c * residual * table.get(npr, mp, coeffs.i, coeffs.j)?;
    }
    Ok(sum)
}

/// Cache of [`LegendreProductCoeffs`] for all `(n, m, ν, μ)` with
/// `n, ν ≤ p`, for one ordered layer pair (target `λ_ℓ`, source `λ_{ℓ′}`).
/// Building the coefficients is pure arithmetic on `(n, m, ν, μ)` and the
/// two screening constants, so one cache serves every translation geometry.
#[derive(Debug, Clone)]
pub struct ProductCoeffTable {
    p: usize,
    coeffs: Vec<LegendreProductCoeffs>,
}

impl ProductCoeffTable {
    pub fn new(p: usize, lam_t: f64, lam_s: f64) -> Self {
        let dim = (p + 1) * (p + 1);
        let mut coeffs = Vec::with_capacity(dim * dim);
        // iteration order coincides with the flat nm_index-major layout
        for n in 0..=p {
            for m in -(n as i64)..=(n as i64) {
                for nu in 0..=p {
                    for mu in -(nu as i64)..=(nu as i64) {
                        coeffs.push(legendre_product(n, m, nu, mu, lam_t, lam_s));
                    }
                }
            }
        }
        ProductCoeffTable { p, coeffs }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, n: usize, m: i64, nu: usize, mu: i64) -> &LegendreProductCoeffs {
        let dim = (self.p + 1) * (self.p + 1);
        &self.coeffs[crate::special_fn::nm_index(n, m) * dim + crate::special_fn::nm_index(nu, mu)]
    }
}
