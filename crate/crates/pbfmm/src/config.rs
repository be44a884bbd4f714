//! Run configuration, particle generation, error metrics, and report
//! formatting for the command-line driver.
//!
//! The config file is a plain-text key-value format with three sections:
//!
//! ```text
//! [medium]
//! d   = 0.0, -1.2
//! eps = 1.0, 8.6, 20.5
//! lam = 1.2, 0.5, 2.1
//!
//! [run]
//! p = 8
//! leaf_capacity = 60
//! tol = 1e-12
//! workers = 1
//! seed = 1
//! mode = run
//!
//! [particles]
//! counts = 912, 640, 1296
//! # or: path = particles.txt   (lines of "x y z q")
//! ```

use crate::fmm::RunConfig;
use crate::medium::LayeredMedium;
use crate::{PbfmmError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Execution mode of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Compute potentials and write them out.
    Run,
    /// Compute potentials and compare against the O(N²) oracle.
    Verify,
    /// Time the solver over a ladder of particle counts.
    Scaling,
    /// Reproduce the reaction-ME spectral-convergence experiment.
    Fig3,
}

impl std::str::FromStr for Mode {
    type Err = PbfmmError;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "run" => Ok(Mode::Run),
            "verify" => Ok(Mode::Verify),
            "scaling" => Ok(Mode::Scaling),
            "fig3" => Ok(Mode::Fig3),
            other => Err(PbfmmError::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Where the particles come from.
#[derive(Debug, Clone)]
pub enum ParticleSpec {
    /// Per-layer counts, generated by [`generate_particles`].
    Counts(Vec<usize>),
    /// Text file with one `x y z q` line per particle.
    Path(String),
}

/// Parsed configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub medium: LayeredMedium,
    pub run: RunConfig,
    pub seed: u64,
    pub mode: Mode,
    pub particles: ParticleSpec,
    /// Particle counts used by scaling mode.
    pub scaling_n: Vec<usize>,
}

fn parse_f64_list(v: &str, key: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| PbfmmError::Config(format!("bad number '{t}' for key '{key}'")))
        })
        .collect()
}

fn parse_usize_list(v: &str, key: &str) -> Result<Vec<usize>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| PbfmmError::Config(format!("bad integer '{t}' for key '{key}'")))
        })
        .collect()
}

/// Parse the key-value config text.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut sections: HashMap<String, HashMap<String, String>> = HashMap::new();
    let mut current = String::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            current = line[1..line.len() - 1].trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(PbfmmError::Config(format!("line {}: expected 'key = value'", ln + 1)));
        };
        if current.is_empty() {
            return Err(PbfmmError::Config(format!("line {}: key outside any section", ln + 1)));
        }
        sections
            .get_mut(&current)
            .unwrap()
            .insert(k.trim().to_string(), v.trim().to_string());
    }

    let med = sections
        .get("medium")
        .ok_or_else(|| PbfmmError::Config("missing [medium] section".into()))?;
    let d = parse_f64_list(
        med.get("d").ok_or_else(|| PbfmmError::Config("missing medium.d".into()))?,
        "d",
    )?;
    let eps = parse_f64_list(
        med.get("eps").ok_or_else(|| PbfmmError::Config("missing medium.eps".into()))?,
        "eps",
    )?;
    let lam = parse_f64_list(
        med.get("lam").ok_or_else(|| PbfmmError::Config("missing medium.lam".into()))?,
        "lam",
    )?;
    let medium = LayeredMedium::new(d, eps, lam)?;

    let empty = HashMap::new();
    let run_sec = sections.get("run").unwrap_or(&empty);
    let mut run = RunConfig::default();
    let mut seed = 1_u64;
    let mut mode = Mode::Run;
    for (k, v) in run_sec {
        match k.as_str() {
            "p" => run.p = v.parse().map_err(|_| PbfmmError::Config(format!("bad p '{v}'")))?,
            "leaf_capacity" => {
                run.leaf_capacity =
                    v.parse().map_err(|_| PbfmmError::Config(format!("bad leaf_capacity '{v}'")))?
            }
            "tol" => run.tol = v.parse().map_err(|_| PbfmmError::Config(format!("bad tol '{v}'")))?,
            "mac_sep" => {
                run.mac_sep =
                    v.parse().map_err(|_| PbfmmError::Config(format!("bad mac_sep '{v}'")))?
            }
            "workers" => {
                run.workers =
                    v.parse().map_err(|_| PbfmmError::Config(format!("bad workers '{v}'")))?
            }
            "seed" => seed = v.parse().map_err(|_| PbfmmError::Config(format!("bad seed '{v}'")))?,
            "mode" => mode = v.parse()?,
            other => return Err(PbfmmError::Config(format!("unknown run key '{other}'"))),
        }
    }
    if run.p == 0 {
        return Err(PbfmmError::Config("p must be >= 1".into()));
    }
    if run.leaf_capacity == 0 {
        return Err(PbfmmError::Config("leaf_capacity must be >= 1".into()));
    }

    let part = sections.get("particles").unwrap_or(&empty);
    let particles = if let Some(path) = part.get("path") {
        ParticleSpec::Path(path.clone())
    } else if let Some(counts) = part.get("counts") {
        ParticleSpec::Counts(parse_usize_list(counts, "counts")?)
    } else {
        ParticleSpec::Counts(vec![912, 640, 1296])
    };
    let scaling_n = match part.get("scaling_n") {
        Some(v) => parse_usize_list(v, "scaling_n")?,
        None => vec![25_000, 100_000, 400_000],
    };

    Ok(Config { medium, run, seed, mode, particles, scaling_n })
}

/// Quartic-harmonic boundary radius `r(θ) = 0.5 − a + (a/8)(35cos⁴θ − 30cos²θ + 3)`.
fn domain_radius(a: f64, cos_theta: f64) -> f64 {
    let c2 = cos_theta * cos_theta;
    0.5 - a + a / 8.0 * (35.0 * c2 * c2 - 30.0 * c2 + 3.0)
}

/// Per-layer irregular sample domains: `(center, shape parameter a)`.
/// Index order matches the layer order top-down.
pub const DOMAINS: [([f64; 3], f64); 3] =
    [([0.0, 0.0, 0.6], 0.1), ([0.0, 0.0, -0.6], 0.15), ([0.0, 0.0, -1.8], 0.05)];

/// Rejection-sample `counts[k]` uniform points inside each shifted irregular
/// domain, with alternating ±1 charges. Deterministic for a fixed seed.
pub fn generate_particles(counts: &[usize], seed: u64) -> Result<Vec<(f64, [f64; 3])>> {
    if counts.len() > DOMAINS.len() {
        return Err(PbfmmError::Config(format!(
            "at most {} particle domains supported, got {} counts",
            DOMAINS.len(),
            counts.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(counts.iter().sum());
    let mut sign = 1.0;
    for (k, &n) in counts.iter().enumerate() {
        let (center, a) = DOMAINS[k];
        // the boundary radius never exceeds 0.5 (maximum at cosθ = ±1)
        let rmax = 0.5;
        let mut placed = 0;
        while placed < n {
            let x: f64 = rng.gen_range(-rmax..rmax);
            let y: f64 = rng.gen_range(-rmax..rmax);
            let z: f64 = rng.gen_range(-rmax..rmax);
            let r = (x * x + y * y + z * z).sqrt();
            if r == 0.0 || r > domain_radius(a, z / r) {
                continue;
            }
            out.push((sign, [center[0] + x, center[1] + y, center[2] + z]));
            sign = -sign;
            placed += 1;
        }
    }
    Ok(out)
}

/// Per-layer error metrics against a reference potential.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Relative ℓ² error per layer: `√(Σ|Φ−Φ̃|² / Σ|Φ|²)`.
    pub err2: Vec<f64>,
    /// Maximum relative per-particle error per layer: `max |Φ−Φ̃|/|Φ|`.
    pub err_max: Vec<f64>,
    /// Number of particles per layer.
    pub counts: Vec<usize>,
}

/// Compute Err₂ and Err_max per layer. `layers[i]` assigns particle `i` to a
/// layer; `n_layers` sets the report length.
pub fn compute_errors(
    reference: &[f64],
    approx: &[f64],
    layers: &[usize],
    n_layers: usize,
) -> Result<ErrorReport> {
    if reference.len() != approx.len() || reference.len() != layers.len() {
        return Err(PbfmmError::Config("mismatched lengths in compute_errors".into()));
    }
    let mut num = vec![0.0; n_layers];
    let mut den = vec![0.0; n_layers];
    let mut err_max = vec![0.0_f64; n_layers];
    let mut counts = vec![0usize; n_layers];
    for (i, ((&r, &a), &l)) in reference.iter().zip(approx).zip(layers).enumerate() {
        if r == 0.0 {
            return Err(PbfmmError::ZeroReference(i));
        }
        num[l] += (r - a) * (r - a);
        den[l] += r * r;
        err_max[l] = err_max[l].max((r - a).abs() / r.abs());
        counts[l] += 1;
    }
    let err2 = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| if d > 0.0 { (n / d).sqrt() } else { 0.0 })
        .collect();
    Ok(ErrorReport { err2, err_max, counts })
}

/// Parse a particle file: one particle per line, `x y z q` whitespace
/// separated; blank lines and `#` comments ignored.
pub fn parse_particles(text: &str) -> Result<Vec<(f64, [f64; 3])>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| PbfmmError::Config(format!("particle line {}: bad number '{t}'", ln + 1)))
            })
            .collect::<Result<_>>()?;
        if f.len() != 4 {
            return Err(PbfmmError::Config(format!(
                "particle line {}: expected 4 fields 'x y z q', got {}",
                ln + 1,
                f.len()
            )));
        }
        out.push((f[3], [f[0], f[1], f[2]]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SAMPLE: &str = "\
[medium]
d   = 0.0, -1.2
eps = 1.0, 8.6, 20.5
lam = 1.2, 0.5, 2.1

[run]
p = 10
seed = 7
mode = verify

[particles]
counts = 10, 20, 30
";

    #[test]
    fn parses_sample_config() {
        let cfg = parse_config(SAMPLE).unwrap();
        assert_eq!(cfg.medium.n_layers(), 3);
        assert_eq!(cfg.run.p, 10);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.mode, Mode::Verify);
        match cfg.particles {
            ParticleSpec::Counts(c) => assert_eq!(c, vec![10, 20, 30]),
            _ => panic!("expected counts"),
        }
        assert!(parse_config("[run]\np = x\n").is_err());
        assert!(parse_config("[medium]\nd = 0\neps = 1,2\nlam = 1,2\n[run]\nfoo = 1\n").is_err());
    }

    #[test]
    fn particles_deterministic_and_contained() {
        let a = generate_particles(&[912, 640, 1296], 42).unwrap();
        let b = generate_particles(&[912, 640, 1296], 42).unwrap();
        assert_eq!(a.len(), 912 + 640 + 1296);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.0, y.0);
            assert_eq!(x.1, y.1);
        }
        // layer containment
        for (i, &(_, pos)) in a.iter().enumerate() {
            if i < 912 {
                assert!(pos[2] > 0.0);
            } else if i < 912 + 640 {
                assert!(pos[2] < 0.0 && pos[2] > -1.2);
            } else {
                assert!(pos[2] < -1.2);
            }
        }
        // containment in the irregular domain
        for &(_, pos) in a.iter().take(912) {
            let x = pos[0];
            let y = pos[1];
            let z = pos[2] - 0.6;
            let r = (x * x + y * y + z * z).sqrt();
            assert!(r <= domain_radius(0.1, z / r) + 1e-12);
        }
        // charges alternate within the full sequence
        let total: f64 = a.iter().map(|p| p.0).sum();
        assert!(total.abs() <= 1.0);
        let diff = generate_particles(&[10], 1).unwrap();
        let diff2 = generate_particles(&[10], 2).unwrap();
        assert!(diff.iter().zip(&diff2).any(|(u, v)| u.1 != v.1));
    }

    #[test]
    fn error_metrics() {
        let layers = vec![0, 0, 1, 1];
        let refv = vec![1.0, 2.0, -1.0, 4.0];
        let same = compute_errors(&refv, &refv, &layers, 2).unwrap();
        assert_eq!(same.err2, vec![0.0, 0.0]);
        assert_eq!(same.err_max, vec![0.0, 0.0]);
        let approx: Vec<f64> = refv.iter().map(|v| 1.01 * v).collect();
        let rep = compute_errors(&refv, &approx, &layers, 2).unwrap();
        for l in 0..2 {
            assert_relative_eq!(rep.err2[l], 0.01, max_relative = 1e-12);
            assert_relative_eq!(rep.err_max[l], 0.01, max_relative = 1e-12);
        }
        // hand-computed perturbation
        let approx2 = vec![1.1, 2.0, -1.0, 4.0];
        let rep2 = compute_errors(&refv, &approx2, &layers, 2).unwrap();
        assert_relative_eq!(rep2.err2[0], (0.01_f64 / 5.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(rep2.err_max[0], 0.1, max_relative = 1e-12);
        assert!(matches!(
            compute_errors(&[0.0], &[1.0], &[0], 1),
            Err(PbfmmError::ZeroReference(0))
        ));
    }

    #[test]
    fn particle_file_roundtrip() {
        let text = "# comment\n0.1 0.2 0.3 1.0\n-0.5 0 2.5 -1\n";
        let ps = parse_particles(text).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0], (1.0, [0.1, 0.2, 0.3]));
        assert_eq!(ps[1], (-1.0, [-0.5, 0.0, 2.5]));
        assert!(parse_particles("1 2 3\n").is_err());
    }
}
