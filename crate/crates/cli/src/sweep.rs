//! Stability over the triangle of normalized masses `m1 + m2 + m3 = 1`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use releq::criteria::{classify_homogeneous, classify_quasihomogeneous, critical_radii, mass_function_f, quasihomogeneous_region};
use releq::{MassVector, PotentialSpec};

use crate::error::{CliError, Result};

/// Angular samples per level curve.
const LEVEL_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Lattice points per barycentric edge.
    pub grid_resolution: usize,
    pub potential: PotentialSpec,
    /// Fixed triangle side; without it a quasihomogeneous sweep reports the
    /// size-independent regions.
    pub r0: Option<f64>,
    /// Values `c` of the level curves `f = c` to emit.
    pub levels: Vec<f64>,
    pub output_path: PathBuf,
    pub format: Format,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 2 {
            return Err(CliError::Usage(format!(
                "resolution must be at least 2, got {}",
                self.grid_resolution
            )));
        }
        if let Some(c) = self.levels.iter().find(|c| !(**c > 0.0 && **c <= 1.0 / 3.0)) {
            return Err(CliError::Usage(format!("level {c} outside (0, 1/3]")));
        }
        if let Some(r0) = self.r0 {
            if !(r0.is_finite() && r0 > 0.0) {
                return Err(CliError::Usage(format!("r0 must be positive, got {r0}")));
            }
            if self.potential.is_homogeneous() {
                return Err(CliError::Usage(
                    "--r0 has no effect for a homogeneous potential; drop it or pass --b".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    /// Lattice coordinates, `i + j + k = resolution`.
    pub lattice: [usize; 3],
    pub masses: [f64; 3],
    pub f: f64,
    pub class: &'static str,
    pub g: Option<f64>,
    /// Side at which stability changes (`r0*` or `z1*`).
    pub r0_crit: Option<f64>,
}

/// Interior lattice points `(i, j, k)`, `i, j, k >= 1`, in lexicographic
/// order of `(i, j)`.
pub fn grid(resolution: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 1..resolution {
        for j in 1..resolution - i {
            out.push([i, j, resolution - i - j]);
        }
    }
    out
}

fn evaluate(lattice: [usize; 3], resolution: usize, spec: &PotentialSpec, r0: Option<f64>) -> Result<SweepPoint> {
    let n = resolution as f64;
    let masses = lattice.map(|x| x as f64 / n);
    let mv = MassVector::new(masses.to_vec())?;
    let f = mass_function_f(&mv);
    let (class, g, r0_crit) = match (*spec, r0) {
        (PotentialSpec::Homogeneous { a }, _) => (classify_homogeneous(&mv, a)?.classification.label(), None, None),
        (PotentialSpec::Quasihomogeneous { a, b }, Some(r0)) => {
            let r = classify_quasihomogeneous(&mv, a, b, r0)?;
            (
                r.classification.label(),
                r.g_value,
                r.critical_radii.and_then(|c| c.threshold()),
            )
        }
        (PotentialSpec::Quasihomogeneous { a, b }, None) => (
            quasihomogeneous_region(f, a, b).label(),
            None,
            critical_radii(f, a, b).threshold(),
        ),
    };
    Ok(SweepPoint {
        lattice,
        masses,
        f,
        class,
        g,
        r0_crit,
    })
}

/// Classifies every grid point (in parallel); the result is in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    grid(config.grid_resolution)
        .into_par_iter()
        .map(|p| evaluate(p, config.grid_resolution, &config.potential, config.r0))
        .collect()
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: &mut W, points: &[SweepPoint], spec: &PotentialSpec) -> std::io::Result<()> {
    let extra = !spec.is_homogeneous();
    if extra {
        writeln!(out, "m1,m2,m3,f,class,g,r0_crit")?;
    } else {
        writeln!(out, "m1,m2,m3,f,class")?;
    }
    for p in points {
        let [m1, m2, m3] = p.masses;
        write!(out, "{},{},{},{},{}", fmt(m1), fmt(m2), fmt(m3), fmt(p.f), p.class)?;
        if extra {
            write!(out, ",{},{}", fmt_opt(p.g), fmt_opt(p.r0_crit))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonSweep<'a> {
    resolution: usize,
    potential: &'a PotentialSpec,
    r0: Option<f64>,
    points: &'a [SweepPoint],
}

pub fn write_json<W: Write>(out: &mut W, points: &[SweepPoint], config: &SweepConfig) -> std::io::Result<()> {
    let doc = JsonSweep {
        resolution: config.grid_resolution,
        potential: &config.potential,
        r0: config.r0,
        points,
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

/// Points of the level curve `f = c` inside the open simplex.
///
/// On `m1 + m2 + m3 = 1`, `f = (1 - |m|^2) / 2`, so the curve is the circle
/// `|m|^2 = 1 - 2c` around the barycenter, of radius `sqrt(2/3 - 2c)`.
pub fn level_curve(c: f64, samples: usize) -> Vec<[f64; 3]> {
    let center = [1.0 / 3.0; 3];
    let radius = (2.0 / 3.0 - 2.0 * c).max(0.0).sqrt();
    if radius == 0.0 {
        return vec![center];
    }
    // Orthonormal basis of the plane sum(m) = 0.
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    (0..samples)
        .map(|s| {
            let t = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
            let (sin, cos) = t.sin_cos();
            [0, 1, 2].map(|i| center[i] + radius * (cos * e1[i] + sin * e2[i]))
        })
        .filter(|m| m.iter().all(|&x| x > 0.0))
        .collect()
}

pub fn write_levels_csv<W: Write>(out: &mut W, levels: &[f64]) -> std::io::Result<()> {
    writeln!(out, "level,m1,m2,m3")?;
    for &c in levels {
        for [m1, m2, m3] in level_curve(c, LEVEL_SAMPLES) {
            writeln!(out, "{},{},{},{}", fmt(c), fmt(m1), fmt(m2), fmt(m3))?;
        }
    }
    Ok(())
}

/// `out.csv` -> `out.levels.csv`.
pub fn levels_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.levels.csv"))
}

/// Connected components (6-neighbour lattice adjacency) of the points
/// carrying `label`, as lists of indices into `points`, largest first.
pub fn components(points: &[SweepPoint], label: &str) -> Vec<Vec<usize>> {
    let index: HashMap<[usize; 3], usize> = points.iter().enumerate().map(|(i, p)| (p.lattice, i)).collect();
    let mut seen = vec![false; points.len()];
    let mut out = Vec::new();
    for start in 0..points.len() {
        if seen[start] || points[start].class != label {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            let [i, j, k] = points[cur].lattice;
            let (i, j, k) = (i as i64, j as i64, k as i64);
            let steps = [(1, -1, 0), (-1, 1, 0), (1, 0, -1), (-1, 0, 1), (0, 1, -1), (0, -1, 1)];
            for (di, dj, dk) in steps {
                let (a, b, c) = (i + di, j + dj, k + dk);
                if a < 1 || b < 1 || c < 1 {
                    continue;
                }
                if let Some(&nb) = index.get(&[a as usize, b as usize, c as usize]) {
                    if !seen[nb] && points[nb].class == label {
                        seen[nb] = true;
                        comp.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        out.push(comp);
    }
    out.sort_by_key(|c| std::cmp::Reverse(c.len()));
    out
}

/// Labels at the lattice points closest to the three vertices.
pub fn corner_labels(points: &[SweepPoint], resolution: usize) -> Option<[&'static str; 3]> {
    let n = resolution.checked_sub(2).filter(|&n| n >= 1)?;
    let find = |l: [usize; 3]| points.iter().find(|p| p.lattice == l).map(|p| p.class);
    Some([find([n, 1, 1])?, find([1, n, 1])?, find([1, 1, n])?])
}

/// Number of points per label, sorted by label.
pub fn label_counts(points: &[SweepPoint]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for p in points {
        *out.entry(p.class).or_default() += 1;
    }
    out
}

/// Runs the sweep and writes the data file (plus the level curves next to
/// it when requested).
pub fn sweep_to_files(config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let points = run_sweep(config)?;
    let path = &config.output_path;
    let write = |path: &Path, body: &dyn Fn(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>| {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
    };
    match config.format {
        Format::Csv => write(path, &|w| write_csv(w, &points, &config.potential))?,
        Format::Json => write(path, &|w| write_json(w, &points, config))?,
    }
    if !config.levels.is_empty() {
        write(&levels_path(path), &|w| write_levels_csv(w, &config.levels))?;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_the_open_simplex() {
        let g = grid(5);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], [1, 1, 3]);
        assert!(g.iter().all(|p| p.iter().sum::<usize>() == 5 && p.iter().all(|&x| x >= 1)));
        assert!(grid(2).is_empty());
        // (n - 1)(n - 2) / 2 interior points.
        assert_eq!(grid(100).len(), 99 * 98 / 2);
    }

    #[test]
    fn level_curves_have_constant_f() {
        for c in [0.05, 0.2, 0.25, 0.3] {
            let pts = level_curve(c, 360);
            assert!(!pts.is_empty());
            for m in pts {
                assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                let f = m[0] * m[1] + m[0] * m[2] + m[1] * m[2];
                assert!((f - c).abs() < 1e-14, "{f} vs {c}");
            }
        }
        assert_eq!(level_curve(1.0 / 3.0, 10), vec![[1.0 / 3.0; 3]]);
    }

    #[test]
    fn levels_file_name() {
        assert_eq!(levels_path(Path::new("/tmp/a/out.csv")), PathBuf::from("/tmp/a/out.levels.csv"));
        assert_eq!(levels_path(Path::new("run")), PathBuf::from("run.levels.csv"));
    }

    #[test]
    fn resolution_and_levels_are_validated() {
        let mut cfg = SweepConfig {
            grid_resolution: 1,
            potential: PotentialSpec::homogeneous(1.0).unwrap(),
            r0: None,
            levels: vec![],
            output_path: PathBuf::from("x.csv"),
            format: Format::Csv,
        };
        assert!(cfg.validate().is_err());
        cfg.grid_resolution = 10;
        assert!(cfg.validate().is_ok());
        cfg.levels = vec![0.4];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn newtonian_stable_set_is_three_corners() {
        let cfg = SweepConfig {
            grid_resolution: 60,
            potential: PotentialSpec::homogeneous(1.0).unwrap(),
            r0: None,
            levels: vec![],
            output_path: PathBuf::new(),
            format: Format::Csv,
        };
        let pts = run_sweep(&cfg).unwrap();
        assert_eq!(components(&pts, "stable").len(), 3);
        assert_eq!(corner_labels(&pts, 60), Some(["stable"; 3]));
        assert_eq!(components(&pts, "unstable").len(), 1);
    }
}
