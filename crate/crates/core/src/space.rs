//! Sampled metric spaces: the unit cube and the flat unit torus with the
//! uniform measure, geodesic distances, i.i.d. point sampling, and the
//! ball-mass bounds behind the density/regularity assumption.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    #[serde(rename = "unit-cube")]
    UnitCube,
    #[serde(rename = "flat-torus")]
    FlatTorus,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::UnitCube => write!(f, "unit-cube"),
            SpaceKind::FlatTorus => write!(f, "flat-torus"),
        }
    }
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-cube" | "cube" => Ok(SpaceKind::UnitCube),
            "flat-torus" | "torus" => Ok(SpaceKind::FlatTorus),
            other => Err(Error::InvalidParameter(format!(
                "unknown space kind '{other}' (expected unit-cube or flat-torus)"
            ))),
        }
    }
}

/// A geodesic metric space of side length 1 carrying the uniform measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpace {
    pub kind: SpaceKind,
    pub dim: usize,
}

/// Lower bound `s` on the mass of any (r/2)-ball together with the
/// regularity factor `rho` such that every (r/2)-ball has mass in
/// `[s, rho * s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBounds {
    pub s: f64,
    pub rho: f64,
}

pub fn make_space(kind: SpaceKind, dim: usize) -> Result<MetricSpace> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be >= 1".into()));
    }
    Ok(MetricSpace { kind, dim })
}

impl MetricSpace {
    /// Geodesic distance. Cube: Euclidean; torus: per-coordinate
    /// `min(|a-b|, 1-|a-b|)` folded into the Euclidean norm.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim);
        debug_assert_eq!(b.len(), self.dim);
        let mut sum = 0.0;
        match self.kind {
            SpaceKind::UnitCube => {
                for i in 0..self.dim {
                    let d = a[i] - b[i];
                    sum += d * d;
                }
            }
            SpaceKind::FlatTorus => {
                for i in 0..self.dim {
                    let d = (a[i] - b[i]).abs();
                    let d = d.min(1.0 - d);
                    sum += d * d;
                }
            }
        }
        sum.sqrt()
    }

    /// Volume of the unit d-ball, `pi^(d/2) / Gamma(d/2 + 1)`.
    pub fn unit_ball_volume(dim: usize) -> f64 {
        // V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2 pi / d
        let mut v = if dim % 2 == 0 { 1.0 } else { 2.0 };
        let mut d = if dim % 2 == 0 { 2 } else { 3 };
        while d <= dim {
            v *= 2.0 * std::f64::consts::PI / d as f64;
            d += 2;
        }
        v
    }
}

/// Exact (s, rho) for the built-in spaces: the infimum and sup/inf ratio of
/// `mu(B_{r/2}(x))` over centers x.
///
/// With `r/2 <= 1/2` the (r/2)-ball never wraps onto itself (torus) and is
/// clipped by at most the near face per coordinate (cube), so the extremes
/// have closed forms in every dimension: the torus is translation invariant,
/// and on the cube the minimum sits at a corner (exactly `2^-d` of the ball)
/// while the center ball is unclipped.
pub fn ball_mass_bounds(space: &MetricSpace, r: f64) -> Result<MassBounds> {
    if !(r > 0.0) || r / 2.0 > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "r must satisfy 0 < r/2 <= 1/2, got r = {r}"
        )));
    }
    let full = MetricSpace::unit_ball_volume(space.dim) * (r / 2.0).powi(space.dim as i32);
    match space.kind {
        SpaceKind::FlatTorus => Ok(MassBounds { s: full, rho: 1.0 }),
        SpaceKind::UnitCube => {
            let two_d = (2.0f64).powi(space.dim as i32);
            Ok(MassBounds {
                s: full / two_d,
                rho: two_d,
            })
        }
    }
}

/// `s >= 13 ln n / n`: the density condition all theorems condition on.
pub fn assumption_a_holds(mass: &MassBounds, n: usize) -> bool {
    debug_assert!(n >= 2);
    mass.s >= assumption_a_s_min(n)
}

/// The density threshold `13 ln n / n`.
pub fn assumption_a_s_min(n: usize) -> f64 {
    13.0 * (n as f64).ln() / n as f64
}

/// Solve for the radius r whose (r/2)-ball lower mass bound satisfies
/// `s * n = sn_target`. Errors when no r with `r <= 1` achieves the target.
pub fn solve_r_for_sn(space: &MetricSpace, n: usize, sn_target: f64) -> Result<f64> {
    if !(sn_target > 0.0) {
        return Err(Error::InvalidParameter("target sn must be positive".into()));
    }
    let s = sn_target / n as f64;
    let vd = MetricSpace::unit_ball_volume(space.dim);
    let scaled = match space.kind {
        SpaceKind::FlatTorus => s / vd,
        SpaceKind::UnitCube => s * (2.0f64).powi(space.dim as i32) / vd,
    };
    let r = 2.0 * scaled.powf(1.0 / space.dim as f64);
    if r > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "target sn = {sn_target} needs r = {r:.4} > 1 on {} dim {}",
            space.kind, space.dim
        )));
    }
    Ok(r)
}

/// i.i.d. sample of n points from the uniform measure; identical seeds give
/// bit-identical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub space: MetricSpace,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
}

pub fn sample_points(space: &MetricSpace, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| (0..space.dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    Ok(PointCloud {
        space: *space,
        points,
        seed,
    })
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: u32, j: u32) -> f64 {
        self.space
            .distance(&self.points[i as usize], &self.points[j as usize])
    }
}

/// Monte Carlo estimate of `mu(B_radius(center))` with its standard error.
/// Used to cross-check the closed-form bounds.
pub fn mc_ball_mass(
    space: &MetricSpace,
    center: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut pt = vec![0.0; space.dim];
    for _ in 0..samples {
        for c in pt.iter_mut() {
            *c = rng.gen::<f64>();
        }
        if space.distance(center, &pt) <= radius {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    (p, se)
}

/// Write the point cloud: one comment line with provenance, a CSV header,
/// then one row per point with 17-significant-digit coordinates (lossless
/// for f64).
pub fn write_points_csv<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# space={} dim={} seed={}",
        cloud.space.kind, cloud.space.dim, cloud.seed
    )?;
    let header: Vec<String> = (0..cloud.space.dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "id,{}", header.join(","))?;
    for (id, p) in cloud.points.iter().enumerate() {
        let coords: Vec<String> = p.iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(w, "{id},{}", coords.join(","))?;
    }
    Ok(())
}

pub fn write_points_file(cloud: &PointCloud, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_points_csv(cloud, std::io::BufWriter::new(f))
}

pub fn read_points_csv<R: std::io::Read>(r: R) -> Result<PointCloud> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty points file".into()))??;
    let (space, seed) = parse_points_header(&head)?;
    // skip the CSV column header
    lines
        .next()
        .ok_or_else(|| Error::Parse("missing column header".into()))??;
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let _id = fields
            .next()
            .ok_or_else(|| Error::Parse(format!("row {lineno}: missing id")))?;
        let coords: Vec<f64> = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {lineno}: {e}")))
            })
            .collect::<Result<_>>()?;
        if coords.len() != space.dim {
            return Err(Error::Parse(format!(
                "row {lineno}: expected {} coordinates, got {}",
                space.dim,
                coords.len()
            )));
        }
        points.push(coords);
    }
    Ok(PointCloud {
        space,
        points,
        seed,
    })
}

pub fn read_points_file(path: &Path) -> Result<PointCloud> {
    read_points_csv(std::fs::File::open(path)?)
}

fn parse_points_header(line: &str) -> Result<(MetricSpace, u64)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("points file must start with '# space=...'".into()))?;
    let mut kind = None;
    let mut dim = None;
    let mut seed = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("space=") {
            kind = Some(v.parse::<SpaceKind>()?);
        } else if let Some(v) = tok.strip_prefix("dim=") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("dim: {e}")))?,
            );
        } else if let Some(v) = tok.strip_prefix("seed=") {
            seed = Some(
                v.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("seed: {e}")))?,
            );
        }
    }
    match (kind, dim, seed) {
        (Some(kind), Some(dim), Some(seed)) => Ok((MetricSpace { kind, dim }, seed)),
        _ => Err(Error::Parse(
            "points header needs space=, dim= and seed=".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn make_space_rejects_dim_zero() {
        assert!(make_space(SpaceKind::UnitCube, 0).is_err());
        assert!(make_space(SpaceKind::FlatTorus, 3).is_ok());
    }

    #[test]
    fn torus_wraparound_distance() {
        let s = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let d = s.distance(&[0.05, 0.0], &[0.95, 0.0]);
        assert_relative_eq!(d, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn cube_distances() {
        let s1 = make_space(SpaceKind::UnitCube, 1).unwrap();
        assert_relative_eq!(s1.distance(&[0.2], &[0.9]), 0.7, epsilon = 1e-12);
        let s2 = make_space(SpaceKind::UnitCube, 2).unwrap();
        assert_relative_eq!(
            s2.distance(&[0.0, 0.0], &[1.0, 1.0]),
            2.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn triangle_inequality_random_triples() {
        // 10^4 random triples per space, tolerance 1e-12.
        for (kind, dim) in [
            (SpaceKind::UnitCube, 1),
            (SpaceKind::UnitCube, 2),
            (SpaceKind::UnitCube, 3),
            (SpaceKind::FlatTorus, 1),
            (SpaceKind::FlatTorus, 2),
            (SpaceKind::FlatTorus, 3),
        ] {
            let space = make_space(kind, dim).unwrap();
            let cloud = sample_points(&space, 3 * 10_000, 99).unwrap();
            for t in 0..10_000 {
                let (a, b, c) = (
                    &cloud.points[3 * t],
                    &cloud.points[3 * t + 1],
                    &cloud.points[3 * t + 2],
                );
                let ab = space.distance(a, b);
                let bc = space.distance(b, c);
                let ac = space.distance(a, c);
                assert!(ac <= ab + bc + 1e-12, "{kind} d{dim}: {ac} > {ab} + {bc}");
                assert!((space.distance(a, b) - space.distance(b, a)).abs() < 1e-15);
                assert!(space.distance(a, a) == 0.0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let one = sample_points(&space, 1, 7).unwrap();
        assert_eq!(one.points.len(), 1);
        assert!(one.points[0].iter().all(|c| (0.0..1.0).contains(c)));

        let cube = make_space(SpaceKind::UnitCube, 2).unwrap();
        let a = sample_points(&cube, 1000, 1).unwrap();
        let b = sample_points(&cube, 1000, 1).unwrap();
        assert_eq!(a, b);
        let c = sample_points(&cube, 1000, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_matches_uniform_law() {
        let cube = make_space(SpaceKind::UnitCube, 1).unwrap();
        let cloud = sample_points(&cube, 100_000, 3).unwrap();
        let mean: f64 = cloud.points.iter().map(|p| p[0]).sum::<f64>() / cloud.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn ball_mass_bounds_closed_forms() {
        let torus2 = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let mb = ball_mass_bounds(&torus2, 0.3).unwrap();
        assert_relative_eq!(
            mb.s,
            std::f64::consts::PI * 0.15 * 0.15,
            epsilon = 1e-15
        );
        assert_eq!(mb.rho, 1.0);

        let cube2 = make_space(SpaceKind::UnitCube, 2).unwrap();
        let mb = ball_mass_bounds(&cube2, 0.3).unwrap();
        assert_relative_eq!(
            mb.s,
            std::f64::consts::PI * 0.15 * 0.15 / 4.0,
            epsilon = 1e-15
        );
        assert_eq!(mb.rho, 4.0);

        let cube1 = make_space(SpaceKind::UnitCube, 1).unwrap();
        let mb = ball_mass_bounds(&cube1, 0.3).unwrap();
        assert_relative_eq!(mb.s, 0.15, epsilon = 1e-15);
        assert_eq!(mb.rho, 2.0);

        assert!(ball_mass_bounds(&cube1, 0.0).is_err());
        assert!(ball_mass_bounds(&cube1, 1.2).is_err());
    }

    #[test]
    fn torus_ball_mass_matches_monte_carlo() {
        let torus2 = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let r = 0.4;
        let (est, se) = mc_ball_mass(&torus2, &[0.37, 0.81], r / 2.0, 100_000, 5);
        let exact = std::f64::consts::PI * (r / 2.0) * (r / 2.0);
        assert!(
            (est - exact).abs() <= 3.0 * se,
            "est {est} exact {exact} se {se}"
        );
    }

    #[test]
    fn mass_bounds_bracket_monte_carlo_at_random_centers() {
        // s <= mu(B_{r/2}(x)) <= rho*s within 3 standard errors at 100
        // centers. On the torus the exact mass sits on both bounds, so 3
        // standard errors admit ~0.3% misses per center; allow the expected
        // handful at 3 s.e. while requiring all centers inside 5 s.e.
        for kind in [SpaceKind::FlatTorus, SpaceKind::UnitCube] {
            let space = make_space(kind, 2).unwrap();
            let r = 0.5;
            let mb = ball_mass_bounds(&space, r).unwrap();
            let centers = sample_points(&space, 100, 17).unwrap();
            let mut within_3se = 0;
            for (i, c) in centers.points.iter().enumerate() {
                let (est, se) = mc_ball_mass(&space, c, r / 2.0, 20_000, 1000 + i as u64);
                if est >= mb.s - 3.0 * se && est <= mb.rho * mb.s + 3.0 * se {
                    within_3se += 1;
                }
                assert!(est >= mb.s - 5.0 * se, "{kind}: est {est} far below s {}", mb.s);
                assert!(
                    est <= mb.rho * mb.s + 5.0 * se,
                    "{kind}: est {est} far above rho*s {}",
                    mb.rho * mb.s
                );
            }
            assert!(within_3se >= 97, "{kind}: only {within_3se}/100 within 3 s.e.");
        }
    }

    #[test]
    fn cube_corner_mass_is_the_infimum_value() {
        // the corner ball carries exactly 2^-d of the full ball
        let cube3 = make_space(SpaceKind::UnitCube, 3).unwrap();
        let mb = ball_mass_bounds(&cube3, 0.6).unwrap();
        let (est, se) = mc_ball_mass(&cube3, &[0.0, 0.0, 0.0], 0.3, 200_000, 23);
        assert!((est - mb.s).abs() <= 3.0 * se, "est {est} s {}", mb.s);
        let (est_c, se_c) = mc_ball_mass(&cube3, &[0.5, 0.5, 0.5], 0.3, 200_000, 24);
        assert!(
            (est_c - mb.rho * mb.s).abs() <= 3.0 * se_c,
            "center est {est_c} vs {}",
            mb.rho * mb.s
        );
    }

    #[test]
    fn assumption_a_threshold() {
        // 13 ln n / n drops below 1 only past n ~ 52, so s = 1 first
        // satisfies the condition there
        assert!(!assumption_a_holds(&MassBounds { s: 1.0, rho: 1.0 }, 10));
        assert!(assumption_a_holds(&MassBounds { s: 1.0, rho: 1.0 }, 55));
        // 13 ln(1000)/1000 ~ 0.0898
        assert!(!assumption_a_holds(&MassBounds { s: 0.05, rho: 1.0 }, 1000));
        assert!(assumption_a_holds(&MassBounds { s: 0.09, rho: 1.0 }, 1000));
    }

    #[test]
    fn solve_r_round_trips_through_mass_bounds() {
        for kind in [SpaceKind::FlatTorus, SpaceKind::UnitCube] {
            for dim in [1, 2, 3] {
                let space = make_space(kind, dim).unwrap();
                let n = 500;
                let r = solve_r_for_sn(&space, n, 10.0).unwrap();
                let mb = ball_mass_bounds(&space, r).unwrap();
                assert_relative_eq!(mb.s * n as f64, 10.0, epsilon = 1e-9);
            }
        }
        let torus = make_space(SpaceKind::FlatTorus, 2).unwrap();
        assert!(solve_r_for_sn(&torus, 10, 9.9).is_err()); // needs r > 1
    }

    #[test]
    fn points_csv_round_trip_is_exact() {
        let space = make_space(SpaceKind::FlatTorus, 3).unwrap();
        let cloud = sample_points(&space, 50, 12345).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&cloud, &mut buf).unwrap();
        let back = read_points_csv(&buf[..]).unwrap();
        assert_eq!(cloud, back);
    }
}
