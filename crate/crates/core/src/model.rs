//! Geometry of the abc-hexagon walk model.
//!
//! `a` simple walks start at `2j` on line 0 and end at `c-b+2j` on line
//! `b+c`, never touching. Walk coordinates are the canonical storage; the
//! Hahn coordinate `x = (z - alpha_r)/2` on line `r` is a view.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{binomial_int, det_int, inv_factorial, ExactScalar};
use crate::hahn::HahnParams;

/// Side lengths of the hexagon, with `c >= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct HexagonSpec {
    a: i64,
    b: i64,
    c: i64,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    a: i64,
    b: i64,
    c: i64,
}

impl TryFrom<RawSpec> for HexagonSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        HexagonSpec::new(r.a, r.b, r.c)
    }
}

impl From<HexagonSpec> for RawSpec {
    fn from(s: HexagonSpec) -> Self {
        RawSpec {
            a: s.a,
            b: s.b,
            c: s.c,
        }
    }
}

impl HexagonSpec {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if a < 1 || b < 1 || c < 1 {
            return Err(Error::InvalidSpec {
                a,
                b,
                c,
                reason: "side lengths must be positive",
            });
        }
        if c < b {
            return Err(Error::InvalidSpec {
                a,
                b,
                c,
                reason: "c must be at least b (swap b and c)",
            });
        }
        Ok(HexagonSpec { a, b, c })
    }

    /// Like [`HexagonSpec::new`] but swaps `b` and `c` when `b > c`. The
    /// partition function is symmetric in the two.
    pub fn normalized(a: i64, b: i64, c: i64) -> Result<Self> {
        Self::new(a, b.min(c), b.max(c))
    }

    pub fn a(&self) -> i64 {
        self.a
    }
    pub fn b(&self) -> i64 {
        self.b
    }
    pub fn c(&self) -> i64 {
        self.c
    }

    /// Index of the final line, `b + c`.
    pub fn last_line(&self) -> i64 {
        self.b + self.c
    }

    /// Walk positions on line 0.
    pub fn initial_line(&self) -> Vec<i64> {
        (0..self.a).map(|j| 2 * j).collect()
    }

    /// Walk positions on line `b + c`.
    pub fn final_line(&self) -> Vec<i64> {
        (0..self.a).map(|j| self.c - self.b + 2 * j).collect()
    }

    /// Geometry of line `r`. Panics if `r` is outside `0..=b+c`; use
    /// [`line_geometry`] for a checked version.
    pub fn line(&self, r: i64) -> LineGeometry {
        line_geometry(self, r).expect("line index out of range")
    }

    /// Interior lines `1..b+c`.
    pub fn interior_lines(&self) -> std::ops::Range<i64> {
        1..self.last_line()
    }
}

impl std::fmt::Display for HexagonSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Per-line coordinates: leftmost reachable walk position `alpha_r`, the
/// Hahn lattice size `gamma_r + 1`, and the Hahn parameters
/// `a_r = |c-r|`, `b_r = |b-r|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineGeometry {
    pub r: i64,
    pub alpha_r: i64,
    pub gamma_r: i64,
    pub a_r: i64,
    pub b_r: i64,
}

impl LineGeometry {
    /// Hahn family `(alpha, beta, N) = (b_r, a_r, gamma_r)` living on this line.
    pub fn hahn_params(&self) -> HahnParams {
        HahnParams::new(self.b_r as u32, self.a_r as u32, self.gamma_r as u32)
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        0..=self.gamma_r
    }

    pub fn walk(&self, x_hahn: i64) -> i64 {
        self.alpha_r + 2 * x_hahn
    }
}

pub fn line_geometry(spec: &HexagonSpec, r: i64) -> Result<LineGeometry> {
    let (a, b, c) = (spec.a, spec.b, spec.c);
    if r < 0 || r > b + c {
        return Err(Error::OutOfRange {
            what: "line index",
            value: r,
            lo: 0,
            hi: b + c,
        });
    }
    let alpha_r = if r <= b { -r } else { r - 2 * b };
    let gamma_r = if r <= b {
        r + a - 1
    } else if r <= c {
        b + a - 1
    } else {
        a + b + c - 1 - r
    };
    Ok(LineGeometry {
        r,
        alpha_r,
        gamma_r,
        a_r: (c - r).abs(),
        b_r: (b - r).abs(),
    })
}

/// Left weight `omega_r(x)` in Hahn coordinates; zero off the lattice.
pub fn omega(spec: &HexagonSpec, r: i64, x: i64) -> ExactScalar {
    let g = spec.line(r);
    if x < 0 || x > g.gamma_r {
        return ExactScalar::zero();
    }
    if r <= spec.b {
        inv_factorial(g.b_r + x) * inv_factorial(g.gamma_r + g.a_r - x)
    } else if r <= spec.c {
        inv_factorial(x) * inv_factorial(g.gamma_r + g.a_r - x)
    } else {
        inv_factorial(x) * inv_factorial(g.gamma_r - x)
    }
}

/// Right weight `omega~_s(y)` in Hahn coordinates; zero off the lattice.
pub fn omega_tilde(spec: &HexagonSpec, s: i64, y: i64) -> ExactScalar {
    let g = spec.line(s);
    if y < 0 || y > g.gamma_r {
        return ExactScalar::zero();
    }
    if s <= spec.b {
        inv_factorial(y) * inv_factorial(g.gamma_r - y)
    } else if s <= spec.c {
        inv_factorial(g.b_r + y) * inv_factorial(g.gamma_r - y)
    } else {
        inv_factorial(g.b_r + y) * inv_factorial(g.gamma_r + g.a_r - y)
    }
}

pub fn to_walk(spec: &HexagonSpec, r: i64, x_hahn: i64) -> i64 {
    spec.line(r).walk(x_hahn)
}

pub fn from_walk(spec: &HexagonSpec, r: i64, z: i64) -> Result<i64> {
    let g = line_geometry(spec, r)?;
    let d = z - g.alpha_r;
    if d.rem_euclid(2) != 0 {
        return Err(Error::ParityMismatch { r, z });
    }
    Ok(d / 2)
}

/// Number of simple walk paths from `x` on line `r` to `y` on line `s`, as
/// an integer. Zero when `r >= s`.
pub fn transition_count_int(r: i64, s: i64, x: i64, y: i64) -> BigInt {
    if r >= s {
        return BigInt::from(0);
    }
    let steps = s - r;
    let up2 = y - x + steps;
    if up2.rem_euclid(2) != 0 {
        return BigInt::from(0);
    }
    binomial_int(steps, up2 / 2)
}

pub fn transition_count(r: i64, s: i64, x: i64, y: i64) -> ExactScalar {
    ExactScalar::from_integer(transition_count_int(r, s, x, y))
}

/// MacMahon's box formula `prod_{i,j,k} (i+j+k-1)/(i+j+k-2)`.
pub fn macmahon(a: i64, b: i64, c: i64) -> ExactScalar {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 1..=a {
        for j in 1..=b {
            for k in 1..=c {
                num *= i + j + k - 1;
                den *= i + j + k - 2;
            }
        }
    }
    ExactScalar::new(num, den)
}

/// Number of non-intersecting path families, `det(C(b+c, c+j-i))`.
pub fn lgv_partition(spec: &HexagonSpec) -> ExactScalar {
    let m = spec.last_line();
    let rows: Vec<Vec<BigInt>> = (0..spec.a)
        .map(|i| (0..spec.a).map(|j| binomial_int(m, spec.c + j - i)).collect())
        .collect();
    ExactScalar::from_integer(det_int(&rows).expect("square by construction"))
}

/// A point on an interior line, in Hahn coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinePoint {
    pub r: i64,
    pub x_hahn: i64,
}

impl LinePoint {
    /// Checked constructor: `1 <= r <= b+c-1`, `0 <= x <= gamma_r`.
    pub fn new(spec: &HexagonSpec, r: i64, x_hahn: i64) -> Result<Self> {
        if r < 1 || r >= spec.last_line() {
            return Err(Error::OutOfRange {
                what: "interior line",
                value: r,
                lo: 1,
                hi: spec.last_line() - 1,
            });
        }
        let g = spec.line(r);
        if x_hahn < 0 || x_hahn > g.gamma_r {
            return Err(Error::OutOfRange {
                what: "Hahn coordinate",
                value: x_hahn,
                lo: 0,
                hi: g.gamma_r,
            });
        }
        Ok(LinePoint { r, x_hahn })
    }

    pub fn from_walk(spec: &HexagonSpec, r: i64, z: i64) -> Result<Self> {
        let x = from_walk(spec, r, z)?;
        Self::new(spec, r, x)
    }

    pub fn walk(&self, spec: &HexagonSpec) -> i64 {
        to_walk(spec, self.r, self.x_hahn)
    }
}

/// All interior points of the hexagon, ordered by line then position.
pub fn interior_points(spec: &HexagonSpec) -> Vec<LinePoint> {
    spec.interior_lines()
        .flat_map(|r| {
            spec.line(r)
                .sites()
                .map(move |x| LinePoint { r, x_hahn: x })
        })
        .collect()
}

/// Positions of all walkers on every line `0..=b+c`, in walk coordinates.
///
/// Serializes as `{"a":..,"b":..,"c":..,"lines":[[..],..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathConfiguration {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub lines: Vec<Vec<i64>>,
}

impl PathConfiguration {
    pub fn new(spec: &HexagonSpec, lines: Vec<Vec<i64>>) -> Self {
        PathConfiguration {
            a: spec.a,
            b: spec.b,
            c: spec.c,
            lines,
        }
    }

    pub fn spec(&self) -> Result<HexagonSpec> {
        HexagonSpec::new(self.a, self.b, self.c)
    }

    pub fn occupies(&self, r: i64, z: i64) -> bool {
        usize::try_from(r)
            .ok()
            .and_then(|r| self.lines.get(r))
            .is_some_and(|line| line.binary_search(&z).is_ok())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Explains the first violated invariant, if any.
pub fn check_configuration(spec: &HexagonSpec, config: &PathConfiguration) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
    if (config.a, config.b, config.c) != (spec.a, spec.b, spec.c) {
        return bad(format!(
            "configuration is for ({},{},{}), expected {}",
            config.a, config.b, config.c, spec
        ));
    }
    let n_lines = (spec.last_line() + 1) as usize;
    if config.lines.len() != n_lines {
        return bad(format!("{} lines, expected {}", config.lines.len(), n_lines));
    }
    for (r, line) in config.lines.iter().enumerate() {
        if line.len() != spec.a as usize {
            return bad(format!("line {r} has {} walkers, expected {}", line.len(), spec.a));
        }
        if line.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("line {r} is not strictly increasing"));
        }
    }
    if config.lines[0] != spec.initial_line() {
        return bad("wrong initial line".into());
    }
    if config.lines[n_lines - 1] != spec.final_line() {
        return bad("wrong final line".into());
    }
    for (r, pair) in config.lines.windows(2).enumerate() {
        if pair[0].iter().zip(&pair[1]).any(|(z, w)| (z - w).abs() != 1) {
            return bad(format!("non-unit step between lines {r} and {}", r + 1));
        }
    }
    Ok(())
}

pub fn validate(spec: &HexagonSpec, config: &PathConfiguration) -> bool {
    check_configuration(spec, config).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;
    use crate::hahn;

    fn spec(a: i64, b: i64, c: i64) -> HexagonSpec {
        HexagonSpec::new(a, b, c).unwrap()
    }

    #[test]
    fn spec_requires_c_at_least_b() {
        assert!(HexagonSpec::new(1, 2, 1).is_err());
        assert!(HexagonSpec::new(0, 1, 1).is_err());
        assert_eq!(HexagonSpec::normalized(1, 3, 2).unwrap(), spec(1, 2, 3));
    }

    #[test]
    fn geometry_examples() {
        let g = line_geometry(&spec(2, 2, 3), 1).unwrap();
        assert_eq!((g.alpha_r, g.gamma_r, g.a_r, g.b_r), (-1, 2, 2, 1));
        let g = line_geometry(&spec(2, 2, 3), 4).unwrap();
        assert_eq!((g.alpha_r, g.gamma_r, g.a_r, g.b_r), (0, 2, 1, 2));
        let g = line_geometry(&spec(1, 1, 1), 1).unwrap();
        assert_eq!((g.alpha_r, g.gamma_r, g.a_r, g.b_r), (-1, 1, 0, 0));
        assert!(line_geometry(&spec(1, 1, 1), 3).is_err());
    }

    #[test]
    fn geometry_branches_agree_and_invariants_hold() {
        for a in 1..=8 {
            for b in 1..=8 {
                for c in b..=8 {
                    let s = spec(a, b, c);
                    for r in [b, c] {
                        // evaluate every branch formula at the shared boundary
                        let alpha_lo = -r;
                        let alpha_hi = r - 2 * b;
                        if r == b {
                            assert_eq!(alpha_lo, alpha_hi);
                            assert_eq!(r + a - 1, b + a - 1);
                        }
                        if r == c {
                            assert_eq!(b + a - 1, a + b + c - 1 - r);
                        }
                    }
                    for r in 0..=s.last_line() {
                        let g = s.line(r);
                        assert_eq!((g.alpha_r - r).rem_euclid(2), 0);
                        assert!(g.gamma_r + 1 >= a);
                    }
                }
            }
        }
    }

    #[test]
    fn omega_examples() {
        let s = spec(1, 1, 1);
        assert_eq!(omega(&s, 1, 0), int(1));
        for r in 0..=2 {
            assert_eq!(omega(&s, r, -1), int(0));
            assert_eq!(omega_tilde(&s, r, -1), int(0));
        }
    }

    #[test]
    fn omega_product_is_hahn_weight() {
        for a in 1..=4 {
            for b in 1..=4 {
                for c in b..=4 {
                    let s = spec(a, b, c);
                    for r in 0..=s.last_line() {
                        let g = s.line(r);
                        for x in -1..=g.gamma_r + 1 {
                            assert_eq!(
                                omega(&s, r, x) * omega_tilde(&s, r, x),
                                hahn::weight(g.hahn_params(), x),
                                "spec {s} r={r} x={x}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn walk_coordinates() {
        let s = spec(1, 1, 1);
        assert_eq!(to_walk(&s, 1, 0), -1);
        assert_eq!(from_walk(&s, 1, 1).unwrap(), 1);
        assert!(matches!(
            from_walk(&s, 1, 0),
            Err(Error::ParityMismatch { r: 1, z: 0 })
        ));
        let s = spec(3, 2, 4);
        for r in 0..=s.last_line() {
            for x in 0..=s.line(r).gamma_r {
                assert_eq!(from_walk(&s, r, to_walk(&s, r, x)).unwrap(), x);
            }
        }
    }

    #[test]
    fn transition_counts() {
        assert_eq!(transition_count(0, 2, 0, 0), int(2));
        assert_eq!(transition_count(0, 1, 0, 1), int(1));
        assert_eq!(transition_count(2, 1, 0, 1), int(0));
        assert_eq!(transition_count(1, 1, 0, 0), int(0));
        assert_eq!(transition_count(0, 3, 0, 5), int(0));
    }

    #[test]
    fn transition_parity_law() {
        for r in 0i64..4 {
            for s in r + 1..8 {
                for x in -6..6 {
                    for y in -6..6 {
                        if (x - y - (s - r)).rem_euclid(2) == 1 {
                            assert_eq!(transition_count(r, s, x, y), int(0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        for (r, t, s) in [(0, 1, 2), (0, 2, 5), (1, 4, 7), (2, 3, 9)] {
            for x in -3..=3 {
                for y in -10..=10 {
                    let via: ExactScalar = (-20..=20)
                        .map(|z| transition_count(r, t, x, z) * transition_count(t, s, z, y))
                        .sum();
                    assert_eq!(via, transition_count(r, s, x, y));
                }
            }
        }
    }

    #[test]
    fn macmahon_examples() {
        assert_eq!(macmahon(1, 1, 1), int(2));
        assert_eq!(macmahon(2, 2, 2), int(20));
        assert_eq!(macmahon(1, 1, 2), int(3));
    }

    #[test]
    fn lgv_examples() {
        assert_eq!(lgv_partition(&spec(1, 1, 1)), int(2));
        assert_eq!(lgv_partition(&spec(2, 1, 1)), int(3));
    }

    #[test]
    fn lgv_matches_macmahon() {
        for a in 1..=6 {
            for b in 1..=6 {
                for c in b..=6 {
                    assert_eq!(lgv_partition(&spec(a, b, c)), macmahon(a, b, c));
                }
            }
        }
    }

    #[test]
    fn validate_examples() {
        let s = spec(1, 1, 1);
        let good = PathConfiguration::new(&s, vec![vec![0], vec![1], vec![0]]);
        assert!(validate(&s, &good));
        let wrong_parity = PathConfiguration::new(&s, vec![vec![0], vec![0], vec![0]]);
        assert!(!validate(&s, &wrong_parity));
        let s2 = spec(2, 1, 1);
        let collide = PathConfiguration::new(&s2, vec![vec![0, 2], vec![1, 1], vec![0, 2]]);
        assert!(!validate(&s2, &collide));
        let ok2 = PathConfiguration::new(&s2, vec![vec![0, 2], vec![-1, 1], vec![0, 2]]);
        assert!(validate(&s2, &ok2));
    }

    #[test]
    fn json_schema() {
        let s = spec(1, 1, 1);
        let cfg = PathConfiguration::new(&s, vec![vec![0], vec![-1], vec![0]]);
        let json = cfg.to_json();
        assert_eq!(json, r#"{"a":1,"b":1,"c":1,"lines":[[0],[-1],[0]]}"#);
        assert_eq!(PathConfiguration::from_json(&json).unwrap(), cfg);
        let bad: std::result::Result<HexagonSpec, _> = serde_json::from_str(r#"{"a":1,"b":2,"c":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn line_points() {
        let s = spec(2, 2, 3);
        assert!(LinePoint::new(&s, 0, 0).is_err());
        assert!(LinePoint::new(&s, 4, 0).is_ok());
        assert!(LinePoint::new(&s, 5, 0).is_err());
        assert!(LinePoint::new(&s, 1, 3).is_err());
        let p = LinePoint::from_walk(&s, 1, 1).unwrap();
        assert_eq!(p, LinePoint { r: 1, x_hahn: 1 });
        assert_eq!(p.walk(&s), 1);
        let total: i64 = (1..5).map(|r| s.line(r).gamma_r + 1).sum();
        assert_eq!(interior_points(&s).len() as i64, total);
    }
}
