//! Norms on R^d and their unit balls.
//!
//! A closed symmetric convex body is always handled through its gauge: the
//! body is `{x : ‖x‖ ≤ 1}` and membership is `evaluate(x) <= 1`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::MAX_DIM;
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Largest admissible condition number of a random ellipsoid matrix.
pub const MAX_ELLIPSOID_CONDITION: f64 = 1e3;

/// Exponent of an ℓp norm; `p = ∞` serializes as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent(p)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::INF),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid exponent {t:?}"))),
        }
    }
}

/// A continuous norm on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    /// `(Σ|x_i|^p)^(1/p)`, any dimension.
    Lp { p: Exponent },
    /// `‖(w_1 x_1, …, w_d x_d)‖_p`.
    WeightedLp { p: Exponent, weights: Vec<f64> },
    /// `sqrt(xᵀ A x)` with `A` symmetric positive definite.
    Ellipsoid { matrix: Vec<Vec<f64>> },
    /// `max_j |⟨u_j, x⟩|` with the `u_j` spanning R^d.
    PolytopeGauge { directions: Vec<Vec<f64>> },
    /// `factor · inner(x)`.
    Scaled { inner: Box<NormSpec>, factor: f64 },
}

fn lp_value(p: f64, coords: impl Iterator<Item = f64> + Clone) -> f64 {
    if p == 1.0 {
        coords.map(f64::abs).sum()
    } else if p.is_infinite() {
        coords.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        let m = coords.clone().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        if p == 2.0 {
            m * coords.map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
        } else {
            m * coords.map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

impl NormSpec {
    pub fn euclidean() -> Self {
        NormSpec::Lp { p: Exponent(2.0) }
    }

    pub fn lp(p: f64) -> Self {
        NormSpec::Lp { p: Exponent(p) }
    }

    pub fn scaled(self, factor: f64) -> Self {
        NormSpec::Scaled { inner: Box::new(self), factor }
    }

    /// The dimension the norm is tied to; `None` for plain ℓp norms.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            NormSpec::Lp { .. } => None,
            NormSpec::WeightedLp { weights, .. } => Some(weights.len()),
            NormSpec::Ellipsoid { matrix } => Some(matrix.len()),
            NormSpec::PolytopeGauge { directions } => directions.first().map(Vec::len),
            NormSpec::Scaled { inner, .. } => inner.dimension(),
        }
    }

    /// Checks the parameter invariants that make this a norm.
    pub fn validate(&self) -> Result<()> {
        let check_p = |p: f64| {
            if p >= 1.0 {
                Ok(())
            } else {
                Err(Error::param(format!("lp exponent {p} must be in [1, inf]")))
            }
        };
        match self {
            NormSpec::Lp { p } => check_p(p.0),
            NormSpec::WeightedLp { p, weights } => {
                check_p(p.0)?;
                if weights.is_empty() || weights.len() > MAX_DIM {
                    return Err(Error::param(format!("weight vector length {} outside [1, {MAX_DIM}]", weights.len())));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::param("weights must be positive and finite"));
                }
                Ok(())
            }
            NormSpec::Ellipsoid { matrix } => {
                let d = matrix.len();
                if d == 0 || d > MAX_DIM || matrix.iter().any(|r| r.len() != d) {
                    return Err(Error::param("ellipsoid matrix must be square with dimension in [1, 16]"));
                }
                let m = to_dmatrix(matrix);
                if !is_symmetric(&m) {
                    return Err(Error::param("ellipsoid matrix must be symmetric"));
                }
                if m.clone().cholesky().is_none() {
                    return Err(Error::param("ellipsoid matrix must be positive definite"));
                }
                Ok(())
            }
            NormSpec::PolytopeGauge { directions } => {
                let d = directions.first().map(Vec::len).unwrap_or(0);
                if d == 0 || d > MAX_DIM || directions.iter().any(|u| u.len() != d) {
                    return Err(Error::param("polytope directions must share a dimension in [1, 16]"));
                }
                if directions.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::param("polytope directions must be finite"));
                }
                if rank(directions, d) < d {
                    return Err(Error::param("polytope directions must span R^d"));
                }
                Ok(())
            }
            NormSpec::Scaled { inner, factor } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::param(format!("scale factor {factor} must be positive")));
                }
                inner.validate()
            }
        }
    }

    /// `‖x‖`, with a dimension check.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dimension() {
            if d != x.len() {
                return Err(Error::Dimension { expected: d, got: x.len() });
            }
        }
        Ok(self.eval(x))
    }

    /// `‖x‖` without the dimension check; used in hot loops after the
    /// dimension has been validated once.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::Lp { p } => lp_value(p.0, x.iter().copied()),
            NormSpec::WeightedLp { p, weights } => {
                lp_value(p.0, x.iter().zip(weights).map(|(v, w)| v * w))
            }
            NormSpec::Ellipsoid { matrix } => {
                let q: f64 = matrix
                    .iter()
                    .zip(x)
                    .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, xj)| a * xj).sum::<f64>())
                    .sum();
                q.max(0.0).sqrt()
            }
            NormSpec::PolytopeGauge { directions } => directions
                .iter()
                .map(|u| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs())
                .fold(0.0, f64::max),
            NormSpec::Scaled { inner, factor } => factor * inner.eval(x),
        }
    }

    /// `true` iff `x` lies in the closed unit ball.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.evaluate(x)? <= 1.0)
    }
}

fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    DMatrix::from_fn(d, c, |i, j| rows[i][j])
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale))
}

fn rank(rows: &[Vec<f64>], d: usize) -> usize {
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    sv.iter().filter(|s| **s > 1e-10 * top).count()
}

/// Which variants a random norm family draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMix {
    LpOnly,
    Mixed,
}

/// A deterministic finite family of norms standing in for "every norm".
///
/// The family always starts with ℓ2, ℓ1 and ℓ∞ (as far as `size` allows).
/// Random members are normalized so that `max_i ‖e_i‖ = 1`, which keeps the
/// family comparable with a common scale grid.
pub fn random_norm_family(seed: u64, d: usize, size: usize, mix: FamilyMix) -> Result<Vec<NormSpec>> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::param(format!("dimension {d} outside [1, {MAX_DIM}]")));
    }
    if size == 0 {
        return Err(Error::param("norm family size must be at least 1"));
    }
    let mut rng = StreamKey::new(seed, format!("norm-family/{d}")).stream(0);
    let fixed = [NormSpec::euclidean(), NormSpec::lp(1.0), NormSpec::Lp { p: Exponent::INF }];
    let mut out: Vec<NormSpec> = fixed.into_iter().take(size).collect();
    let mut kind = 0usize;
    while out.len() < size {
        let norm = match mix {
            FamilyMix::LpOnly => NormSpec::lp(1.0 + 7.0 * rng.random::<f64>()),
            FamilyMix::Mixed => {
                let n = match kind % 3 {
                    0 => random_weighted_lp(&mut rng, d),
                    1 => random_ellipsoid(&mut rng, d),
                    _ => random_polytope(&mut rng, d),
                };
                kind += 1;
                n
            }
        };
        out.push(norm);
    }
    Ok(out)
}

fn random_exponent<R: Rng>(rng: &mut R) -> Exponent {
    if rng.random::<f64>() < 0.2 {
        Exponent::INF
    } else {
        Exponent(1.0 + 5.0 * rng.random::<f64>())
    }
}

fn random_weighted_lp<R: Rng>(rng: &mut R, d: usize) -> NormSpec {
    let p = random_exponent(rng);
    let mut weights: Vec<f64> = (0..d).map(|_| (0.2f64).ln() + rng.random::<f64>() * (25f64).ln()).map(f64::exp).collect();
    // ‖e_i‖ = w_i, so normalize by the largest weight
    let top = weights.iter().fold(0.0f64, |a, w| a.max(*w));
    weights.iter_mut().for_each(|w| *w /= top);
    NormSpec::WeightedLp { p, weights }
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

fn random_ellipsoid<R: Rng>(rng: &mut R, d: usize) -> NormSpec {
    let q = gaussian_matrix(rng, d, d).qr().q();
    let log_cond = rng.random::<f64>() * MAX_ELLIPSOID_CONDITION.log10();
    let eig: Vec<f64> = (0..d)
        .map(|i| match i {
            0 => 1.0,
            1 => 10f64.powf(log_cond),
            _ => 10f64.powf(rng.random::<f64>() * log_cond),
        })
        .collect();
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig));
    let mut a = &q * diag * q.transpose();
    a = (&a + a.transpose()) * 0.5;
    // ‖e_i‖² = A_ii
    let top = (0..d).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    a /= top;
    NormSpec::Ellipsoid { matrix: (0..d).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect() }
}

fn random_polytope<R: Rng>(rng: &mut R, d: usize) -> NormSpec {
    loop {
        let m = rng.random_range(d..=4 * d);
        let mut dirs: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / n).collect()
            })
            .collect();
        if rank(&dirs, d) < d {
            continue;
        }
        let top = (0..d)
            .map(|i| dirs.iter().map(|u| u[i].abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        dirs.iter_mut().flatten().for_each(|v| *v /= top);
        return NormSpec::PolytopeGauge { directions: dirs };
    }
}

/// Base norms crossed with a grid of scale factors; each `(norm, scale)`
/// pair is one cell `scaled(norm, scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormFamily {
    pub norms: Vec<NormSpec>,
    pub scales: Vec<f64>,
}

/// One member of a [`NormFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormCell {
    pub norm: usize,
    pub scale: f64,
}

impl NormFamily {
    pub fn new(norms: Vec<NormSpec>, scales: Vec<f64>) -> Result<Self> {
        let fam = Self { norms, scales };
        fam.validate()?;
        Ok(fam)
    }

    pub fn single(norm: NormSpec) -> Self {
        Self { norms: vec![norm], scales: vec![1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.norms.is_empty() || self.scales.is_empty() {
            return Err(Error::param("norm family needs at least one norm and one scale"));
        }
        for n in &self.norms {
            n.validate()?;
        }
        if self.scales.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::param("scales must be positive and finite"));
        }
        Ok(())
    }

    /// Checks that every norm accepts vectors of dimension `d`.
    pub fn check_dimension(&self, d: usize) -> Result<()> {
        for n in &self.norms {
            if let Some(nd) = n.dimension() {
                if nd != d {
                    return Err(Error::Dimension { expected: nd, got: d });
                }
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<NormCell> {
        (0..self.norms.len())
            .flat_map(|norm| self.scales.iter().map(move |&scale| NormCell { norm, scale }))
            .collect()
    }

    pub fn cell_norm(&self, cell: NormCell) -> NormSpec {
        self.norms[cell.norm].clone().scaled(cell.scale)
    }
}

/// Spectral condition number of a symmetric positive-definite matrix.
pub fn condition_number(matrix: &[Vec<f64>]) -> f64 {
    let eig = SymmetricEigen::new(to_dmatrix(matrix)).eigenvalues;
    let hi = eig.iter().fold(f64::MIN, |a, v| a.max(*v));
    let lo = eig.iter().fold(f64::MAX, |a, v| a.min(*v));
    hi / lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(NormSpec::euclidean().evaluate(&[3.0, 4.0]).unwrap(), 5.0);
        let cube = NormSpec::PolytopeGauge { directions: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert_eq!(cube.evaluate(&[0.5, -2.0]).unwrap(), 2.0);
        let ell = NormSpec::Ellipsoid { matrix: vec![vec![4.0, 0.0], vec![0.0, 1.0]] };
        assert!((ell.evaluate(&[1.0, 1.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(NormSpec::Lp { p: Exponent::INF }.evaluate(&[-3.0, 2.0]).unwrap(), 3.0);
        assert_eq!(NormSpec::lp(1.0).evaluate(&[-3.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let ell = NormSpec::Ellipsoid { matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert_eq!(ell.evaluate(&[1.0]), Err(Error::Dimension { expected: 2, got: 1 }));
    }

    #[test]
    fn invalid_norms_rejected() {
        assert!(NormSpec::lp(0.5).validate().is_err());
        let not_pd = NormSpec::Ellipsoid { matrix: vec![vec![1.0, 2.0], vec![2.0, 1.0]] };
        assert!(not_pd.validate().is_err());
        let flat = NormSpec::PolytopeGauge { directions: vec![vec![1.0, 1.0], vec![2.0, 2.0]] };
        assert!(flat.validate().is_err());
        let w = NormSpec::WeightedLp { p: Exponent(2.0), weights: vec![1.0, 0.0] };
        assert!(w.validate().is_err());
        assert!(NormSpec::euclidean().scaled(0.0).validate().is_err());
    }

    #[test]
    fn lp_is_overflow_safe() {
        let x = [1e200, 1e200];
        let v = NormSpec::lp(3.0).eval(&x);
        assert!((v / (1e200 * 2f64.powf(1.0 / 3.0)) - 1.0).abs() < 1e-14);
        assert!((NormSpec::euclidean().eval(&x) / (1e200 * 2f64.sqrt()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_lp_family_is_euclidean() {
        let f = random_norm_family(1, 3, 1, FamilyMix::LpOnly).unwrap();
        assert_eq!(f, vec![NormSpec::euclidean()]);
    }

    #[test]
    fn family_is_deterministic_and_valid() {
        let a = random_norm_family(99, 2, 50, FamilyMix::Mixed).unwrap();
        let b = random_norm_family(99, 2, 50, FamilyMix::Mixed).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for n in &a {
            n.validate().unwrap();
            if let NormSpec::Ellipsoid { matrix } = n {
                assert!(condition_number(matrix) <= MAX_ELLIPSOID_CONDITION * (1.0 + 1e-9));
            }
            if let NormSpec::PolytopeGauge { directions } = n {
                assert!(directions.len() <= 8);
            }
        }
        assert!(a.contains(&NormSpec::lp(1.0)));
        assert!(a.contains(&NormSpec::Lp { p: Exponent::INF }));
    }

    #[test]
    fn exponent_serde_round_trip() {
        let n = NormSpec::Lp { p: Exponent::INF };
        let s = serde_json::to_string(&n).unwrap();
        assert_eq!(s, r#"{"type":"lp","p":"inf"}"#);
        assert_eq!(serde_json::from_str::<NormSpec>(&s).unwrap(), n);
    }

    #[test]
    fn family_cells_cross_norms_and_scales() {
        let fam = NormFamily::new(vec![NormSpec::euclidean(), NormSpec::lp(1.0)], vec![0.5, 2.0]).unwrap();
        let cells = fam.cells();
        assert_eq!(cells.len(), 4);
        let n = fam.cell_norm(cells[1]);
        assert_eq!(n.evaluate(&[3.0, 4.0]).unwrap(), 10.0);
    }
}
