//! CR geometry of the weighted sphere `S^{2n+1} ⊂ ℂ^{n+1}`.
//!
//! The torus acts by `z_j ↦ e^{iθ_j} z_j`. A weight vector with `d = n+1`
//! entries selects `T = Σ μ_j T_j` for the full torus; a single weight `μ`
//! selects the diagonal circle action, i.e. every coordinate rotates with
//! weight `μ`. Either way the geometry only depends on the per-coordinate
//! weights `ν_j` returned by [`coordinate_weights`].
//!
//! Conventions:
//! * `θ = (i/2)(∂ρ − ∂̄ρ)` with `ρ = |z|² − 1`, and `ω₀ = θ / m(z)` where
//!   `m(z) = Σ ν_j |z_j|²`, so that `⟨ω₀, T⟩ = −1`.
//! * The Hermitian metric on `T^{1,0}` is the restriction of the Euclidean one,
//!   `T` is declared unit length and orthogonal to `T^{1,0} ⊕ T^{0,1}`.
//!   A real horizontal vector `U + Ū` then has squared length `2|U|²`.
//!
//! With these choices the Levi form is `(1/(2m)) Id` in an orthonormal frame and
//! the Riemannian volume is `2^n / m(z)` times the round surface measure. The
//! operations below compute both numerically; the closed forms are exposed
//! separately so tests can compare the two.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::WeightVector;
use crate::linalg::HermitianForm;

/// Tolerance on `Σ|z_j|² = 1`.
pub const SPHERE_TOL: f64 = 1e-12;
/// Tolerance on `Σ z̄_j u_j = 0` for frame vectors.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Step of the fourth-order central difference used for `dω₀`.
pub const FD_STEP: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point on the unit sphere in `ℂ^{n+1}`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    z: Vec<Complex64>,
}

impl SpherePoint {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: z.len() });
        }
        let norm_sq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        if !((norm_sq - 1.0).abs() <= SPHERE_TOL) {
            return Err(Error::NotOnSphere { norm_sq });
        }
        Ok(Self { z })
    }

    /// The point `(√t₁, …, √t_{n+1})` for `t` in the closed simplex. `t` is
    /// renormalized to sum to one.
    pub fn from_simplex(t: &[f64]) -> Result<Self> {
        if t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::NotOnSphere { norm_sq: f64::NAN });
        }
        let s: f64 = t.iter().sum();
        Self::new(t.iter().map(|x| Complex64::new((x / s).sqrt(), 0.0)).collect())
    }

    /// Same moduli as `t`, with the given phases.
    pub fn from_simplex_with_phases(t: &[f64], phases: &[f64]) -> Result<Self> {
        let base = Self::from_simplex(t)?;
        if phases.len() != t.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: phases.len() });
        }
        Ok(Self { z: base.z.iter().zip(phases).map(|(c, &ph)| c * Complex64::from_polar(1.0, ph)).collect() })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(z: Vec<Complex64>) -> Result<Self> {
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotOnSphere { norm_sq: norm * norm });
        }
        Self::new(z.into_iter().map(|c| c / norm).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    /// Complex dimension `n` of `T^{1,0}`.
    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    /// `t_j = |z_j|²`.
    pub fn moduli_sq(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.norm_sqr()).collect()
    }

    fn as_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.z)
    }
}

/// Per-coordinate rotation weights `ν_j` for a sphere of dimension `2n+1`.
pub fn coordinate_weights(mu: &WeightVector, n: usize) -> Result<Vec<f64>> {
    match mu.dim() {
        d if d == n + 1 => Ok(mu.entries().to_vec()),
        1 => Ok(vec![mu.entries()[0]; n + 1]),
        d => Err(Error::DimensionMismatch { expected: n + 1, found: d }),
    }
}

/// A basis of `T^{1,0}_z X = {u : Σ z̄_j u_j = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrFrame {
    vectors: Vec<DVector<Complex64>>,
}

impl CrFrame {
    /// Wraps `vectors` after checking that each one is tangent at `z`.
    pub fn new(z: &SpherePoint, vectors: Vec<DVector<Complex64>>) -> Result<Self> {
        if vectors.len() != z.n() {
            return Err(Error::DimensionMismatch { expected: z.n(), found: vectors.len() });
        }
        let zv = z.as_vector();
        for (index, u) in vectors.iter().enumerate() {
            if u.len() != zv.len() {
                return Err(Error::DimensionMismatch { expected: zv.len(), found: u.len() });
            }
            let defect = zv.dotc(u).norm();
            if defect > TANGENCY_TOL * (1.0 + u.norm()) {
                return Err(Error::FrameNotTangent { index, defect });
            }
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[DVector<Complex64>] {
        &self.vectors
    }

    /// Gram matrix `G_ab = ⟨u_a, u_b⟩ = Σ_j u_a,j conj(u_b,j)`.
    pub fn gram(&self) -> HermitianForm {
        let n = self.vectors.len();
        let m = DMatrix::from_fn(n, n, |a, b| self.vectors[b].dotc(&self.vectors[a]));
        HermitianForm::new(m).expect("Gram matrices are Hermitian")
    }

    /// Recombines the frame, `u'_a = Σ_b c_{ab} u_b`.
    pub fn recombine(&self, coefficients: &DMatrix<Complex64>) -> Self {
        let n = self.vectors.len();
        let vectors = (0..n)
            .map(|a| {
                (0..n).fold(DVector::zeros(self.vectors[0].len()), |acc, b| acc + &self.vectors[b] * coefficients[(a, b)])
            })
            .collect();
        Self { vectors }
    }
}

/// Orthonormal frame of `T^{1,0}_z X` by Gram–Schmidt on the coordinate axes,
/// skipping the axis where `|z_j|` is largest (lowest index on ties).
pub fn cr_frame(z: &SpherePoint) -> CrFrame {
    let dim = z.coords().len();
    let zv = z.as_vector();
    let pivot = (0..dim).fold(0, |best, j| if z.coords()[j].norm() > z.coords()[best].norm() { j } else { best });
    let mut vectors: Vec<DVector<Complex64>> = Vec::with_capacity(dim - 1);
    for j in (0..dim).filter(|&j| j != pivot) {
        let mut u = DVector::from_fn(dim, |i, _| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        // Two passes of modified Gram–Schmidt against z and earlier vectors.
        for _ in 0..2 {
            let c = zv.dotc(&u);
            u -= &zv * c;
            for v in &vectors {
                let c = v.dotc(&u);
                u -= v * c;
            }
        }
        let norm = u.norm();
        vectors.push(u / Complex64::new(norm, 0.0));
    }
    CrFrame { vectors }
}

/// `(1,0)`-representative `(iν₁z₁, …, iν_{n+1}z_{n+1})` of the Reeb field `T`.
pub fn reeb_vector(mu: &WeightVector, z: &SpherePoint) -> Result<DVector<Complex64>> {
    let nu = coordinate_weights(mu, z.n())?;
    Ok(DVector::from_iterator(nu.len(), nu.iter().zip(z.coords()).map(|(&w, &c)| I * w * c)))
}

/// `m(z) = Σ ν_j |z_j|² = −⟨θ, T⟩`.
pub fn contact_scale(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    let nu = coordinate_weights(mu, z.n())?;
    Ok(scale_from_moduli(&nu, &z.moduli_sq()))
}

pub(crate) fn scale_from_moduli(nu: &[f64], t: &[f64]) -> f64 {
    nu.iter().zip(t).map(|(w, x)| w * x).sum()
}

/// Radially constant extension of `ω₀` to `ℂ^{n+1} \ {0}`, applied to the
/// ambient vector `y`.
fn contact_form(nu: &[f64], x: &[Complex64], y: &[Complex64]) -> f64 {
    let r = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let xs: Vec<Complex64> = x.iter().map(|c| c / r).collect();
    let m: f64 = nu.iter().zip(&xs).map(|(w, c)| w * c.norm_sqr()).sum();
    // θ(y) = (i/2) Σ (x̄_j y_j − x_j ȳ_j) = −Im Σ x̄_j y_j
    let pairing: Complex64 = xs.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    -pairing.im / m
}

/// `dω₀(X, Y)` for constant real ambient vectors (given as complex vectors
/// under `ℂ^{n+1} ≅ ℝ^{2n+2}`), by five-point central differences.
fn d_contact_form(nu: &[f64], z: &[Complex64], x: &[Complex64], y: &[Complex64]) -> f64 {
    let shifted = |dir: &[Complex64], s: f64| -> Vec<Complex64> { z.iter().zip(dir).map(|(a, b)| a + b * s).collect() };
    let directional = |dir: &[Complex64], arg: &[Complex64]| {
        let at = |s: f64| contact_form(nu, &shifted(dir, s * FD_STEP), arg);
        (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * FD_STEP)
    };
    // Constant fields commute, so dω(X,Y) = X(ω(Y)) − Y(ω(X)).
    directional(x, y) - directional(y, x)
}

/// Levi matrix `L_ab = 𝓛_z(u_a, ū_b) = −(1/2i) dω₀(u_a ∧ ū_b)` in the given frame.
pub fn levi_matrix(mu: &WeightVector, z: &SpherePoint, frame: &CrFrame) -> Result<HermitianForm> {
    let nu = coordinate_weights(mu, z.n())?;
    let checked = CrFrame::new(z, frame.vectors.clone())?;
    let n = checked.vectors.len();
    let zc = z.coords();
    // U = ½(R(u) − i R(iu)), V̄ = ½(R(v) + i R(iv)); dω₀ is extended bilinearly.
    let entry = |u: &DVector<Complex64>, v: &DVector<Complex64>| -> Complex64 {
        let (u, v) = (u.as_slice(), v.as_slice());
        let iu: Vec<Complex64> = u.iter().map(|c| I * c).collect();
        let iv: Vec<Complex64> = v.iter().map(|c| I * c).collect();
        let d = |a: &[Complex64], b: &[Complex64]| d_contact_form(&nu, zc, a, b);
        let pairing = Complex64::new(d(u, v) + d(&iu, &iv), d(u, &iv) - d(&iu, v)) * 0.25;
        // −1/(2i) = i/2
        pairing * I * 0.5
    };
    let m = DMatrix::from_fn(n, n, |a, b| entry(&checked.vectors[a], &checked.vectors[b]));
    HermitianForm::new(m)
}

/// `det 𝓛_z`: product of the Levi eigenvalues relative to the metric, computed
/// from the numerical Levi matrix in the canonical frame.
pub fn det_levi(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    det_levi_in_frame(mu, z, &cr_frame(z))
}

/// `det 𝓛_z` from an arbitrary (not necessarily orthonormal) frame, as the
/// product of generalized eigenvalues of the pencil `(L, Gram)`.
pub fn det_levi_in_frame(mu: &WeightVector, z: &SpherePoint, frame: &CrFrame) -> Result<f64> {
    let levi = levi_matrix(mu, z, frame)?;
    Ok(levi.generalized_eigenvalues(&frame.gram())?.iter().product())
}

/// Closed form `(2m(z))^{−n}`.
pub fn det_levi_closed_form(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    Ok((2.0 * contact_scale(mu, z)?).powi(-(z.n() as i32)))
}

/// Density of `dv_X` relative to the round measure, as the ratio of Gram
/// determinants on the real basis `{R(u_a), R(iu_a), T}` of `T_z X`.
pub fn volume_density(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    volume_density_in_frame(mu, z, &cr_frame(z))
}

pub fn volume_density_in_frame(mu: &WeightVector, z: &SpherePoint, frame: &CrFrame) -> Result<f64> {
    let reeb = reeb_vector(mu, z)?;
    let frame = CrFrame::new(z, frame.vectors.clone())?;
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(2 * z.n() + 1);
    for u in frame.vectors() {
        basis.push(u.clone());
        basis.push(u * I);
    }
    let horizontal = basis.len();
    basis.push(reeb);
    let dim = basis.len();
    // Euclidean real inner product of vectors in ℂ^{n+1} ≅ ℝ^{2n+2}.
    let real_dot = |a: &DVector<Complex64>, b: &DVector<Complex64>| a.dotc(b).re;
    let round = DMatrix::from_fn(dim, dim, |i, j| real_dot(&basis[i], &basis[j]));
    let ours = DMatrix::from_fn(dim, dim, |i, j| match (i < horizontal, j < horizontal) {
        (true, true) => 2.0 * real_dot(&basis[i], &basis[j]),
        (false, false) => 1.0,
        _ => 0.0,
    });
    Ok((ours.determinant() / round.determinant()).sqrt())
}

/// Closed form `2^n / m(z)`.
pub fn volume_density_closed_form(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    Ok(2f64.powi(z.n() as i32) / contact_scale(mu, z)?)
}

/// `2^n / m(t)` for simplex coordinates `t`.
pub(crate) fn volume_density_from_moduli(nu: &[f64], t: &[f64]) -> f64 {
    2f64.powi(t.len() as i32 - 1) / scale_from_moduli(nu, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn mu(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> SpherePoint {
        let z: Vec<Complex64> = (0..dim).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        SpherePoint::normalized(z).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        m.qr().q()
    }

    #[test]
    fn sphere_point_validation() {
        assert!(SpherePoint::new(vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        assert!(SpherePoint::new(vec![c(1.0, 0.0)]).is_err());
        assert!(SpherePoint::from_simplex(&[0.5, 0.5]).is_ok());
    }

    #[test]
    fn frame_examples() {
        let z = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = cr_frame(&z);
        assert!((&f.vectors()[0] - DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])).norm() < 1e-15);

        let z = SpherePoint::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let frame = cr_frame(&z);
        let u = &frame.vectors()[0];
        // Equal to (1,-1)/√2 up to a unit phase.
        let target = DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]);
        assert!((target.dotc(u).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 2..5 {
            for _ in 0..20 {
                let z = random_point(&mut rng, dim);
                let f = cr_frame(&z);
                let g = f.gram();
                assert!((g.matrix() - DMatrix::identity(dim - 1, dim - 1)).norm() < 1e-12);
                assert!(CrFrame::new(&z, f.vectors().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn reeb_examples() {
        let z = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = reeb_vector(&mu(&[1.0]), &z).unwrap();
        assert_eq!(r.as_slice(), &[c(0.0, 1.0), c(0.0, 0.0)]);

        let z = SpherePoint::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = reeb_vector(&mu(&[1.0, SQRT_2]), &z).unwrap();
        assert!((r[1] - c(0.0, SQRT_2)).norm() < 1e-15 && r[0].norm() == 0.0);

        let z = SpherePoint::from_simplex(&[0.5, 0.5]).unwrap();
        let r = reeb_vector(&mu(&[2.0, 3.0]), &z).unwrap();
        assert!((r[0] - c(0.0, SQRT_2)).norm() < 1e-15);
        assert!((r[1] - c(0.0, 3.0 / SQRT_2)).norm() < 1e-15);

        assert!(reeb_vector(&mu(&[1.0, 2.0, 3.0]), &z).is_err());
    }

    #[test]
    fn contact_scale_examples() {
        let w = mu(&[1.0, SQRT_2]);
        let at = |t: &[f64]| contact_scale(&w, &SpherePoint::from_simplex(t).unwrap()).unwrap();
        assert!((at(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((at(&[0.0, 1.0]) - SQRT_2).abs() < 1e-15);
        assert!((at(&[0.5, 0.5]) - 1.207106781186548).abs() < 1e-14);
    }

    #[test]
    fn contact_form_is_normalized_against_reeb() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = mu(&[1.0, SQRT_2, 0.6]);
        for _ in 0..10 {
            let z = random_point(&mut rng, 3);
            let nu = coordinate_weights(&w, 2).unwrap();
            let reeb = reeb_vector(&w, &z).unwrap();
            // The real vector of T is the complex vector iνz itself.
            let value = contact_form(&nu, z.coords(), reeb.as_slice());
            assert!((value + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn levi_examples() {
        let z = SpherePoint::from_simplex(&[0.3, 0.7]).unwrap();
        let l = levi_matrix(&mu(&[1.0]), &z, &cr_frame(&z)).unwrap();
        assert!((l.matrix()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-6);

        let z = SpherePoint::from_simplex(&[0.0, 1.0]).unwrap();
        let l = levi_matrix(&mu(&[1.0, SQRT_2]), &z, &cr_frame(&z)).unwrap();
        assert!((l.matrix()[(0, 0)].re - 1.0 / (2.0 * SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn levi_rejects_non_tangent_frame() {
        let z = SpherePoint::from_simplex(&[0.5, 0.5]).unwrap();
        let bad = CrFrame { vectors: vec![DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])] };
        assert!(matches!(levi_matrix(&mu(&[1.0]), &z, &bad), Err(Error::FrameNotTangent { .. })));
    }

    #[test]
    fn det_levi_examples() {
        let z = SpherePoint::from_simplex(&[0.2, 0.8]).unwrap();
        assert!((det_levi(&mu(&[1.0]), &z).unwrap() - 0.5).abs() < 1e-6);
        let z = SpherePoint::from_simplex(&[0.0, 1.0]).unwrap();
        assert!((det_levi(&mu(&[1.0, SQRT_2]), &z).unwrap() - 0.3535534).abs() < 1e-6);
    }

    #[test]
    fn volume_density_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let z = random_point(&mut rng, 2);
            assert!((volume_density(&mu(&[1.0]), &z).unwrap() - 2.0).abs() < 1e-12);
        }
        let w = mu(&[1.0, SQRT_2]);
        let z = SpherePoint::from_simplex(&[1.0, 0.0]).unwrap();
        assert!((volume_density(&w, &z).unwrap() - 2.0).abs() < 1e-12);
        let z = SpherePoint::from_simplex(&[0.0, 1.0]).unwrap();
        assert!((volume_density(&w, &z).unwrap() - SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn frame_invariance_under_recombination() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = mu(&[1.0, SQRT_2, 1.7]);
        for _ in 0..10 {
            let z = random_point(&mut rng, 3);
            let f = cr_frame(&z);
            let u = random_unitary(&mut rng, 2);
            let g = f.recombine(&u);
            let d0 = det_levi_in_frame(&w, &z, &f).unwrap();
            let d1 = det_levi_in_frame(&w, &z, &g).unwrap();
            assert!((d0 - d1).abs() < 1e-10, "{d0} {d1}");
            let v0 = volume_density_in_frame(&w, &z, &f).unwrap();
            let v1 = volume_density_in_frame(&w, &z, &g).unwrap();
            assert!((v0 - v1).abs() < 1e-10);
            // A non-unitary recombination still gives the same determinant
            // through the generalized eigenproblem.
            let skew = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.1), c(0.0, 0.0), c(0.5, 0.0)]);
            let d2 = det_levi_in_frame(&w, &z, &f.recombine(&skew)).unwrap();
            assert!((d0 - d2).abs() < 1e-9);
        }
    }

    #[test]
    fn torus_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = mu(&[1.0, SQRT_2]);
        for _ in 0..10 {
            let t0: f64 = rng.random_range(0.05..0.95);
            let t = [t0, 1.0 - t0];
            let a = SpherePoint::from_simplex(&t).unwrap();
            let phases = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
            let b = SpherePoint::from_simplex_with_phases(&t, &phases).unwrap();
            assert!((contact_scale(&w, &a).unwrap() - contact_scale(&w, &b).unwrap()).abs() < 1e-12);
            assert!((volume_density(&w, &a).unwrap() - volume_density(&w, &b).unwrap()).abs() < 1e-12);
            assert!((det_levi(&w, &a).unwrap() - det_levi(&w, &b).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_and_positivity_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for dim in [2usize, 3] {
            let w = if dim == 2 { mu(&[1.0, SQRT_2]) } else { mu(&[1.0, SQRT_2, 0.45]) };
            for _ in 0..100 {
                let z = random_point(&mut rng, dim);
                let l = levi_matrix(&w, &z, &cr_frame(&z)).unwrap();
                assert!(l.eigenvalues().iter().all(|&e| e > 0.0));
                let d = det_levi(&w, &z).unwrap();
                assert!((d - det_levi_closed_form(&w, &z).unwrap()).abs() < 1e-6);
                let v = volume_density(&w, &z).unwrap();
                assert!((v - volume_density_closed_form(&w, &z).unwrap()).abs() < 1e-8);
            }
        }
    }
}
