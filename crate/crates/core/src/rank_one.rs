//! Stationary distributions, the power method, and the rank-one gain
//! `(I − γ 1 dᵀ)⁻¹ = I + γ/(1−γ) 1 dᵀ`.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{dot, Scalar};

/// Probability vector on states or state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistVec<T>(Vec<T>);

impl<T> Deref for DistVec<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> DistVec<T> {
    /// Validates nonnegativity and unit mass.
    pub fn new(d: Vec<T>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::NotADistribution("empty vector".into()));
        }
        if let Some(i) = d.iter().position(|x| !(*x >= T::zero()) || !x.is_finite()) {
            return Err(Error::NotADistribution(format!("entry {i} is {}", d[i])));
        }
        let mass: T = d.iter().copied().sum();
        if (mass - T::one()).abs().as_f64() > T::SIMPLEX_TOL {
            return Err(Error::NotADistribution(format!("mass {mass}")));
        }
        Ok(Self(d))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution needs a nonempty support");
        Self(vec![T::one() / T::from_usize_lossy(len); len])
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len, "point mass outside support");
        let mut d = vec![T::zero(); len];
        d[at] = T::one();
        Self(d)
    }

    /// Clamps rounding-level negatives to zero and rescales to unit 1-norm.
    ///
    /// Fails when a negative entry exceeds the clamp tolerance or the
    /// vector carries no mass.
    pub fn normalized(mut f: Vec<T>) -> Result<Self> {
        let clamp = T::lit(T::CLAMP_TOL);
        for x in f.iter_mut() {
            if *x < T::zero() {
                if *x >= -clamp {
                    *x = T::zero();
                } else {
                    return Err(Error::NotADistribution(format!("negative entry {x}")));
                }
            }
        }
        let mass: T = f.iter().copied().sum();
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::NotADistribution(format!("mass {mass}")));
        }
        f.iter_mut().for_each(|x| *x /= mass);
        Ok(Self(f))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

/// One power-method step: `Pᵀ d / ‖Pᵀ d‖₁`.
pub fn power_step<T: Scalar>(p: &DenseMatrix<T>, d: &DistVec<T>) -> Result<DistVec<T>> {
    if !p.is_square() || p.rows() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: p.rows(),
            found: d.len(),
        });
    }
    DistVec::normalized(p.tr_mul_vec(d))
}

/// Unique stationary distribution `dᵀ P = dᵀ`, by solving `(Pᵀ − I) d = 0`
/// with the last equation replaced by `Σ d = 1`.
pub fn exact_stationary<T: Scalar>(p: &DenseMatrix<T>) -> Result<DistVec<T>> {
    if !p.is_square() || p.rows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: p.rows(),
            found: p.cols(),
        });
    }
    let n = p.rows();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = p[(j, i)];
        }
        a[(i, i)] -= T::one();
    }
    a.row_mut(n - 1).iter_mut().for_each(|x| *x = T::one());
    let mut rhs = vec![T::zero(); n];
    rhs[n - 1] = T::one();
    let d = a.solve(&rhs).map_err(|e| match e {
        Error::SingularSystem => Error::NonUniqueStationary,
        other => other,
    })?;
    // Rounding can leave entries slightly negative on near-transient states.
    let d = d.into_iter().map(|x| x.max(T::zero())).collect();
    DistVec::normalized(d)
}

/// Coefficient `γ^{L+1} / (1 − γ)` of the rank-one term in the modified
/// policy iteration gain with `L` extra matrix powers.
pub fn rank_one_coefficient<T: Scalar>(gamma: T, extra_powers: usize) -> T {
    let mut g = gamma;
    for _ in 0..extra_powers {
        g *= gamma;
    }
    g / (T::one() - gamma)
}

/// Constant shift `γ/(1−γ) ⟨d, r⟩`.
pub fn rank_one_shift<T: Scalar>(d: &[T], gamma: T, r: &[T]) -> Result<T> {
    if d.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            found: r.len(),
        });
    }
    Ok(rank_one_coefficient(gamma, 0) * dot(d, r))
}

/// `(I − γ 1 dᵀ)⁻¹ r = r + γ/(1−γ) ⟨d, r⟩ 1`.
pub fn rank_one_correct<T: Scalar>(d: &DistVec<T>, gamma: T, r: &[T]) -> Result<Vec<T>> {
    let alpha = rank_one_shift(d, gamma, r)?;
    Ok(r.iter().map(|&x| x + alpha).collect())
}

fn to_nalgebra<T: Scalar>(p: &DenseMatrix<T>) -> DMatrix<f64> {
    DMatrix::from_fn(p.rows(), p.cols(), |i, j| p[(i, j)].as_f64())
}

/// Eigenvalue moduli of a square matrix in decreasing order (real Schur
/// form). Intended for small matrices.
pub fn eigenvalue_moduli<T: Scalar>(p: &DenseMatrix<T>) -> Result<Vec<f64>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p.rows(),
            found: p.cols(),
        });
    }
    if p.rows() == 0 {
        return Ok(Vec::new());
    }
    let schur = to_nalgebra(p)
        .try_schur(1e-15, 100_000)
        .ok_or(Error::ConvergenceFailure)?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Scalar>(p: &DenseMatrix<T>) -> Result<T> {
    let moduli = eigenvalue_moduli(p)?;
    Ok(T::lit(moduli.first().copied().unwrap_or(0.0)))
}

/// `|λ₂(P)|` of a stochastic matrix: the largest modulus after removing one
/// copy of the Perron root.
pub fn second_eigenvalue_modulus<T: Scalar>(p: &DenseMatrix<T>) -> Result<T> {
    let moduli = eigenvalue_moduli(p)?;
    Ok(T::lit(moduli.get(1).copied().unwrap_or(0.0)))
}

/// `P − 1 dᵀ`.
pub fn deflate<T: Scalar>(p: &DenseMatrix<T>, d: &[T]) -> DenseMatrix<T> {
    let mut out = p.clone();
    for i in 0..p.rows() {
        for (x, &dj) in out.row_mut(i).iter_mut().zip(d) {
            *x -= dj;
        }
    }
    out
}
