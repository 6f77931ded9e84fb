//! Geometry of the real Stiefel manifold `St(n,k) = {X ∈ ℝ^{n×k} : XᵀX = I_k}`
//! under the canonical metric
//!
//! ```text
//! g_c(X)(V, W) = trace(Vᵀ (I − ½ X Xᵀ) W)
//! ```
//!
//! Points and tangent vectors are immutable values. The exponential map
//! follows canonical-metric geodesics in closed form; the logarithm has no
//! closed form and is computed iteratively (see [`log_map`]).

mod geodesic;
mod log;
mod sample;

pub use geodesic::exp_map;
pub use log::{geodesic_distance, log_map};
pub use sample::{haar_orthogonal, sample_uniform};

pub(crate) use geodesic::complement_qr;

use crate::error::{Error, Result};
use crate::matcore::{sym_inv_sqrt, Matrix};
use crate::tolerance::tolerances;

/// The pair `(n, k)` identifying `St(n,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StiefelShape {
    pub n: usize,
    pub k: usize,
}

impl StiefelShape {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "Stiefel shape requires 1 <= k <= n, got n={n}, k={k}"
            )));
        }
        Ok(StiefelShape { n, k })
    }

    /// Manifold dimension `nk − k(k+1)/2`.
    pub fn dim(&self) -> usize {
        self.n * self.k - self.k * (self.k + 1) / 2
    }

    pub fn is_sphere(&self) -> bool {
        self.k == 1
    }
}

impl std::fmt::Display for StiefelShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "St({},{})", self.n, self.k)
    }
}

/// Where a cached maximal scalar variance came from.
#[derive(Debug, Clone, PartialEq)]
pub enum MaxVarProvenance {
    ClosedForm,
    MonteCarlo {
        samples: usize,
        seed: u64,
        std_error: f64,
        failure_fraction: f64,
    },
    Given,
}

/// A Stiefel manifold together with its maximal scalar variance, the
/// constant the filter's variance map is built on.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    shape: StiefelShape,
    maxvar: f64,
    provenance: MaxVarProvenance,
}

impl ManifoldSpec {
    pub fn new(shape: StiefelShape, maxvar: f64, provenance: MaxVarProvenance) -> Result<Self> {
        if shape.dim() == 0 {
            return Err(Error::invalid(format!("{shape} is zero-dimensional")));
        }
        if !(maxvar.is_finite() && maxvar > 0.0) {
            return Err(Error::invalid(format!(
                "maximal scalar variance must be positive, got {maxvar}"
            )));
        }
        Ok(ManifoldSpec {
            shape,
            maxvar,
            provenance,
        })
    }

    pub fn shape(&self) -> StiefelShape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn k(&self) -> usize {
        self.shape.k
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn maxvar(&self) -> f64 {
        self.maxvar
    }

    pub fn provenance(&self) -> &MaxVarProvenance {
        &self.provenance
    }
}

/// `‖XᵀX − I_k‖_F`.
pub fn orthogonality_defect(x: &Matrix) -> f64 {
    let g = x.tr_matmul(x);
    let mut s = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let d = g[(i, j)] - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s.sqrt()
}

/// A point of `St(n,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    base: Matrix,
}

impl StiefelPoint {
    /// Validates `x` as a Stiefel point. Inputs whose orthogonality defect
    /// lies between the acceptance and re-orthonormalisation tolerances are
    /// replaced by their polar projection; larger defects are rejected.
    pub fn new(x: Matrix) -> Result<Self> {
        let (n, k) = x.shape();
        if k == 0 || k > n {
            return Err(Error::ShapeMismatch {
                expected: (n, k.min(n).max(1)),
                found: (n, k),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        let tol = tolerances();
        let defect = orthogonality_defect(&x);
        if defect <= tol.orthogonality {
            Ok(StiefelPoint { base: x })
        } else if defect <= tol.reorthonormalize {
            project_to_stiefel(&x)
        } else {
            Err(Error::NotOnManifold { defect })
        }
    }

    /// `I_{n,k}`.
    pub fn identity(shape: StiefelShape) -> Self {
        StiefelPoint {
            base: Matrix::eye(shape.n, shape.k),
        }
    }

    pub(crate) fn from_trusted(base: Matrix) -> Self {
        StiefelPoint { base }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.base
    }

    pub fn into_matrix(self) -> Matrix {
        self.base
    }

    pub fn shape(&self) -> StiefelShape {
        StiefelShape {
            n: self.base.rows(),
            k: self.base.cols(),
        }
    }

    /// Left action `φ X` of an orthogonal `n × n` matrix.
    pub fn left_mul(&self, phi: &Matrix) -> Result<StiefelPoint> {
        StiefelPoint::new(phi.try_matmul(&self.base)?)
    }

    /// The zero tangent vector at this point.
    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector {
            base: self.clone(),
            dir: Matrix::zeros(self.base.rows(), self.base.cols()),
        }
    }
}

/// A tangent vector `V` at a base point `X`, i.e. `XᵀV` is skew-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: StiefelPoint,
    dir: Matrix,
}

/// `‖XᵀV + VᵀX‖_F`.
pub fn tangency_defect(x: &Matrix, v: &Matrix) -> f64 {
    let a = x.tr_matmul(v);
    a.distance(&a.transpose().scale(-1.0))
}

impl TangentVector {
    pub fn new(base: StiefelPoint, dir: Matrix) -> Result<Self> {
        base.base.check_same_shape(&dir)?;
        if !dir.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = tangency_defect(&base.base, &dir);
        if defect > tolerances().tangency {
            return Err(Error::NotTangent { defect });
        }
        Ok(TangentVector { base, dir })
    }

    pub(crate) fn from_trusted(base: StiefelPoint, dir: Matrix) -> Self {
        TangentVector { base, dir }
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn dir(&self) -> &Matrix {
        &self.dir
    }

    pub fn into_dir(self) -> Matrix {
        self.dir
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            dir: self.dir.scale(s),
        }
    }

    /// Sum of two vectors at the same base.
    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        same_base(&self.base, &other.base)?;
        Ok(TangentVector {
            base: self.base.clone(),
            dir: &self.dir + &other.dir,
        })
    }

    /// Canonical norm `√g_c(V,V)`.
    pub fn norm(&self) -> f64 {
        canonical_norm_sq(&self.base.base, &self.dir).max(0.0).sqrt()
    }
}

fn same_base(a: &StiefelPoint, b: &StiefelPoint) -> Result<()> {
    if a.base.shape() != b.base.shape() || a.base.distance(&b.base) > 1e-12 {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// Polar projection `pr(X) = X (XᵀX)^{-1/2}` onto the nearest Stiefel point.
///
/// Fails with [`Error::RankDeficient`] when `X` is not of full column rank,
/// where the projection is undefined.
pub fn project_to_stiefel(x: &Matrix) -> Result<StiefelPoint> {
    let (n, k) = x.shape();
    if k == 0 || k > n {
        return Err(Error::ShapeMismatch {
            expected: (n, k.min(n).max(1)),
            found: (n, k),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut p = x.matmul(&sym_inv_sqrt(&x.tr_matmul(x).sym_part())?);
    // One refinement step for ill-conditioned inputs.
    if orthogonality_defect(&p) > 1e-13 {
        p = p.matmul(&sym_inv_sqrt(&p.tr_matmul(&p).sym_part())?);
    }
    Ok(StiefelPoint { base: p })
}

/// Orthogonal projection of an ambient matrix onto `T_X St`:
/// `V = W − X sym(XᵀW)`.
pub fn tangent_project(x: &StiefelPoint, w: &Matrix) -> Result<TangentVector> {
    x.base.check_same_shape(w)?;
    let xtw = x.base.tr_matmul(w).sym_part();
    let v = w - &x.base.matmul(&xtw);
    Ok(TangentVector {
        base: x.clone(),
        dir: v,
    })
}

pub(crate) fn canonical_norm_sq(x: &Matrix, v: &Matrix) -> f64 {
    let xtv = x.tr_matmul(v);
    let vv: f64 = v.as_slice().iter().map(|a| a * a).sum();
    let aa: f64 = xtv.as_slice().iter().map(|a| a * a).sum();
    vv - 0.5 * aa
}

/// Canonical metric `g_c(X)(V,W) = trace(Vᵀ (I − ½XXᵀ) W)`.
pub fn canonical_inner(x: &StiefelPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
    same_base(x, &v.base)?;
    same_base(x, &w.base)?;
    let xtv = x.base.tr_matmul(&v.dir);
    let xtw = x.base.tr_matmul(&w.dir);
    let vw: f64 = v.dir.as_slice().iter().zip(w.dir.as_slice()).map(|(a, b)| a * b).sum();
    let aw: f64 = xtv.as_slice().iter().zip(xtw.as_slice()).map(|(a, b)| a * b).sum();
    Ok(vw - 0.5 * aw)
}
