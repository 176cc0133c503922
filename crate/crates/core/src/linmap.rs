//! Linear maps between R¹, R² and R³ with cached rank data.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

/// A map `Rⁿ → Rᵐ` given by an `m × n` matrix, with rank, kernel and image
/// bases from the singular value decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapSpec {
    matrix: DMatrix<f64>,
    rank: usize,
    /// Orthonormal columns spanning the kernel.
    kernel: DMatrix<f64>,
    /// Orthonormal columns spanning the image.
    image: DMatrix<f64>,
    /// `p = V_rᵀ`: surjection onto `R^rank` with orthonormal rows.
    surjection: DMatrix<f64>,
    /// `j = U_r Σ_r`: injection with `matrix = j·p`.
    injection: DMatrix<f64>,
}

impl LinearMapSpec {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (m, n) = matrix.shape();
        if m == 0 || n == 0 || m > 3 || n > 3 {
            return Err(Error::Dimension(format!("maps between R^1..R^3, got {m}×{n}")));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        // pad with zero rows so the SVD returns a full basis of the source
        let d = m.max(n);
        let mut padded = DMatrix::zeros(d, n);
        padded.view_mut((0, 0), (m, n)).copy_from(&matrix);
        let svd = padded.svd(true, true);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap().then(a.cmp(&b)));
        let smax = svd.singular_values.max();
        let rank = order
            .iter()
            .filter(|&&i| svd.singular_values[i] > RANK_TOL * smax.max(1.0))
            .count();
        let take_rows = |idx: &[usize]| DMatrix::from_fn(idx.len(), n, |r, c| vt[(idx[r], c)]);
        let surjection = take_rows(&order[..rank]);
        let kernel = take_rows(&order[rank..]).transpose();
        let image = DMatrix::from_fn(m, rank, |r, c| u[(r, order[c])]);
        let injection = DMatrix::from_fn(m, rank, |r, c| u[(r, order[c])] * svd.singular_values[order[c]]);
        let mut spec = Self {
            matrix,
            rank,
            kernel,
            image,
            surjection,
            injection,
        };
        spec.canonicalize_signs();
        Ok(spec)
    }

    /// Fixes the sign of each singular pair so the factorization does not
    /// depend on the SVD backend's sign choices.
    fn canonicalize_signs(&mut self) {
        for c in 0..self.rank {
            let col = self.injection.column(c);
            let pivot = col.iter().copied().fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if pivot < 0.0 {
                self.injection.column_mut(c).neg_mut();
                self.image.column_mut(c).neg_mut();
                self.surjection.row_mut(c).neg_mut();
            }
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Format(format!("{rows}×{cols} map with {} entries", data.len())));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is valid")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn image(&self) -> &DMatrix<f64> {
        &self.image
    }

    pub fn is_surjective(&self) -> bool {
        self.rank == self.target_dim()
    }

    pub fn is_injective(&self) -> bool {
        self.rank == self.source_dim()
    }

    /// `(p, j)` with `p` surjective, `j` injective and `f = j∘p`.
    /// Fails for the zero map, which has no nontrivial factorization.
    pub fn factorization(&self) -> Result<(LinearMapSpec, LinearMapSpec)> {
        if self.rank == 0 {
            return Err(Error::Dimension("zero map has rank 0".into()));
        }
        Ok((
            LinearMapSpec::new(self.surjection.clone())?,
            LinearMapSpec::new(self.injection.clone())?,
        ))
    }

    /// Jacobian `√det(AAᵀ)` for surjections or `√det(AᵀA)` for injections.
    pub fn jacobian(&self) -> f64 {
        let a = &self.matrix;
        let g = if self.is_surjective() {
            a * a.transpose()
        } else {
            a.transpose() * a
        };
        g.determinant().abs().sqrt()
    }

    /// Moore–Penrose pseudo-inverse; a right inverse for surjections.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        self.matrix
            .clone()
            .pseudo_inverse(RANK_TOL)
            .expect("nonnegative tolerance")
    }

    pub fn compose(&self, inner: &LinearMapSpec) -> Result<LinearMapSpec> {
        if self.source_dim() != inner.target_dim() {
            return Err(Error::Dimension(format!(
                "cannot compose R^{}→R^{} after R^{}→R^{}",
                self.source_dim(),
                self.target_dim(),
                inner.source_dim(),
                inner.target_dim()
            )));
        }
        LinearMapSpec::new(&self.matrix * &inner.matrix)
    }
}

/// Random `m × n` map of full rank with entries uniform in `[−1, 1]`.
pub fn random_full_rank<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> LinearMapSpec {
    loop {
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let spec = LinearMapSpec::new(a).expect("dimensions within range");
        let s = spec.matrix.clone().svd(false, false).singular_values;
        if spec.rank == m.min(n) && s.min() > 0.2 {
            return spec;
        }
    }
}

/// Random invertible `r × r` matrix with condition number below 10.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, r: usize) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(r, r, |_, _| rng.gen_range(-1.0..1.0));
        let s = a.clone().svd(false, false).singular_values;
        if s.min() > 0.1 * s.max() && s.min() > 0.2 {
            return a;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearMapJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&LinearMapSpec> for LinearMapJson {
    fn from(f: &LinearMapSpec) -> Self {
        let (rows, cols) = f.matrix.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f.matrix[(r, c)]);
            }
        }
        Self { rows, cols, data }
    }
}

impl LinearMapJson {
    pub fn into_map(self) -> Result<LinearMapSpec> {
        LinearMapSpec::from_rows(self.rows, self.cols, &self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factorization_reproduces_the_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (m, n) in [(1, 2), (2, 1), (2, 3), (3, 2), (3, 3), (1, 3), (3, 1)] {
            let f = random_full_rank(&mut rng, m, n);
            let (p, j) = f.factorization().unwrap();
            assert!((j.matrix() * p.matrix() - f.matrix()).amax() < 1e-13);
            assert!(p.is_surjective() && j.is_injective());
            assert!((p.matrix() * p.matrix().transpose() - DMatrix::identity(p.target_dim(), p.target_dim())).amax() < 1e-13);
            assert_eq!(f.kernel().ncols(), n - f.rank());
            if f.kernel().ncols() > 0 {
                assert!((f.matrix() * f.kernel()).amax() < 1e-13);
            }
            assert_eq!(f.factorization().unwrap(), f.factorization().unwrap());
        }
    }

    #[test]
    fn rank_deficient_maps() {
        let f = LinearMapSpec::from_rows(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.rank(), 1);
        assert_eq!(f.kernel().ncols(), 2);
        let (p, j) = f.factorization().unwrap();
        assert_eq!((p.target_dim(), j.source_dim()), (1, 1));
        assert!((j.matrix() * p.matrix() - f.matrix()).amax() < 1e-13);
    }

    #[test]
    fn jacobians() {
        let p = LinearMapSpec::from_rows(1, 2, &[3.0, 4.0]).unwrap();
        assert!((p.jacobian() - 5.0).abs() < 1e-14);
        let j = LinearMapSpec::from_rows(2, 1, &[3.0, 4.0]).unwrap();
        assert!((j.jacobian() - 5.0).abs() < 1e-14);
        let g = LinearMapSpec::from_rows(2, 2, &[2.0, 1.0, 0.0, 3.0]).unwrap();
        assert!((g.jacobian() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let f = LinearMapSpec::from_rows(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let back = LinearMapJson::from(&f).into_map().unwrap();
        assert_eq!(back.matrix(), f.matrix());
        assert!(LinearMapSpec::from_rows(2, 2, &[1.0]).is_err());
    }
}
