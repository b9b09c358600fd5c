//! Matrix-free linear maps shared by the solvers and RIP estimators.

use nalgebra::DMatrix;

use crate::error::{check_len, Result};

/// A real linear map `R^cols -> R^rows` with its adjoint.
pub trait LinearMap: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, z: &[f64]) -> Result<Vec<f64>>;
    fn adjoint(&self, w: &[f64]) -> Result<Vec<f64>>;

    /// Materializes the map column by column.
    fn to_dense(&self) -> DMatrix<f64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = DMatrix::zeros(r, c);
        let mut e = vec![0.0; c];
        for j in 0..c {
            e[j] = 1.0;
            let col = self.apply(&e).expect("unit vector has the right length");
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        out
    }
}

impl LinearMap for DMatrix<f64> {
    fn rows(&self) -> usize {
        self.nrows()
    }

    fn cols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.ncols(), z.len())?;
        let mut out = vec![0.0; self.nrows()];
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(j).iter()) {
                    *o += a * zj;
                }
            }
        }
        Ok(out)
    }

    fn adjoint(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nrows(), w.len())?;
        Ok((0..self.ncols())
            .map(|j| self.column(j).iter().zip(w).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// A map multiplied by a fixed scalar.
pub struct Scaled<'a, M: ?Sized> {
    pub inner: &'a M,
    pub factor: f64,
}

impl<M: LinearMap + ?Sized> LinearMap for Scaled<'_, M> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.inner.apply(z)?;
        v.iter_mut().for_each(|x| *x *= self.factor);
        Ok(v)
    }

    fn adjoint(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.inner.adjoint(w)?;
        v.iter_mut().for_each(|x| *x *= self.factor);
        Ok(v)
    }
}

/// Column ℓ1 norms `‖A e_j‖₁`.
pub fn column_l1_norms<M: LinearMap + ?Sized>(map: &M) -> Vec<f64> {
    let dense = map.to_dense();
    (0..dense.ncols())
        .map(|j| dense.column(j).iter().map(|v| v.abs()).sum())
        .collect()
}
