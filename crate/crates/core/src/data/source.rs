use crate::data::shuffle::ShuffledStream;
use crate::data::GroundTruthModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, stream, Rng};
use crate::scalar::Scalar;

/// An endless supply of training batches.
pub trait ActivationSource<T> {
    fn d_act(&self) -> usize;
    fn next_batch(&mut self, rows: usize) -> Result<Matrix<T>>;
}

/// Fresh synthetic batches; batch `i` comes from sub-stream `i` of the model seed.
pub struct SyntheticSource<T> {
    model: GroundTruthModel<T>,
    next_index: u64,
}

impl<T: Scalar> SyntheticSource<T> {
    pub fn new(model: GroundTruthModel<T>) -> Self {
        Self {
            model,
            next_index: 0,
        }
    }

    pub fn model(&self) -> &GroundTruthModel<T> {
        &self.model
    }
}

impl<T: Scalar> ActivationSource<T> for SyntheticSource<T> {
    fn d_act(&self) -> usize {
        self.model.d_act
    }

    fn next_batch(&mut self, rows: usize) -> Result<Matrix<T>> {
        let batch = self.model.sample_indexed(rows, self.next_index);
        self.next_index += 1;
        Ok(batch.data)
    }
}

/// Cycles over an in-memory activation matrix, passing each epoch through a
/// shuffling buffer of `buffer_rows` rows.
pub struct MatrixSource<T> {
    data: Matrix<T>,
    buffer_rows: usize,
    order: Vec<usize>,
    pos: usize,
    rng: Option<Rng>,
}

impl<T: Scalar> MatrixSource<T> {
    pub fn new(data: Matrix<T>, buffer_rows: usize, seed: u64) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::Config("activation source has no rows".into()));
        }
        Ok(Self {
            data,
            buffer_rows: buffer_rows.max(1),
            order: Vec::new(),
            pos: 0,
            rng: Some(rng::substream(seed, stream::SHUFFLE)),
        })
    }

    fn refill(&mut self) {
        let rng = self.rng.take().expect("rng present between epochs");
        let mut shuffled = ShuffledStream::new(0..self.data.rows(), self.buffer_rows, rng);
        self.order = shuffled.by_ref().collect();
        self.rng = Some(shuffled.into_rng());
        self.pos = 0;
    }
}

impl<T: Scalar> ActivationSource<T> for MatrixSource<T> {
    fn d_act(&self) -> usize {
        self.data.cols()
    }

    fn next_batch(&mut self, rows: usize) -> Result<Matrix<T>> {
        let mut out = Matrix::zeros(rows, self.data.cols());
        for r in 0..rows {
            if self.pos >= self.order.len() {
                self.refill();
            }
            out.row_mut(r).copy_from_slice(self.data.row(self.order[self.pos]));
            self.pos += 1;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_source_cycles_every_row_each_epoch() {
        let data = Matrix::from_vec(5, 1, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut src = MatrixSource::new(data, 5, 1).unwrap();
        let batch = src.next_batch(10).unwrap();
        let mut first: Vec<f64> = batch.as_slice()[..5].to_vec();
        let mut second: Vec<f64> = batch.as_slice()[5..].to_vec();
        first.sort_by(f64::total_cmp);
        second.sort_by(f64::total_cmp);
        assert_eq!(first, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(first, second);
    }
}
