//! Statistical completion of the unselected features.

use crate::error::Result;
use crate::filter::{FilterSet, IndexSet};
use crate::gsm::sample_gsm_features;
use crate::tensor::{FeatureTensor, QuantizedTensor, ScaleField};

/// Keeps the decoded values on `set` and fills every other element with an
/// independent draw `theta * u`. The draw for an element does not depend on
/// the set, so two sets share their generated values where both generate.
pub fn surrogate_generate(
    decoded: &QuantizedTensor,
    set: &FilterSet,
    theta: &ScaleField,
    seed: u64,
) -> Result<FeatureTensor> {
    decoded.dims().expect(theta.dims())?;
    decoded.dims().expect(set.dims())?;
    let mut out = sample_gsm_features(theta, seed);
    for (idx, (v, &k)) in out.as_mut_slice().iter_mut().zip(decoded.as_slice()).enumerate() {
        if set.contains_flat(idx) {
            *v = k as f64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Dims, Tensor3};

    #[test]
    fn full_set_is_identity() {
        let d = Dims::new(3, 4, 5);
        let q = Tensor3::from_fn(d, |i, j, c| (i * 7 + j * 3 + c) as i32 - 20);
        let theta = ScaleField::constant(d, 2.0).unwrap();
        let g = surrogate_generate(&q, &FilterSet::full(d), &theta, 9).unwrap();
        assert_eq!(g, q.map(|k| k as f64));
    }

    #[test]
    fn empty_set_is_a_gsm_sample() {
        let d = Dims::new(3, 4, 5);
        let q = Tensor3::filled(d, 3);
        let theta = ScaleField::constant(d, 2.0).unwrap();
        let g = surrogate_generate(&q, &FilterSet::empty(d), &theta, 9).unwrap();
        assert_eq!(g, sample_gsm_features(&theta, 9));
    }
}
