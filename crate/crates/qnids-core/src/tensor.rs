//! Dense row-major f64 arrays used for activations, weights and gradients.

/// Row-major numeric array. `values.len()` always equals the product of `shape`.
///
/// Shape mismatches at construction are programmer errors and panic; data that
/// crosses a trust boundary (files, user input) must be validated before it is
/// turned into a `NumericArray`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericArray {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl NumericArray {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Self {
        let expect: usize = shape.iter().product();
        assert_eq!(
            expect,
            values.len(),
            "shape {:?} requires {} values, got {}",
            shape,
            expect,
            values.len()
        );
        Self { shape, values }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            values: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Bitwise equality, distinguishing NaN payloads and signed zeros.
    pub fn bits_eq(&self, other: &Self) -> bool {
        self.shape == other.shape
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
