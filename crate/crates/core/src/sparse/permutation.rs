use crate::error::{Error, Result};

/// A bijection on `[0, n)`.
///
/// `forward[old]` is the new position of index `old`; `inverse[new]` is the old
/// index placed at position `new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    /// Builds from an ordering: `order[new]` is the old index placed at `new`.
    pub fn from_new_to_old(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut forward = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || forward[old] != usize::MAX {
                return Err(Error::InvalidStructure(format!(
                    "ordering is not a permutation of 0..{n} (entry {old} at {new})"
                )));
            }
            forward[old] = new;
        }
        Ok(Self {
            forward,
            inverse: order,
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn new_of(&self, old: usize) -> usize {
        self.forward[old]
    }

    #[inline]
    pub fn old_of(&self, new: usize) -> usize {
        self.inverse[new]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverted(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `self` applied first, then `then`: position `new` of the result holds
    /// `self.old_of(then.old_of(new))`.
    pub fn then(&self, then: &Permutation) -> Self {
        assert_eq!(self.len(), then.len());
        let order = (0..self.len()).map(|k| self.old_of(then.old_of(k))).collect();
        Self::from_new_to_old(order).expect("composition of permutations is a permutation")
    }

    /// Gathers `x` into the new ordering: `y[new] = x[old_of(new)]`.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len());
        self.inverse.iter().map(|&old| x[old]).collect()
    }

    /// Scatters a new-ordered vector back: `y[old_of(new)] = x[new]`.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len());
        let mut y = vec![0.0; x.len()];
        for (new, &old) in self.inverse.iter().enumerate() {
            y[old] = x[new];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_and_inverse_agree() {
        let p = Permutation::from_new_to_old(vec![2, 0, 1]).unwrap();
        for i in 0..3 {
            assert_eq!(p.old_of(p.new_of(i)), i);
            assert_eq!(p.new_of(p.old_of(i)), i);
        }
        assert_eq!(p.gather(&[10.0, 11.0, 12.0]), vec![12.0, 10.0, 11.0]);
        assert_eq!(p.scatter(&p.gather(&[10.0, 11.0, 12.0])), vec![10.0, 11.0, 12.0]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_new_to_old(vec![0, 0]).is_err());
        assert!(Permutation::from_new_to_old(vec![0, 2]).is_err());
    }

    #[test]
    fn composition_applies_in_order() {
        let a = Permutation::from_new_to_old(vec![1, 2, 0]).unwrap();
        let b = Permutation::from_new_to_old(vec![0, 2, 1]).unwrap();
        let x = [5.0, 6.0, 7.0];
        assert_eq!(a.then(&b).gather(&x), b.gather(&a.gather(&x)));
    }
}
