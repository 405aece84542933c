//! Classic non-normal test matrices.

use std::f64::consts::PI;

use crate::matrix::{ComplexMatrix, C64};

/// Toeplitz matrix with −1 on the subdiagonal and 1 on the diagonal and
/// first three superdiagonals.
pub fn grcar(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "grcar needs n >= 1");
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j + 1 {
            C64::new(-1.0, 0.0)
        } else if j >= i && j - i <= 3 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Cyclic shift plus a diagonal of the n-th roots of unity w, w², …, wⁿ.
pub fn smoke(n: usize) -> ComplexMatrix {
    assert!(n >= 2, "smoke needs n >= 2");
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            C64::from_polar(1.0, 2.0 * PI * (i + 1) as f64 / n as f64)
        } else if j == i + 1 || (i == n - 1 && j == 0) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Look up a gallery matrix by name.
pub fn by_name(name: &str, n: usize) -> Option<ComplexMatrix> {
    match name {
        "grcar" if n >= 1 => Some(grcar(n)),
        "smoke" if n >= 2 => Some(smoke(n)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grcar3_entries() {
        let expected =
            ComplexMatrix::from_real_rows(&[vec![1.0, 1.0, 1.0], vec![-1.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]]).unwrap();
        assert_eq!(grcar(3).as_matrix(), expected.as_matrix());
        let g = grcar(6);
        assert_eq!(g.get(0, 3), C64::new(1.0, 0.0));
        assert_eq!(g.get(0, 4), C64::new(0.0, 0.0));
    }

    #[test]
    fn smoke2_entries() {
        let s = smoke(2);
        assert!((s.get(0, 0) - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.get(1, 1) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(s.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(s.get(1, 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn smoke_spectrum_is_roots_of_two() {
        // det(λI − A) = λⁿ − 2, so |λ| = 2^{1/n}.
        let s = smoke(8);
        for lambda in s.eigenvalues().unwrap() {
            assert!((lambda.norm() - 2f64.powf(1.0 / 8.0)).abs() < 1e-10);
        }
    }
}
