use crate::config::Caps;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

/// Permanent by Ryser's inclusion-exclusion formula, visiting column subsets in
/// Gray-code order so each step updates the row sums by a single column.
pub fn permanent(g: &CMat, caps: &Caps) -> Result<C64> {
    if g.nrows() != g.ncols() {
        return Err(Error::Dimension(format!(
            "permanent needs a square matrix, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    if g.nrows() > caps.permanent_order {
        return Err(Error::CapExceeded(format!(
            "permanent of order {} exceeds cap {}",
            g.nrows(),
            caps.permanent_order
        )));
    }
    Ok(permanent_unchecked(g))
}

/// [`permanent`] without the size cap.  The empty matrix has permanent 1.
pub fn permanent_unchecked(g: &CMat) -> C64 {
    let n = g.nrows();
    match n {
        0 => return ONE,
        1 => return g[(0, 0)],
        2 => return g[(0, 0)] * g[(1, 1)] + g[(0, 1)] * g[(1, 0)],
        _ => {}
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let bit = 1u64 << col;
        let adding = gray & bit == 0;
        gray ^= bit;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += g[(i, col)];
            } else {
                *s -= g[(i, col)];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, s| acc * s);
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye};

    fn naive(g: &CMat) -> C64 {
        fn rec(g: &CMat, row: usize, used: &mut Vec<bool>) -> C64 {
            if row == g.nrows() {
                return ONE;
            }
            let mut acc = ZERO;
            for col in 0..g.ncols() {
                if !used[col] {
                    used[col] = true;
                    acc += g[(row, col)] * rec(g, row + 1, used);
                    used[col] = false;
                }
            }
            acc
        }
        rec(g, 0, &mut vec![false; g.ncols()])
    }

    #[test]
    fn small_cases() {
        let caps = Caps::default();
        assert_eq!(permanent(&eye(2), &caps).unwrap(), ONE);
        assert_eq!(permanent(&CMat::from_element(2, 2, ONE), &caps).unwrap(), c(2.0, 0.0));
        let ones3 = CMat::from_element(3, 3, ONE);
        assert!((permanent(&ones3, &caps).unwrap() - c(6.0, 0.0)).norm() < 1e-14);
        assert_eq!(permanent_unchecked(&CMat::zeros(0, 0)), ONE);
    }

    #[test]
    fn matches_permutation_sum() {
        let g = CMat::from_fn(5, 5, |i, j| c((i * 7 + j * 3) as f64 * 0.1 - 1.0, (i as f64 - j as f64) * 0.3));
        let (a, b) = (permanent_unchecked(&g), naive(&g));
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn cap_enforced() {
        let caps = Caps {
            permanent_order: 3,
            ..Caps::default()
        };
        assert!(matches!(permanent(&eye(4), &caps), Err(Error::CapExceeded(_))));
    }
}
