//! Three-variable diagnostics built from pairwise KSG estimates.
//!
//! These exist for comparison with SPI only:
//! co-information `I(X;Y) + I(X;Z) - I(X;YZ)` and
//! multi-information (total correlation) `I(X;Y) + I(XY;Z)`.

use ndarray::ArrayView2;

use super::{hstack, ksg_mi};
use crate::error::{Error, Result};

fn check_rows(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>, z: &ArrayView2<'_, f64>) -> Result<()> {
    if x.nrows() != y.nrows() || y.nrows() != z.nrows() {
        return Err(Error::InvalidParameter("variables differ in sample count".into()));
    }
    Ok(())
}

pub fn co_information(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, z: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    check_rows(&x, &y, &z)?;
    let yz = hstack(&y, &z);
    Ok(ksg_mi(x, y, k)?.value + ksg_mi(x, z, k)?.value - ksg_mi(x, yz.view(), k)?.value)
}

pub fn multi_information(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    z: ArrayView2<'_, f64>,
    k: usize,
) -> Result<f64> {
    check_rows(&x, &y, &z)?;
    let xy = hstack(&x, &y);
    Ok(ksg_mi(x, y, k)?.value + ksg_mi(xy.view(), z, k)?.value)
}

#[cfg(test)]
mod tests {
    use super::super::testdata::*;
    use super::*;
    use ndarray::Array2;

    #[test]
    fn independent_triple() {
        let n = 20_000;
        let (x, y, z) = (normal(n, 1, 1), normal(n, 1, 2), normal(n, 1, 3));
        let co = co_information(x.view(), y.view(), z.view(), 4).unwrap();
        let multi = multi_information(x.view(), y.view(), z.view(), 4).unwrap();
        assert!(co.abs() < 0.05, "{co}");
        assert!(multi.abs() < 0.05, "{multi}");
    }

    /// x = a, y = 0.6 a + 0.8 b, z = 0.5 a + 0.5 b + sqrt(0.5) c with
    /// a, b, c iid standard normal.
    fn triple(n: usize) -> (Array2<f64>, Array2<f64>, Array2<f64>, [[f64; 3]; 3]) {
        let (a, b, c) = (normal(n, 1, 10), normal(n, 1, 11), normal(n, 1, 12));
        let s = 0.5f64.sqrt();
        let x = a.clone();
        let y = &a * 0.6 + &b * 0.8;
        let z = &a * 0.5 + &b * 0.5 + &c * s;
        let cov = [[1.0, 0.6, 0.5], [0.6, 1.0, 0.3 + 0.4], [0.5, 0.7, 0.25 + 0.25 + 0.5]];
        (x, y, z, cov)
    }

    fn det3(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn gaussian_total_correlation() {
        let (x, y, z, cov) = triple(20_000);
        let expected = 0.5 * ((cov[0][0] * cov[1][1] * cov[2][2]) / det3(&cov)).ln();
        let got = multi_information(x.view(), y.view(), z.view(), 4).unwrap();
        assert!((got - expected).abs() < 0.05, "{got} vs {expected}");
    }

    #[test]
    fn duplicated_variable_raises_multi_information_above_co_information() {
        let (x, y, _, _) = triple(5_000);
        let multi = multi_information(x.view(), y.view(), x.view(), 4).unwrap();
        let co = co_information(x.view(), y.view(), x.view(), 4).unwrap();
        assert!(multi > co, "multi {multi} co {co}");
    }
}
