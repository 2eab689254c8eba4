use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Row-style Hermite normal form of the row lattice of `m`, zero rows
/// dropped.
///
/// Pivots are positive and every entry above a pivot lies in `[0, pivot)`,
/// so two matrices generate the same lattice iff their HNFs are equal.
pub fn hnf(m: &IntMatrix) -> IntMatrix {
    let (h, _, rank) = reduce(m, false);
    IntMatrix::from_rows(h[..rank].to_vec(), m.cols())
}

/// Full-height HNF `h` and unimodular `u` with `u · m = h`. The zero rows of
/// `h` sit at the bottom.
pub fn hnf_with_transform(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (h, u, _) = reduce(m, true);
    let u = u.expect("transform requested");
    (
        IntMatrix::from_rows(h, m.cols()),
        IntMatrix::from_rows(u, m.rows()),
    )
}

/// A ℤ-basis (as rows) of `{ y ∈ ℤ^rows : y · m = 0 }`.
pub fn left_kernel(m: &IntMatrix) -> IntMatrix {
    let (h, u, rank) = reduce(m, true);
    let u = u.expect("transform requested");
    debug_assert!(h[rank..].iter().all(|r| r.iter().all(Zero::is_zero)));
    IntMatrix::from_rows(u[rank..].to_vec(), m.rows())
}

/// HNF of the saturation `(ℚ · L) ∩ ℤ^cols` of the row lattice `L` of `m`.
///
/// Computed as the integer kernel of the integer kernel, which is primitive
/// by construction.
pub fn saturate(m: &IntMatrix) -> IntMatrix {
    let cols = m.cols();
    // right kernel of m, i.e. left kernel of mᵀ
    let k = left_kernel(&m.transpose());
    if k.rows() == 0 {
        return hnf(&IntMatrix::identity(cols));
    }
    hnf(&left_kernel(&k.transpose()))
}

/// True iff every row of `b` lies in the ℤ-row lattice of `a`.
pub fn lattice_contains(a: &IntMatrix, b: &IntMatrix) -> bool {
    assert_eq!(a.cols(), b.cols(), "column counts differ");
    let h = hnf(a);
    (0..b.rows()).all(|r| reduces_to_zero(&h, b.row(r)))
}

fn reduces_to_zero(h: &IntMatrix, v: &[BigInt]) -> bool {
    let mut v = v.to_vec();
    for r in 0..h.rows() {
        let row = h.row(r);
        let c = row.iter().position(|x| !x.is_zero()).expect("hnf rows are nonzero");
        if v[..c].iter().any(|x| !x.is_zero()) {
            return false;
        }
        let (q, rem) = v[c].div_rem(&row[c]);
        if !rem.is_zero() {
            return false;
        }
        if !q.is_zero() {
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
    }
    v.iter().all(Zero::is_zero)
}

type Rows = Vec<Vec<BigInt>>;

fn reduce(m: &IntMatrix, track: bool) -> (Rows, Option<Rows>, usize) {
    let nrows = m.rows();
    let ncols = m.cols();
    let mut a = m.row_vecs();
    let mut u = track.then(|| IntMatrix::identity(nrows).row_vecs());
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // Euclid on column c over rows r.. until a single nonzero remains.
        loop {
            let best = (r..nrows)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()).then(i.cmp(&j)));
            let Some(p) = best else { break };
            a.swap(r, p);
            if let Some(u) = u.as_mut() {
                u.swap(r, p);
            }
            let mut done = true;
            for i in r + 1..nrows {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                sub_row(&mut a, i, r, &q);
                if let Some(u) = u.as_mut() {
                    sub_row(u, i, r, &q);
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            negate_row(&mut a[r]);
            if let Some(u) = u.as_mut() {
                negate_row(&mut u[r]);
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if !q.is_zero() {
                sub_row(&mut a, i, r, &q);
                if let Some(u) = u.as_mut() {
                    sub_row(u, i, r, &q);
                }
            }
        }
        r += 1;
    }
    (a, u, r)
}

fn sub_row(a: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    let (t, s) = if target < src {
        let (lo, hi) = a.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in t.iter_mut().zip(s) {
        *x -= q * y;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for x in row {
        *x = -&*x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(hnf(&m(&[vec![2, 0], vec![0, 2]])), m(&[vec![2, 0], vec![0, 2]]));
        assert_eq!(hnf(&m(&[vec![1, 0], vec![1, 0]])), m(&[vec![1, 0]]));
        assert_eq!(
            hnf(&m(&[vec![0, 1, 1], vec![1, 0, 1]])),
            m(&[vec![1, 0, 1], vec![0, 1, 1]])
        );
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        // lattice spanned by (1,3) and (0,2): (1,3) reduces to (1,1)
        assert_eq!(hnf(&m(&[vec![1, 3], vec![0, 2]])), m(&[vec![1, 1], vec![0, 2]]));
        assert_eq!(hnf(&m(&[vec![-3, 0], vec![5, 0]])), m(&[vec![1, 0]]));
        assert_eq!(hnf(&m(&[vec![0, 0]])).rows(), 0);
    }

    #[test]
    fn transform_is_consistent() {
        let a = m(&[vec![2, 4, 1], vec![3, 6, 1], vec![5, 10, 2]]);
        let (h, u) = hnf_with_transform(&a);
        let prod = u.to_qmatrix().mul(&a.to_qmatrix());
        assert_eq!(prod, h.to_qmatrix());
        let k = left_kernel(&a);
        assert_eq!(k.rows(), 1);
        let z = k.to_qmatrix().mul(&a.to_qmatrix());
        assert!((0..z.cols()).all(|c| num_traits::Zero::is_zero(z.get(0, c))));
    }

    #[test]
    fn containment_examples() {
        assert!(lattice_contains(&m(&[vec![1, 0], vec![0, 1]]), &m(&[vec![3, 5]])));
        assert!(!lattice_contains(&m(&[vec![2, 0]]), &m(&[vec![1, 0]])));
        assert!(lattice_contains(&m(&[vec![1, 1], vec![0, 2]]), &m(&[vec![1, 3]])));
        assert!(!lattice_contains(&m(&[vec![1, 1]]), &m(&[vec![1, 2]])));
    }

    #[test]
    fn saturation() {
        assert_eq!(
            saturate(&m(&[vec![2, 0, 0, 0], vec![0, 2, 0, 0]])),
            m(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0]])
        );
        assert_eq!(saturate(&m(&[vec![2, 4]])), m(&[vec![1, 2]]));
        assert_eq!(saturate(&m(&[vec![1, 1], vec![1, -1]])), m(&[vec![1, 0], vec![0, 1]]));
        assert_eq!(saturate(&IntMatrix::zeros(0, 3)).rows(), 0);
    }
}
