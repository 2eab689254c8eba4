use num_traits::Zero;
use proptest::prelude::*;

use cuspcert_core::anomaly::{block_structure, classify, locate_complete_cusps};
use cuspcert_core::qlinalg::{hnf, lattice_contains, q_rank, ratio, IntMatrix, QMatrix, Rat};
use cuspcert_core::series::{
    branch_from_potential, sgi_check, theta_fit, wgi_check, LinearForm, PotentialSeries,
};
use cuspcert_core::subgroup::{jacobian, jacobian_of_rows, normalize, support_subgroup, CuspSupport};
use cuspcert_core::taufield::{minor_rank, tau_add, tau_mul, JacobianMatrix, TauScalar};

fn int_rows(rows: usize, cols: usize, k: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-k..=k, cols), rows)
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, q)| ratio(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    (1i64..=9, 1i64..=9, any::<bool>()).prop_map(|(p, q, s)| ratio(if s { p } else { -p }, q))
}

/// Unimodular matrix as a product of elementary row operations.
fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..8).prop_map(move |ops| {
        let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
        for (a, b, k, swap) in ops {
            if a == b {
                continue;
            }
            if swap {
                u.swap(a, b);
            } else {
                let src = u[b].clone();
                for (x, y) in u[a].iter_mut().zip(src) {
                    *x += k * y;
                }
            }
        }
        u
    })
}

fn int_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|c| row.iter().zip(b).map(|(x, r)| x * r[c]).sum())
                .collect()
        })
        .collect()
}

fn scalar(n: usize, mask_bits: u64) -> impl Strategy<Value = TauScalar> {
    prop::collection::vec((0..1u64 << n, small_rat()), 0..4).prop_map(move |terms| {
        terms.into_iter().fold(TauScalar::zero(n), |acc, (m, q)| {
            tau_add(&acc, &TauScalar::monomial(n, m & mask_bits, q))
        })
    })
}

fn jacobian_pairs(n: usize) -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
    prop::collection::vec(prop::collection::vec((-3i64..=3, -3i64..=3), n), 1..=4)
}

/// Even monomials of degree 4 or 6 with symbolic coefficients.
fn even_terms(n: usize) -> impl Strategy<Value = Vec<(Vec<u32>, TauScalar)>> {
    let full = (1u64 << n) - 1;
    prop::collection::vec(
        (prop::collection::vec(0..n, 2..=3), scalar(n, full)),
        0..5,
    )
    .prop_map(move |raw| {
        raw.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(slots, c)| {
                let mut e = vec![0u32; n];
                for s in slots {
                    e[s] += 2;
                }
                (e, c)
            })
            .collect()
    })
}

/// Drops terms touching cusps `n..` and τ's beyond `n`.
fn restrict(terms: Vec<(Vec<u32>, TauScalar)>, n: usize) -> Vec<(Vec<u32>, TauScalar)> {
    let mask = (1u64 << n) - 1;
    terms
        .into_iter()
        .filter(|(e, _)| e[n..].iter().all(|&x| x == 0))
        .map(|(e, c)| {
            let c = c.terms().iter().fold(TauScalar::zero(n), |acc, (m, q)| {
                tau_add(&acc, &TauScalar::monomial(n, m & mask, q.clone()))
            });
            (e[..n].to_vec(), c)
        })
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

fn form(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, 2 * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_is_transpose_invariant(rows in int_rows(3, 4, 3)) {
        let m = QMatrix::from_i64(&rows);
        prop_assert_eq!(q_rank(&m), q_rank(&m.transpose()));
    }

    #[test]
    fn hnf_is_idempotent(rows in int_rows(3, 4, 4)) {
        let h = hnf(&IntMatrix::from_i64(&rows));
        prop_assert_eq!(hnf(&h), h);
    }

    #[test]
    fn same_lattice_same_hnf(rows in int_rows(3, 4, 3), u in unimodular(3)) {
        let a = IntMatrix::from_i64(&rows);
        let b = IntMatrix::from_i64(&int_mul(&u, &rows));
        prop_assert!(lattice_contains(&a, &b) && lattice_contains(&b, &a));
        prop_assert_eq!(hnf(&a), hnf(&b));
    }

    #[test]
    fn rank_survives_invertible_row_ops(rows in int_rows(4, 3, 3), u in unimodular(4)) {
        let a = QMatrix::from_i64(&rows);
        let b = QMatrix::from_i64(&int_mul(&u, &rows));
        prop_assert_eq!(q_rank(&a), q_rank(&b));
    }

    #[test]
    fn tau_ring_axioms_on_disjoint_supports(
        x in scalar(6, 0b000011),
        y in scalar(6, 0b001100),
        z in scalar(6, 0b110000),
    ) {
        let xy = tau_mul(&x, &y).unwrap();
        prop_assert_eq!(&xy, &tau_mul(&y, &x).unwrap());
        prop_assert_eq!(
            tau_mul(&xy, &z).unwrap(),
            tau_mul(&x, &tau_mul(&y, &z).unwrap()).unwrap()
        );
        prop_assert_eq!(tau_add(&x, &y), tau_add(&y, &x));
        prop_assert_eq!(tau_add(&tau_add(&x, &y), &z), tau_add(&x, &tau_add(&y, &z)));
        // y and z share no τ with x
        prop_assert_eq!(
            tau_mul(&x, &tau_add(&y, &z)).unwrap(),
            tau_add(&xy, &tau_mul(&x, &z).unwrap())
        );
    }

    #[test]
    fn minor_rank_ignores_row_order_and_scaling(
        (n, rows) in (1usize..=4).prop_flat_map(|n| {
            (Just(n), prop::collection::vec(prop::collection::vec((-2i64..=2, -2i64..=2), n), 3))
        }),
        k in nonzero_rat(),
    ) {
        let j = JacobianMatrix::from_i64_pairs(n, &rows);
        let r = minor_rank(&j);
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(minor_rank(&JacobianMatrix::from_i64_pairs(n, &rev)), r);
        let scaled: Vec<Vec<(Rat, Rat)>> = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&(a, b)| {
                        let f = if i == 0 { k.clone() } else { Rat::from_integer(1.into()) };
                        (Rat::from_integer(a.into()) * &f, Rat::from_integer(b.into()) * &f)
                    })
                    .collect()
            })
            .collect();
        prop_assert_eq!(minor_rank(&JacobianMatrix::from_pairs(n, scaled)), r);
    }

    #[test]
    fn zero_columns_bound_minor_rank(pairs in jacobian_pairs(4), zero in prop::collection::btree_set(0usize..4, 0..=4)) {
        let rows: Vec<Vec<(i64, i64)>> = pairs
            .into_iter()
            .map(|row| row.into_iter().enumerate().map(|(j, p)| if zero.contains(&j) { (0, 0) } else { p }).collect())
            .collect();
        let r = minor_rank(&JacobianMatrix::from_i64_pairs(4, &rows));
        prop_assert!(r <= 4 - zero.len());
    }

    #[test]
    fn normalize_is_idempotent_and_order_free(rows in int_rows(3, 4, 3)) {
        let raw = IntMatrix::from_i64(&rows);
        prop_assume!(raw.q_rank() > 0);
        let h = normalize(&raw, 2).unwrap();
        prop_assert_eq!(&normalize(h.relations(), 2).unwrap(), &h);
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(&normalize(&IntMatrix::from_i64(&rev), 2).unwrap(), &h);
        prop_assert_eq!(minor_rank(&jacobian(&h)), minor_rank(&jacobian_of_rows(2, &raw)));
    }

    #[test]
    fn support_subgroup_rows_lie_in_span(rows in int_rows(4, 6, 2), s in prop::collection::btree_set(0usize..3, 1..=3)) {
        let raw = IntMatrix::from_i64(&rows);
        prop_assume!(raw.q_rank() > 0);
        let h = normalize(&raw, 3).unwrap();
        let sup = support_subgroup(&h, &CuspSupport::new(s.iter().copied()));
        let rel = sup.relations();
        let base = h.relations().q_rank();
        for r in 0..rel.rows() {
            let row = rel.row(r);
            for (c, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    prop_assert!(s.contains(&(c / 2)));
                }
            }
            let stacked = h.relations().vstack(&IntMatrix::from_rows(vec![row.to_vec()], 6));
            prop_assert_eq!(stacked.q_rank(), base);
        }
        let whole = support_subgroup(&h, &CuspSupport::all(3));
        prop_assert!(lattice_contains(whole.relations(), h.relations()));
        prop_assert!(lattice_contains(h.relations(), whole.relations()) || !h.is_saturated());
    }

    #[test]
    fn classify_depends_only_on_the_lattice(rows in int_rows(2, 4, 2), u in unimodular(2)) {
        let a = IntMatrix::from_i64(&rows);
        prop_assume!(a.q_rank() == 2);
        let b = IntMatrix::from_i64(&int_mul(&u, &rows));
        let ra = classify(&normalize(&a, 2).unwrap());
        let rb = classify(&normalize(&b, 2).unwrap());
        prop_assert_eq!(ra.anomalous, rb.anomalous);
        prop_assert_eq!(ra.complete_cusps, rb.complete_cusps);
    }

    #[test]
    fn keeping_a_cusp_complete_is_located(i in 0usize..3, extra in int_rows(2, 6, 1)) {
        let mut rows = vec![vec![0i64; 6], vec![0i64; 6]];
        rows[0][2 * i] = 1;
        rows[1][2 * i + 1] = 1;
        rows.extend(extra);
        let h = normalize(&IntMatrix::from_i64(&rows), 3).unwrap();
        let report = classify(&h);
        if report.anomalous {
            prop_assert!(locate_complete_cusps(&h).unwrap().contains(&i));
        } else {
            // X∩H is then a point
            prop_assert_eq!(report.first_order_dim, 0);
        }
    }

    #[test]
    fn sgi_implies_wgi(n in 2usize..=4, terms in even_terms(4)) {
        let terms = restrict(terms, n);
        let phi = PotentialSeries::symbolic(n, 6, terms).unwrap();
        for amask in 1..(1u32 << n) - 1 {
            let a: Vec<usize> = (0..n).filter(|i| amask >> i & 1 == 1).collect();
            if !sgi_check(&phi, &CuspSupport::new(a.iter().copied())).unwrap() {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|i| amask >> i & 1 == 0).collect();
            for bmask in 1..1u32 << rest.len() {
                let b: Vec<usize> = rest.iter().enumerate().filter(|(k, _)| bmask >> k & 1 == 1).map(|(_, &i)| i).collect();
                let c: Vec<usize> = rest.iter().enumerate().filter(|(k, _)| bmask >> k & 1 == 0).map(|(_, &i)| i).collect();
                prop_assert!(wgi_check(
                    &phi,
                    &CuspSupport::new(a.iter().copied()),
                    &CuspSupport::new(b),
                    &CuspSupport::new(c),
                ).unwrap());
            }
        }
    }

    #[test]
    fn theta_fit_ignores_generator_recombination(
        n in 1usize..=3,
        terms in even_terms(3),
        target in form(3),
        g1 in form(3),
        g2 in form(3),
        k in -2i64..=2,
        diag in (nonzero_rat(), nonzero_rat()),
        two in any::<bool>(),
    ) {
        let terms = restrict(terms, n);
        let phi = PotentialSeries::symbolic(n, 6, terms).unwrap();
        let lf = |c: &[i64]| LinearForm::from_i64(&c[..2 * n]);
        let (Ok(t), Ok(a)) = (lf(&target), lf(&g1)) else { return Ok(()); };
        let mut gens = vec![a.clone()];
        if two && n >= 2 {
            let Ok(b) = lf(&g2) else { return Ok(()); };
            gens.push(b);
        }
        // M = upper triangular with nonzero diagonal
        let mixed: Vec<LinearForm> = if gens.len() == 2 {
            vec![
                LinearForm::combine(&gens, &[diag.0.clone(), Rat::from_integer(k.into())]).unwrap(),
                LinearForm::combine(&gens[1..], std::slice::from_ref(&diag.1)).unwrap(),
            ]
        } else {
            vec![LinearForm::combine(&gens, std::slice::from_ref(&diag.0)).unwrap()]
        };
        match (theta_fit(&phi, &t, &gens), theta_fit(&phi, &t, &mixed)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.success(), y.success()),
            (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
            (x, y) => prop_assert!(false, "verdicts differ: {:?} vs {:?}", x.is_ok(), y.is_ok()),
        }
    }

    #[test]
    fn split_potentials_are_isolated(k in 1usize..=2, l in 1usize..=2, left in even_terms(2), right in even_terms(2)) {
        let n = k + l;
        let mut terms = Vec::new();
        for (part, offset, width) in [(left, 0, k), (right, k, l)] {
            for (e, c) in part {
                if e[width..].iter().any(|&x| x > 0) {
                    continue;
                }
                let mut full = vec![0u32; n];
                full[offset..offset + width].copy_from_slice(&e[..width]);
                let c = c.terms().iter().fold(TauScalar::zero(n), |acc, (m, q)| {
                    tau_add(&acc, &TauScalar::monomial(n, m & ((1 << n) - 1), q.clone()))
                });
                if !c.is_zero() {
                    terms.push((full, c));
                }
            }
        }
        let phi = PotentialSeries::symbolic(n, 6, terms).unwrap();
        let first = CuspSupport::new(0..k);
        let second = CuspSupport::new(k..n);
        prop_assert!(sgi_check(&phi, &first).unwrap());
        prop_assert!(sgi_check(&phi, &second).unwrap());
        let gens: Vec<LinearForm> = (0..k).map(|i| LinearForm::u(n, i)).collect();
        let fit = theta_fit(&phi, &LinearForm::v(n, 0), &gens).unwrap();
        prop_assert!(fit.success());
        prop_assert!(branch_from_potential(&phi).parity_violation().is_none());
    }
}

#[test]
fn rank_deficient_pairs_on_three_cusps_are_single_blocks() {
    let rows: Vec<Vec<i64>> = (0..729)
        .map(|mut code: usize| {
            (0..6)
                .map(|_| {
                    let x = (code % 3) as i64 - 1;
                    code /= 3;
                    x
                })
                .collect()
        })
        .collect();
    let mut deficient = 0;
    for (i, r1) in rows.iter().enumerate() {
        for r2 in &rows[i + 1..] {
            let raw = IntMatrix::from_i64(&[r1.clone(), r2.clone()]);
            if raw.q_rank() != 2 || minor_rank(&jacobian_of_rows(3, &raw)) == 2 {
                continue;
            }
            deficient += 1;
            let blocks = block_structure(&normalize(&raw, 3).unwrap());
            assert!(
                blocks.len() == 1 && blocks[0].len() == 1,
                "{r1:?}, {r2:?} gives {blocks:?}"
            );
        }
    }
    assert!(deficient > 0);
}

#[test]
fn generic_rows_keep_the_support_codimension() {
    // m + 1 independent rows on cusps 0..m plus generic rows elsewhere
    for (m, extra) in [(1usize, vec![vec![0, 0, 1, 2, 0, 0]]), (2, vec![vec![1, 0, 0, 1, 1, 1]])] {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for k in 0..=m {
            let mut r = vec![0i64; 6];
            r[k] = 1;
            r[2 * m - 1] += k as i64;
            rows.push(r);
        }
        rows.extend(extra);
        let h = normalize(&IntMatrix::from_i64(&rows), 3).unwrap();
        let sup = support_subgroup(&h, &CuspSupport::new(0..m));
        assert!(sup.codim() > m, "m = {m}: codim {}", sup.codim());
    }
}
