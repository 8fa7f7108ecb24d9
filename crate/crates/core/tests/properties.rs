mod common;

use common::{gaussian, planted, planted_psd, rel_err};
use proptest::prelude::*;
use sketchkit::bench::SpectrumKind;
use sketchkit::diagnostics::{injectivity_of, kronecker_gaussian_subspace};
use sketchkit::io::{read_matrix_market, write_matrix_market_dense, write_matrix_market_sparse, MtxMatrix};
use sketchkit::linalg::{qr_econ, svd_econ, truncated_pinv_apply, DEFAULT_RANK_TOL};
use sketchkit::nla::{gen_nystrom_outer, gen_nystrom_svd, nystrom_psd, rsvd, NystromOptions};
use sketchkit::sketch::{BaseDist, Family, SparseRttTM, SparseStackTM, TestMatrix, TransformKind, SignDist};
use sketchkit::trace::{girard_hutchinson, na_hutch_pp, MatvecOracle};
use sketchkit::{Complex64, CsrMatrix, DenseMatrix, LowRank, RngStream, Scalar};

fn families() -> Vec<Family> {
    vec![
        Family::Gaussian,
        Family::sparse_stack(1),
        Family::sparse_stack(4),
        Family::SparseUniform { zeta: 3, dist: None },
        Family::SparseIid { zeta: 2.5, dist: None },
        Family::SparseCol { xi: 2, dist: None },
        Family::sparse_rtt(),
        Family::KhatriRao { d0: 2, base: BaseDist::RealGaussian },
        Family::KhatriRao { d0: 3, base: BaseDist::RealRademacher },
        Family::KhatriRao { d0: 2, base: BaseDist::RealSpherical },
    ]
}

fn complex_families() -> Vec<Family> {
    let mut f = families();
    f.push(Family::KhatriRao { d0: 2, base: BaseDist::ComplexSpherical });
    f.push(Family::KhatriRao { d0: 2, base: BaseDist::Steinhaus });
    f
}

fn check_apply_paths<T: Scalar>(fam: &Family, d: usize, k: usize, m: usize, seed: u64) -> Result<(), TestCaseError> {
    let s = RngStream::new(seed);
    let tm = fam.build::<T>(d, k, &s).unwrap();
    let omega = tm.materialize();
    prop_assert_eq!(omega.shape(), (d, k));
    let tol = 1e-10;
    let b = gaussian::<T>(d, m, &s.child(10));
    let got = tm.apply_adjoint(&b).unwrap();
    let want = omega.adjoint_mul(&b);
    prop_assert!(got.sub(&want).fro_norm() <= tol * b.fro_norm() * omega.fro_norm(), "{} adjoint", fam.name());
    let c = gaussian::<T>(k, m, &s.child(11));
    let got = tm.apply(&c).unwrap();
    prop_assert!(got.sub(&omega.matmul(&c)).fro_norm() <= tol * c.fro_norm() * omega.fro_norm(), "{} apply", fam.name());
    let a = gaussian::<T>(m, d, &s.child(12));
    let want = a.matmul(&omega);
    let got = tm.apply_right(&a).unwrap();
    prop_assert!(got.sub(&want).fro_norm() <= tol * a.fro_norm() * omega.fro_norm(), "{} right", fam.name());
    let got = tm.apply_right_sparse(&CsrMatrix::from_dense(&a)).unwrap();
    prop_assert!(got.sub(&want).fro_norm() <= tol * a.fro_norm() * omega.fro_norm(), "{} right sparse", fam.name());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn apply_paths_agree_real(fi in 0usize..10, d in 6usize..64, k in 6usize..24, m in 1usize..5, seed: u64) {
        let k = k.min(d);
        check_apply_paths::<f64>(&families()[fi], d, k, m, seed)?;
    }

    #[test]
    fn apply_paths_agree_complex(fi in 0usize..12, d in 6usize..64, k in 6usize..24, m in 1usize..5, seed: u64) {
        let k = k.min(d);
        check_apply_paths::<Complex64>(&complex_families()[fi], d, k, m, seed)?;
    }

    #[test]
    fn qr_and_svd_reconstruct(rows in 1usize..80, cols in 1usize..40, seed: u64) {
        let cols = cols.min(rows);
        let s = RngStream::new(seed);
        let m = gaussian::<f64>(rows, cols, &s);
        let (q, r) = qr_econ(&m).unwrap();
        prop_assert!(q.matmul(&r).sub(&m).fro_norm() <= 1e-12 * m.fro_norm());
        let svd = svd_econ(&m).unwrap();
        prop_assert!(svd.reconstruct().sub(&m).fro_norm() <= 1e-12 * m.fro_norm());
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(svd.u.orthonormality_error() <= 1e-10 * (cols as f64).sqrt());
        let mc = gaussian::<Complex64>(cols, rows, &s.child(1));
        let svd = svd_econ(&mc).unwrap();
        prop_assert!(svd.reconstruct().sub(&mc).fro_norm() <= 1e-12 * mc.fro_norm());
    }

    #[test]
    fn pinv_inverts_full_column_rank(rows in 4usize..60, cols in 1usize..8, seed: u64) {
        let cols = cols.min(rows);
        let s = RngStream::new(seed);
        let m = gaussian::<f64>(rows, cols, &s);
        let x0 = gaussian::<f64>(cols, 2, &s.child(1));
        let x = truncated_pinv_apply(&m, &m.matmul(&x0), DEFAULT_RANK_TOL).unwrap();
        prop_assert!(rel_err(&x0, &x) <= 1e-10);
    }

    #[test]
    fn rng_paths_are_pure(seed: u64, a: u64, b: u64) {
        let s1 = RngStream::new(seed).child(a).child(b);
        let s2 = RngStream::new(seed).child(a).child(b);
        let x = gaussian::<f64>(4, 4, &s1);
        prop_assert_eq!(x, gaussian::<f64>(4, 4, &s2));
        prop_assert_eq!(s1.path(), &[a, b][..]);
    }

    #[test]
    fn sparse_stack_structure(d in 1usize..80, zeta in 1usize..6, b in 1usize..6, seed: u64) {
        let tm = SparseStackTM::<f64>::new(d, zeta, b, SignDist::RealRademacher, &RngStream::new(seed)).unwrap();
        let csr = tm.as_sparse().unwrap();
        for i in 0..d {
            let (cols, vals) = csr.row(i);
            prop_assert_eq!(cols.len(), zeta);
            // one nonzero per block of b columns
            let mut blocks: Vec<usize> = cols.iter().map(|c| c / b).collect();
            blocks.dedup();
            prop_assert_eq!(blocks.len(), zeta);
            prop_assert!(vals.iter().all(|v| (v.abs() - 1.0 / (zeta as f64).sqrt()).abs() < 1e-15));
        }
        prop_assert!((csr.fro_norm_sq() - d as f64).abs() < 1e-10);
    }

    #[test]
    fn rtt_rotation_is_unitary(m in 1u32..9, seed: u64, complex: bool) {
        let d = 1usize << m;
        let s = RngStream::new(seed);
        if complex {
            let tm = SparseRttTM::<Complex64>::new(d, d.min(4), 1, TransformKind::Dft, SignDist::Steinhaus, &s).unwrap();
            let x = gaussian::<Complex64>(d, 1, &s.child(3)).into_data();
            let mut y = x.clone();
            tm.rotate_adjoint(&mut y).unwrap();
            let n = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((n(&x) - n(&y)).abs() <= 1e-12 * n(&x));
        } else {
            for kind in [TransformKind::Dct, TransformKind::Wht] {
                let tm = SparseRttTM::<f64>::new(d, d.min(4), 1, kind, SignDist::RealRademacher, &s).unwrap();
                let x = gaussian::<f64>(d, 1, &s.child(3)).into_data();
                let mut y = x.clone();
                tm.rotate_adjoint(&mut y).unwrap();
                let n = |v: &[f64]| v.iter().map(|z| z * z).sum::<f64>().sqrt();
                prop_assert!((n(&x) - n(&y)).abs() <= 1e-12 * n(&x));
            }
        }
    }

    #[test]
    fn csr_from_dense_invariants(rows in 1usize..20, cols in 1usize..20, seed: u64) {
        let s = RngStream::new(seed);
        let g = gaussian::<f64>(rows, cols, &s);
        let a = DenseMatrix::from_fn(rows, cols, |i, j| if g.col(j)[i] > 0.5 { g.col(j)[i] } else { 0.0 });
        let csr = CsrMatrix::from_dense(&a);
        let rp = csr.row_ptr();
        prop_assert!(rp.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(rp[rows], csr.nnz());
        for i in 0..rows {
            prop_assert!(csr.row(i).0.windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(csr.to_dense(), a);
    }

    #[test]
    fn matrix_market_round_trip(rows in 1usize..12, cols in 1usize..12, seed: u64) {
        let dir = tempfile::tempdir().unwrap();
        let s = RngStream::new(seed);
        let a = gaussian::<f64>(rows, cols, &s).scaled(1e-7);
        let p = dir.path().join("a.mtx");
        write_matrix_market_dense(&p, &a).unwrap();
        let once = read_matrix_market::<f64>(&p).unwrap().to_dense();
        prop_assert_eq!(&once, &a);
        write_matrix_market_dense(&p, &once).unwrap();
        prop_assert_eq!(read_matrix_market::<f64>(&p).unwrap().to_dense(), a.clone());
        let c = gaussian::<Complex64>(rows, cols, &s.child(1));
        let sp = CsrMatrix::from_dense(&c);
        write_matrix_market_sparse(&p, &sp).unwrap();
        match read_matrix_market::<Complex64>(&p).unwrap() {
            MtxMatrix::Sparse(back) => prop_assert_eq!(back.to_dense(), c),
            MtxMatrix::Dense(_) => prop_assert!(false, "coordinate file read as dense"),
        }
    }

    #[test]
    fn rsvd_is_a_projection(n in 12usize..40, d in 12usize..40, k in 6usize..12, seed: u64, fi in 0usize..10) {
        let s = RngStream::new(seed);
        let a = gaussian::<f64>(n, d, &s);
        let tm = families()[fi].build::<f64>(d, k, &s.child(1)).unwrap();
        let ah = rsvd(&a, tm.as_ref()).unwrap();
        let LowRank::Svd { u, sigma, .. } = &ah else { unreachable!() };
        let dense = ah.to_dense();
        prop_assert!(u.matmul(&u.adjoint_mul(&dense)).sub(&dense).fro_norm() <= 1e-10 * dense.fro_norm().max(1.0));
        prop_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(ah.residual_fro(&a).unwrap() <= a.fro_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn nystrom_output_is_psd(n in 6usize..40, r in 1usize..10, k in 1usize..6, seed: u64) {
        let s = RngStream::new(seed);
        let a = planted_psd::<f64>(n, r, &s).add(&DenseMatrix::identity(n).scaled(1e-3));
        let tm = Family::Gaussian.build::<f64>(n, k.min(n), &s.child(1)).unwrap();
        let ah = nystrom_psd(&a, tm.as_ref(), &NystromOptions::default()).unwrap();
        let LowRank::Eig { lambda, .. } = &ah else { unreachable!() };
        prop_assert!(lambda.iter().all(|&l| l >= 0.0));
        let dense = ah.to_dense();
        let xs = gaussian::<f64>(n, 100, &s.child(2));
        let anorm = a.fro_norm();
        for j in 0..100 {
            let x = xs.col(j);
            let ax = dense.matvec(x);
            let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            prop_assert!(q >= -1e-10 * anorm * x.iter().map(|v| v * v).sum::<f64>());
        }
    }

    #[test]
    fn generalized_nystrom_forms_agree(n in 10usize..40, d in 10usize..40, k in 2usize..6, seed: u64, complex: bool) {
        let s = RngStream::new(seed);
        let p = (3 * k).div_ceil(2);
        if complex {
            let a = gaussian::<Complex64>(n, d, &s);
            let om = Family::Gaussian.build::<Complex64>(d, k, &s.child(1)).unwrap();
            let ps = Family::Gaussian.build::<Complex64>(n, p, &s.child(2)).unwrap();
            let x = gen_nystrom_outer(&a, om.as_ref(), ps.as_ref()).unwrap().to_dense();
            let y = gen_nystrom_svd(&a, om.as_ref(), ps.as_ref()).unwrap().to_dense();
            prop_assert!(rel_err(&x, &y) <= 1e-8);
        } else {
            let a = gaussian::<f64>(n, d, &s);
            let om = Family::sparse_stack(2).build::<f64>(d, k, &s.child(1)).unwrap();
            let ps = Family::Gaussian.build::<f64>(n, p, &s.child(2)).unwrap();
            let x = gen_nystrom_outer(&a, om.as_ref(), ps.as_ref()).unwrap().to_dense();
            let y = gen_nystrom_svd(&a, om.as_ref(), ps.as_ref()).unwrap().to_dense();
            prop_assert!(rel_err(&x, &y) <= 1e-8);
        }
    }

    #[test]
    fn matvec_budget_is_exact(n in 4usize..30, t in 1usize..40, seed: u64) {
        let s = RngStream::new(seed);
        let a = gaussian::<f64>(n, n, &s);
        let oracle = MatvecOracle::new(&a);
        girard_hutchinson(&oracle, t, &Family::Gaussian, &s.child(1)).unwrap();
        prop_assert_eq!(oracle.matvecs(), t);
        {
            let oracle = MatvecOracle::new(&a);
            na_hutch_pp(&oracle, t, &Family::Gaussian, &s.child(2)).unwrap();
            prop_assert_eq!(oracle.matvecs(), t);
        }
    }

    #[test]
    fn injectivity_le_dilation(ell in 3usize..7, r in 1usize..6, k in 6usize..40, seed: u64, fi in 0usize..10) {
        let d = 1usize << ell;
        let s = RngStream::new(seed);
        let q = kronecker_gaussian_subspace::<f64>(2, ell, r, &s).unwrap();
        let tm = families()[fi].build::<f64>(d, k.min(d), &s.child(1)).unwrap();
        let m = injectivity_of(tm.as_ref(), &q).unwrap();
        prop_assert!(0.0 <= m.alpha && m.alpha <= m.beta * (1.0 + 1e-12));
    }

    #[test]
    fn testbed_is_positive_nonincreasing(r in 0usize..20, n in 20usize..200, x in 0.05f64..3.0) {
        for kind in [
            SpectrumKind::LowRankPlusNoise { r, eps: x.min(1.0) },
            SpectrumKind::PolyDecay { r, p: x },
            SpectrumKind::ExpDecay { r, q: x },
        ] {
            let d = kind.diagonal(n).unwrap();
            prop_assert_eq!(d.len(), n);
            prop_assert!(d.iter().all(|&v| v > 0.0));
            prop_assert!(d.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn exact_rank_recovery_complex() {
    let s = RngStream::new(5);
    let a = planted::<Complex64>(40, 30, 4, &s);
    for fam in [Family::Gaussian, Family::sparse_stack(4), Family::sparse_rtt()] {
        let tm = fam.build::<Complex64>(30, 8, &s.child(1)).unwrap();
        let ah = rsvd(&a, tm.as_ref()).unwrap();
        assert!(ah.residual_fro(&a).unwrap() <= 1e-8 * a.fro_norm(), "{}", fam.name());
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let s = RngStream::new(17);
            let mut outs = Vec::new();
            for fam in families() {
                let tm = fam.build::<f64>(300, 40, &s).unwrap();
                let a = gaussian::<f64>(64, 300, &s.child(9));
                outs.push(tm.apply_right(&a).unwrap());
            }
            outs
        })
    };
    assert_eq!(run(1), run(3));
}
