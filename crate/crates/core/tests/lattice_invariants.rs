use qlattice::finite_field::{make_field, FieldSpec};
use qlattice::qcombinatorics::gaussian_binomial;
use qlattice::subspace_lattice::{
    canonicalize, contains, enumerate_all_subspaces, enumerate_subspaces, intersect_dim, LatticeElement, MatrixGF,
    SubspaceHandle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(field: &FieldSpec, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> MatrixGF {
    let entries = (0..rows * cols).map(|_| rng.gen_range(0..field.q()) as u8).collect();
    MatrixGF::new(field, rows, cols, entries).unwrap()
}

fn random_invertible(field: &FieldSpec, k: usize, rng: &mut ChaCha8Rng) -> MatrixGF {
    loop {
        let m = random_matrix(field, k, k, rng);
        if m.rank() == k {
            return m;
        }
    }
}

#[test]
fn canonical_form_ignores_the_choice_of_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (q, n, k) in [(2, 7, 3), (3, 5, 2), (4, 5, 3), (9, 4, 2)] {
        let field = make_field(q).unwrap();
        let gens = loop {
            let m = random_matrix(&field, k, n, &mut rng);
            if m.rank() == k {
                break m;
            }
        };
        let base = canonicalize(&field, n, &gens).unwrap();
        assert_eq!(base.dim(), k);
        for _ in 0..1000 {
            let mixed = random_invertible(&field, k, &mut rng).mul(&gens).unwrap();
            let c = canonicalize(&field, n, &mixed).unwrap();
            assert_eq!(c.rref_entries(), base.rref_entries());
            assert_eq!(c.pivots(), base.pivots());
            assert_eq!(c, base);
        }
    }
}

#[test]
fn enumeration_counts_are_gaussian_binomials() {
    for q in [2u32, 3, 4, 5] {
        let field = make_field(q).unwrap();
        for n in 0..=6usize {
            for k in 0..=n {
                let count = enumerate_subspaces(&field, n, k).unwrap().count();
                assert_eq!(
                    count.to_string(),
                    gaussian_binomial(n as u64, k as u64, q as u64).to_string(),
                    "q={q} n={n} k={k}"
                );
            }
        }
    }
}

fn all_subspaces(q: u32, n: usize) -> Vec<SubspaceHandle> {
    let field = make_field(q).unwrap();
    enumerate_all_subspaces(&field, n, 0..=n, 1_000_000).unwrap()
}

#[test]
fn modular_law_and_containment() {
    for (q, n) in [(2, 4), (3, 3), (4, 3)] {
        let all = all_subspaces(q, n);
        for a in &all {
            for b in &all {
                let meet = a.intersection(b).unwrap();
                let join = a.span(b).unwrap();
                assert_eq!(meet.dim() + join.dim(), a.dim() + b.dim());
                assert_eq!(intersect_dim(a, b).unwrap(), meet.dim());
                assert!(contains(a, &meet).unwrap() && contains(b, &meet).unwrap());
                assert!(contains(&join, a).unwrap() && contains(&join, b).unwrap());
                let both = contains(a, b).unwrap() && contains(b, a).unwrap();
                assert_eq!(both, a == b);
                assert_eq!(a.meet_rank(b), meet.dim());
            }
        }
    }
}

#[test]
fn enumeration_is_sorted_and_duplicate_free() {
    for (q, n) in [(2, 5), (3, 4)] {
        let field = make_field(q).unwrap();
        for k in 0..=n {
            let v: Vec<SubspaceHandle> = enumerate_subspaces(&field, n, k).unwrap().collect();
            let mut sorted = v.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), v.len());
        }
    }
}
