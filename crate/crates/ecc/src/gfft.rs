//! Spectral transforms over GF(q): multipoint evaluation at the powers of a
//! root of unity (forward) and the matching interpolation (inverse), computed
//! either naively or through a mixed-radix stage decomposition.
//!
//! A [`TransformPlan`] fixes a length N = l_1 * ... * l_k dividing q - 1 and
//! evaluates in stages: the final factor l_k splits the problem into N/l_k
//! small transforms glued to l_k recursive sub-problems through a diagonal
//! twiddle and a perfect shuffle; earlier factors recurse the same way. Every
//! stage therefore runs exactly N/l_m independent length-l_m sub-transforms,
//! which [`StageAudit`] makes observable.

use crate::gf::{Field, GfError, Sym};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfftError {
    #[error("factor list {factors:?} does not multiply to a usable length")]
    BadFactorization { factors: Vec<u32> },
    #[error("input length {got} does not match transform length {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Per-stage counters: `small_dfts[m]` is the number of length-`factors[m]`
/// sub-transforms executed. A full pass runs N / factors[m] of them per stage.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct StageAudit {
    pub small_dfts: Vec<u64>,
}

/// A fixed-length transform over a fixed field.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    field: Field,
    n: usize,
    factors: Vec<u32>,
    omega: Sym,
}

impl TransformPlan {
    /// `factors` multiply to the transform length N, which must divide q - 1
    /// so that a primitive N-th root of unity exists. Factors need not be
    /// prime but must each be at least 2.
    pub fn new(field: Field, factors: &[u32]) -> Result<TransformPlan, GfftError> {
        if factors.is_empty() || factors.iter().any(|&f| f < 2) {
            return Err(GfftError::BadFactorization { factors: factors.to_vec() });
        }
        let n = factors.iter().try_fold(1u64, |acc, &f| {
            let next = acc.checked_mul(f as u64)?;
            (next <= u32::MAX as u64).then_some(next)
        });
        let n = match n {
            Some(v) => v as usize,
            None => return Err(GfftError::BadFactorization { factors: factors.to_vec() }),
        };
        let omega = field.root_of_unity(n as u32)?;
        Ok(TransformPlan { field, n, factors: factors.to_vec(), omega })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn omega(&self) -> Sym {
        self.omega
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Forward transform: `out[i] = sum_j omega^(i*j) x[j]`.
    pub fn forward(&self, x: &[Sym]) -> Result<Vec<Sym>, GfftError> {
        self.forward_with_audit(x, None)
    }

    pub fn forward_with_audit(
        &self,
        x: &[Sym],
        mut audit: Option<&mut StageAudit>,
    ) -> Result<Vec<Sym>, GfftError> {
        self.check_len(x)?;
        if let Some(a) = audit.as_deref_mut() {
            a.small_dfts = vec![0; self.factors.len()];
        }
        Ok(self.forward_rec(&self.factors, self.omega, x, &mut audit))
    }

    /// Inverse transform: interpolation, scaled so that
    /// `inverse(forward(x)) = x`. Each stage applies its own 1/l_m factor.
    pub fn inverse(&self, x: &[Sym]) -> Result<Vec<Sym>, GfftError> {
        self.inverse_with_audit(x, None)
    }

    pub fn inverse_with_audit(
        &self,
        x: &[Sym],
        mut audit: Option<&mut StageAudit>,
    ) -> Result<Vec<Sym>, GfftError> {
        self.check_len(x)?;
        if let Some(a) = audit.as_deref_mut() {
            a.small_dfts = vec![0; self.factors.len()];
        }
        Ok(self.inverse_rec(&self.factors, self.omega, x, &mut audit))
    }

    fn check_len(&self, x: &[Sym]) -> Result<(), GfftError> {
        if x.len() != self.n {
            return Err(GfftError::LengthMismatch { want: self.n, got: x.len() });
        }
        Ok(())
    }

    /// Peels the last factor l: gathers the l strided sub-problems, then the
    /// per-block small transforms, twiddles and scatters row-wise.
    fn forward_rec(
        &self,
        factors: &[u32],
        omega: Sym,
        x: &[Sym],
        audit: &mut Option<&mut StageAudit>,
    ) -> Vec<Sym> {
        let f = &self.field;
        if factors.len() == 1 {
            if let Some(a) = audit.as_deref_mut() {
                a.small_dfts[0] += 1;
            }
            return small_dft(f, omega, x, false);
        }
        let l = *factors.last().unwrap() as usize;
        let rest = &factors[..factors.len() - 1];
        let len = x.len();
        let sub = len / l;
        let omega_l = f.pow(omega, sub as i64).unwrap();
        let omega_sub = f.pow(omega, l as i64).unwrap();
        let stage = factors.len() - 1;

        // Small transforms first: block c reads x[r*sub + c].
        let mut spectral = vec![0; len]; // index c*l + t holds block c's t-th value
        let mut block = vec![0; l];
        for c in 0..sub {
            for r in 0..l {
                block[r] = x[r * sub + c];
            }
            let a = small_dft(f, omega_l, &block, false);
            if let Some(aud) = audit.as_deref_mut() {
                aud.small_dfts[stage] += 1;
            }
            for t in 0..l {
                spectral[c * l + t] = f.mul(a[t], f.pow(omega, (c * t) as i64).unwrap());
            }
        }
        // Recurse on each strided sub-problem t.
        let mut out = vec![0; len];
        let mut comp = vec![0; sub];
        for t in 0..l {
            for c in 0..sub {
                comp[c] = spectral[c * l + t];
            }
            let res = self.forward_rec(rest, omega_sub, &comp, audit);
            for c in 0..sub {
                out[c * l + t] = res[c];
            }
        }
        out
    }

    fn inverse_rec(
        &self,
        factors: &[u32],
        omega: Sym,
        x: &[Sym],
        audit: &mut Option<&mut StageAudit>,
    ) -> Vec<Sym> {
        let f = &self.field;
        if factors.len() == 1 {
            if let Some(a) = audit.as_deref_mut() {
                a.small_dfts[0] += 1;
            }
            return small_dft(f, omega, x, true);
        }
        let l = *factors.last().unwrap() as usize;
        let rest = &factors[..factors.len() - 1];
        let len = x.len();
        let sub = len / l;
        let omega_l = f.pow(omega, sub as i64).unwrap();
        let omega_sub = f.pow(omega, l as i64).unwrap();
        let stage = factors.len() - 1;

        // Sub-problems first: sub-problem t reads x[c*l + t].
        let mut mixed = vec![0; len];
        let mut comp = vec![0; sub];
        for t in 0..l {
            for c in 0..sub {
                comp[c] = x[c * l + t];
            }
            let res = self.inverse_rec(rest, omega_sub, &comp, audit);
            for c in 0..sub {
                mixed[c * l + t] = res[c];
            }
        }
        // Inverse twiddle, small inverse transforms, row-wise scatter.
        let mut out = vec![0; len];
        let mut block = vec![0; l];
        for c in 0..sub {
            for t in 0..l {
                block[t] = f.mul(
                    mixed[c * l + t],
                    f.pow(omega, -((c * t) as i64)).unwrap(),
                );
            }
            let w = small_dft(f, omega_l, &block, true);
            if let Some(aud) = audit.as_deref_mut() {
                aud.small_dfts[stage] += 1;
            }
            for r in 0..l {
                out[r * sub + c] = w[r];
            }
        }
        out
    }
}

/// Length-l transform by direct summation; `inverse` flips the root and
/// applies the 1/l scale.
fn small_dft(f: &Field, omega: Sym, x: &[Sym], inverse: bool) -> Vec<Sym> {
    let l = x.len();
    let w = if inverse { f.inv(omega).unwrap() } else { omega };
    let scale = if inverse {
        f.inv(f.embed_int(l as u64)).unwrap()
    } else {
        1
    };
    let mut pow_row = vec![0; l];
    let mut out = vec![0; l];
    for (i, slot) in out.iter_mut().enumerate() {
        let wi = f.pow(w, i as i64).unwrap();
        let mut p: Sym = 1;
        for item in pow_row.iter_mut() {
            *item = p;
            p = f.mul(p, wi);
        }
        let mut acc = 0;
        for (j, &xj) in x.iter().enumerate() {
            acc = f.add(acc, f.mul(pow_row[j], xj));
        }
        *slot = f.mul(acc, scale);
    }
    out
}

/// Direct O(N^2) evaluation `out[i] = sum_j omega^(i*j) x[j]`; the reference
/// implementation everything else is checked against.
pub fn dft_naive(f: &Field, omega: Sym, x: &[Sym]) -> Vec<Sym> {
    small_dft(f, omega, x, false)
}

/// Direct interpolation with the full 1/N scale: `idft_naive(dft_naive(x)) = x`.
pub fn idft_naive(f: &Field, omega: Sym, x: &[Sym]) -> Vec<Sym> {
    small_dft(f, omega, x, true)
}

/// Diagonal of the twiddle matrix for an a*b split: entry at index i is
/// omega_ab^(floor(i/b) * (i mod b)).
pub fn twiddle_diag(f: &Field, a: usize, b: usize, omega_ab: Sym) -> Vec<Sym> {
    (0..a * b)
        .map(|i| f.pow(omega_ab, ((i / b) * (i % b)) as i64).unwrap())
        .collect()
}

/// Perfect shuffle: write the input into an a*b array column-wise, read it
/// back row-wise. Returned as an index map: `out[i] = in[perm[i]]`.
/// Composing `shuffle_perm(a, b)` with `shuffle_perm(b, a)` is the identity.
pub fn shuffle_perm(a: usize, b: usize) -> Vec<usize> {
    let mut perm = vec![0; a * b];
    for r in 0..a {
        for c in 0..b {
            perm[r * b + c] = c * a + r;
        }
    }
    perm
}

/// Applies an index map produced by [`shuffle_perm`].
pub fn apply_perm(perm: &[usize], x: &[Sym]) -> Vec<Sym> {
    perm.iter().map(|&i| x[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, q: u32, n: usize) -> Vec<Sym> {
        (0..n).map(|_| rng.gen_range(0..q)).collect()
    }

    #[test]
    fn naive_dft_worked_example() {
        let f = Field::new(7).unwrap();
        let omega = f.root_of_unity(6).unwrap();
        assert_eq!(omega, 3);
        let x = vec![1, 1, 0, 0, 0, 0];
        assert_eq!(dft_naive(&f, omega, &x), vec![2, 4, 3, 0, 5, 6]);
        assert_eq!(idft_naive(&f, omega, &[2, 4, 3, 0, 5, 6]), x);
    }

    #[test]
    fn twiddle_worked_example() {
        let f = Field::new(7).unwrap();
        // a=3, b=2, omega_6 = 3: exponents are floor(i/2)*(i mod 2).
        assert_eq!(twiddle_diag(&f, 3, 2, 3), vec![1, 1, 1, 3, 1, 2]);
    }

    #[test]
    fn shuffles_invert_each_other() {
        for (a, b) in [(3, 2), (2, 3), (5, 3), (4, 4), (1, 6), (6, 1)] {
            let s_ab = shuffle_perm(a, b);
            let s_ba = shuffle_perm(b, a);
            let x: Vec<Sym> = (0..(a * b) as u32).collect();
            assert_eq!(apply_perm(&s_ba, &apply_perm(&s_ab, &x)), x);
        }
        // Column-major write, row-major read, spelled out for a=3, b=2.
        assert_eq!(shuffle_perm(3, 2), vec![0, 3, 1, 4, 2, 5]);
    }

    #[test]
    fn staged_matches_naive_across_fields_and_orderings() {
        use itertools::Itertools;
        let cases: &[(u32, &[u32])] = &[
            (7, &[2, 3]),
            (7, &[6]),
            (16, &[3, 5]),
            (16, &[15]),
            (31, &[2, 3, 5]),
            (31, &[5, 6]),
            (31, &[10, 3]),
            (257, &[2, 2, 2, 2, 2, 2, 2, 2]),
            (257, &[4, 4, 4, 4]),
            (257, &[16, 16]),
            (1024, &[3, 11, 31]),
            (13, &[2, 2, 3]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(q, factors) in cases {
            let field = Field::new(q).unwrap();
            let n: u32 = factors.iter().product();
            let omega = field.root_of_unity(n).unwrap();
            for perm in factors.iter().copied().permutations(factors.len()).unique() {
                let plan = TransformPlan::new(field.clone(), &perm).unwrap();
                for _ in 0..4 {
                    let x = random_vec(&mut rng, q, n as usize);
                    assert_eq!(
                        plan.forward(&x).unwrap(),
                        dft_naive(&field, omega, &x),
                        "q={q} factors={perm:?}"
                    );
                    assert_eq!(
                        plan.inverse(&x).unwrap(),
                        idft_naive(&field, omega, &x),
                        "q={q} factors={perm:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn roundtrip_and_linearity() {
        let field = Field::new(31).unwrap();
        let plan = TransformPlan::new(field.clone(), &[2, 3, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let x = random_vec(&mut rng, 31, 30);
            let y = random_vec(&mut rng, 31, 30);
            let s = rng.gen_range(0..31);
            assert_eq!(plan.inverse(&plan.forward(&x).unwrap()).unwrap(), x);
            assert_eq!(plan.forward(&plan.inverse(&x).unwrap()).unwrap(), x);
            let lin: Vec<Sym> = x
                .iter()
                .zip(&y)
                .map(|(&a, &b)| field.add(field.mul(s, a), b))
                .collect();
            let fx = plan.forward(&x).unwrap();
            let fy = plan.forward(&y).unwrap();
            let flin: Vec<Sym> = fx
                .iter()
                .zip(&fy)
                .map(|(&a, &b)| field.add(field.mul(s, a), b))
                .collect();
            assert_eq!(plan.forward(&lin).unwrap(), flin);
        }
    }

    #[test]
    fn forward_diagonalizes_cyclic_convolution() {
        let field = Field::new(16).unwrap();
        let plan = TransformPlan::new(field.clone(), &[5, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_vec(&mut rng, 16, 15);
        let y = random_vec(&mut rng, 16, 15);
        let mut conv = vec![0; 15];
        for i in 0..15 {
            for j in 0..15 {
                conv[(i + j) % 15] =
                    field.add(conv[(i + j) % 15], field.mul(x[i], y[j]));
            }
        }
        let fx = plan.forward(&x).unwrap();
        let fy = plan.forward(&y).unwrap();
        let pointwise: Vec<Sym> = fx.iter().zip(&fy).map(|(&a, &b)| field.mul(a, b)).collect();
        assert_eq!(plan.forward(&conv).unwrap(), pointwise);
    }

    #[test]
    fn stage_audit_counts_sub_transforms() {
        let field = Field::new(31).unwrap();
        let plan = TransformPlan::new(field, &[2, 3, 5]).unwrap();
        let x: Vec<Sym> = (0..30).map(|i| i % 31).collect();
        let mut audit = StageAudit::default();
        plan.forward_with_audit(&x, Some(&mut audit)).unwrap();
        assert_eq!(audit.small_dfts, vec![30 / 2, 30 / 3, 30 / 5]);
        let mut audit = StageAudit::default();
        plan.inverse_with_audit(&x, Some(&mut audit)).unwrap();
        assert_eq!(audit.small_dfts, vec![30 / 2, 30 / 3, 30 / 5]);
    }

    #[test]
    fn single_peel_matches_explicit_stage_algebra() {
        // One peel of the last factor b from N = a*b equals, applied right to
        // left: strided sub-interpolations, the inverse twiddle diagonal,
        // per-block small inverse transforms, then the perfect shuffle.
        for (q, a, b) in [(7u32, 3usize, 2usize), (7, 2, 3), (31, 5, 6), (16, 5, 3)] {
            let field = Field::new(q).unwrap();
            let n = a * b;
            let omega = field.root_of_unity(n as u32).unwrap();
            let omega_a = field.pow(omega, b as i64).unwrap();
            let omega_b = field.pow(omega, a as i64).unwrap();
            let plan =
                TransformPlan::new(field.clone(), &[a as u32, b as u32]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64((q + a as u32) as u64);
            let x = random_vec(&mut rng, q, n);

            // Sub-interpolations of length a on stride-b slices.
            let mut stage1 = vec![0; n];
            for s in 0..b {
                let slice: Vec<Sym> = (0..a).map(|j| x[j * b + s]).collect();
                let res = idft_naive(&field, omega_a, &slice);
                for j in 0..a {
                    stage1[j * b + s] = res[j];
                }
            }
            // Inverse twiddle.
            let tw = twiddle_diag(&field, a, b, omega);
            let stage2: Vec<Sym> = stage1
                .iter()
                .zip(&tw)
                .map(|(&v, &d)| field.mul(v, field.inv(d).unwrap()))
                .collect();
            // Contiguous small inverse transforms of length b.
            let mut stage3 = vec![0; n];
            for c in 0..a {
                let block: Vec<Sym> = (0..b).map(|t| stage2[c * b + t]).collect();
                let res = idft_naive(&field, omega_b, &block);
                stage3[c * b..(c + 1) * b].copy_from_slice(&res);
            }
            // Perfect shuffle S_{b, a}: out[r*a + c] = in[c*b + r].
            let out = apply_perm(&shuffle_perm(b, a), &stage3);
            assert_eq!(out, plan.inverse(&x).unwrap(), "q={q} a={a} b={b}");
        }
    }

    #[test]
    fn plan_rejects_bad_lengths() {
        let field = Field::new(16).unwrap();
        assert!(matches!(
            TransformPlan::new(field.clone(), &[]),
            Err(GfftError::BadFactorization { .. })
        ));
        assert!(matches!(
            TransformPlan::new(field.clone(), &[3, 1]),
            Err(GfftError::BadFactorization { .. })
        ));
        // 4 does not divide 15.
        assert!(matches!(
            TransformPlan::new(field.clone(), &[2, 2]),
            Err(GfftError::Field(GfError::OrderUnavailable { .. }))
        ));
        let plan = TransformPlan::new(field, &[3, 5]).unwrap();
        assert!(matches!(
            plan.forward(&[0; 10]),
            Err(GfftError::LengthMismatch { want: 15, got: 10 })
        ));
    }
}
