use std::fmt;

use crate::algebra::Algebra;
use crate::error::{Error, Result};

/// Square matrix over any commutative [`Algebra`].
#[derive(Clone, PartialEq)]
pub struct SquareMatrix<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Algebra> SquareMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix must have positive size".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let t = &rows[0][0];
        if rows.iter().flatten().any(|e| !e.compatible(t)) {
            return Err(Error::MixedCarrier("matrix entries live in different carriers".into()));
        }
        Ok(SquareMatrix { rows })
    }

    pub fn identity_like(template: &T, n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n).map(|j| if i == j { template.one_like() } else { template.zero_like() }).collect()
            })
            .collect();
        SquareMatrix { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    fn template(&self) -> &T {
        &self.rows[0][0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.size();
        assert_eq!(n, other.size());
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(self.template().zero_like(), |acc, k| {
                            acc.add_ref(&self.rows[i][k].mul_ref(&other.rows[k][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        SquareMatrix { rows }
    }

    pub fn add(&self, other: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add_ref(y)).collect())
            .collect();
        SquareMatrix { rows }
    }

    pub fn scale(&self, c: &T) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().map(|x| x.mul_ref(c)).collect()).collect();
        SquareMatrix { rows }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).fold(self.template().zero_like(), |acc, (a, b)| acc.add_ref(&a.mul_ref(b))))
            .collect()
    }

    pub fn map<U: Algebra>(&self, f: impl Fn(&T) -> U) -> SquareMatrix<U> {
        SquareMatrix { rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn try_map<U: Algebra>(&self, f: impl Fn(&T) -> Result<U>) -> Result<SquareMatrix<U>> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(&f).collect::<Result<Vec<U>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix { rows })
    }

    /// Coefficients `[1, c_1, .., c_n]` of `det(λI - M)`, highest degree first.
    ///
    /// Berkowitz's division-free recurrence, so it is valid over rings with
    /// zero divisors (test rings, residue rings modulo `q^m`).
    pub fn charpoly(&self) -> Vec<T> {
        let n = self.size();
        let zero = self.template().zero_like();
        let one = self.template().one_like();
        let mut p = vec![one.clone()];
        for r in 0..n {
            // M_{r+1} = [[M_r, S], [R, a]]
            let a = &self.rows[r][r];
            let s: Vec<T> = (0..r).map(|i| self.rows[i][r].clone()).collect();
            let row: Vec<T> = (0..r).map(|j| self.rows[r][j].clone()).collect();
            let mut toeplitz = vec![one.clone(), a.neg_ref()];
            let mut ms = s.clone();
            for _ in 0..r {
                let dot = row.iter().zip(&ms).fold(zero.clone(), |acc, (x, y)| acc.add_ref(&x.mul_ref(y)));
                toeplitz.push(dot.neg_ref());
                ms = (0..r)
                    .map(|i| {
                        (0..r).fold(zero.clone(), |acc, k| acc.add_ref(&self.rows[i][k].mul_ref(&ms[k])))
                    })
                    .collect();
            }
            let next: Vec<T> = (0..r + 2)
                .map(|i| {
                    (0..=i.min(r)).fold(zero.clone(), |acc, j| acc.add_ref(&toeplitz[i - j].mul_ref(&p[j])))
                })
                .collect();
            p = next;
        }
        p
    }

    /// Determinant and adjugate, with `adj·M = M·adj = det·I`.
    /// The adjugate of a 1×1 matrix is `[1]`.
    pub fn det_and_adjugate(&self) -> (T, SquareMatrix<T>) {
        let n = self.size();
        let c = self.charpoly();
        let sign = |k: usize| if k.is_multiple_of(2) { self.template().one_like() } else { self.template().one_like().neg_ref() };
        let det = c[n].mul_ref(&sign(n));
        // adj = (-1)^{n-1} (M^{n-1} + c_1 M^{n-2} + ... + c_{n-1} I), by Horner.
        let ident = Self::identity_like(self.template(), n);
        let mut acc = ident.clone();
        for ck in c.iter().take(n).skip(1) {
            acc = self.mul(&acc).add(&ident.scale(ck));
        }
        (det, acc.scale(&sign(n - 1)))
    }

    pub fn det(&self) -> T {
        self.det_and_adjugate().0
    }
}

impl<T: fmt::Display> fmt::Display for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: fmt::Display> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::scalar::{Scalar, ScalarRing};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Laplace expansion along the first row; independent of Berkowitz.
    fn cofactor_det(m: &[Vec<Scalar>]) -> Scalar {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = m[0][0].zero_like();
        for j in 0..n {
            let minor: Vec<Vec<Scalar>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = m[0][j].mul_ref(&cofactor_det(&minor));
            acc = if j % 2 == 0 { acc.add_ref(&term) } else { acc.sub_ref(&term) };
        }
        acc
    }

    fn random_matrix(ring: &ScalarRing, n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix<Scalar> {
        let rows = (0..n).map(|_| (0..n).map(|_| ring.from_i64(rng.gen_range(-5..=5))).collect()).collect();
        SquareMatrix::new(rows).unwrap()
    }

    #[test]
    fn one_by_one_adjugate_is_one() {
        let q = ScalarRing::rationals();
        let y2 = parse_poly("2*y", &["x", "y"], &q).unwrap();
        let m = SquareMatrix::new(vec![vec![y2.clone()]]).unwrap();
        let (det, adj) = m.det_and_adjugate();
        assert_eq!(det, y2);
        assert!(adj.get(0, 0).is_one());
    }

    #[test]
    fn two_by_two_textbook() {
        let q = ScalarRing::rationals();
        let v = ["a", "b", "c", "d"];
        let p = |s: &str| parse_poly(s, &v, &q).unwrap();
        let m = SquareMatrix::new(vec![vec![p("a"), p("b")], vec![p("c"), p("d")]]).unwrap();
        let (det, adj) = m.det_and_adjugate();
        assert_eq!(det, p("a*d - b*c"));
        assert_eq!(adj, SquareMatrix::new(vec![vec![p("d"), p("-b")], vec![p("-c"), p("a")]]).unwrap());
    }

    #[test]
    fn adjugate_identity_random_fp_and_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ring in [ScalarRing::prime_field(7).unwrap(), ScalarRing::rationals()] {
            for n in 1..=4 {
                for _ in 0..25 {
                    let m = random_matrix(&ring, n, &mut rng);
                    let (det, adj) = m.det_and_adjugate();
                    assert_eq!(det, cofactor_det(m.rows()));
                    let d_id = SquareMatrix::identity_like(&ring.one(), n).scale(&det);
                    assert_eq!(adj.mul(&m), d_id);
                    assert_eq!(m.mul(&adj), d_id);
                }
            }
        }
    }

    #[test]
    fn adjugate_over_test_ring() {
        let r = crate::parse::parse_ring("GF(5)[e]/(e^3)").unwrap();
        let e = r.generator(0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rows = (0..3)
                .map(|_| {
                    (0..3)
                        .map(|_| &r.from_i64(rng.gen_range(0..5)) + &(&e * &r.from_i64(rng.gen_range(0..5))))
                        .collect()
                })
                .collect();
            let m = SquareMatrix::new(rows).unwrap();
            let (det, adj) = m.det_and_adjugate();
            assert_eq!(adj.mul(&m), SquareMatrix::identity_like(&r.one(), 3).scale(&det));
        }
    }
}
