//! Schmidt data per letter, conditional type classes of `𝒴ⁿ` given `xⁿ`,
//! Heisenberg-Weyl operators and the keyed unitary `U(γ) = ⊕_t V_t`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, thin_svd, ComplexMatrix, C64, ZERO};

/// Largest `|𝒴|ⁿ` for which type classes are enumerated (n ≤ 8 for qubits).
pub const MAX_TYPE_SEQUENCES: usize = 1 << 8;

const NORM_TOL: f64 = 1e-10;

/// `|ψ⟩ = Σ_y √p(y) |ξ_y⟩ ⊗ |ξ'_y⟩` on `A⊗G₂`.
///
/// `weights` has one entry per basis vector of `A` (descending, zero-padded)
/// so that the `A`-side vectors form a complete basis indexed by `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    pub weights: Vec<f64>,
    /// Columns `|ξ_y⟩`, a full orthonormal basis of `A`.
    pub a_basis: ComplexMatrix,
    /// Columns `|ξ'_y⟩`, a full orthonormal basis of `G₂`.
    pub g2_basis: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> Vec<C64> {
        let (d_a, d_g2) = (self.a_basis.rows(), self.g2_basis.rows());
        let mut psi = vec![ZERO; d_a * d_g2];
        for (y, &w) in self.weights.iter().enumerate().take(d_a.min(d_g2)) {
            if w == 0.0 {
                continue;
            }
            let s = w.sqrt();
            for a in 0..d_a {
                for g in 0..d_g2 {
                    psi[a * d_g2 + g] += self.a_basis[(a, y)] * self.g2_basis[(g, y)] * s;
                }
            }
        }
        psi
    }
}

/// Extends orthonormal columns to a full basis using the standard basis.
fn complete_basis(cols: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    let mut basis = cols;
    let mut e = 0;
    while basis.len() < dim && e < dim {
        let mut v = vec![ZERO; dim];
        v[e] = c(1.0, 0.0);
        for u in &basis {
            let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= overlap * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
        e += 1;
    }
    basis
}

/// Schmidt decomposition of a unit vector on `A⊗G₂` (A index major).
pub fn schmidt_decompose(psi: &[C64], d_a: usize, d_g2: usize) -> Result<SchmidtDecomposition> {
    if psi.len() != d_a * d_g2 || d_a == 0 || d_g2 == 0 {
        return Err(Error::Dimension(format!("vector of length {} is not {d_a} x {d_g2}", psi.len())));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::param("psi", format!("norm {norm} is not 1")));
    }
    let coeffs = ComplexMatrix::from_vec(d_a, d_g2, psi.to_vec())?;
    let (singular, u, v) = thin_svd(&coeffs);
    let r = singular.len();
    let mut weights: Vec<f64> = singular.iter().map(|s| s * s).collect();
    weights.resize(d_a, 0.0);
    // M = U S V†, so the G2 partner of column k of U is conj(V[:, k]).
    let a_cols = (0..r).map(|k| u.column(k)).collect();
    let g2_cols = (0..r).map(|k| v.column(k).into_iter().map(|z| z.conj()).collect()).collect();
    Ok(SchmidtDecomposition {
        weights,
        a_basis: ComplexMatrix::from_columns(&complete_basis(a_cols, d_a))?,
        g2_basis: ComplexMatrix::from_columns(&complete_basis(g2_cols, d_g2))?,
    })
}

/// One conditional type class `𝒯ₙ(t|xⁿ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeClass {
    /// Joint counts `N(x, y)`, flattened with `x` major.
    pub joint_counts: Vec<usize>,
    /// Member sequences `yⁿ` in lexicographic order.
    pub members: Vec<Vec<usize>>,
}

impl TypeClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeDecomposition {
    pub x_n: Vec<usize>,
    pub x_alphabet: usize,
    pub y_alphabet: usize,
    /// Ordered lexicographically by `joint_counts`.
    pub classes: Vec<TypeClass>,
}

impl TypeDecomposition {
    pub fn n(&self) -> usize {
        self.x_n.len()
    }

    /// `|𝒴|ⁿ`, the total dimension of the type-ordered space.
    pub fn dimension(&self) -> usize {
        self.classes.iter().map(TypeClass::size).sum()
    }

    /// `|Γ_{xⁿ}| = Π_t 2·|𝒯_t|²`; `None` on overflow.
    pub fn key_space_size(&self) -> Option<u128> {
        self.classes.iter().try_fold(1u128, |acc, t| {
            let s = t.size() as u128;
            acc.checked_mul(2 * s * s)
        })
    }

    /// Columns `⊗ᵢ |ξ_{yᵢ|xᵢ}⟩` in type order (class by class, members
    /// lexicographic). `letters[x]` is the Schmidt data of letter `x`.
    pub fn subspace_basis(&self, letters: &[SchmidtDecomposition]) -> Result<ComplexMatrix> {
        if let Some(&x) = self.x_n.iter().find(|&&x| x >= letters.len()) {
            return Err(Error::param("x_n", format!("letter {x} has no Schmidt data")));
        }
        if letters.iter().any(|l| l.a_basis.cols() != self.y_alphabet) {
            return Err(Error::Dimension("Schmidt bases do not match the y alphabet".into()));
        }
        let d_a = self.y_alphabet;
        let mut columns = Vec::with_capacity(self.dimension());
        for class in &self.classes {
            for y_n in &class.members {
                let mut v = vec![c(1.0, 0.0)];
                for (&x, &y) in self.x_n.iter().zip(y_n) {
                    let col = letters[x].a_basis.column(y);
                    v = v.iter().flat_map(|p| col.iter().map(move |q| p * q)).collect();
                }
                debug_assert_eq!(v.len(), d_a.pow(self.n() as u32));
                columns.push(v);
            }
        }
        ComplexMatrix::from_columns(&columns)
    }
}

/// Partitions `𝒴ⁿ` by joint type with `xⁿ`.
pub fn conditional_types(x_n: &[usize], y_alphabet_size: usize) -> Result<TypeDecomposition> {
    let n = x_n.len();
    if n == 0 {
        return Err(Error::param("x_n", "empty sequence"));
    }
    if y_alphabet_size == 0 {
        return Err(Error::param("y_alphabet_size", "must be positive"));
    }
    let total = (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(y_alphabet_size))
        .filter(|&t| t <= MAX_TYPE_SEQUENCES)
        .ok_or_else(|| {
            Error::Guard(format!("{y_alphabet_size}^{n} sequences exceed the limit of {MAX_TYPE_SEQUENCES}"))
        })?;
    let x_alphabet = x_n.iter().max().copied().unwrap_or(0) + 1;
    let mut classes: std::collections::BTreeMap<Vec<usize>, Vec<Vec<usize>>> = Default::default();
    for idx in 0..total {
        let mut y_n = vec![0usize; n];
        let mut rest = idx;
        for pos in (0..n).rev() {
            y_n[pos] = rest % y_alphabet_size;
            rest /= y_alphabet_size;
        }
        let mut counts = vec![0usize; x_alphabet * y_alphabet_size];
        for (&x, &y) in x_n.iter().zip(&y_n) {
            counts[x * y_alphabet_size + y] += 1;
        }
        classes.entry(counts).or_default().push(y_n);
    }
    Ok(TypeDecomposition {
        x_n: x_n.to_vec(),
        x_alphabet,
        y_alphabet: y_alphabet_size,
        classes: classes.into_iter().map(|(joint_counts, members)| TypeClass { joint_counts, members }).collect(),
    })
}

/// `Σ_X^a Σ_Z^b` in dimension `d`, with `Σ_X|j⟩ = |j−1 mod d⟩` and
/// `Σ_Z|j⟩ = e^{2πij/d}|j⟩`, so that `Σ_XΣ_Z = e^{2πi/d} Σ_ZΣ_X`.
pub fn heisenberg_weyl(d: usize, a: usize, b: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be positive"));
    }
    if a >= d || b >= d {
        return Err(Error::param("exponents", format!("({a}, {b}) out of range for d = {d}")));
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * PI * ((b * j) % d) as f64 / d as f64;
        m[((j + d - a) % d, j)] = C64::from_polar(1.0, phase);
    }
    Ok(m)
}

/// Key `γ = ((a_t, b_t, c_t))_t`, one triple per type class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GammaKey {
    pub triples: Vec<(usize, usize, u8)>,
}

impl GammaKey {
    pub fn identity(decomp: &TypeDecomposition) -> Self {
        Self { triples: vec![(0, 0, 0); decomp.classes.len()] }
    }

    /// Key number `index` in mixed-radix order (`c` fastest, then `b`, then
    /// `a`; first class most significant).
    pub fn from_index(decomp: &TypeDecomposition, mut index: u128) -> Result<Self> {
        let size = decomp.key_space_size().ok_or_else(|| Error::Guard("key space size overflows".into()))?;
        if index >= size {
            return Err(Error::param("key index", format!("{index} >= key space size {size}")));
        }
        let mut triples = vec![(0, 0, 0); decomp.classes.len()];
        for (t, class) in decomp.classes.iter().enumerate().rev() {
            let s = class.size() as u128;
            let cbit = (index % 2) as u8;
            index /= 2;
            let b = (index % s) as usize;
            index /= s;
            let a = (index % s) as usize;
            index /= s;
            triples[t] = (a, b, cbit);
        }
        Ok(Self { triples })
    }

    pub fn random(decomp: &TypeDecomposition, rng: &mut impl Rng) -> Self {
        let triples = decomp
            .classes
            .iter()
            .map(|t| (rng.random_range(0..t.size()), rng.random_range(0..t.size()), rng.random_range(0..2u8)))
            .collect();
        Self { triples }
    }

    pub fn validate(&self, decomp: &TypeDecomposition) -> Result<()> {
        if self.triples.len() != decomp.classes.len() {
            return Err(Error::param(
                "key",
                format!("{} triples for {} type classes", self.triples.len(), decomp.classes.len()),
            ));
        }
        for (t, (&(a, b, cbit), class)) in self.triples.iter().zip(&decomp.classes).enumerate() {
            if a >= class.size() || b >= class.size() || cbit > 1 {
                return Err(Error::param(
                    "key",
                    format!("triple ({a}, {b}, {cbit}) out of range for class {t} of size {}", class.size()),
                ));
            }
        }
        Ok(())
    }
}

/// `U(γ) = ⊕_t (−1)^{c_t} Σ_X^{a_t} Σ_Z^{b_t}` in the type-ordered basis.
pub fn keyed_unitary(decomp: &TypeDecomposition, key: &GammaKey) -> Result<ComplexMatrix> {
    key.validate(decomp)?;
    let dim = decomp.dimension();
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut offset = 0;
    for (class, &(a, b, cbit)) in decomp.classes.iter().zip(&key.triples) {
        let s = class.size();
        let block = heisenberg_weyl(s, a, b)?;
        let sign = if cbit == 1 { -1.0 } else { 1.0 };
        for i in 0..s {
            for j in 0..s {
                u[(offset + i, offset + j)] = block[(i, j)] * sign;
            }
        }
        offset += s;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{build_phi, maximally_entangled_pair, Ensemble};
    use crate::linalg::{hermitian_eigenvalues, re};

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn product_state_has_one_weight() {
        let psi = [re(0.0), re(1.0), re(0.0), re(0.0)];
        let s = schmidt_decompose(&psi, 2, 2).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-12 && s.weights[1].abs() < 1e-12);
    }

    #[test]
    fn bell_state_weights() {
        let s = schmidt_decompose(&maximally_entangled_pair(), 2, 2).unwrap();
        assert!((s.weights[0] - 0.5).abs() < 1e-12 && (s.weights[1] - 0.5).abs() < 1e-12);
        let back = s.reconstruct();
        for (a, b) in back.iter().zip(maximally_entangled_pair()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn weights_are_squared_singular_values() {
        let ens = Ensemble::bitflip_family(0.5).unwrap();
        let psi = ens.psi_ag2(0).unwrap();
        let s = schmidt_decompose(&psi, 2, 2).unwrap();
        // M M† eigenvalues are the squared singular values of the 2x2 coefficient matrix
        let m = ComplexMatrix::from_vec(2, 2, psi.clone()).unwrap();
        let expected = hermitian_eigenvalues(&(&m * &m.adjoint())).unwrap();
        for (w, e) in s.weights.iter().zip(&expected) {
            assert!((w - e).abs() < 1e-12);
        }
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.a_basis.is_unitary(1e-12) && s.g2_basis.is_unitary(1e-12));
        let back = s.reconstruct();
        for (a, b) in back.iter().zip(&psi) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rectangular_schmidt_bases_are_complete() {
        let phi = build_phi(0.3).unwrap();
        // embed the 2x2 state into 3x2
        let mut psi = vec![ZERO; 6];
        psi[..4].copy_from_slice(&phi);
        let s = schmidt_decompose(&psi, 3, 2).unwrap();
        assert_eq!(s.weights.len(), 3);
        assert_eq!(s.weights[2], 0.0);
        assert!(s.a_basis.is_unitary(1e-12) && s.g2_basis.is_unitary(1e-12));
        for (a, b) in s.reconstruct().iter().zip(&psi) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn unnormalized_input_rejected() {
        assert!(schmidt_decompose(&[re(1.0), re(1.0), ZERO, ZERO], 2, 2).is_err());
    }

    #[test]
    fn single_letter_types_are_singletons() {
        let d = conditional_types(&[1], 3).unwrap();
        assert_eq!(d.classes.len(), 3);
        assert!(d.classes.iter().all(|c| c.size() == 1));
    }

    #[test]
    fn two_letter_binomial_classes() {
        let d = conditional_types(&[0, 0], 2).unwrap();
        let sizes: Vec<usize> = d.classes.iter().map(TypeClass::size).collect();
        assert_eq!(sizes, vec![1, 2, 1]);
        assert_eq!(d.classes[1].members, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn class_sizes_match_enumeration() {
        // Class sizes are products of binomials over the positions of each x.
        for x_n in [vec![0, 1, 0, 0, 1], vec![1, 1, 1, 1], vec![0, 1, 2, 0], vec![0, 0, 1, 1, 0, 1]] {
            let d = conditional_types(&x_n, 2).unwrap();
            assert_eq!(d.dimension(), 1 << x_n.len());
            for class in &d.classes {
                let mut expected = 1;
                for x in 0..d.x_alphabet {
                    let nx = x_n.iter().filter(|&&v| v == x).count();
                    expected *= binomial(nx, class.joint_counts[x * 2 + 1]);
                }
                assert_eq!(class.size(), expected);
                for y in &class.members {
                    let mut counts = vec![0; class.joint_counts.len()];
                    for (&x, &yy) in x_n.iter().zip(y) {
                        counts[x * 2 + yy] += 1;
                    }
                    assert_eq!(counts, class.joint_counts);
                }
            }
            let keys: Vec<&Vec<usize>> = d.classes.iter().map(|c| &c.joint_counts).collect();
            assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn type_guard() {
        assert!(matches!(conditional_types(&[0; 9], 2), Err(Error::Guard(_))));
        assert!(conditional_types(&[0; 8], 2).is_ok());
    }

    #[test]
    fn weyl_qubit_paulis() {
        let x = heisenberg_weyl(2, 1, 0).unwrap();
        assert_eq!(x, ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap());
        let z = heisenberg_weyl(2, 0, 1).unwrap();
        assert!(z.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1., -1.])).unwrap() < 1e-15);
    }

    #[test]
    fn weyl_commutation_phase_d3() {
        let x = heisenberg_weyl(3, 1, 0).unwrap();
        let z = heisenberg_weyl(3, 0, 1).unwrap();
        let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let lhs = &x * &z;
        let rhs = (&z * &x).scale_complex(omega);
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
        // X^d = Z^d = I
        let mut xp = ComplexMatrix::identity(3);
        let mut zp = ComplexMatrix::identity(3);
        for _ in 0..3 {
            xp = &xp * &x;
            zp = &zp * &z;
        }
        assert!(xp.max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-14);
        assert!(zp.max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-14);
        assert!(heisenberg_weyl(3, 3, 0).is_err());
    }

    #[test]
    fn keyed_unitary_identity_and_flip() {
        let d = conditional_types(&[0, 1, 0], 2).unwrap();
        let u = keyed_unitary(&d, &GammaKey::identity(&d)).unwrap();
        assert_eq!(u, ComplexMatrix::identity(8));
        let one = TypeDecomposition {
            x_n: vec![0],
            x_alphabet: 1,
            y_alphabet: 2,
            classes: vec![TypeClass { joint_counts: vec![1, 1], members: vec![vec![0], vec![1]] }],
        };
        let u = keyed_unitary(&one, &GammaKey { triples: vec![(1, 0, 0)] }).unwrap();
        assert_eq!(u, heisenberg_weyl(2, 1, 0).unwrap());
        assert!(keyed_unitary(&one, &GammaKey { triples: vec![(2, 0, 0)] }).is_err());
    }

    #[test]
    fn keys_enumerate_the_whole_space() {
        let d = conditional_types(&[0, 0], 2).unwrap();
        let size = d.key_space_size().unwrap();
        assert_eq!(size, 32);
        let keys: std::collections::HashSet<GammaKey> =
            (0..size).map(|i| GammaKey::from_index(&d, i).unwrap()).collect();
        assert_eq!(keys.len(), 32);
        assert!(keys.iter().all(|k| k.validate(&d).is_ok()));
        assert!(GammaKey::from_index(&d, size).is_err());
    }

    #[test]
    fn key_average_depolarizes_each_class() {
        // exhaustive twirl of an arbitrary operator for n <= 2
        use crate::linalg::random;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for x_n in [vec![0], vec![0, 0], vec![0, 1]] {
            let d = conditional_types(&x_n, 2).unwrap();
            let dim = d.dimension();
            let rho = random::density(dim, &mut rng);
            let size = d.key_space_size().unwrap();
            let mut avg = ComplexMatrix::zeros(dim, dim);
            for i in 0..size {
                let u = keyed_unitary(&d, &GammaKey::from_index(&d, i).unwrap()).unwrap();
                avg.add_scaled(&rho.conjugate_by(&u).unwrap(), 1.0 / size as f64).unwrap();
            }
            let mut expected = ComplexMatrix::zeros(dim, dim);
            let mut offset = 0;
            for class in &d.classes {
                let s = class.size();
                let weight: C64 = (offset..offset + s).map(|i| rho[(i, i)]).sum();
                for i in offset..offset + s {
                    expected[(i, i)] = weight / s as f64;
                }
                offset += s;
            }
            assert!(avg.max_abs_diff(&expected).unwrap() < 1e-12, "x_n {x_n:?}");
        }
    }
}
