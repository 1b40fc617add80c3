//! Quantum channels as Kraus sets and their Stinespring isometries
//! `V: A → B⊗E`, which model the wiretap channel with Bob's output `B` and
//! Eve's output `E`.
//!
//! The environment basis follows Kraus-operator order: `V = Σᵢ Kᵢ ⊗ |i⟩_E`.
//! Any other choice differs by a unitary on `E`, which leaves every entropic
//! quantity unchanged.

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, re, trace_distance, ComplexMatrix, DimensionList, C64, ZERO};

/// Tolerance for `Σ Kᵢ†Kᵢ = I` and `V†V = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
    label: String,
    damping: Option<f64>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::param("kraus", "empty Kraus set"))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if operators.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::Dimension("Kraus operators have different shapes".into()));
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &operators {
            sum.add_scaled(&(&k.adjoint() * k), 1.0)?;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d_in))?;
        if dev > COMPLETENESS_TOL {
            return Err(Error::Validation(format!("Kraus completeness violated by {dev:e}")));
        }
        Ok(Self { operators, d_in, d_out, label: label.into(), damping: None })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Damping parameter when the set was built by [`amplitude_damping`].
    pub fn damping(&self) -> Option<f64> {
        self.damping
    }

    /// `Σᵢ Kᵢ ρ Kᵢ†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.d_in || rho.cols() != self.d_in {
            return Err(Error::Dimension(format!(
                "channel input dimension {} vs state {}x{}",
                self.d_in,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.operators {
            out.add_scaled(&rho.conjugate_by(k)?, 1.0)?;
        }
        Ok(out)
    }
}

/// Qubit amplitude damping: `K₀ = |0⟩⟨0| + √(1−γ)|1⟩⟨1|`, `K₁ = √γ|0⟩⟨1|`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param("gamma", format!("{gamma} is outside [0, 1]")));
    }
    let k0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
    let k1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
    let mut set = KrausSet::new(vec![k0, k1], format!("amplitude_damping(gamma={gamma})"))?;
    set.damping = Some(gamma);
    Ok(set)
}

/// Channel registry entry: a family name plus its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    AmplitudeDamping { gamma: f64 },
    Kraus { operators: Vec<ComplexMatrix> },
}

impl ChannelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::AmplitudeDamping { .. } => "amplitude_damping",
            ChannelSpec::Kraus { .. } => "kraus",
        }
    }

    pub fn kraus_set(&self) -> Result<KrausSet> {
        match self {
            ChannelSpec::AmplitudeDamping { gamma } => amplitude_damping(*gamma),
            ChannelSpec::Kraus { operators } => KrausSet::new(operators.clone(), "kraus"),
        }
    }

    pub fn wiretap(&self) -> Result<WiretapChannel> {
        isometric_extension(&self.kraus_set()?)
    }
}

/// Isometry `V: A → B⊗E` realizing a wiretap channel.
#[derive(Clone, Debug, PartialEq)]
pub struct WiretapChannel {
    isometry: ComplexMatrix,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    label: String,
    damping: Option<f64>,
}

impl WiretapChannel {
    pub fn from_isometry(isometry: ComplexMatrix, d_b: usize, d_e: usize, label: impl Into<String>) -> Result<Self> {
        if isometry.rows() != d_b * d_e {
            return Err(Error::Dimension(format!(
                "isometry has {} rows, expected d_B*d_E = {}",
                isometry.rows(),
                d_b * d_e
            )));
        }
        if !isometry.is_isometry(COMPLETENESS_TOL) {
            return Err(Error::Validation("V†V differs from the identity".into()));
        }
        let d_a = isometry.cols();
        Ok(Self { isometry, d_a, d_b, d_e, label: label.into(), damping: None })
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn damping(&self) -> Option<f64> {
        self.damping
    }

    /// `V ρ V†` on `B⊗E`.
    pub fn joint_output(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        rho.conjugate_by(&self.isometry)
    }

    pub fn bob_output(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        partial_trace(&self.joint_output(rho)?, &self.output_dims(), &[0])
    }

    pub fn eve_output(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        partial_trace(&self.joint_output(rho)?, &self.output_dims(), &[1])
    }

    fn output_dims(&self) -> DimensionList {
        DimensionList::new(vec![self.d_b, self.d_e]).expect("positive dimensions")
    }

    /// Applies `V` to factor `target` of a state vector, which becomes the
    /// adjacent pair `(B, E)` in the returned dimension list.
    pub fn apply_to_vector(&self, psi: &[C64], dims: &DimensionList, target: usize) -> Result<(Vec<C64>, DimensionList)> {
        let (pre, post) = self.check_target(dims, target)?;
        if psi.len() != dims.total() {
            return Err(Error::Dimension(format!("vector of length {} vs dims {:?}", psi.len(), dims.as_slice())));
        }
        let d_out = self.d_b * self.d_e;
        let mut out = vec![ZERO; pre * d_out * post];
        for p in 0..pre {
            for a in 0..self.d_a {
                let src = &psi[(p * self.d_a + a) * post..(p * self.d_a + a + 1) * post];
                if src.iter().all(|z| *z == ZERO) {
                    continue;
                }
                for k in 0..d_out {
                    let v = self.isometry[(k, a)];
                    if v == ZERO {
                        continue;
                    }
                    let dst = &mut out[(p * d_out + k) * post..(p * d_out + k + 1) * post];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += v * s;
                    }
                }
            }
        }
        Ok((out, self.expanded_dims(dims, target)))
    }

    fn check_target(&self, dims: &DimensionList, target: usize) -> Result<(usize, usize)> {
        if target >= dims.len() {
            return Err(Error::Dimension(format!("target {target} out of range for {} subsystems", dims.len())));
        }
        if dims[target] != self.d_a {
            return Err(Error::Dimension(format!(
                "subsystem {target} has dimension {}, channel input is {}",
                dims[target], self.d_a
            )));
        }
        let pre = dims.as_slice()[..target].iter().product();
        let post = dims.as_slice()[target + 1..].iter().product();
        Ok((pre, post))
    }

    fn expanded_dims(&self, dims: &DimensionList, target: usize) -> DimensionList {
        let mut d = dims.as_slice().to_vec();
        d.splice(target..=target, [self.d_b, self.d_e]);
        DimensionList::new(d).expect("positive dimensions")
    }
}

/// Stinespring isometry `V = Σᵢ Kᵢ ⊗ |i⟩_E` with `d_E` equal to the number of
/// Kraus operators.
pub fn isometric_extension(kraus: &KrausSet) -> Result<WiretapChannel> {
    let d_e = kraus.operators.len();
    let mut v = ComplexMatrix::zeros(kraus.d_out * d_e, kraus.d_in);
    for (i, k) in kraus.operators.iter().enumerate() {
        for b in 0..kraus.d_out {
            for a in 0..kraus.d_in {
                v[(b * d_e + i, a)] = k[(b, a)];
            }
        }
    }
    let mut chan = WiretapChannel::from_isometry(v, kraus.d_out, d_e, kraus.label.clone())?;
    chan.damping = kraus.damping;
    Ok(chan)
}

/// `(id ⊗ N_{A→BE} ⊗ id)(ρ)`: the target subsystem is replaced by `(B, E)`.
pub fn apply_to_subsystem(
    chan: &WiretapChannel,
    rho: &ComplexMatrix,
    dims: &DimensionList,
    target: usize,
) -> Result<(ComplexMatrix, DimensionList)> {
    let (pre, post) = chan.check_target(dims, target)?;
    if !rho.is_square() || rho.rows() != dims.total() {
        return Err(Error::Dimension(format!(
            "{}x{} state vs dims {:?}",
            rho.rows(),
            rho.cols(),
            dims.as_slice()
        )));
    }
    let w = crate::linalg::tensor_product(
        &crate::linalg::tensor_product(&ComplexMatrix::identity(pre), &chan.isometry),
        &ComplexMatrix::identity(post),
    );
    Ok((rho.conjugate_by(&w)?, chan.expanded_dims(dims, target)))
}

/// Trace distance between Eve's marginal `tr_B(VρV†)` and the amplitude
/// damping channel with parameter `1−γ` applied to `ρ`. Only defined for
/// channels built from [`amplitude_damping`].
pub fn complementary_marginal_check(chan: &WiretapChannel, rho: &ComplexMatrix) -> Result<f64> {
    let gamma = chan
        .damping
        .ok_or_else(|| Error::param("channel", "complementary check needs an amplitude damping channel"))?;
    let expected = amplitude_damping(1.0 - gamma)?.apply(rho)?;
    trace_distance(&chan.eve_output(rho)?, &expected)
}

/// Pauli X.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, re(1.0), re(1.0), ZERO]).expect("2x2")
}
