//! Reference channels, ideal gates and random small-error processes.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::generators::{all_labels, reconstruct, Convention, ErrorGeneratorRates, Sector};
use crate::pauli::{all_paulis, PauliString};
use crate::superop::{check_dense, ptm_from_choi_terms, ptm_from_kraus, ptm_from_unitary, ChoiTerm, ProcessMatrix};

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelKind {
    Identity,
    /// `U = exp(-i angle P / 2)`.
    PauliRotation {
        pauli: PauliString,
        angle: f64,
    },
    /// `(1-q) rho + q Tr(rho) I/d`.
    Depolarizing {
        q: f64,
    },
    /// `(1-q) rho + q P rho P`.
    Dephasing {
        pauli: PauliString,
        q: f64,
    },
    /// Decay `|1> -> |0>` on one qubit.
    AmplitudeDamping {
        gamma: f64,
        qubit: usize,
    },
    /// `(1-2p) rho + p X rho X + p Y rho Y` on one qubit.
    IndivisibleXy {
        p: f64,
        qubit: usize,
    },
    /// `exp(L)` for a random Lindbladian `L`.
    RandomSmall {
        seed: u64,
        scale: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub n_qubits: usize,
    pub kind: ChannelKind,
}

impl ChannelSpec {
    pub fn new(n_qubits: usize, kind: ChannelKind) -> Self {
        ChannelSpec { n_qubits, kind }
    }

    pub fn validate(&self) -> Result<()> {
        check_dense(self.n_qubits)?;
        let unit = |name: &str, v: f64, hi: f64| {
            if (0.0..=hi).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidChannel(format!("{name} = {v} outside [0, {hi}]")))
            }
        };
        let qubit_ok = |q: usize| {
            if q < self.n_qubits {
                Ok(())
            } else {
                Err(Error::InvalidChannel(format!("qubit {q} out of range for {} qubits", self.n_qubits)))
            }
        };
        let width_ok = |p: &PauliString| {
            if p.n_qubits() == self.n_qubits {
                Ok(())
            } else {
                Err(Error::QubitMismatch { left: self.n_qubits, right: p.n_qubits() })
            }
        };
        match &self.kind {
            ChannelKind::Identity => Ok(()),
            ChannelKind::PauliRotation { pauli, angle } => {
                width_ok(pauli)?;
                if angle.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidChannel("rotation angle is not finite".into()))
                }
            }
            ChannelKind::Depolarizing { q } => unit("q", *q, 1.0),
            ChannelKind::Dephasing { pauli, q } => {
                width_ok(pauli)?;
                unit("q", *q, 1.0)
            }
            ChannelKind::AmplitudeDamping { gamma, qubit } => {
                qubit_ok(*qubit)?;
                unit("gamma", *gamma, 1.0)
            }
            ChannelKind::IndivisibleXy { p, qubit } => {
                qubit_ok(*qubit)?;
                unit("p", *p, 0.25)
            }
            ChannelKind::RandomSmall { scale, .. } => {
                if scale.is_finite() && *scale >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidChannel(format!("scale = {scale} must be non-negative")))
                }
            }
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Identity => write!(f, "identity"),
            ChannelKind::PauliRotation { pauli, angle } => write!(f, "pauli_rotation({pauli}, {angle})"),
            ChannelKind::Depolarizing { q } => write!(f, "depolarizing({q})"),
            ChannelKind::Dephasing { pauli, q } => write!(f, "dephasing({pauli}, {q})"),
            ChannelKind::AmplitudeDamping { gamma, qubit } => write!(f, "amplitude_damping({gamma}) on qubit {qubit}"),
            ChannelKind::IndivisibleXy { p, qubit } => write!(f, "indivisible_xy({p}) on qubit {qubit}"),
            ChannelKind::RandomSmall { seed, scale } => write!(f, "random_small(seed {seed}, scale {scale})"),
        }
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn make_channel(spec: &ChannelSpec) -> Result<ProcessMatrix> {
    spec.validate()?;
    let n = spec.n_qubits;
    let id = PauliString::identity(n)?;
    match &spec.kind {
        ChannelKind::Identity => ProcessMatrix::identity(n),
        ChannelKind::PauliRotation { pauli, angle } => pauli_rotation(*pauli, *angle),
        ChannelKind::Depolarizing { q } => {
            let dim = all_paulis(n).len();
            let mut m = DMatrix::<f64>::identity(dim, dim) * (1.0 - q);
            m[(0, 0)] = 1.0;
            ProcessMatrix::new(n, m)
        }
        ChannelKind::Dephasing { pauli, q } => {
            ptm_from_choi_terms(n, &[ChoiTerm::new(re(1.0 - q), id, id), ChoiTerm::new(re(*q), *pauli, *pauli)])
        }
        ChannelKind::AmplitudeDamping { gamma, qubit } => {
            let k0 = DMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re((1.0 - gamma).sqrt())]);
            let k1 = DMatrix::from_row_slice(2, 2, &[re(0.0), re(gamma.sqrt()), re(0.0), re(0.0)]);
            ptm_from_kraus(&[embed(&k0, *qubit, n), embed(&k1, *qubit, n)])
        }
        ChannelKind::IndivisibleXy { p, qubit } => {
            let x = PauliString::single(n, *qubit, 'X')?;
            let y = PauliString::single(n, *qubit, 'Y')?;
            ptm_from_choi_terms(
                n,
                &[ChoiTerm::new(re(1.0 - 2.0 * p), id, id), ChoiTerm::new(re(*p), x, x), ChoiTerm::new(re(*p), y, y)],
            )
        }
        ChannelKind::RandomSmall { seed, scale } => Ok(random_small(*seed, *scale, n)?.process),
    }
}

/// Single-qubit operator on `qubit`, identity elsewhere. Qubit 0 is the
/// most significant tensor factor.
fn embed(op: &DMatrix<Complex64>, qubit: usize, n_qubits: usize) -> DMatrix<Complex64> {
    let eye = DMatrix::<Complex64>::identity(2, 2);
    let mut out = DMatrix::<Complex64>::identity(1, 1);
    for q in 0..n_qubits {
        out = out.kronecker(if q == qubit { op } else { &eye });
    }
    out
}

/// PTM of `rho -> U rho U^dag` with `U = exp(-i angle P / 2)`.
pub fn pauli_rotation(pauli: PauliString, angle: f64) -> Result<ProcessMatrix> {
    let n = pauli.n_qubits();
    let id = PauliString::identity(n)?;
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let i = Complex64::new(0.0, 1.0);
    ptm_from_choi_terms(
        n,
        &[
            ChoiTerm::new(re(c * c), id, id),
            ChoiTerm::new(-i * c * s, pauli, id),
            ChoiTerm::new(i * c * s, id, pauli),
            ChoiTerm::new(re(s * s), pauli, pauli),
        ],
    )
}

/// Names accepted by [`ideal_target`].
pub const IDEAL_TARGETS: [&str; 9] = ["I", "X", "Y", "Z", "Xpi2", "Ypi2", "Zpi2", "CNOT", "CZ"];

/// Built-in ideal gate. `I` takes any width; the single-qubit gates need
/// one qubit and `CNOT`/`CZ` two (control on qubit 0).
pub fn ideal_target(name: &str, n_qubits: usize) -> Result<ProcessMatrix> {
    let need = |width: usize| {
        if n_qubits == width {
            Ok(())
        } else {
            Err(Error::InvalidChannel(format!("target {name} acts on {width} qubit(s), not {n_qubits}")))
        }
    };
    let one = |letter: char| PauliString::single(1, 0, letter);
    let half_pi = std::f64::consts::FRAC_PI_2;
    match name.to_ascii_lowercase().as_str() {
        "i" | "id" | "identity" => ProcessMatrix::identity(n_qubits),
        "x" | "y" | "z" => {
            need(1)?;
            pauli_rotation(one(name.to_ascii_uppercase().chars().next().unwrap())?, std::f64::consts::PI)
        }
        "xpi2" | "ypi2" | "zpi2" => {
            need(1)?;
            pauli_rotation(one(name.to_ascii_uppercase().chars().next().unwrap())?, half_pi)
        }
        "cnot" | "cx" => {
            need(2)?;
            let mut u = DMatrix::<Complex64>::zeros(4, 4);
            for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                u[(r, c)] = re(1.0);
            }
            ptm_from_unitary(&u)
        }
        "cz" => {
            need(2)?;
            let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(1.0), re(1.0), re(1.0), re(-1.0)]));
            ptm_from_unitary(&u)
        }
        _ => Err(Error::InvalidChannel(format!(
            "unknown ideal target {name:?} (expected one of {})",
            IDEAL_TARGETS.join(", ")
        ))),
    }
}

/// A random process together with the exact rates of its generator.
#[derive(Clone, Debug)]
pub struct RandomChannel {
    pub process: ProcessMatrix,
    pub rates: ErrorGeneratorRates,
}

/// `exp(L)` for a random Lindbladian: every `h_P ~ scale N(0,1)` and the
/// stochastic block `K = W W^dag` with complex Gaussian `W`, scaled so the
/// entries of `K` are of order `scale^2`. `K` maps onto S, C and A rates as
/// `s_P = K_PP`, `c_PQ = Re K_PQ`, `a_PQ = Im K_PQ`.
pub fn random_small(seed: u64, scale: f64, n_qubits: usize) -> Result<RandomChannel> {
    ChannelSpec::new(n_qubits, ChannelKind::RandomSmall { seed, scale }).validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = all_paulis(n_qubits).len() - 1;
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let h: Vec<f64> = (0..k).map(|_| scale * normal()).collect();
    let w_scale = scale / (2.0 * k as f64).sqrt();
    let w = DMatrix::<Complex64>::from_fn(k, k, |_, _| Complex64::new(normal(), normal()) * w_scale);
    let kmat = &w * w.adjoint();

    let mut rates = ErrorGeneratorRates::new(n_qubits, Convention::Logarithm);
    for label in all_labels(n_qubits)? {
        let i = label.p().dense_index() - 1;
        let v = match label.sector() {
            Sector::H => h[i],
            Sector::S => kmat[(i, i)].re,
            Sector::C => kmat[(i, label.q().unwrap().dense_index() - 1)].re,
            Sector::A => kmat[(i, label.q().unwrap().dense_index() - 1)].im,
        };
        rates.set(label, v)?;
    }
    let process = reconstruct(&rates)?.exp()?;
    Ok(RandomChannel { process, rates })
}
