//! Induced cq channels of a qubit channel N: the amplitude channel W_A that
//! carries basis states, the phase channel W_P whose receiver also holds half
//! of an entangled pair, the reservoir channel W_R to the environment, the
//! private variants with a shield/eavesdropper partition of the environment,
//! and the embedding of classical wiretap channels into this picture.
//!
//! The unifying object is the channel state
//!   ψ^{ABCR} = 2^{-1/2} Σ_z |z⟩^A |z⟩^C ⊗ (V|z⟩)^{BR},
//! with V a dilation of N. Amplitude measurement of A steers BR through W_A
//! and W_R; phase measurement steers BC through W_P.

use num_complex::Complex64;

use crate::qcore::linalg::{self, CMat, CVec};
use crate::qcore::{
    CqChannel, DensityOperator, DimList, Isometry, KrausChannel, PureState,
};
use crate::{Error, Result, TOL_KRAUS};

/// A qubit-input channel plus the modeling metadata the constructions need.
///
/// `reservoir_split` declares a tensor factorization of the environment of
/// the *literal* dilation of `kraus` (one environment dimension per listed
/// operator, in order) into a shield factor S (major index) and an
/// eavesdropper factor E (minor index). It is modeling input, never
/// inferred.
///
/// `degradable` is likewise an assertion, not a computed property: there is
/// no feasibility solver here. Presets set it where degradability is a
/// standard fact; everything else defaults to false and can be overridden
/// with [`QubitChannelSpec::with_degradable`].
#[derive(Clone, Debug)]
pub struct QubitChannelSpec {
    name: String,
    kraus: KrausChannel,
    reservoir_split: Option<(usize, usize)>,
    degradable: bool,
}

impl QubitChannelSpec {
    pub fn new(
        name: impl Into<String>,
        kraus: KrausChannel,
        reservoir_split: Option<(usize, usize)>,
    ) -> Result<Self> {
        if kraus.dim_in() < 2 {
            return Err(Error::InvalidChannel(
                "channel input must be at least a bit".into(),
            ));
        }
        if let Some((s, e)) = reservoir_split {
            if s * e != kraus.kraus().len() {
                return Err(Error::InvalidChannel(format!(
                    "reservoir split {s}x{e} does not factor the {}-dim environment",
                    kraus.kraus().len()
                )));
            }
        }
        Ok(QubitChannelSpec {
            name: name.into(),
            kraus,
            reservoir_split,
            degradable: false,
        })
    }

    pub fn with_degradable(mut self, yes: bool) -> Self {
        self.degradable = yes;
        self
    }

    /// Whether the channel was asserted degradable: the reservoir output
    /// (Eve's output in the private case) is reproducible from Bob's by some
    /// channel. Trusted as given.
    pub fn asserted_degradable(&self) -> bool {
        self.degradable
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kraus(&self) -> &KrausChannel {
        &self.kraus
    }

    pub fn reservoir_split(&self) -> Option<(usize, usize)> {
        self.reservoir_split
    }

    pub fn dim_in(&self) -> usize {
        self.kraus.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus.dim_out()
    }

    /// The dilation the constructions use: the smallest exact one, unless a
    /// reservoir split pins the environment to the literal Kraus list.
    pub fn dilation(&self) -> Result<Isometry> {
        if self.reservoir_split.is_some() {
            self.kraus.stinespring_literal()
        } else {
            self.kraus.stinespring_minimal()
        }
    }

    pub fn preset(name: &str, param: f64) -> Result<QubitChannelSpec> {
        let check_unit = |p: f64| {
            if !(0.0..=1.0).contains(&p) {
                Err(Error::InvalidArgument(format!(
                    "preset parameter {p} outside [0,1]"
                )))
            } else {
                Ok(())
            }
        };
        // Standard degradability facts; dephasing and the identity
        // unconditionally, damping and erasure up to half strength.
        let degradable = match name {
            "identity" | "dephasing" => true,
            "amplitude_damping" | "erasure" => param <= 0.5,
            _ => false,
        };
        let c = Complex64::new;
        let spec = match name {
            "identity" => QubitChannelSpec::new(
                "identity",
                KrausChannel::new(vec![CMat::identity(2, 2)])?,
                None,
            ),
            "dephasing" => {
                check_unit(param)?;
                let k0 = CMat::identity(2, 2) * c((1.0 - param).sqrt(), 0.0);
                let k1 = linalg::pauli_z() * c(param.sqrt(), 0.0);
                QubitChannelSpec::new(
                    format!("dephasing({param})"),
                    KrausChannel::new(vec![k0, k1])?,
                    None,
                )
            }
            "amplitude_damping" => {
                check_unit(param)?;
                let z = c(0.0, 0.0);
                let k0 = CMat::from_row_slice(
                    2,
                    2,
                    &[c(1.0, 0.0), z, z, c((1.0 - param).sqrt(), 0.0)],
                );
                let k1 = CMat::from_row_slice(2, 2, &[z, c(param.sqrt(), 0.0), z, z]);
                QubitChannelSpec::new(
                    format!("amplitude_damping({param})"),
                    KrausChannel::new(vec![k0, k1])?,
                    None,
                )
            }
            "erasure" => {
                check_unit(param)?;
                // Qubit in, qutrit out with |2⟩ the erasure flag.
                let z = c(0.0, 0.0);
                let keep = c((1.0 - param).sqrt(), 0.0);
                let flag = c(param.sqrt(), 0.0);
                let k0 = CMat::from_row_slice(3, 2, &[keep, z, z, keep, z, z]);
                let k1 = CMat::from_row_slice(3, 2, &[z, z, z, z, flag, z]);
                let k2 = CMat::from_row_slice(3, 2, &[z, z, z, z, z, flag]);
                QubitChannelSpec::new(
                    format!("erasure({param})"),
                    KrausChannel::new(vec![k0, k1, k2])?,
                    None,
                )
            }
            "depolarizing" => {
                check_unit(param)?;
                let i = CMat::identity(2, 2) * c((1.0 - 0.75 * param).sqrt(), 0.0);
                let s = c((param / 4.0).sqrt(), 0.0);
                let y = CMat::from_row_slice(
                    2,
                    2,
                    &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
                );
                QubitChannelSpec::new(
                    format!("depolarizing({param})"),
                    KrausChannel::new(vec![
                        i,
                        linalg::pauli_x() * s,
                        y * s,
                        linalg::pauli_z() * s,
                    ])?,
                    None,
                )
            }
            other => Err(Error::UnknownLabel(format!("channel preset `{other}`"))),
        }?;
        Ok(spec.with_degradable(degradable))
    }
}

/// An extra cq map Alice prepends to the channel input: M(|z⟩⟨z|) = ρ_z.
/// Its dilation environment S′ stays on the trusted (shield) side.
#[derive(Clone, Debug)]
pub struct Preprocessor {
    make: KrausChannel,
    dilation: Isometry,
}

impl Preprocessor {
    pub fn new(make: KrausChannel) -> Result<Self> {
        if make.dim_in() != 2 || make.dim_out() != 2 {
            return Err(Error::InvalidChannel(
                "preprocessor must map a qubit to the channel input qubit".into(),
            ));
        }
        let dilation = make.stinespring_minimal()?;
        Ok(Preprocessor { make, dilation })
    }

    pub fn identity() -> Self {
        let make = KrausChannel::identity(2);
        let dilation = make.stinespring_minimal().expect("identity dilates");
        Preprocessor { make, dilation }
    }

    /// The preparation map z ↦ ρ_z, with Kraus operators √λ_{z,k} |v_{z,k}⟩⟨z|
    /// built from the eigendecompositions of the two signal states.
    pub fn preparing(rho0: &CMat, rho1: &CMat) -> Result<Self> {
        if rho0.nrows() != 2 || rho1.nrows() != 2 {
            return Err(Error::InvalidChannel("signal states must be qubits".into()));
        }
        let mut kraus = Vec::new();
        for (z, rho) in [rho0, rho1].into_iter().enumerate() {
            let (vals, vecs) = linalg::eigh(rho)?;
            let vals = linalg::clip_psd(&vals, "signal state")?;
            for (k, &lam) in vals.iter().enumerate() {
                if lam == 0.0 {
                    continue;
                }
                let mut op = CMat::zeros(2, 2);
                let s = Complex64::new(lam.sqrt(), 0.0);
                op[(0, z)] = vecs[(0, k)] * s;
                op[(1, z)] = vecs[(1, k)] * s;
                kraus.push(op);
            }
        }
        Preprocessor::new(KrausChannel::new(kraus)?)
    }

    pub fn map(&self) -> &KrausChannel {
        &self.make
    }

    pub fn dilation(&self) -> &Isometry {
        &self.dilation
    }
}

/// The induced channels of one qubit channel, together with the pure channel
/// state they are all reductions of.
///
/// In the plain quantum case `psi` lives on A,B,C,R and `w_env` is the
/// reservoir channel W_R. In the private case (built with a preprocessor and
/// a reservoir split) `psi` lives on A,B,C,S,Sp,E, the phase channel's
/// outputs live on B,C,S,Sp (Bob plus shields), and `w_env` is the
/// eavesdropper channel to E alone.
#[derive(Clone, Debug)]
pub struct InducedChannels {
    pub w_a: CqChannel,
    pub w_p: CqChannel,
    pub w_env: CqChannel,
    pub psi: PureState,
}

impl InducedChannels {
    /// Rebuild the phase channel keeping only the listed output subsystems
    /// (for example B,C without the shields). Exposed because which side
    /// information the decoder is ultimately handed is a modeling choice.
    pub fn phase_channel_on(&self, keep: &[&str]) -> Result<CqChannel> {
        let mut outs = Vec::with_capacity(2);
        for x in 0..2u8 {
            let v = phase_vector(x);
            let (p, cond) = self.psi.project_vector("A", &v)?;
            let cond = cond.ok_or_else(|| {
                Error::InvalidState("phase outcome with vanishing probability".into())
            })?;
            if (p - 0.5).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "phase measurement of A gave probability {p}, expected 1/2"
                )));
            }
            outs.push(cond.partial_trace(keep)?);
        }
        CqChannel::new(outs)
    }
}

pub(crate) fn phase_vector(x: u8) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if x == 0 { s } else { -s };
    CVec::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(sign, 0.0)])
}

fn require_binary(ch: &QubitChannelSpec) -> Result<()> {
    if ch.dim_in() != 2 {
        return Err(Error::InvalidChannel(format!(
            "construction needs a binary-input channel, got input dim {}",
            ch.dim_in()
        )));
    }
    Ok(())
}

/// W_A: z ↦ N(|z⟩⟨z|) on B.
pub fn induce_amplitude(ch: &QubitChannelSpec) -> Result<CqChannel> {
    require_binary(ch)?;
    let dims = DimList::new(&[("B", ch.dim_out())])?;
    let mut outs = Vec::with_capacity(2);
    for z in 0..2 {
        let mut rho_in = CMat::zeros(2, 2);
        rho_in[(z, z)] = Complex64::new(1.0, 0.0);
        outs.push(DensityOperator::new(
            dims.clone(),
            ch.kraus().apply_matrix(&rho_in)?,
        )?);
    }
    CqChannel::new(outs)
}

/// W_P: x ↦ σ_x on B⊗C, where |σ_x⟩^{BCR} = V (Z^x)^C |Φ⟩^{A'C} and the
/// receiver holds both the channel output B and the entangled reference C.
pub fn induce_phase(ch: &QubitChannelSpec) -> Result<CqChannel> {
    require_binary(ch)?;
    let v = ch.dilation()?;
    let d_r = v.dim_out() / ch.dim_out();
    let phi = PureState::maximally_entangled("Ain", "C", 2)?;
    let mut outs = Vec::with_capacity(2);
    for x in 0..2 {
        let mut flipped = phi.clone();
        if x == 1 {
            flipped = flipped.apply_within(&["C"], &linalg::pauli_z())?;
        }
        let big = flipped.apply_isometry_on(
            &["Ain"],
            &[("B", ch.dim_out()), ("R", d_r)],
            v.matrix(),
        )?;
        outs.push(big.partial_trace(&["B", "C"])?);
    }
    CqChannel::new(outs)
}

/// W_R: z ↦ ϕ_z on the dilation environment R.
pub fn induce_reservoir(ch: &QubitChannelSpec) -> Result<CqChannel> {
    require_binary(ch)?;
    let v = ch.dilation()?;
    let d_r = v.dim_out() / ch.dim_out();
    let dims = DimList::new(&[("R", d_r)])?;
    let mut outs = Vec::with_capacity(2);
    for z in 0..2 {
        let mut rho_in = CMat::zeros(2, 2);
        rho_in[(z, z)] = Complex64::new(1.0, 0.0);
        let big = v.apply_matrix(&rho_in)?;
        // Trace out B, the major factor.
        let mut env = CMat::zeros(d_r, d_r);
        for b in 0..ch.dim_out() {
            for i in 0..d_r {
                for j in 0..d_r {
                    env[(i, j)] += big[(b * d_r + i, b * d_r + j)];
                }
            }
        }
        outs.push(DensityOperator::new(dims.clone(), env)?);
    }
    CqChannel::new(outs)
}

/// ψ^{ABCR} = 2^{-1/2} Σ_z |z⟩^A |z⟩^C ⊗ (V|z⟩)^{BR}, labels ordered A,B,C,R.
pub fn channel_state(ch: &QubitChannelSpec) -> Result<PureState> {
    require_binary(ch)?;
    let v = ch.dilation()?;
    let d_r = v.dim_out() / ch.dim_out();
    // GHZ-type seed on (A, C, Ain).
    let dims = DimList::new(&[("A", 2), ("C", 2), ("Ain", 2)])?;
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = CVec::zeros(8);
    amps[0] = s;
    amps[7] = s;
    let seed = PureState::new_unchecked(dims, amps);
    seed.apply_isometry_on(&["Ain"], &[("B", ch.dim_out()), ("R", d_r)], v.matrix())?
        .permuted(&["A", "B", "C", "R"])
}

/// All induced channels of the plain quantum setting, sharing one dilation.
pub fn induce_all(ch: &QubitChannelSpec) -> Result<InducedChannels> {
    Ok(InducedChannels {
        w_a: induce_amplitude(ch)?,
        w_p: induce_phase(ch)?,
        w_env: induce_reservoir(ch)?,
        psi: channel_state(ch)?,
    })
}

/// The private-communication channels for N with preprocessor M:
/// amplitude channel z ↦ θ_z^B with θ_z = N(M(|z⟩⟨z|)), eavesdropper channel
/// z ↦ θ_z^E, and phase channel x ↦ ω_x on B,C,S,Sp. Requires the reservoir
/// split that says which part of the environment the eavesdropper holds; the
/// preprocessor's own environment Sp always stays on the shield side, so the
/// global state
///   ψ̄ = 2^{-1/2} Σ_z |z⟩^A |z⟩^C (V_N ⊗ 1)(V_M |z⟩)
/// is pure on A,B,C,S,Sp,E.
pub fn induce_private(ch: &QubitChannelSpec, m: &Preprocessor) -> Result<InducedChannels> {
    require_binary(ch)?;
    let (d_s, d_e) = ch.reservoir_split().ok_or_else(|| {
        Error::InvalidChannel(
            "private construction needs a reservoir split declaring the eavesdropper".into(),
        )
    })?;
    let v_n = ch.kraus().stinespring_literal()?;
    let v_m = m.dilation();
    let d_sp = v_m.dim_out() / 2;

    let dims = DimList::new(&[("A", 2), ("C", 2), ("Ain", 2)])?;
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = CVec::zeros(8);
    amps[0] = s;
    amps[7] = s;
    let psi = PureState::new_unchecked(dims, amps)
        .apply_isometry_on(&["Ain"], &[("Amid", 2), ("Sp", d_sp)], v_m.matrix())?
        .apply_isometry_on(
            &["Amid"],
            &[("B", ch.dim_out()), ("S", d_s), ("E", d_e)],
            v_n.matrix(),
        )?
        .permuted(&["A", "B", "C", "S", "Sp", "E"])?;

    let mut amp_outs = Vec::with_capacity(2);
    let mut eve_outs = Vec::with_capacity(2);
    for z in 0..2 {
        let (p, cond) = psi.project_basis("A", z)?;
        let cond = cond
            .ok_or_else(|| Error::InvalidState("vanishing amplitude branch".into()))?;
        if (p - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "amplitude measurement of A gave probability {p}, expected 1/2"
            )));
        }
        amp_outs.push(cond.partial_trace(&["B"])?);
        eve_outs.push(cond.partial_trace(&["E"])?);
    }
    let mut phase_outs = Vec::with_capacity(2);
    for x in 0..2u8 {
        let (_, cond) = psi.project_vector("A", &phase_vector(x))?;
        let cond = cond
            .ok_or_else(|| Error::InvalidState("vanishing phase branch".into()))?;
        phase_outs.push(cond.partial_trace(&["B", "C", "S", "Sp"])?);
    }
    Ok(InducedChannels {
        w_a: CqChannel::new(amp_outs)?,
        w_p: CqChannel::new(phase_outs)?,
        w_env: CqChannel::new(eve_outs)?,
        psi,
    })
}

/// A conditional distribution p(y, z | x) describing a classical wiretap
/// channel: Bob sees y, the eavesdropper sees z.
#[derive(Clone, Debug)]
pub struct WiretapPmf {
    probs: Vec<Vec<Vec<f64>>>,
}

impl WiretapPmf {
    pub fn new(probs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let nx = probs.len();
        if nx < 2 {
            return Err(Error::InvalidArgument(
                "wiretap pmf needs at least two inputs".into(),
            ));
        }
        let ny = probs[0].len();
        let nz = probs[0].first().map_or(0, |r| r.len());
        if ny == 0 || nz == 0 {
            return Err(Error::InvalidArgument("wiretap pmf has empty axes".into()));
        }
        for (x, row) in probs.iter().enumerate() {
            let mut sum = 0.0;
            if row.len() != ny {
                return Err(Error::InvalidArgument("ragged wiretap pmf".into()));
            }
            for ys in row {
                if ys.len() != nz {
                    return Err(Error::InvalidArgument("ragged wiretap pmf".into()));
                }
                for &p in ys {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidArgument(format!(
                            "probability {p} outside [0,1]"
                        )));
                    }
                    sum += p;
                }
            }
            if (sum - 1.0).abs() > TOL_KRAUS {
                return Err(Error::InvalidArgument(format!(
                    "pmf row x={x} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(WiretapPmf { probs })
    }

    pub fn inputs(&self) -> usize {
        self.probs.len()
    }

    pub fn bob_outputs(&self) -> usize {
        self.probs[0].len()
    }

    pub fn eve_outputs(&self) -> usize {
        self.probs[0][0].len()
    }

    pub fn prob(&self, x: usize, y: usize, z: usize) -> f64 {
        self.probs[x][y][z]
    }
}

/// Embed a classical wiretap channel p(y,z|x) as a qubit-style channel spec:
/// a measure-and-prepare map that measures x, hands |y⟩ to Bob as the channel
/// output, and holds Eve's |z⟩ in the dilation environment. The dilation acts
/// as
///   |x⟩ ↦ Σ_{y,z} √p(y,z|x) |y⟩^B |x,y,z⟩^S |z⟩^E,
/// so the environment factors into a shield record S = (x,y,z) (major index)
/// and the eavesdropper factor E = z (minor index). Because the shield also
/// records z, Eve's reduced states are exactly the classical distributions
/// p(z|x); the declared reservoir split hands her that factor and nothing
/// else. Kraus operators are indexed by the environment basis (s, e) in that
/// order: δ_{z,e} √p(y,z|x) |y⟩⟨x|.
pub fn embed_classical_wiretap(pmf: &WiretapPmf) -> Result<QubitChannelSpec> {
    let (nx, ny, nz) = (pmf.inputs(), pmf.bob_outputs(), pmf.eve_outputs());
    let d_s = nx * ny * nz;
    let mut kraus = Vec::with_capacity(d_s * nz);
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                for e in 0..nz {
                    let mut k = CMat::zeros(ny, nx);
                    if e == z {
                        k[(y, x)] = Complex64::new(pmf.prob(x, y, z).sqrt(), 0.0);
                    }
                    kraus.push(k);
                }
            }
        }
    }
    QubitChannelSpec::new(
        "classical-wiretap",
        KrausChannel::new(kraus)?,
        Some((d_s, nz)),
    )
}
