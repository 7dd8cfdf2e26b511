use std::collections::HashSet;

use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};

use super::pseudonym_secret;
use crate::bbs::{signed_base, BbsSignature};
use crate::codec::{kind, put_list, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, ProofFailure, Result};
use crate::group::{domain, hash_to_scalar, pairing_product_is_identity, random_scalar, HashInput, Scalar, G1};
use crate::registry::{verify_key_credential, PublicParams};

/// One service's pseudonym `(P_V, Q_V)` with its commitments `(P'_V, Q'_V)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudonymCommitment {
    pub p: G1,
    pub p_commit: G1,
    pub q: G1,
    pub q_commit: G1,
}

/// Proof that the sender holds a CA credential `(d_u, e_u, σ_U)` on
/// `Y_U = g̃^{x_u}` and that each pseudonym commits to the same `x_u`.
///
/// The credential is shown randomized as `σ̄ = σ^{y1}`,
/// `σ̃ = σ̄^{-e_u} A^{y1}` (which equals `σ̄^α`) and `Ā = A^{y1} g2^{-y2}`,
/// with `A = g1 g2^{d_u} Y_U`. The proven relations are
///
/// * `σ̃ / Ā = σ̄^{-e_u} g2^{y2}`
/// * `g1^{-1} = Ā^{-y4} g2^{y} g̃^{x_u}` where `y4 = 1/y1`, `y = d_u - y2·y4`
/// * `P_V = g̃^{x_u} Y_CV^{k_v}` and `Q_V = g̃^{k_v}` for every service
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuingProof {
    pub sigma_bar: G1,
    pub sigma_tilde: G1,
    pub a_bar: G1,
    /// commitment for the first relation
    pub w1: G1,
    /// commitment for the second relation
    pub w2: G1,
    pub pseudonyms: Vec<PseudonymCommitment>,
    pub challenge: Scalar,
    /// response for `e_u`
    pub e_response: Scalar,
    /// response for `y`
    pub y_response: Scalar,
    /// response for `y2`
    pub y2_response: Scalar,
    /// response for `y4`
    pub y4_response: Scalar,
    /// response for `x_u`
    pub x_response: Scalar,
    /// responses for each `k_v`, in service order
    pub k_responses: Vec<Scalar>,
}

fn issuing_challenge(proof: &IssuingProof) -> Scalar {
    let mut input = HashInput::new()
        .element(&proof.sigma_bar)
        .element(&proof.sigma_tilde)
        .element(&proof.a_bar)
        .element(&proof.w1)
        .element(&proof.w2);
    for ps in &proof.pseudonyms {
        input = input.element(&ps.p).element(&ps.p_commit).element(&ps.q).element(&ps.q_commit);
    }
    hash_to_scalar(domain::PI1, input.as_bytes())
}

pub(crate) fn check_service_ids(service_ids: &[Vec<u8>]) -> Result<()> {
    if service_ids.is_empty() {
        return Err(Error::EmptyServiceSet);
    }
    let mut seen = HashSet::new();
    for id in service_ids {
        if !seen.insert(id.as_slice()) {
            return Err(Error::DuplicateService(String::from_utf8_lossy(id).into_owned()));
        }
    }
    Ok(())
}

/// Builds the issuing proof for `service_ids`, in that order, with pseudonym
/// exponents `k_v = H1(y3_seed ‖ ID_V)`.
#[allow(clippy::too_many_arguments)]
pub fn prove_issuing<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    user_sk: Scalar,
    credential: &BbsSignature,
    y_cv: &G1,
    service_ids: &[Vec<u8>],
    y3_seed: Scalar,
    rng: &mut R,
) -> Result<IssuingProof> {
    let ctx = &pp.ctx;
    let y_u = ctx.g_tilde * user_sk;
    if !verify_key_credential(pp, &y_u, credential) {
        return Err(Error::InvalidCredential);
    }
    check_service_ids(service_ids)?;

    let a = signed_base(ctx, credential.d, &y_u);
    let y1 = random_scalar(rng);
    let y2 = random_scalar(rng);
    let y4 = y1.inverse().expect("non-zero");
    let y = credential.d - y2 * y4;

    let sigma_bar = credential.sigma * y1;
    let sigma_tilde = sigma_bar * (-credential.e) + a * y1;
    let a_bar = a * y1 - ctx.g2 * y2;

    let e_blind = random_scalar(rng);
    let y2_blind = random_scalar(rng);
    let y4_blind = random_scalar(rng);
    let y_blind = random_scalar(rng);
    let x_blind = random_scalar(rng);

    let w1 = sigma_bar * (-e_blind) + ctx.g2 * y2_blind;
    let w2 = a_bar * (-y4_blind) + ctx.g_tilde * x_blind + ctx.g2 * y_blind;

    let mut k_values = Vec::with_capacity(service_ids.len());
    let mut k_blinds = Vec::with_capacity(service_ids.len());
    let mut pseudonyms = Vec::with_capacity(service_ids.len());
    for id in service_ids {
        let k = pseudonym_secret(&y3_seed, id);
        let k_blind = random_scalar(rng);
        pseudonyms.push(PseudonymCommitment {
            p: y_u + *y_cv * k,
            p_commit: ctx.g_tilde * x_blind + *y_cv * k_blind,
            q: ctx.g_tilde * k,
            q_commit: ctx.g_tilde * k_blind,
        });
        k_values.push(k);
        k_blinds.push(k_blind);
    }

    let mut proof = IssuingProof {
        sigma_bar,
        sigma_tilde,
        a_bar,
        w1,
        w2,
        pseudonyms,
        challenge: Scalar::zero(),
        e_response: Scalar::zero(),
        y_response: Scalar::zero(),
        y2_response: Scalar::zero(),
        y4_response: Scalar::zero(),
        x_response: Scalar::zero(),
        k_responses: Vec::new(),
    };
    let c = issuing_challenge(&proof);
    proof.challenge = c;
    proof.e_response = e_blind - c * credential.e;
    proof.y_response = y_blind - c * y;
    proof.y2_response = y2_blind - c * y2;
    proof.y4_response = y4_blind - c * y4;
    proof.x_response = x_blind - c * user_sk;
    proof.k_responses = k_blinds.iter().zip(&k_values).map(|(b, k)| *b - c * k).collect();
    Ok(proof)
}

/// Issuer-side check: the challenge, every commitment equation and the
/// pairing relation `e(σ̄, Y_A) == e(σ̃, 𝔤)`.
pub fn verify_issuing(pp: &PublicParams, y_cv: &G1, proof: &IssuingProof) -> Result<(), ProofFailure> {
    let ctx = &pp.ctx;
    if proof.pseudonyms.is_empty() || proof.k_responses.len() != proof.pseudonyms.len() {
        return Err(ProofFailure::Shape);
    }
    if proof.sigma_bar.is_zero() {
        return Err(ProofFailure::Degenerate);
    }
    let c = proof.challenge;
    if c != issuing_challenge(proof) {
        return Err(ProofFailure::Challenge);
    }
    let w1 = proof.sigma_bar * (-proof.e_response) + ctx.g2 * proof.y2_response + (proof.sigma_tilde - proof.a_bar) * c;
    if w1 != proof.w1 {
        return Err(ProofFailure::CredentialCommitment);
    }
    let w2 =
        proof.a_bar * (-proof.y4_response) + ctx.g_tilde * proof.x_response + ctx.g2 * proof.y_response - ctx.g1 * c;
    if w2 != proof.w2 {
        return Err(ProofFailure::AccumulatorCommitment);
    }
    for (i, (ps, k_hat)) in proof.pseudonyms.iter().zip(&proof.k_responses).enumerate() {
        if ps.p_commit != ctx.g_tilde * proof.x_response + *y_cv * *k_hat + ps.p * c {
            return Err(ProofFailure::PseudonymP(i));
        }
        if ps.q_commit != ctx.g_tilde * *k_hat + ps.q * c {
            return Err(ProofFailure::PseudonymQ(i));
        }
    }
    if !pairing_product_is_identity(&[(proof.sigma_bar, pp.y_a), (-proof.sigma_tilde, ctx.g_frak)]) {
        return Err(ProofFailure::CredentialPairing);
    }
    Ok(())
}

impl Encode for PseudonymCommitment {
    fn encode(&self, out: &mut Vec<u8>) {
        self.p.encode(out);
        self.p_commit.encode(out);
        self.q.encode(out);
        self.q_commit.encode(out);
    }
}

impl Decode for PseudonymCommitment {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { p: r.get()?, p_commit: r.get()?, q: r.get()?, q_commit: r.get()? })
    }
}

impl Encode for IssuingProof {
    fn encode(&self, out: &mut Vec<u8>) {
        for g in [&self.sigma_bar, &self.sigma_tilde, &self.a_bar, &self.w1, &self.w2] {
            g.encode(out);
        }
        put_list(out, &self.pseudonyms);
        for s in [
            &self.challenge,
            &self.e_response,
            &self.y_response,
            &self.y2_response,
            &self.y4_response,
            &self.x_response,
        ] {
            s.encode(out);
        }
        put_list(out, &self.k_responses);
    }
}

impl Decode for IssuingProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let proof = Self {
            sigma_bar: r.get()?,
            sigma_tilde: r.get()?,
            a_bar: r.get()?,
            w1: r.get()?,
            w2: r.get()?,
            pseudonyms: r.list()?,
            challenge: r.get()?,
            e_response: r.get()?,
            y_response: r.get()?,
            y2_response: r.get()?,
            y4_response: r.get()?,
            x_response: r.get()?,
            k_responses: r.list()?,
        };
        if proof.k_responses.len() != proof.pseudonyms.len() {
            return Err(DecodeError::InvalidValue("response count differs from pseudonym count"));
        }
        Ok(proof)
    }
}

impl Message for IssuingProof {
    const KIND: u8 = kind::ISSUING_PROOF;
}
