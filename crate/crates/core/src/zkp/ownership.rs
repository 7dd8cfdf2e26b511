use ark_ff::Zero;
use rand::{CryptoRng, RngCore};

use crate::codec::{kind, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, ProofFailure, Result};
use crate::group::{domain, hash_to_scalar, random_scalar, GroupContext, HashInput, Scalar, G1};

/// Proof of knowledge of `(x_u, k_v)` with `P_V = g̃^{x_u} Y_CV^{k_v}` and
/// `Q_V = g̃^{k_v}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnershipProof {
    pub p: G1,
    /// commitment `P'_V = g̃^{x'} Y_CV^{k'}`
    pub p_commit: G1,
    pub q: G1,
    /// commitment `Q'_V = g̃^{k'}`
    pub q_commit: G1,
    pub challenge: Scalar,
    pub x_response: Scalar,
    pub k_response: Scalar,
}

/// Prover randomness between commitment and response.
pub struct OwnershipNonce {
    x_blind: Scalar,
    k_blind: Scalar,
}

impl OwnershipNonce {
    /// `(x' - c·x, k' - c·k)`
    pub fn respond(&self, user_sk: Scalar, k_v: Scalar, challenge: Scalar) -> (Scalar, Scalar) {
        (self.x_blind - challenge * user_sk, self.k_blind - challenge * k_v)
    }
}

/// First move of the sigma protocol: `(P', Q')` and the blinding nonce.
pub fn ownership_commit<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    y_cv: &G1,
    rng: &mut R,
) -> (G1, G1, OwnershipNonce) {
    let nonce = OwnershipNonce { x_blind: random_scalar(rng), k_blind: random_scalar(rng) };
    let p_commit = ctx.g_tilde * nonce.x_blind + *y_cv * nonce.k_blind;
    let q_commit = ctx.g_tilde * nonce.k_blind;
    (p_commit, q_commit, nonce)
}

/// `c_v = H(P_V ‖ P'_V ‖ Q_V ‖ Q'_V)`
pub fn ownership_challenge(p: &G1, p_commit: &G1, q: &G1, q_commit: &G1) -> Scalar {
    let input = HashInput::new().element(p).element(p_commit).element(q).element(q_commit);
    hash_to_scalar(domain::PI2, input.as_bytes())
}

/// The two verification equations for an explicit challenge.
pub fn ownership_equations(ctx: &GroupContext, y_cv: &G1, proof: &OwnershipProof) -> Result<(), ProofFailure> {
    let c = proof.challenge;
    if proof.p_commit != ctx.g_tilde * proof.x_response + *y_cv * proof.k_response + proof.p * c {
        return Err(ProofFailure::PseudonymP(0));
    }
    if proof.q_commit != ctx.g_tilde * proof.k_response + proof.q * c {
        return Err(ProofFailure::PseudonymQ(0));
    }
    Ok(())
}

pub fn prove_ownership<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    user_sk: Scalar,
    y_cv: &G1,
    k_v: Scalar,
    p: &G1,
    q: &G1,
    rng: &mut R,
) -> Result<OwnershipProof> {
    if *p != ctx.g_tilde * user_sk + *y_cv * k_v || *q != ctx.g_tilde * k_v {
        return Err(Error::PseudonymMismatch);
    }
    let (p_commit, q_commit, nonce) = ownership_commit(ctx, y_cv, rng);
    let challenge = ownership_challenge(p, &p_commit, q, &q_commit);
    let (x_response, k_response) = nonce.respond(user_sk, k_v, challenge);
    Ok(OwnershipProof { p: *p, p_commit, q: *q, q_commit, challenge, x_response, k_response })
}

pub fn verify_ownership(ctx: &GroupContext, y_cv: &G1, proof: &OwnershipProof) -> Result<(), ProofFailure> {
    if proof.p.is_zero() || proof.q.is_zero() {
        return Err(ProofFailure::Degenerate);
    }
    if proof.challenge != ownership_challenge(&proof.p, &proof.p_commit, &proof.q, &proof.q_commit) {
        return Err(ProofFailure::Challenge);
    }
    ownership_equations(ctx, y_cv, proof)
}

impl Encode for OwnershipProof {
    fn encode(&self, out: &mut Vec<u8>) {
        self.p.encode(out);
        self.p_commit.encode(out);
        self.q.encode(out);
        self.q_commit.encode(out);
        self.challenge.encode(out);
        self.x_response.encode(out);
        self.k_response.encode(out);
    }
}

impl Decode for OwnershipProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            p: r.get()?,
            p_commit: r.get()?,
            q: r.get()?,
            q_commit: r.get()?,
            challenge: r.get()?,
            x_response: r.get()?,
            k_response: r.get()?,
        })
    }
}

impl Message for OwnershipProof {
    const KIND: u8 = kind::OWNERSHIP_PROOF;
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        ctx: &'static GroupContext,
        x: Scalar,
        k: Scalar,
        y_cv: G1,
        p: G1,
        q: G1,
        rng: ChaCha20Rng,
    }

    fn fixture(seed: u64) -> Fixture {
        let ctx = GroupContext::get();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = random_scalar(&mut rng);
        let k = random_scalar(&mut rng);
        let y_cv = ctx.g_tilde * random_scalar(&mut rng);
        let p = ctx.g_tilde * x + y_cv * k;
        let q = ctx.g_tilde * k;
        Fixture { ctx, x, k, y_cv, p, q, rng }
    }

    #[test]
    fn honest_proof_verifies() {
        let mut f = fixture(1);
        let proof = prove_ownership(f.ctx, f.x, &f.y_cv, f.k, &f.p, &f.q, &mut f.rng).unwrap();
        assert_eq!(verify_ownership(f.ctx, &f.y_cv, &proof), Ok(()));
        let back = OwnershipProof::from_message(&proof.to_message()).unwrap();
        assert_eq!(back, proof);
    }

    #[test]
    fn replay_against_other_pseudonym_fails() {
        let mut f = fixture(2);
        let proof = prove_ownership(f.ctx, f.x, &f.y_cv, f.k, &f.p, &f.q, &mut f.rng).unwrap();
        let k2 = random_scalar(&mut f.rng);
        let moved = OwnershipProof { p: f.ctx.g_tilde * f.x + f.y_cv * k2, q: f.ctx.g_tilde * k2, ..proof };
        assert!(verify_ownership(f.ctx, &f.y_cv, &moved).is_err());
    }

    #[test]
    fn wrong_key_is_refused_and_forged_responses_fail() {
        let mut f = fixture(3);
        for _ in 0..10 {
            let wrong = random_scalar(&mut f.rng);
            assert_eq!(
                prove_ownership(f.ctx, wrong, &f.y_cv, f.k, &f.p, &f.q, &mut f.rng),
                Err(Error::PseudonymMismatch)
            );
            // a prover that skips the self-check still cannot convince the verifier
            let (p_commit, q_commit, nonce) = ownership_commit(f.ctx, &f.y_cv, &mut f.rng);
            let challenge = ownership_challenge(&f.p, &p_commit, &f.q, &q_commit);
            let (x_response, k_response) = nonce.respond(wrong, f.k, challenge);
            let forged = OwnershipProof { p: f.p, p_commit, q: f.q, q_commit, challenge, x_response, k_response };
            assert!(verify_ownership(f.ctx, &f.y_cv, &forged).is_err());
        }
    }

    #[test]
    fn tamper_sweep() {
        let mut f = fixture(4);
        let proof = prove_ownership(f.ctx, f.x, &f.y_cv, f.k, &f.p, &f.q, &mut f.rng).unwrap();
        let one = Scalar::one();
        let g = f.ctx.g_tilde;
        let cases = [
            OwnershipProof { challenge: proof.challenge + one, ..proof.clone() },
            OwnershipProof { x_response: proof.x_response + one, ..proof.clone() },
            OwnershipProof { k_response: proof.k_response + one, ..proof.clone() },
            OwnershipProof { p: proof.p + g, ..proof.clone() },
            OwnershipProof { q: proof.q + g, ..proof.clone() },
            OwnershipProof { p_commit: proof.p_commit + g, ..proof.clone() },
            OwnershipProof { q_commit: proof.q_commit + g, ..proof.clone() },
        ];
        for t in &cases {
            assert!(verify_ownership(f.ctx, &f.y_cv, t).is_err());
        }
        let other_cv = g * random_scalar(&mut f.rng);
        assert!(verify_ownership(f.ctx, &other_cv, &proof).is_err());
    }

    #[test]
    fn challenge_binds_every_commitment() {
        let mut f = fixture(5);
        let proof = prove_ownership(f.ctx, f.x, &f.y_cv, f.k, &f.p, &f.q, &mut f.rng).unwrap();
        let c = proof.challenge;
        let bump = f.ctx.g_bar;
        assert_ne!(c, ownership_challenge(&(proof.p + bump), &proof.p_commit, &proof.q, &proof.q_commit));
        assert_ne!(c, ownership_challenge(&proof.p, &(proof.p_commit + bump), &proof.q, &proof.q_commit));
        assert_ne!(c, ownership_challenge(&proof.p, &proof.p_commit, &(proof.q + bump), &proof.q_commit));
        assert_ne!(c, ownership_challenge(&proof.p, &proof.p_commit, &proof.q, &(proof.q_commit + bump)));
    }
}
