//! Special-soundness extractor and honest-verifier simulator for the
//! ownership proof. Test support only; compiled under `cfg(test)` or the
//! `test-support` feature.

use ark_ff::Field;
use rand::{CryptoRng, RngCore};

use super::ownership::{ownership_challenge, ownership_commit, OwnershipProof};
use crate::group::{random_scalar, GroupContext, Scalar, G1};

/// Recovers `(x_u, k_v)` from two accepting transcripts that share all four
/// group elements but answer different challenges.
pub fn extract_ownership(a: &OwnershipProof, b: &OwnershipProof) -> Option<(Scalar, Scalar)> {
    if (a.p, a.p_commit, a.q, a.q_commit) != (b.p, b.p_commit, b.q, b.q_commit) {
        return None;
    }
    let inv = (b.challenge - a.challenge).inverse()?;
    Some(((a.x_response - b.x_response) * inv, (a.k_response - b.k_response) * inv))
}

/// Rewinds an honest prover: one commitment, answered for the Fiat-Shamir
/// challenge and for a second, independent challenge.
pub fn rewind_ownership<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    user_sk: Scalar,
    y_cv: &G1,
    k_v: Scalar,
    rng: &mut R,
) -> (OwnershipProof, OwnershipProof) {
    let p = ctx.g_tilde * user_sk + *y_cv * k_v;
    let q = ctx.g_tilde * k_v;
    let (p_commit, q_commit, nonce) = ownership_commit(ctx, y_cv, rng);
    let c1 = ownership_challenge(&p, &p_commit, &q, &q_commit);
    let c2 = loop {
        let c = random_scalar(rng);
        if c != c1 {
            break c;
        }
    };
    let answer = |c: Scalar| {
        let (x_response, k_response) = nonce.respond(user_sk, k_v, c);
        OwnershipProof { p, p_commit, q, q_commit, challenge: c, x_response, k_response }
    };
    (answer(c1), answer(c2))
}

/// Produces a transcript for `(P_V, Q_V)` that satisfies the verification
/// equations under its (freely chosen) challenge, without any witness.
pub fn simulate_ownership<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    y_cv: &G1,
    p: &G1,
    q: &G1,
    rng: &mut R,
) -> OwnershipProof {
    let challenge = random_scalar(rng);
    let x_response = random_scalar(rng);
    let k_response = random_scalar(rng);
    OwnershipProof {
        p: *p,
        p_commit: ctx.g_tilde * x_response + *y_cv * k_response + *p * challenge,
        q: *q,
        q_commit: ctx.g_tilde * k_response + *q * challenge,
        challenge,
        x_response,
        k_response,
    }
}
