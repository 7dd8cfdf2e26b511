//! BBS+ signatures in the two shapes the scheme uses.
//!
//! A signature `(d, e, σ)` under secret key `x` on a G1 element `B` (the
//! "bound" element) is `σ = (g1 · g2^d · B)^{1/(x+e)}`, verified by
//! `e(σ, X · 𝔤^e) == e(g1 · g2^d · B, 𝔤)` with `X = 𝔤^x`.
//!
//! Credentials bind a public key (`B = Y`) or an identity hash
//! (`B = g̃^{H1(ID)}`); serial signatures bind a scalar through `B = g3^s`.

use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};

use crate::codec::{Decode, Encode, Reader};
use crate::error::DecodeError;
use crate::group::{pairing_product_is_identity, random_scalar, GroupContext, Scalar, G1, G2};

/// Signing key published in G2, and in G1 as well when the holder needs it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbsKeyPair {
    sk: Scalar,
    pub pk_g2: G2,
    pub pk_g1: Option<G1>,
}

impl BbsKeyPair {
    pub fn generate<R: RngCore + CryptoRng>(ctx: &GroupContext, with_g1: bool, rng: &mut R) -> Self {
        Self::from_secret(ctx, random_scalar(rng), with_g1)
    }

    pub fn from_secret(ctx: &GroupContext, sk: Scalar, with_g1: bool) -> Self {
        Self { sk, pk_g2: ctx.g_frak * sk, pk_g1: with_g1.then(|| ctx.g_tilde * sk) }
    }

    pub fn secret(&self) -> Scalar {
        self.sk
    }
}

/// `(d, e, σ)`; for serial signatures the first two fields are the `(w, z)`
/// of the ticket figures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BbsSignature {
    pub d: Scalar,
    pub e: Scalar,
    pub sigma: G1,
}

/// `g1 · g2^d · bound`
pub fn signed_base(ctx: &GroupContext, d: Scalar, bound: &G1) -> G1 {
    ctx.g1 + ctx.g2 * d + bound
}

pub fn sign_credential<R: RngCore + CryptoRng>(
    ctx: &GroupContext,
    sk: Scalar,
    bound: &G1,
    rng: &mut R,
) -> BbsSignature {
    loop {
        let d = random_scalar(rng);
        let e = random_scalar(rng);
        let Some(inv) = (sk + e).inverse() else { continue };
        let sigma = signed_base(ctx, d, bound) * inv;
        return BbsSignature { d, e, sigma };
    }
}

pub fn verify_credential(ctx: &GroupContext, pk_g2: &G2, bound: &G1, sig: &BbsSignature) -> bool {
    if sig.sigma.is_zero() {
        return false;
    }
    pairing_product_is_identity(&[
        (sig.sigma, *pk_g2 + ctx.g_frak * sig.e),
        (-signed_base(ctx, sig.d, bound), ctx.g_frak),
    ])
}

/// The bound element of a serial signature, `g3^s`.
pub fn serial_bound(ctx: &GroupContext, s: Scalar) -> G1 {
    ctx.g3 * s
}

pub fn sign_serial<R: RngCore + CryptoRng>(ctx: &GroupContext, sk: Scalar, s: Scalar, rng: &mut R) -> BbsSignature {
    sign_credential(ctx, sk, &serial_bound(ctx, s), rng)
}

pub fn verify_serial(ctx: &GroupContext, pk_g2: &G2, s: Scalar, sig: &BbsSignature) -> bool {
    verify_credential(ctx, pk_g2, &serial_bound(ctx, s), sig)
}

impl Encode for BbsSignature {
    fn encode(&self, out: &mut Vec<u8>) {
        self.d.encode(out);
        self.e.encode(out);
        self.sigma.encode(out);
    }
}

impl Decode for BbsSignature {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { d: r.get()?, e: r.get()?, sigma: r.get()? })
    }
}
