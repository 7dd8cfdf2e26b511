//! Type-III bilinear group backend.
//!
//! Everything above this module sees BLS12-381 only through the aliases and
//! helpers defined here: the three groups, the scalar field, the pairing, the
//! three protocol hash functions and the fixed set of public generators.

use std::sync::OnceLock;

use ark_bls12_381::{g1, g2, Bls12_381, Fr, G1Projective, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{PrimeField, UniformRand, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::codec::Encode;

/// Element of Z_p, p the prime order of all three groups.
pub type Scalar = Fr;
/// Element of the first source group.
pub type G1 = G1Projective;
/// Element of the second source group.
pub type G2 = G2Projective;
/// Element of the target group, written additively (`+` multiplies, `*` exponentiates).
pub type Gt = PairingOutput<Bls12_381>;

/// Identifier recorded in every parameter set so artifacts are self-describing.
pub const CURVE_ID: &str = "BLS12-381";

pub const SCALAR_LEN: usize = 32;
pub const G1_LEN: usize = 48;
pub const G2_LEN: usize = 96;
pub const GT_LEN: usize = 576;
/// Output length of [`hash_to_bytes`] in bytes (256-bit digests).
pub const DIGEST_LEN: usize = 32;

/// Domain-separation tags for the protocol hash functions.
pub mod domain {
    /// H1: {0,1}* -> Z_p.
    pub const H1: &[u8] = b"ASSO-H1";
    /// H3: {0,1}* -> {0,1}^256.
    pub const H3: &[u8] = b"ASSO-H3";
    /// Fiat-Shamir challenge of the issuing proof.
    pub const PI1: &[u8] = b"ASSO-PI1";
    /// Fiat-Shamir challenge of the ownership proof.
    pub const PI2: &[u8] = b"ASSO-PI2";
    /// H2: identities -> G2, RFC 9380 suite BLS12381G2_XMD:SHA-256_SSWU_RO_.
    pub const H2: &[u8] = b"ASSO-H2-V01-CS02-with-BLS12381G2_XMD:SHA-256_SSWU_RO_";
    /// Public generators of G1.
    pub const GEN_G1: &[u8] = b"ASSO-GEN-V01-CS02-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";
    /// Public generators of G2.
    pub const GEN_G2: &[u8] = b"ASSO-GEN-V01-CS02-with-BLS12381G2_XMD:SHA-256_SSWU_RO_";
}

type G1Hasher = MapToCurveBasedHasher<G1, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;
type G2Hasher = MapToCurveBasedHasher<G2, DefaultFieldHasher<Sha256, 128>, WBMap<g2::Config>>;

pub fn pairing(a: &G1, b: &G2) -> Gt {
    Bls12_381::pairing(a.into_affine(), b.into_affine())
}

/// Returns true iff the product of `e(a_i, b_i)` is the identity of GT.
///
/// Every verification equation `e(a, b) == e(c, d)` in the scheme is checked
/// as `e(a, b) * e(-c, d) == 1` so only one final exponentiation is paid.
pub fn pairing_product_is_identity(pairs: &[(G1, G2)]) -> bool {
    let lhs: Vec<_> = pairs.iter().map(|(a, _)| a.into_affine()).collect();
    let rhs: Vec<_> = pairs.iter().map(|(_, b)| b.into_affine()).collect();
    Bls12_381::multi_pairing(lhs, rhs).is_zero()
}

/// Uniform non-zero scalar.
pub fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// Builder for the `a ‖ b ‖ …` inputs of the protocol hashes.
///
/// Every item is written as a 4-byte big-endian length followed by its
/// canonical encoding, so distinct item sequences never collide.
#[derive(Clone, Debug, Default)]
pub struct HashInput {
    buf: Vec<u8>,
}

impl HashInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(mut self, data: &[u8]) -> Self {
        self.buf.extend_from_slice(&(data.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(data);
        self
    }

    pub fn element<T: Encode + ?Sized>(self, item: &T) -> Self {
        let mut enc = Vec::new();
        item.encode(&mut enc);
        self.bytes(&enc)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }
}

fn tagged_digest(domain: &[u8], data: &[u8]) -> [u8; DIGEST_LEN] {
    debug_assert!(domain.len() <= u8::MAX as usize);
    let mut h = Sha256::new();
    h.update([domain.len() as u8]);
    h.update(domain);
    h.update(data);
    h.finalize().into()
}

/// H1: SHA-256 over `len(domain) ‖ domain ‖ data`, read big-endian and reduced mod p.
pub fn hash_to_scalar(domain: &[u8], data: &[u8]) -> Scalar {
    Scalar::from_be_bytes_mod_order(&tagged_digest(domain, data))
}

/// H3: SHA-256 over `len(domain) ‖ domain ‖ data`.
pub fn hash_to_bytes(domain: &[u8], data: &[u8]) -> [u8; DIGEST_LEN] {
    tagged_digest(domain, data)
}

/// H2: hash-to-curve into the G2 subgroup with `domain` as the DST.
pub fn hash_to_g2(domain: &[u8], identity: &[u8]) -> G2 {
    G2Hasher::new(domain).and_then(|h| h.hash(identity)).expect("BLS12-381 G2 supports the WB hash-to-curve map").into()
}

fn hash_to_g1(domain: &[u8], label: &[u8]) -> G1 {
    G1Hasher::new(domain).and_then(|h| h.hash(label)).expect("BLS12-381 G1 supports the WB hash-to-curve map").into()
}

/// H1 applied to an identity string, as used for `g̃^{H1(ID)}`.
pub fn hash_identity(id: &[u8]) -> Scalar {
    hash_to_scalar(domain::H1, HashInput::new().bytes(id).as_bytes())
}

/// H2 applied to an identity string.
pub fn identity_point(id: &[u8]) -> G2 {
    hash_to_g2(domain::H2, id)
}

/// The public generators shared by every party.
///
/// All G1 generators and the two G2 elements θ1, θ2 are hashed to the curve
/// from fixed labels, so nobody knows a discrete-log relation between them.
/// `g_frak` is the standard G2 generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupContext {
    pub curve: String,
    pub g_tilde: G1,
    pub g_bar: G1,
    pub g1: G1,
    pub g2: G1,
    pub g3: G1,
    pub g_frak: G2,
    pub theta1: G2,
    pub theta2: G2,
}

impl GroupContext {
    /// Deterministically derives the generators. Prefer [`GroupContext::get`].
    pub fn derive() -> Self {
        Self {
            curve: CURVE_ID.to_string(),
            g_tilde: hash_to_g1(domain::GEN_G1, b"g_tilde"),
            g_bar: hash_to_g1(domain::GEN_G1, b"g_bar"),
            g1: hash_to_g1(domain::GEN_G1, b"g1"),
            g2: hash_to_g1(domain::GEN_G1, b"g2"),
            g3: hash_to_g1(domain::GEN_G1, b"g3"),
            g_frak: G2::generator(),
            theta1: hash_to_g2(domain::GEN_G2, b"theta1"),
            theta2: hash_to_g2(domain::GEN_G2, b"theta2"),
        }
    }

    /// The process-wide context, derived once.
    pub fn get() -> &'static Self {
        static CTX: OnceLock<GroupContext> = OnceLock::new();
        CTX.get_or_init(Self::derive)
    }

    /// Bit length of the group order p.
    pub fn order_bits(&self) -> u32 {
        Scalar::MODULUS_BIT_SIZE
    }

    /// `θ1 · θ2^{h}`, the base of E_V^3 and of the re-key's time-period binding.
    pub fn period_base(&self, period_hash: Scalar) -> G2 {
        self.theta1 + self.theta2 * period_hash
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ec::AffineRepr;
    use ark_ff::{Field, One};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(7)
    }

    #[test]
    fn bilinearity_symmetry() {
        let ctx = GroupContext::get();
        let mut rng = rng();
        for _ in 0..5 {
            let x = random_scalar(&mut rng);
            let y = random_scalar(&mut rng);
            let a = pairing(&(ctx.g_tilde * x), &(ctx.g_frak * y));
            let b = pairing(&(ctx.g_tilde * y), &(ctx.g_frak * x));
            assert_eq!(a, b);
            assert_eq!(a, pairing(&ctx.g_tilde, &ctx.g_frak) * (x * y));
        }
    }

    #[test]
    fn zero_exponent_is_identity() {
        let ctx = GroupContext::get();
        let e = pairing(&ctx.g1, &ctx.g_frak);
        assert!((e * Scalar::zero()).is_zero());
    }

    #[test]
    fn small_exponents_by_repeated_group_ops() {
        let ctx = GroupContext::get();
        let g = ctx.g_tilde;
        let h = ctx.g_frak;
        let g_sq = g + g;
        let h_cube = h + h + h;
        let base = pairing(&g, &h);
        let mut six = base;
        for _ in 0..5 {
            six += base;
        }
        assert_eq!(pairing(&g_sq, &h_cube), six);
        // same value again through the raw Fp12 multiplication
        assert_eq!(pairing(&g_sq, &h_cube).0, base.0.pow([6u64]));
    }

    #[test]
    fn non_degenerate_on_context_generators() {
        let ctx = GroupContext::get();
        for g in [ctx.g_tilde, ctx.g_bar, ctx.g1, ctx.g2, ctx.g3] {
            for h in [ctx.g_frak, ctx.theta1, ctx.theta2] {
                assert!(!pairing(&g, &h).is_zero());
            }
        }
    }

    #[test]
    fn pairing_product_matches_direct_comparison() {
        let ctx = GroupContext::get();
        let mut rng = rng();
        let x = random_scalar(&mut rng);
        assert!(pairing_product_is_identity(&[(ctx.g1 * x, ctx.g_frak), (-ctx.g1, ctx.g_frak * x),]));
        assert!(!pairing_product_is_identity(
            &[(ctx.g1 * x, ctx.g_frak), (-ctx.g1, ctx.g_frak * (x + Scalar::one())),]
        ));
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        let a = GroupContext::derive();
        let b = GroupContext::derive();
        assert_eq!(a, b);
        let g1s = [a.g_tilde, a.g_bar, a.g1, a.g2, a.g3];
        for (i, g) in g1s.iter().enumerate() {
            let aff = g.into_affine();
            assert!(!aff.is_zero());
            assert!(aff.is_in_correct_subgroup_assuming_on_curve());
            for h in &g1s[i + 1..] {
                assert_ne!(g, h);
            }
        }
        for h in [a.g_frak, a.theta1, a.theta2] {
            let aff = h.into_affine();
            assert!(!aff.is_zero());
            assert!(aff.is_in_correct_subgroup_assuming_on_curve());
        }
        assert_eq!(a.curve, CURVE_ID);
    }

    #[test]
    fn hash_to_scalar_is_deterministic_and_domain_separated() {
        let data = b"some data";
        assert_eq!(hash_to_scalar(domain::H1, data), hash_to_scalar(domain::H1, data));
        assert_ne!(hash_to_scalar(domain::H1, data), hash_to_scalar(domain::H3, data));
        assert_ne!(hash_to_scalar(domain::H1, data), hash_to_scalar(domain::H1, b"other"));
    }

    #[test]
    fn hash_to_bytes_fixed_length() {
        let a = hash_to_bytes(domain::H3, b"x");
        assert_eq!(a.len(), 32);
        assert_eq!(a, hash_to_bytes(domain::H3, b"x"));
    }

    #[test]
    fn hash_to_g2_in_subgroup_and_collision_free_on_corpus() {
        let ids: Vec<String> = (0..32).map(|i| format!("verifier-{i}")).collect();
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            let p = identity_point(id.as_bytes());
            assert_eq!(p, identity_point(id.as_bytes()));
            let aff = p.into_affine();
            assert!(aff.is_on_curve());
            assert!(aff.is_in_correct_subgroup_assuming_on_curve());
            assert!(!aff.is_zero());
            assert!(seen.insert(aff));
        }
    }

    #[test]
    fn hash_input_is_length_prefixed() {
        let a = HashInput::new().bytes(b"ab").bytes(b"c");
        let b = HashInput::new().bytes(b"a").bytes(b"bc");
        assert_ne!(a.as_bytes(), b.as_bytes());
        assert_eq!(a.as_bytes(), &[0, 0, 0, 2, b'a', b'b', 0, 0, 0, 1, b'c']);
    }

    #[test]
    fn order_is_255_bits() {
        assert_eq!(GroupContext::get().order_bits(), 255);
    }
}
