//! Canonical byte encodings.
//!
//! | item            | encoding                                        | bytes |
//! |-----------------|-------------------------------------------------|-------|
//! | scalar          | big-endian, `< p`                               | 32    |
//! | G1              | compressed point (ZCash flag convention)        | 48    |
//! | G2              | compressed point (ZCash flag convention)        | 96    |
//! | GT              | Fp12 coefficients, little-endian Fp limbs       | 576   |
//! | byte string     | u32 big-endian length, then the bytes           | 4 + n |
//! | list            | u16 big-endian count, then the items            | 2 + … |
//!
//! Decoding is strict: points must be on the curve, in the prime-order
//! subgroup, not the identity, and re-encode to exactly the input bytes.
//! Top-level messages are framed as `version ‖ kind ‖ body`.

use ark_ec::short_weierstrass::{Affine, Projective};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{BigInteger, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use crate::error::DecodeError;
use crate::group::{Gt, Scalar, G1_LEN, G2_LEN, GT_LEN, SCALAR_LEN};

/// Format version byte carried by every framed message.
pub const FORMAT_VERSION: u8 = 1;

/// Kind bytes of every framed message and state file.
pub mod kind {
    pub const PUBLIC_PARAMS: u8 = 0x01;
    pub const CA_STATE: u8 = 0x02;
    pub const IDENTITY_INDEX: u8 = 0x03;
    pub const REGISTRATION_REQUEST: u8 = 0x10;
    pub const REGISTRATION_RESPONSE: u8 = 0x11;
    pub const CREDENTIAL: u8 = 0x12;
    pub const SIGNING_KEY: u8 = 0x13;
    pub const G1_KEY: u8 = 0x14;
    pub const VERIFIER_KEY: u8 = 0x15;
    pub const ISSUE_REQUEST: u8 = 0x20;
    pub const TICKET_DELIVERY: u8 = 0x21;
    pub const TICKET: u8 = 0x22;
    pub const TAG: u8 = 0x23;
    pub const WALLET: u8 = 0x24;
    pub const ISSUING_PROOF: u8 = 0x25;
    pub const TICKET_REQUEST_STATE: u8 = 0x26;
    pub const VALIDATION_REQUEST: u8 = 0x30;
    pub const PRESENTATION: u8 = 0x31;
    pub const VALIDATION_RESULT: u8 = 0x32;
    pub const OWNERSHIP_PROOF: u8 = 0x33;
    pub const REKEY: u8 = 0x40;
    pub const REKEY_ANNOUNCEMENT: u8 = 0x41;
    pub const TRACE_REPORT: u8 = 0x50;
}

/// Upper bound on any single length-prefixed byte string.
pub const MAX_BYTES_LEN: usize = 1 << 20;

pub trait Encode {
    fn encode(&self, out: &mut Vec<u8>);

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode(&mut out);
        out
    }
}

pub trait Decode: Sized {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError>;

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let v = Self::decode(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

/// A top-level wire or file object with a one-byte kind tag.
pub trait Message: Encode + Decode {
    const KIND: u8;

    fn to_message(&self) -> Vec<u8> {
        let mut out = vec![FORMAT_VERSION, Self::KIND];
        self.encode(&mut out);
        out
    }

    fn from_message(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let version = r.u8()?;
        if version != FORMAT_VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        let kind = r.u8()?;
        if kind != Self::KIND {
            return Err(DecodeError::UnexpectedKind { expected: Self::KIND, found: kind });
        }
        let v = Self::decode(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.pos.checked_add(n).ok_or(DecodeError::UnexpectedEnd)?;
        let s = self.buf.get(self.pos..end).ok_or(DecodeError::UnexpectedEnd)?;
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, DecodeError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn bool(&mut self) -> Result<bool, DecodeError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(DecodeError::InvalidValue("boolean flag")),
        }
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let n = self.u32()? as usize;
        if n > MAX_BYTES_LEN {
            return Err(DecodeError::InvalidValue("byte string too long"));
        }
        Ok(self.take(n)?.to_vec())
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let mut a = [0u8; N];
        a.copy_from_slice(self.take(N)?);
        Ok(a)
    }

    pub fn get<T: Decode>(&mut self) -> Result<T, DecodeError> {
        T::decode(self)
    }

    pub fn list<T: Decode>(&mut self) -> Result<Vec<T>, DecodeError> {
        let n = self.u16()? as usize;
        (0..n).map(|_| T::decode(self)).collect()
    }

    pub fn option<T: Decode>(&mut self) -> Result<Option<T>, DecodeError> {
        Ok(if self.bool()? { Some(T::decode(self)?) } else { None })
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn finish(&self) -> Result<(), DecodeError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

pub fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

pub fn put_bytes(out: &mut Vec<u8>, data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(data);
}

pub fn put_list<T: Encode>(out: &mut Vec<u8>, items: &[T]) {
    let n = u16::try_from(items.len()).expect("list longer than 65535 items");
    put_u16(out, n);
    for item in items {
        item.encode(out);
    }
}

pub fn put_option<T: Encode>(out: &mut Vec<u8>, item: Option<&T>) {
    match item {
        Some(v) => {
            out.push(1);
            v.encode(out);
        }
        None => out.push(0),
    }
}

impl Encode for Scalar {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.into_bigint().to_bytes_be());
    }
}

impl Decode for Scalar {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let be = r.take(SCALAR_LEN)?;
        let mut le = be.to_vec();
        le.reverse();
        // fails on values >= p, which keeps the encoding canonical
        Scalar::deserialize_compressed(&le[..]).map_err(|_| DecodeError::MalformedEncoding("scalar"))
    }
}

macro_rules! point_codec {
    ($config:ty, $len:expr, $what:literal) => {
        impl Encode for Projective<$config> {
            fn encode(&self, out: &mut Vec<u8>) {
                self.into_affine().serialize_compressed(out).expect("in-memory write");
            }
        }

        impl Decode for Projective<$config> {
            fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
                let bytes = r.take($len)?;
                let p = Affine::<$config>::deserialize_compressed_unchecked(bytes)
                    .map_err(|_| DecodeError::MalformedEncoding($what))?;
                if p.is_zero() {
                    return Err(DecodeError::IdentityElement($what));
                }
                if !p.is_on_curve() {
                    return Err(DecodeError::MalformedEncoding($what));
                }
                if !p.is_in_correct_subgroup_assuming_on_curve() {
                    return Err(DecodeError::NotInSubgroup($what));
                }
                let mut again = Vec::with_capacity($len);
                p.serialize_compressed(&mut again).expect("in-memory write");
                if again != bytes {
                    return Err(DecodeError::MalformedEncoding($what));
                }
                Ok(p.into())
            }
        }
    };
}

point_codec!(ark_bls12_381::g1::Config, G1_LEN, "G1 element");
point_codec!(ark_bls12_381::g2::Config, G2_LEN, "G2 element");

impl Encode for Gt {
    fn encode(&self, out: &mut Vec<u8>) {
        self.0.serialize_compressed(out).expect("in-memory write");
    }
}

impl Decode for Gt {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        use ark_ff::Field;
        let bytes = r.take(GT_LEN)?;
        let f = ark_bls12_381::Fq12::deserialize_compressed_unchecked(bytes)
            .map_err(|_| DecodeError::MalformedEncoding("GT element"))?;
        if f.is_one() {
            return Err(DecodeError::IdentityElement("GT element"));
        }
        if f.is_zero() || !f.pow(Scalar::MODULUS).is_one() {
            return Err(DecodeError::NotInSubgroup("GT element"));
        }
        let mut again = Vec::with_capacity(GT_LEN);
        f.serialize_compressed(&mut again).expect("in-memory write");
        if again != bytes {
            return Err(DecodeError::MalformedEncoding("GT element"));
        }
        Ok(ark_ec::pairing::PairingOutput(f))
    }
}

impl Encode for Vec<u8> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, self);
    }
}

impl Decode for Vec<u8> {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.bytes()
    }
}

impl Encode for [u8] {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, self);
    }
}

impl<const N: usize> Encode for [u8; N] {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(self);
    }
}

impl<const N: usize> Decode for [u8; N] {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.array()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{pairing, random_scalar, GroupContext, G1, G2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn round_trip<T: Encode + Decode + PartialEq + std::fmt::Debug>(v: &T) {
        let bytes = v.to_bytes();
        assert_eq!(&T::from_bytes(&bytes).unwrap(), v);
    }

    #[test]
    fn element_lengths() {
        let ctx = GroupContext::get();
        assert_eq!(Scalar::from(5u64).to_bytes().len(), SCALAR_LEN);
        assert_eq!(ctx.g1.to_bytes().len(), G1_LEN);
        assert_eq!(ctx.g_frak.to_bytes().len(), G2_LEN);
        assert_eq!(pairing(&ctx.g1, &ctx.g_frak).to_bytes().len(), GT_LEN);
    }

    #[test]
    fn scalars_are_big_endian() {
        let mut expect = [0u8; 32];
        expect[31] = 1;
        expect[30] = 2;
        assert_eq!(Scalar::from(0x0201u64).to_bytes(), expect);
    }

    #[test]
    fn random_elements_round_trip() {
        let ctx = GroupContext::get();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = random_scalar(&mut rng);
            round_trip(&x);
            round_trip(&(ctx.g_tilde * x));
            round_trip(&(ctx.g_frak * x));
        }
        for _ in 0..5 {
            let x = random_scalar(&mut rng);
            round_trip(&(pairing(&ctx.g1, &ctx.g_frak) * x));
        }
    }

    #[test]
    fn all_zero_encodings_rejected() {
        assert!(G1::from_bytes(&[0u8; G1_LEN]).is_err());
        assert!(G2::from_bytes(&[0u8; G2_LEN]).is_err());
        assert!(Gt::from_bytes(&[0u8; GT_LEN]).is_err());
    }

    #[test]
    fn identity_rejected() {
        let id = G1::zero().to_bytes();
        assert_eq!(G1::from_bytes(&id), Err(DecodeError::IdentityElement("G1 element")));
        let id = G2::zero().to_bytes();
        assert_eq!(G2::from_bytes(&id), Err(DecodeError::IdentityElement("G2 element")));
        let id = Gt::zero().to_bytes();
        assert_eq!(Gt::from_bytes(&id), Err(DecodeError::IdentityElement("GT element")));
    }

    #[test]
    fn non_canonical_scalar_rejected() {
        assert!(Scalar::from_bytes(&[0xff; 32]).is_err());
        let mut p = Scalar::MODULUS.to_bytes_be();
        assert!(Scalar::from_bytes(&p).is_err());
        *p.last_mut().unwrap() -= 1;
        assert_eq!(Scalar::from_bytes(&p).unwrap(), -Scalar::one());
    }

    #[test]
    fn off_subgroup_point_rejected() {
        // (0, 2) lies on y^2 = x^3 + 4 but outside the order-p subgroup
        let mut enc = [0u8; G1_LEN];
        enc[0] = 0x80; // compressed, x = 0, smaller y
        let err = G1::from_bytes(&enc).unwrap_err();
        assert!(matches!(err, DecodeError::NotInSubgroup(_) | DecodeError::MalformedEncoding(_)));
    }

    #[test]
    fn bit_flips_never_silently_corrupt() {
        let ctx = GroupContext::get();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = ctx.g_tilde * random_scalar(&mut rng);
        let enc = p.to_bytes();
        for _ in 0..1000 {
            let mut m = enc.clone();
            let i = rng.gen_range(0..m.len());
            m[i] ^= 1 << rng.gen_range(0..8);
            if let Ok(q) = G1::from_bytes(&m) {
                assert_ne!(q, p);
                assert_eq!(q.to_bytes(), m);
            }
        }
        let h = ctx.g_frak * random_scalar(&mut rng);
        let enc = h.to_bytes();
        for _ in 0..200 {
            let mut m = enc.clone();
            let i = rng.gen_range(0..m.len());
            m[i] ^= 1 << rng.gen_range(0..8);
            // a G2 encoding must never be accepted as G1, or vice versa
            assert!(G1::from_bytes(&m).is_err());
            if let Ok(q) = G2::from_bytes(&m) {
                assert_ne!(q, h);
            }
        }
    }

    #[test]
    fn framing_checks_version_and_kind() {
        struct Ping(Vec<u8>);
        impl Encode for Ping {
            fn encode(&self, out: &mut Vec<u8>) {
                put_bytes(out, &self.0)
            }
        }
        impl Decode for Ping {
            fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
                Ok(Ping(r.bytes()?))
            }
        }
        impl Message for Ping {
            const KIND: u8 = 0x7f;
        }
        let m = Ping(b"hi".to_vec()).to_message();
        assert_eq!(Ping::from_message(&m).unwrap().0, b"hi");
        let mut bad = m.clone();
        bad[0] = 9;
        assert_eq!(Ping::from_message(&bad).err(), Some(DecodeError::UnsupportedVersion(9)));
        let mut bad = m.clone();
        bad[1] = 1;
        assert!(matches!(Ping::from_message(&bad), Err(DecodeError::UnexpectedKind { .. })));
        let mut long = m.clone();
        long.push(0);
        assert_eq!(Ping::from_message(&long).err(), Some(DecodeError::TrailingBytes(1)));
    }

    proptest! {
        #[test]
        fn scalar_round_trip(bytes in proptest::array::uniform32(any::<u8>())) {
            let s = Scalar::from_be_bytes_mod_order(&bytes);
            let enc = s.to_bytes();
            prop_assert_eq!(Scalar::from_bytes(&enc).unwrap(), s);
        }

        #[test]
        fn byte_strings_round_trip(data in proptest::collection::vec(any::<u8>(), 0..300)) {
            let enc = data.to_bytes();
            prop_assert_eq!(enc.len(), 4 + data.len());
            prop_assert_eq!(Vec::<u8>::from_bytes(&enc).unwrap(), data);
        }
    }
}
