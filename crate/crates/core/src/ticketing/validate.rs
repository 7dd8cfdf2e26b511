use rand::{CryptoRng, RngCore};

use super::{lookup_key, SpendLedger, Tag, Wallet};
use crate::bbs::verify_credential;
use crate::bbs::{verify_serial, BbsSignature};
use crate::codec::{kind, put_bytes, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, Result};
use crate::group::{pairing, G1, G2};
use crate::registry::{identity_element, PublicParams, VerifierKey};
use crate::zkp::{prove_ownership, verify_ownership, OwnershipProof};

/// Why a verifier refused a tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("tag serial was already spent")]
    DoubleSpend,
    #[error("ownership proof does not verify for this tag")]
    ProofRejected,
    #[error("tag serial does not match its contents")]
    SerialMismatch,
    #[error("tag is not designated to this verifier")]
    NotDesignated,
    #[error("issuer signature on the tag does not verify")]
    BadSignature,
    #[error("re-key is addressed to another verifier")]
    WrongProxy,
    #[error("re-key is not authorised by the CA")]
    InvalidReKey,
}

impl Rejection {
    pub const ALL: [Rejection; 7] = [
        Rejection::DoubleSpend,
        Rejection::ProofRejected,
        Rejection::SerialMismatch,
        Rejection::NotDesignated,
        Rejection::BadSignature,
        Rejection::WrongProxy,
        Rejection::InvalidReKey,
    ];

    /// Stable machine-readable name.
    pub fn name(self) -> &'static str {
        match self {
            Rejection::DoubleSpend => "double-spend",
            Rejection::ProofRejected => "proof-rejected",
            Rejection::SerialMismatch => "serial-mismatch",
            Rejection::NotDesignated => "not-designated",
            Rejection::BadSignature => "bad-signature",
            Rejection::WrongProxy => "wrong-proxy",
            Rejection::InvalidReKey => "invalid-rekey",
        }
    }

    fn code(self) -> u8 {
        Self::ALL.iter().position(|r| *r == self).expect("listed") as u8 + 1
    }

    fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code).checked_sub(1)?).copied()
    }
}

impl From<Rejection> for Error {
    fn from(r: Rejection) -> Self {
        Error::TagRejected(r)
    }
}

/// Message from verifier to user: which verifier is asking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationRequest {
    pub verifier_id: Vec<u8>,
}

/// Message from user to verifier: the tag and a fresh ownership proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub proof: OwnershipProof,
    pub tag: Tag,
}

/// Verifier's answer to a presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationResult {
    pub rejection: Option<Rejection>,
}

impl ValidationResult {
    pub fn from_outcome(outcome: &Result<()>) -> Option<Self> {
        match outcome {
            Ok(()) => Some(Self { rejection: None }),
            Err(Error::TagRejected(r)) => Some(Self { rejection: Some(*r) }),
            Err(_) => None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

/// User side of validation: finds the tag filed under `D_V = H3(R_U ‖ ID_V)`
/// and proves ownership of its pseudonym.
///
/// With `verifier_credential` set, the user first checks that the verifier
/// holds a CA credential on its identity.
pub fn present_tag<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    wallet: &Wallet,
    verifier_id: &[u8],
    y_cv: &G1,
    verifier_credential: Option<&BbsSignature>,
    rng: &mut R,
) -> Result<Presentation> {
    let ctx = &pp.ctx;
    if let Some(cred) = verifier_credential {
        if !verify_credential(ctx, &pp.y_a, &identity_element(ctx, verifier_id), cred) {
            return Err(Error::InvalidCredential);
        }
    }
    let d_v = lookup_key(&wallet.r_u, verifier_id);
    let entry = wallet
        .ticket
        .entries
        .iter()
        .find(|e| e.lookup == d_v)
        .ok_or_else(|| Error::TagNotFound(String::from_utf8_lossy(verifier_id).into_owned()))?;
    let tag = &entry.tag;
    let k_v = wallet.pseudonym_secret(verifier_id);
    let proof = prove_ownership(ctx, wallet.user_secret(), y_cv, k_v, &tag.p, &tag.q, rng)?;
    Ok(Presentation { proof, tag: tag.clone() })
}

/// The checks shared by direct and proxy validation, with the designation
/// test supplied by the caller. Records the spend on success.
pub(super) fn check_and_spend(
    pp: &PublicParams,
    issuer_pk: &G2,
    y_cv: &G1,
    ledger: &impl SpendLedger,
    presentation: &Presentation,
    designated: impl FnOnce(&Tag) -> bool,
) -> Result<()> {
    let tag = &presentation.tag;
    let proof = &presentation.proof;
    if ledger.contains(&tag.serial)? {
        return Err(Rejection::DoubleSpend.into());
    }
    if proof.p != tag.p || proof.q != tag.q || verify_ownership(&pp.ctx, y_cv, proof).is_err() {
        return Err(Rejection::ProofRejected.into());
    }
    if tag.serial != tag.expected_serial() {
        return Err(Rejection::SerialMismatch.into());
    }
    if !designated(tag) {
        return Err(Rejection::NotDesignated.into());
    }
    if !verify_serial(&pp.ctx, issuer_pk, tag.serial, &tag.signature) {
        return Err(Rejection::BadSignature.into());
    }
    if !ledger.insert(&tag.spend_record())? {
        return Err(Rejection::DoubleSpend.into());
    }
    Ok(())
}

/// Designated-verifier validation: accepts only tags with
/// `e(E2, SK_V) == E1` for this verifier's key, and each serial only once.
pub fn validate_tag(
    pp: &PublicParams,
    verifier: &VerifierKey,
    issuer_pk: &G2,
    y_cv: &G1,
    ledger: &impl SpendLedger,
    presentation: &Presentation,
) -> Result<()> {
    check_and_spend(pp, issuer_pk, y_cv, ledger, presentation, |tag| pairing(&tag.e2, &verifier.sk_v) == tag.e1)
}

impl Encode for ValidationRequest {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.verifier_id);
    }
}

impl Decode for ValidationRequest {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { verifier_id: r.bytes()? })
    }
}

impl Message for ValidationRequest {
    const KIND: u8 = kind::VALIDATION_REQUEST;
}

impl Encode for Presentation {
    fn encode(&self, out: &mut Vec<u8>) {
        self.proof.encode(out);
        self.tag.encode(out);
    }
}

impl Decode for Presentation {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { proof: r.get()?, tag: r.get()? })
    }
}

impl Message for Presentation {
    const KIND: u8 = kind::PRESENTATION;
}

impl Encode for ValidationResult {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.rejection.map_or(0, Rejection::code));
    }
}

impl Decode for ValidationResult {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let rejection = match r.u8()? {
            0 => None,
            c => Some(Rejection::from_code(c).ok_or(DecodeError::InvalidValue("rejection code"))?),
        };
        Ok(Self { rejection })
    }
}

impl Message for ValidationResult {
    const KIND: u8 = kind::VALIDATION_RESULT;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Scalar;
    use crate::ticketing::fixture::world;
    use crate::ticketing::MemoryLedger;
    use ark_ff::One;

    #[test]
    fn honest_tags_validate_once() {
        let mut w = world(200);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        for v in ["V1", "V2"] {
            let key = w.verifier(v).clone();
            let ledger = MemoryLedger::new();
            let pres = present_tag(&w.pp, &wallet, v.as_bytes(), &w.cv.pk, Some(&key.credential), &mut w.rng).unwrap();
            let pres = Presentation::from_message(&pres.to_message()).unwrap();
            assert_eq!(validate_tag(&w.pp, &key, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres), Ok(()));
            // replay with a fresh proof is still a double spend
            let again = present_tag(&w.pp, &wallet, v.as_bytes(), &w.cv.pk, None, &mut w.rng).unwrap();
            assert_eq!(
                validate_tag(&w.pp, &key, &w.issuer.pk_g2, &w.cv.pk, &ledger, &again),
                Err(Error::TagRejected(Rejection::DoubleSpend))
            );
        }
    }

    #[test]
    fn tag_missing_from_wallet() {
        let mut w = world(201);
        let wallet = w.wallet(&["V1", "CV"]);
        let got = present_tag(&w.pp, &wallet, b"V2", &w.cv.pk, None, &mut w.rng);
        assert_eq!(got.unwrap_err(), Error::TagNotFound("V2".into()));
    }

    #[test]
    fn user_can_refuse_uncredentialed_verifier() {
        let mut w = world(202);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let other = w.verifier("V2").credential;
        let got = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, Some(&other), &mut w.rng);
        assert_eq!(got.unwrap_err(), Error::InvalidCredential);
    }

    #[test]
    fn tag_for_one_verifier_is_refused_by_another() {
        let mut w = world(203);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let pres = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let v2 = w.verifier("V2").clone();
        let got = validate_tag(&w.pp, &v2, &w.issuer.pk_g2, &w.cv.pk, &MemoryLedger::new(), &pres);
        assert_eq!(got, Err(Error::TagRejected(Rejection::NotDesignated)));
    }

    #[test]
    fn every_tag_field_is_covered() {
        let mut w = world(204);
        let wallet = w.wallet(&["V1", "CV"]);
        let key = w.verifier("V1").clone();
        let good = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let g = w.pp.ctx.g_tilde;
        let one = Scalar::one();
        type Mutation = fn(&mut Presentation, G1, Scalar);
        let cases: [(Mutation, Rejection); 14] = [
            (|p, g, _| p.tag.p += g, Rejection::ProofRejected),
            (|p, g, _| p.tag.q += g, Rejection::ProofRejected),
            (|p, _, _| p.tag.e1 = p.tag.e1 + p.tag.e1, Rejection::SerialMismatch),
            (|p, g, _| p.tag.e2 += g, Rejection::SerialMismatch),
            (|p, _, _| p.tag.e3 = p.tag.e3 + p.tag.e3, Rejection::SerialMismatch),
            (|p, g, _| p.tag.k += g, Rejection::SerialMismatch),
            (|p, _, _| p.tag.text1.push(b'!'), Rejection::SerialMismatch),
            (|p, _, _| p.tag.text2.clear(), Rejection::SerialMismatch),
            (|p, _, one| p.tag.serial += one, Rejection::SerialMismatch),
            (|p, _, one| p.tag.signature.d += one, Rejection::BadSignature),
            (|p, _, one| p.tag.signature.e += one, Rejection::BadSignature),
            (|p, g, _| p.tag.signature.sigma += g, Rejection::BadSignature),
            (|p, _, one| p.proof.x_response += one, Rejection::ProofRejected),
            (|p, g, _| p.proof.q_commit += g, Rejection::ProofRejected),
        ];
        let ledger = MemoryLedger::new();
        for (mutate, why) in cases {
            let mut p = good.clone();
            mutate(&mut p, g, one);
            let got = validate_tag(&w.pp, &key, &w.issuer.pk_g2, &w.cv.pk, &ledger, &p);
            assert_eq!(got, Err(Error::TagRejected(why)));
        }
        assert!(ledger.is_empty());
        assert_eq!(validate_tag(&w.pp, &key, &w.issuer.pk_g2, &w.cv.pk, &ledger, &good), Ok(()));
    }

    #[test]
    fn proof_must_match_the_presented_tag() {
        let mut w = world(205);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let key = w.verifier("V1").clone();
        let a = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let b = present_tag(&w.pp, &wallet, b"V2", &w.cv.pk, None, &mut w.rng).unwrap();
        let mixed = Presentation { proof: b.proof, tag: a.tag };
        let got = validate_tag(&w.pp, &key, &w.issuer.pk_g2, &w.cv.pk, &MemoryLedger::new(), &mixed);
        assert_eq!(got, Err(Error::TagRejected(Rejection::ProofRejected)));
    }

    #[test]
    fn result_codes_round_trip() {
        for r in Rejection::ALL.map(Some).into_iter().chain([None]) {
            let m = ValidationResult { rejection: r };
            assert_eq!(ValidationResult::from_message(&m.to_message()).unwrap(), m);
        }
        assert!(ValidationResult::from_bytes(&[8]).is_err());
    }
}
