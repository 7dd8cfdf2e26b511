use ark_bls12_381::Bls12_381;
use ark_ec::pairing::Pairing;
use rand::{CryptoRng, RngCore};

use super::validate::check_and_spend;
use super::{period_hash, Presentation, Rejection, SpendLedger};
use crate::bbs::{sign_serial, verify_serial, BbsSignature};
use crate::codec::{kind, put_bytes, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, Result};
use crate::group::{domain, hash_to_scalar, random_scalar, HashInput, Scalar, G1, G2};
use crate::registry::{CentralAuthority, PublicParams, Role, VerifierKey};

/// Lets verifier `to_id` validate tags designated to `from_id` for one
/// time period and route.
///
/// `RK1 = g̃^{β_v}` and `RK2 = (θ1 θ2^{H1(TP ‖ Text1)})^{β_v} · SK_V / SK_V'`.
/// The CA signs the whole record with its credential key so a proxy can
/// tell a genuine re-key from one with altered fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReKey {
    pub from_id: Vec<u8>,
    pub to_id: Vec<u8>,
    pub tp: Vec<u8>,
    pub text1: Vec<u8>,
    pub rk1: G1,
    pub rk2: G2,
    pub authorisation: BbsSignature,
}

/// Public notice that `to_id` is standing in for `from_id` during `tp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RekeyAnnouncement {
    pub from_id: Vec<u8>,
    pub to_id: Vec<u8>,
    pub tp: Vec<u8>,
}

impl ReKey {
    fn digest(&self) -> Scalar {
        let input = HashInput::new()
            .bytes(&self.from_id)
            .bytes(&self.to_id)
            .bytes(&self.tp)
            .bytes(&self.text1)
            .element(&self.rk1)
            .element(&self.rk2);
        hash_to_scalar(domain::H1, input.as_bytes())
    }

    pub fn announcement(&self) -> RekeyAnnouncement {
        RekeyAnnouncement { from_id: self.from_id.clone(), to_id: self.to_id.clone(), tp: self.tp.clone() }
    }

    /// Checks the CA's signature over every field.
    pub fn is_authorised(&self, pp: &PublicParams) -> bool {
        verify_serial(&pp.ctx, &pp.y_a, self.digest(), &self.authorisation)
    }
}

fn verifier_secret(ca: &CentralAuthority, id: &[u8]) -> Result<G2> {
    ca.record(id)
        .filter(|r| r.role == Role::Verifier)
        .and_then(|r| r.sk_v)
        .ok_or_else(|| Error::UnknownVerifier(String::from_utf8_lossy(id).into_owned()))
}

/// CA side: builds the re-key from `from_id` to `to_id` for tags issued
/// under `(tp, text1)`.
pub fn generate_rekey<R: RngCore + CryptoRng>(
    ca: &CentralAuthority,
    from_id: &[u8],
    to_id: &[u8],
    tp: &[u8],
    text1: &[u8],
    rng: &mut R,
) -> Result<ReKey> {
    if from_id == to_id {
        return Err(Error::SelfProxy);
    }
    let sk_from = verifier_secret(ca, from_id)?;
    let sk_to = verifier_secret(ca, to_id)?;
    let ctx = &ca.pp().ctx;
    let beta_v = random_scalar(rng);
    let mut rekey = ReKey {
        from_id: from_id.to_vec(),
        to_id: to_id.to_vec(),
        tp: tp.to_vec(),
        text1: text1.to_vec(),
        rk1: ctx.g_tilde * beta_v,
        rk2: ctx.period_base(period_hash(tp, text1)) * beta_v + sk_from - sk_to,
        authorisation: BbsSignature { d: Scalar::from(0u8), e: Scalar::from(0u8), sigma: ctx.g1 },
    };
    rekey.authorisation = sign_serial(ctx, ca.msk().alpha(), rekey.digest(), rng);
    Ok(rekey)
}

/// Proxy validation by `proxy` on behalf of `rekey.from_id`.
///
/// Computes `Θ1 = RK2 · SK_V'` and accepts the designation if
/// `e(E2, Θ1) / e(RK1, E3) == E1`. All other checks match
/// [`validate_tag`](super::validate_tag).
pub fn proxy_validate_tag(
    pp: &PublicParams,
    proxy: &VerifierKey,
    rekey: &ReKey,
    issuer_pk: &G2,
    y_cv: &G1,
    ledger: &impl SpendLedger,
    presentation: &Presentation,
) -> Result<()> {
    if rekey.to_id != proxy.id {
        return Err(Rejection::WrongProxy.into());
    }
    if !rekey.is_authorised(pp) {
        return Err(Rejection::InvalidReKey.into());
    }
    let theta1 = rekey.rk2 + proxy.sk_v;
    check_and_spend(pp, issuer_pk, y_cv, ledger, presentation, |tag| {
        Bls12_381::multi_pairing([tag.e2, -rekey.rk1], [theta1, tag.e3]) == tag.e1
    })
}

impl Encode for ReKey {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.from_id);
        put_bytes(out, &self.to_id);
        put_bytes(out, &self.tp);
        put_bytes(out, &self.text1);
        self.rk1.encode(out);
        self.rk2.encode(out);
        self.authorisation.encode(out);
    }
}

impl Decode for ReKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            from_id: r.bytes()?,
            to_id: r.bytes()?,
            tp: r.bytes()?,
            text1: r.bytes()?,
            rk1: r.get()?,
            rk2: r.get()?,
            authorisation: r.get()?,
        })
    }
}

impl Message for ReKey {
    const KIND: u8 = kind::REKEY;
}

impl Encode for RekeyAnnouncement {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.from_id);
        put_bytes(out, &self.to_id);
        put_bytes(out, &self.tp);
    }
}

impl Decode for RekeyAnnouncement {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { from_id: r.bytes()?, to_id: r.bytes()?, tp: r.bytes()? })
    }
}

impl Message for RekeyAnnouncement {
    const KIND: u8 = kind::REKEY_ANNOUNCEMENT;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ticketing::fixture::world;
    use crate::ticketing::{present_tag, validate_tag, MemoryLedger};
    use ark_ff::One;

    #[test]
    fn proxy_accepts_tags_of_the_replaced_verifier() {
        let mut w = world(300);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let rk = generate_rekey(&w.ca, b"V1", b"V3", &w.terms.tp, &w.terms.text1, &mut w.rng).unwrap();
        let rk = ReKey::from_message(&rk.to_message()).unwrap();
        let v3 = w.verifier("V3").clone();
        let pres = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let ledger = MemoryLedger::new();
        assert_eq!(proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres), Ok(()));
        assert_eq!(
            proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres),
            Err(Error::TagRejected(Rejection::DoubleSpend))
        );
        // without the re-key the proxy's own key does not open the tag
        let pres = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        assert_eq!(
            validate_tag(&w.pp, &v3, &w.issuer.pk_g2, &w.cv.pk, &MemoryLedger::new(), &pres),
            Err(Error::TagRejected(Rejection::NotDesignated))
        );
    }

    #[test]
    fn rekey_is_scoped_to_verifier_and_period() {
        let mut w = world(301);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let v3 = w.verifier("V3").clone();
        let ledger = MemoryLedger::new();
        let other_tag = present_tag(&w.pp, &wallet, b"V2", &w.cv.pk, None, &mut w.rng).unwrap();
        let rk = generate_rekey(&w.ca, b"V1", b"V3", &w.terms.tp, &w.terms.text1, &mut w.rng).unwrap();
        assert_eq!(
            proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &ledger, &other_tag),
            Err(Error::TagRejected(Rejection::NotDesignated))
        );
        let pres = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let late = generate_rekey(&w.ca, b"V1", b"V3", b"2018-09-02", &w.terms.text1, &mut w.rng).unwrap();
        assert_eq!(
            proxy_validate_tag(&w.pp, &v3, &late, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres),
            Err(Error::TagRejected(Rejection::NotDesignated))
        );
        let v2 = w.verifier("V2").clone();
        assert_eq!(
            proxy_validate_tag(&w.pp, &v2, &rk, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres),
            Err(Error::TagRejected(Rejection::WrongProxy))
        );
        assert!(ledger.is_empty());
    }

    #[test]
    fn every_rekey_field_is_covered() {
        let mut w = world(302);
        let wallet = w.wallet(&["V1", "CV"]);
        let v3 = w.verifier("V3").clone();
        let good = generate_rekey(&w.ca, b"V1", b"V3", &w.terms.tp, &w.terms.text1, &mut w.rng).unwrap();
        let pres = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let g = w.pp.ctx.g_tilde;
        let g2 = w.pp.ctx.g_frak;
        let one = Scalar::one();
        type Mutation = Box<dyn Fn(&mut ReKey)>;
        let mutations: Vec<(Mutation, Rejection)> = vec![
            (Box::new(|r| r.from_id = b"V2".to_vec()), Rejection::InvalidReKey),
            (Box::new(|r| r.to_id = b"V2".to_vec()), Rejection::WrongProxy),
            (Box::new(|r| r.tp = b"2018-09-02".to_vec()), Rejection::InvalidReKey),
            (Box::new(|r| r.text1.push(b'x')), Rejection::InvalidReKey),
            (Box::new(move |r| r.rk1 += g), Rejection::InvalidReKey),
            (Box::new(move |r| r.rk2 += g2), Rejection::InvalidReKey),
            (Box::new(move |r| r.authorisation.d += one), Rejection::InvalidReKey),
            (Box::new(move |r| r.authorisation.e += one), Rejection::InvalidReKey),
            (Box::new(move |r| r.authorisation.sigma += g), Rejection::InvalidReKey),
        ];
        let ledger = MemoryLedger::new();
        for (mutate, why) in mutations {
            let mut rk = good.clone();
            mutate(&mut rk);
            let got = proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &ledger, &pres);
            assert_eq!(got, Err(Error::TagRejected(why)));
        }
        assert!(ledger.is_empty());
    }

    #[test]
    fn ledger_mode_decides_cross_verifier_replay() {
        let mut w = world(303);
        let wallet = w.wallet(&["V1", "CV"]);
        let v1 = w.verifier("V1").clone();
        let v3 = w.verifier("V3").clone();
        let rk = generate_rekey(&w.ca, b"V1", b"V3", &w.terms.tp, &w.terms.text1, &mut w.rng).unwrap();
        let a = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();
        let b = present_tag(&w.pp, &wallet, b"V1", &w.cv.pk, None, &mut w.rng).unwrap();

        let shared = MemoryLedger::new();
        assert_eq!(validate_tag(&w.pp, &v1, &w.issuer.pk_g2, &w.cv.pk, &shared, &a), Ok(()));
        assert_eq!(
            proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &shared, &b),
            Err(Error::TagRejected(Rejection::DoubleSpend))
        );

        let (l1, l3) = (MemoryLedger::new(), MemoryLedger::new());
        assert_eq!(validate_tag(&w.pp, &v1, &w.issuer.pk_g2, &w.cv.pk, &l1, &a), Ok(()));
        assert_eq!(proxy_validate_tag(&w.pp, &v3, &rk, &w.issuer.pk_g2, &w.cv.pk, &l3, &b), Ok(()));
    }

    #[test]
    fn rekey_preconditions() {
        let mut w = world(304);
        let (tp, t1) = (w.terms.tp.clone(), w.terms.text1.clone());
        assert_eq!(generate_rekey(&w.ca, b"V1", b"V1", &tp, &t1, &mut w.rng), Err(Error::SelfProxy));
        assert_eq!(generate_rekey(&w.ca, b"V1", b"V9", &tp, &t1, &mut w.rng), Err(Error::UnknownVerifier("V9".into())));
        // registered, but not a ticket verifier
        assert_eq!(generate_rekey(&w.ca, b"CV", b"V1", &tp, &t1, &mut w.rng), Err(Error::UnknownVerifier("CV".into())));
        let rk = generate_rekey(&w.ca, b"V1", b"V2", &tp, &t1, &mut w.rng).unwrap();
        let ann = rk.announcement();
        assert_eq!(RekeyAnnouncement::from_message(&ann.to_message()).unwrap(), ann);
    }
}
