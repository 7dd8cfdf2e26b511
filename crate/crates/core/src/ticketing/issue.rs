use rand::{CryptoRng, RngCore};

use super::{lookup_key, period_hash, ticket_serial, Tag, Ticket, TicketEntry, TicketTerms};
use crate::bbs::{sign_serial, verify_serial, BbsKeyPair, BbsSignature};
use crate::codec::{kind, put_list, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, Result, TicketFailure};
use crate::group::{identity_point, pairing, random_scalar, Scalar, G1, G2};
use crate::registry::{identity_element, G1KeyPair, PublicParams};
use crate::zkp::{check_service_ids, prove_issuing, pseudonym_secret, verify_issuing, IssuingProof};

/// Message from user to issuer: the requested services and the issuing proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssueRequest {
    pub service_ids: Vec<Vec<u8>>,
    pub proof: IssuingProof,
}

/// What the user keeps between sending a request and receiving the ticket.
#[derive(Clone, PartialEq, Eq)]
pub struct PendingRequest {
    pub service_ids: Vec<Vec<u8>>,
    y3_seed: Scalar,
}

impl std::fmt::Debug for PendingRequest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PendingRequest").field("service_ids", &self.service_ids).finish_non_exhaustive()
    }
}

/// Message from issuer to user: the ticket and the lookup randomness `R_U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TicketDelivery {
    pub r_u: G1,
    pub ticket: Ticket,
}

/// A user's accepted ticket together with the secrets needed to present it.
#[derive(Clone, PartialEq, Eq)]
pub struct Wallet {
    user_sk: Scalar,
    pub credential: BbsSignature,
    y3_seed: Scalar,
    pub r_u: G1,
    pub service_ids: Vec<Vec<u8>>,
    pub ticket: Ticket,
}

impl std::fmt::Debug for Wallet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wallet")
            .field("service_ids", &self.service_ids)
            .field("ticket", &self.ticket)
            .finish_non_exhaustive()
    }
}

impl Wallet {
    pub fn user_secret(&self) -> Scalar {
        self.user_sk
    }

    pub(crate) fn pseudonym_secret(&self, service_id: &[u8]) -> Scalar {
        pseudonym_secret(&self.y3_seed, service_id)
    }
}

/// User side of ticket issuing. `service_ids` must contain the central
/// verifier; tags are produced in the given order.
#[allow(clippy::too_many_arguments)]
pub fn request_ticket<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    user: &G1KeyPair,
    credential: &BbsSignature,
    cv_id: &[u8],
    y_cv: &G1,
    service_ids: &[Vec<u8>],
    rng: &mut R,
) -> Result<(IssueRequest, PendingRequest)> {
    check_service_ids(service_ids)?;
    if !service_ids.iter().any(|id| id == cv_id) {
        return Err(Error::MissingCentralVerifier);
    }
    let y3_seed = random_scalar(rng);
    let proof = prove_issuing(pp, user.secret(), credential, y_cv, service_ids, y3_seed, rng)?;
    let service_ids = service_ids.to_vec();
    Ok((IssueRequest { service_ids: service_ids.clone(), proof }, PendingRequest { service_ids, y3_seed }))
}

/// Issuer side: checks the request and builds one tag per requested service.
pub fn issue_ticket<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    issuer: &BbsKeyPair,
    cv_id: &[u8],
    y_cv: &G1,
    request: &IssueRequest,
    terms: &TicketTerms,
    rng: &mut R,
) -> Result<TicketDelivery> {
    let ctx = &pp.ctx;
    check_service_ids(&request.service_ids)?;
    if !request.service_ids.iter().any(|id| id == cv_id) {
        return Err(Error::MissingCentralVerifier);
    }
    let proof = &request.proof;
    if proof.pseudonyms.len() != request.service_ids.len() {
        return Err(Error::ServiceSetMismatch { proof: proof.pseudonyms.len(), services: request.service_ids.len() });
    }
    verify_issuing(pp, y_cv, proof).map_err(Error::ProofRejected)?;

    let theta = ctx.period_base(period_hash(&terms.tp, &terms.text1));
    let r_u = ctx.g_bar * random_scalar(rng);
    let mut entries = Vec::with_capacity(request.service_ids.len());
    for (id, ps) in request.service_ids.iter().zip(&proof.pseudonyms) {
        let t = random_scalar(rng);
        let mut tag = Tag {
            p: ps.p,
            q: ps.q,
            e1: pairing(&(pp.y_a_tilde * t), &identity_point(id)),
            e2: ctx.g_tilde * t,
            e3: theta * t,
            k: identity_element(ctx, id) + *y_cv * t,
            text1: terms.text1.clone(),
            text2: terms.text2.clone(),
            serial: Scalar::from(0u8),
            signature: BbsSignature { d: Scalar::from(0u8), e: Scalar::from(0u8), sigma: ctx.g1 },
        };
        tag.serial = tag.expected_serial();
        tag.signature = sign_serial(ctx, issuer.secret(), tag.serial, rng);
        entries.push(TicketEntry { lookup: lookup_key(&r_u, id), tag });
    }
    let serial = ticket_serial(entries.iter().map(|e| &e.tag.serial));
    let signature = sign_serial(ctx, issuer.secret(), serial, rng);
    Ok(TicketDelivery { r_u, ticket: Ticket { entries, serial, signature } })
}

/// User side: checks every tag against the pseudonyms it proved and the
/// issuer's signatures, then stores the ticket in a wallet.
pub fn accept_ticket(
    pp: &PublicParams,
    issuer_pk: &G2,
    y_cv: &G1,
    user: &G1KeyPair,
    credential: &BbsSignature,
    pending: PendingRequest,
    delivery: TicketDelivery,
) -> Result<Wallet> {
    check_delivery(pp, issuer_pk, y_cv, user, &pending, &delivery).map_err(Error::TicketRejected)?;
    Ok(Wallet {
        user_sk: user.secret(),
        credential: *credential,
        y3_seed: pending.y3_seed,
        r_u: delivery.r_u,
        service_ids: pending.service_ids,
        ticket: delivery.ticket,
    })
}

fn check_delivery(
    pp: &PublicParams,
    issuer_pk: &G2,
    y_cv: &G1,
    user: &G1KeyPair,
    pending: &PendingRequest,
    delivery: &TicketDelivery,
) -> Result<(), TicketFailure> {
    let ctx = &pp.ctx;
    let ticket = &delivery.ticket;
    if ticket.entries.len() != pending.service_ids.len() {
        return Err(TicketFailure::EntryCount { entries: ticket.entries.len(), services: pending.service_ids.len() });
    }
    for (i, (id, entry)) in pending.service_ids.iter().zip(&ticket.entries).enumerate() {
        if entry.lookup != lookup_key(&delivery.r_u, id) {
            return Err(TicketFailure::LookupKey(i));
        }
        let k = pseudonym_secret(&pending.y3_seed, id);
        let tag = &entry.tag;
        if tag.p != user.pk + *y_cv * k || tag.q != ctx.g_tilde * k {
            return Err(TicketFailure::Pseudonym(i));
        }
        if tag.serial != tag.expected_serial() {
            return Err(TicketFailure::TagSerial(i));
        }
        if !verify_serial(ctx, issuer_pk, tag.serial, &tag.signature) {
            return Err(TicketFailure::TagSignature(i));
        }
    }
    if ticket.serial != ticket.expected_serial() {
        return Err(TicketFailure::TicketSerial);
    }
    if !verify_serial(ctx, issuer_pk, ticket.serial, &ticket.signature) {
        return Err(TicketFailure::TicketSignature);
    }
    Ok(())
}

impl Encode for IssueRequest {
    fn encode(&self, out: &mut Vec<u8>) {
        put_list(out, &self.service_ids);
        self.proof.encode(out);
    }
}

impl Decode for IssueRequest {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { service_ids: r.list()?, proof: r.get()? })
    }
}

impl Message for IssueRequest {
    const KIND: u8 = kind::ISSUE_REQUEST;
}

impl Encode for PendingRequest {
    fn encode(&self, out: &mut Vec<u8>) {
        put_list(out, &self.service_ids);
        self.y3_seed.encode(out);
    }
}

impl Decode for PendingRequest {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { service_ids: r.list()?, y3_seed: r.get()? })
    }
}

impl Message for PendingRequest {
    const KIND: u8 = kind::TICKET_REQUEST_STATE;
}

impl Encode for TicketDelivery {
    fn encode(&self, out: &mut Vec<u8>) {
        self.r_u.encode(out);
        self.ticket.encode(out);
    }
}

impl Decode for TicketDelivery {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { r_u: r.get()?, ticket: r.get()? })
    }
}

impl Message for TicketDelivery {
    const KIND: u8 = kind::TICKET_DELIVERY;
}

impl Encode for Wallet {
    fn encode(&self, out: &mut Vec<u8>) {
        self.user_sk.encode(out);
        self.credential.encode(out);
        self.y3_seed.encode(out);
        self.r_u.encode(out);
        put_list(out, &self.service_ids);
        self.ticket.encode(out);
    }
}

impl Decode for Wallet {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            user_sk: r.get()?,
            credential: r.get()?,
            y3_seed: r.get()?,
            r_u: r.get()?,
            service_ids: r.list()?,
            ticket: r.get()?,
        })
    }
}

impl Message for Wallet {
    const KIND: u8 = kind::WALLET;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ticketing::fixture::{world, World};
    use ark_ff::One;

    fn fresh(w: &mut World, services: &[&str]) -> (IssueRequest, PendingRequest) {
        let ids: Vec<Vec<u8>> = services.iter().map(|s| s.as_bytes().to_vec()).collect();
        request_ticket(&w.pp, &w.user, &w.user_cred, w.cv_id(), &w.cv.pk, &ids, &mut w.rng).unwrap()
    }

    #[test]
    fn issued_ticket_is_accepted_and_round_trips() {
        let mut w = world(100);
        let (req, pending) = fresh(&mut w, &["V1", "V2", "CV"]);
        let req = IssueRequest::from_message(&req.to_message()).unwrap();
        let delivery = issue_ticket(&w.pp, &w.issuer, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng).unwrap();
        let delivery = TicketDelivery::from_message(&delivery.to_message()).unwrap();
        let wallet = accept_ticket(&w.pp, &w.issuer.pk_g2, &w.cv.pk, &w.user, &w.user_cred, pending, delivery).unwrap();
        assert_eq!(wallet.ticket.entries.len(), 3);
        assert_eq!(Wallet::from_message(&wallet.to_message()).unwrap(), wallet);
    }

    #[test]
    fn central_verifier_must_be_in_service_set() {
        let mut w = world(101);
        let ids = vec![b"V1".to_vec()];
        let err = request_ticket(&w.pp, &w.user, &w.user_cred, w.cv_id(), &w.cv.pk, &ids, &mut w.rng);
        assert_eq!(err.unwrap_err(), Error::MissingCentralVerifier);

        // an issuer facing a hand-built request without the CV refuses too
        let proof =
            prove_issuing(&w.pp, w.user.secret(), &w.user_cred, &w.cv.pk, &ids, Scalar::one(), &mut w.rng).unwrap();
        let req = IssueRequest { service_ids: ids, proof };
        let err = issue_ticket(&w.pp, &w.issuer, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng);
        assert_eq!(err.unwrap_err(), Error::MissingCentralVerifier);
    }

    #[test]
    fn issuer_rejects_mismatched_or_forged_requests() {
        let mut w = world(102);
        let (mut req, _) = fresh(&mut w, &["V1", "CV"]);
        req.service_ids.push(b"V2".to_vec());
        let err = issue_ticket(&w.pp, &w.issuer, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng);
        assert_eq!(err.unwrap_err(), Error::ServiceSetMismatch { proof: 2, services: 3 });

        let (mut req, _) = fresh(&mut w, &["V1", "CV"]);
        req.proof.x_response += Scalar::one();
        let err = issue_ticket(&w.pp, &w.issuer, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng);
        assert!(matches!(err.unwrap_err(), Error::ProofRejected(_)));
    }

    #[test]
    fn user_rejects_tampered_delivery() {
        let mut w = world(103);
        let (req, pending) = fresh(&mut w, &["V1", "V2", "CV"]);
        let good = issue_ticket(&w.pp, &w.issuer, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng).unwrap();
        let g = w.pp.ctx.g_tilde;
        let one = Scalar::one();
        let mut cases: Vec<(TicketDelivery, TicketFailure)> = Vec::new();
        let mut push = |f: &dyn Fn(&mut TicketDelivery), why| {
            let mut d = good.clone();
            f(&mut d);
            cases.push((d, why));
        };
        push(&|d| d.r_u += g, TicketFailure::LookupKey(0));
        push(&|d| d.ticket.entries[1].lookup[0] ^= 1, TicketFailure::LookupKey(1));
        push(&|d| d.ticket.entries.swap(0, 1), TicketFailure::LookupKey(0));
        push(
            &|d| {
                d.ticket.entries.pop();
            },
            TicketFailure::EntryCount { entries: 2, services: 3 },
        );
        push(&|d| d.ticket.entries[0].tag.p += g, TicketFailure::Pseudonym(0));
        push(&|d| d.ticket.entries[2].tag.q += g, TicketFailure::Pseudonym(2));
        push(&|d| d.ticket.entries[0].tag.e2 += g, TicketFailure::TagSerial(0));
        push(&|d| d.ticket.entries[1].tag.k += g, TicketFailure::TagSerial(1));
        push(&|d| d.ticket.entries[1].tag.text2.push(b'x'), TicketFailure::TagSerial(1));
        push(&|d| d.ticket.entries[0].tag.serial += one, TicketFailure::TagSerial(0));
        push(&|d| d.ticket.entries[0].tag.signature.d += one, TicketFailure::TagSignature(0));
        push(&|d| d.ticket.entries[2].tag.signature.e += one, TicketFailure::TagSignature(2));
        push(&|d| d.ticket.entries[2].tag.signature.sigma += g, TicketFailure::TagSignature(2));
        push(&|d| d.ticket.serial += one, TicketFailure::TicketSerial);
        push(&|d| d.ticket.signature.d += one, TicketFailure::TicketSignature);
        push(&|d| d.ticket.signature.sigma += g, TicketFailure::TicketSignature);
        for (d, why) in cases {
            let got = accept_ticket(&w.pp, &w.issuer.pk_g2, &w.cv.pk, &w.user, &w.user_cred, pending.clone(), d);
            assert_eq!(got.unwrap_err(), Error::TicketRejected(why));
        }
    }

    #[test]
    fn ticket_from_another_issuer_key_is_refused() {
        let mut w = world(104);
        let (req, pending) = fresh(&mut w, &["V1", "CV"]);
        let rogue = BbsKeyPair::generate(&w.pp.ctx, true, &mut w.rng);
        let d = issue_ticket(&w.pp, &rogue, w.cv_id(), &w.cv.pk, &req, &w.terms, &mut w.rng).unwrap();
        let got = accept_ticket(&w.pp, &w.issuer.pk_g2, &w.cv.pk, &w.user, &w.user_cred, pending, d);
        assert_eq!(got.unwrap_err(), Error::TicketRejected(TicketFailure::TagSignature(0)));
    }
}
