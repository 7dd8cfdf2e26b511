//! Ticket lifecycle: issuing, validation by a designated verifier, proxy
//! validation under a re-key, and tracing by the central verifier.
//!
//! A ticket holds one authentication tag per service in the user's service
//! set `J_U`. The tag for verifier `V` is
//!
//! ```text
//! P_V = Y_U · Y_CV^{k_v}        Q_V = g̃^{k_v}
//! E1  = e(Ỹ_A, H2(ID_V))^{t}    E2  = g̃^{t}     E3 = (θ1 · θ2^{H1(TP ‖ Text1)})^{t}
//! K_V = g̃^{H1(ID_V)} · Y_CV^{t}
//! s_v = H1(P_V ‖ Q_V ‖ E1 ‖ E2 ‖ E3 ‖ K_V ‖ Text1 ‖ Text2)
//! ```
//!
//! plus an issuer BBS+ signature on `s_v`. Only the holder of
//! `SK_V = H2(ID_V)^β` can check `e(E2, SK_V) == E1`, which makes `V` the
//! designated verifier; the central verifier's `x_cv` opens `P_V` and `K_V`.

mod issue;
mod ledger;
mod rekey;
mod trace;
mod validate;

pub use issue::{accept_ticket, issue_ticket, request_ticket, IssueRequest, PendingRequest, TicketDelivery, Wallet};
pub use ledger::{FileLedger, MemoryLedger, SpendLedger, SpendRecord};
pub use rekey::{generate_rekey, proxy_validate_tag, ReKey, RekeyAnnouncement};
pub use trace::{trace_ticket, TraceReport};
pub use validate::{present_tag, validate_tag, Presentation, Rejection, ValidationRequest, ValidationResult};

use crate::bbs::BbsSignature;
use crate::codec::{kind, put_bytes, put_list, Decode, Encode, Message, Reader};
use crate::error::DecodeError;
use crate::group::{domain, hash_to_bytes, hash_to_scalar, Gt, HashInput, Scalar, DIGEST_LEN, G1, G2};

/// Time period and the two free-text fields bound into every tag.
///
/// `tp` is an ISO-8601 date such as `2018-09-01`. `text1` carries the route
/// or travel information a proxy verifier needs; `text2` carries version and
/// validity metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TicketTerms {
    pub tp: Vec<u8>,
    pub text1: Vec<u8>,
    pub text2: Vec<u8>,
}

impl TicketTerms {
    pub fn new(tp: impl Into<Vec<u8>>, text1: impl Into<Vec<u8>>, text2: impl Into<Vec<u8>>) -> Self {
        Self { tp: tp.into(), text1: text1.into(), text2: text2.into() }
    }
}

/// `H1(TP ‖ Text1)`, the exponent of θ2 in `E3` and in the re-key.
pub fn period_hash(tp: &[u8], text1: &[u8]) -> Scalar {
    hash_to_scalar(domain::H1, HashInput::new().bytes(tp).bytes(text1).as_bytes())
}

/// `D_V = H3(R_U ‖ ID_V)`, the lookup key the wallet files each tag under.
pub fn lookup_key(r_u: &G1, service_id: &[u8]) -> [u8; DIGEST_LEN] {
    hash_to_bytes(domain::H3, HashInput::new().element(r_u).bytes(service_id).as_bytes())
}

/// One designated-verifier authentication tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tag {
    pub p: G1,
    pub q: G1,
    pub e1: Gt,
    pub e2: G1,
    pub e3: G2,
    pub k: G1,
    pub text1: Vec<u8>,
    pub text2: Vec<u8>,
    pub serial: Scalar,
    pub signature: BbsSignature,
}

impl Tag {
    /// Recomputes `s_v` from the tag contents.
    pub fn expected_serial(&self) -> Scalar {
        let input = HashInput::new()
            .element(&self.p)
            .element(&self.q)
            .element(&self.e1)
            .element(&self.e2)
            .element(&self.e3)
            .element(&self.k)
            .bytes(&self.text1)
            .bytes(&self.text2);
        hash_to_scalar(domain::H1, input.as_bytes())
    }

    pub fn spend_record(&self) -> SpendRecord {
        SpendRecord { serial: self.serial, signature: self.signature }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TicketEntry {
    pub lookup: [u8; DIGEST_LEN],
    pub tag: Tag,
}

/// The tags in service order plus the issuer's signature on the ticket serial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ticket {
    pub entries: Vec<TicketEntry>,
    pub serial: Scalar,
    pub signature: BbsSignature,
}

/// `s = H1(s_1 ‖ … ‖ s_n)`
pub fn ticket_serial<'a>(serials: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
    let input = serials.into_iter().fold(HashInput::new(), |h, s| h.element(s));
    hash_to_scalar(domain::H1, input.as_bytes())
}

impl Ticket {
    pub fn expected_serial(&self) -> Scalar {
        ticket_serial(self.entries.iter().map(|e| &e.tag.serial))
    }
}

impl Encode for TicketTerms {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.tp);
        put_bytes(out, &self.text1);
        put_bytes(out, &self.text2);
    }
}

impl Decode for TicketTerms {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { tp: r.bytes()?, text1: r.bytes()?, text2: r.bytes()? })
    }
}

impl Encode for Tag {
    fn encode(&self, out: &mut Vec<u8>) {
        self.p.encode(out);
        self.q.encode(out);
        self.e1.encode(out);
        self.e2.encode(out);
        self.e3.encode(out);
        self.k.encode(out);
        put_bytes(out, &self.text1);
        put_bytes(out, &self.text2);
        self.serial.encode(out);
        self.signature.encode(out);
    }
}

impl Decode for Tag {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            p: r.get()?,
            q: r.get()?,
            e1: r.get()?,
            e2: r.get()?,
            e3: r.get()?,
            k: r.get()?,
            text1: r.bytes()?,
            text2: r.bytes()?,
            serial: r.get()?,
            signature: r.get()?,
        })
    }
}

impl Message for Tag {
    const KIND: u8 = kind::TAG;
}

impl Encode for TicketEntry {
    fn encode(&self, out: &mut Vec<u8>) {
        self.lookup.encode(out);
        self.tag.encode(out);
    }
}

impl Decode for TicketEntry {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { lookup: r.get()?, tag: r.get()? })
    }
}

impl Encode for Ticket {
    fn encode(&self, out: &mut Vec<u8>) {
        put_list(out, &self.entries);
        self.serial.encode(out);
        self.signature.encode(out);
    }
}

impl Decode for Ticket {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { entries: r.list()?, serial: r.get()?, signature: r.get()? })
    }
}

impl Message for Ticket {
    const KIND: u8 = kind::TICKET;
}

#[cfg(test)]
pub(crate) mod fixture;
