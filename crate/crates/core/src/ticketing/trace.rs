use super::Ticket;
use crate::bbs::verify_serial;
use crate::codec::{kind, put_list, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, Result, TraceFailure};
use crate::group::{G1, G2};
use crate::registry::{G1KeyPair, IdentityIndex, PublicParams};

/// What the central verifier learns from a ticket: the holder's public key
/// and the services, in ticket order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceReport {
    pub user_pk: G1,
    pub services: Vec<Vec<u8>>,
}

/// Opens every tag with `x_cv`: `Y_U = P_V / Q_V^{x_cv}` and
/// `g̃^{H1(ID_V)} = K_V / E2^{x_cv}`, then maps the latter back to `ID_V`.
pub fn trace_ticket(
    pp: &PublicParams,
    cv: &G1KeyPair,
    issuer_pk: &G2,
    index: &IdentityIndex,
    ticket: &Ticket,
) -> Result<TraceReport> {
    let ctx = &pp.ctx;
    let fail = Error::TraceFailure;
    let x_cv = cv.secret();
    let mut user_pk = None;
    let mut services = Vec::with_capacity(ticket.entries.len());
    for (i, entry) in ticket.entries.iter().enumerate() {
        let tag = &entry.tag;
        if tag.serial != tag.expected_serial() {
            return Err(fail(TraceFailure::TagSerial(i)));
        }
        if !verify_serial(ctx, issuer_pk, tag.serial, &tag.signature) {
            return Err(fail(TraceFailure::TagSignature(i)));
        }
        let y_u = tag.p - tag.q * x_cv;
        if *user_pk.get_or_insert(y_u) != y_u {
            return Err(fail(TraceFailure::UserKeyMismatch(i)));
        }
        let element = tag.k - tag.e2 * x_cv;
        let id = index.lookup(&element).ok_or(Error::UnknownVerifierElement(i))?;
        services.push(id.to_vec());
    }
    let user_pk = user_pk.ok_or(fail(TraceFailure::Empty))?;
    if ticket.serial != ticket.expected_serial() {
        return Err(fail(TraceFailure::TicketSerial));
    }
    if !verify_serial(ctx, issuer_pk, ticket.serial, &ticket.signature) {
        return Err(fail(TraceFailure::TicketSignature));
    }
    Ok(TraceReport { user_pk, services })
}

impl Encode for TraceReport {
    fn encode(&self, out: &mut Vec<u8>) {
        self.user_pk.encode(out);
        put_list(out, &self.services);
    }
}

impl Decode for TraceReport {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { user_pk: r.get()?, services: r.list()? })
    }
}

impl Message for TraceReport {
    const KIND: u8 = kind::TRACE_REPORT;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Scalar;
    use crate::ticketing::fixture::world;
    use ark_ff::One;

    #[test]
    fn trace_recovers_user_and_services() {
        let mut w = world(400);
        let wallet = w.wallet(&["V2", "CV", "V1"]);
        let report = trace_ticket(&w.pp, &w.cv, &w.issuer.pk_g2, w.ca.index(), &wallet.ticket).unwrap();
        assert_eq!(report.user_pk, w.user.pk);
        assert_eq!(report.services, vec![b"V2".to_vec(), b"CV".to_vec(), b"V1".to_vec()]);
        assert_eq!(TraceReport::from_message(&report.to_message()).unwrap(), report);
    }

    #[test]
    fn trace_rejects_inconsistent_tickets() {
        let mut w = world(401);
        let wallet = w.wallet(&["V1", "V2", "CV"]);
        let other = w.wallet_for_new_user(&["V1", "V2", "CV"]);
        let (pp, cv, ipk, index) = (&w.pp, &w.cv, &w.issuer.pk_g2, w.ca.index());
        let g = pp.ctx.g_tilde;

        let mut t = wallet.ticket.clone();
        t.entries[1] = other.ticket.entries[1].clone();
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::UserKeyMismatch(1))));

        let mut t = wallet.ticket.clone();
        t.entries[0].tag.k += g;
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::TagSerial(0))));

        let mut t = wallet.ticket.clone();
        t.entries[2].tag.signature.d += Scalar::one();
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::TagSignature(2))));

        let mut t = wallet.ticket.clone();
        t.entries.pop();
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::TicketSerial)));

        let mut t = wallet.ticket.clone();
        t.signature.sigma += g;
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::TicketSignature)));

        let mut t = wallet.ticket.clone();
        t.entries.clear();
        assert_eq!(trace_ticket(pp, cv, ipk, index, &t), Err(Error::TraceFailure(TraceFailure::Empty)));

        // a different central verifier key cannot open the tags
        let stranger = G1KeyPair::generate(&pp.ctx, &mut w.rng);
        assert!(trace_ticket(pp, &stranger, ipk, index, &wallet.ticket).is_err());
    }
}
