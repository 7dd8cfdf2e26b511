//! One function per protocol operation, reading and writing message files
//! in a [`StateDir`]. The CLI and the scenario runner both call these.

use anyhow::{bail, Context, Result};
use asso_core::bbs::{BbsKeyPair, BbsSignature};
use asso_core::registry::{
    self, verify_key_credential, G1KeyPair, IdentityIndex, RegistrationRequest, RegistrationResponse, Role, VerifierKey,
};
use asso_core::ticketing::{
    self, IssueRequest, PendingRequest, Presentation, ReKey, TicketDelivery, TicketTerms, TraceReport,
    ValidationResult, Wallet,
};
use asso_core::ticketing::{FileLedger, Ticket};
use rand::{CryptoRng, RngCore};

use crate::state::{check_id, LedgerMode, StateDir};

pub fn request_path(user: &str) -> String {
    format!("messages/{user}.request")
}

pub fn delivery_path(user: &str) -> String {
    format!("messages/{user}.delivery")
}

pub fn ticket_path(user: &str) -> String {
    format!("messages/{user}.ticket")
}

pub fn presentation_path(user: &str, verifier: &str) -> String {
    format!("messages/{user}.{verifier}.presentation")
}

pub fn result_path(user: &str, verifier: &str) -> String {
    format!("messages/{user}.{verifier}.result")
}

pub fn trace_path(user: &str) -> String {
    format!("messages/{user}.trace")
}

pub fn rekey_path(from: &str, to: &str, tp: &str) -> String {
    format!("rekeys/{from}.{to}.{tp}.msg")
}

fn check_tp(tp: &str) -> Result<()> {
    if tp.is_empty() || !tp.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b':') {
        bail!("time period {tp:?} should be an ISO-8601 date such as 2018-09-01");
    }
    Ok(())
}

/// CA: generates the master key and public parameters.
pub fn setup<R: RngCore + CryptoRng>(sd: &StateDir, security: u32, rng: &mut R) -> Result<()> {
    if sd.exists("pp.msg") {
        bail!("{} is already initialised", sd.root().display());
    }
    let (msk, pp) = registry::setup(security, rng)?;
    sd.write("pp.msg", &pp)?;
    sd.save_ca(&registry::CentralAuthority::new(msk, pp))
}

/// Entity and CA together: the entity makes its keys and request, the CA
/// answers over the trusted local channel, and the entity checks what it got.
pub fn register<R: RngCore + CryptoRng>(sd: &StateDir, role: Role, id: &str, rng: &mut R) -> Result<()> {
    check_id(id)?;
    let pp = sd.pp()?;
    let ctx = &pp.ctx;
    match role {
        Role::Issuer if sd.issuer().is_ok() => bail!("an issuer is already registered"),
        Role::CentralVerifier if sd.central_verifier().is_ok() => bail!("a central verifier is already registered"),
        _ => {}
    }
    let mut ca = sd.ca()?;
    let ent = |f: &str| sd.entity(id, f);
    let request = match role {
        Role::Issuer => {
            let keys = BbsKeyPair::generate(ctx, true, rng);
            sd.write(&ent("signing-key.msg"), &keys)?;
            RegistrationRequest::issuer(id.as_bytes(), &keys)
        }
        Role::Verifier => RegistrationRequest::verifier(id.as_bytes()),
        Role::User | Role::CentralVerifier => {
            let keys = G1KeyPair::generate(ctx, rng);
            sd.write(&ent("key.msg"), &keys)?;
            if role == Role::User {
                RegistrationRequest::user(id.as_bytes(), &keys.pk)
            } else {
                RegistrationRequest::central_verifier(id.as_bytes(), &keys.pk)
            }
        }
    };
    let response: RegistrationResponse = ca.handle(&request, rng)?;
    sd.save_ca(&ca)?;

    match (role, response.sk_v) {
        (Role::Verifier, Some(sk_v)) => {
            let key = VerifierKey { id: id.as_bytes().to_vec(), credential: response.credential, sk_v };
            key.check(&pp)?;
            sd.write(&ent("verifier-key.msg"), &key)?;
        }
        (Role::Verifier, None) => bail!("CA response for a verifier lacks SK_V"),
        _ => {
            let pk = request.pk_g1.expect("key roles send a G1 key");
            if !verify_key_credential(&pp, &pk, &response.credential) {
                return Err(asso_core::Error::InvalidCredential.into());
            }
        }
    }
    sd.write(&ent("credential.msg"), &response.credential)?;
    sd.write(&format!("public/{id}.msg"), &request)
}

/// User: builds the issuing request for `services`.
pub fn request<R: RngCore + CryptoRng>(sd: &StateDir, user: &str, services: &[String], rng: &mut R) -> Result<()> {
    let pp = sd.pp()?;
    let (cv_id, y_cv) = sd.central_verifier()?;
    let keys: G1KeyPair = sd.read(&sd.entity(user, "key.msg"))?;
    let cred: BbsSignature = sd.read(&sd.entity(user, "credential.msg"))?;
    let ids: Vec<Vec<u8>> = services.iter().map(|s| s.as_bytes().to_vec()).collect();
    let (req, pending) = ticketing::request_ticket(&pp, &keys, &cred, cv_id.as_bytes(), &y_cv, &ids, rng)?;
    sd.write(&sd.entity(user, "pending.msg"), &pending)?;
    sd.write(&request_path(user), &req)
}

/// Issuer: answers the request left for `user`.
pub fn issue<R: RngCore + CryptoRng>(sd: &StateDir, user: &str, terms: &TicketTerms, rng: &mut R) -> Result<()> {
    check_tp(&String::from_utf8_lossy(&terms.tp))?;
    let pp = sd.pp()?;
    let (issuer_id, _) = sd.issuer()?;
    let (cv_id, y_cv) = sd.central_verifier()?;
    let keys: BbsKeyPair = sd.read(&sd.entity(&issuer_id, "signing-key.msg"))?;
    let req: IssueRequest = sd.read(&request_path(user))?;
    let delivery = ticketing::issue_ticket(&pp, &keys, cv_id.as_bytes(), &y_cv, &req, terms, rng)?;
    sd.write(&delivery_path(user), &delivery)
}

/// User: checks the delivered ticket and files it in the wallet.
pub fn accept(sd: &StateDir, user: &str) -> Result<()> {
    let pp = sd.pp()?;
    let (_, issuer_pk) = sd.issuer()?;
    let (_, y_cv) = sd.central_verifier()?;
    let keys: G1KeyPair = sd.read(&sd.entity(user, "key.msg"))?;
    let cred: BbsSignature = sd.read(&sd.entity(user, "credential.msg"))?;
    let pending: PendingRequest = sd.read(&sd.entity(user, "pending.msg"))?;
    let delivery: TicketDelivery = sd.read(&delivery_path(user))?;
    let wallet = ticketing::accept_ticket(&pp, &issuer_pk, &y_cv, &keys, &cred, pending, delivery)?;
    sd.write(&sd.entity(user, "wallet.msg"), &wallet)?;
    sd.write(&ticket_path(user), &wallet.ticket)
}

/// User: presents the tag for `verifier`, optionally checking the
/// verifier's credential first.
pub fn present<R: RngCore + CryptoRng>(
    sd: &StateDir,
    user: &str,
    verifier: &str,
    check_verifier: bool,
    rng: &mut R,
) -> Result<()> {
    check_id(verifier)?;
    let pp = sd.pp()?;
    let (_, y_cv) = sd.central_verifier()?;
    let wallet: Wallet = sd.read(&sd.entity(user, "wallet.msg"))?;
    let cred: Option<BbsSignature> =
        if check_verifier { Some(sd.read(&sd.entity(verifier, "credential.msg"))?) } else { None };
    let pres = ticketing::present_tag(&pp, &wallet, verifier.as_bytes(), &y_cv, cred.as_ref(), rng)?;
    sd.write(&presentation_path(user, verifier), &pres)
}

fn open_ledger(sd: &StateDir, verifier: &str, mode: LedgerMode) -> Result<FileLedger> {
    let path = sd.ledger_path(verifier, mode);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(FileLedger::open(path)?)
}

fn record_result(sd: &StateDir, user: &str, verifier: &str, outcome: asso_core::Result<()>) -> Result<()> {
    if let Some(result) = ValidationResult::from_outcome(&outcome) {
        sd.write(&result_path(user, verifier), &result)?;
    }
    Ok(outcome?)
}

/// Verifier: validates the presentation `user` left for it.
pub fn validate(sd: &StateDir, verifier: &str, user: &str, mode: LedgerMode) -> Result<()> {
    let pp = sd.pp()?;
    let (_, issuer_pk) = sd.issuer()?;
    let (_, y_cv) = sd.central_verifier()?;
    let key: VerifierKey = sd.read(&sd.entity(verifier, "verifier-key.msg"))?;
    let pres: Presentation = sd.read(&presentation_path(user, verifier))?;
    let ledger = open_ledger(sd, verifier, mode)?;
    let outcome = ticketing::validate_tag(&pp, &key, &issuer_pk, &y_cv, &ledger, &pres);
    record_result(sd, user, verifier, outcome)
}

/// CA: issues the re-key letting `to` stand in for `from` during `tp`.
pub fn rekey<R: RngCore + CryptoRng>(
    sd: &StateDir,
    from: &str,
    to: &str,
    tp: &str,
    text1: &str,
    rng: &mut R,
) -> Result<()> {
    check_id(from)?;
    check_id(to)?;
    check_tp(tp)?;
    let ca = sd.ca()?;
    let rk = ticketing::generate_rekey(&ca, from.as_bytes(), to.as_bytes(), tp.as_bytes(), text1.as_bytes(), rng)?;
    sd.write(&rekey_path(from, to, tp), &rk)?;
    sd.write(&format!("announcements/{from}.{to}.{tp}.msg"), &rk.announcement())
}

/// Proxy verifier: validates a presentation meant for `from` using the
/// re-key `from → rekey_to` (normally the proxy itself).
pub fn proxy_validate(
    sd: &StateDir,
    proxy: &str,
    from: &str,
    rekey_to: &str,
    tp: &str,
    user: &str,
    mode: LedgerMode,
) -> Result<()> {
    let pp = sd.pp()?;
    let (_, issuer_pk) = sd.issuer()?;
    let (_, y_cv) = sd.central_verifier()?;
    let key: VerifierKey = sd.read(&sd.entity(proxy, "verifier-key.msg"))?;
    let rk: ReKey =
        sd.read(&rekey_path(from, rekey_to, tp)).with_context(|| format!("no re-key {from} -> {rekey_to} for {tp}"))?;
    let pres: Presentation = sd.read(&presentation_path(user, from))?;
    let ledger = open_ledger(sd, proxy, mode)?;
    let outcome = ticketing::proxy_validate_tag(&pp, &key, &rk, &issuer_pk, &y_cv, &ledger, &pres);
    record_result(sd, user, proxy, outcome)
}

/// Central verifier: opens the ticket `user` handed over.
pub fn trace(sd: &StateDir, user: &str) -> Result<TraceReport> {
    let pp = sd.pp()?;
    let (cv_id, _) = sd.central_verifier()?;
    let (_, issuer_pk) = sd.issuer()?;
    let keys: G1KeyPair = sd.read(&sd.entity(&cv_id, "key.msg"))?;
    let index: IdentityIndex = sd.read("ca/index.msg")?;
    let ticket: Ticket = sd.read(&ticket_path(user))?;
    let report = ticketing::trace_ticket(&pp, &keys, &issuer_pk, &index, &ticket)?;
    sd.write(&trace_path(user), &report)?;
    Ok(report)
}
