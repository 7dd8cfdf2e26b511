//! Scripted multi-party runs.
//!
//! A script is a TOML list of `[[step]]` tables, each naming an operation
//! and the outcome it must have (`accept`, or `reject:<reason>` with the
//! reason names of [`asso_core::Error::reason`]). Steps run in order
//! against one [`StateDir`]; an optional `tamper` alters the message in
//! flight so that reject paths can be exercised.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use asso_core::codec::Message;
use asso_core::group::Scalar;
use asso_core::registry::{G1KeyPair, Role};
use asso_core::ticketing::{IssueRequest, Presentation, ReKey, Rejection, Ticket, TicketDelivery, TicketTerms, Wallet};
use rand::{CryptoRng, RngCore};
use serde::Deserialize;

use crate::ops;
use crate::state::{LedgerMode, StateDir};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    pub name: String,
    #[serde(rename = "step")]
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub action: Action,
    #[serde(default = "accept")]
    pub expect: String,
}

fn accept() -> String {
    "accept".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoleName {
    Issuer,
    Verifier,
    User,
    CentralVerifier,
}

impl From<RoleName> for Role {
    fn from(r: RoleName) -> Self {
        match r {
            RoleName::Issuer => Role::Issuer,
            RoleName::Verifier => Role::Verifier,
            RoleName::User => Role::User,
            RoleName::CentralVerifier => Role::CentralVerifier,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Setup {
        #[serde(default = "default_security")]
        security: u32,
    },
    Register {
        role: RoleName,
        id: String,
    },
    /// Request, issue and accept in one step.
    Issue {
        user: String,
        services: Vec<String>,
        tp: String,
        text1: Option<String>,
        #[serde(default)]
        text2: String,
        tamper: Option<String>,
    },
    /// Present the tag for `present_for` (default: `verifier`) to `verifier`.
    Validate {
        verifier: String,
        user: String,
        present_for: Option<String>,
        #[serde(default)]
        ledger: LedgerMode,
        #[serde(default)]
        check_verifier: bool,
        tamper: Option<String>,
    },
    /// The CA re-keys `from`'s tags to `to` for one period.
    Disrupt {
        from: String,
        to: String,
        tp: String,
        text1: Option<String>,
    },
    /// Present `from`'s tag (or `present_for`'s, passed off as `from`'s) to
    /// `proxy`, which uses the `from → rekey_to` re-key (default: itself).
    ProxyValidate {
        proxy: String,
        from: String,
        user: String,
        tp: String,
        rekey_to: Option<String>,
        present_for: Option<String>,
        #[serde(default)]
        ledger: LedgerMode,
        tamper: Option<String>,
    },
    /// The central verifier traces `user`'s ticket; accepted only if the
    /// report names the user's key and exactly the issued services.
    Trace {
        user: String,
        tamper: Option<String>,
    },
}

fn default_security() -> u32 {
    256
}

impl Action {
    fn label(&self) -> String {
        match self {
            Action::Setup { security } => format!("setup ({security})"),
            Action::Register { role, id } => format!("register {role:?} {id}"),
            Action::Issue { user, services, .. } => format!("issue {user} [{}]", services.join(",")),
            Action::Validate { verifier, user, present_for, .. } => match present_for {
                Some(p) => format!("validate {user}'s {p} tag at {verifier}"),
                None => format!("validate {user} at {verifier}"),
            },
            Action::Disrupt { from, to, tp, .. } => format!("disrupt {from} -> {to} ({tp})"),
            Action::ProxyValidate { proxy, from, user, present_for, .. } => match present_for {
                Some(p) => format!("proxy-validate {user}'s {p} tag as {from}'s at {proxy}"),
                None => format!("proxy-validate {user}'s {from} tag at {proxy}"),
            },
            Action::Trace { user, .. } => format!("trace {user}"),
        }
    }

    fn tamper(&self) -> Option<&str> {
        match self {
            Action::Issue { tamper, .. }
            | Action::Validate { tamper, .. }
            | Action::ProxyValidate { tamper, .. }
            | Action::Trace { tamper, .. } => tamper.as_deref(),
            _ => None,
        }
    }
}

/// Tamper names understood per operation.
pub const TAMPERS: &[(&str, &[&str])] = &[
    ("issue", &["request.proof", "request.extra-service", "delivery.tag-signature", "delivery.lookup"]),
    ("validate", &["tag.serial", "tag.text1", "tag.signature", "proof.response"]),
    ("proxy_validate", &["tag.serial", "tag.signature", "proof.response", "rekey.tp", "rekey.rk2"]),
    ("trace", &["ticket.signature", "ticket.tag-serial"]),
];

/// Every way the ticketing layer can refuse, by reason name. The checked-in
/// scenarios must reach each of them.
pub fn ticketing_reject_reasons() -> Vec<&'static str> {
    let mut v: Vec<&str> = Rejection::ALL.iter().map(|r| r.name()).collect();
    v.extend([
        "issuing-proof-rejected",
        "service-set-mismatch",
        "missing-central-verifier",
        "empty-service-set",
        "duplicate-service",
        "ticket-rejected",
        "tag-not-found",
        "trace-failed",
        "unknown-verifier-element",
        "unknown-verifier",
        "self-proxy",
    ]);
    v
}

impl ScenarioScript {
    pub fn from_toml(text: &str) -> Result<Self> {
        let script: Self = toml::from_str(text).context("parsing scenario")?;
        script.check()?;
        Ok(script)
    }

    /// Static checks: setup comes first, entities are registered before
    /// they act, tamper names exist and expectations are well formed.
    pub fn check(&self) -> Result<()> {
        let mut known: HashSet<&str> = HashSet::new();
        let mut set_up = false;
        for (i, step) in self.steps.iter().enumerate() {
            let at = |msg: String| anyhow!("step {}: {msg}", i + 1);
            let need = |id: &str| {
                if known.contains(id) {
                    Ok(())
                } else {
                    Err(at(format!("{id} is used before it is registered")))
                }
            };
            if !set_up && !matches!(step.action, Action::Setup { .. }) {
                return Err(at("the first step must be setup".into()));
            }
            match &step.action {
                Action::Setup { .. } => set_up = true,
                Action::Register { id, .. } => {
                    known.insert(id);
                }
                Action::Issue { user, .. } | Action::Trace { user, .. } => need(user)?,
                Action::Validate { verifier, user, present_for, .. } => {
                    need(verifier)?;
                    need(user)?;
                    if let Some(p) = present_for {
                        need(p)?;
                    }
                }
                Action::Disrupt { from, to, .. } => {
                    need(from)?;
                    need(to)?;
                }
                Action::ProxyValidate { proxy, from, user, rekey_to, present_for, .. } => {
                    need(proxy)?;
                    need(from)?;
                    need(user)?;
                    for t in rekey_to.iter().chain(present_for) {
                        need(t)?;
                    }
                }
            }
            if let Some(t) = step.action.tamper() {
                let op = match step.action {
                    Action::Issue { .. } => "issue",
                    Action::Validate { .. } => "validate",
                    Action::ProxyValidate { .. } => "proxy_validate",
                    _ => "trace",
                };
                let allowed = TAMPERS.iter().find(|(o, _)| *o == op).map(|(_, t)| *t).unwrap_or(&[]);
                if !allowed.contains(&t) {
                    return Err(at(format!("unknown tamper {t:?} for {op}")));
                }
            }
            if step.expect != "accept" && !step.expect.starts_with("reject:") {
                return Err(at(format!("expectation {:?} is neither accept nor reject:<reason>", step.expect)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub index: usize,
    pub label: String,
    pub expected: String,
    pub actual: String,
}

impl StepOutcome {
    pub fn ok(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub name: String,
    pub steps: Vec<StepOutcome>,
    /// Every message written during the run, in order.
    pub transcript: Vec<u8>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(StepOutcome::ok)
    }

    pub fn reasons_seen(&self) -> BTreeSet<String> {
        self.steps.iter().filter_map(|s| s.actual.strip_prefix("reject:").map(str::to_string)).collect()
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.name)?;
        for s in &self.steps {
            let mark = if s.ok() { "ok  " } else { "FAIL" };
            write!(f, "{mark} {:>3}. {:<48} {}", s.index, s.label, s.actual)?;
            if !s.ok() {
                write!(f, " (expected {})", s.expected)?;
            }
            writeln!(f)?;
        }
        let failed = self.steps.iter().filter(|s| !s.ok()).count();
        write!(f, "{} steps, {failed} failed", self.steps.len())
    }
}

/// Maps an operation result to `accept` or `reject:<reason>`; anything
/// that is not a protocol rejection aborts the run.
fn classify(result: Result<()>) -> Result<String> {
    match result {
        Ok(()) => Ok("accept".into()),
        Err(e) => match e.downcast_ref::<asso_core::Error>() {
            Some(core) if core.is_rejection() => Ok(format!("reject:{}", core.reason())),
            _ => Err(e),
        },
    }
}

fn rewrite<T: Message>(sd: &StateDir, rel: &str, f: impl FnOnce(&mut T)) -> Result<()> {
    let mut value: T = sd.read(rel)?;
    f(&mut value);
    sd.write(rel, &value)
}

fn tamper_presentation(sd: &StateDir, rel: &str, name: &str) -> Result<()> {
    let one = Scalar::from(1u8);
    rewrite::<Presentation>(sd, rel, |p| match name {
        "tag.serial" => p.tag.serial += one,
        "tag.text1" => p.tag.text1.extend_from_slice(b" (first class)"),
        "tag.signature" => p.tag.signature.e += one,
        "proof.response" => p.proof.x_response += one,
        _ => {}
    })
}

pub fn run_scenario<R: RngCore + CryptoRng>(
    script: &ScenarioScript,
    sd: &StateDir,
    rng: &mut R,
) -> Result<ScenarioReport> {
    script.check()?;
    let mut steps = Vec::with_capacity(script.steps.len());
    for (i, step) in script.steps.iter().enumerate() {
        let actual =
            run_step(&step.action, sd, rng).with_context(|| format!("step {}: {}", i + 1, step.action.label()))?;
        steps.push(StepOutcome { index: i + 1, label: step.action.label(), expected: step.expect.clone(), actual });
    }
    Ok(ScenarioReport { name: script.name.clone(), steps, transcript: sd.transcript() })
}

fn run_step<R: RngCore + CryptoRng>(action: &Action, sd: &StateDir, rng: &mut R) -> Result<String> {
    let one = Scalar::from(1u8);
    match action {
        Action::Setup { security } => classify(ops::setup(sd, *security, rng)),
        Action::Register { role, id } => classify(ops::register(sd, (*role).into(), id, rng)),
        Action::Issue { user, services, tp, text1, text2, tamper } => {
            let text1 = text1.clone().unwrap_or_else(|| tp.clone());
            let terms = TicketTerms::new(tp.as_str(), text1, text2.as_str());
            let tamper = tamper.as_deref();
            classify((|| {
                ops::request(sd, user, services, rng)?;
                match tamper {
                    Some("request.proof") => {
                        rewrite::<IssueRequest>(sd, &ops::request_path(user), |r| r.proof.x_response += one)?
                    }
                    Some("request.extra-service") => rewrite::<IssueRequest>(sd, &ops::request_path(user), |r| {
                        r.service_ids.push(b"unrequested".to_vec())
                    })?,
                    _ => {}
                }
                ops::issue(sd, user, &terms, rng)?;
                match tamper {
                    Some("delivery.tag-signature") => rewrite::<TicketDelivery>(sd, &ops::delivery_path(user), |d| {
                        d.ticket.entries[0].tag.signature.d += one
                    })?,
                    Some("delivery.lookup") => rewrite::<TicketDelivery>(sd, &ops::delivery_path(user), |d| {
                        d.ticket.entries[0].lookup[0] ^= 1
                    })?,
                    _ => {}
                }
                ops::accept(sd, user)
            })())
        }
        Action::Validate { verifier, user, present_for, ledger, check_verifier, tamper } => {
            let target = present_for.as_deref().unwrap_or(verifier);
            classify((|| {
                ops::present(sd, user, target, *check_verifier, rng)?;
                let rel = ops::presentation_path(user, target);
                if target != verifier {
                    // the user hands the tag meant for `target` to `verifier`
                    let bytes = sd.read_raw(&rel)?;
                    sd.write_raw(&ops::presentation_path(user, verifier), &bytes)?;
                }
                if let Some(t) = tamper {
                    tamper_presentation(sd, &ops::presentation_path(user, verifier), t)?;
                }
                ops::validate(sd, verifier, user, *ledger)
            })())
        }
        Action::Disrupt { from, to, tp, text1 } => {
            let text1 = text1.clone().unwrap_or_else(|| tp.clone());
            classify(ops::rekey(sd, from, to, tp, &text1, rng))
        }
        Action::ProxyValidate { proxy, from, user, tp, rekey_to, present_for, ledger, tamper } => {
            let rekey_to = rekey_to.as_deref().unwrap_or(proxy);
            let rk_rel = ops::rekey_path(from, rekey_to, tp);
            let tamper = tamper.as_deref();
            let mut original = None;
            let outcome = classify((|| {
                let target = present_for.as_deref().unwrap_or(from);
                ops::present(sd, user, target, false, rng)?;
                if target != from {
                    let bytes = sd.read_raw(&ops::presentation_path(user, target))?;
                    sd.write_raw(&ops::presentation_path(user, from), &bytes)?;
                }
                match tamper {
                    Some(t @ ("rekey.tp" | "rekey.rk2")) => {
                        original = Some(sd.read_raw(&rk_rel)?);
                        let g2 = sd.pp()?.ctx.g_frak;
                        rewrite::<ReKey>(sd, &rk_rel, |rk| {
                            if t == "rekey.tp" {
                                rk.tp = b"2018-09-02".to_vec();
                            } else {
                                rk.rk2 += g2;
                            }
                        })?;
                    }
                    Some(t) => tamper_presentation(sd, &ops::presentation_path(user, from), t)?,
                    None => {}
                }
                ops::proxy_validate(sd, proxy, from, rekey_to, tp, user, *ledger)
            })());
            if let Some(bytes) = original {
                sd.write_raw(&rk_rel, &bytes)?;
            }
            outcome
        }
        Action::Trace { user, tamper } => {
            let rel = ops::ticket_path(user);
            let original = sd.read_raw(&rel)?;
            match tamper.as_deref() {
                Some("ticket.signature") => rewrite::<Ticket>(sd, &rel, |t| t.signature.e += one)?,
                Some("ticket.tag-serial") => rewrite::<Ticket>(sd, &rel, |t| t.entries[0].tag.serial += one)?,
                _ => {}
            }
            let traced = ops::trace(sd, user);
            if tamper.is_some() {
                sd.write_raw(&rel, &original)?;
            }
            let report = match traced {
                Ok(report) => report,
                Err(e) => return classify(Err(e)),
            };
            let keys: G1KeyPair = sd.read(&sd.entity(user, "key.msg"))?;
            let wallet: Wallet = sd.read(&sd.entity(user, "wallet.msg"))?;
            if report.user_pk != keys.pk || report.services != wallet.service_ids {
                bail!("trace named the wrong user or services");
            }
            Ok("accept".into())
        }
    }
}
