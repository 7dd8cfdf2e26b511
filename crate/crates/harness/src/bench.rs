//! Timings for every protocol phase, laid out like the paper's benchmark
//! table, plus issuing cost as a function of ticket size.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use asso_core::bbs::BbsKeyPair;
use asso_core::group::CURVE_ID;
use asso_core::registry::{setup, verify_key_credential, CentralAuthority, G1KeyPair, PublicParams};
use asso_core::ticketing::{
    accept_ticket, generate_rekey, issue_ticket, present_tag, proxy_validate_tag, request_ticket, trace_ticket,
    validate_tag, MemoryLedger, TicketTerms, Wallet,
};
use asso_core::zkp::verify_ownership;
use rand::{CryptoRng, RngCore};

const SETUP: &str = "Set-up - Central Authority (CA)";
const REG_ISSUER: &str = "Registration - Issuer (I)";
const REG_USER: &str = "Registration - User (U)";
const REG_VERIFIERS: &str = "Registration - Verifiers (V)";
const REG_CV: &str = "Registration - Central Verifier (CV)";
const ISSUING: &str = "Ticket Issuing (4 services + CV = 5 tags)";
const VALIDATION: &str = "Ticket Validation - Verifier (V)";
const PROXY: &str = "Proxy Verification - Proxy Verifier (V')";
const TRACE: &str = "Ticket Trace (5 tags) - Central Verifier (CV)";

/// `(section, phase, entity)` for each row of the paper's benchmark table,
/// in its order.
pub const TABLE_ROWS: [(&str, &str, &str); 18] = [
    (SETUP, "initialise the system", "CA"),
    (REG_ISSUER, "generate credentials", "CA"),
    (REG_ISSUER, "verify credentials", "Issuer"),
    (REG_USER, "generate credentials", "CA"),
    (REG_USER, "verify credentials", "User"),
    (REG_VERIFIERS, "generate credentials", "CA"),
    (REG_VERIFIERS, "verify credentials", "Verifier"),
    (REG_CV, "generate credentials", "CA"),
    (REG_CV, "verify credentials", "Central Verifier"),
    (ISSUING, "generate ticket request", "User"),
    (ISSUING, "generate ticket", "Issuer"),
    (ISSUING, "verify ticket", "User"),
    (VALIDATION, "send tag & proof", "User"),
    (VALIDATION, "verify proof & tag", "Verifier"),
    (PROXY, "generate re-key", "CA"),
    (PROXY, "verify proof & tag", "Proxy Validation"),
    (TRACE, "Send ticket & proof", "User"),
    (TRACE, "verify proof & trace ticket", "Central Verifier"),
];

/// Ticket sizes for the issuing scaling series.
pub const SCALING_SIZES: [usize; 4] = [1, 2, 4, 8];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub section: &'static str,
    pub phase: &'static str,
    pub entity: &'static str,
    pub mean_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub tags: usize,
    pub mean_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`.
pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept, r_squared }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub curve: &'static str,
    pub order_bits: u32,
    pub security: u32,
    pub iterations: usize,
    pub rows: Vec<BenchRow>,
    /// Whole issuing exchange (request, ticket, verification) per ticket size.
    pub issuing_scaling: Vec<ScalingPoint>,
}

impl BenchReport {
    pub fn row(&self, section: &str, phase: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.section == section && r.phase == phase)
    }

    pub fn issuing_fit(&self) -> LinearFit {
        let pts: Vec<_> = self.issuing_scaling.iter().map(|p| (p.tags as f64, p.mean_ms)).collect();
        linear_fit(&pts)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Benchmark results (ms, mean of {} iterations, {} r={} bits)",
            self.iterations, self.curve, self.order_bits
        );
        let mut section = "";
        for r in &self.rows {
            if r.section != section {
                section = r.section;
                let _ = writeln!(out, "-- {section}");
            }
            let _ = writeln!(out, "   {:<30} {:<18} {:>10.3}", r.phase, r.entity, r.mean_ms);
        }
        let _ = writeln!(out, "-- Issuing cost by ticket size");
        for p in &self.issuing_scaling {
            let _ = writeln!(out, "   {:<30} {:<18} {:>10.3}", format!("{} tags", p.tags), "User + Issuer", p.mean_ms);
        }
        let fit = self.issuing_fit();
        let _ =
            write!(out, "   linear fit: {:.3} ms/tag + {:.3} ms, R^2 = {:.4}", fit.slope, fit.intercept, fit.r_squared);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,phase,entity,mean_ms,iterations,curve\n");
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{},{}",
                quote(r.section),
                quote(r.phase),
                quote(r.entity),
                r.mean_ms,
                self.iterations,
                self.curve
            );
        }
        for p in &self.issuing_scaling {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{},{}",
                quote("Issuing scaling"),
                quote(&format!("{} tags", p.tags)),
                quote("User + Issuer"),
                p.mean_ms,
                self.iterations,
                self.curve
            );
        }
        out
    }
}

struct Timer {
    sums: Vec<f64>,
}

impl Timer {
    fn time<T>(&mut self, row: usize, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.sums[row] += start.elapsed().as_secs_f64() * 1e3;
        out
    }
}

const SERVICES: [&str; 4] = ["V1", "V2", "V3", "V4"];
const CV: &str = "CV";

fn terms() -> TicketTerms {
    TicketTerms::new("2018-09-01", "2018-09-01 Paris Nord -> Lille Europe", "v1")
}

/// Runs every phase `iterations` times with fresh keys and reports mean
/// wall-clock times. `security` selects the curve as in [`setup`].
pub fn run_benchmarks<R: RngCore + CryptoRng>(security: u32, iterations: usize, rng: &mut R) -> Result<BenchReport> {
    anyhow::ensure!(iterations >= 1, "at least one iteration is required");
    let mut t = Timer { sums: vec![0.0; TABLE_ROWS.len()] };
    let mut order_bits = 0;
    for _ in 0..iterations {
        let (msk, pp) = t.time(0, || setup(security, rng))?;
        order_bits = pp.ctx.order_bits();
        let ctx = &pp.ctx;
        let mut ca = CentralAuthority::new(msk, pp.clone());

        let issuer = BbsKeyPair::generate(ctx, true, rng);
        let cred = t.time(1, || ca.register_issuer(b"I", &issuer.pk_g1.expect("G1 key"), &issuer.pk_g2, rng))?;
        anyhow::ensure!(t.time(2, || verify_key_credential(&pp, &issuer.pk_g1.expect("G1 key"), &cred)));

        let user = G1KeyPair::generate(ctx, rng);
        let user_cred = t.time(3, || ca.register_user(b"U", &user.pk, rng))?;
        anyhow::ensure!(t.time(4, || verify_key_credential(&pp, &user.pk, &user_cred)));

        let mut verifiers = Vec::new();
        for v in SERVICES {
            let key = t.time(5, || ca.register_verifier(v.as_bytes(), rng))?;
            t.time(6, || key.check(&pp))?;
            verifiers.push(key);
        }

        let cv = G1KeyPair::generate(ctx, rng);
        let cv_cred = t.time(7, || ca.register_central_verifier(CV.as_bytes(), &cv.pk, rng))?;
        anyhow::ensure!(t.time(8, || verify_key_credential(&pp, &cv.pk, &cv_cred)));

        let ids: Vec<Vec<u8>> = SERVICES.iter().chain([&CV]).map(|s| s.as_bytes().to_vec()).collect();
        let terms = terms();
        let (req, pending) = t.time(9, || request_ticket(&pp, &user, &user_cred, CV.as_bytes(), &cv.pk, &ids, rng))?;
        let delivery = t.time(10, || issue_ticket(&pp, &issuer, CV.as_bytes(), &cv.pk, &req, &terms, rng))?;
        let wallet = t.time(11, || accept_ticket(&pp, &issuer.pk_g2, &cv.pk, &user, &user_cred, pending, delivery))?;

        let pres = t.time(12, || present_tag(&pp, &wallet, b"V1", &cv.pk, None, rng))?;
        let ledger = MemoryLedger::new();
        t.time(13, || validate_tag(&pp, &verifiers[0], &issuer.pk_g2, &cv.pk, &ledger, &pres))?;

        let rk = t.time(14, || generate_rekey(&ca, b"V2", b"V3", &terms.tp, &terms.text1, rng))?;
        let pres = present_tag(&pp, &wallet, b"V2", &cv.pk, None, rng)?;
        t.time(15, || proxy_validate_tag(&pp, &verifiers[2], &rk, &issuer.pk_g2, &cv.pk, &ledger, &pres))?;

        let (ticket, proof) = t.time(16, || {
            present_tag(&pp, &wallet, CV.as_bytes(), &cv.pk, None, rng).map(|p| (wallet.ticket.clone(), p.proof))
        })?;
        let report = t.time(17, || -> Result<_> {
            verify_ownership(ctx, &cv.pk, &proof)?;
            anyhow::ensure!(ticket.entries.iter().any(|e| e.tag.p == proof.p), "proof is for another ticket");
            Ok(trace_ticket(&pp, &cv, &issuer.pk_g2, ca.index(), &ticket)?)
        })?;
        anyhow::ensure!(report.user_pk == user.pk && report.services == ids, "trace mismatch");
    }

    let n = iterations as f64;
    let rows = TABLE_ROWS
        .iter()
        .zip(&t.sums)
        .map(|(&(section, phase, entity), sum)| BenchRow { section, phase, entity, mean_ms: sum / n })
        .collect();
    let issuing_scaling = issuing_series(security, iterations, rng)?;
    Ok(BenchReport { curve: CURVE_ID, order_bits, security, iterations, rows, issuing_scaling })
}

fn issuing_series<R: RngCore + CryptoRng>(security: u32, iterations: usize, rng: &mut R) -> Result<Vec<ScalingPoint>> {
    let (msk, pp) = setup(security, rng)?;
    let mut ca = CentralAuthority::new(msk, pp.clone());
    let issuer = BbsKeyPair::generate(&pp.ctx, true, rng);
    ca.register_issuer(b"I", &issuer.pk_g1.expect("G1 key"), &issuer.pk_g2, rng)?;
    let user = G1KeyPair::generate(&pp.ctx, rng);
    let cred = ca.register_user(b"U", &user.pk, rng)?;
    let cv = G1KeyPair::generate(&pp.ctx, rng);
    ca.register_central_verifier(CV.as_bytes(), &cv.pk, rng)?;
    let terms = terms();

    let mut out = Vec::new();
    for &tags in &SCALING_SIZES {
        let mut ids: Vec<Vec<u8>> = (1..tags).map(|i| format!("S{i}").into_bytes()).collect();
        ids.push(CV.as_bytes().to_vec());
        let mut sum = 0.0;
        for _ in 0..iterations {
            let start = Instant::now();
            issue_once(&pp, &issuer, &user, &cred, &cv, &ids, &terms, rng)?;
            sum += start.elapsed().as_secs_f64() * 1e3;
        }
        out.push(ScalingPoint { tags, mean_ms: sum / iterations as f64 });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn issue_once<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    issuer: &BbsKeyPair,
    user: &G1KeyPair,
    cred: &asso_core::bbs::BbsSignature,
    cv: &G1KeyPair,
    ids: &[Vec<u8>],
    terms: &TicketTerms,
    rng: &mut R,
) -> Result<Wallet> {
    let (req, pending) = request_ticket(pp, user, cred, CV.as_bytes(), &cv.pk, ids, rng)?;
    let delivery = issue_ticket(pp, issuer, CV.as_bytes(), &cv.pk, &req, terms, rng)?;
    Ok(accept_ticket(pp, &issuer.pk_g2, &cv.pk, user, cred, pending, delivery)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_exact_line() {
        let f = linear_fit(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0), (8.0, 17.0)]);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_of_noise_is_poor() {
        let f = linear_fit(&[(1.0, 5.0), (2.0, 1.0), (4.0, 5.0), (8.0, 1.0)]);
        assert!(f.r_squared < 0.5);
    }
}
