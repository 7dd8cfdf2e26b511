//! A registered population shared by the ticketing unit tests.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{accept_ticket, issue_ticket, request_ticket, TicketTerms, Wallet};
use crate::bbs::{BbsKeyPair, BbsSignature};
use crate::registry::{setup, CentralAuthority, G1KeyPair, PublicParams, VerifierKey};

pub struct World {
    pub pp: PublicParams,
    pub ca: CentralAuthority,
    pub issuer: BbsKeyPair,
    pub user: G1KeyPair,
    pub user_cred: BbsSignature,
    pub cv: G1KeyPair,
    pub verifiers: BTreeMap<String, VerifierKey>,
    pub terms: TicketTerms,
    pub rng: ChaCha20Rng,
}

pub fn world(seed: u64) -> World {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (msk, pp) = setup(128, &mut rng).unwrap();
    let ctx = &pp.ctx;
    let mut ca = CentralAuthority::new(msk, pp.clone());
    let issuer = BbsKeyPair::generate(ctx, true, &mut rng);
    ca.register_issuer(b"I", &issuer.pk_g1.unwrap(), &issuer.pk_g2, &mut rng).unwrap();
    let user = G1KeyPair::generate(ctx, &mut rng);
    let user_cred = ca.register_user(b"alice", &user.pk, &mut rng).unwrap();
    let cv = G1KeyPair::generate(ctx, &mut rng);
    ca.register_central_verifier(b"CV", &cv.pk, &mut rng).unwrap();
    let verifiers = ["V1", "V2", "V3"]
        .into_iter()
        .map(|v| (v.to_string(), ca.register_verifier(v.as_bytes(), &mut rng).unwrap()))
        .collect();
    let terms = TicketTerms::new("2018-09-01", "Paris Nord -> Lille Europe", "v1;valid=1d");
    World { pp, ca, issuer, user, user_cred, cv, verifiers, terms, rng }
}

impl World {
    pub fn cv_id(&self) -> &'static [u8] {
        b"CV"
    }

    pub fn verifier(&self, name: &str) -> &VerifierKey {
        &self.verifiers[name]
    }

    pub fn wallet_of(&mut self, user: &G1KeyPair, cred: &BbsSignature, services: &[&str]) -> Wallet {
        let ids: Vec<Vec<u8>> = services.iter().map(|s| s.as_bytes().to_vec()).collect();
        let (req, pending) =
            request_ticket(&self.pp, user, cred, self.cv_id(), &self.cv.pk, &ids, &mut self.rng).unwrap();
        let delivery =
            issue_ticket(&self.pp, &self.issuer, self.cv_id(), &self.cv.pk, &req, &self.terms, &mut self.rng).unwrap();
        accept_ticket(&self.pp, &self.issuer.pk_g2, &self.cv.pk, user, cred, pending, delivery).unwrap()
    }

    pub fn wallet(&mut self, services: &[&str]) -> Wallet {
        let (user, cred) = (self.user.clone(), self.user_cred);
        self.wallet_of(&user, &cred, services)
    }

    pub fn wallet_for_new_user(&mut self, services: &[&str]) -> Wallet {
        let user = G1KeyPair::generate(&self.pp.ctx, &mut self.rng);
        let id = format!("user-{}", self.ca.records().count());
        let cred = self.ca.register_user(id.as_bytes(), &user.pk, &mut self.rng).unwrap();
        self.wallet_of(&user, &cred, services)
    }
}
