//! System setup and registration with the central authority (CA).
//!
//! The CA holds the master secret `(α, β)`. It certifies issuer, user and
//! central-verifier public keys with BBS+ credentials under `α`, and gives
//! each ticket verifier a credential on `g̃^{H1(ID_V)}` plus the identity-based
//! secret key `SK_V = H2(ID_V)^β`.
//!
//! Registration messages carry only identities and public keys; no entity
//! secret ever reaches the CA.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{CryptoRng, RngCore};

use crate::bbs::{self, BbsKeyPair, BbsSignature};
use crate::codec::{kind, put_bytes, put_list, put_option, Decode, Encode, Message, Reader};
use crate::error::{DecodeError, Error, Result};
use crate::group::{
    domain, hash_identity, identity_point, pairing_product_is_identity, random_scalar, GroupContext, Scalar, CURVE_ID,
    G1, G2,
};

/// Security parameters `setup` accepts. Both select BLS12-381: 128 is the
/// security level, 256 the width of the group order's encoding.
pub const SUPPORTED_SECURITY_PARAMS: [u32; 2] = [128, 256];

#[derive(Clone, PartialEq, Eq)]
pub struct MasterSecretKey {
    pub(crate) alpha: Scalar,
    pub(crate) beta: Scalar,
}

impl std::fmt::Debug for MasterSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MasterSecretKey(..)")
    }
}

impl MasterSecretKey {
    /// The credential-signing exponent α.
    pub fn alpha(&self) -> Scalar {
        self.alpha
    }

    /// The identity-key exponent β.
    pub fn beta(&self) -> Scalar {
        self.beta
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    pub ctx: GroupContext,
    /// `Y_A = 𝔤^α`
    pub y_a: G2,
    /// `Ỹ_A = g̃^β`
    pub y_a_tilde: G1,
}

impl PublicParams {
    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }
}

pub fn setup<R: RngCore + CryptoRng>(security_param: u32, rng: &mut R) -> Result<(MasterSecretKey, PublicParams)> {
    if !SUPPORTED_SECURITY_PARAMS.contains(&security_param) {
        return Err(Error::UnsupportedParameter(security_param));
    }
    let ctx = GroupContext::get().clone();
    let msk = MasterSecretKey { alpha: random_scalar(rng), beta: random_scalar(rng) };
    let pp = PublicParams { y_a: ctx.g_frak * msk.alpha, y_a_tilde: ctx.g_tilde * msk.beta, ctx };
    Ok((msk, pp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Issuer,
    Verifier,
    User,
    CentralVerifier,
}

impl Role {
    fn code(self) -> u8 {
        match self {
            Role::Issuer => 1,
            Role::Verifier => 2,
            Role::User => 3,
            Role::CentralVerifier => 4,
        }
    }

    fn from_code(c: u8) -> Result<Self, DecodeError> {
        Ok(match c {
            1 => Role::Issuer,
            2 => Role::Verifier,
            3 => Role::User,
            4 => Role::CentralVerifier,
            _ => return Err(DecodeError::InvalidValue("role")),
        })
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Issuer => "issuer",
            Role::Verifier => "verifier",
            Role::User => "user",
            Role::CentralVerifier => "central-verifier",
        })
    }
}

/// What the CA stores per registered entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityRecord {
    pub id: Vec<u8>,
    pub role: Role,
    pub pk_g1: Option<G1>,
    pub pk_g2: Option<G2>,
    pub credential: BbsSignature,
    /// `SK_V`, verifiers only.
    pub sk_v: Option<G2>,
}

/// Secret/public key pair `(x, g̃^x)` held by users and the central verifier.
#[derive(Clone, PartialEq, Eq)]
pub struct G1KeyPair {
    sk: Scalar,
    pub pk: G1,
}

impl std::fmt::Debug for G1KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("G1KeyPair").field("pk", &self.pk).finish_non_exhaustive()
    }
}

impl G1KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(ctx: &GroupContext, rng: &mut R) -> Self {
        Self::from_secret(ctx, random_scalar(rng))
    }

    pub fn from_secret(ctx: &GroupContext, sk: Scalar) -> Self {
        Self { sk, pk: ctx.g_tilde * sk }
    }

    pub fn secret(&self) -> Scalar {
        self.sk
    }
}

/// A ticket verifier's registration output: `Cred_V` and `SK_V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierKey {
    pub id: Vec<u8>,
    pub credential: BbsSignature,
    pub sk_v: G2,
}

/// `g̃^{H1(ID)}`, the element a verifier credential is bound to.
pub fn identity_element(ctx: &GroupContext, id: &[u8]) -> G1 {
    ctx.g_tilde * hash_identity(id)
}

/// Entity-side check of a credential on a G1 public key.
pub fn verify_key_credential(pp: &PublicParams, pk: &G1, credential: &BbsSignature) -> bool {
    bbs::verify_credential(&pp.ctx, &pp.y_a, pk, credential)
}

/// `e(g̃, SK_V) == e(Ỹ_A, H2(ID_V))`
pub fn verify_verifier_secret(pp: &PublicParams, id: &[u8], sk_v: &G2) -> bool {
    pairing_product_is_identity(&[(pp.ctx.g_tilde, *sk_v), (-pp.y_a_tilde, identity_point(id))])
}

impl VerifierKey {
    /// Verifier-side checks at the end of registration.
    pub fn check(&self, pp: &PublicParams) -> Result<()> {
        let bound = identity_element(&pp.ctx, &self.id);
        if !bbs::verify_credential(&pp.ctx, &pp.y_a, &bound, &self.credential) {
            return Err(Error::InvalidCredential);
        }
        if !verify_verifier_secret(pp, &self.id, &self.sk_v) {
            return Err(Error::InvalidVerifierKey);
        }
        Ok(())
    }
}

/// Reverse index from `g̃^{H1(ID)}` to `ID`, used by ticket tracing.
///
/// Built by the CA as verifiers and central verifiers register; it holds
/// only public information and can be handed to the central verifier.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityIndex {
    by_element: HashMap<Vec<u8>, Vec<u8>>,
    ids: BTreeSet<Vec<u8>>,
}

impl IdentityIndex {
    pub fn insert(&mut self, ctx: &GroupContext, id: &[u8]) {
        let key = identity_element(ctx, id).to_bytes();
        self.by_element.insert(key, id.to_vec());
        self.ids.insert(id.to_vec());
    }

    pub fn lookup(&self, element: &G1) -> Option<&[u8]> {
        self.by_element.get(&element.to_bytes()).map(Vec::as_slice)
    }

    pub fn ids(&self) -> impl Iterator<Item = &[u8]> {
        self.ids.iter().map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// The CA: master secret, public parameters and the append-only record store.
#[derive(Clone, Debug)]
pub struct CentralAuthority {
    msk: MasterSecretKey,
    pp: PublicParams,
    records: BTreeMap<Vec<u8>, EntityRecord>,
    index: IdentityIndex,
}

impl CentralAuthority {
    pub fn new(msk: MasterSecretKey, pp: PublicParams) -> Self {
        Self { msk, pp, records: BTreeMap::new(), index: IdentityIndex::default() }
    }

    pub fn msk(&self) -> &MasterSecretKey {
        &self.msk
    }

    pub fn pp(&self) -> &PublicParams {
        &self.pp
    }

    pub fn record(&self, id: &[u8]) -> Option<&EntityRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &EntityRecord> {
        self.records.values()
    }

    pub fn index(&self) -> &IdentityIndex {
        &self.index
    }

    fn check_new(&self, id: &[u8]) -> Result<()> {
        if id.is_empty() {
            return Err(Error::EmptyIdentity);
        }
        if self.records.contains_key(id) {
            return Err(Error::DuplicateIdentity(String::from_utf8_lossy(id).into_owned()));
        }
        Ok(())
    }

    fn store(&mut self, record: EntityRecord) {
        if matches!(record.role, Role::Verifier | Role::CentralVerifier) {
            self.index.insert(&self.pp.ctx, &record.id);
        }
        self.records.insert(record.id.clone(), record);
    }

    /// Certifies an issuer key published in both groups.
    pub fn register_issuer<R: RngCore + CryptoRng>(
        &mut self,
        id: &[u8],
        y_i: &G1,
        y_i_tilde: &G2,
        rng: &mut R,
    ) -> Result<BbsSignature> {
        self.check_new(id)?;
        let ctx = &self.pp.ctx;
        // e(Y_I, 𝔤) == e(g̃, Ỹ_I)
        if !pairing_product_is_identity(&[(*y_i, ctx.g_frak), (-ctx.g_tilde, *y_i_tilde)]) {
            return Err(Error::KeyMismatch);
        }
        let credential = bbs::sign_credential(ctx, self.msk.alpha, y_i, rng);
        self.store(EntityRecord {
            id: id.to_vec(),
            role: Role::Issuer,
            pk_g1: Some(*y_i),
            pk_g2: Some(*y_i_tilde),
            credential,
            sk_v: None,
        });
        Ok(credential)
    }

    pub fn register_verifier<R: RngCore + CryptoRng>(&mut self, id: &[u8], rng: &mut R) -> Result<VerifierKey> {
        self.check_new(id)?;
        let ctx = &self.pp.ctx;
        let credential = bbs::sign_credential(ctx, self.msk.alpha, &identity_element(ctx, id), rng);
        let sk_v = identity_point(id) * self.msk.beta;
        self.store(EntityRecord {
            id: id.to_vec(),
            role: Role::Verifier,
            pk_g1: None,
            pk_g2: None,
            credential,
            sk_v: Some(sk_v),
        });
        Ok(VerifierKey { id: id.to_vec(), credential, sk_v })
    }

    pub fn register_user<R: RngCore + CryptoRng>(&mut self, id: &[u8], y_u: &G1, rng: &mut R) -> Result<BbsSignature> {
        self.register_key(Role::User, id, y_u, rng)
    }

    pub fn register_central_verifier<R: RngCore + CryptoRng>(
        &mut self,
        id: &[u8],
        y_cv: &G1,
        rng: &mut R,
    ) -> Result<BbsSignature> {
        self.register_key(Role::CentralVerifier, id, y_cv, rng)
    }

    fn register_key<R: RngCore + CryptoRng>(
        &mut self,
        role: Role,
        id: &[u8],
        pk: &G1,
        rng: &mut R,
    ) -> Result<BbsSignature> {
        self.check_new(id)?;
        let credential = bbs::sign_credential(&self.pp.ctx, self.msk.alpha, pk, rng);
        self.store(EntityRecord { id: id.to_vec(), role, pk_g1: Some(*pk), pk_g2: None, credential, sk_v: None });
        Ok(credential)
    }

    /// Serves one registration request message.
    pub fn handle<R: RngCore + CryptoRng>(
        &mut self,
        req: &RegistrationRequest,
        rng: &mut R,
    ) -> Result<RegistrationResponse> {
        let missing = || Error::Decode(DecodeError::InvalidValue("registration request is missing a public key"));
        match req.role {
            Role::Issuer => {
                let (Some(y1), Some(y2)) = (req.pk_g1, req.pk_g2) else { return Err(missing()) };
                let credential = self.register_issuer(&req.id, &y1, &y2, rng)?;
                Ok(RegistrationResponse { credential, sk_v: None })
            }
            Role::Verifier => {
                let key = self.register_verifier(&req.id, rng)?;
                Ok(RegistrationResponse { credential: key.credential, sk_v: Some(key.sk_v) })
            }
            Role::User | Role::CentralVerifier => {
                let y = req.pk_g1.ok_or_else(missing)?;
                let credential = self.register_key(req.role, &req.id, &y, rng)?;
                Ok(RegistrationResponse { credential, sk_v: None })
            }
        }
    }

    pub fn to_state(&self) -> CaState {
        CaState { msk: self.msk.clone(), records: self.records.values().cloned().collect() }
    }

    pub fn from_state(pp: PublicParams, state: CaState) -> Self {
        let mut ca = Self::new(state.msk, pp);
        for r in state.records {
            ca.store(r);
        }
        ca
    }
}

/// `ID, role, public keys` sent by an entity to the CA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationRequest {
    pub role: Role,
    pub id: Vec<u8>,
    pub pk_g1: Option<G1>,
    pub pk_g2: Option<G2>,
}

impl RegistrationRequest {
    pub fn issuer(id: &[u8], keys: &BbsKeyPair) -> Self {
        Self { role: Role::Issuer, id: id.to_vec(), pk_g1: keys.pk_g1, pk_g2: Some(keys.pk_g2) }
    }

    pub fn verifier(id: &[u8]) -> Self {
        Self { role: Role::Verifier, id: id.to_vec(), pk_g1: None, pk_g2: None }
    }

    pub fn user(id: &[u8], pk: &G1) -> Self {
        Self { role: Role::User, id: id.to_vec(), pk_g1: Some(*pk), pk_g2: None }
    }

    pub fn central_verifier(id: &[u8], pk: &G1) -> Self {
        Self { role: Role::CentralVerifier, id: id.to_vec(), pk_g1: Some(*pk), pk_g2: None }
    }
}

/// The CA's answer: a credential, plus `SK_V` for verifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationResponse {
    pub credential: BbsSignature,
    pub sk_v: Option<G2>,
}

/// Persistent CA state: the master secret and every record, in id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaState {
    pub msk: MasterSecretKey,
    pub records: Vec<EntityRecord>,
}

const HASH_TAGS: [&[u8]; 5] = [domain::H1, domain::H2, domain::H3, domain::PI1, domain::PI2];

impl Encode for GroupContext {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, self.curve.as_bytes());
        for g in [&self.g_tilde, &self.g_bar, &self.g1, &self.g2, &self.g3] {
            g.encode(out);
        }
        for h in [&self.g_frak, &self.theta1, &self.theta2] {
            h.encode(out);
        }
    }
}

impl Decode for GroupContext {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let curve = r.bytes()?;
        if curve != CURVE_ID.as_bytes() {
            return Err(DecodeError::InvalidValue("curve identifier"));
        }
        Ok(Self {
            curve: CURVE_ID.to_string(),
            g_tilde: r.get()?,
            g_bar: r.get()?,
            g1: r.get()?,
            g2: r.get()?,
            g3: r.get()?,
            g_frak: r.get()?,
            theta1: r.get()?,
            theta2: r.get()?,
        })
    }
}

impl Encode for PublicParams {
    fn encode(&self, out: &mut Vec<u8>) {
        self.ctx.encode(out);
        self.y_a.encode(out);
        self.y_a_tilde.encode(out);
        put_list(out, &HASH_TAGS.map(<[u8]>::to_vec));
    }
}

impl Decode for PublicParams {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let ctx = r.get()?;
        let y_a = r.get()?;
        let y_a_tilde = r.get()?;
        let tags: Vec<Vec<u8>> = r.list()?;
        if tags.len() != HASH_TAGS.len() || tags.iter().zip(HASH_TAGS).any(|(a, b)| a != b) {
            return Err(DecodeError::InvalidValue("hash domain tags"));
        }
        Ok(Self { ctx, y_a, y_a_tilde })
    }
}

impl Message for PublicParams {
    const KIND: u8 = kind::PUBLIC_PARAMS;
}

impl Encode for MasterSecretKey {
    fn encode(&self, out: &mut Vec<u8>) {
        self.alpha.encode(out);
        self.beta.encode(out);
    }
}

impl Decode for MasterSecretKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { alpha: r.get()?, beta: r.get()? })
    }
}

impl Encode for Role {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.code());
    }
}

impl Decode for Role {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Role::from_code(r.u8()?)
    }
}

impl Encode for EntityRecord {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.id);
        self.role.encode(out);
        put_option(out, self.pk_g1.as_ref());
        put_option(out, self.pk_g2.as_ref());
        self.credential.encode(out);
        put_option(out, self.sk_v.as_ref());
    }
}

impl Decode for EntityRecord {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            id: r.bytes()?,
            role: r.get()?,
            pk_g1: r.option()?,
            pk_g2: r.option()?,
            credential: r.get()?,
            sk_v: r.option()?,
        })
    }
}

impl Encode for CaState {
    fn encode(&self, out: &mut Vec<u8>) {
        self.msk.encode(out);
        put_list(out, &self.records);
    }
}

impl Decode for CaState {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { msk: r.get()?, records: r.list()? })
    }
}

impl Message for CaState {
    const KIND: u8 = kind::CA_STATE;
}

impl Encode for RegistrationRequest {
    fn encode(&self, out: &mut Vec<u8>) {
        self.role.encode(out);
        put_bytes(out, &self.id);
        put_option(out, self.pk_g1.as_ref());
        put_option(out, self.pk_g2.as_ref());
    }
}

impl Decode for RegistrationRequest {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { role: r.get()?, id: r.bytes()?, pk_g1: r.option()?, pk_g2: r.option()? })
    }
}

impl Message for RegistrationRequest {
    const KIND: u8 = kind::REGISTRATION_REQUEST;
}

impl Encode for RegistrationResponse {
    fn encode(&self, out: &mut Vec<u8>) {
        self.credential.encode(out);
        put_option(out, self.sk_v.as_ref());
    }
}

impl Decode for RegistrationResponse {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { credential: r.get()?, sk_v: r.option()? })
    }
}

impl Message for RegistrationResponse {
    const KIND: u8 = kind::REGISTRATION_RESPONSE;
}

impl Message for BbsSignature {
    const KIND: u8 = kind::CREDENTIAL;
}

impl Encode for IdentityIndex {
    fn encode(&self, out: &mut Vec<u8>) {
        let ids: Vec<Vec<u8>> = self.ids.iter().cloned().collect();
        put_list(out, &ids);
    }
}

impl Decode for IdentityIndex {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let ids: Vec<Vec<u8>> = r.list()?;
        let mut index = IdentityIndex::default();
        for id in &ids {
            index.insert(GroupContext::get(), id);
        }
        Ok(index)
    }
}

impl Message for IdentityIndex {
    const KIND: u8 = kind::IDENTITY_INDEX;
}

impl Encode for G1KeyPair {
    fn encode(&self, out: &mut Vec<u8>) {
        self.sk.encode(out);
    }
}

impl Decode for G1KeyPair {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self::from_secret(GroupContext::get(), r.get()?))
    }
}

impl Message for G1KeyPair {
    const KIND: u8 = kind::G1_KEY;
}

impl Encode for BbsKeyPair {
    fn encode(&self, out: &mut Vec<u8>) {
        self.secret().encode(out);
        out.push(self.pk_g1.is_some() as u8);
    }
}

impl Decode for BbsKeyPair {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let sk = r.get()?;
        let with_g1 = r.bool()?;
        Ok(Self::from_secret(GroupContext::get(), sk, with_g1))
    }
}

impl Message for BbsKeyPair {
    const KIND: u8 = kind::SIGNING_KEY;
}

impl Encode for VerifierKey {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.id);
        self.credential.encode(out);
        self.sk_v.encode(out);
    }
}

impl Decode for VerifierKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { id: r.bytes()?, credential: r.get()?, sk_v: r.get()? })
    }
}

impl Message for VerifierKey {
    const KIND: u8 = kind::VERIFIER_KEY;
}
