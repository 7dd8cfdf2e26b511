use thiserror::Error;

/// Failure to decode a canonical encoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed encoding of {0}")]
    MalformedEncoding(&'static str),
    #[error("{0} is not in the prime-order subgroup")]
    NotInSubgroup(&'static str),
    #[error("identity element is not allowed for {0}")]
    IdentityElement(&'static str),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("{0} trailing bytes after message")]
    TrailingBytes(usize),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("expected message kind {expected:#04x}, found {found:#04x}")]
    UnexpectedKind { expected: u8, found: u8 },
    #[error("invalid value: {0}")]
    InvalidValue(&'static str),
}

/// Errors raised by the protocol algorithms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("unsupported security parameter {0}")]
    UnsupportedParameter(u32),
    #[error("the G1 and G2 public keys do not share a secret exponent")]
    KeyMismatch,
    #[error("identity {0:?} is already registered")]
    DuplicateIdentity(String),
    #[error("identity must not be empty")]
    EmptyIdentity,
    #[error("credential does not verify")]
    InvalidCredential,
    #[error("verifier secret key does not match its identity")]
    InvalidVerifierKey,
    #[error("service set is empty")]
    EmptyServiceSet,
    #[error("service {0:?} appears more than once")]
    DuplicateService(String),
    #[error("service set does not include the central verifier")]
    MissingCentralVerifier,
    #[error("witness does not open the pseudonym")]
    PseudonymMismatch,
    #[error("issuing proof rejected: {0}")]
    ProofRejected(ProofFailure),
    #[error("proof carries {proof} pseudonyms for {services} services")]
    ServiceSetMismatch { proof: usize, services: usize },
    #[error("ticket rejected: {0}")]
    TicketRejected(TicketFailure),
    #[error("no tag for verifier {0:?}")]
    TagNotFound(String),
    #[error("unknown verifier {0:?}")]
    UnknownVerifier(String),
    #[error("a verifier cannot proxy for itself")]
    SelfProxy,
    #[error("trace failed: {0}")]
    TraceFailure(TraceFailure),
    #[error("tag rejected: {0}")]
    TagRejected(crate::ticketing::Rejection),
    #[error("spend ledger: {0}")]
    Ledger(String),
    #[error("tag {0} names a verifier element missing from the identity index")]
    UnknownVerifierElement(usize),
}

/// Which verification equation of a zero-knowledge proof failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProofFailure {
    #[error("challenge does not match the transcript")]
    Challenge,
    #[error("credential commitment equation W1 fails")]
    CredentialCommitment,
    #[error("accumulator commitment equation W2 fails")]
    AccumulatorCommitment,
    #[error("pseudonym P commitment fails for entry {0}")]
    PseudonymP(usize),
    #[error("pseudonym Q commitment fails for entry {0}")]
    PseudonymQ(usize),
    #[error("randomized credential pairing check fails")]
    CredentialPairing,
    #[error("degenerate randomized credential")]
    Degenerate,
    #[error("response count does not match pseudonym count")]
    Shape,
    #[error("proof is for a different pseudonym")]
    WrongPseudonym,
}

/// Which user-side check of a freshly issued ticket failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TicketFailure {
    #[error("ticket has {entries} entries for {services} services")]
    EntryCount { entries: usize, services: usize },
    #[error("lookup key of entry {0} does not match")]
    LookupKey(usize),
    #[error("pseudonym in tag {0} differs from the one proven")]
    Pseudonym(usize),
    #[error("serial of tag {0} does not match its contents")]
    TagSerial(usize),
    #[error("signature on tag {0} does not verify")]
    TagSignature(usize),
    #[error("ticket serial does not match the tag serials")]
    TicketSerial,
    #[error("ticket signature does not verify")]
    TicketSignature,
}

/// Which step of ticket tracing failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TraceFailure {
    #[error("ticket is empty")]
    Empty,
    #[error("serial of tag {0} does not match its contents")]
    TagSerial(usize),
    #[error("signature on tag {0} does not verify")]
    TagSignature(usize),
    #[error("tag {0} opens to a different user key")]
    UserKeyMismatch(usize),
    #[error("ticket serial does not match the tag serials")]
    TicketSerial,
    #[error("ticket signature does not verify")]
    TicketSignature,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable kebab-case name for logs and exit reports.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::Decode(_) => "malformed",
            Error::UnsupportedParameter(_) => "unsupported-parameter",
            Error::KeyMismatch => "key-mismatch",
            Error::DuplicateIdentity(_) => "duplicate-identity",
            Error::EmptyIdentity => "empty-identity",
            Error::InvalidCredential => "invalid-credential",
            Error::InvalidVerifierKey => "invalid-verifier-key",
            Error::EmptyServiceSet => "empty-service-set",
            Error::DuplicateService(_) => "duplicate-service",
            Error::MissingCentralVerifier => "missing-central-verifier",
            Error::PseudonymMismatch => "pseudonym-mismatch",
            Error::ProofRejected(_) => "issuing-proof-rejected",
            Error::ServiceSetMismatch { .. } => "service-set-mismatch",
            Error::TicketRejected(_) => "ticket-rejected",
            Error::TagNotFound(_) => "tag-not-found",
            Error::UnknownVerifier(_) => "unknown-verifier",
            Error::SelfProxy => "self-proxy",
            Error::TraceFailure(_) => "trace-failed",
            Error::TagRejected(r) => r.name(),
            Error::Ledger(_) => "ledger-io",
            Error::UnknownVerifierElement(_) => "unknown-verifier-element",
        }
    }

    /// True for errors that mean "the protocol said no", as opposed to bad
    /// input bytes, configuration or storage failures.
    pub fn is_rejection(&self) -> bool {
        !matches!(self, Error::Decode(_) | Error::Ledger(_) | Error::UnsupportedParameter(_))
    }
}
