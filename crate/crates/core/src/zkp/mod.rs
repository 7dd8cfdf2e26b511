//! Non-interactive proofs of knowledge (Fiat-Shamir with H1).
//!
//! * [`IssuingProof`]: the user holds a CA credential on `Y_U = g̃^{x_u}` and
//!   every pseudonym `(P_V, Q_V) = (g̃^{x_u} Y_CV^{k_v}, g̃^{k_v})` commits to
//!   that same `x_u`. Sent to the ticket issuer.
//! * [`OwnershipProof`]: the presenter knows `(x_u, k_v)` opening one
//!   pseudonym. Sent to a ticket verifier.

mod issuing;
mod ownership;

#[cfg(any(test, feature = "test-support"))]
pub mod analysis;

pub(crate) use issuing::check_service_ids;
pub use issuing::{prove_issuing, verify_issuing, IssuingProof, PseudonymCommitment};
pub use ownership::{
    ownership_challenge, ownership_commit, ownership_equations, prove_ownership, verify_ownership, OwnershipNonce,
    OwnershipProof,
};

use crate::group::{domain, hash_to_scalar, HashInput, Scalar};

/// `k_v = H1(y3 ‖ ID_V)`: the pseudonym exponent for one service, which the
/// user can recompute from the seed kept after issuing.
pub fn pseudonym_secret(y3_seed: &Scalar, service_id: &[u8]) -> Scalar {
    hash_to_scalar(domain::H1, HashInput::new().element(y3_seed).bytes(service_id).as_bytes())
}
