#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pvkit/crypto.hpp"

namespace pvkit {

/// A session key derivation, reported by the actor that computed it.
/// `kind` names the key ("sk_mu_hn", "sk_mu_fn", "k_mu_fn", "sk1", "sk2",
/// "sk3"); `scope` ties derivations of one flow together across actors
/// ("acquire:<fn id>" before a visa number exists, "visa:<n>" after).
/// `session` is 0 for acquisition, then 1, 2, ... per service session.
struct KeyEvent {
    std::string actor;
    std::string kind;
    std::string scope;
    std::uint64_t session = 0;
    SymmetricKey key;
};

/// A nonce minted for a protocol run.
struct NonceEvent {
    std::string actor;
    std::string kind; // "r_mu", "r2_mu", "r_fn", "r2_fn", "r_mu_prime", "r_fn_prime"
    std::string scope;
    std::uint64_t session = 0;
    Nonce nonce;
};

/// An authentication conclusion one principal reached about a peer
/// ("hn_authenticated_mu", "mutual_auth_achieved", ...).
struct BeliefEvent {
    std::string actor;
    std::string belief;
    std::uint64_t session = 0;
};

/// Collects events actors emit while handling messages. The harness drains
/// it after every step; actors never read it back.
class EventSink {
public:
    void key(std::string actor, std::string kind, std::string scope, std::uint64_t session,
             const SymmetricKey& k) {
        keys_.push_back({std::move(actor), std::move(kind), std::move(scope), session, k});
    }
    void nonce(std::string actor, std::string kind, std::string scope, std::uint64_t session,
               const Nonce& n) {
        nonces_.push_back({std::move(actor), std::move(kind), std::move(scope), session, n});
    }
    void belief(std::string actor, std::string belief, std::uint64_t session) {
        beliefs_.push_back({std::move(actor), std::move(belief), session});
    }

    std::vector<KeyEvent> drain_keys() { return std::exchange(keys_, {}); }
    std::vector<NonceEvent> drain_nonces() { return std::exchange(nonces_, {}); }
    std::vector<BeliefEvent> drain_beliefs() { return std::exchange(beliefs_, {}); }

private:
    std::vector<KeyEvent> keys_;
    std::vector<NonceEvent> nonces_;
    std::vector<BeliefEvent> beliefs_;
};

} // namespace pvkit
