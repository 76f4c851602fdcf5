#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "pvkit/crypto.hpp"
#include "pvkit/events.hpp"
#include "pvkit/result.hpp"
#include "pvkit/tokens.hpp"
#include "pvkit/wire.hpp"

namespace pvkit {

/// One row of the visa ledger. `valid` moves TRUE -> FALSE only, by
/// revocation; `first_use_seen` is recorded but enforces nothing.
struct VisaRecord {
    std::uint64_t pass_no = 0;
    std::uint64_t visa_no = 0;
    Timestamp expiry;
    bool valid = true;
    bool first_use_seen = false;

    friend bool operator==(const VisaRecord&, const VisaRecord&) = default;
};

/// The visited provider. Relays visa acquisition to the user's home
/// network, issues visas, serves service sessions against the evolving
/// chain key, and processes both revocation messages.
///
/// Invariant: chain_keys holds an entry exactly for the ledger rows that
/// are valid (revocation erases the key along with the flag).
class ForeignNetwork {
public:
    using PolicyHook = std::function<bool(const VisaRequest&)>;

    static constexpr std::uint64_t kDefaultVisaValidityMs = 7ull * 24 * 60 * 60 * 1000;

    ForeignNetwork(std::string id, KeyPair keys, Certificate cert, Bytes ca_public_key,
                   const CryptoSuite& suite, std::unique_ptr<Rng> rng, const Clock& clock,
                   EventSink* events = nullptr,
                   std::uint64_t freshness_window_ms = kDefaultFreshnessWindowMs,
                   std::uint64_t visa_validity_ms = kDefaultVisaValidityMs);

    /// Timestamp gate, then the requester's home-network certificate, then
    /// the local accept/deny policy; on accept, stores a pending entry
    /// keyed by a fresh r_FN and relays the sealed fields verbatim.
    Result<ForwardToHN, Reject> handle_visa_request(const VisaRequest& msg);

    /// Consumes the home network's verdict: unseal, verify its signature
    /// with the key pinned from the request's certificate, match r_FN to a
    /// pending entry and the passport number to the claim, then issue the
    /// visa, record it, and derive the shared master/session keys.
    Result<VisaGrant, Reject> handle_hn_decision(const HNDecision& msg);

    /// One service session: open the visa, gate on the ledger row, prove
    /// the requester knows the visa contents under SK', then answer under
    /// SK'' and deliver service bytes under SK'''. The chain key advances
    /// to SK''' only when every gate passed.
    Result<ServiceResponse, Reject> handle_service_request(const ServiceRequest& msg,
                                                           BytesView service_bytes);

    enum class RevokeOutcome {
        Applied,      // at least one ledger row invalidated
        RecordedOnly, // no row carried the passport; future issuance refused
        Dropped,      // unsealing or signature failed; state unchanged
    };

    RevokeOutcome handle_passport_revoke(const PassportRevoke& msg);

    /// Returns the revoked visa number on success. The outer layer names no
    /// visa in cleartext, so each live chain key is tried in turn.
    Result<std::uint64_t, Reject> handle_visa_revoke(const VisaRevoke& msg);

    /// Default policy (unset hook) accepts any request whose certificate
    /// checks pass.
    void set_policy(PolicyHook hook) { policy_ = std::move(hook); }

    // Ledger persistence: one row per line, tab-separated
    // pass_no, visa_no, expiry, TRUE|FALSE. Throws IoError.
    std::string ledger_text() const;
    void save_ledger(const std::string& path) const;
    void load_ledger(const std::string& path);

    const std::string& id() const { return id_; }
    const Certificate& certificate() const { return cert_; }
    const Bytes& public_key() const { return keys_.public_key; }
    const KeyPair& keys() const { return keys_; }
    ActorCrypto& crypto() { return crypto_; }
    const ActorCrypto& crypto() const { return crypto_; }

    const std::map<std::uint64_t, VisaRecord>& ledger() const { return ledger_; }
    std::optional<SymmetricKey> chain_key(std::uint64_t visa_no) const;
    bool passport_blocked(std::uint64_t pass_no) const { return revoked_passports_.contains(pass_no); }
    std::size_t pending_count() const { return pending_.size(); }

    /// Ledger/chain-key coupling check; throws std::logic_error on breach.
    void audit_state() const;

private:
    struct Pending {
        Nonce r2_mu;
        Timestamp t_mu;
        std::uint64_t pass_no_claimed = 0;
        Certificate cert_hn;
        Timestamp created;
    };

    void prune_pending(Timestamp now);

    std::string id_;
    KeyPair keys_;
    Certificate cert_;
    Bytes ca_pk_;
    ActorCrypto crypto_;
    const Clock* clock_;
    EventSink* events_;
    std::uint64_t window_;
    std::uint64_t visa_validity_;

    std::map<Bytes, Pending> pending_; // keyed by r_FN bytes
    std::map<std::uint64_t, VisaRecord> ledger_;
    std::map<std::uint64_t, SymmetricKey> chain_keys_;
    std::map<std::uint64_t, std::uint64_t> session_count_;
    std::map<std::string, Bytes> known_hn_keys_; // pinned from verified certificates
    std::set<std::uint64_t> revoked_passports_;
    std::uint64_t next_visa_no_ = 1;
    PolicyHook policy_;
};

} // namespace pvkit
