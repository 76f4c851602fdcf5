#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pvkit/crypto.hpp"
#include "pvkit/events.hpp"
#include "pvkit/result.hpp"
#include "pvkit/tokens.hpp"
#include "pvkit/wire.hpp"

namespace pvkit {

/// What the home network writes onto the card at registration. Persists as
/// a length-prefixed binary file, bit-exact across save/load.
struct SmartCard {
    Bytes sc_id;
    SymmetricKey k_mu_hn;
    SealedPassport passport;
    std::uint64_t pass_no = 0;
    Certificate cert_hn;

    Bytes encode() const;
    static std::optional<SmartCard> decode(BytesView data);

    friend bool operator==(const SmartCard&, const SmartCard&) = default;
};

void save_smart_card(const std::string& path, const SmartCard& card);
SmartCard load_smart_card(const std::string& path);

/// The roaming client. Uses only symmetric primitives and the hash-KDF; it
/// never performs an asymmetric operation, which the per-actor operation
/// counters make checkable. Passport and visas stay opaque to it.
class MobileUser {
public:
    MobileUser(std::string id, const CryptoSuite& suite, std::unique_ptr<Rng> rng,
               const Clock& clock, EventSink* events = nullptr,
               std::uint64_t freshness_window_ms = kDefaultFreshnessWindowMs);

    void provision(SmartCard card);
    bool provisioned() const { return card_.has_value(); }

    /// Starts visa acquisition toward id_FN. Derives the HN channel key
    /// from the card's master key and both identities, mints the two
    /// nonces, and remembers them for the grant. Throws NotProvisioned.
    VisaRequest begin_visa_acquisition(const std::string& id_fn, const std::string& descriptor);

    /// Consumes the grant from id_FN: decrypt the home network's part,
    /// check id, nonce echo, timestamp and verdict in that order, then
    /// derive SK_MU-FN and recover the visa master key. Returns the new
    /// visa number.
    Result<std::uint64_t, Reject> complete_visa_acquisition(const std::string& id_fn,
                                                            const VisaGrant& msg);

    /// Starts one service session on a held visa. Throws UnknownVisa /
    /// LocallyExpired.
    ServiceRequest begin_service(std::uint64_t visa_no, const std::string& descriptor);

    /// Consumes the response from id_FN. On success returns the decrypted
    /// service bytes and advances the chain key to SK'''.
    Result<Bytes, Reject> complete_service(const std::string& id_fn, const ServiceResponse& msg);

    /// Builds the nested revocation message for a held visa and drops the
    /// visa locally. Throws UnknownVisa.
    VisaRevoke revoke_visa(std::uint64_t visa_no);

    const std::string& id() const { return id_; }
    const SmartCard& smart_card() const;
    ActorCrypto& crypto() { return crypto_; }
    const ActorCrypto& crypto() const { return crypto_; }

    std::vector<std::uint64_t> visa_nos() const;
    bool holds_visa(std::uint64_t visa_no) const { return visas_.contains(visa_no); }
    std::optional<SymmetricKey> chain_key(std::uint64_t visa_no) const;
    std::optional<SymmetricKey> visa_master_key(std::uint64_t visa_no) const;
    std::optional<std::string> visa_issuer(std::uint64_t visa_no) const;
    std::uint64_t sessions_completed(std::uint64_t visa_no) const;

private:
    struct InFlightAcquisition {
        Nonce r_mu;
        Nonce r2_mu;
        SymmetricKey sk_mu_hn;
    };

    struct VisaHolding {
        SealedVisa visa;
        std::string id_fn;
        SymmetricKey k_mu_fn;
        SymmetricKey chain_key;
        std::uint64_t pass_no = 0;
        std::uint64_t visa_no = 0;
        Timestamp expiry;
        std::uint64_t sessions_completed = 0;
    };

    struct InFlightService {
        SymmetricKey sk1;
        Nonce r_mu_prime;
    };

    std::string id_;
    ActorCrypto crypto_;
    const Clock* clock_;
    EventSink* events_;
    std::uint64_t window_;

    std::optional<SmartCard> card_;
    std::map<std::string, InFlightAcquisition> in_flight_;       // keyed by id_FN
    std::map<std::uint64_t, VisaHolding> visas_;                 // keyed by Visa_No
    std::map<std::uint64_t, InFlightService> service_flight_;    // keyed by Visa_No
};

} // namespace pvkit
