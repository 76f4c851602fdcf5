#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pvkit/crypto.hpp"
#include "pvkit/events.hpp"
#include "pvkit/foreign_network.hpp"
#include "pvkit/home_network.hpp"
#include "pvkit/mobile_user.hpp"
#include "pvkit/wire.hpp"

namespace pvkit {

enum class TrustLevel { None = 0, Partial = 1, Full = 2 };

const char* to_string(TrustLevel level);
std::optional<TrustLevel> trust_level_from_string(std::string_view name);

std::optional<RejectReason> reject_reason_from_string(std::string_view name);

/// One symmetric-key use (encrypt or decrypt) attributed to an actor,
/// identified by the key's fingerprint.
struct KeyUseRecord {
    std::string actor;
    std::string op;
    Bytes fingerprint;
};

/// Everything a run produced: an ordered annotated log plus the drained
/// key/nonce/belief/key-use events. to_text() is the canonical trace
/// serialization; two runs of one scenario with one seed must produce
/// byte-identical text.
struct Trace {
    struct Entry {
        std::uint64_t index = 0;
        std::uint64_t at_ms = 0;
        std::string kind; // "note", "send", "deliver", "event", "trust"
        std::string text;
        Bytes raw; // message bytes for "send"/"deliver" entries
    };

    std::vector<Entry> entries;
    std::vector<KeyEvent> keys;
    std::vector<NonceEvent> nonces;
    std::vector<BeliefEvent> beliefs;
    std::vector<KeyUseRecord> key_uses;

    void add(Timestamp at, std::string kind, std::string text, Bytes raw = {});
    std::string to_text() const;
};

/// Pairwise trust ledger. Levels only ever increase; Full between a mobile
/// user and a foreign network appears only after both ends computed SK'''.
class TrustAudit {
public:
    TrustLevel level(const std::string& from, const std::string& to) const;
    void raise(const std::string& from, const std::string& to, TrustLevel lv, Timestamp at,
               Trace& trace);

private:
    std::map<std::pair<std::string, std::string>, TrustLevel> levels_;
};

/// Deterministic single-threaded message bus owning one CA and any number
/// of HN/FN/MU actors. Every enqueued message is captured for replay; the
/// adversary steps (drop, duplicate, tamper, inject, replay, redirect,
/// delay) model an attacker who fully controls the network but not the
/// cryptography.
class SimWorld {
public:
    explicit SimWorld(std::uint64_t seed);

    // actors keep references into the world, so it must stay put
    SimWorld(const SimWorld&) = delete;
    SimWorld& operator=(const SimWorld&) = delete;

    static constexpr std::uint64_t kCertValidityMs = 365ull * 24 * 60 * 60 * 1000;
    static constexpr std::uint64_t kPassportValidityMs = 365ull * 24 * 60 * 60 * 1000;

    // actor declarations; the CA must come first
    void add_ca(const std::string& id);
    void add_hn(const std::string& id);
    void add_fn(const std::string& id);
    void add_mu(const std::string& id, const std::string& home_hn);

    /// Offline registration: provisions the smart card and sets mutual
    /// full trust between the user and its home network.
    void register_mu(const std::string& mu_id);

    // protocol initiations (each enqueues the first message of a flow)
    void start_acquisition(const std::string& mu, const std::string& fn,
                           const std::string& descriptor);
    void start_service(const std::string& mu, std::uint64_t visa_no,
                       const std::string& descriptor);
    void start_visa_revoke(const std::string& mu, std::uint64_t visa_no);
    void start_passport_revoke(const std::string& hn, const std::string& mu);

    struct DeliveryOutcome {
        std::string from;
        std::string to;
        bool delivered = false;
        std::optional<RejectReason> reject;
        bool response_enqueued = false;
        std::string summary;
    };

    /// Pops the queue head, advances the clock 1 ms (transit), dispatches
    /// to the recipient's handler and enqueues any response. Malformed or
    /// un-dispatchable bytes record Reject(malformed) without a response.
    DeliveryOutcome deliver_next();

    /// Delivers until the queue drains; throws ScenarioError after
    /// max_deliveries (runaway guard).
    std::vector<DeliveryOutcome> pump(std::size_t max_deliveries = 64);

    // adversary controls over the queue head
    void drop_next();
    void duplicate_next();
    void tamper_next(std::size_t byte_index); // XORs the byte with 0xFF
    void redirect_next(const std::string& new_to);
    void delay_next(std::size_t positions);

    void inject(const std::string& from, const std::string& to, Bytes raw);
    /// Re-enqueues capture #index (original claimed sender) toward `to`,
    /// at the queue head when to_front is set.
    void replay(std::size_t capture_index, const std::string& to, bool to_front = false);

    void advance_clock(std::uint64_t ms);
    std::size_t queue_size() const { return queue_.size(); }

    struct Captured {
        std::string from;
        std::string to;
        Bytes bytes;
    };
    const std::vector<Captured>& captures() const { return captures_; }

    Trace& trace() { return trace_; }
    TrustAudit& trust() { return trust_; }
    SimClock& clock() { return clock_; }
    const CryptoSuite& suite() const { return *suite_; }
    /// Swaps the suite used by actors created afterwards (negative-control
    /// hook for the attack suite).
    void use_suite(const CryptoSuite& suite) { suite_ = &suite; }

    bool has_actor(const std::string& id) const { return directory_.contains(id); }
    MobileUser& mu(const std::string& id);
    HomeNetwork& hn(const std::string& id);
    ForeignNetwork& fn(const std::string& id);
    std::vector<std::string> fn_ids() const;

    const Bytes& ca_public_key() const;
    /// Derives a keypair outside any actor, for adversary use.
    KeyPair make_attacker_keys(const std::string& label);

    std::optional<std::uint64_t> visa_of(const std::string& mu_id, const std::string& fn_id) const;

private:
    enum class Kind { Ca, Hn, Fn, Mu };

    struct Envelope {
        std::string from;
        std::string to;
        Bytes bytes;
    };

    void enqueue(const std::string& from, const std::string& to, Bytes bytes,
                 const std::string& note);
    void drain_events();
    DeterministicRng fork_rng(const std::string& label) const;
    Envelope& front_or_throw();

    std::uint64_t seed_;
    DeterministicRng master_;
    const CryptoSuite* suite_;
    SimClock clock_;
    EventSink events_;
    Trace trace_;
    TrustAudit trust_;

    std::map<std::string, Kind> directory_;
    std::string ca_id_;
    std::optional<KeyPair> ca_keys_;
    std::unique_ptr<ActorCrypto> ca_crypto_;
    std::map<std::string, std::unique_ptr<HomeNetwork>> hns_;
    std::map<std::string, std::unique_ptr<ForeignNetwork>> fns_;
    std::map<std::string, std::unique_ptr<MobileUser>> mus_;
    std::map<std::string, std::string> mu_home_;

    std::deque<Envelope> queue_;
    std::vector<Captured> captures_;
    std::map<std::string, std::string> acquiring_mu_; // FN id -> MU id of the open acquisition
    std::map<std::string, std::string> serving_mu_;   // FN id -> MU id of the open service run
};

/// Convenience wrapper for the classic replay move: re-enqueue a captured
/// message and immediately deliver it.
SimWorld::DeliveryOutcome adversary_replay(SimWorld& world, std::size_t capture_index,
                                           const std::string& deliver_to);

// ---------------------------------------------------------------------------
// Scenario scripts.

struct ScenarioStep {
    enum class Op {
        AddCa,
        AddHn,
        AddFn,
        AddMu,
        Register,
        Acquire,
        Service,
        RevokeVisa,
        RevokePassport,
        Deliver,
        Pump,
        Drop,
        Dup,
        Tamper,
        Delay,
        Advance,
        Replay,
        Redirect,
        Inject,
        ExpectTrust,
        ExpectQueue,
        ExpectMuAsymZero,
        ExpectKeysAgree,
    };

    enum class Expect { None, Ok, RejectWith, Silent };

    Op op;
    std::size_t line_no = 0;
    std::vector<std::string> args;
    Expect expect = Expect::None;
    RejectReason expect_reason = RejectReason::Malformed;
};

struct Scenario {
    std::uint64_t seed = 0;
    std::vector<ScenarioStep> steps;
};

struct RunResult {
    Trace trace;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// Executes the script on a fresh world seeded from the scenario (an
/// explicit seed_override wins). Expectation misses become failures;
/// structural problems (undeclared actors, out-of-range indices) throw
/// ScenarioError.
RunResult run_scenario(const Scenario& scenario,
                       std::optional<std::uint64_t> seed_override = std::nullopt,
                       const CryptoSuite* suite = nullptr);

// ---------------------------------------------------------------------------
// Trace audits.

/// All session-key derivations found in a trace, grouped for inspection.
struct FreshnessReport {
    struct Entry {
        std::string actor;
        std::string kind;
        std::string scope;
        std::uint64_t session = 0;
        std::string key_hex;
    };
    std::vector<Entry> session_keys;
    std::size_t sessions = 0;

    std::string to_text() const;
};

/// Requires at least two service sessions in the trace. Verifies that each
/// actor's SK'/SK''/SK''' values are pairwise distinct, that the two sides
/// derived identical values per session, and that no visa master key ever
/// keyed traffic encryption. Throws FreshnessViolation on collision or
/// misuse, std::invalid_argument on too few sessions.
FreshnessReport audit_key_freshness(const Trace& trace,
                                    const CryptoSuite& suite = default_suite());

/// True when the trace contains the authentication conclusions both ends
/// must reach across one acquisition plus at least one service session.
bool mutual_auth_beliefs_held(const Trace& trace, const std::string& mu_id,
                              const std::string& fn_id);

} // namespace pvkit
