// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Key-derivation checks go through an oracle that reframes
// the canonical encoding by hand and calls the raw hash, so a library bug
// cannot hide behind its own helpers.

#include <sodium.h>

#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pvkit/attack_suite.hpp"
#include "pvkit/encode.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/harness.hpp"
#include "pvkit/scenario_text.hpp"
#include "pvkit/sodium_suite.hpp"

using namespace pvkit;

namespace {

int g_failures = 0;
std::vector<std::uint64_t> g_mu_asym;
std::uint64_t g_infra_asym = 0;

void run_criterion(int n, const char* name, const std::function<std::string()>& body) {
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
        std::printf("PASS criterion %d: %s\n", n, name);
    } else {
        std::printf("FAIL criterion %d: %s [%s]\n", n, name, detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

// --- independent derivation oracle ---------------------------------------

Bytes oracle_kdf(const std::vector<Bytes>& parts) {
    Bytes material;
    for (const Bytes& p : parts) {
        material.push_back(static_cast<std::uint8_t>((p.size() >> 24) & 0xFF));
        material.push_back(static_cast<std::uint8_t>((p.size() >> 16) & 0xFF));
        material.push_back(static_cast<std::uint8_t>((p.size() >> 8) & 0xFF));
        material.push_back(static_cast<std::uint8_t>(p.size() & 0xFF));
        material.insert(material.end(), p.begin(), p.end());
    }
    Bytes digest(crypto_hash_sha256_BYTES);
    crypto_hash_sha256(digest.data(), material.data(), material.size());
    return digest;
}

Bytes be64(std::uint64_t v) {
    Bytes out(8);
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xFF);
        v >>= 8;
    }
    return out;
}

Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

// --- trace helpers --------------------------------------------------------

std::optional<Bytes> trace_key(const Trace& t, const std::string& actor,
                               const std::string& kind, std::uint64_t session) {
    for (const auto& e : t.keys)
        if (e.actor == actor && e.kind == kind && e.session == session) return e.key.bytes;
    return std::nullopt;
}

std::optional<Bytes> trace_nonce(const Trace& t, const std::string& kind,
                                 std::uint64_t session) {
    for (const auto& e : t.nonces)
        if (e.kind == kind && e.session == session) return e.nonce.bytes;
    return std::nullopt;
}

void setup_actors(SimWorld& world, bool second_fn = false) {
    world.add_ca("rootca");
    world.add_hn("HN1");
    world.add_fn("FN1");
    if (second_fn) world.add_fn("FN2");
    world.add_mu("alice", "HN1");
    world.register_mu("alice");
}

std::string pump_clean(SimWorld& world) {
    for (const auto& out : world.pump())
        if (out.reject) return std::string("unexpected reject: ") + to_string(*out.reject);
    return "";
}

void sample_counters(SimWorld& world) {
    g_mu_asym.push_back(world.mu("alice").crypto().counters().asym_total());
    g_infra_asym += world.hn("HN1").crypto().counters().asym_total();
    g_infra_asym += world.fn("FN1").crypto().counters().asym_total();
}

// --- criteria -------------------------------------------------------------

std::string criterion_happy_path() {
    SimWorld world(11);
    setup_actors(world);
    world.start_acquisition("alice", "FN1", "roaming-data");
    if (auto err = pump_clean(world); !err.empty()) return err;
    auto visa = world.visa_of("alice", "FN1");
    if (!visa) return "no visa issued";

    for (int s = 0; s < 3; ++s) {
        world.start_service("alice", *visa, "session");
        if (auto err = pump_clean(world); !err.empty()) return err;
    }

    const Trace& t = world.trace();
    auto mu_master = trace_key(t, "alice", "sk_mu_fn", 0);
    auto fn_master = trace_key(t, "FN1", "sk_mu_fn", 0);
    if (!mu_master || !fn_master || *mu_master != *fn_master)
        return "the visa session base key differs between the two sides";

    for (std::uint64_t s = 1; s <= 3; ++s) {
        for (const char* kind : {"sk1", "sk2", "sk3"}) {
            auto a = trace_key(t, "alice", kind, s);
            auto b = trace_key(t, "FN1", kind, s);
            if (!a || !b) return std::string(kind) + " missing in session " + std::to_string(s);
            if (*a != *b)
                return std::string(kind) + " differs between sides in session " +
                       std::to_string(s);
        }
    }

    if (world.trust().level("alice", "FN1") != TrustLevel::Full ||
        world.trust().level("FN1", "alice") != TrustLevel::Full)
        return "mutual trust did not reach full";
    if (!mutual_auth_beliefs_held(t, "alice", "FN1"))
        return "authentication beliefs incomplete";

    sample_counters(world);
    return "";
}

std::string criterion_oracle() {
    int mismatches = 0;
    for (int i = 0; i < 100; ++i) {
        SimWorld world(1000 + static_cast<std::uint64_t>(i));
        setup_actors(world);
        world.start_acquisition("alice", "FN1", "roaming-data");
        if (auto err = pump_clean(world); !err.empty()) return err;
        auto visa = world.visa_of("alice", "FN1");
        if (!visa) return "no visa issued";
        for (int s = 0; s < 2; ++s) {
            world.start_service("alice", *visa, "session");
            if (auto err = pump_clean(world); !err.empty()) return err;
        }

        const Trace& t = world.trace();
        Bytes k_mu_hn = world.mu("alice").smart_card().k_mu_hn.bytes;
        std::uint64_t pass_no = world.mu("alice").smart_card().pass_no;

        auto expect = [&](const std::optional<Bytes>& got, const Bytes& want) {
            if (!got || *got != want) ++mismatches;
        };

        // identification key: hash over the passport master key and both ids
        Bytes sk_mu_hn = oracle_kdf({k_mu_hn, str_bytes("alice"), str_bytes("FN1")});
        expect(trace_key(t, "alice", "sk_mu_hn", 0), sk_mu_hn);
        expect(trace_key(t, "HN1", "sk_mu_hn", 0), sk_mu_hn);

        // visa base key: passport number, visited id and all four nonces
        auto r_mu = trace_nonce(t, "r_mu", 0);
        auto r_fn = trace_nonce(t, "r_fn", 0);
        auto r2_mu = trace_nonce(t, "r2_mu", 0);
        auto r2_fn = trace_nonce(t, "r2_fn", 0);
        if (!r_mu || !r_fn || !r2_mu || !r2_fn) return "acquisition nonces missing";
        Bytes chain = oracle_kdf(
            {be64(pass_no), str_bytes("FN1"), *r_mu, *r_fn, *r2_mu, *r2_fn});
        expect(trace_key(t, "alice", "sk_mu_fn", 0), chain);
        expect(trace_key(t, "FN1", "sk_mu_fn", 0), chain);

        auto k_mu_fn = trace_key(t, "FN1", "k_mu_fn", 0);
        if (!k_mu_fn) return "visa master key missing";

        // per-session chain: sk1 from the chain key, sk2 and sk3 on top
        for (std::uint64_t s = 1; s <= 2; ++s) {
            auto r_mu_p = trace_nonce(t, "r_mu_prime", s);
            auto r_fn_p = trace_nonce(t, "r_fn_prime", s);
            if (!r_mu_p || !r_fn_p) return "service nonces missing";
            Bytes sk1 = oracle_kdf({chain, be64(*visa), be64(pass_no)});
            Bytes sk2 = oracle_kdf({sk1, *k_mu_fn, *r_mu_p});
            Bytes sk3 = oracle_kdf({sk2, sk1, *r_fn_p});
            expect(trace_key(t, "alice", "sk1", s), sk1);
            expect(trace_key(t, "FN1", "sk1", s), sk1);
            expect(trace_key(t, "alice", "sk2", s), sk2);
            expect(trace_key(t, "FN1", "sk2", s), sk2);
            expect(trace_key(t, "alice", "sk3", s), sk3);
            expect(trace_key(t, "FN1", "sk3", s), sk3);
            chain = sk3;
        }
        sample_counters(world);
    }
    if (mismatches > 0) return std::to_string(mismatches) + " derivations disagreed";
    return "";
}

std::string criterion_forgery() {
    AttackReport report = run_attack_suite(3);
    std::string detail;
    for (const auto& claim : report.claims) {
        if (claim.name != "passport-forgery-rejected" && claim.name != "visa-forgery-rejected")
            continue;
        if (!claim.upheld) detail += claim.name + ": " + claim.detail + "; ";
    }
    return detail;
}

std::string criterion_replay() {
    int accepted = 0;
    for (int i = 0; i < 50; ++i) {
        SimWorld world(100 + static_cast<std::uint64_t>(i));
        setup_actors(world);
        world.start_acquisition("alice", "FN1", "roaming-data");
        if (auto err = pump_clean(world); !err.empty()) return err;
        auto visa = world.visa_of("alice", "FN1");
        if (!visa) return "no visa issued";

        // the first acquisition message, replayed beyond the window
        world.advance_clock(kDefaultFreshnessWindowMs + 1000 +
                            static_cast<std::uint64_t>(i) * 37 % 30000);
        auto stale = adversary_replay(world, 0, "FN1");
        if (!stale.reject || *stale.reject != RejectReason::Stale) ++accepted;
        world.pump();

        // a completed service opener, replayed verbatim
        std::size_t opener = world.captures().size();
        world.start_service("alice", *visa, "session");
        if (auto err = pump_clean(world); !err.empty()) return err;
        auto replayed = adversary_replay(world, opener, "FN1");
        if (!replayed.reject || *replayed.reject != RejectReason::BadProof) ++accepted;
        world.pump();

        sample_counters(world);
    }
    if (accepted > 0) return std::to_string(accepted) + " replays accepted";
    return "";
}

std::string criterion_mitm() {
    int caught = 0;
    for (int i = 0; i < 50; ++i) {
        SimWorld world(200 + static_cast<std::uint64_t>(i));
        setup_actors(world, true);
        world.start_acquisition("alice", "FN2", "roaming-data");
        world.redirect_next("FN1"); // attacker hands the request to the wrong network
        auto relayed = world.deliver_next();
        if (relayed.reject) return "the relay itself was rejected";
        auto verdict = world.deliver_next();
        if (verdict.reject && *verdict.reject == RejectReason::IdMismatch) ++caught;
        world.pump();
        sample_counters(world);
    }
    if (caught != 50) return std::to_string(50 - caught) + " of 50 rewrites went unnoticed";
    return "";
}

std::string criterion_freshness() {
    SimWorld world(66);
    setup_actors(world);
    world.start_acquisition("alice", "FN1", "roaming-data");
    if (auto err = pump_clean(world); !err.empty()) return err;
    auto visa = world.visa_of("alice", "FN1");
    if (!visa) return "no visa issued";
    for (int s = 0; s < 10; ++s) {
        world.start_service("alice", *visa, "session");
        if (auto err = pump_clean(world); !err.empty()) return err;
    }

    const Trace& t = world.trace();
    std::set<Bytes> distinct;
    std::size_t total = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        for (const char* kind : {"sk1", "sk2", "sk3"}) {
            auto a = trace_key(t, "alice", kind, s);
            auto b = trace_key(t, "FN1", kind, s);
            if (!a || !b) return "missing session key";
            if (*a != *b) return "sides disagree on a session key";
            distinct.insert(*a);
            ++total;
        }
    }
    if (total != 30 || distinct.size() != 30)
        return std::to_string(distinct.size()) + " distinct keys out of " +
               std::to_string(total);

    FreshnessReport report = audit_key_freshness(t, world.suite());
    if (report.sessions != 10) return "audit saw the wrong session count";

    sample_counters(world);
    return "";
}

std::string criterion_revocation() {
    SimWorld world(77);
    setup_actors(world);

    auto acquire = [&]() -> std::optional<std::uint64_t> {
        std::set<std::uint64_t> before;
        for (auto v : world.mu("alice").visa_nos()) before.insert(v);
        world.start_acquisition("alice", "FN1", "roaming-data");
        if (!pump_clean(world).empty()) return std::nullopt;
        for (auto v : world.mu("alice").visa_nos())
            if (!before.contains(v)) return v;
        return std::nullopt;
    };

    auto visa_a = acquire();
    auto visa_b = acquire();
    if (!visa_a || !visa_b) return "visa issuance failed";

    std::size_t opener_a = world.captures().size();
    world.start_service("alice", *visa_a, "session-a");
    if (auto err = pump_clean(world); !err.empty()) return err;
    world.start_service("alice", *visa_b, "session-b");
    if (auto err = pump_clean(world); !err.empty()) return err;

    // targeted visa revocation: only visa A dies
    world.start_visa_revoke("alice", *visa_a);
    if (auto err = pump_clean(world); !err.empty()) return err;
    const auto& ledger = world.fn("FN1").ledger();
    if (ledger.at(*visa_a).valid) return "revoked visa still marked valid";
    if (!ledger.at(*visa_b).valid) return "unrelated visa was invalidated";

    auto denied = adversary_replay(world, opener_a, "FN1");
    if (!denied.reject || *denied.reject != RejectReason::Revoked)
        return "service under the revoked visa was not denied";
    world.pump();

    world.start_service("alice", *visa_b, "session-b2");
    if (auto err = pump_clean(world); !err.empty())
        return "the surviving visa stopped working: " + err;

    // passport revocation: everything under the passport dies
    world.start_passport_revoke("HN1", "alice");
    if (auto err = pump_clean(world); !err.empty()) return err;
    if (!world.hn("HN1").passport_revoked(1)) return "home ledger missed the revocation";
    if (!world.fn("FN1").passport_blocked(1)) return "visited ledger missed the revocation";
    if (ledger.at(*visa_b).valid) return "visa under the revoked passport still valid";

    world.start_service("alice", *visa_b, "session-b3");
    bool denied_b = false;
    for (const auto& out : world.pump())
        if (out.reject == RejectReason::Revoked) denied_b = true;
    if (!denied_b) return "service under the revoked passport was not denied";

    sample_counters(world);
    return "";
}

std::string criterion_mu_lightweight() {
    if (g_mu_asym.empty()) return "no samples collected";
    std::uint64_t worst = 0;
    for (auto v : g_mu_asym) worst = std::max(worst, v);
    if (worst != 0)
        return "a roaming client performed " + std::to_string(worst) +
               " asymmetric operations";
    if (g_infra_asym == 0) return "counter plumbing looks dead";
    return "";
}

std::string criterion_codec() {
    DeterministicRng rng(u64_be(0xACCE));
    auto u64 = [&]() {
        Bytes raw = rng.bytes(8);
        std::uint64_t v = 0;
        for (auto b : raw) v = (v << 8) | b;
        return v;
    };
    auto blob = [&](std::size_t max) { return rng.bytes(1 + rng.bytes(1)[0] % max); };
    auto label = [&]() {
        static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz";
        Bytes raw = rng.bytes(1 + rng.bytes(1)[0] % 12);
        std::string s;
        for (auto b : raw) s.push_back(alphabet[b % 26]);
        return s;
    };
    auto nonce = [&]() { return Nonce{rng.bytes(kNonceLen)}; };
    auto stamp = [&]() { return Timestamp{u64()}; };
    auto cert = [&]() {
        Certificate c;
        c.subject_id = label();
        c.subject_public_key = blob(64);
        c.role = u64() % 2 == 0 ? Role::NetworkProvider : Role::IdentityProvider;
        c.expiry = stamp();
        c.ca_signature = blob(64);
        return c;
    };
    auto message = [&](int variant) -> ProtocolMessage {
        switch (variant) {
            case 0:
                return VisaRequest{SealedPassport{blob(96)}, blob(96), u64(), stamp(),
                                   cert(), label(), nonce()};
            case 1:
                return ForwardToHN{SealedPassport{blob(96)}, blob(96), stamp(), cert(),
                                   stamp(), blob(64)};
            case 2: return HNDecision{blob(96), blob(96)};
            case 3: return VisaGrant{SealedVisa{blob(96)}, blob(96), blob(64), nonce()};
            case 4: return ServiceRequest{label(), SealedVisa{blob(96)}, blob(64)};
            case 5: return ServiceResponse{blob(64), blob(64)};
            case 6: return PassportRevoke{blob(96)};
            case 7: return VisaRevoke{blob(96)};
            default:
                return Reject{static_cast<RejectReason>(1 + u64() % 19)};
        }
    };

    for (int i = 0; i < 1000; ++i) {
        ProtocolMessage msg = message(i % 9);
        Bytes enc = encode(msg);
        auto back = decode(BytesView{enc});
        if (!back) return "round-trip decode failed";
        if (encode(*back) != enc) return "round-trip re-encode differs";
    }

    int decoded = 0;
    for (int i = 0; i < 10000; ++i) {
        Bytes junk = rng.bytes(static_cast<std::size_t>(i % 301));
        auto out = decode(BytesView{junk}); // must never crash
        if (out) ++decoded;
    }
    if (decoded > 10) return "random bytes decoded suspiciously often";
    return "";
}

std::string criterion_determinism() {
    Scenario happy = parse_scenario_file(std::string(PVKIT_SCENARIO_DIR) + "/happy_path.scn");
    RunResult a = run_scenario(happy);
    RunResult b = run_scenario(happy);
    if (!a.ok() || !b.ok()) return "the bundled scenario failed";
    if (a.trace.to_text() != b.trace.to_text()) return "same seed, different trace";

    RunResult c = run_scenario(happy, 999);
    if (a.trace.to_text() == c.trace.to_text()) return "seed change left the trace unchanged";

    Scenario replay = parse_scenario_file(std::string(PVKIT_SCENARIO_DIR) + "/replay_attack.scn");
    RunResult d = run_scenario(replay);
    RunResult e = run_scenario(replay);
    if (!d.ok() || !e.ok()) return "the replay scenario failed";
    if (d.trace.to_text() != e.trace.to_text()) return "replay scenario not deterministic";
    return "";
}

} // namespace

int main() {
    run_criterion(1, "one visa, three sessions, byte-equal keys, full mutual trust",
                  criterion_happy_path);
    run_criterion(2, "independent derivation oracle matches 100 randomized runs",
                  criterion_oracle);
    run_criterion(3, "100 forged passports and 100 forged visas all rejected",
                  criterion_forgery);
    run_criterion(4, "stale and repeated messages rejected across 50 traces",
                  criterion_replay);
    run_criterion(5, "identity rewriting caught in 50 of 50 intercepted runs",
                  criterion_mitm);
    run_criterion(6, "30 session keys over 10 sessions pairwise distinct",
                  criterion_freshness);
    run_criterion(7, "visa and passport revocation deny service in one run",
                  criterion_revocation);
    run_criterion(8, "the roaming client performed zero asymmetric operations",
                  criterion_mu_lightweight);
    run_criterion(9, "codec survives fuzzing and round-trips every variant",
                  criterion_codec);
    run_criterion(10, "scenario traces are a pure function of the seed",
                  criterion_determinism);

    std::printf("acceptance: %d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
