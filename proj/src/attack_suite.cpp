#include "pvkit/attack_suite.hpp"

#include <memory>
#include <sstream>

#include "pvkit/encode.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/harness.hpp"
#include "pvkit/tokens.hpp"

namespace pvkit {

bool AttackReport::all_upheld() const {
    for (const auto& c : claims)
        if (!c.upheld) return false;
    return !claims.empty();
}

std::string AttackReport::to_text() const {
    std::ostringstream out;
    for (const auto& c : claims)
        out << (c.upheld ? "[ ok ] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    return out.str();
}

namespace {

constexpr int kForgeryTrials = 100;
constexpr int kTamperProbes = 32;

void setup_roaming_world(SimWorld& world, bool second_fn = false) {
    world.add_ca("rootca");
    world.add_hn("HN1");
    world.add_fn("FN1");
    if (second_fn) world.add_fn("FN2");
    world.add_mu("alice", "HN1");
    world.register_mu("alice");
}

/// Sealed body||signature framing, assembled by hand so the attacker can
/// pair a body with a signature it did not earn.
Bytes seal_relabeled(ActorCrypto& atk, const Bytes& seal_pk, BytesView body, BytesView sig) {
    ByteWriter w;
    w.put_field(body);
    w.put_field(sig);
    return atk.seal_asym(seal_pk, w.bytes());
}

AttackReport::Claim forged_passports_rejected(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed);
    world.use_suite(suite);
    setup_roaming_world(world);

    DeterministicRng root{u64_be(seed)};
    ActorCrypto atk(suite, std::make_unique<DeterministicRng>(root.fork("forger")));
    KeyPair attacker = world.make_attacker_keys("mallory");
    const KeyPair& hn_keys = world.hn("HN1").keys();
    Timestamp now = world.clock().now();

    int rejected = 0;
    for (int i = 0; i < kForgeryTrials; ++i) {
        PassportBody body;
        body.id_mu = "mallory-" + std::to_string(i);
        body.pass_no = 900000 + static_cast<std::uint64_t>(i);
        body.expiry = Timestamp{now.ticks + 86'400'000};
        body.data = {{"passport-type", "roaming"}, {"mu-name", body.id_mu}};
        body.k_mu_hn = SymmetricKey{atk.random_bytes(kDigestLen)};

        SealedPassport forged;
        switch (i % 3) {
        case 0: {
            // attacker signature under the genuine seal key
            KeyPair franken{hn_keys.public_key, attacker.private_key, "franken"};
            forged = make_passport(atk, franken, body);
            break;
        }
        case 1:
            // sealed for the attacker itself; the verifier cannot open it
            forged = make_passport(atk, attacker, body);
            break;
        default: {
            // a genuine signature over different contents
            PassportBody honest = body;
            honest.id_mu = "someone-else";
            Bytes sig = atk.sign(hn_keys.private_key, honest.encode());
            forged.ciphertext = seal_relabeled(atk, hn_keys.public_key, body.encode(), sig);
            break;
        }
        }

        ForwardToHN fwd;
        fwd.passport = forged;
        fwd.cipher_to_hn = atk.random_bytes(48);
        fwd.t_mu = world.clock().now();
        fwd.cert_fn = world.fn("FN1").certificate();
        fwd.t_fn = world.clock().now();
        fwd.sealed_r_fn = atk.random_bytes(48);

        auto res = world.hn("HN1").handle_forward(fwd);
        if (!res.ok() && res.error().reason == RejectReason::BadPassport) ++rejected;
    }

    return {"passport-forgery-rejected", rejected == kForgeryTrials,
            std::to_string(rejected) + "/" + std::to_string(kForgeryTrials) +
                " forged passports rejected"};
}

AttackReport::Claim forged_visas_rejected(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 1);
    world.use_suite(suite);
    setup_roaming_world(world);

    DeterministicRng root{u64_be(seed + 1)};
    ActorCrypto atk(suite, std::make_unique<DeterministicRng>(root.fork("forger")));
    KeyPair attacker = world.make_attacker_keys("mallory");
    const KeyPair& fn_keys = world.fn("FN1").keys();
    Timestamp now = world.clock().now();

    int rejected = 0;
    for (int i = 0; i < kForgeryTrials; ++i) {
        VisaBody body;
        body.pass_no = 900000 + static_cast<std::uint64_t>(i);
        body.visa_no = 7000 + static_cast<std::uint64_t>(i);
        body.expiry = Timestamp{now.ticks + 86'400'000};
        body.data = {{"visa-type", "service"}};
        body.k_mu_fn = SymmetricKey{atk.random_bytes(kDigestLen)};

        SealedVisa forged;
        switch (i % 3) {
        case 0: {
            KeyPair franken{fn_keys.public_key, attacker.private_key, "franken"};
            forged = make_visa(atk, franken, body);
            break;
        }
        case 1:
            forged = make_visa(atk, attacker, body);
            break;
        default: {
            VisaBody honest = body;
            honest.visa_no += 100000;
            Bytes sig = atk.sign(fn_keys.private_key, honest.encode());
            forged.ciphertext = seal_relabeled(atk, fn_keys.public_key, body.encode(), sig);
            break;
        }
        }

        ServiceRequest req;
        req.descriptor = "forged-session";
        req.visa = forged;
        req.cipher1 = atk.random_bytes(48);

        auto res = world.fn("FN1").handle_service_request(req, to_bytes("svc:none"));
        if (!res.ok() && res.error().reason == RejectReason::BadVisa) ++rejected;
    }

    return {"visa-forgery-rejected", rejected == kForgeryTrials,
            std::to_string(rejected) + "/" + std::to_string(kForgeryTrials) +
                " forged visas rejected"};
}

AttackReport::Claim mutual_authentication(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 2);
    world.use_suite(suite);
    setup_roaming_world(world);

    world.start_acquisition("alice", "FN1", "roaming-data");
    world.pump();
    auto visa = world.visa_of("alice", "FN1");
    if (!visa) return {"mutual-authentication", false, "visa acquisition did not complete"};
    world.start_service("alice", *visa, "first-session");
    world.pump();

    bool beliefs = mutual_auth_beliefs_held(world.trace(), "alice", "FN1");
    bool trust_up = world.trust().level("alice", "FN1") == TrustLevel::Full &&
                    world.trust().level("FN1", "alice") == TrustLevel::Full;
    std::string detail = beliefs ? "both ends reached all authentication conclusions"
                                 : "missing authentication conclusions";
    if (!trust_up) detail += "; trust did not reach full";
    return {"mutual-authentication", beliefs && trust_up, detail};
}

AttackReport::Claim acquisition_replay_rejected(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 3);
    world.use_suite(suite);
    setup_roaming_world(world);

    world.start_acquisition("alice", "FN1", "roaming-data"); // capture #0
    world.pump();
    world.advance_clock(kDefaultFreshnessWindowMs + 10'000);
    auto out = adversary_replay(world, 0, "FN1");
    world.pump();

    bool upheld = out.reject && *out.reject == RejectReason::Stale;
    return {"acquisition-replay-rejected", upheld,
            upheld ? "stale first message refused beyond the freshness window"
                   : "replayed first message was not refused as stale: " + out.summary};
}

AttackReport::Claim service_replay_rejected(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 4);
    world.use_suite(suite);
    setup_roaming_world(world);

    world.start_acquisition("alice", "FN1", "roaming-data");
    world.pump();
    auto visa = world.visa_of("alice", "FN1");
    if (!visa) return {"service-replay-rejected", false, "visa acquisition did not complete"};

    std::size_t request_capture = world.captures().size();
    world.start_service("alice", *visa, "first-session");
    world.pump();

    auto out = adversary_replay(world, request_capture, "FN1");
    world.pump();

    bool upheld = out.reject && *out.reject == RejectReason::BadProof;
    return {"service-replay-rejected", upheld,
            upheld ? "replayed service opener failed against the advanced key chain"
                   : "replayed service opener was not refused: " + out.summary};
}

AttackReport::Claim mitm_id_rewrite_rejected(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 5);
    world.use_suite(suite);
    setup_roaming_world(world, true);

    world.start_acquisition("alice", "FN2", "roaming-data");
    world.redirect_next("FN1");
    world.deliver_next(); // FN1 relays under its own identity
    auto verdict = world.deliver_next();
    world.pump();

    bool upheld = verdict.reject && *verdict.reject == RejectReason::IdMismatch;
    return {"mitm-id-rewrite-rejected", upheld,
            upheld ? "home network caught the visited-network identity rewrite"
                   : "identity rewrite was not caught: " + verdict.summary};
}

AttackReport::Claim ciphertext_integrity(std::uint64_t seed, const CryptoSuite& suite) {
    DeterministicRng rng{u64_be(seed + 6)};

    int caught = 0;
    for (int i = 0; i < kTamperProbes; ++i) {
        SymmetricKey key{rng.bytes(kDigestLen)};
        Bytes pt = rng.bytes(static_cast<std::size_t>(i) * 7 + 1);
        Bytes ct = suite.enc_sym(key, pt, rng);
        ct[ct.size() - 1 - (static_cast<std::size_t>(i) % ct.size())] ^= 0x01;
        if (!suite.dec_sym(key, ct)) ++caught;
    }

    // On-wire variant: flip one byte inside the proof ciphertext. With an
    // authenticated cipher the visited network must refuse the session.
    SimWorld world(seed + 6);
    world.use_suite(suite);
    setup_roaming_world(world);
    world.start_acquisition("alice", "FN1", "roaming-data");
    world.pump();
    auto visa = world.visa_of("alice", "FN1");
    bool wire_caught = false;
    if (visa) {
        world.start_service("alice", *visa, "first-session");
        std::size_t size = world.captures().back().bytes.size();
        world.tamper_next(size - 28); // lands in the ciphertext body, not the framing
        auto out = world.deliver_next();
        world.pump();
        wire_caught = out.reject.has_value();
    }

    bool upheld = caught == kTamperProbes && wire_caught;
    return {"ciphertext-integrity", upheld,
            std::to_string(caught) + "/" + std::to_string(kTamperProbes) +
                " direct tamper probes refused; on-wire tamper " +
                (wire_caught ? "refused" : "ACCEPTED")};
}

AttackReport::Claim session_key_freshness(std::uint64_t seed, const CryptoSuite& suite) {
    SimWorld world(seed + 7);
    world.use_suite(suite);
    setup_roaming_world(world);

    world.start_acquisition("alice", "FN1", "roaming-data");
    world.pump();
    auto visa = world.visa_of("alice", "FN1");
    if (!visa) return {"session-key-freshness", false, "visa acquisition did not complete"};
    for (int i = 0; i < 3; ++i) {
        world.start_service("alice", *visa, "session-" + std::to_string(i));
        world.pump();
    }

    try {
        FreshnessReport rep = audit_key_freshness(world.trace(), suite);
        return {"session-key-freshness", true,
                std::to_string(rep.sessions) + " sessions, " +
                    std::to_string(rep.session_keys.size()) +
                    " derivations, all distinct and agreed"};
    } catch (const FreshnessViolation& v) {
        return {"session-key-freshness", false, v.what()};
    }
}

} // namespace

AttackReport run_attack_suite(std::uint64_t seed, const CryptoSuite& suite) {
    AttackReport rep;
    rep.claims.push_back(forged_passports_rejected(seed, suite));
    rep.claims.push_back(forged_visas_rejected(seed, suite));
    rep.claims.push_back(mutual_authentication(seed, suite));
    rep.claims.push_back(acquisition_replay_rejected(seed, suite));
    rep.claims.push_back(service_replay_rejected(seed, suite));
    rep.claims.push_back(mitm_id_rewrite_rejected(seed, suite));
    rep.claims.push_back(ciphertext_integrity(seed, suite));
    rep.claims.push_back(session_key_freshness(seed, suite));
    return rep;
}

} // namespace pvkit
