#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pvkit/errors.hpp"
#include "pvkit/harness.hpp"
#include "pvkit/scenario_text.hpp"
#include "pvkit/sodium_suite.hpp"

using namespace pvkit;

namespace {

const std::string kSetup = R"(seed 42
ca rootca
hn HN1
fn FN1
mu alice home=HN1
register alice
)";

const std::string kHappy = kSetup + R"(expect trust alice FN1 none
acquire alice FN1 "roaming-data"
pump expect ok
expect trust alice FN1 partial
expect trust FN1 alice partial
expect keys-agree alice FN1
service alice FN1 "first"
pump expect ok
service alice FN1 "second"
pump expect ok
expect trust alice FN1 full
expect trust FN1 alice full
expect keys-agree alice FN1
expect mu-asym-zero alice
expect queue 0
)";

void add_roaming_actors(SimWorld& world) {
    world.add_ca("rootca");
    world.add_hn("HN1");
    world.add_fn("FN1");
    world.add_mu("alice", "HN1");
    world.register_mu("alice");
}

std::size_t parse_error_line(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioParseError& e) {
        return e.line_no;
    }
    return 0;
}

} // namespace

TEST_CASE("a scripted run is a pure function of text and seed") {
    Scenario s = parse_scenario(kHappy);
    CHECK(s.seed == 42);

    RunResult a = run_scenario(s);
    RunResult b = run_scenario(s);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.trace.to_text() == b.trace.to_text());
    CHECK(!a.trace.entries.empty());
    CHECK(a.trace.to_text().find("world seed=42") != std::string::npos);

    RunResult c = run_scenario(s, 43);
    REQUIRE(c.ok());
    CHECK(a.trace.to_text() != c.trace.to_text());
    CHECK(c.trace.to_text().find("world seed=43") != std::string::npos);
}

TEST_CASE("parse errors carry the offending line number") {
    CHECK(parse_error_line("bogus-step\n") == 1);
    CHECK(parse_error_line("ca rootca\nhn\n") == 2);
    CHECK(parse_error_line("deliver expect reject not-a-reason\n") == 1);
    CHECK(parse_error_line("deliver expect maybe\n") == 1);
    CHECK(parse_error_line("pump expect silent\n") == 1);
    CHECK(parse_error_line("tamper abc\n") == 1);
    CHECK(parse_error_line("advance 99999999999999999999999\n") == 1);
    CHECK(parse_error_line("seed 1\nseed 2\n") == 2);
    CHECK(parse_error_line("acquire alice FN1 \"oops\n") == 1);
    CHECK(parse_error_line("inject alice FN1 zz\n") == 1);
    CHECK(parse_error_line("inject alice FN1 abc\n") == 1); // odd-length hex
    CHECK(parse_error_line("mu alice HN1\n") == 1);
    CHECK(parse_error_line("replay 0 FN1\n") == 1);
    CHECK(parse_error_line("expect trust a b sorta\n") == 1);
    CHECK(parse_error_line("expect nothing\n") == 1);
    CHECK(parse_error_line("ca one two\n") == 1);

    CHECK_NOTHROW(parse_scenario("# comment only\n\n  \n"));
    Scenario s = parse_scenario("ca rootca # trailing comment\ninject a b deadbeef\n");
    CHECK(s.steps.size() == 2);
}

TEST_CASE("structural mistakes throw instead of failing softly") {
    CHECK_THROWS_AS(run_scenario(parse_scenario("acquire alice FN1 \"x\"\n")), ScenarioError);
    CHECK_THROWS_AS(run_scenario(parse_scenario("deliver\n")), ScenarioError);
    CHECK_THROWS_AS(run_scenario(parse_scenario(kSetup + "acquire alice FN1 \"x\"\ntamper 100000\n")),
                    ScenarioError);
    CHECK_THROWS_AS(run_scenario(parse_scenario("ca a\nca b\n")), ScenarioError);
}

TEST_CASE("expectation misses are collected and the run continues") {
    RunResult r = run_scenario(parse_scenario(kSetup + R"(expect queue 3
acquire alice FN1 "x"
pump expect reject stale
expect queue 0
)"));
    CHECK_FALSE(r.ok());
    CHECK(r.failures.size() == 2);
    CHECK(r.failures[0].find("line 7") != std::string::npos);
    CHECK(r.trace.to_text().find("FAILED expectation") != std::string::npos);

    RunResult none = run_scenario(parse_scenario(kSetup + "expect keys-agree alice FN1\n"));
    CHECK_FALSE(none.ok()); // no visa exists yet, nothing to compare
}

TEST_CASE("the queue supports drop, duplicate, delay and inject") {
    SimWorld world(99);
    add_roaming_actors(world);

    world.start_acquisition("alice", "FN1", "x");
    CHECK(world.queue_size() == 1);
    world.drop_next();
    CHECK(world.queue_size() == 0);

    world.start_acquisition("alice", "FN1", "x");
    auto outs = world.pump();
    REQUIRE(!outs.empty());
    for (const auto& o : outs) CHECK_FALSE(o.reject.has_value());
    REQUIRE(world.visa_of("alice", "FN1").has_value());
    std::uint64_t visa = *world.visa_of("alice", "FN1");
    CHECK(world.trust().level("alice", "FN1") == TrustLevel::Partial);
    CHECK(world.trust().level("FN1", "alice") == TrustLevel::Partial);

    SUBCASE("a duplicated service opener is served once and rejected once") {
        world.start_service("alice", visa, "s");
        world.duplicate_next();
        CHECK(world.queue_size() == 2);
        auto outcomes = world.pump();
        std::size_t rejects = 0;
        for (const auto& o : outcomes)
            if (o.reject.has_value()) {
                ++rejects;
                CHECK(*o.reject == RejectReason::BadProof);
            }
        CHECK(rejects == 1);
        CHECK(world.mu("alice").sessions_completed(visa) == 1);
        CHECK(world.trust().level("FN1", "alice") == TrustLevel::Full);
    }

    SUBCASE("a flipped tag byte is recorded as malformed") {
        world.start_service("alice", visa, "s");
        world.tamper_next(0);
        auto out = world.deliver_next();
        REQUIRE(out.reject.has_value());
        CHECK(*out.reject == RejectReason::Malformed);
        world.pump();
    }

    SUBCASE("delay reorders the queue head") {
        world.inject("alice", "FN1", Bytes{0xDE, 0xAD});
        world.start_service("alice", visa, "s");
        // queue: [garbage, opener]; move garbage behind the opener
        world.delay_next(1);
        auto first = world.deliver_next();
        CHECK_FALSE(first.reject.has_value());
        auto second = world.deliver_next();
        REQUIRE(second.reject.has_value());
        CHECK(*second.reject == RejectReason::Malformed);
        world.pump();
    }

    SUBCASE("captures record claimed sender and recipient") {
        REQUIRE(!world.captures().empty());
        CHECK(world.captures()[0].from == "alice");
        CHECK(world.captures()[0].to == "FN1");
    }

    SUBCASE("pump guards against runaway delivery") {
        world.start_service("alice", visa, "s");
        CHECK_THROWS_AS(world.pump(0), ScenarioError);
        world.pump();
    }
}

TEST_CASE("redirecting a request to the wrong network is caught upstream") {
    SimWorld world(17);
    add_roaming_actors(world);
    world.add_fn("FN2");

    world.start_acquisition("alice", "FN2", "x");
    world.redirect_next("FN1");
    auto relayed = world.deliver_next();
    CHECK(relayed.delivered);
    CHECK(relayed.response_enqueued);
    auto verdict = world.deliver_next();
    REQUIRE(verdict.reject.has_value());
    CHECK(*verdict.reject == RejectReason::IdMismatch);
}

TEST_CASE("replaying a captured acquisition outside the window goes stale") {
    SimWorld world(23);
    add_roaming_actors(world);
    world.start_acquisition("alice", "FN1", "x");
    world.pump();
    REQUIRE(world.visa_of("alice", "FN1").has_value());

    world.advance_clock(kDefaultFreshnessWindowMs + 5000);
    auto out = adversary_replay(world, 0, "FN1");
    REQUIRE(out.reject.has_value());
    CHECK(*out.reject == RejectReason::Stale);
    world.pump();
}

TEST_CASE("trust only ever rises and tracks the protocol milestones") {
    SimWorld world(31);
    add_roaming_actors(world);
    CHECK(world.trust().level("alice", "HN1") == TrustLevel::Full);
    CHECK(world.trust().level("alice", "FN1") == TrustLevel::None);

    world.start_acquisition("alice", "FN1", "x");
    world.pump();
    CHECK(world.trust().level("alice", "FN1") == TrustLevel::Partial);
    CHECK(world.trust().level("FN1", "HN1") == TrustLevel::Partial);
    CHECK(world.trust().level("HN1", "FN1") == TrustLevel::Partial);

    world.start_service("alice", *world.visa_of("alice", "FN1"), "s");
    world.pump();
    CHECK(world.trust().level("alice", "FN1") == TrustLevel::Full);
    CHECK(world.trust().level("FN1", "alice") == TrustLevel::Full);

    // a later partial-trust moment must not demote the ledger
    world.start_acquisition("alice", "FN1", "x");
    world.pump();
    CHECK(world.trust().level("alice", "FN1") == TrustLevel::Full);
}

TEST_CASE("trust and reject names round-trip") {
    CHECK(trust_level_from_string("none") == TrustLevel::None);
    CHECK(trust_level_from_string("partial") == TrustLevel::Partial);
    CHECK(trust_level_from_string("full") == TrustLevel::Full);
    CHECK_FALSE(trust_level_from_string("sorta").has_value());
    CHECK(std::string(to_string(TrustLevel::Partial)) == "partial");

    CHECK(reject_reason_from_string("stale") == RejectReason::Stale);
    CHECK(reject_reason_from_string("bad_proof") == RejectReason::BadProof);
    CHECK_FALSE(reject_reason_from_string("nope").has_value());
}

TEST_CASE("the freshness audit accepts a clean two-session trace") {
    RunResult r = run_scenario(parse_scenario(kHappy));
    REQUIRE(r.ok());

    FreshnessReport report = audit_key_freshness(r.trace);
    CHECK(report.sessions == 2);
    CHECK(report.session_keys.size() == 12); // 2 sides x 3 stages x 2 sessions
    CHECK(!report.to_text().empty());

    CHECK(mutual_auth_beliefs_held(r.trace, "alice", "FN1"));
    CHECK_FALSE(mutual_auth_beliefs_held(r.trace, "alice", "FN9"));
    CHECK_FALSE(mutual_auth_beliefs_held(Trace{}, "alice", "FN1"));
}

TEST_CASE("the freshness audit rejects traces it must reject") {
    SodiumSuite suite;
    auto key = [](std::uint8_t fill) {
        return SymmetricKey{Bytes(kDigestLen, fill)};
    };

    SUBCASE("one session is not enough evidence") {
        RunResult r = run_scenario(parse_scenario(kSetup + R"(acquire alice FN1 "x"
pump expect ok
service alice FN1 "only"
pump expect ok
)"));
        REQUIRE(r.ok());
        CHECK_THROWS_AS(audit_key_freshness(r.trace), std::invalid_argument);
    }

    SUBCASE("a repeated session key across sessions") {
        Trace t;
        t.keys.push_back({"alice", "sk1", "visa:1", 1, key(0xAA)});
        t.keys.push_back({"alice", "sk1", "visa:1", 2, key(0xAA)});
        CHECK_THROWS_AS(audit_key_freshness(t, suite), FreshnessViolation);
    }

    SUBCASE("the two sides disagree on one session's key") {
        Trace t;
        t.keys.push_back({"alice", "sk1", "visa:1", 1, key(0x01)});
        t.keys.push_back({"FN1", "sk1", "visa:1", 1, key(0x02)});
        t.keys.push_back({"alice", "sk1", "visa:1", 2, key(0x03)});
        t.keys.push_back({"FN1", "sk1", "visa:1", 2, key(0x03)});
        CHECK_THROWS_AS(audit_key_freshness(t, suite), FreshnessViolation);
    }

    SUBCASE("a visa master key used to key traffic") {
        Trace t;
        t.keys.push_back({"alice", "sk1", "visa:1", 1, key(0x01)});
        t.keys.push_back({"alice", "sk1", "visa:1", 2, key(0x02)});
        SymmetricKey master = key(0x77);
        t.keys.push_back({"alice", "k_mu_fn", "visa:1", 0, master});
        Bytes fp = suite.hash(master.bytes);
        fp.resize(8);
        t.key_uses.push_back({"alice", "enc", fp});
        try {
            audit_key_freshness(t, suite);
            FAIL("expected a freshness violation");
        } catch (const FreshnessViolation& e) {
            CHECK(std::string(e.what()).find("master key") != std::string::npos);
        }
    }
}

TEST_CASE("revocation flows run end to end under the scheduler") {
    RunResult r = run_scenario(parse_scenario(kSetup + R"(acquire alice FN1 "x"
pump expect ok
service alice FN1 "one"
pump expect ok
revoke-visa alice FN1
pump expect ok
revoke-passport HN1 alice
pump expect ok
expect queue 0
)"));
    REQUIRE(r.ok());
    CHECK(r.trace.to_text().find("revoked") != std::string::npos);
}

TEST_CASE("scenario service and revoke steps fail softly when no visa exists") {
    RunResult r = run_scenario(parse_scenario(kSetup + "service alice FN1 \"x\"\n"));
    CHECK_FALSE(r.ok());
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].find("visa") != std::string::npos);
}
