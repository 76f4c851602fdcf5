#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "pvkit/crypto.hpp"
#include "pvkit/encode.hpp"
#include "pvkit/harness.hpp"
#include "pvkit/wire.hpp"

using namespace pvkit;

namespace {

struct Gen {
    DeterministicRng rng{u64_be(9000)};

    std::uint64_t u64() {
        Bytes b = rng.bytes(8);
        std::uint64_t v = 0;
        for (std::uint8_t x : b) v = (v << 8) | x;
        return v;
    }
    std::size_t upto(std::size_t n) { return n == 0 ? 0 : u64() % (n + 1); }
    Bytes blob(std::size_t max = 80) { return rng.bytes(upto(max)); }
    std::string label(std::size_t max = 24) {
        static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz-0123456789";
        std::string s;
        std::size_t n = upto(max);
        for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[u64() % (sizeof(alphabet) - 1)]);
        return s;
    }
    Nonce nonce() { return Nonce{rng.bytes(kNonceLen)}; }
    Timestamp time() { return Timestamp{u64()}; }
    Certificate cert() {
        Certificate c;
        c.subject_id = label();
        c.subject_public_key = rng.bytes(64);
        c.role = (u64() % 2) ? Role::NetworkProvider : Role::IdentityProvider;
        c.expiry = time();
        c.ca_signature = rng.bytes(64);
        return c;
    }

    ProtocolMessage message(int variant) {
        switch (variant % 9) {
        case 0: {
            VisaRequest m;
            m.passport = SealedPassport{blob()};
            m.cipher_to_hn = blob();
            m.pass_no = u64();
            m.t_mu = time();
            m.cert_hn = cert();
            m.descriptor = label();
            m.r2_mu = nonce();
            return m;
        }
        case 1: {
            ForwardToHN m;
            m.passport = SealedPassport{blob()};
            m.cipher_to_hn = blob();
            m.t_mu = time();
            m.cert_fn = cert();
            m.t_fn = time();
            m.sealed_r_fn = blob();
            return m;
        }
        case 2: return HNDecision{blob(), blob()};
        case 3: {
            VisaGrant m;
            m.visa = SealedVisa{blob()};
            m.for_mu = blob();
            m.key_delivery = blob();
            m.r2_fn = nonce();
            return m;
        }
        case 4: {
            ServiceRequest m;
            m.descriptor = label();
            m.visa = SealedVisa{blob()};
            m.cipher1 = blob();
            return m;
        }
        case 5: return ServiceResponse{blob(), blob()};
        case 6: return PassportRevoke{blob()};
        case 7: return VisaRevoke{blob()};
        default:
            return Reject{static_cast<RejectReason>(1 + u64() % 19)};
        }
    }
};

} // namespace

TEST_CASE("every variant round-trips over 1000 randomized messages") {
    Gen gen;
    const char* names[9] = {"VisaRequest",    "ForwardToHN", "HNDecision",
                            "VisaGrant",      "ServiceRequest", "ServiceResponse",
                            "PassportRevoke", "VisaRevoke",  "Reject"};
    for (int i = 0; i < 1026; ++i) {
        ProtocolMessage msg = gen.message(i);
        Bytes enc = encode(msg);
        auto back = decode(enc);
        REQUIRE(back.has_value());
        CHECK(*back == msg);
        CHECK(std::string(variant_name(*back)) == names[i % 9]);
        CHECK(encode(*back) == enc);
    }
}

TEST_CASE("encoding is deterministic") {
    Gen a;
    Gen b;
    for (int i = 0; i < 18; ++i) CHECK(encode(a.message(i)) == encode(b.message(i)));
}

TEST_CASE("decode survives 10000 fuzz inputs without crashing") {
    DeterministicRng rng{u64_be(9001)};
    std::size_t decoded = 0;
    for (int i = 0; i < 10'000; ++i) {
        Bytes junk = rng.bytes(i % 301);
        if (auto msg = decode(junk)) {
            ++decoded;
            (void)encode(*msg);
        }
    }
    // random bytes essentially never form a valid strict encoding
    CHECK(decoded < 10);
}

TEST_CASE("decode survives mutations of valid encodings") {
    Gen gen;
    DeterministicRng rng{u64_be(9002)};
    for (int i = 0; i < 600; ++i) {
        Bytes enc = encode(gen.message(i));
        if (enc.empty()) continue;
        Bytes mutated = enc;
        mutated[rng.bytes(1)[0] % mutated.size()] ^= (1 + rng.bytes(1)[0] % 255);
        (void)decode(mutated);
        Bytes truncated(enc.begin(), enc.begin() + static_cast<std::ptrdiff_t>(
                                                       rng.bytes(1)[0] % enc.size()));
        CHECK_FALSE(decode(truncated).has_value());
    }
}

TEST_CASE("trailing bytes invalidate every variant") {
    Gen gen;
    for (int i = 0; i < 9; ++i) {
        Bytes enc = encode(gen.message(i));
        REQUIRE(decode(enc).has_value());
        enc.push_back(0x00);
        CHECK_FALSE(decode(enc).has_value());
    }
}

TEST_CASE("empty and unknown-tag inputs decode to nothing") {
    CHECK_FALSE(decode(Bytes{}).has_value());
    CHECK_FALSE(decode(Bytes{0x00}).has_value());
    CHECK_FALSE(decode(Bytes{0x0A}).has_value());
    CHECK_FALSE(decode(Bytes{0xFF, 0x01, 0x02}).has_value());
}

TEST_CASE("reject reasons survive the wire and invalid codes are refused") {
    for (int code = 1; code <= 19; ++code) {
        auto reason = static_cast<RejectReason>(code);
        Bytes enc = encode(ProtocolMessage{Reject{reason}});
        auto back = decode(enc);
        REQUIRE(back.has_value());
        CHECK(std::get<Reject>(*back).reason == reason);
        CHECK(reject_reason_from_string(to_string(reason)) == reason);

        Bytes bad = enc;
        bad.back() = 0;
        CHECK_FALSE(decode(bad).has_value());
        bad.back() = 200;
        CHECK_FALSE(decode(bad).has_value());
    }
}

TEST_CASE("describe names every variant with content") {
    Gen gen;
    for (int i = 0; i < 9; ++i) {
        ProtocolMessage msg = gen.message(i);
        std::string text = describe(msg);
        CHECK(text.find(variant_name(msg)) != std::string::npos);
        CHECK(text.size() > std::string(variant_name(msg)).size());
    }
}

TEST_CASE("sealed plaintext helpers round-trip strictly") {
    DeterministicRng rng{u64_be(9003)};
    auto nonce = [&] { return Nonce{rng.bytes(kNonceLen)}; };

    CipherToHnPlain a{"FN1", nonce(), Timestamp{123}};
    auto a2 = CipherToHnPlain::decode(a.encode());
    REQUIRE(a2.has_value());
    CHECK(a2->id_fn == a.id_fn);
    CHECK(a2->r_mu == a.r_mu);
    CHECK(a2->t_mu == a.t_mu);

    ForFnPlain b{77, true, nonce(), nonce(), rng.bytes(64)};
    auto b2 = ForFnPlain::decode(b.encode());
    REQUIRE(b2.has_value());
    CHECK(b2->pass_no == 77);
    CHECK(b2->valid_mu);
    CHECK(b2->sig == b.sig);
    CHECK(b.signed_preimage() == b2->signed_preimage());

    ForMuPlain c{"FN1", true, nonce(), nonce(), Timestamp{99}};
    auto c2 = ForMuPlain::decode(c.encode());
    REQUIRE(c2.has_value());
    CHECK(c2->valid_fn == c.valid_fn);
    CHECK(c2->r_fn == c.r_fn);

    KeyDeliveryPlain d{SymmetricKey{rng.bytes(kDigestLen)}, 5, Timestamp{1000}};
    auto d2 = KeyDeliveryPlain::decode(d.encode());
    REQUIRE(d2.has_value());
    CHECK(d2->k_mu_fn == d.k_mu_fn);
    CHECK(d2->visa_no == 5);

    ServiceProofPlain e{nonce(), 5};
    auto e2 = ServiceProofPlain::decode(e.encode());
    REQUIRE(e2.has_value());
    CHECK(e2->r_mu_prime == e.r_mu_prime);

    ServiceEchoPlain g{nonce(), 77};
    auto g2 = ServiceEchoPlain::decode(g.encode());
    REQUIRE(g2.has_value());
    CHECK(g2->pass_no == 77);

    PassportRevokePlain h{77, rng.bytes(64)};
    auto h2 = PassportRevokePlain::decode(h.encode());
    REQUIRE(h2.has_value());
    CHECK(h2->pass_no == 77);
    CHECK(h.signed_preimage() == h2->signed_preimage());

    VisaRevokePlain k{77, 5, rng.bytes(40)};
    auto k_outer = VisaRevokePlain::decode(k.encode(true), true);
    REQUIRE(k_outer.has_value());
    CHECK(k_outer->inner == k.inner);
    VisaRevokePlain inner_only{77, 5, {}};
    auto k_inner = VisaRevokePlain::decode(inner_only.encode(false), false);
    REQUIRE(k_inner.has_value());
    CHECK(k_inner->visa_no == 5);
    CHECK_FALSE(VisaRevokePlain::decode(k.encode(true), false).has_value());

    // strictness: trailing bytes refused everywhere
    Bytes t = a.encode();
    t.push_back(0);
    CHECK_FALSE(CipherToHnPlain::decode(t).has_value());
}
