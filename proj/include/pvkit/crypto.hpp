#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pvkit/bytes.hpp"
#include "pvkit/errors.hpp"

namespace pvkit {

// The suite is an interface so instantiations are swappable: any standard
// signature scheme, any hybrid public-key encryption, any AEAD and any
// 256-bit hash satisfy it. The default instantiation lives in
// sodium_suite.hpp. All randomness is drawn from a caller-supplied Rng so
// simulation runs are reproducible from a seed.

constexpr std::size_t kDigestLen = 32;
constexpr std::size_t kNonceLen = 16;
constexpr std::size_t kMaxSealPlaintext = 1u << 20; // hybrid envelope, 1 MiB

constexpr std::uint64_t kDefaultFreshnessWindowMs = 120'000;

struct KeyPair {
    Bytes public_key;
    Bytes private_key;
    std::string role_label;
};

struct SymmetricKey {
    Bytes bytes;

    friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
    friend auto operator<=>(const SymmetricKey&, const SymmetricKey&) = default;
};

struct Nonce {
    Bytes bytes;

    friend bool operator==(const Nonce&, const Nonce&) = default;
    friend auto operator<=>(const Nonce&, const Nonce&) = default;
};

/// Milliseconds since the simulation epoch.
struct Timestamp {
    std::uint64_t ticks = 0;

    friend bool operator==(const Timestamp&, const Timestamp&) = default;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline std::uint64_t abs_delta(Timestamp a, Timestamp b) {
    return a.ticks >= b.ticks ? a.ticks - b.ticks : b.ticks - a.ticks;
}

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

/// Script-driven clock; real time is never consulted.
class SimClock : public Clock {
public:
    Timestamp now() const override { return now_; }
    void advance(std::uint64_t ms) { now_.ticks += ms; }

private:
    Timestamp now_;
};

class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(std::uint8_t* out, std::size_t len) = 0;

    Bytes bytes(std::size_t len) {
        Bytes out(len);
        if (len > 0) fill(out.data(), len);
        return out;
    }
};

/// OS randomness, for real provisioning.
class SystemRng : public Rng {
public:
    void fill(std::uint8_t* out, std::size_t len) override;
};

/// ChaCha20 counter-mode stream over a 32-byte seed. Identical seeds give
/// identical output streams, which is what makes whole-scenario traces a
/// pure function of (scenario, seed).
class DeterministicRng : public Rng {
public:
    explicit DeterministicRng(const Bytes& seed32);
    void fill(std::uint8_t* out, std::size_t len) override;

    /// Derives an independent child stream, e.g. one per actor.
    DeterministicRng fork(std::string_view label) const;

private:
    Bytes seed_;
    std::uint64_t counter_ = 0;
};

class CryptoSuite {
public:
    virtual ~CryptoSuite() = default;

    virtual KeyPair generate_keypair(const std::string& role_label, Rng& rng) const = 0;

    /// Hybrid public-key encryption; fresh randomness per call, so two seals
    /// of one plaintext differ. Throws PlaintextTooLarge beyond the bound.
    virtual Bytes seal_asym(const Bytes& public_key, BytesView plaintext, Rng& rng) const = 0;

    /// Empty result = DecryptionFailure (wrong key, truncation or tamper).
    virtual std::optional<Bytes> unseal_asym(const Bytes& private_key, BytesView ciphertext) const = 0;

    virtual Bytes sign(const Bytes& private_key, BytesView message) const = 0;
    virtual bool verify(const Bytes& public_key, BytesView message, BytesView signature) const = 0;

    /// Authenticated symmetric encryption.
    virtual Bytes enc_sym(const SymmetricKey& key, BytesView plaintext, Rng& rng) const = 0;

    /// Empty result = DecryptionFailure (wrong key or tampered ciphertext).
    virtual std::optional<Bytes> dec_sym(const SymmetricKey& key, BytesView ciphertext) const = 0;

    /// 256-bit hash of exactly the given bytes.
    virtual Bytes hash(BytesView data) const = 0;

    /// h(part1, part2, ...) with each part length-prefixed (4-byte big
    /// endian) before hashing, so part boundaries are unambiguous:
    /// kdf([A,B]) never collides with kdf([AB]) or kdf([B,A]).
    /// Throws InvalidKdfInput on an empty list or an empty part.
    SymmetricKey kdf(const std::vector<Bytes>& parts) const;
};

/// Default instantiation, shared process-wide.
const CryptoSuite& default_suite();

struct OpCounters {
    std::uint64_t asym_seal = 0;
    std::uint64_t asym_unseal = 0;
    std::uint64_t sign = 0;
    std::uint64_t verify = 0;
    std::uint64_t sym_enc = 0;
    std::uint64_t sym_dec = 0;
    std::uint64_t kdf = 0;
    std::uint64_t nonces = 0;

    std::uint64_t asym_total() const { return asym_seal + asym_unseal + sign + verify; }
};

/// Record of a symmetric key being used to encrypt or decrypt traffic.
/// The audit checks these fingerprints to show K_MU-FN never encrypts
/// anything on the wire.
struct KeyUse {
    std::string op; // "enc" | "dec"
    Bytes key_fingerprint;
};

/// Per-actor crypto facade: every operation is attributed to the owning
/// actor, counted by category and (for symmetric traffic) fingerprinted.
/// The mobile user's asymmetric count staying at zero is a protocol claim.
class ActorCrypto {
public:
    ActorCrypto(const CryptoSuite& suite, std::unique_ptr<Rng> rng)
        : suite_(&suite), rng_(std::move(rng)) {}

    Bytes seal_asym(const Bytes& pk, BytesView pt) {
        ++counters_.asym_seal;
        return suite_->seal_asym(pk, pt, *rng_);
    }

    std::optional<Bytes> unseal_asym(const Bytes& sk, BytesView ct) {
        ++counters_.asym_unseal;
        return suite_->unseal_asym(sk, ct);
    }

    Bytes sign(const Bytes& sk, BytesView msg) {
        ++counters_.sign;
        return suite_->sign(sk, msg);
    }

    bool verify(const Bytes& pk, BytesView msg, BytesView sig) {
        ++counters_.verify;
        return suite_->verify(pk, msg, sig);
    }

    Bytes enc_sym(const SymmetricKey& key, BytesView pt) {
        ++counters_.sym_enc;
        key_uses_.push_back({"enc", fingerprint(key)});
        return suite_->enc_sym(key, pt, *rng_);
    }

    std::optional<Bytes> dec_sym(const SymmetricKey& key, BytesView ct) {
        ++counters_.sym_dec;
        key_uses_.push_back({"dec", fingerprint(key)});
        return suite_->dec_sym(key, ct);
    }

    SymmetricKey kdf(const std::vector<Bytes>& parts) {
        ++counters_.kdf;
        return suite_->kdf(parts);
    }

    Nonce make_nonce() {
        ++counters_.nonces;
        return Nonce{rng_->bytes(kNonceLen)};
    }

    Bytes random_bytes(std::size_t n) { return rng_->bytes(n); }

    SymmetricKey fresh_key() { return SymmetricKey{rng_->bytes(kDigestLen)}; }

    Bytes fingerprint(const SymmetricKey& key) const {
        Bytes h = suite_->hash(key.bytes);
        h.resize(8);
        return h;
    }

    const CryptoSuite& suite() const { return *suite_; }
    const OpCounters& counters() const { return counters_; }

    std::vector<KeyUse> drain_key_uses() {
        std::vector<KeyUse> out;
        out.swap(key_uses_);
        return out;
    }

private:
    const CryptoSuite* suite_;
    std::unique_ptr<Rng> rng_;
    OpCounters counters_;
    std::vector<KeyUse> key_uses_;
};

} // namespace pvkit
