#include "pvkit/crypto.hpp"

#include <sodium.h>

#include <cstring>

#include "pvkit/encode.hpp"
#include "pvkit/sodium_suite.hpp"

namespace pvkit {

void SystemRng::fill(std::uint8_t* out, std::size_t len) {
    randombytes_buf(out, len);
}

DeterministicRng::DeterministicRng(const Bytes& seed32) : seed_(seed32) {
    if (seed_.size() != crypto_stream_chacha20_KEYBYTES) {
        // Normalize arbitrary seeds to the stream key size.
        Bytes key(crypto_hash_sha256_BYTES);
        crypto_hash_sha256(key.data(), seed_.data(), seed_.size());
        seed_ = std::move(key);
    }
}

void DeterministicRng::fill(std::uint8_t* out, std::size_t len) {
    std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    std::memcpy(nonce, &counter_, sizeof(counter_));
    ++counter_;
    std::memset(out, 0, len);
    crypto_stream_chacha20_xor(out, out, len, nonce, seed_.data());
}

DeterministicRng DeterministicRng::fork(std::string_view label) const {
    ByteWriter w;
    w.put_field(BytesView(seed_));
    w.put_field(std::string(label));
    Bytes child(crypto_hash_sha256_BYTES);
    crypto_hash_sha256(child.data(), w.bytes().data(), w.bytes().size());
    return DeterministicRng(child);
}

SymmetricKey CryptoSuite::kdf(const std::vector<Bytes>& parts) const {
    if (parts.empty()) throw InvalidKdfInput("kdf: empty part list");
    ByteWriter w;
    for (const Bytes& part : parts) {
        if (part.empty()) throw InvalidKdfInput("kdf: empty part");
        w.put_field(BytesView(part));
    }
    return SymmetricKey{hash(w.bytes())};
}

const CryptoSuite& default_suite() {
    static SodiumSuite suite;
    return suite;
}

} // namespace pvkit
