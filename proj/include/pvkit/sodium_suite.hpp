#pragma once

#include "pvkit/crypto.hpp"

namespace pvkit {

// Default suite instantiation (libsodium):
//   hash      SHA-256
//   sign      Ed25519, detached
//   seal_asym X25519 sealed envelope: ephemeral pk || crypto_box ciphertext,
//             box nonce derived as H(ephemeral pk || recipient pk)
//   enc_sym   XSalsa20-Poly1305 secretbox, random 24-byte nonce prepended
//
// A key pair carries both halves: public = enc pk(32) || sign pk(32),
// private = enc sk(32) || sign sk(64).
class SodiumSuite : public CryptoSuite {
public:
    SodiumSuite();

    KeyPair generate_keypair(const std::string& role_label, Rng& rng) const override;
    Bytes seal_asym(const Bytes& public_key, BytesView plaintext, Rng& rng) const override;
    std::optional<Bytes> unseal_asym(const Bytes& private_key, BytesView ciphertext) const override;
    Bytes sign(const Bytes& private_key, BytesView message) const override;
    bool verify(const Bytes& public_key, BytesView message, BytesView signature) const override;
    Bytes enc_sym(const SymmetricKey& key, BytesView plaintext, Rng& rng) const override;
    std::optional<Bytes> dec_sym(const SymmetricKey& key, BytesView ciphertext) const override;
    Bytes hash(BytesView data) const override;
};

/// Negative-control suite: symmetric encryption without authentication
/// (bare XSalsa20 stream). Decryption of tampered ciphertext "succeeds"
/// with garbage, so tamper-detection claims must fail against it. Test
/// hook only; never the default.
class UnauthenticatedSymSuite : public SodiumSuite {
public:
    Bytes enc_sym(const SymmetricKey& key, BytesView plaintext, Rng& rng) const override;
    std::optional<Bytes> dec_sym(const SymmetricKey& key, BytesView ciphertext) const override;
};

} // namespace pvkit
