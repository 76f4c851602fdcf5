#include "pvkit/sodium_suite.hpp"

#include <sodium.h>

#include <stdexcept>

namespace pvkit {

namespace {

constexpr std::size_t kEncPk = crypto_box_PUBLICKEYBYTES;  // 32
constexpr std::size_t kEncSk = crypto_box_SECRETKEYBYTES;  // 32
constexpr std::size_t kSignPk = crypto_sign_PUBLICKEYBYTES; // 32
constexpr std::size_t kSignSk = crypto_sign_SECRETKEYBYTES; // 64

bool pk_valid(const Bytes& pk) { return pk.size() == kEncPk + kSignPk; }
bool sk_valid(const Bytes& sk) { return sk.size() == kEncSk + kSignSk; }

const std::uint8_t* enc_half(const Bytes& key) { return key.data(); }
const std::uint8_t* sign_half_pk(const Bytes& pk) { return pk.data() + kEncPk; }
const std::uint8_t* sign_half_sk(const Bytes& sk) { return sk.data() + kEncSk; }

// Nonce for the sealed envelope, bound to both public keys.
void seal_nonce(const std::uint8_t* epk, const std::uint8_t* rpk,
                std::uint8_t out[crypto_box_NONCEBYTES]) {
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, crypto_box_NONCEBYTES);
    crypto_generichash_update(&st, epk, kEncPk);
    crypto_generichash_update(&st, rpk, kEncPk);
    crypto_generichash_final(&st, out, crypto_box_NONCEBYTES);
}

} // namespace

SodiumSuite::SodiumSuite() {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
}

KeyPair SodiumSuite::generate_keypair(const std::string& role_label, Rng& rng) const {
    Bytes box_seed = rng.bytes(crypto_box_SEEDBYTES);
    Bytes sign_seed = rng.bytes(crypto_sign_SEEDBYTES);

    Bytes pk(kEncPk + kSignPk);
    Bytes sk(kEncSk + kSignSk);
    crypto_box_seed_keypair(pk.data(), sk.data(), box_seed.data());
    crypto_sign_seed_keypair(pk.data() + kEncPk, sk.data() + kEncSk, sign_seed.data());
    return KeyPair{std::move(pk), std::move(sk), role_label};
}

Bytes SodiumSuite::seal_asym(const Bytes& public_key, BytesView plaintext, Rng& rng) const {
    if (!pk_valid(public_key)) throw std::invalid_argument("seal_asym: bad public key");
    if (plaintext.size() > kMaxSealPlaintext)
        throw PlaintextTooLarge("seal_asym: plaintext exceeds message bound");

    Bytes eph_seed = rng.bytes(crypto_box_SEEDBYTES);
    Bytes epk(kEncPk);
    Bytes esk(kEncSk);
    crypto_box_seed_keypair(epk.data(), esk.data(), eph_seed.data());

    std::uint8_t nonce[crypto_box_NONCEBYTES];
    seal_nonce(epk.data(), enc_half(public_key), nonce);

    Bytes out(kEncPk + crypto_box_MACBYTES + plaintext.size());
    std::copy(epk.begin(), epk.end(), out.begin());
    if (crypto_box_easy(out.data() + kEncPk, plaintext.data(), plaintext.size(), nonce,
                        enc_half(public_key), esk.data()) != 0)
        throw std::runtime_error("seal_asym: crypto_box failed");
    return out;
}

std::optional<Bytes> SodiumSuite::unseal_asym(const Bytes& private_key, BytesView ciphertext) const {
    if (!sk_valid(private_key)) return std::nullopt;
    if (ciphertext.size() < kEncPk + crypto_box_MACBYTES) return std::nullopt;

    const std::uint8_t* epk = ciphertext.data();
    Bytes my_pk(kEncPk);
    crypto_scalarmult_base(my_pk.data(), enc_half(private_key));

    std::uint8_t nonce[crypto_box_NONCEBYTES];
    seal_nonce(epk, my_pk.data(), nonce);

    Bytes out(ciphertext.size() - kEncPk - crypto_box_MACBYTES);
    if (crypto_box_open_easy(out.data(), ciphertext.data() + kEncPk,
                             ciphertext.size() - kEncPk, nonce, epk,
                             enc_half(private_key)) != 0)
        return std::nullopt;
    return out;
}

Bytes SodiumSuite::sign(const Bytes& private_key, BytesView message) const {
    if (!sk_valid(private_key)) throw std::invalid_argument("sign: bad private key");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         sign_half_sk(private_key));
    return sig;
}

bool SodiumSuite::verify(const Bytes& public_key, BytesView message, BytesView signature) const {
    if (!pk_valid(public_key) || signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       sign_half_pk(public_key)) == 0;
}

Bytes SodiumSuite::enc_sym(const SymmetricKey& key, BytesView plaintext, Rng& rng) const {
    if (key.bytes.size() != crypto_secretbox_KEYBYTES)
        throw std::invalid_argument("enc_sym: bad key length");
    if (plaintext.size() > kMaxSealPlaintext)
        throw PlaintextTooLarge("enc_sym: plaintext exceeds message bound");
    Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plaintext.size());
    rng.fill(out.data(), crypto_secretbox_NONCEBYTES);
    crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                          plaintext.size(), out.data(), key.bytes.data());
    return out;
}

std::optional<Bytes> SodiumSuite::dec_sym(const SymmetricKey& key, BytesView ciphertext) const {
    if (key.bytes.size() != crypto_secretbox_KEYBYTES) return std::nullopt;
    if (ciphertext.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
        return std::nullopt;
    Bytes out(ciphertext.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(), ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                   ciphertext.size() - crypto_secretbox_NONCEBYTES,
                                   ciphertext.data(), key.bytes.data()) != 0)
        return std::nullopt;
    return out;
}

Bytes SodiumSuite::hash(BytesView data) const {
    Bytes out(crypto_hash_sha256_BYTES);
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Bytes UnauthenticatedSymSuite::enc_sym(const SymmetricKey& key, BytesView plaintext, Rng& rng) const {
    Bytes out(crypto_stream_xsalsa20_NONCEBYTES + plaintext.size());
    rng.fill(out.data(), crypto_stream_xsalsa20_NONCEBYTES);
    crypto_stream_xsalsa20_xor(out.data() + crypto_stream_xsalsa20_NONCEBYTES, plaintext.data(),
                               plaintext.size(), out.data(), key.bytes.data());
    return out;
}

std::optional<Bytes> UnauthenticatedSymSuite::dec_sym(const SymmetricKey& key,
                                                      BytesView ciphertext) const {
    if (ciphertext.size() < crypto_stream_xsalsa20_NONCEBYTES) return std::nullopt;
    Bytes out(ciphertext.size() - crypto_stream_xsalsa20_NONCEBYTES);
    crypto_stream_xsalsa20_xor(out.data(), ciphertext.data() + crypto_stream_xsalsa20_NONCEBYTES,
                               out.size(), ciphertext.data(), key.bytes.data());
    return out;
}

} // namespace pvkit
