#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvkit/crypto.hpp"

namespace pvkit {

/// Outcome of one security claim exercised against a live world.
struct AttackReport {
    struct Claim {
        std::string name;
        bool upheld = false;
        std::string detail;
    };

    std::vector<Claim> claims;

    bool all_upheld() const;
    std::string to_text() const;
};

/// Drives the adversarial battery: token forgery (attacker-signed,
/// attacker-sealed and relabeled bodies), mutual-authentication goals,
/// replay of both acquisition and service traffic, an id-rewrite
/// man-in-the-middle, ciphertext tampering, and session-key freshness.
///
/// Passing a suite without ciphertext integrity (UnauthenticatedSymSuite)
/// must flip the tamper claim to failed; that negative control shows the
/// battery actually measures the property.
AttackReport run_attack_suite(std::uint64_t seed, const CryptoSuite& suite = default_suite());

} // namespace pvkit
