#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace hamnoise {

// Natural units throughout: hbar = 1, energies in units of E_bar, times in
// hbar / E_bar and frequencies in E_bar / hbar.

/// Raised when a numerical procedure produces non-finite values or cannot
/// meet its accuracy contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed derivation.
//
// Every random draw descends from a single 64-bit master seed:
//   path seed    = derive_seed(master_seed, trial_index)
//   element seed = derive_seed(path seed, element_index)
// Each element seed drives its own std::mt19937_64; the (a_j, b_j) pairs for
// modes j = 0..M-1 are drawn consecutively from that engine. The derivation
// goes through std::seed_seq, whose mixing algorithm is fixed by the standard.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(parent), static_cast<std::uint32_t>(parent >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x68616d6eU};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace hamnoise
