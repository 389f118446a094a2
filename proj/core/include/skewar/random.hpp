#pragma once

#include <cstdint>
#include <random>

namespace skewar {

using Rng = std::mt19937_64;

// Seed for replication `index` of a run with `master_seed`. Streams are
// derived through std::seed_seq over the (master, index) words so that
// neighbouring indices give unrelated engines.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace skewar
