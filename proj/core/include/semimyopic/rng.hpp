#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace semimyopic {

/// Mixes a tuple of integers into one 64-bit key (splitmix64 finalizer chain).
std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts);

/// Engine seeded deterministically from a key.
std::mt19937_64 make_engine(std::uint64_t key);

/// Counter-based standard normal source: each (item, measurement index) pair
/// maps to one fixed draw, so runs that share a stream key see identical
/// observation noise for identical measurements regardless of order.
class ObservationStream {
 public:
  explicit ObservationStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }

  /// Standard normal draw for the `index`-th measurement of `item`.
  double standard_normal(std::uint64_t item, std::uint64_t index) const;

 private:
  std::uint64_t key_;
};

}  // namespace semimyopic
