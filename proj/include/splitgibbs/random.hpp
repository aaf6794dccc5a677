#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace splitgibbs {

/// One Philox4x32-10 block: ten rounds over `ctr` with the two-word key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Philox4x32-10 counter-based generator.
///
/// The key is the 64-bit seed; the upper two counter words carry the stream
/// id, the lower two a block index. Distinct (seed, stream_id) pairs give
/// independent sequences, and the sequence for a given pair is fixed on every
/// platform because nothing here goes through <random> distributions.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent stream sharing this seed.
  RandomStream substream(std::uint64_t stream_id) const noexcept {
    return RandomStream(seed_, stream_id);
  }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace splitgibbs
