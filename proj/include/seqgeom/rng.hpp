#pragma once

#include <array>
#include <cstdint>

namespace seqgeom {

/**
 * Counter-based random stream (Philox4x32-10).
 *
 * The 64-bit master seed is the Philox key; the counter holds a 64-bit block
 * index and the 64-bit stream index. Stream (seed, i) is therefore a fixed
 * function of its arguments, so trial i draws the same numbers no matter
 * which worker runs it.
 */
class RngStream {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }
  std::uint64_t blocks_used() const { return block_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 52 random bits.
  double uniform_open() { return to_open_unit(next_u64()); }
  /// (top 52 bits + 1/2) * 2^-52; every value is exact, so 0 and 1 are never returned.
  static double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Sibling stream sharing this seed.
  RngStream substream(std::uint64_t stream_index) const { return {seed_, stream_index}; }

  static Block philox(Block counter, Key key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

}  // namespace seqgeom
