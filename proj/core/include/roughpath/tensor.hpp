#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace roughpath {

inline constexpr int kMaxLevel = 4;

/// Element of the truncated tensor algebra T^(L)(R^d).
///
/// Level j is a dense row-major array of d^j coordinates. Multi-index
/// (i_1, ..., i_j) lives at flat position i_1 d^{j-1} + ... + i_j.
class TruncatedTensor {
 public:
  TruncatedTensor() = default;
  /// Zero tensor, including the scalar level.
  TruncatedTensor(int dim, int level);

  static TruncatedTensor unit(int dim, int level);
  /// Signature of the straight segment with increment v: (1, v, v^2/2!, ...).
  static TruncatedTensor segment(std::span<const double> v, int level);

  int dim() const { return dim_; }
  int level() const { return level_; }

  std::span<double> operator[](int j) {
    return {data_.data() + offset_[j], offset_[j + 1] - offset_[j]};
  }
  std::span<const double> operator[](int j) const {
    return {data_.data() + offset_[j], offset_[j + 1] - offset_[j]};
  }
  double scalar() const { return data_[0]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  TruncatedTensor& operator+=(const TruncatedTensor& other);
  TruncatedTensor& operator-=(const TruncatedTensor& other);
  TruncatedTensor& operator*=(double scale);

 private:
  int dim_ = 0;
  int level_ = 0;
  std::array<std::size_t, kMaxLevel + 2> offset_{};
  std::vector<double> data_;
};

/// Per-level l1 coordinate norms.
struct TensorNorm {
  std::vector<double> level;
};

/// Integer power d^j for tensor sizes.
std::size_t ipow(std::size_t base, int exp);

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b);
/// out = a (x) b without allocating; out must already have matching shape.
void tensor_mul_into(const TruncatedTensor& a, const TruncatedTensor& b,
                     TruncatedTensor& out);

inline TruncatedTensor operator*(const TruncatedTensor& a,
                                 const TruncatedTensor& b) {
  return tensor_mul(a, b);
}
TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b);
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b);

TruncatedTensor dilate(double r, const TruncatedTensor& a);
TruncatedTensor group_inverse(const TruncatedTensor& a);
TensorNorm l1_level_norms(const TruncatedTensor& a);

/// Truncated exponential of a tensor with zero scalar part.
TruncatedTensor tensor_exp(const TruncatedTensor& a);
/// Truncated logarithm of a tensor with unit scalar part.
TruncatedTensor tensor_log(const TruncatedTensor& a);

/// Relabels coordinates: coordinate i of `a` becomes coordinate map[i] of a
/// tensor over R^new_dim. Unmapped coordinates are zero.
TruncatedTensor embed(const TruncatedTensor& a, int new_dim,
                      std::span<const int> map);

/// Applies the linear map alpha (rows x cols, row-major) to every tensor slot,
/// i.e. level j is transformed by alpha^{(x)j}. Requires cols == a.dim().
TruncatedTensor apply_linear(std::span<const double> alpha, int rows, int cols,
                             const TruncatedTensor& a);

/// Contracts consecutive slot groups of an order-n tensor with block maps.
///
/// `input` has n slots of size `in_dim`. Block k is a row-major matrix of shape
/// out_dim x in_dim^{arity[k]} consuming the next arity[k] slots; the result has
/// one slot of size out_dim per block, in block order. Accumulates into `out`.
void contract_blocks(std::span<const double> input, int in_dim,
                     std::span<const int> arity,
                     std::span<const std::span<const double>> blocks,
                     int out_dim, std::span<double> out);

/// Permutes the slots of an order-n tensor: result_{c_1..c_n} =
/// input_{c_pi(1)..c_pi(n)} (0-based pi). This is the left action
/// pi(v_1 (x) ... (x) v_n) = v_{pi^-1(1)} (x) ... (x) v_{pi^-1(n)}.
void permute_slots_add(std::span<const double> input, int dim,
                       std::span<const int> pi, std::span<double> out);

double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b);

}  // namespace roughpath
