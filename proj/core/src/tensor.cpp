#include "roughpath/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughpath/error.hpp"

namespace roughpath {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kNotGroupElement: return "not_group_element";
    case ErrorKind::kInvalidPartition: return "invalid_partition";
    case ErrorKind::kIllPosed: return "ill_posed";
    case ErrorKind::kDerivativeOrder: return "derivative_order";
    case ErrorKind::kRegularity: return "regularity";
    case ErrorKind::kNonConvergence: return "non_convergence";
    case ErrorKind::kHypothesis: return "hypothesis";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

TruncatedTensor::TruncatedTensor(int dim, int level) : dim_(dim), level_(level) {
  if (dim < 1) throw Error(ErrorKind::kShape, "tensor dimension must be positive");
  if (level < 1 || level > kMaxLevel)
    throw Error(ErrorKind::kShape,
                "truncation level must be in [1, " + std::to_string(kMaxLevel) + "]");
  offset_[0] = 0;
  for (int j = 0; j <= level; ++j) offset_[j + 1] = offset_[j] + ipow(dim, j);
  data_.assign(offset_[level + 1], 0.0);
}

TruncatedTensor TruncatedTensor::unit(int dim, int level) {
  TruncatedTensor t(dim, level);
  t.data_[0] = 1.0;
  return t;
}

TruncatedTensor TruncatedTensor::segment(std::span<const double> v, int level) {
  TruncatedTensor t = unit(static_cast<int>(v.size()), level);
  std::copy(v.begin(), v.end(), t[1].begin());
  // level j = level_{j-1} (x) v / j
  for (int j = 2; j <= level; ++j) {
    auto prev = t[j - 1];
    auto cur = t[j];
    const double inv = 1.0 / j;
    const std::size_t d = v.size();
    for (std::size_t i = 0; i < prev.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) cur[i * d + k] = prev[i] * v[k] * inv;
  }
  return t;
}

static void require_same_shape(const TruncatedTensor& a, const TruncatedTensor& b) {
  if (a.dim() != b.dim() || a.level() != b.level())
    throw Error(ErrorKind::kShape, "tensor shape mismatch: (d=" + std::to_string(a.dim()) +
                                       ", L=" + std::to_string(a.level()) + ") vs (d=" +
                                       std::to_string(b.dim()) + ", L=" +
                                       std::to_string(b.level()) + ")");
}

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }

void tensor_mul_into(const TruncatedTensor& a, const TruncatedTensor& b,
                     TruncatedTensor& out) {
  require_same_shape(a, b);
  require_same_shape(a, out);
  const int level = a.level();
  for (int k = 0; k <= level; ++k) {
    auto c = out[k];
    std::fill(c.begin(), c.end(), 0.0);
    for (int i = 0; i <= k; ++i) {
      auto left = a[k - i];
      auto right = b[i];
      const std::size_t n = right.size();
      for (std::size_t p = 0; p < left.size(); ++p) {
        const double lp = left[p];
        if (lp == 0.0) continue;
        double* dst = c.data() + p * n;
        for (std::size_t q = 0; q < n; ++q) dst[q] += lp * right[q];
      }
    }
  }
}

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
  TruncatedTensor out(a.dim(), a.level());
  tensor_mul_into(a, b, out);
  return out;
}

TruncatedTensor dilate(double r, const TruncatedTensor& a) {
  TruncatedTensor out = a;
  double scale = 1.0;
  for (int j = 1; j <= a.level(); ++j) {
    scale *= r;
    for (double& x : out[j]) x *= scale;
  }
  return out;
}

TruncatedTensor group_inverse(const TruncatedTensor& a) {
  if (std::abs(a.scalar() - 1.0) > 1e-12)
    throw Error(ErrorKind::kNotGroupElement,
                "group inverse requires scalar part 1, got " + std::to_string(a.scalar()));
  // (1 + n)^{-1} = sum_k (-n)^k, n nilpotent of order level+1
  TruncatedTensor minus_n = a;
  minus_n.data()[0] = 0.0;
  minus_n *= -1.0;
  TruncatedTensor result = TruncatedTensor::unit(a.dim(), a.level());
  TruncatedTensor power = TruncatedTensor::unit(a.dim(), a.level());
  TruncatedTensor scratch(a.dim(), a.level());
  for (int k = 1; k <= a.level(); ++k) {
    tensor_mul_into(power, minus_n, scratch);
    std::swap(power, scratch);
    result += power;
  }
  return result;
}

TensorNorm l1_level_norms(const TruncatedTensor& a) {
  TensorNorm n;
  n.level.resize(a.level() + 1);
  for (int j = 0; j <= a.level(); ++j) {
    double s = 0.0;
    for (double x : a[j]) s += std::abs(x);
    n.level[j] = s;
  }
  return n;
}

TruncatedTensor tensor_exp(const TruncatedTensor& a) {
  if (a.scalar() != 0.0)
    throw Error(ErrorKind::kDomain, "tensor_exp expects a zero scalar part");
  TruncatedTensor result = TruncatedTensor::unit(a.dim(), a.level());
  TruncatedTensor power = TruncatedTensor::unit(a.dim(), a.level());
  TruncatedTensor scratch(a.dim(), a.level());
  for (int k = 1; k <= a.level(); ++k) {
    tensor_mul_into(power, a, scratch);
    scratch *= 1.0 / k;
    std::swap(power, scratch);
    result += power;
  }
  return result;
}

TruncatedTensor tensor_log(const TruncatedTensor& a) {
  if (std::abs(a.scalar() - 1.0) > 1e-12)
    throw Error(ErrorKind::kNotGroupElement, "tensor_log expects scalar part 1");
  TruncatedTensor n = a;
  n.data()[0] = 0.0;
  TruncatedTensor result(a.dim(), a.level());
  TruncatedTensor power = TruncatedTensor::unit(a.dim(), a.level());
  TruncatedTensor scratch(a.dim(), a.level());
  for (int k = 1; k <= a.level(); ++k) {
    tensor_mul_into(power, n, scratch);
    std::swap(power, scratch);
    TruncatedTensor term = power;
    term *= ((k % 2 == 1) ? 1.0 : -1.0) / k;
    result += term;
  }
  return result;
}

TruncatedTensor embed(const TruncatedTensor& a, int new_dim, std::span<const int> map) {
  if (static_cast<int>(map.size()) != a.dim())
    throw Error(ErrorKind::kShape, "embed: coordinate map size mismatch");
  for (int m : map)
    if (m < 0 || m >= new_dim) throw Error(ErrorKind::kShape, "embed: map out of range");
  TruncatedTensor out(new_dim, a.level());
  out.data()[0] = a.scalar();
  const std::size_t d = a.dim();
  for (int j = 1; j <= a.level(); ++j) {
    auto src = a[j];
    auto dst = out[j];
    std::vector<int> idx(j, 0);
    for (std::size_t flat = 0; flat < src.size(); ++flat) {
      std::size_t target = 0;
      for (int s = 0; s < j; ++s) target = target * new_dim + map[idx[s]];
      dst[target] = src[flat];
      for (int s = j - 1; s >= 0; --s) {
        if (++idx[s] < static_cast<int>(d)) break;
        idx[s] = 0;
      }
    }
  }
  return out;
}

void contract_blocks(std::span<const double> input, int in_dim, std::span<const int> arity,
                     std::span<const std::span<const double>> blocks, int out_dim,
                     std::span<double> out) {
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t k = 0; k < arity.size(); ++k) {
    const std::size_t front = ipow(in_dim, arity[k]);
    const std::size_t rest = cur.size() / front;
    const auto& block = blocks[k];
    next.assign(rest * out_dim, 0.0);
    // next[r][o] = sum_f block[o][f] cur[f][r]
    for (int o = 0; o < out_dim; ++o) {
      const double* brow = block.data() + o * front;
      for (std::size_t f = 0; f < front; ++f) {
        const double b = brow[f];
        if (b == 0.0) continue;
        const double* crow = cur.data() + f * rest;
        for (std::size_t r = 0; r < rest; ++r) next[r * out_dim + o] += b * crow[r];
      }
    }
    std::swap(cur, next);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += cur[i];
}

void permute_slots_add(std::span<const double> input, int dim, std::span<const int> pi,
                       std::span<double> out) {
  const int n = static_cast<int>(pi.size());
  std::vector<int> idx(n, 0);
  std::vector<std::size_t> stride(n);
  for (int s = 0; s < n; ++s) stride[s] = ipow(dim, n - 1 - s);
  for (std::size_t flat = 0; flat < input.size(); ++flat) {
    std::size_t src = 0;
    for (int s = 0; s < n; ++s) src += idx[pi[s]] * stride[s];
    out[flat] += input[src];
    for (int s = n - 1; s >= 0; --s) {
      if (++idx[s] < dim) break;
      idx[s] = 0;
    }
  }
}

TruncatedTensor apply_linear(std::span<const double> alpha, int rows, int cols,
                             const TruncatedTensor& a) {
  if (cols != a.dim() || alpha.size() != static_cast<std::size_t>(rows) * cols)
    throw Error(ErrorKind::kShape, "linear map shape does not match tensor dimension");
  TruncatedTensor out(rows, a.level());
  out.data()[0] = a.scalar();
  std::vector<int> ones;
  std::vector<std::span<const double>> blocks;
  for (int j = 1; j <= a.level(); ++j) {
    ones.assign(j, 1);
    blocks.assign(j, alpha);
    contract_blocks(a[j], cols, ones, blocks, rows, out[j]);
  }
  return out;
}

double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
  require_same_shape(a, b);
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace roughpath
