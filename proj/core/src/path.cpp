#include "roughpath/path.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughpath/error.hpp"

namespace roughpath {

GridPath::GridPath(std::vector<double> times, int dim, std::vector<double> values)
    : times_(std::move(times)), dim_(dim), values_(std::move(values)) {
  if (dim_ < 1) throw Error(ErrorKind::kShape, "path dimension must be positive");
  if (times_.empty()) throw Error(ErrorKind::kShape, "path needs at least one time");
  if (values_.size() != times_.size() * static_cast<std::size_t>(dim_))
    throw Error(ErrorKind::kShape, "path values do not match times x dim");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error(ErrorKind::kDomain, "path times must be strictly increasing");
  for (int c = 0; c < dim_; ++c)
    if (values_[c] != 0.0) throw Error(ErrorKind::kDomain, "paths must start at 0");
}

std::vector<double> GridPath::increment(std::size_t i) const {
  std::vector<double> d(dim_);
  for (int c = 0; c < dim_; ++c) d[c] = values_[(i + 1) * dim_ + c] - values_[i * dim_ + c];
  return d;
}

GridPath GridPath::window(std::size_t first, std::size_t last) const {
  if (first > last || last >= times_.size())
    throw Error(ErrorKind::kDomain, "path window out of range");
  std::vector<double> t(times_.begin() + first, times_.begin() + last + 1);
  std::vector<double> v((last - first + 1) * dim_);
  for (std::size_t i = first; i <= last; ++i)
    for (int c = 0; c < dim_; ++c)
      v[(i - first) * dim_ + c] = values_[i * dim_ + c] - values_[first * dim_ + c];
  return GridPath(std::move(t), dim_, std::move(v));
}

std::vector<double> uniform_grid(std::size_t intervals) {
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    t[i] = static_cast<double>(i) / static_cast<double>(intervals);
  t.back() = 1.0;
  return t;
}

GridRoughPath::GridRoughPath(std::vector<double> times, std::vector<TruncatedTensor> increments)
    : times_(std::move(times)), increments_(std::move(increments)) {
  if (times_.empty() || increments_.size() + 1 != times_.size())
    throw Error(ErrorKind::kShape, "rough path needs one increment per grid interval");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error(ErrorKind::kDomain, "rough path times must be strictly increasing");
  if (increments_.empty())
    throw Error(ErrorKind::kShape, "rough path needs at least one interval");
  dim_ = increments_.front().dim();
  level_ = increments_.front().level();
  cumulative_.reserve(times_.size());
  cumulative_.push_back(TruncatedTensor::unit(dim_, level_));
  for (const auto& inc : increments_) {
    if (inc.dim() != dim_ || inc.level() != level_)
      throw Error(ErrorKind::kShape, "rough path increments must share dim and level");
    if (std::abs(inc.scalar() - 1.0) > 1e-12)
      throw Error(ErrorKind::kNotGroupElement, "rough path increments need scalar part 1");
    cumulative_.push_back(cumulative_.back() * inc);
  }
}

TruncatedTensor GridRoughPath::increment(std::size_t a, std::size_t b) const {
  if (a > b || b >= times_.size()) throw Error(ErrorKind::kDomain, "increment: bad index pair");
  return group_inverse(cumulative_[a]) * cumulative_[b];
}

TruncatedTensor GridRoughPath::compose(std::size_t a, std::size_t b) const {
  if (a > b || b >= times_.size()) throw Error(ErrorKind::kDomain, "compose: bad index pair");
  TruncatedTensor acc = TruncatedTensor::unit(dim_, level_);
  TruncatedTensor scratch(dim_, level_);
  for (std::size_t i = a; i < b; ++i) {
    tensor_mul_into(acc, increments_[i], scratch);
    std::swap(acc, scratch);
  }
  return acc;
}

GridPath GridRoughPath::level1() const {
  std::vector<double> v(times_.size() * dim_);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    auto p = cumulative_[i][1];
    std::copy(p.begin(), p.end(), v.begin() + i * dim_);
  }
  return GridPath(times_, dim_, std::move(v));
}

GridRoughPath GridRoughPath::window(std::size_t first, std::size_t last) const {
  if (first >= last || last >= times_.size())
    throw Error(ErrorKind::kDomain, "rough path window must contain an interval");
  return GridRoughPath(std::vector<double>(times_.begin() + first, times_.begin() + last + 1),
                       std::vector<TruncatedTensor>(increments_.begin() + first,
                                                    increments_.begin() + last));
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

GridPath read_path_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kConfig, source + ": empty CSV");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "time")
    throw Error(ErrorKind::kConfig, source + ": header must be time,x1,...,xd");
  const int dim = static_cast<int>(header.size()) - 1;
  for (int c = 0; c < dim; ++c)
    if (header[c + 1] != "x" + std::to_string(c + 1))
      throw Error(ErrorKind::kConfig, source + ": header must be time,x1,...,xd");
  std::vector<double> times;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != dim + 1)
      throw Error(ErrorKind::kConfig, source + ": row " + std::to_string(row) +
                                          " has wrong column count");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      char* end = nullptr;
      const double v = std::strtod(cells[k].c_str(), &end);
      if (cells[k].empty() || *end != '\0' || !std::isfinite(v))
        throw Error(ErrorKind::kConfig, source + ": bad number '" + cells[k] + "' on row " +
                                            std::to_string(row));
      (k == 0 ? times : values).push_back(v);
    }
  }
  if (times.empty()) throw Error(ErrorKind::kConfig, source + ": no data rows");
  if (times.front() != 0.0) throw Error(ErrorKind::kConfig, source + ": first time must be 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error(ErrorKind::kConfig, source + ": times must be strictly increasing");
  bool shifted = false;
  for (int c = 0; c < dim; ++c) shifted |= values[c] != 0.0;
  if (shifted) {
    spdlog::warn("{}: first row is nonzero; shifting path to start at 0", source);
    std::vector<double> first(values.begin(), values.begin() + dim);
    for (std::size_t i = 0; i < times.size(); ++i)
      for (int c = 0; c < dim; ++c) values[i * dim + c] -= first[c];
  }
  return GridPath(std::move(times), dim, std::move(values));
}

GridPath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::kIo, "cannot open input file '" + file + "'");
  return read_path_csv(in, file);
}

void write_path_csv(std::ostream& out, const GridPath& path, std::span<const double> offset) {
  out << "time";
  for (int c = 0; c < path.dim(); ++c) out << ",x" << c + 1;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < path.points(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", path.times()[i]);
    out << buf;
    auto v = path.value(i);
    for (int c = 0; c < path.dim(); ++c) {
      const double shift = offset.empty() ? 0.0 : offset[c];
      std::snprintf(buf, sizeof(buf), "%.17g", v[c] + shift);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace roughpath
