#include "metasdf/nets/params.hpp"

#include <algorithm>

#include "metasdf/common/error.hpp"

namespace metasdf::nets {

std::int64_t ParameterVector::add_segment(std::string name, ad::Shape shape) {
  if (has_segment(name)) throw Error("parameter segment already exists: " + name);
  Segment s;
  s.name = std::move(name);
  s.size = ad::numel_of(shape);
  s.shape = std::move(shape);
  s.offset = size();
  segments_.push_back(s);
  data_.resize(static_cast<std::size_t>(s.offset + s.size), 0.0);
  return s.offset;
}

const Segment& ParameterVector::segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw Error("no parameter segment named " + std::string(name));
}

bool ParameterVector::has_segment(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

std::span<double> ParameterVector::segment_data(std::string_view name) {
  const auto& s = segment(name);
  return {data_.data() + s.offset, static_cast<std::size_t>(s.size)};
}

std::span<const double> ParameterVector::segment_data(std::string_view name) const {
  const auto& s = segment(name);
  return {data_.data() + s.offset, static_cast<std::size_t>(s.size)};
}

ad::Tensor ParameterVector::to_tensor() const {
  return ad::Tensor({static_cast<int>(size())}, data_);
}

void ParameterVector::assign(std::span<const double> values) {
  if (static_cast<std::int64_t>(values.size()) != size()) {
    throw ShapeError("parameter assign: got " + std::to_string(values.size()) +
                     " values for a vector of size " + std::to_string(size()));
  }
  std::copy(values.begin(), values.end(), data_.begin());
}

bool ParameterVector::congruent(const ParameterVector& other) const {
  if (segments_.size() != other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& a = segments_[i];
    const auto& b = other.segments_[i];
    if (a.name != b.name || a.shape != b.shape || a.offset != b.offset) return false;
  }
  return true;
}

void ParameterVector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

}  // namespace metasdf::nets
