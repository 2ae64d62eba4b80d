#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metasdf/autodiff/tensor.hpp"

namespace metasdf::nets {

struct Segment {
  std::string name;
  ad::Shape shape;
  std::int64_t offset = 0;
  std::int64_t size = 0;
};

// Flat, named-segment parameter storage. Segments tile the buffer exactly,
// in declaration order, with no gaps or overlap.
class ParameterVector {
 public:
  std::int64_t add_segment(std::string name, ad::Shape shape);

  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(std::string_view name) const;
  bool has_segment(std::string_view name) const;
  std::span<double> segment_data(std::string_view name);
  std::span<const double> segment_data(std::string_view name) const;

  // Flat {size} tensor copy; lossless round trip with assign().
  ad::Tensor to_tensor() const;
  void assign(std::span<const double> values);

  // Same segment names, shapes and offsets.
  bool congruent(const ParameterVector& other) const;

  void fill(double v);

 private:
  std::vector<Segment> segments_;
  std::vector<double> data_;
};

}  // namespace metasdf::nets
