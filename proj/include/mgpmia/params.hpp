#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgpmia/matrix.hpp"

namespace mgpmia {

// Ordered list of named parameter matrices. Flattening visits matrices in
// insertion order, each row-major, so a flat vector is stable across copies.
class ParamSet {
 public:
  void add(std::string name, DenseMatrix value);

  std::size_t count() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  DenseMatrix& operator[](std::size_t i) { return values_[i]; }
  const DenseMatrix& operator[](std::size_t i) const { return values_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  DenseMatrix& at(std::string_view name);
  const DenseMatrix& at(std::string_view name) const;

  std::span<DenseMatrix> matrices() { return values_; }
  std::span<const DenseMatrix> matrices() const { return values_; }
  std::span<const std::string> names() const { return names_; }

  std::size_t total_len() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);

  ParamSet zeros_like() const;
  void set_zero();
  bool same_layout(const ParamSet& other) const;
  bool all_finite() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<DenseMatrix> values_;
};

// Euclidean distance between two parameter sets of the same layout.
double param_distance(const ParamSet& a, const ParamSet& b);

// Binary checkpoint: "MGPM", u32 version, u32 count, then per parameter
// u16 name length, UTF-8 name, u32 rows, u32 cols, rows*cols f64 values.
// All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParamSet& params);
ParamSet read_checkpoint(std::istream& in);
void write_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet read_checkpoint(const std::filesystem::path& path);

}  // namespace mgpmia
