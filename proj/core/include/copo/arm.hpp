#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace copo {

/// A point in parameter space. An arm indexes one sampling distribution p_x.
class Arm {
 public:
  Arm() = default;
  explicit Arm(std::vector<double> params) : params_(std::move(params)) {}
  Arm(std::initializer_list<double> params) : params_(params) {}

  std::size_t dim() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  double operator[](std::size_t i) const { return params_[i]; }

  // Exact comparison: the baseline is recognized by bitwise-equal parameters.
  friend bool operator==(const Arm&, const Arm&) = default;
  friend auto operator<=>(const Arm&, const Arm&) = default;

  // "p0;p1;..." with shortest round-trip formatting.
  std::string to_string() const;
  static Arm parse(std::string_view text);

 private:
  std::vector<double> params_;
};

/// The axis-aligned box [-half_width, half_width]^dim.
struct Box {
  std::size_t dim = 1;
  double half_width = 1.0;

  bool contains(const Arm& x) const;
};

using DiscreteArms = std::vector<Arm>;
using ArmSpace = std::variant<DiscreteArms, Box>;

}  // namespace copo
