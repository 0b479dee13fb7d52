#include "copo/arm.hpp"

#include <cmath>
#include <stdexcept>

#include "numeric.hpp"

namespace copo {

namespace detail {

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

std::string Arm::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i) out.push_back(';');
    detail::append_double(out, params_[i]);
  }
  return out;
}

Arm Arm::parse(std::string_view text) {
  std::vector<double> params;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    auto part = text.substr(start, end - start);
    while (!part.empty() && (part.front() == ' ' || part.front() == '\t')) part.remove_prefix(1);
    while (!part.empty() && (part.back() == ' ' || part.back() == '\t')) part.remove_suffix(1);
    params.push_back(detail::parse_double(part));
    start = end + 1;
  }
  return Arm(std::move(params));
}

bool Box::contains(const Arm& x) const {
  if (x.dim() != dim) return false;
  for (double v : x.params()) {
    if (!(std::abs(v) <= half_width)) return false;
  }
  return true;
}

}  // namespace copo
