#pragma once

#include <cstdint>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

namespace wedge::detail {

// Root of f on [lo, hi]; f(lo) and f(hi) must not share a strict sign.
template <class F>
double bracketed_root(F&& f, double lo, double hi, int bits = 52) {
  const double flo = f(lo);
  if (flo == 0.0) {
    return lo;
  }
  const double fhi = f(hi);
  if (fhi == 0.0) {
    return hi;
  }
  std::uintmax_t max_iter = 300;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(bits), max_iter);
  return 0.5 * (r.first + r.second);
}

}  // namespace wedge::detail
