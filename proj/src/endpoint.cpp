#include "clpaths/endpoint.hpp"

#include <sstream>

namespace clpaths {

bool is_finite(const Endpoint& e) { return std::holds_alternative<FiniteZero>(e); }

std::string describe(const Endpoint& e) {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, FiniteZero>)
          os << "zero(" << v.z.real() << "," << v.z.imag() << ")";
        else if constexpr (std::is_same_v<V, InfinityRay>)
          os << "inf(" << v.angle << ")";
        else if constexpr (std::is_same_v<V, ImaginaryInfinity>)
          os << (v.sign > 0 ? "+i" : "-i") << "inf(x=" << v.x << ")";
        else
          os << "ess(" << v.b.real() << "," << v.b.imag() << ";" << v.sector << ")";
      },
      e);
  return os.str();
}

}  // namespace clpaths
