#include "mklab/point.hpp"

#include <cstring>
#include <sstream>

namespace mklab {

namespace {

void append_double_bits(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  out.append(buf, 16);
}

}  // namespace

bool same_point(const Point& a, const Point& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& pa) -> bool {
        using T = std::decay_t<decltype(pa)>;
        const auto& pb = std::get<T>(b);
        if constexpr (std::is_same_v<T, EuclideanPoint>) {
          return pa.coords == pb.coords;
        } else if constexpr (std::is_same_v<T, SeqPoint>) {
          return pa.symbols == pb.symbols;
        } else if constexpr (std::is_same_v<T, NestedPoint>) {
          return pa.index == pb.index;
        } else {
          return pa.x == pb.x && pa.y == pb.y && pa.z == pb.z;
        }
      },
      a);
}

std::string point_key(const Point& p) {
  std::string key;
  key.push_back(static_cast<char>('0' + p.index()));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EuclideanPoint>) {
          for (double c : v.coords) append_double_bits(key, c);
        } else if constexpr (std::is_same_v<T, SeqPoint>) {
          key += v.symbols;
        } else if constexpr (std::is_same_v<T, NestedPoint>) {
          key += std::to_string(v.index);
        } else {
          append_double_bits(key, v.x);
          append_double_bits(key, v.y);
          append_double_bits(key, v.z);
        }
      },
      p);
  return key;
}

std::string point_repr(const Point& p) {
  std::ostringstream os;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EuclideanPoint>) {
          os << "(";
          for (std::size_t i = 0; i < v.coords.size(); ++i) {
            if (i) os << ",";
            os << v.coords[i];
          }
          os << ")";
        } else if constexpr (std::is_same_v<T, SeqPoint>) {
          os << "\"" << v.symbols << "\"";
        } else if constexpr (std::is_same_v<T, NestedPoint>) {
          os << "x_" << v.index;
        } else {
          os << "(" << v.x << "," << v.y << "," << v.z << ")";
        }
      },
      p);
  return os.str();
}

}  // namespace mklab
