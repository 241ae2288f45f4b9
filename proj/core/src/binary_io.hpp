#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include "ascii_me/policy_network.hpp"

namespace ascii_me::detail {

template <typename T>
  requires std::is_trivially_copyable_v<T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("unexpected end of binary stream");
  return value;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(double))));
}

inline Matrix read_matrix(std::istream& in) {
  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint64_t>(in);
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw std::runtime_error("corrupt matrix header");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(double))));
  if (!in) throw std::runtime_error("unexpected end of binary stream");
  return m;
}

inline void write_vector(std::ostream& out, const Vector& v) { write_matrix(out, v); }

inline Vector read_vector(std::istream& in) {
  Matrix m = read_matrix(in);
  if (m.cols() != 1) throw std::runtime_error("expected a column vector");
  return m.col(0);
}

}  // namespace ascii_me::detail
