#pragma once

#include <cstddef>
#include <exception>
#include <span>

namespace mcf {

/// Selects the OpenMP kernel or the serial reference loop. Both visit the same
/// nodes with the same per-node arithmetic, so results agree bitwise.
enum class Exec { serial, parallel };

/// Applies fn to every node. In parallel mode an exception thrown by fn is
/// rethrown after the loop; if several nodes fail, the one earliest in
/// `nodes` wins, so the reported error matches the serial loop.
template <class Fn>
void for_each_node(Exec exec, std::span<const std::size_t> nodes, Fn&& fn) {
  const auto count = static_cast<std::ptrdiff_t>(nodes.size());
  if (exec == Exec::serial) {
    for (std::ptrdiff_t k = 0; k < count; ++k) fn(nodes[static_cast<std::size_t>(k)]);
    return;
  }
  std::exception_ptr error;
  std::ptrdiff_t error_at = count;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      fn(nodes[static_cast<std::size_t>(k)]);
    } catch (...) {
#pragma omp critical(mcf_for_each_node_error)
      if (k < error_at) {
        error_at = k;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Fixed-order pairwise sum; the association tree depends only on the length.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace mcf
