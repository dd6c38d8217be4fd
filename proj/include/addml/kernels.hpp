#pragma once

// Data-parallel inner loops used by every module. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The variant
// is picked once per process from CPUID; setting ADDML_FORCE_SCALAR=1 in the
// environment pins the scalar path. Results of the two paths agree to a few
// ulps but are not bit-identical (FMA contraction, lane-wise reduction order).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace addml::kernels {

struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

/// Function table for one instruction-set variant. Pointers take raw
/// (pointer, length) pairs; the span wrappers below check lengths.
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n,
                      const AdamCoefficients& c);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;
/// The table chosen for this process.
const KernelTable& active() noexcept;

// Element operations counter. Every dispatched call adds its vector length to
// a thread-local tally, which lets tests measure how much arithmetic an
// operation performs independent of wall-clock noise.
std::uint64_t op_count() noexcept;
void reset_op_count() noexcept;

namespace detail {
extern thread_local std::uint64_t element_ops;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  detail::element_ops += a.size();
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  detail::element_ops += a.size();
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  detail::element_ops += x.size();
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void adam_update(std::span<double> param, std::span<double> m, std::span<double> v,
                        std::span<const double> grad, const AdamCoefficients& c) noexcept {
  detail::element_ops += param.size();
  active().adam_update(param.data(), m.data(), v.data(), grad.data(), param.size(), c);
}

}  // namespace addml::kernels
