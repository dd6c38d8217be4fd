#include <cstdlib>
#include <cstring>

#include "addml/kernels.hpp"

namespace addml::kernels {

namespace detail {
thread_local std::uint64_t element_ops = 0;
#if defined(ADDML_HAVE_AVX2)
const KernelTable& avx2_table_unchecked() noexcept;
#endif
}  // namespace detail

const KernelTable* avx2_table() noexcept {
#if defined(ADDML_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() noexcept {
  const char* force = std::getenv("ADDML_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0 && *force != '\0') return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

std::uint64_t op_count() noexcept { return detail::element_ops; }
void reset_op_count() noexcept { detail::element_ops = 0; }

}  // namespace addml::kernels
