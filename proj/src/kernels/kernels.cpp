#include "gus/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace gus::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void abs_diff_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(a[i] - b[i]);
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void matvec_bias_scalar(const double* w, std::size_t rows, std::size_t cols,
                        const double* x, const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = dot_scalar(w + r * cols, x, cols) + bias[r];
  }
}

constexpr Ops kScalarOps{dot_scalar, abs_diff_scalar, hadamard_scalar,
                         relu_scalar, matvec_bias_scalar};

struct Selected {
  const Ops* ops;
  const char* name;
};

Selected select() {
  const Ops* best = avx2_ops();
  const char* best_name = best ? "avx2" : "scalar";
  if (const char* env = std::getenv("GUS_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return {&kScalarOps, "scalar"};
    if (std::strcmp(env, "avx2") == 0 && best) return {best, "avx2"};
  }
  if (!best) return {&kScalarOps, best_name};
  return {best, best_name};
}

const Selected& selected() {
  static const Selected s = select();
  return s;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active_ops() { return *selected().ops; }

const char* active_name() { return selected().name; }

#if !defined(GUS_HAVE_AVX2_KERNELS)
bool avx2_available() { return false; }
const Ops* avx2_ops() { return nullptr; }
#endif

}  // namespace gus::kernels
