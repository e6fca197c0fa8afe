#pragma once

#include <cstddef>

namespace gus::kernels {

// Dense arithmetic kernels used by the LSH projections and the similarity
// model. Each entry has a scalar reference implementation and, on x86 with
// AVX2+FMA, a vectorized variant selected once at startup.
//
// abs_diff / hadamard / relu are elementwise and bitwise-identical across
// variants. dot / matvec_bias reduce in a different order per variant, so
// they agree with the scalar reference only up to rounding; the equivalence
// tests pin the tolerance.
struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[i] = |a[i] - b[i]|
  void (*abs_diff)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
  // x[i] = x[i] > 0 ? x[i] : 0
  void (*relu)(double* x, std::size_t n);
  // out[r] = dot(w[r*cols .. r*cols+cols), x) + bias[r], row-major w
  void (*matvec_bias)(const double* w, std::size_t rows, std::size_t cols,
                      const double* x, const double* bias, double* out);
};

const Ops& scalar_ops();

bool avx2_available();
// Null when AVX2+FMA is not available on this CPU or not compiled in.
const Ops* avx2_ops();

// Best variant for this machine, honoring GUS_KERNELS=scalar|avx2 (the env
// override falls back to the detected best when it asks for an unavailable
// variant). Resolved once on first call.
const Ops& active_ops();
const char* active_name();

}  // namespace gus::kernels
