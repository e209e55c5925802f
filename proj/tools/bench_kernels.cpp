// Times the OpenMP kernels against the serial reference at the default
// model shapes. Build with -DDUET_BENCH and run: duet-bench [repeats]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#else
#include <chrono>
#endif

#include "duet/kernels.h"
#include "duet/rng.h"

using duet::Rng;
namespace k = duet::kernels;

namespace {

double now_seconds() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
#endif
}

std::vector<float> random_vec(size_t n, Rng& rng) {
  std::vector<float> v(n);
  for (auto& e : v) e = rng.next_symmetric(1.0f);
  return v;
}

struct Timing {
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
};

template <class SerialFn, class ParallelFn>
Timing time_pair(int repeats, SerialFn&& serial, ParallelFn&& parallel) {
  Timing t;
  serial();  // warm
  double t0 = now_seconds();
  for (int r = 0; r < repeats; ++r) serial();
  t.serial_ms = (now_seconds() - t0) * 1000.0 / repeats;
  parallel();
  t0 = now_seconds();
  for (int r = 0; r < repeats; ++r) parallel();
  t.parallel_ms = (now_seconds() - t0) * 1000.0 / repeats;
  return t;
}

void report(const char* name, const Timing& t) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name, t.serial_ms,
              t.parallel_ms, t.serial_ms / t.parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  Rng rng(7);

#ifdef _OPENMP
  std::printf("threads: %d, repeats: %d\n", omp_get_max_threads(), repeats);
#else
  std::printf("built without OpenMP; both columns are serial\n");
#endif

  {
    // Distributed document convolution, the dominant training cost:
    // 2000 channels x 1000 positions, 300 filters of width 3.
    const int c = 2000, len = 1000, w = 3, f = 300;
    auto x = random_vec(static_cast<size_t>(c) * len, rng);
    auto kern = random_vec(static_cast<size_t>(f) * c * w, rng);
    auto bias = random_vec(static_cast<size_t>(f), rng);
    std::vector<float> y(static_cast<size_t>(f) * (len - w + 1));
    report("conv 2000x1000 w3 f300", time_pair(
        repeats, [&] { k::ref::conv_forward(x.data(), kern.data(), bias.data(), y.data(), c, len, w, f); },
        [&] { k::conv_forward(x.data(), kern.data(), bias.data(), y.data(), c, len, w, f); }));

    std::vector<float> dy = random_vec(y.size(), rng);
    std::vector<float> dk(kern.size()), db(bias.size());
    report("conv backward kernels", time_pair(
        repeats,
        [&] { k::ref::conv_backward_kernels(x.data(), dy.data(), dk.data(), db.data(), c, len, w, f); },
        [&] { k::conv_backward_kernels(x.data(), dy.data(), dk.data(), db.data(), c, len, w, f); }));

    std::vector<float> dx(x.size());
    report("conv backward input", time_pair(
        repeats,
        [&] { k::ref::conv_backward_input(kern.data(), dy.data(), dx.data(), c, len, w, f); },
        [&] { k::conv_backward_input(kern.data(), dy.data(), dx.data(), c, len, w, f); }));
  }

  {
    // Post-Hadamard dense layer: 300*899 inputs to 300 hidden units.
    const int in_dim = 300 * 899, out_dim = 300;
    auto x = random_vec(static_cast<size_t>(in_dim), rng);
    auto w = random_vec(static_cast<size_t>(in_dim) * out_dim, rng);
    auto b = random_vec(static_cast<size_t>(out_dim), rng);
    std::vector<float> y(out_dim);
    report("affine 269700->300", time_pair(
        repeats, [&] { k::ref::affine_forward(x.data(), w.data(), b.data(), y.data(), in_dim, out_dim); },
        [&] { k::affine_forward(x.data(), w.data(), b.data(), y.data(), in_dim, out_dim); }));

    std::vector<float> dy = random_vec(static_cast<size_t>(out_dim), rng);
    std::vector<float> dx(x.size()), dw(w.size()), db(b.size());
    report("affine backward", time_pair(
        repeats,
        [&] {
          k::ref::affine_backward(x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data(),
                                  in_dim, out_dim);
        },
        [&] {
          k::affine_backward(x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data(),
                             in_dim, out_dim);
        }));
  }

  {
    // Document max-pool: 300 channels, window 100 over 998 positions.
    const int c = 300, len = 998, window = 100;
    auto x = random_vec(static_cast<size_t>(c) * len, rng);
    std::vector<float> y(static_cast<size_t>(c) * (len - window + 1));
    std::vector<int32_t> argmax(y.size());
    report("maxpool 300x998 w100", time_pair(
        repeats, [&] { k::ref::maxpool_forward(x.data(), y.data(), argmax.data(), c, len, window); },
        [&] { k::maxpool_forward(x.data(), y.data(), argmax.data(), c, len, window); }));
  }

  {
    const size_t n = 1 << 22;
    auto x = random_vec(n, rng);
    std::vector<float> y(n);
    report("tanh 4M", time_pair(repeats, [&] { k::ref::tanh_forward(x.data(), y.data(), n); },
                                [&] { k::tanh_forward(x.data(), y.data(), n); }));
  }

  return 0;
}
