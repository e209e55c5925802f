#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

// Dense kernels behind the autodiff ops. Every kernel exists twice: a plain
// serial version under kernels::ref and an OpenMP version under kernels.
// Both compute each output element with the same inner-loop order and
// 64-bit accumulation, so their results are bit-identical; tests compare
// them exactly and the bench tool times them against each other.
//
// Layout: matrices are row-major. affine takes x[in], w[in x out], b[out].
// conv takes x[c x L] and kernels[f][i][j] flattened as ((f*c)+i)*w+j,
// spanning all c channels and sliding along the sequence axis.

namespace duet::kernels {

namespace ref {

template <class T>
void affine_forward(const T* x, const T* w, const T* b, T* y, int in_dim, int out_dim) {
  for (int o = 0; o < out_dim; ++o) {
    double acc = static_cast<double>(b[o]);
    for (int i = 0; i < in_dim; ++i) {
      acc += static_cast<double>(x[i]) * static_cast<double>(w[static_cast<size_t>(i) * out_dim + o]);
    }
    y[o] = static_cast<T>(acc);
  }
}

template <class T>
void affine_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int in_dim,
                     int out_dim) {
  if (dw) {
    for (int i = 0; i < in_dim; ++i) {
      for (int o = 0; o < out_dim; ++o) {
        dw[static_cast<size_t>(i) * out_dim + o] +=
            static_cast<T>(static_cast<double>(x[i]) * static_cast<double>(dy[o]));
      }
    }
  }
  if (db) {
    for (int o = 0; o < out_dim; ++o) db[o] += dy[o];
  }
  if (dx) {
    for (int i = 0; i < in_dim; ++i) {
      double acc = 0.0;
      for (int o = 0; o < out_dim; ++o) {
        acc += static_cast<double>(w[static_cast<size_t>(i) * out_dim + o]) *
               static_cast<double>(dy[o]);
      }
      dx[i] += static_cast<T>(acc);
    }
  }
}

template <class T>
void conv_forward(const T* x, const T* k, const T* b, T* y, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
  for (int fi = 0; fi < f; ++fi) {
    for (int t = 0; t < out_len; ++t) {
      double acc = static_cast<double>(b[fi]);
      const T* kf = k + static_cast<size_t>(fi) * c * w;
      for (int i = 0; i < c; ++i) {
        const T* xrow = x + static_cast<size_t>(i) * len + t;
        const T* krow = kf + static_cast<size_t>(i) * w;
        for (int j = 0; j < w; ++j) {
          acc += static_cast<double>(xrow[j]) * static_cast<double>(krow[j]);
        }
      }
      y[static_cast<size_t>(fi) * out_len + t] = static_cast<T>(acc);
    }
  }
}

template <class T>
void conv_backward_kernels(const T* x, const T* dy, T* dk, T* db, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
  for (int fi = 0; fi < f; ++fi) {
    const T* dyf = dy + static_cast<size_t>(fi) * out_len;
    for (int i = 0; i < c; ++i) {
      const T* xrow = x + static_cast<size_t>(i) * len;
      T* dkrow = dk + (static_cast<size_t>(fi) * c + i) * w;
      for (int j = 0; j < w; ++j) {
        double acc = 0.0;
        for (int t = 0; t < out_len; ++t) {
          acc += static_cast<double>(xrow[t + j]) * static_cast<double>(dyf[t]);
        }
        dkrow[j] += static_cast<T>(acc);
      }
    }
    double bacc = 0.0;
    for (int t = 0; t < out_len; ++t) bacc += static_cast<double>(dyf[t]);
    db[fi] += static_cast<T>(bacc);
  }
}

template <class T>
void conv_backward_input(const T* k, const T* dy, T* dx, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
  for (int i = 0; i < c; ++i) {
    for (int l = 0; l < len; ++l) {
      // Windows t with t <= l < t+w contribute via kernel column l-t.
      const int j_lo = std::max(0, l - (out_len - 1));
      const int j_hi = std::min(w - 1, l);
      double acc = 0.0;
      for (int fi = 0; fi < f; ++fi) {
        const T* kf = k + (static_cast<size_t>(fi) * c + i) * w;
        const T* dyf = dy + static_cast<size_t>(fi) * out_len;
        for (int j = j_lo; j <= j_hi; ++j) {
          acc += static_cast<double>(kf[j]) * static_cast<double>(dyf[l - j]);
        }
      }
      dx[static_cast<size_t>(i) * len + l] += static_cast<T>(acc);
    }
  }
}

template <class T>
void maxpool_forward(const T* x, T* y, int32_t* argmax, int c, int len, int window) {
  const int out_len = len - window + 1;
  for (int i = 0; i < c; ++i) {
    const T* xrow = x + static_cast<size_t>(i) * len;
    for (int t = 0; t < out_len; ++t) {
      int best = t;
      for (int j = 1; j < window; ++j) {
        if (xrow[t + j] > xrow[best]) best = t + j;  // ties keep earliest
      }
      y[static_cast<size_t>(i) * out_len + t] = xrow[best];
      argmax[static_cast<size_t>(i) * out_len + t] = best;
    }
  }
}

template <class T>
void maxpool_backward(const int32_t* argmax, const T* dy, T* dx, int c, int len, int window) {
  const int out_len = len - window + 1;
  for (int i = 0; i < c; ++i) {
    const int32_t* arow = argmax + static_cast<size_t>(i) * out_len;
    const T* dyrow = dy + static_cast<size_t>(i) * out_len;
    T* dxrow = dx + static_cast<size_t>(i) * len;
    for (int l = 0; l < len; ++l) {
      const int t_lo = std::max(0, l - window + 1);
      const int t_hi = std::min(out_len - 1, l);
      double acc = 0.0;
      for (int t = t_lo; t <= t_hi; ++t) {
        if (arow[t] == l) acc += static_cast<double>(dyrow[t]);
      }
      dxrow[l] += static_cast<T>(acc);
    }
  }
}

template <class T>
void tanh_forward(const T* x, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

template <class T>
void tanh_backward(const T* y, const T* dy, T* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) dx[i] += (T(1) - y[i] * y[i]) * dy[i];
}

template <class T>
void hadamard_forward(const T* q, const T* d, T* y, int c, int m) {
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < m; ++j) {
      y[static_cast<size_t>(i) * m + j] = q[i] * d[static_cast<size_t>(i) * m + j];
    }
  }
}

template <class T>
void hadamard_backward(const T* q, const T* d, const T* dy, T* dq, T* dd, int c, int m) {
  for (int i = 0; i < c; ++i) {
    const T* drow = d + static_cast<size_t>(i) * m;
    const T* dyrow = dy + static_cast<size_t>(i) * m;
    if (dq) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += static_cast<double>(drow[j]) * static_cast<double>(dyrow[j]);
      dq[i] += static_cast<T>(acc);
    }
    if (dd) {
      T* ddrow = dd + static_cast<size_t>(i) * m;
      for (int j = 0; j < m; ++j) ddrow[j] += q[i] * dyrow[j];
    }
  }
}

}  // namespace ref

// OpenMP versions. Each output element is owned by exactly one iteration,
// so no two threads write the same location and the result matches ref
// bit for bit regardless of thread count or schedule.

template <class T>
void affine_forward(const T* x, const T* w, const T* b, T* y, int in_dim, int out_dim) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim; ++o) {
    double acc = static_cast<double>(b[o]);
    for (int i = 0; i < in_dim; ++i) {
      acc += static_cast<double>(x[i]) * static_cast<double>(w[static_cast<size_t>(i) * out_dim + o]);
    }
    y[o] = static_cast<T>(acc);
  }
}

template <class T>
void affine_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int in_dim,
                     int out_dim) {
  if (dw) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_dim; ++i) {
      for (int o = 0; o < out_dim; ++o) {
        dw[static_cast<size_t>(i) * out_dim + o] +=
            static_cast<T>(static_cast<double>(x[i]) * static_cast<double>(dy[o]));
      }
    }
  }
  if (db) {
    for (int o = 0; o < out_dim; ++o) db[o] += dy[o];
  }
  if (dx) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_dim; ++i) {
      double acc = 0.0;
      for (int o = 0; o < out_dim; ++o) {
        acc += static_cast<double>(w[static_cast<size_t>(i) * out_dim + o]) *
               static_cast<double>(dy[o]);
      }
      dx[i] += static_cast<T>(acc);
    }
  }
}

template <class T>
void conv_forward(const T* x, const T* k, const T* b, T* y, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
#pragma omp parallel for schedule(static)
  for (int fi = 0; fi < f; ++fi) {
    for (int t = 0; t < out_len; ++t) {
      double acc = static_cast<double>(b[fi]);
      const T* kf = k + static_cast<size_t>(fi) * c * w;
      for (int i = 0; i < c; ++i) {
        const T* xrow = x + static_cast<size_t>(i) * len + t;
        const T* krow = kf + static_cast<size_t>(i) * w;
        for (int j = 0; j < w; ++j) {
          acc += static_cast<double>(xrow[j]) * static_cast<double>(krow[j]);
        }
      }
      y[static_cast<size_t>(fi) * out_len + t] = static_cast<T>(acc);
    }
  }
}

template <class T>
void conv_backward_kernels(const T* x, const T* dy, T* dk, T* db, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
#pragma omp parallel for schedule(static)
  for (int fi = 0; fi < f; ++fi) {
    const T* dyf = dy + static_cast<size_t>(fi) * out_len;
    for (int i = 0; i < c; ++i) {
      const T* xrow = x + static_cast<size_t>(i) * len;
      T* dkrow = dk + (static_cast<size_t>(fi) * c + i) * w;
      for (int j = 0; j < w; ++j) {
        double acc = 0.0;
        for (int t = 0; t < out_len; ++t) {
          acc += static_cast<double>(xrow[t + j]) * static_cast<double>(dyf[t]);
        }
        dkrow[j] += static_cast<T>(acc);
      }
    }
    double bacc = 0.0;
    for (int t = 0; t < out_len; ++t) bacc += static_cast<double>(dyf[t]);
    db[fi] += static_cast<T>(bacc);
  }
}

template <class T>
void conv_backward_input(const T* k, const T* dy, T* dx, int c, int len, int w, int f) {
  const int out_len = len - w + 1;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < c; ++i) {
    for (int l = 0; l < len; ++l) {
      const int j_lo = std::max(0, l - (out_len - 1));
      const int j_hi = std::min(w - 1, l);
      double acc = 0.0;
      for (int fi = 0; fi < f; ++fi) {
        const T* kf = k + (static_cast<size_t>(fi) * c + i) * w;
        const T* dyf = dy + static_cast<size_t>(fi) * out_len;
        for (int j = j_lo; j <= j_hi; ++j) {
          acc += static_cast<double>(kf[j]) * static_cast<double>(dyf[l - j]);
        }
      }
      dx[static_cast<size_t>(i) * len + l] += static_cast<T>(acc);
    }
  }
}

template <class T>
void maxpool_forward(const T* x, T* y, int32_t* argmax, int c, int len, int window) {
  const int out_len = len - window + 1;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < c; ++i) {
    const T* xrow = x + static_cast<size_t>(i) * len;
    for (int t = 0; t < out_len; ++t) {
      int best = t;
      for (int j = 1; j < window; ++j) {
        if (xrow[t + j] > xrow[best]) best = t + j;
      }
      y[static_cast<size_t>(i) * out_len + t] = xrow[best];
      argmax[static_cast<size_t>(i) * out_len + t] = best;
    }
  }
}

template <class T>
void maxpool_backward(const int32_t* argmax, const T* dy, T* dx, int c, int len, int window) {
  const int out_len = len - window + 1;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < c; ++i) {
    const int32_t* arow = argmax + static_cast<size_t>(i) * out_len;
    const T* dyrow = dy + static_cast<size_t>(i) * out_len;
    T* dxrow = dx + static_cast<size_t>(i) * len;
    for (int l = 0; l < len; ++l) {
      const int t_lo = std::max(0, l - window + 1);
      const int t_hi = std::min(out_len - 1, l);
      double acc = 0.0;
      for (int t = t_lo; t <= t_hi; ++t) {
        if (arow[t] == l) acc += static_cast<double>(dyrow[t]);
      }
      dxrow[l] += static_cast<T>(acc);
    }
  }
}

template <class T>
void tanh_forward(const T* x, T* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) y[i] = std::tanh(x[i]);
}

template <class T>
void tanh_backward(const T* y, const T* dy, T* dx, size_t n) {
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i) {
    dx[i] += (T(1) - y[i] * y[i]) * dy[i];
  }
}

template <class T>
void hadamard_forward(const T* q, const T* d, T* y, int c, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < m; ++j) {
      y[static_cast<size_t>(i) * m + j] = q[i] * d[static_cast<size_t>(i) * m + j];
    }
  }
}

template <class T>
void hadamard_backward(const T* q, const T* d, const T* dy, T* dq, T* dd, int c, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < c; ++i) {
    const T* drow = d + static_cast<size_t>(i) * m;
    const T* dyrow = dy + static_cast<size_t>(i) * m;
    if (dq) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += static_cast<double>(drow[j]) * static_cast<double>(dyrow[j]);
      dq[i] += static_cast<T>(acc);
    }
    if (dd) {
      T* ddrow = dd + static_cast<size_t>(i) * m;
      for (int j = 0; j < m; ++j) ddrow[j] += q[i] * dyrow[j];
    }
  }
}

}  // namespace duet::kernels
