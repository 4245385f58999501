#include "grasplab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace grasplab::kernels {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n, bool ta, bool tb) {
    const std::int64_t mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelCutoff)
    for (std::int64_t i = 0; i < mm; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ta ? a[p * m + i] : a[i * k + p];
                const double bv = tb ? b[j * k + p] : b[p * n + j];
                acc += av * bv;
            }
            c[i * n + j] = acc;
        }
    }
}

void conv2d(const double* in, const double* kernels, const double* bias, double* out,
            std::size_t C, std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
            std::size_t KW, std::size_t s) {
    const std::size_t OH = (H - KH) / s + 1;
    const std::size_t OW = (W - KW) / s + 1;
    const std::int64_t total = static_cast<std::int64_t>(OC * OH * OW);
#pragma omp parallel for schedule(static) if (OC * OH * OW * C * KH * KW >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t oc = static_cast<std::size_t>(idx) / (OH * OW);
        const std::size_t rem = static_cast<std::size_t>(idx) % (OH * OW);
        const std::size_t oy = rem / OW;
        const std::size_t ox = rem % OW;
        double acc = bias ? bias[oc] : 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t kh = 0; kh < KH; ++kh) {
                const double* inrow = in + c * H * W + (oy * s + kh) * W + ox * s;
                const double* krow = kernels + ((oc * C + c) * KH + kh) * KW;
                for (std::size_t kw = 0; kw < KW; ++kw) acc += inrow[kw] * krow[kw];
            }
        }
        out[idx] = acc;
    }
}

void conv2d_grad_input(const double* dout, const double* kernels, double* din, std::size_t C,
                       std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
                       std::size_t KW, std::size_t s) {
    const std::size_t OH = (H - KH) / s + 1;
    const std::size_t OW = (W - KW) / s + 1;
    const std::int64_t total = static_cast<std::int64_t>(C * H * W);
#pragma omp parallel for schedule(static) if (C * H * W * OC >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t c = static_cast<std::size_t>(idx) / (H * W);
        const std::size_t rem = static_cast<std::size_t>(idx) % (H * W);
        const std::size_t y = rem / W;
        const std::size_t x = rem % W;
        double acc = 0.0;
        for (std::size_t oc = 0; oc < OC; ++oc) {
            for (std::size_t kh = 0; kh < KH; ++kh) {
                if (y < kh || (y - kh) % s != 0) continue;
                const std::size_t oy = (y - kh) / s;
                if (oy >= OH) continue;
                for (std::size_t kw = 0; kw < KW; ++kw) {
                    if (x < kw || (x - kw) % s != 0) continue;
                    const std::size_t ox = (x - kw) / s;
                    if (ox >= OW) continue;
                    acc += dout[oc * OH * OW + oy * OW + ox] *
                           kernels[((oc * C + c) * KH + kh) * KW + kw];
                }
            }
        }
        din[idx] = acc;
    }
}

void conv2d_grad_kernels(const double* dout, const double* in, double* dkernels, std::size_t C,
                         std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
                         std::size_t KW, std::size_t s) {
    const std::size_t OH = (H - KH) / s + 1;
    const std::size_t OW = (W - KW) / s + 1;
    const std::int64_t total = static_cast<std::int64_t>(OC * C * KH * KW);
#pragma omp parallel for schedule(static) if (OC * C * KH * KW * OH * OW >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t oc = static_cast<std::size_t>(idx) / (C * KH * KW);
        std::size_t rem = static_cast<std::size_t>(idx) % (C * KH * KW);
        const std::size_t c = rem / (KH * KW);
        rem %= KH * KW;
        const std::size_t kh = rem / KW;
        const std::size_t kw = rem % KW;
        double acc = 0.0;
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox) {
                acc += dout[oc * OH * OW + oy * OW + ox] *
                       in[c * H * W + (oy * s + kh) * W + (ox * s + kw)];
            }
        }
        dkernels[idx] = acc;
    }
}

void conv2d_grad_bias(const double* dout, double* dbias, std::size_t OC, std::size_t OH,
                      std::size_t OW) {
    for (std::size_t oc = 0; oc < OC; ++oc) {
        double acc = 0.0;
        for (std::size_t i = 0; i < OH * OW; ++i) acc += dout[oc * OH * OW + i];
        dbias[oc] = acc;
    }
}

void maxpool2d(const double* in, double* out, std::size_t* argmax, std::size_t C, std::size_t H,
               std::size_t W, std::size_t ph, std::size_t pw) {
    const std::size_t OH = H / ph;
    const std::size_t OW = W / pw;
    const std::int64_t total = static_cast<std::int64_t>(C * OH * OW);
#pragma omp parallel for schedule(static) if (C * H * W >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t c = static_cast<std::size_t>(idx) / (OH * OW);
        const std::size_t rem = static_cast<std::size_t>(idx) % (OH * OW);
        const std::size_t oy = rem / OW;
        const std::size_t ox = rem % OW;
        double best = in[c * H * W + oy * ph * W + ox * pw];
        std::size_t best_idx = c * H * W + oy * ph * W + ox * pw;
        for (std::size_t dy = 0; dy < ph; ++dy) {
            for (std::size_t dx = 0; dx < pw; ++dx) {
                const std::size_t k = c * H * W + (oy * ph + dy) * W + (ox * pw + dx);
                if (in[k] > best) {
                    best = in[k];
                    best_idx = k;
                }
            }
        }
        out[idx] = best;
        if (argmax) argmax[idx] = best_idx;
    }
}

void maxpool2d_grad(const double* dout, const std::size_t* argmax, double* din, std::size_t C,
                    std::size_t H, std::size_t W, std::size_t ph, std::size_t pw) {
    const std::size_t n_out = C * (H / ph) * (W / pw);
    for (std::size_t i = 0; i < C * H * W; ++i) din[i] = 0.0;
    // windows are disjoint, each argmax hits a distinct input slot
    const std::int64_t total = static_cast<std::int64_t>(n_out);
#pragma omp parallel for schedule(static) if (n_out >= kParallelCutoff)
    for (std::int64_t i = 0; i < total; ++i) din[argmax[i]] = dout[i];
}

void meanpool2d(const double* in, double* out, std::size_t C, std::size_t H, std::size_t W,
                std::size_t ph, std::size_t pw) {
    const std::size_t OH = H / ph;
    const std::size_t OW = W / pw;
    const double inv = 1.0 / static_cast<double>(ph * pw);
    const std::int64_t total = static_cast<std::int64_t>(C * OH * OW);
#pragma omp parallel for schedule(static) if (C * H * W >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t c = static_cast<std::size_t>(idx) / (OH * OW);
        const std::size_t rem = static_cast<std::size_t>(idx) % (OH * OW);
        const std::size_t oy = rem / OW;
        const std::size_t ox = rem % OW;
        double acc = 0.0;
        for (std::size_t dy = 0; dy < ph; ++dy)
            for (std::size_t dx = 0; dx < pw; ++dx)
                acc += in[c * H * W + (oy * ph + dy) * W + (ox * pw + dx)];
        out[idx] = acc * inv;
    }
}

void meanpool2d_grad(const double* dout, double* din, std::size_t C, std::size_t H,
                     std::size_t W, std::size_t ph, std::size_t pw) {
    const std::size_t OH = H / ph;
    const std::size_t OW = W / pw;
    const double inv = 1.0 / static_cast<double>(ph * pw);
    const std::int64_t total = static_cast<std::int64_t>(C * H * W);
#pragma omp parallel for schedule(static) if (C * H * W >= kParallelCutoff)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t c = static_cast<std::size_t>(idx) / (H * W);
        const std::size_t rem = static_cast<std::size_t>(idx) % (H * W);
        const std::size_t y = rem / W;
        const std::size_t x = rem % W;
        din[idx] = dout[c * OH * OW + (y / ph) * OW + (x / pw)] * inv;
    }
}

void relu(const double* in, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_grad(const double* dout, const double* in, double* din, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) din[i] = in[i] > 0.0 ? dout[i] : 0.0;
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = a[i] * s;
}

void square(const double* a, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = a[i] * a[i];
}

void log_clamped(const double* a, double floor, double* out, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) out[i] = std::log(std::max(a[i], floor));
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
    for (std::int64_t i = 0; i < nn; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void softmax(const double* logits, double* out, std::size_t n) {
    double mx = logits[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // the shift is floored so exp never underflows to an exact zero
        out[i] = std::exp(std::max(logits[i] - mx, -700.0));
        z += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

namespace serial {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n, bool ta, bool tb) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ta ? a[p * m + i] : a[i * k + p];
                const double bv = tb ? b[j * k + p] : b[p * n + j];
                acc += av * bv;
            }
            c[i * n + j] = acc;
        }
    }
}

void conv2d(const double* in, const double* kernels, const double* bias, double* out,
            std::size_t C, std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
            std::size_t KW, std::size_t s) {
    const std::size_t OH = (H - KH) / s + 1;
    const std::size_t OW = (W - KW) / s + 1;
    for (std::size_t oc = 0; oc < OC; ++oc) {
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox) {
                double acc = bias ? bias[oc] : 0.0;
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t kh = 0; kh < KH; ++kh)
                        for (std::size_t kw = 0; kw < KW; ++kw)
                            acc += in[c * H * W + (oy * s + kh) * W + (ox * s + kw)] *
                                   kernels[((oc * C + c) * KH + kh) * KW + kw];
                out[oc * OH * OW + oy * OW + ox] = acc;
            }
        }
    }
}

void maxpool2d(const double* in, double* out, std::size_t* argmax, std::size_t C, std::size_t H,
               std::size_t W, std::size_t ph, std::size_t pw) {
    const std::size_t OH = H / ph;
    const std::size_t OW = W / pw;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox) {
                double best = in[c * H * W + oy * ph * W + ox * pw];
                std::size_t best_idx = c * H * W + oy * ph * W + ox * pw;
                for (std::size_t dy = 0; dy < ph; ++dy) {
                    for (std::size_t dx = 0; dx < pw; ++dx) {
                        const std::size_t k = c * H * W + (oy * ph + dy) * W + (ox * pw + dx);
                        if (in[k] > best) {
                            best = in[k];
                            best_idx = k;
                        }
                    }
                }
                out[c * OH * OW + oy * OW + ox] = best;
                if (argmax) argmax[c * OH * OW + oy * OW + ox] = best_idx;
            }
        }
    }
}

void softmax(const double* logits, double* out, std::size_t n) {
    double mx = logits[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(std::max(logits[i] - mx, -700.0));
        z += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

}  // namespace serial

}  // namespace grasplab::kernels
