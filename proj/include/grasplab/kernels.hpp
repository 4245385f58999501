#pragma once

#include <cstddef>

namespace grasplab::kernels {

// Dense kernels behind every layer and every backward rule. The parallel
// versions assign each output element to exactly one loop iteration and keep
// the per-element accumulation order identical to the serial reference, so
// results are bit-identical for any OpenMP thread count.
//
// The serial reference implementations live in grasplab::kernels::serial and
// are kept for equivalence tests and the kernel benchmark.

inline constexpr std::size_t kParallelCutoff = 1 << 12;  // elements of output work

// c[m x n] = op(a)[m x k] * op(b)[k x n]; op transposes when the flag is set.
// Physical layouts: a is m x k (or k x m when ta), b is k x n (or n x k when tb).
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n, bool ta = false, bool tb = false);

// Valid convolution, stride s. in: (C,H,W); kernels: (OC,C,KH,KW); bias: OC or null.
// out: (OC,OH,OW) with OH=(H-KH)/s+1, OW=(W-KW)/s+1 (caller checks fit).
void conv2d(const double* in, const double* kernels, const double* bias, double* out,
            std::size_t C, std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
            std::size_t KW, std::size_t s);

void conv2d_grad_input(const double* dout, const double* kernels, double* din, std::size_t C,
                       std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
                       std::size_t KW, std::size_t s);

void conv2d_grad_kernels(const double* dout, const double* in, double* dkernels, std::size_t C,
                         std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
                         std::size_t KW, std::size_t s);

void conv2d_grad_bias(const double* dout, double* dbias, std::size_t OC, std::size_t OH,
                      std::size_t OW);

// Non-overlapping pooling over (C,H,W); ph|H, pw|W. argmax (flat input index
// per output element) may be null when not needed.
void maxpool2d(const double* in, double* out, std::size_t* argmax, std::size_t C, std::size_t H,
               std::size_t W, std::size_t ph, std::size_t pw);

void maxpool2d_grad(const double* dout, const std::size_t* argmax, double* din, std::size_t C,
                    std::size_t H, std::size_t W, std::size_t ph, std::size_t pw);

void meanpool2d(const double* in, double* out, std::size_t C, std::size_t H, std::size_t W,
                std::size_t ph, std::size_t pw);

void meanpool2d_grad(const double* dout, double* din, std::size_t C, std::size_t H,
                     std::size_t W, std::size_t ph, std::size_t pw);

// Elementwise maps.
void relu(const double* in, double* out, std::size_t n);
void relu_grad(const double* dout, const double* in, double* din, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double s, double* out, std::size_t n);
void square(const double* a, double* out, std::size_t n);
void log_clamped(const double* a, double floor, double* out, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x

// Reductions stay serial: their cost is negligible next to gemm/conv and a
// fixed summation order keeps results reproducible.
double sum(const double* a, std::size_t n);

// Max-subtraction stabilized softmax over a length-n vector.
void softmax(const double* logits, double* out, std::size_t n);

namespace serial {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n, bool ta = false, bool tb = false);

void conv2d(const double* in, const double* kernels, const double* bias, double* out,
            std::size_t C, std::size_t H, std::size_t W, std::size_t OC, std::size_t KH,
            std::size_t KW, std::size_t s);

void maxpool2d(const double* in, double* out, std::size_t* argmax, std::size_t C, std::size_t H,
               std::size_t W, std::size_t ph, std::size_t pw);

void softmax(const double* logits, double* out, std::size_t n);

}  // namespace serial

}  // namespace grasplab::kernels
