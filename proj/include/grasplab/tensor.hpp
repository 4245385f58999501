#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace grasplab {

// Thrown when tensor/layer shapes do not line up.
class DimensionError : public std::runtime_error {
  public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on invalid configuration (zero dims, empty datasets, bad keys...).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a caller violates an operation contract (non-scalar loss,
// probabilities out of range, empty batch...).
class ContractError : public std::runtime_error {
  public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Verification mode gates the finite-value check at tensor construction.
// On by default; heavy experiment sweeps may switch it off.
bool verification_mode();
void set_verification_mode(bool on);

// Dense row-major double tensor. Values are immutable by convention once a
// tensor is handed to the graph; mutation helpers exist for builders and
// optimizers that own their copies.
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), values_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (count(shape_) != values_.size()) {
            throw DimensionError("tensor: shape product " + std::to_string(count(shape_)) +
                                 " != value count " + std::to_string(values_.size()));
        }
        if (verification_mode()) check_finite();
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.values_) x = v;
        if (verification_mode()) t.check_finite();
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t numel() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double at(std::size_t i) const { return values_.at(i); }

    // 2-d convenience (row-major).
    double at2(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }
    double& at2(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }

    bool is_scalar() const { return numel() == 1; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && values_ == other.values_;
    }

    void fill(double v) {
        for (auto& x : values_) x = v;
    }

    void check_finite() const {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw ContractError("tensor: non-finite value at flat index " + std::to_string(i));
            }
        }
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

}  // namespace grasplab
