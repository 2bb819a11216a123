#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coldspray/errors.hpp"

namespace coldspray {

/// Dense row-major matrix of doubles with an optional gradient buffer of the
/// same shape. Vectors are 1-column tensors, scalars 1x1.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> grad; // empty unless gradient tracking is active

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
    Tensor(std::size_t r, std::size_t c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
        if (values.size() != rows * cols) {
            raise(ErrorKind::ShapeMismatch, "value count " + std::to_string(values.size()) +
                                                " does not match shape " + shape_string());
        }
    }

    std::size_t size() const { return rows * cols; }

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    void ensure_grad() {
        if (grad.size() != values.size()) {
            grad.assign(values.size(), 0.0);
        }
    }

    void zero_grad() { grad.assign(values.size(), 0.0); }

    bool same_shape(const Tensor& other) const { return rows == other.rows && cols == other.cols; }

    std::string shape_string() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }

    static Tensor identity(std::size_t n) {
        Tensor t(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            t.at(i, i) = 1.0;
        }
        return t;
    }

    static Tensor column(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor(n, 1, std::move(v));
    }
};

inline void require_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
    if (t.rows != rows || t.cols != cols) {
        raise(ErrorKind::ShapeMismatch, std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                            std::to_string(cols) + ", got " + t.shape_string());
    }
}

/// out = a * b, plain triple loop in ikj order.
Tensor matmul(const Tensor& a, const Tensor& b);

} // namespace coldspray
