#include "coldspray/tensor.hpp"

namespace coldspray {

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols != b.rows) {
        raise(ErrorKind::ShapeMismatch, "matmul: " + a.shape_string() + " * " + b.shape_string());
    }
    Tensor out(a.rows, b.cols);
    const double* av = a.values.data();
    const double* bv = b.values.data();
    double* ov = out.values.data();
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = av[i * a.cols + k];
            if (aik == 0.0) {
                continue;
            }
            const double* brow = bv + k * b.cols;
            double* orow = ov + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

} // namespace coldspray
