#include "har/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace har {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_)
            throw ConfigError("from_rows: ragged row lengths");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row(std::size_t r) const {
    Matrix out(1, cols_);
    for (std::size_t c = 0; c < cols_; ++c) out(0, c) = (*this)(r, c);
    return out;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ConfigError("matmul: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(j, i) = m(i, j);
    return out;
}

Matrix softmax_rows(const Matrix& m) {
    if (m.cols() == 0)
        throw ConfigError("softmax_rows: matrix has no columns");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mx = m(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ConfigError("hadamard: shapes " + a.shape_str() + " and " + b.shape_str());
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.values()[i] = a.values()[i] * b.values()[i];
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ConfigError("add: shapes " + a.shape_str() + " and " + b.shape_str());
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.values()[i] = a.values()[i] + b.values()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i)
        out.values()[i] = m.values()[i] * s;
    return out;
}

void accumulate(Matrix& into, const Matrix& inc) {
    if (!into.same_shape(inc))
        throw ConfigError("accumulate: shapes " + into.shape_str() + " and " + inc.shape_str());
    for (std::size_t i = 0; i < into.size(); ++i)
        into.values()[i] += inc.values()[i];
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ConfigError("max_abs_diff: shapes " + a.shape_str() + " and " + b.shape_str());
    double mx = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        mx = std::max(mx, std::abs(a.values()[i] - b.values()[i]));
    return mx;
}

}  // namespace har
