#include "recert/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "recert/errors.hpp"

namespace recert {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw Error("matrix dimensions must be positive");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw Error("matrix dimensions must be positive");
    if (data_.size() != rows * cols) throw Error("matrix data length does not match rows*cols");
    if (!all_finite()) throw Error("matrix contains non-finite entries");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw Error("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data().data() + k * b.cols();
            double* crow = c.data().data() + i * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

DenseMatrix scaled(const DenseMatrix& a, double factor) {
    DenseMatrix s = a;
    for (double& x : s.data()) x *= factor;
    return s;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw Error("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

std::vector<double> tmatvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw Error("tmatvec: dimension mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double xi = x[i];
        if (xi == 0.0) continue;
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * r[j];
    }
    return y;
}

DenseMatrix gram(const DenseMatrix& a) {
    DenseMatrix g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double rj = r[j];
            if (rj == 0.0) continue;
            for (std::size_t k = j; k < a.cols(); ++k) g(j, k) += rj * r[k];
        }
    }
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
    return g;
}

DenseMatrix gram_outer(const DenseMatrix& a) {
    DenseMatrix g(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i; j < a.rows(); ++j) {
            double s = dot(a.row(i), a.row(j));
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

DenseMatrix select_columns(const DenseMatrix& a, std::span<const int> idx) {
    DenseMatrix s(a.rows(), idx.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = a(i, static_cast<std::size_t>(idx[j]));
    return s;
}

DenseMatrix slice_sym(const DenseMatrix& g, std::span<const int> idx) {
    DenseMatrix s(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            s(i, j) = g(static_cast<std::size_t>(idx[i]), static_cast<std::size_t>(idx[j]));
    return s;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.data()) s += x * x;
    return std::sqrt(s);
}

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::fabs(x));
    return m;
}

double max_column_norm(const DenseMatrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::string format_double(double x) {
    // Shortest representation that parses back to the same bits.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

DenseMatrix read_matrix_text(std::istream& in) {
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw Error("matrix text: missing 'rows cols' header");
    if (rows == 0 || cols == 0) throw Error("matrix text: dimensions must be positive");
    std::vector<double> data(rows * cols);
    for (std::size_t i = 0; i < rows * cols; ++i)
        if (!(in >> data[i])) throw Error("matrix text: truncated entry list");
    return DenseMatrix(rows, cols, std::move(data));
}

void write_matrix_text(std::ostream& out, const DenseMatrix& a) {
    out << a.rows() << ' ' << a.cols() << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(r[j]);
        }
        out << '\n';
    }
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open matrix file: " + path);
    return read_matrix_text(f);
}

void save_matrix(const std::string& path, const DenseMatrix& a) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open matrix file for writing: " + path);
    write_matrix_text(f, a);
}

}  // namespace recert
