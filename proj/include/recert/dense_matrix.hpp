#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace recert {

// Row-major dense matrix of IEEE doubles. Entries are validated finite on
// construction from external data; results of internal arithmetic are the
// caller's responsibility.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);  // zero-filled
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix scaled(const DenseMatrix& a, double factor);

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);
std::vector<double> tmatvec(const DenseMatrix& a, std::span<const double> x);  // A^T x

DenseMatrix gram(const DenseMatrix& a);  // A^T A, exactly symmetric by construction
DenseMatrix gram_outer(const DenseMatrix& a);  // A A^T

DenseMatrix select_columns(const DenseMatrix& a, std::span<const int> idx);
DenseMatrix slice_sym(const DenseMatrix& g, std::span<const int> idx);  // G[idx, idx]

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_column_norm(const DenseMatrix& a);

double norm2(std::span<const double> v);
double norm1(std::span<const double> v);
double norm_inf(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

// Shortest decimal form that round-trips a double (up to 17 significant digits).
std::string format_double(double x);

// Text format: first line "rows cols", then one line of space-separated
// entries per row. Round-trips to full double precision.
DenseMatrix read_matrix_text(std::istream& in);
void write_matrix_text(std::ostream& out, const DenseMatrix& a);
DenseMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const DenseMatrix& a);

}  // namespace recert
