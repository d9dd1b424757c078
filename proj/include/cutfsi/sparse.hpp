// Compressed-row sparse matrices and a direct LU factorization backed by
// UMFPACK (multifrontal LU, AMD fill-reducing ordering, partial pivoting).
#pragma once

#include <suitesparse/umfpack.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cutfsi {

/// Square or rectangular CSR matrix; column indices strictly increase in each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx, std::vector<double> values)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {}

  static SparseMatrix identity(int n) {
    std::vector<int> ptr(n + 1), idx(n);
    std::iota(ptr.begin(), ptr.end(), 0);
    std::iota(idx.begin(), idx.end(), 0);
    return {n, n, std::move(ptr), std::move(idx), std::vector<double>(n, 1.0)};
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return col_idx_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Stored value or 0.
  double at(int i, int j) const {
    const auto first = col_idx_.begin() + row_ptr_[i];
    const auto last = col_idx_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return it != last && *it == j ? values_[it - col_idx_.begin()] : 0.0;
  }

  /// y = A x
  std::vector<double> multiply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
    std::vector<double> y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
      y[i] = s;
    }
    return y;
  }

  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const {
    const std::vector<double> ay = multiply(y);
    return std::inner_product(x.begin(), x.end(), ay.begin(), 0.0);
  }

  SparseMatrix transpose() const {
    std::vector<int> ptr(cols_ + 1, 0);
    for (int j : col_idx_) ++ptr[j + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<int> idx(nonzeros());
    std::vector<double> val(nonzeros());
    std::vector<int> next(ptr.begin(), ptr.end() - 1);
    for (int i = 0; i < rows_; ++i) {
      for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        const int q = next[col_idx_[p]]++;
        idx[q] = i;
        val[q] = values_[p];
      }
    }
    return {cols_, rows_, std::move(ptr), std::move(idx), std::move(val)};
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// Coordinate-format accumulator; duplicates are summed on compression.
class TripletList {
 public:
  TripletList(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) { entries_.push_back({i, j, v}); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  std::size_t size() const { return entries_.size(); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  /// Entries keep their insertion order within (row, col), so summation order
  /// and hence the result are deterministic.
  SparseMatrix compress() const {
    std::vector<int> count(rows_ + 1, 0);
    for (const Entry& e : entries_) ++count[e.i + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<int> next(count.begin(), count.end() - 1);
    std::vector<std::pair<int, double>> by_row(entries_.size());
    for (const Entry& e : entries_) by_row[next[e.i]++] = {e.j, e.v};

    std::vector<int> ptr(rows_ + 1, 0);
    std::vector<int> idx;
    std::vector<double> val;
    idx.reserve(entries_.size() / 2);
    val.reserve(entries_.size() / 2);
    for (int i = 0; i < rows_; ++i) {
      auto first = by_row.begin() + count[i];
      auto last = by_row.begin() + count[i + 1];
      std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto it = first; it != last; ++it) {
        if (!idx.empty() && static_cast<int>(idx.size()) > ptr[i] && idx.back() == it->first) {
          val.back() += it->second;
        } else {
          idx.push_back(it->first);
          val.push_back(it->second);
        }
      }
      ptr[i + 1] = static_cast<int>(idx.size());
    }
    return {rows_, cols_, std::move(ptr), std::move(idx), std::move(val)};
  }

 private:
  struct Entry {
    int i;
    int j;
    double v;
  };
  int rows_;
  int cols_;
  std::vector<Entry> entries_;
};

/// alpha A + beta B over the union pattern.
inline SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  std::vector<int> ptr(a.rows() + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  idx.reserve(a.nonzeros() + b.nonzeros());
  val.reserve(a.nonzeros() + b.nonzeros());
  for (int i = 0; i < a.rows(); ++i) {
    int p = a.row_ptr()[i], pe = a.row_ptr()[i + 1];
    int q = b.row_ptr()[i], qe = b.row_ptr()[i + 1];
    while (p < pe || q < qe) {
      const int ja = p < pe ? a.col_idx()[p] : INT32_MAX;
      const int jb = q < qe ? b.col_idx()[q] : INT32_MAX;
      if (ja == jb) {
        idx.push_back(ja);
        val.push_back(alpha * a.values()[p++] + beta * b.values()[q++]);
      } else if (ja < jb) {
        idx.push_back(ja);
        val.push_back(alpha * a.values()[p++]);
      } else {
        idx.push_back(jb);
        val.push_back(beta * b.values()[q++]);
      }
    }
    ptr[i + 1] = static_cast<int>(idx.size());
  }
  return {a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val)};
}

inline std::vector<double> matvec(const SparseMatrix& a, std::span<const double> x) { return a.multiply(x); }

/// One "row col value" triple per line, 0-based.
inline void export_coordinate(const SparseMatrix& a, std::ostream& os) {
  os << std::setprecision(17);
  for (int i = 0; i < a.rows(); ++i) {
    for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      os << i << ' ' << a.col_idx()[p] << ' ' << a.values()[p] << '\n';
    }
  }
}

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(int row, const std::string& what) : std::runtime_error(what), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

struct FactorizationInfo {
  double reciprocal_condition = 0.0;  ///< UMFPACK's cheap estimate min|U_ii| / max|U_ii|
  double lu_nonzeros = 0.0;
  double flops = 0.0;
};

/// LU factors of a square sparse matrix, reusable for any number of solves.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix must be square");
    // CSR arrays of A are the CSC arrays of A^T; UMFPACK factors A^T and the
    // solves use the transposed system.
    ptr_ = a.row_ptr();
    idx_ = a.col_idx();
    val_ = a.values();
    umfpack_di_defaults(control_.data());
    control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
    std::array<double, UMFPACK_INFO> info{};
    void* symbolic = nullptr;
    int status = umfpack_di_symbolic(n_, n_, ptr_.data(), idx_.data(), val_.data(), &symbolic, control_.data(),
                                     info.data());
    if (status != UMFPACK_OK) throw std::runtime_error("factorize: symbolic analysis failed, status " + std::to_string(status));
    status = umfpack_di_numeric(ptr_.data(), idx_.data(), val_.data(), symbolic, &numeric_, control_.data(), info.data());
    umfpack_di_free_symbolic(&symbolic);
    if (status == UMFPACK_WARNING_singular_matrix) {
      const int row = first_zero_pivot();
      release();
      throw SingularMatrixError(row, "factorize: matrix is singular (zero pivot at row " + std::to_string(row) + ")");
    }
    if (status != UMFPACK_OK) {
      release();
      throw std::runtime_error("factorize: numeric factorization failed, status " + std::to_string(status));
    }
    info_.reciprocal_condition = info[UMFPACK_RCOND];
    info_.lu_nonzeros = info[UMFPACK_LNZ] + info[UMFPACK_UNZ];
    info_.flops = info[UMFPACK_FLOPS];
  }

  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;
  Factorization(Factorization&& o) noexcept { *this = std::move(o); }
  Factorization& operator=(Factorization&& o) noexcept {
    if (this != &o) {
      release();
      n_ = o.n_;
      ptr_ = std::move(o.ptr_);
      idx_ = std::move(o.idx_);
      val_ = std::move(o.val_);
      control_ = o.control_;
      info_ = o.info_;
      numeric_ = std::exchange(o.numeric_, nullptr);
    }
    return *this;
  }
  ~Factorization() { release(); }

  int size() const { return n_; }
  const FactorizationInfo& info() const { return info_; }

  std::vector<double> solve(std::span<const double> b) const {
    if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("solve: dimension mismatch");
    std::vector<double> x(n_, 0.0);
    std::array<double, UMFPACK_INFO> info{};
    const int status = umfpack_di_solve(UMFPACK_At, ptr_.data(), idx_.data(), val_.data(), x.data(), b.data(),
                                        numeric_, control_.data(), info.data());
    if (status != UMFPACK_OK) throw std::runtime_error("solve: UMFPACK status " + std::to_string(status));
    return x;
  }

 private:
  int first_zero_pivot() const {
    int lnz = 0, unz = 0, nr = 0, nc = 0, nzud = 0;
    umfpack_di_get_lunz(&lnz, &unz, &nr, &nc, &nzud, numeric_);
    std::vector<int> p(n_), q(n_);
    std::vector<double> udiag(n_);
    int do_recip = 0;
    umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(), udiag.data(),
                           &do_recip, nullptr, numeric_);
    for (int k = 0; k < n_; ++k) {
      if (udiag[k] == 0.0) return q[k];
    }
    return -1;
  }

  void release() {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
  }

  int n_ = 0;
  std::vector<int> ptr_;
  std::vector<int> idx_;
  std::vector<double> val_;
  std::array<double, UMFPACK_CONTROL> control_{};
  FactorizationInfo info_;
  void* numeric_ = nullptr;
};

inline Factorization factorize(const SparseMatrix& a) { return Factorization(a); }
inline std::vector<double> solve(const Factorization& f, std::span<const double> b) { return f.solve(b); }

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// ||A x - b|| / ||b|| (absolute when b = 0).
inline double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
  std::vector<double> r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

}  // namespace cutfsi
