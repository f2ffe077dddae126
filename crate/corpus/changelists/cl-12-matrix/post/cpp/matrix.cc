// SPDX-License-Identifier: Apache-2.0
#include "matrix.h"

#include <cmath>

namespace linalg {

Matrix Matrix::Multiply(const Matrix& other) const {
  TRACE_EVENT("linalg", "Matrix::Multiply");
  CHECK_EQ(cols_, other.rows_) << "shape mismatch";
  VLOG(2) << "multiply " << rows_ << "x" << cols_ << " by " << other.rows_ << "x" << other.cols_;
  Matrix out(rows_, other.cols_);
  out.data_.reserve(rows_ * other.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < other.cols_; ++j) {
      double sum = 0;
      for (int k = 0; k < cols_; ++k) {
        sum += At(i, k) * other.At(k, j);
      }
      out.Set(i, j, sum);
    }
  }
  stats::Counter("linalg/multiply")->Increment();
  return out;
}

double Matrix::Trace() const {
  DCHECK_EQ(rows_, cols_);
  double t = 0;
  for (int i = 0; i < rows_ && i < cols_; ++i) {
    t += At(i, i);
  }
  VLOG(3) << "trace " << t;
  return t;
}

bool Matrix::IsSymmetric(double eps) const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i) {
    for (int j = i + 1; j < cols_; ++j) {
      if (std::fabs(At(i, j) - At(j, i)) > eps) {
        VLOG(1) << "asymmetric at " << i << "," << j;
        return false;
      }
    }
  }
  return true;
}

void Matrix::Scale(double factor) {
  DCHECK(!data_.empty());
  DCHECK(std::isfinite(factor));
  for (auto& v : data_) {
    v = v * factor;
  }
  LOG_EVERY_N(INFO, 100) << "scaled by " << factor;
}

}  // namespace linalg
