#pragma once

#include "affsup/matrix.hpp"

namespace affsup {

// Softmax over all entries jointly (global-max subtraction). The result sums
// to 1 over the whole matrix; used for the affinity mass loss.
template <class T>
Matrix<T> softmax_matrix(const Matrix<T>& w);

// Per-row softmax (row-max subtraction); each row sums to 1. Used for
// attention feature aggregation.
template <class T>
Matrix<T> softmax_rows(const Matrix<T>& w);

}  // namespace affsup
