#pragma once

#include <string>
#include <variant>

#include "naradi/types.hpp"

namespace naradi {

// Matrix Market I/O restricted to what the solver stores on disk:
// `coordinate real general` for sparse matrices and `array real general`
// for dense blocks. Indices are 1-based on disk, 0-based in memory.
using MmMatrix = std::variant<SpMat, Mat>;

MmMatrix mm_read(const std::string& path);

// Accept either format and convert; used when loading problem/solution files.
SpMat mm_read_sparse(const std::string& path);
Mat mm_read_dense(const std::string& path);

void mm_write(const std::string& path, const SpMat& matrix);
void mm_write(const std::string& path, const Mat& matrix);

}  // namespace naradi
