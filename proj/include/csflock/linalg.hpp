#pragma once

#include <vector>

namespace csf::linalg {

/// Determinant of a dense row-major n x n matrix by LU with partial pivoting.
/// The matrix is taken by value and destroyed.
double lu_determinant(std::vector<double> a, int n);

/// Solves a dense system in place; returns false if the matrix is singular.
bool lu_solve(std::vector<double> a, int n, std::vector<double>& rhs);

}  // namespace csf::linalg
