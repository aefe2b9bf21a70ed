#include "csflock/linalg.hpp"

#include <cmath>

namespace csf::linalg {

namespace {

// returns the pivot permutation sign, or 0 on singularity
int lu_factor(std::vector<double>& a, int n, std::vector<int>& piv) {
    int sign = 1;
    piv.resize(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int c = 0; c < n; ++c) {
        int best = c;
        double mag = std::abs(a[c * n + c]);
        for (int r = c + 1; r < n; ++r) {
            double m = std::abs(a[r * n + c]);
            if (m > mag) {
                mag = m;
                best = r;
            }
        }
        if (mag == 0.0) return 0;
        if (best != c) {
            for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[best * n + k]);
            std::swap(piv[c], piv[best]);
            sign = -sign;
        }
        double inv = 1.0 / a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] * inv;
            a[r * n + c] = f;
            for (int k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return sign;
}

}  // namespace

double lu_determinant(std::vector<double> a, int n) {
    std::vector<int> piv;
    int sign = lu_factor(a, n, piv);
    if (sign == 0) return 0.0;
    double det = sign;
    for (int i = 0; i < n; ++i) det *= a[i * n + i];
    return det;
}

bool lu_solve(std::vector<double> a, int n, std::vector<double>& rhs) {
    std::vector<int> piv;
    int sign = lu_factor(a, n, piv);
    if (sign == 0) return false;
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = rhs[piv[i]];
    for (int i = 1; i < n; ++i)
        for (int k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) b[i] -= a[i * n + k] * b[k];
        b[i] /= a[i * n + i];
    }
    rhs = std::move(b);
    return true;
}

}  // namespace csf::linalg
