#pragma once

#include "pmart/scalar.hpp"

#include <array>
#include <cstddef>
#include <utility>

namespace pmart {

// Dense row-major square matrix of fixed order. Only orders 2 and 4 are used.
template <typename T, std::size_t N>
struct Matrix {
    std::array<std::array<T, N>, N> a{};

    static Matrix zero()
    {
        Matrix m;
        for (auto& row : m.a)
            row.fill(T(0));
        return m;
    }

    static Matrix identity()
    {
        Matrix m = zero();
        for (std::size_t i = 0; i < N; ++i)
            m.a[i][i] = T(1);
        return m;
    }

    T& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a[i][j]; }

    friend bool operator==(const Matrix& x, const Matrix& y) { return x.a == y.a; }

    friend Matrix operator*(const Matrix& x, const Matrix& y)
    {
        Matrix r = zero();
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) {
                if (x.a[i][k] == 0)
                    continue;
                for (std::size_t j = 0; j < N; ++j)
                    r.a[i][j] += x.a[i][k] * y.a[k][j];
            }
        return r;
    }

    friend std::array<T, N> operator*(const Matrix& x, const std::array<T, N>& v)
    {
        std::array<T, N> r;
        for (std::size_t i = 0; i < N; ++i) {
            r[i] = T(0);
            for (std::size_t j = 0; j < N; ++j)
                if (!(x.a[i][j] == 0))
                    r[i] += x.a[i][j] * v[j];
        }
        return r;
    }

    bool upper_triangular() const
    {
        for (std::size_t i = 1; i < N; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (a[i][j] != 0)
                    return false;
        return true;
    }
};

// Gauss-Jordan elimination with first-nonzero pivoting. Exact for rationals.
template <typename T, std::size_t N>
Matrix<T, N> inverse(Matrix<T, N> m)
{
    auto inv = Matrix<T, N>::identity();
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        while (piv < N && m.a[piv][col] == 0)
            ++piv;
        if (piv == N)
            throw DomainError("matrix is singular");
        std::swap(m.a[piv], m.a[col]);
        std::swap(inv.a[piv], inv.a[col]);
        T p = m.a[col][col];
        for (std::size_t j = 0; j < N; ++j) {
            m.a[col][j] /= p;
            inv.a[col][j] /= p;
        }
        for (std::size_t r = 0; r < N; ++r) {
            if (r == col || m.a[r][col] == 0)
                continue;
            T f = m.a[r][col];
            for (std::size_t j = 0; j < N; ++j) {
                m.a[r][j] -= f * m.a[col][j];
                inv.a[r][j] -= f * inv.a[col][j];
            }
        }
    }
    return inv;
}

} // namespace pmart
