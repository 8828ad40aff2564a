#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace stirlab
{
    inline constexpr int kMaxDim = 8;

    /// Small fixed-capacity real vector whose length is chosen at runtime.
    /// Every operation on two vectors assumes equal dimension.
    struct Vec
    {
        std::array<double, kMaxDim> c{};
        int dim = 0;

        Vec() = default;
        explicit Vec(int d) : dim(d) { assert(d >= 0 && d <= kMaxDim); }
        Vec(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size()))
        {
            assert(dim <= kMaxDim);
            int i = 0;
            for (double x : xs)
                c[i++] = x;
        }

        static Vec zero(int d) { return Vec(d); }
        static Vec axis(int d, int k, double scale = 1.0)
        {
            Vec v(d);
            v.c[k] = scale;
            return v;
        }

        int size() const { return dim; }
        double &operator[](int i) { return c[i]; }
        double operator[](int i) const { return c[i]; }

        Vec &operator+=(const Vec &o)
        {
            for (int i = 0; i < dim; ++i)
                c[i] += o.c[i];
            return *this;
        }
        Vec &operator-=(const Vec &o)
        {
            for (int i = 0; i < dim; ++i)
                c[i] -= o.c[i];
            return *this;
        }
        Vec &operator*=(double s)
        {
            for (int i = 0; i < dim; ++i)
                c[i] *= s;
            return *this;
        }

        double dot(const Vec &o) const
        {
            double s = 0.0;
            for (int i = 0; i < dim; ++i)
                s += c[i] * o.c[i];
            return s;
        }
        double norm2() const { return dot(*this); }
        double norm() const { return std::sqrt(norm2()); }

        friend Vec operator+(Vec a, const Vec &b) { return a += b; }
        friend Vec operator-(Vec a, const Vec &b) { return a -= b; }
        friend Vec operator*(Vec a, double s) { return a *= s; }
        friend Vec operator*(double s, Vec a) { return a *= s; }
        friend Vec operator-(Vec a) { return a *= -1.0; }

        friend bool operator==(const Vec &a, const Vec &b)
        {
            if (a.dim != b.dim)
                return false;
            for (int i = 0; i < a.dim; ++i)
                if (a.c[i] != b.c[i])
                    return false;
            return true;
        }
    };
} // namespace stirlab
