// Small fixed-size 2D vector/matrix types used throughout the toolkit.
// These are deliberately tiny value types; all heavy lifting happens in the
// sparse solvers.
#pragma once

#include <cmath>

namespace eroopt {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline Vec2 operator-(const Vec2& a) { return Vec2(-a.x, -a.y); }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
// Rotate by +90 degrees (counterclockwise).
inline Vec2 perp(const Vec2& a) { return Vec2(-a.y, a.x); }
inline Vec2 normalized(const Vec2& a) {
    double n = norm(a);
    return (n > 0.0) ? Vec2(a.x / n, a.y / n) : Vec2(0.0, 0.0);
}

// 2x2 matrix, row-major: m[r][c].
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() {
        Mat2 I;
        I.m[0][0] = I.m[1][1] = 1.0;
        return I;
    }
    static Mat2 outer(const Vec2& a, const Vec2& b) {
        Mat2 r;
        r.m[0][0] = a.x * b.x; r.m[0][1] = a.x * b.y;
        r.m[1][0] = a.y * b.x; r.m[1][1] = a.y * b.y;
        return r;
    }

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Mat2& operator+=(const Mat2& o) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) m[r][c] += o.m[r][c];
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) m[r][c] -= o.m[r][c];
        return *this;
    }
    Mat2& operator*=(double s) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) m[r][c] *= s;
        return *this;
    }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
inline Mat2 operator-(const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = -a.m[i][j];
    return r;
}
inline Mat2 operator*(double s, Mat2 a) { return a *= s; }
inline Mat2 operator*(Mat2 a, double s) { return a *= s; }

inline Vec2 operator*(const Mat2& A, const Vec2& v) {
    return Vec2(A.m[0][0] * v.x + A.m[0][1] * v.y,
                A.m[1][0] * v.x + A.m[1][1] * v.y);
}
inline Mat2 operator*(const Mat2& A, const Mat2& B) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.m[i][j] = A.m[i][0] * B.m[0][j] + A.m[i][1] * B.m[1][j];
    return r;
}
inline Mat2 transpose(const Mat2& A) {
    Mat2 r;
    r.m[0][0] = A.m[0][0]; r.m[0][1] = A.m[1][0];
    r.m[1][0] = A.m[0][1]; r.m[1][1] = A.m[1][1];
    return r;
}
inline double trace(const Mat2& A) { return A.m[0][0] + A.m[1][1]; }
inline double det(const Mat2& A) {
    return A.m[0][0] * A.m[1][1] - A.m[0][1] * A.m[1][0];
}
// Frobenius inner product A : B.
inline double ddot(const Mat2& A, const Mat2& B) {
    return A.m[0][0] * B.m[0][0] + A.m[0][1] * B.m[0][1] +
           A.m[1][0] * B.m[1][0] + A.m[1][1] * B.m[1][1];
}
inline double frobenius_norm(const Mat2& A) { return std::sqrt(ddot(A, A)); }
inline Mat2 inverse(const Mat2& A) {
    double d = det(A);
    Mat2 r;
    r.m[0][0] =  A.m[1][1] / d; r.m[0][1] = -A.m[0][1] / d;
    r.m[1][0] = -A.m[1][0] / d; r.m[1][1] =  A.m[0][0] / d;
    return r;
}

} // namespace eroopt
