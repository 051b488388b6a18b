#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bcm/errors.hpp"

namespace bcm {

/// The two points of the boundary of [a,b].
enum class Side { left, right };

/// Sign of the outward normal derivative relative to d/dx: -1 at x=a, +1 at x=b.
constexpr double normal_sign(Side side) noexcept { return side == Side::left ? -1.0 : 1.0; }

/// Uniform space-time grid on [a,b] x [0,2T] with endpoint-inclusive samples.
///
/// Wave speed is 1, so stability of the leapfrog scheme requires dt <= dx. The
/// number of time samples must be odd so that t = T is a grid node and the
/// windows [t, 2T-t] used by the low-pass filter start and end on nodes.
class Grid1D
{
public:
    Grid1D(double a, double b, std::size_t nx, double T, std::size_t nt)
        : a_(a), b_(b), T_(T), nx_(nx), nt_(nt)
    {
        if (!(a < b))
            throw ParameterError("grid: need a < b");
        if (!(T > 0.0))
            throw ParameterError("grid: need T > 0");
        if (nx < 3 || nt < 3)
            throw ParameterError("grid: need nx >= 3 and nt >= 3");
        if ((nt - 1) % 2 != 0)
            throw ParameterError("grid: nt must be odd so that t = T is a sample");
        if (T < (b - a) + 2.0)
            throw ParameterError("grid: T must be at least (b - a) + 2 for the controls to clear the domain");
        dx_ = (b - a) / static_cast<double>(nx - 1);
        dt_ = 2.0 * T / static_cast<double>(nt - 1);
        if (dt_ > dx_ * (1.0 + 1e-12))
            throw StabilityError("grid: CFL violated, dt = " + std::to_string(dt_) +
                                 " > dx = " + std::to_string(dx_));
    }

    /// 24999 x 501 samples of [0,10] x [-1,1].
    static Grid1D paper() { return {-1.0, 1.0, 501, 5.0, 24999}; }
    /// 6001 x 301 samples of [0,10] x [-1,1].
    static Grid1D desk() { return {-1.0, 1.0, 301, 5.0, 6001}; }

    /// Same domain and horizon with dx and dt halved.
    Grid1D refined() const { return {a_, b_, 2 * nx_ - 1, T_, 2 * nt_ - 1}; }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double T() const noexcept { return T_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t nt() const noexcept { return nt_; }
    double dx() const noexcept { return dx_; }
    double dt() const noexcept { return dt_; }

    /// Index of the sample at t = T.
    std::size_t half_index() const noexcept { return (nt_ - 1) / 2; }
    /// Number of samples on [0,T].
    std::size_t half_samples() const noexcept { return half_index() + 1; }

    double x(std::size_t j) const noexcept
    {
        return a_ + (b_ - a_) * static_cast<double>(j) / static_cast<double>(nx_ - 1);
    }
    double t(std::size_t k) const noexcept
    {
        return 2.0 * T_ * static_cast<double>(k) / static_cast<double>(nt_ - 1);
    }

    double center() const noexcept { return 0.5 * (a_ + b_); }
    double half_width() const noexcept { return 0.5 * (b_ - a_); }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    double a_, b_, T_;
    std::size_t nx_, nt_;
    double dx_ = 0.0, dt_ = 0.0;
};

/// Samples of a potential on the spatial nodes of a grid.
class Potential
{
public:
    Potential() = default;
    explicit Potential(std::vector<double> values) : values_(std::move(values)) {}

    static Potential zero(const Grid1D& grid) { return Potential(std::vector<double>(grid.nx(), 0.0)); }

    template <class F>
    static Potential sample(const Grid1D& grid, F&& fn)
    {
        std::vector<double> v(grid.nx());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = fn(grid.x(j));
        return Potential(std::move(v));
    }

    void check(const Grid1D& grid) const
    {
        if (values_.size() != grid.nx())
            throw DimensionError("potential has " + std::to_string(values_.size()) +
                                 " samples, grid has nx = " + std::to_string(grid.nx()));
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }

    Potential scaled(double alpha) const
    {
        auto v = values_;
        for (auto& x : v)
            x *= alpha;
        return Potential(std::move(v));
    }

    friend Potential operator+(const Potential& p, const Potential& q)
    {
        if (p.size() != q.size())
            throw DimensionError("potential sizes differ");
        auto v = p.values_;
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] += q.values_[j];
        return Potential(std::move(v));
    }

    bool is_zero() const noexcept
    {
        for (double x : values_)
            if (x != 0.0)
                return false;
        return true;
    }

private:
    std::vector<double> values_;
};

/// A function on {a,b} x {t0 + k dt}: controls, Dirichlet traces, measurements.
struct BoundarySignal
{
    std::vector<double> left;
    std::vector<double> right;
    double t0 = 0.0;
    double dt = 0.0;

    static BoundarySignal zeros(std::size_t n, double dt)
    {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0, dt};
    }

    /// Samples fl(t), fr(t) at t = k dt, k < n.
    template <class FL, class FR>
    static BoundarySignal sample(std::size_t n, double dt, FL&& fl, FR&& fr)
    {
        auto s = zeros(n, dt);
        for (std::size_t k = 0; k < n; ++k)
        {
            const double t = static_cast<double>(k) * dt;
            s.left[k] = fl(t);
            s.right[k] = fr(t);
        }
        return s;
    }

    std::size_t size() const noexcept { return left.size(); }

    std::vector<double>& side(Side s) noexcept { return s == Side::left ? left : right; }
    const std::vector<double>& side(Side s) const noexcept { return s == Side::left ? left : right; }

    void check() const
    {
        if (left.size() != right.size() || left.empty())
            throw DimensionError("boundary signal sides must have equal nonzero length");
    }

    BoundarySignal& operator+=(const BoundarySignal& o)
    {
        require_compatible(o);
        for (std::size_t k = 0; k < size(); ++k)
        {
            left[k] += o.left[k];
            right[k] += o.right[k];
        }
        return *this;
    }
    BoundarySignal& operator-=(const BoundarySignal& o)
    {
        require_compatible(o);
        for (std::size_t k = 0; k < size(); ++k)
        {
            left[k] -= o.left[k];
            right[k] -= o.right[k];
        }
        return *this;
    }
    BoundarySignal& operator*=(double alpha)
    {
        for (auto& v : left)
            v *= alpha;
        for (auto& v : right)
            v *= alpha;
        return *this;
    }
    friend BoundarySignal operator+(BoundarySignal u, const BoundarySignal& v) { return u += v; }
    friend BoundarySignal operator-(BoundarySignal u, const BoundarySignal& v) { return u -= v; }
    friend BoundarySignal operator*(double alpha, BoundarySignal u) { return u *= alpha; }

    void require_compatible(const BoundarySignal& o) const
    {
        if (size() != o.size() || left.size() != right.size() || o.left.size() != o.right.size())
            throw DimensionError("boundary signals have different lengths (" + std::to_string(size()) +
                                 " vs " + std::to_string(o.size()) + ")");
        if (std::abs(dt - o.dt) > 1e-12 * std::max(std::abs(dt), std::abs(o.dt)))
            throw DimensionError("boundary signals have different time steps");
    }
};

namespace detail {

inline double trapezoid(std::span<const double> u, std::span<const double> v, double h)
{
    const std::size_t n = u.size();
    if (n < 2)
        return 0.0;
    double s = 0.5 * (u[0] * v[0] + u[n - 1] * v[n - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        s += u[i] * v[i];
    return s * h;
}

} // namespace detail

/// Trapezoid approximation of sum over x in {a,b} of the time integral of u v.
inline double inner_product_time_boundary(const BoundarySignal& u, const BoundarySignal& v)
{
    u.require_compatible(v);
    return detail::trapezoid(u.left, v.left, u.dt) + detail::trapezoid(u.right, v.right, u.dt);
}

inline double norm_time_boundary(const BoundarySignal& u)
{
    return std::sqrt(inner_product_time_boundary(u, u));
}

/// Trapezoid approximation of the integral of u v over [a,b].
inline double inner_product_space(std::span<const double> u, std::span<const double> v, const Grid1D& grid)
{
    if (u.size() != grid.nx() || v.size() != grid.nx())
        throw DimensionError("spatial vectors must have nx = " + std::to_string(grid.nx()) + " samples");
    return detail::trapezoid(u, v, grid.dx());
}

inline double norm_space(std::span<const double> u, const Grid1D& grid)
{
    return std::sqrt(inner_product_space(u, u, grid));
}

/// ||u - v|| / ||v|| in L2([a,b]); ||u|| when v vanishes.
inline double relative_l2_error(std::span<const double> u, std::span<const double> v, const Grid1D& grid)
{
    if (u.size() != v.size())
        throw DimensionError("relative_l2_error: size mismatch");
    std::vector<double> d(u.size());
    for (std::size_t j = 0; j < d.size(); ++j)
        d[j] = u[j] - v[j];
    const double denom = norm_space(v, grid);
    const double num = norm_space(d, grid);
    return denom > 0.0 ? num / denom : num;
}

/// Trigonometric polynomial
///   phi(x) = mean + sum_m s_m sin(m k (x - c)) + c_m cos(m k (x - c)),   m = 1..N
/// with base wavenumber k (pi/2 on [-1,1]). Derivatives are closed form.
struct TrigPoly
{
    double mean = 0.0;
    std::vector<double> sin_coeffs;
    std::vector<double> cos_coeffs;
    double wavenumber = std::numbers::pi / 2.0;
    double center = 0.0;

    std::size_t order() const noexcept { return std::max(sin_coeffs.size(), cos_coeffs.size()); }

    /// d^n phi / dx^n at x, n <= 3.
    double derivative(int n, double x) const
    {
        if (n < 0 || n > 3)
            throw ParameterError("TrigPoly: derivative order must be in [0,3]");
        double s = n == 0 ? mean : 0.0;
        const double xi = x - center;
        for (std::size_t i = 0; i < order(); ++i)
        {
            const double m = static_cast<double>(i + 1);
            const double k = m * wavenumber;
            const double sc = i < sin_coeffs.size() ? sin_coeffs[i] : 0.0;
            const double cc = i < cos_coeffs.size() ? cos_coeffs[i] : 0.0;
            if (sc == 0.0 && cc == 0.0)
                continue;
            const double sn = std::sin(k * xi), cs = std::cos(k * xi);
            // d^n sin = k^n sin(. + n pi/2), d^n cos = k^n cos(. + n pi/2)
            double ds = 0.0, dc = 0.0;
            switch (n)
            {
            case 0: ds = sn; dc = cs; break;
            case 1: ds = cs; dc = -sn; break;
            case 2: ds = -sn; dc = -cs; break;
            default: ds = -cs; dc = sn; break;
            }
            s += std::pow(k, n) * (sc * ds + cc * dc);
        }
        return s;
    }

    double operator()(double x) const { return derivative(0, x); }

    /// lambda with (d^2/dx^2 + lambda) phi = 0 when phi has a single frequency.
    double helmholtz_lambda() const
    {
        std::size_t freq = 0;
        for (std::size_t i = 0; i < order(); ++i)
        {
            const double sc = i < sin_coeffs.size() ? sin_coeffs[i] : 0.0;
            const double cc = i < cos_coeffs.size() ? cos_coeffs[i] : 0.0;
            if (sc == 0.0 && cc == 0.0)
                continue;
            if (freq != 0 || mean != 0.0)
                throw ParameterError("TrigPoly: mixed frequencies have no single Helmholtz eigenvalue");
            freq = i + 1;
        }
        const double k = static_cast<double>(freq) * wavenumber;
        return k * k;
    }

    static TrigPoly constant(double value) { return {value, {}, {}}; }

    static TrigPoly sine(std::size_t m, double wavenumber = std::numbers::pi / 2.0, double center = 0.0)
    {
        TrigPoly p{0.0, std::vector<double>(m, 0.0), {}, wavenumber, center};
        p.sin_coeffs[m - 1] = 1.0;
        return p;
    }

    static TrigPoly cosine(std::size_t m, double wavenumber = std::numbers::pi / 2.0, double center = 0.0)
    {
        TrigPoly p{0.0, {}, std::vector<double>(m, 0.0), wavenumber, center};
        p.cos_coeffs[m - 1] = 1.0;
        return p;
    }

    std::vector<double> sample(const Grid1D& grid) const
    {
        std::vector<double> v(grid.nx());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = (*this)(grid.x(j));
        return v;
    }
};

} // namespace bcm
